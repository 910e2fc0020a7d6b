#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "moenas/adaptive.hpp"
#include "moenas/cli.hpp"
#include "moenas/config.hpp"
#include "moenas/decomposition.hpp"
#include "moenas/engine.hpp"
#include "moenas/error.hpp"
#include "moenas/evaluators.hpp"
#include "moenas/genome.hpp"
#include "moenas/json.hpp"
#include "moenas/metrics.hpp"
#include "moenas/objectives.hpp"
#include "moenas/surrogate.hpp"

namespace py = pybind11;
using namespace moenas;

namespace {

using Pair = std::pair<double, double>;

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::handle& obj) {
    return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

ObjectiveVector to_vec(const Pair& p) { return {p.first, p.second}; }
Pair to_pair(const ObjectiveVector& v) { return {v.f1, v.f2}; }

std::vector<ObjectiveVector> to_vecs(const std::vector<Pair>& ps) {
    std::vector<ObjectiveVector> out;
    out.reserve(ps.size());
    for (const auto& p : ps) {
        out.push_back(to_vec(p));
    }
    return out;
}

std::vector<Pair> to_pairs(const std::vector<ObjectiveVector>& vs) {
    std::vector<Pair> out;
    out.reserve(vs.size());
    for (const auto& v : vs) {
        out.push_back(to_pair(v));
    }
    return out;
}

py::list records_to_py(const std::vector<EvaluationRecord>& records) {
    py::list out;
    for (const auto& r : records) {
        out.append(to_py(Json(r)));
    }
    return out;
}

py::dict run_to_py(const RunResult& r) {
    py::dict d;
    d["nds"] = records_to_py(r.nds);
    d["records"] = records_to_py(r.records);
    d["counters"] = to_py(Json(r.counters));
    return d;
}

Restriction restriction_from(const std::map<std::string, std::vector<int>>& fields) {
    Restriction r;
    for (const auto& [name, values] : fields) {
        r.allow(name, values);
    }
    return r;
}

py::dict front_to_py(const FrontSummary& f) {
    py::dict d;
    d["points"] = to_pairs(f.points);
    d["records"] = records_to_py(f.records);
    d["enumerated"] = f.enumerated;
    d["max_point"] = Pair{f.max_point[0], f.max_point[1]};
    d["reference_point"] = Pair{f.reference_point()[0], f.reference_point()[1]};
    return d;
}

std::vector<std::string> op_names(const Genome& g) {
    std::vector<std::string> out;
    for (Op op : g.ops) {
        out.emplace_back(op_name(op));
    }
    return out;
}

void set_ops(Genome& g, const std::vector<std::string>& names) {
    if (names.size() != g.ops.size()) {
        throw InvalidGenome("ops needs exactly 4 entries");
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
        g.ops[k] = parse_op(names[k]);
    }
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Surrogate-assisted multiobjective architecture search core";

    auto base = py::register_exception<Error>(m, "MoenasError", PyExc_RuntimeError);
    py::register_exception<InvalidGenome>(m, "InvalidGenome", base);
    py::register_exception<RangeError>(m, "RangeError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);
    auto eval = py::register_exception<EvaluationError>(m, "EvaluationError", base);
    py::register_exception<CheckpointError>(m, "CheckpointError", base);
    static_cast<void>(eval);

    m.attr("SPACE_SIZE") = kSpaceSize;
    m.attr("GENE_NAMES") = std::vector<std::string>(kGeneNames.begin(), kGeneNames.end());
    m.attr("GENE_CARDINALITY") = std::vector<int>(kGeneCardinality.begin(), kGeneCardinality.end());

    py::class_<Genome>(m, "Genome")
        .def(py::init([](int i2, int i3, int i4, const std::vector<std::string>& ops, int n_c, int n_f, int lr_level) {
                 Genome g;
                 g.i2 = i2;
                 g.i3 = i3;
                 g.i4 = i4;
                 set_ops(g, ops);
                 g.n_c = n_c;
                 g.n_f = n_f;
                 g.lr_level = lr_level;
                 return g;
             }),
             py::arg("i2") = 0, py::arg("i3") = 0, py::arg("i4") = 0,
             py::arg("ops") = std::vector<std::string>{"CONV3D", "CONV3D", "CONV3D", "CONV3D"}, py::arg("n_c") = 2,
             py::arg("n_f") = 3, py::arg("lr_level") = 1)
        .def_readwrite("i2", &Genome::i2)
        .def_readwrite("i3", &Genome::i3)
        .def_readwrite("i4", &Genome::i4)
        .def_property("ops", &op_names, &set_ops)
        .def_readwrite("n_c", &Genome::n_c)
        .def_readwrite("n_f", &Genome::n_f)
        .def_readwrite("lr_level", &Genome::lr_level)
        .def_property_readonly("learning_rate", &Genome::learning_rate)
        .def("is_valid", [](const Genome& g) { return validate(g); })
        .def("rank", &canonical_rank)
        .def_static("from_rank", &genome_from_rank, py::arg("rank"))
        .def("to_dict", [](const Genome& g) { return to_py(Json(g)); })
        .def_static("from_dict", [](const py::dict& d) { return from_py(d).get<Genome>(); }, py::arg("fields"))
        .def_static("parse", &parse_genome, py::arg("text"))
        .def("__str__", [](const Genome& g) { return to_string(g); })
        .def("__repr__", [](const Genome& g) { return "Genome(" + to_string(g) + ")"; })
        .def("__eq__", [](const Genome& a, const Genome& b) { return a == b; })
        .def("__lt__", [](const Genome& a, const Genome& b) { return a < b; })
        .def("__hash__", [](const Genome& g) { return GenomeHash{}(g); });

    m.def(
        "decode",
        [](const Genome& g, int num_classes) {
            const auto d = decode(g, num_classes);
            py::dict out;
            out["num_cells"] = d.num_cells;
            out["cell_filters"] = d.cell_filters;
            py::list nodes;
            for (const auto& n : d.node_graph) {
                nodes.append(py::make_tuple(n.source, std::string(op_name(n.op))));
            }
            out["node_graph"] = nodes;
            out["param_count"] = d.param_count;
            return out;
        },
        py::arg("genome"), py::arg("num_classes") = kDefaultNumClasses);
    m.def(
        "count_params", [](const Genome& g, int num_classes) { return decode(g, num_classes).param_count; },
        py::arg("genome"), py::arg("num_classes") = kDefaultNumClasses);

    py::class_<ObjectiveConfig>(m, "ObjectiveConfig")
        .def(py::init([](double alpha, double beta, int num_classes, int total_epochs) {
                 ObjectiveConfig c{alpha, beta, num_classes, total_epochs};
                 validate(c);
                 return c;
             }),
             py::arg("alpha") = 0.25, py::arg("beta") = 0.10, py::arg("num_classes") = 4,
             py::arg("total_epochs") = 60)
        .def_readonly("alpha", &ObjectiveConfig::alpha)
        .def_readonly("beta", &ObjectiveConfig::beta)
        .def_readonly("num_classes", &ObjectiveConfig::num_classes)
        .def_readonly("total_epochs", &ObjectiveConfig::total_epochs);

    py::class_<TrainingMetrics>(m, "TrainingMetrics")
        .def(py::init([](double train, double val, int e_max, int total_epochs) {
                 return TrainingMetrics{train, val, e_max, total_epochs};
             }),
             py::arg("mc_dice_train"), py::arg("mc_dice_val"), py::arg("e_max"), py::arg("total_epochs") = 60)
        .def_readonly("mc_dice_train", &TrainingMetrics::mc_dice_train)
        .def_readonly("mc_dice_val", &TrainingMetrics::mc_dice_val)
        .def_readonly("e_max", &TrainingMetrics::e_max)
        .def_readonly("total_epochs", &TrainingMetrics::total_epochs)
        .def("__eq__", [](const TrainingMetrics& a, const TrainingMetrics& b) { return a == b; });

    m.def("ese", &ese, py::arg("metrics"), py::arg("config") = ObjectiveConfig{});
    m.def("ese_max", &ese_max, py::arg("config") = ObjectiveConfig{});
    m.def("f2", &f2, py::arg("param_count"));
    m.def(
        "objectives",
        [](const TrainingMetrics& metrics, std::int64_t param_count, const ObjectiveConfig& cfg) {
            return to_pair(objectives(metrics, param_count, cfg));
        },
        py::arg("metrics"), py::arg("param_count"), py::arg("config") = ObjectiveConfig{});
    m.def("synthetic_metrics", &synthetic_metrics, py::arg("genome"), py::arg("config") = ObjectiveConfig{});

    m.def("init_weights", &init_weights, py::arg("n"));
    m.def(
        "neighborhoods",
        [](const std::vector<Weight>& weights, int t) { return neighborhoods(weights, t); }, py::arg("weights"),
        py::arg("t"));
    m.def(
        "pbi",
        [](const Pair& f, const Weight& w, const Point& ideal, const Point& nadir, double theta) {
            return pbi(to_vec(f), w, ideal, nadir, theta);
        },
        py::arg("f"), py::arg("weight"), py::arg("ideal"), py::arg("nadir"), py::arg("theta") = 5.0);
    m.def(
        "dominates", [](const Pair& a, const Pair& b) { return dominates(to_vec(a), to_vec(b)); }, py::arg("a"),
        py::arg("b"));

    py::class_<ValueScoreTable>(m, "ValueScoreTable")
        .def(py::init<>())
        .def("record_trained", &ValueScoreTable::record_trained, py::arg("genome"), py::arg("ese"),
             py::arg("config") = ObjectiveConfig{})
        .def("score", &ValueScoreTable::score, py::arg("gene"), py::arg("value"))
        .def("use_count", &ValueScoreTable::use_count, py::arg("gene"), py::arg("value"))
        .def(
            "mutation_probs",
            [](const ValueScoreTable& t, std::size_t gene, double eps) { return mutation_probs(t, gene, eps); },
            py::arg("gene"), py::arg("epsilon") = 0.002);
    m.def(
        "subproblem_probs",
        [](const std::vector<double>& utilities, double eps) {
            return subproblem_probs(SubproblemUtility::from_json(Json(utilities)), eps);
        },
        py::arg("utilities"), py::arg("epsilon") = 0.002);

    m.def(
        "nondominated", [](const std::vector<Pair>& pts) { return to_pairs(nondominated(to_vecs(pts))); },
        py::arg("points"));
    m.def(
        "hypervolume",
        [](const std::vector<Pair>& front, const Pair& ref) {
            return hypervolume(to_vecs(front), Point{ref.first, ref.second});
        },
        py::arg("front"), py::arg("reference_point"));
    m.def(
        "igd", [](const std::vector<Pair>& front, const std::vector<Pair>& ref) { return igd(to_vecs(front), to_vecs(ref)); },
        py::arg("front"), py::arg("reference_front"));
    m.def(
        "true_front",
        [](const ObjectiveConfig& cfg, const std::map<std::string, std::vector<int>>& restriction) {
            SyntheticEvaluator ev;
            return front_to_py(true_front(ev, cfg, restriction_from(restriction)));
        },
        py::arg("config") = ObjectiveConfig{}, py::arg("restriction") = std::map<std::string, std::vector<int>>{});

    py::class_<EngineConfig>(m, "EngineConfig")
        .def(py::init([](std::uint64_t seed, const std::string& variant) {
                 EngineConfig c;
                 c.seed = seed;
                 c.variant = parse_variant(variant);
                 return c;
             }),
             py::arg("seed") = 0, py::arg("variant") = "samea")
        .def_static(
            "from_toml", [](const std::string& text) { return parse_config(text); }, py::arg("text"))
        .def_static(
            "load", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"))
        .def("to_toml", [](const EngineConfig& c) { return format_config(c); })
        .def("to_dict", [](const EngineConfig& c) { return to_py(Json(c)); })
        .def_readwrite("seed", &EngineConfig::seed)
        .def_property(
            "variant", [](const EngineConfig& c) { return std::string(variant_name(c.variant)); },
            [](EngineConfig& c, const std::string& v) { c.variant = parse_variant(v); })
        .def_readwrite("population", &EngineConfig::population)
        .def_readwrite("neighborhood", &EngineConfig::neighborhood)
        .def_readwrite("generations", &EngineConfig::generations)
        .def_readwrite("learning_generations", &EngineConfig::learning_generations)
        .def_readwrite("mutation_rate", &EngineConfig::mutation_rate)
        .def_readwrite("max_attempts", &EngineConfig::max_attempts)
        .def("validate", [](const EngineConfig& c) { validate(c); });

    m.def(
        "run",
        [](const EngineConfig& cfg, bool with_log) {
            std::vector<std::string> lines;
            LogSink sink;
            if (with_log) {
                sink = [&lines](const std::string& line) { lines.push_back(line); };
            }
            Engine engine(cfg, nullptr, sink);
            const auto result = engine.run();
            auto out = run_to_py(result);
            if (with_log) {
                out["log"] = lines;
            }
            return out;
        },
        py::arg("config"), py::arg("log") = false);
    m.def(
        "execute_run",
        [](const EngineConfig& cfg, const std::filesystem::path& out_dir, std::optional<int> stop_after) {
            return run_to_py(execute_run(cfg, out_dir, nullptr, stop_after));
        },
        py::arg("config"), py::arg("out_dir"), py::arg("stop_after") = std::nullopt);
    m.def(
        "resume_run", [](const std::filesystem::path& checkpoint) { return run_to_py(resume_run(checkpoint)); },
        py::arg("checkpoint"));
    m.def(
        "assess",
        [](const std::vector<py::dict>& nds, const EngineConfig& cfg) {
            const auto oracle = oracle_for(cfg);
            if (!oracle) {
                throw Error("the configured evaluator is not enumerable");
            }
            std::vector<EvaluationRecord> records;
            for (const auto& r : nds) {
                records.push_back(from_py(r).get<EvaluationRecord>());
            }
            const auto q = assess(records, *oracle);
            py::dict out;
            out["hypervolume"] = q.hypervolume;
            out["oracle_hypervolume"] = q.oracle_hypervolume;
            out["ratio"] = q.ratio;
            out["igd"] = q.igd;
            out["reference_point"] = Pair{q.reference[0], q.reference[1]};
            return out;
        },
        py::arg("nds"), py::arg("config"));

    py::class_<RandomForest>(m, "RandomForest")
        .def_static(
            "fit",
            [](const std::vector<Genome>& genomes, const std::vector<double>& targets, int num_trees,
               int min_samples_split, int mtry, std::uint64_t seed) {
                std::vector<FeatureVector> x;
                x.reserve(genomes.size());
                for (const auto& g : genomes) {
                    x.push_back(encode(g));
                }
                return RandomForest::fit(x, targets, ForestConfig{num_trees, min_samples_split, mtry, seed});
            },
            py::arg("genomes"), py::arg("targets"), py::arg("num_trees") = 100, py::arg("min_samples_split") = 5,
            py::arg("mtry") = 8, py::arg("seed") = 0)
        .def(
            "predict",
            [](const RandomForest& f, const Genome& g) {
                const auto p = f.predict(encode(g));
                return std::pair<double, double>{p.mean, p.dispersion};
            },
            py::arg("genome"))
        .def("__len__", [](const RandomForest& f) { return f.trees().size(); });
}
