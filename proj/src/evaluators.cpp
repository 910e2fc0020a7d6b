#include "moenas/evaluators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "moenas/error.hpp"
#include "moenas/rng.hpp"

namespace moenas {

namespace {

double op_quality(Op op) {
    switch (op) {
    case Op::Conv3D: return 1.00;
    case Op::P3D: return 0.92;
    case Op::Conv2D: return 0.80;
    }
    return 0.0;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
            cell.pop_back();
        }
        const auto first = cell.find_first_not_of(' ');
        out.push_back(first == std::string::npos ? std::string{} : cell.substr(first));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

} // namespace

std::string_view phase_name(Phase p) noexcept {
    switch (p) {
    case Phase::Init: return "INIT";
    case Phase::Learn: return "LEARN";
    case Phase::Exploit: return "EXPLOIT";
    }
    return "?";
}

Phase parse_phase(std::string_view name) {
    if (name == "INIT") return Phase::Init;
    if (name == "LEARN") return Phase::Learn;
    if (name == "EXPLOIT") return Phase::Exploit;
    throw Error("unknown phase '" + std::string(name) + "'");
}

void to_json(Json& j, const EvaluationRecord& r) {
    j = Json::object();
    j["genome"] = r.genome;
    j["metrics"] = r.metrics;
    j["objectives"] = r.objectives;
    j["param_count"] = r.param_count;
    j["generation"] = r.generation;
    j["phase"] = std::string(phase_name(r.phase));
    j["attempt_id"] = r.attempt_id;
}

void from_json(const Json& j, EvaluationRecord& r) {
    r.genome = j.at("genome").get<Genome>();
    r.metrics = j.at("metrics").get<TrainingMetrics>();
    r.objectives = j.at("objectives").get<ObjectiveVector>();
    r.param_count = j.at("param_count").get<std::int64_t>();
    r.generation = j.at("generation").get<int>();
    r.phase = parse_phase(j.at("phase").get<std::string>());
    r.attempt_id = j.at("attempt_id").get<std::int64_t>();
}

EvaluationRecord make_record(const Genome& g, const TrainingMetrics& m, const ObjectiveConfig& cfg,
                             int generation, Phase phase, std::int64_t attempt_id) {
    EvaluationRecord r;
    r.genome = g;
    r.metrics = m;
    r.param_count = decode(g, cfg.num_classes).param_count;
    r.objectives = objectives(m, r.param_count, cfg);
    r.generation = generation;
    r.phase = phase;
    r.attempt_id = attempt_id;
    return r;
}

void to_json(Json& j, const EvaluatorKind& k) {
    std::visit(
        [&](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, SyntheticSpec>) {
                j = Json{{"kind", "synthetic"}, {"noise_sigma", spec.noise_sigma}, {"noise_seed", spec.noise_seed}};
            } else if constexpr (std::is_same_v<T, TabularSpec>) {
                j = Json{{"kind", "tabular"}, {"path", spec.path.string()}};
            } else {
                j = Json{{"kind", "external"},
                         {"command", spec.command},
                         {"args", spec.args},
                         {"timeout", spec.timeout_seconds}};
            }
        },
        k);
}

void from_json(const Json& j, EvaluatorKind& k) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "synthetic") {
        k = SyntheticSpec{j.value("noise_sigma", 0.0), j.value("noise_seed", std::uint64_t{0})};
    } else if (kind == "tabular") {
        k = TabularSpec{j.at("path").get<std::string>()};
    } else if (kind == "external") {
        k = ExternalSpec{j.at("command").get<std::string>(), j.value("args", std::vector<std::string>{}),
                         j.value("timeout", 600.0)};
    } else {
        throw Error("unknown evaluator kind '" + kind + "'");
    }
}

std::vector<TrainingMetrics> Evaluator::evaluate_batch(std::span<const Genome> genomes, const ObjectiveConfig& cfg) {
    std::vector<TrainingMetrics> out;
    out.reserve(genomes.size());
    for (const auto& g : genomes) {
        out.push_back(evaluate(g, cfg));
    }
    return out;
}

TrainingMetrics synthetic_metrics(const Genome& g, const ObjectiveConfig& cfg) {
    const auto d = decode(g, cfg.num_classes);
    const double c = cfg.num_classes;
    const double e = cfg.total_epochs;
    const double cap = std::log(static_cast<double>(d.param_count));
    double q = 0.0;
    for (Op op : g.ops) {
        q += op_quality(op);
    }
    q /= kNodesPerCell;
    const double conn = 0.9 + 0.025 * longest_path(d);
    const double pen = 1.0 - 0.02 * std::abs(g.lr_level - 4);
    const double saturation = 1.0 - std::exp(-cap / 12.0);

    TrainingMetrics m;
    m.total_epochs = cfg.total_epochs;
    m.mc_dice_val = std::clamp(c * saturation * q * conn * pen, 0.0, c);
    m.mc_dice_train = std::min(c, 1.05 * m.mc_dice_val);
    const double epoch = std::round(e * (0.5 + 0.5 * saturation));
    m.e_max = static_cast<int>(std::clamp(epoch, 1.0, e));
    return m;
}

TrainingMetrics SyntheticEvaluator::evaluate(const Genome& g, const ObjectiveConfig& cfg) {
    auto m = synthetic_metrics(g, cfg);
    if (spec_.noise_sigma > 0.0) {
        Rng rng(derive_seed(spec_.noise_seed, "synthetic-noise", canonical_rank(g)));
        const double c = cfg.num_classes;
        m.mc_dice_val = std::clamp(m.mc_dice_val + spec_.noise_sigma * rng.normal(), 0.0, c);
        m.mc_dice_train = std::clamp(m.mc_dice_train + spec_.noise_sigma * rng.normal(), 0.0, c);
    }
    return m;
}

TabularEvaluator::TabularEvaluator(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open table '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("table '" + path.string() + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != tabular_header()) {
        throw Error("table '" + path.string() + "': unexpected header '" + line + "'");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_csv(line);
        const auto where = path.string() + ":" + std::to_string(lineno);
        if (cells.size() != kGeneCount + 3) {
            throw Error(where + ": expected " + std::to_string(kGeneCount + 3) + " columns");
        }
        std::string text;
        for (std::size_t i = 0; i < kGeneCount; ++i) {
            if (i > 0) {
                text += ',';
            }
            text += std::string(kGeneNames[i]) + "=" + cells[i];
        }
        try {
            const Genome g = parse_genome(text);
            TrainingMetrics m;
            m.mc_dice_train = std::stod(cells[10]);
            m.mc_dice_val = std::stod(cells[11]);
            m.e_max = std::stoi(cells[12]);
            if (!rows_.emplace(g, m).second) {
                throw Error("duplicate genome");
            }
        } catch (const std::exception& ex) {
            throw Error(where + ": " + ex.what());
        }
    }
}

TrainingMetrics TabularEvaluator::evaluate(const Genome& g, const ObjectiveConfig& cfg) {
    const auto it = rows_.find(g);
    if (it == rows_.end()) {
        throw MissingRow("missing-row: " + to_string(g));
    }
    auto m = it->second;
    m.total_epochs = cfg.total_epochs;
    validate(m, cfg);
    return m;
}

std::string tabular_header() {
    std::string h;
    for (auto name : kGeneNames) {
        h += name;
        h += ',';
    }
    return h + "mc_dice_train,mc_dice_val,e_max";
}

void write_table(const std::filesystem::path& path, const std::map<Genome, TrainingMetrics>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write table '" + path.string() + "'");
    }
    out << tabular_header() << '\n';
    for (const auto& [g, m] : rows) {
        for (std::size_t i = 0; i < kGeneCount; ++i) {
            if (i >= 3 && i <= 6) {
                out << op_name(g.ops[i - 3]);
            } else {
                out << gene_value(i, gene_index(g, i));
            }
            out << ',';
        }
        out << Json(m.mc_dice_train).dump() << ',' << Json(m.mc_dice_val).dump() << ',' << m.e_max << '\n';
    }
}

Json make_request(std::int64_t id, const Genome& g, const ObjectiveConfig& cfg) {
    Json j;
    j["id"] = id;
    j["genome"] = g;
    j["epochs"] = cfg.total_epochs;
    j["num_classes"] = cfg.num_classes;
    return j;
}

Json make_response(std::int64_t id, const TrainingMetrics& m) {
    Json j;
    j["id"] = id;
    j["mc_dice_train"] = m.mc_dice_train;
    j["mc_dice_val"] = m.mc_dice_val;
    j["e_max"] = m.e_max;
    return j;
}

std::pair<std::int64_t, TrainingMetrics> parse_response(const std::string& line, const ObjectiveConfig& cfg) {
    Json j;
    try {
        j = Json::parse(line);
    } catch (const Json::parse_error& ex) {
        throw ProtocolError("protocol-error: malformed response line: " + std::string(ex.what()));
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) {
        throw ProtocolError("protocol-error: response without integer id");
    }
    const auto id = j["id"].get<std::int64_t>();
    if (j.contains("error")) {
        throw ProtocolError("protocol-error: worker reported error for id " + std::to_string(id) + ": " +
                            j["error"].dump());
    }
    const auto number = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number()) {
            throw ProtocolError(std::string("protocol-error: response missing numeric '") + key + "'");
        }
        return j[key];
    };
    TrainingMetrics m;
    m.mc_dice_train = number("mc_dice_train").get<double>();
    m.mc_dice_val = number("mc_dice_val").get<double>();
    if (!number("e_max").is_number_integer()) {
        throw ProtocolError("protocol-error: e_max must be an integer");
    }
    m.e_max = j["e_max"].get<int>();
    m.total_epochs = cfg.total_epochs;
    try {
        validate(m, cfg);
    } catch (const RangeError& ex) {
        throw ProtocolError(std::string("protocol-error: ") + ex.what());
    }
    return {id, m};
}

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorKind& kind) {
    return std::visit(
        [](const auto& spec) -> std::unique_ptr<Evaluator> {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, SyntheticSpec>) {
                return std::make_unique<SyntheticEvaluator>(spec);
            } else if constexpr (std::is_same_v<T, TabularSpec>) {
                return std::make_unique<TabularEvaluator>(spec.path);
            } else {
                return std::make_unique<ExternalEvaluator>(spec);
            }
        },
        kind);
}

} // namespace moenas
