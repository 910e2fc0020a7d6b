#include "moenas/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "moenas/config.hpp"
#include "moenas/error.hpp"
#include "moenas/io.hpp"

namespace moenas {

namespace fs = std::filesystem;

namespace {

std::vector<ObjectiveVector> objectives_of(const std::vector<EvaluationRecord>& recs) {
    std::vector<ObjectiveVector> out;
    out.reserve(recs.size());
    for (const auto& r : recs) {
        out.push_back(r.objectives);
    }
    return out;
}

void write_checkpoint(const Engine& engine, const fs::path& dir) {
    const auto tmp = dir / (std::string(kCheckpointFile) + ".tmp");
    write_file(tmp, engine.checkpoint().dump());
    fs::rename(tmp, dir / kCheckpointFile);
}

Json summary_json(const Engine& engine, const RunResult& result, const FrontSummary* oracle) {
    const auto& cfg = engine.config();
    Json j;
    j["variant"] = std::string(variant_name(cfg.variant));
    j["seed"] = cfg.seed;
    j["generations"] = engine.generation();
    j["finished"] = engine.finished();
    j["counters"] = result.counters;
    j["nds_size"] = result.nds.size();
    if (oracle != nullptr) {
        const auto q = assess(result.nds, *oracle);
        j["reference_point"] = q.reference;
        j["hypervolume"] = q.hypervolume;
        j["oracle_hypervolume"] = q.oracle_hypervolume;
        j["hypervolume_ratio"] = q.ratio;
        j["igd"] = q.igd;
        j["oracle_cardinality"] = oracle->cardinality();
    }
    return j;
}

// Drives the engine, keeping the run log, checkpoint and final artifacts in dir.
RunResult drive(Engine& engine, std::ofstream& log, const fs::path& dir, const FrontSummary* oracle,
                std::optional<int> stop_after) {
    while (!engine.finished() && (!stop_after || engine.generation() < *stop_after)) {
        engine.step();
        log.flush();
        if (!log) {
            throw Error("cannot write run log in '" + dir.string() + "'");
        }
        write_checkpoint(engine, dir);
    }
    auto result = engine.result();
    write_nds_csv(dir / kNdsFile, result.nds);
    write_file(dir / kSummaryFile, summary_json(engine, result, oracle).dump(2) + "\n");
    return result;
}

int report(const std::exception& ex, std::ostream& err) {
    if (const auto* c = dynamic_cast<const ConfigError*>(&ex)) {
        err << "config error: " << c->what() << '\n';
        return kExitUsage;
    }
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
}

std::string fixed(double v, int digits = 6) {
    std::ostringstream os;
    os << std::setprecision(digits) << std::fixed << v;
    return os.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::optional<FrontSummary> oracle_for(const EngineConfig& cfg) {
    auto evaluator = make_evaluator(cfg.evaluator);
    if (!evaluator->enumerable()) {
        return std::nullopt;
    }
    return true_front(*evaluator, cfg.objective);
}

FrontQuality assess(const std::vector<EvaluationRecord>& nds, const FrontSummary& oracle) {
    FrontQuality q;
    q.reference = oracle.reference_point();
    const auto pts = objectives_of(nds);
    q.hypervolume = pts.empty() ? 0.0 : hypervolume(pts, q.reference);
    q.oracle_hypervolume = hypervolume(oracle.points, q.reference);
    q.ratio = q.oracle_hypervolume > 0.0 ? q.hypervolume / q.oracle_hypervolume : 0.0;
    q.igd = pts.empty() ? std::numeric_limits<double>::infinity() : igd(pts, oracle.points);
    return q;
}

RunResult execute_run(const EngineConfig& cfg, const fs::path& out_dir, const FrontSummary* oracle,
                      std::optional<int> stop_after) {
    fs::create_directories(out_dir);
    write_file(out_dir / kConfigFile, format_config(cfg));
    std::ofstream log(out_dir / kRunLogFile, std::ios::binary | std::ios::trunc);
    if (!log) {
        throw Error("cannot create run log in '" + out_dir.string() + "'");
    }
    Engine engine(cfg, nullptr, [&log](const std::string& line) { log << line << '\n'; });
    return drive(engine, log, out_dir, oracle, stop_after);
}

RunResult resume_run(const fs::path& checkpoint_path, const FrontSummary* oracle) {
    Json j;
    try {
        j = Json::parse(read_file(checkpoint_path));
    } catch (const Json::exception& ex) {
        throw CheckpointError(std::string("corrupt checkpoint: ") + ex.what());
    } catch (const Error& ex) {
        throw CheckpointError(ex.what());
    }
    const fs::path dir = checkpoint_path.parent_path().empty() ? fs::path(".") : checkpoint_path.parent_path();
    const auto log_path = dir / kRunLogFile;
    std::ofstream log;
    Engine engine = Engine::from_checkpoint(j, nullptr, [&log](const std::string& line) { log << line << '\n'; });
    std::error_code ec;
    const auto size = fs::file_size(log_path, ec);
    if (ec || size < engine.log_bytes()) {
        throw CheckpointError("run log '" + log_path.string() + "' is shorter than the checkpoint records");
    }
    // Lines written after the checkpoint belong to an interrupted generation.
    fs::resize_file(log_path, engine.log_bytes());
    log.open(log_path, std::ios::binary | std::ios::app);
    if (!log) {
        throw Error("cannot open run log '" + log_path.string() + "'");
    }
    return drive(engine, log, dir, oracle, std::nullopt);
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    auto number = [&](std::string_view s) {
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
            throw ConfigError("seeds", "invalid seed '" + std::string(s) + "'");
        }
        return v;
    };
    std::vector<std::uint64_t> out;
    if (const auto dots = text.find(".."); dots != std::string_view::npos) {
        const auto lo = number(text.substr(0, dots));
        const auto hi = number(text.substr(dots + 2));
        if (hi < lo) {
            throw ConfigError("seeds", "empty seed range '" + std::string(text) + "'");
        }
        for (auto s = lo; s <= hi; ++s) {
            out.push_back(s);
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find(',', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        out.push_back(number(text.substr(pos, end - pos)));
        pos = end + 1;
    }
    return out;
}

std::vector<Variant> parse_variant_list(std::string_view text) {
    std::vector<Variant> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find(',', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        try {
            out.push_back(parse_variant(text.substr(pos, end - pos)));
        } catch (const Error& ex) {
            throw ConfigError("variants", ex.what());
        }
        pos = end + 1;
    }
    return out;
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed, const fs::path& out_dir,
            std::optional<int> stop_after, std::ostream& out, std::ostream& err) {
    try {
        auto cfg = load_config(config_path);
        if (seed) {
            cfg.seed = *seed;
        }
        const auto oracle = oracle_for(cfg);
        const auto result = execute_run(cfg, out_dir, oracle ? &*oracle : nullptr, stop_after);
        out << "trained " << result.counters.trained << ", proposed " << result.counters.proposed << ", NDS size "
            << result.nds.size();
        if (oracle) {
            out << ", hypervolume ratio " << fixed(assess(result.nds, *oracle).ratio);
        }
        out << "\nwrote " << (out_dir / kNdsFile).string() << '\n';
        return kExitOk;
    } catch (const std::exception& ex) {
        return report(ex, err);
    }
}

int cmd_oracle(const fs::path& config_path, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    try {
        const auto cfg = load_config(config_path);
        const auto oracle = oracle_for(cfg);
        if (!oracle) {
            throw ConfigError("evaluator.kind", "the oracle needs an enumerable evaluator (synthetic or tabular)");
        }
        fs::create_directories(out_dir);
        write_nds_csv(out_dir / kOracleFrontFile, oracle->records);
        const auto ref = oracle->reference_point();
        Json j;
        j["enumerated"] = oracle->enumerated;
        j["cardinality"] = oracle->cardinality();
        j["max_point"] = oracle->max_point;
        j["reference_point"] = ref;
        j["hypervolume"] = hypervolume(oracle->points, ref);
        write_file(out_dir / kOracleSummaryFile, j.dump(2) + "\n");
        out << "enumerated " << oracle->enumerated << " genomes, front size " << oracle->cardinality()
            << ", hypervolume " << fixed(j["hypervolume"].get<double>()) << '\n';
        return kExitOk;
    } catch (const std::exception& ex) {
        return report(ex, err);
    }
}

int cmd_bench(const fs::path& config_path, const std::vector<Variant>& variants,
              const std::vector<std::uint64_t>& seeds, const fs::path& out_dir, std::ostream& out,
              std::ostream& err) {
    try {
        const auto base = load_config(config_path);
        if (variants.empty() || seeds.empty()) {
            throw ConfigError("", "bench needs at least one variant and one seed");
        }
        const auto oracle = oracle_for(base);
        fs::create_directories(out_dir);
        std::string table = "variant,seed,trained,proposed,cache_hits,discarded,forced,nds_size";
        if (oracle) {
            table += ",hypervolume,hypervolume_ratio,igd";
        }
        table += '\n';
        out << std::left << std::setw(8) << "variant" << std::setw(6) << "seed" << std::setw(9) << "trained"
            << std::setw(10) << "proposed" << std::setw(8) << "nds" << (oracle ? "hv_ratio    igd" : "") << '\n';
        for (const auto v : variants) {
            std::vector<double> trained;
            std::vector<double> ratio;
            for (const auto seed : seeds) {
                auto cfg = base;
                cfg.variant = v;
                cfg.seed = seed;
                const auto dir = out_dir / (std::string(variant_name(v)) + "_seed" + std::to_string(seed));
                const auto result = execute_run(cfg, dir, oracle ? &*oracle : nullptr);
                const auto& c = result.counters;
                table += std::string(variant_name(v)) + ',' + std::to_string(seed) + ',' + std::to_string(c.trained) +
                         ',' + std::to_string(c.proposed) + ',' + std::to_string(c.cache_hits) + ',' +
                         std::to_string(c.discarded) + ',' + std::to_string(c.forced) + ',' +
                         std::to_string(result.nds.size());
                out << std::left << std::setw(8) << variant_name(v) << std::setw(6) << seed << std::setw(9)
                    << c.trained << std::setw(10) << c.proposed << std::setw(8) << result.nds.size();
                trained.push_back(static_cast<double>(c.trained));
                if (oracle) {
                    const auto q = assess(result.nds, *oracle);
                    table += ',' + format_double(q.hypervolume) + ',' + format_double(q.ratio) + ',' +
                             format_double(q.igd);
                    out << std::setw(12) << fixed(q.ratio) << fixed(q.igd);
                    ratio.push_back(q.ratio);
                }
                table += '\n';
                out << '\n';
            }
            out << std::left << std::setw(8) << variant_name(v) << "median trained " << median(trained);
            if (oracle) {
                out << ", median hv_ratio " << fixed(median(ratio));
            }
            out << '\n';
        }
        write_file(out_dir / kBenchFile, table);
        out << "wrote " << (out_dir / kBenchFile).string() << '\n';
        return kExitOk;
    } catch (const std::exception& ex) {
        return report(ex, err);
    }
}

int cmd_resume(const fs::path& checkpoint_path, std::ostream& out, std::ostream& err) {
    try {
        Json j;
        try {
            j = Json::parse(read_file(checkpoint_path));
        } catch (const Json::exception& ex) {
            throw CheckpointError(std::string("corrupt checkpoint: ") + ex.what());
        }
        const auto probe = Engine::from_checkpoint(j);
        if (probe.finished()) {
            out << "run already finished at generation " << probe.generation() << '\n';
            return kExitOk;
        }
        const auto oracle = oracle_for(probe.config());
        const auto result = resume_run(checkpoint_path, oracle ? &*oracle : nullptr);
        out << "resumed from generation " << probe.generation() << "; trained " << result.counters.trained
            << ", NDS size " << result.nds.size() << '\n';
        return kExitOk;
    } catch (const std::exception& ex) {
        return report(ex, err);
    }
}

} // namespace moenas
