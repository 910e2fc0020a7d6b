#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "moenas/engine.hpp"
#include "moenas/error.hpp"
#include "moenas/metrics.hpp"
#include "support/oracles.hpp"

using namespace moenas;

namespace {

EngineConfig small_config(Variant v = Variant::Samea, std::uint64_t seed = 1) {
    EngineConfig cfg;
    cfg.generations = 14;
    cfg.learning_generations = 5;
    cfg.variant = v;
    cfg.seed = seed;
    cfg.forest.num_trees = 30;
    return cfg;
}

struct Captured {
    std::vector<std::string> lines;
    LogSink sink() {
        return [this](const std::string& s) { lines.push_back(s); };
    }
    [[nodiscard]] std::string text() const {
        std::string out;
        for (const auto& l : lines) {
            out += l + '\n';
        }
        return out;
    }
};

EvaluationRecord rec(double f1, double f2, int id) {
    EvaluationRecord r;
    r.objectives = {f1, f2};
    r.attempt_id = id;
    return r;
}

// Fails every third call, otherwise defers to the synthetic formula.
class Flaky final : public Evaluator {
public:
    explicit Flaky(int period) : period_(period) {}
    TrainingMetrics evaluate(const Genome& g, const ObjectiveConfig& cfg) override {
        if (++calls_ % period_ == 0) {
            throw ProtocolError("protocol-error: injected failure");
        }
        return synthetic_metrics(g, cfg);
    }
    [[nodiscard]] std::string name() const override { return "flaky"; }

private:
    int period_;
    int calls_ = 0;
};

} // namespace

TEST_CASE("LHS stratifies every dimension") {
    const auto nine = lhs_init(9, 5);
    std::set<int> levels;
    for (const auto& g : nine) {
        CHECK(validate(g));
        levels.insert(g.lr_level);
    }
    CHECK(levels.size() == 9);
    std::map<int, int> n_c;
    for (const auto& g : nine) {
        ++n_c[g.n_c];
    }
    CHECK(n_c == std::map<int, int>{{2, 3}, {3, 3}, {4, 3}});

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pop = lhs_init(10, seed);
        int ones = 0;
        std::map<int, int> i3;
        for (const auto& g : pop) {
            ones += g.i2;
            ++i3[g.i3];
        }
        CHECK(ones == 5);
        // Bins of width 1/3 over ten strata of width 1/10: the outer bins own three whole
        // strata plus a share of one, the middle bin two whole strata plus shares of two.
        CHECK(i3[0] >= 3);
        CHECK(i3[0] <= 4);
        CHECK(i3[1] >= 2);
        CHECK(i3[1] <= 4);
        CHECK(i3[2] >= 3);
        CHECK(i3[2] <= 4);
        CHECK(i3[0] + i3[1] + i3[2] == 10);
    }
    CHECK(lhs_init(10, 3) == lhs_init(10, 3));
    CHECK_FALSE(lhs_init(10, 3) == lhs_init(10, 4));
    CHECK_THROWS_AS(lhs_init(1, 0), RangeError);
}

TEST_CASE("make_child inherits genes and respects the mutation rate") {
    Rng rng(1);
    const auto a = genome_from_rank(123);
    const auto b = genome_from_rank(140000);
    const auto uniform = uniform_distributions();
    CHECK(make_child(a, a, uniform, 0.0, rng) == a);
    for (int k = 0; k < 200; ++k) {
        const auto c = make_child(a, b, uniform, 0.0, rng);
        for (std::size_t i = 0; i < kGeneCount; ++i) {
            CHECK((gene_index(c, i) == gene_index(a, i) || gene_index(c, i) == gene_index(b, i)));
        }
    }
}

TEST_CASE("full mutation in the learning phase is uniform") {
    Rng rng(2);
    const auto a = genome_from_rank(0);
    ValueScoreTable table;
    std::array<std::vector<int>, kGeneCount> counts;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        counts[i].assign(static_cast<std::size_t>(kGeneCardinality[i]), 0);
    }
    const int n = 36000;
    for (int k = 0; k < n; ++k) {
        const auto c = make_child(a, a, Phase::Learn, table, 0.002, 1.0, rng);
        for (std::size_t i = 0; i < kGeneCount; ++i) {
            ++counts[i][static_cast<std::size_t>(gene_index(c, i))];
        }
    }
    for (std::size_t i = 0; i < kGeneCount; ++i) {
        const double expect = static_cast<double>(n) / kGeneCardinality[i];
        for (int c : counts[i]) {
            CHECK(std::abs(c - expect) < 5.0 * std::sqrt(expect));
        }
    }
}

TEST_CASE("guided mutation concentrates on the scored value") {
    const ObjectiveConfig cfg;
    ValueScoreTable table;
    Genome g;
    g.lr_level = 7;
    table.record_trained(g, 0.5, cfg);
    Rng rng(3);
    const auto parent = genome_from_rank(0); // lr_level 1
    int hits = 0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        hits += make_child(parent, parent, Phase::Exploit, table, 0.002, 1.0, rng).lr_level == 7 ? 1 : 0;
    }
    const double p = 1.002 / 1.018;
    CHECK(std::abs(hits / static_cast<double>(n) - p) < 5.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("acceptance criteria") {
    const std::vector<EvaluationRecord> init{rec(1.0, 16.0, 0), rec(1.5, 14.0, 1), rec(2.5, 12.0, 2)};
    DecompositionState s(3, 2, 5.0, init);
    for (const auto& r : init) {
        s.update_nds(r);
    }
    GenerationHistory empty;

    SUBCASE("first candidate of a generation is accepted") {
        const auto d = accept_candidate(s, 0, {3.0, 17.0}, 0.0, empty);
        CHECK(d.accepted);
        CHECK(d.criterion == Criterion::MinPredictedEse);
    }
    SUBCASE("dominated, no PBI gain and generation-worst prediction is rejected") {
        GenerationHistory h;
        h.add(0.5, 0.9);
        const auto d = accept_candidate(s, 0, {3.0, 17.0}, 0.1, h);
        CHECK_FALSE(d.accepted);
        CHECK(d.criterion == Criterion::None);
    }
    SUBCASE("smaller model than every archive member fires the archive criterion") {
        DecompositionState two(2, 2, 5.0, std::vector<EvaluationRecord>{rec(1.0, 15.0, 0), rec(2.0, 13.0, 1)});
        two.update_nds(rec(1.0, 15.0, 0));
        two.update_nds(rec(2.0, 13.0, 1));
        GenerationHistory h;
        h.add(0.1, 5.0);
        // Bad predicted ESE but f2 below both members; origin whose neighbors it cannot improve.
        const ObjectiveVector f{4.0, 12.0};
        CHECK(two.nondominated_by_archive(f));
        const auto d = accept_candidate(two, 0, f, 0.0, h);
        CHECK(d.accepted);
        CHECK((d.criterion == Criterion::PnsUpdate || d.criterion == Criterion::PredictedNonDominated));
        if (two.would_replace(f, 0) == 0) {
            CHECK(d.criterion == Criterion::PredictedNonDominated);
        }
    }
    SUBCASE("PBI improvement comes first") {
        const auto d = accept_candidate(s, 1, {0.5, 11.0}, 0.0, empty);
        CHECK(d.criterion == Criterion::PnsUpdate);
    }
    SUBCASE("highest dispersion so far") {
        GenerationHistory h;
        h.add(0.5, 0.2);
        const auto d = accept_candidate(s, 0, {3.0, 17.0}, 0.3, h);
        CHECK(d.accepted);
        CHECK(d.criterion == Criterion::MaxDispersion);
    }
}

TEST_CASE("engine config validation") {
    EngineConfig c;
    CHECK_NOTHROW(validate(c));
    c.neighborhood = 11;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.learning_generations = 40;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.learning_generations = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.mutation_rate = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.objective.num_classes = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    const auto s = small_config(Variant::Mea, 9);
    CHECK(Json(s).get<EngineConfig>() == s);
}

TEST_CASE("budget accounting and record bookkeeping") {
    for (auto v : {Variant::Samea, Variant::Mea, Variant::Random}) {
        const auto cfg = small_config(v, 4);
        Captured log;
        Engine e(cfg, nullptr, log.sink());
        const auto result = e.run();
        const auto& c = result.counters;
        CHECK(c.trained <= cfg.population * cfg.generations);
        CHECK(c.trained <= c.proposed);
        CHECK(c.trained == static_cast<std::int64_t>(result.records.size()));
        CHECK(e.stp().size() == result.records.size());
        CHECK(c.failures == 0);
        // Every slot either trains or hits the cache.
        CHECK(c.trained + c.cache_hits == cfg.population * cfg.generations);
        CHECK(c.proposed == c.trained + c.cache_hits + c.discarded);

        std::set<Genome> seen;
        std::int64_t trained_lines = 0;
        for (const auto& l : log.lines) {
            const auto j = Json::parse(l);
            if (j["type"] == "evaluation" && j["outcome"] == "trained") {
                ++trained_lines;
            }
        }
        CHECK(trained_lines == c.trained);
        for (const auto& r : result.records) {
            CHECK(seen.insert(r.genome).second);
        }
        // The archive is the non-dominated filter of every trained record.
        std::vector<ObjectiveVector> all;
        std::vector<ObjectiveVector> nds;
        for (const auto& r : result.records) {
            all.push_back(r.objectives);
        }
        for (const auto& r : result.nds) {
            nds.push_back(r.objectives);
        }
        CHECK(oracle::same_points(nds, oracle::pareto_filter(all)));
    }
}

TEST_CASE("phase discipline") {
    const auto cfg = small_config();
    Captured log;
    Engine e(cfg, nullptr, log.sink());
    for (int g = 0; g < cfg.learning_generations; ++g) {
        e.step();
    }
    CHECK(e.counters().surrogate_predictions == 0);
    CHECK(e.counters().surrogate_fits == 0);
    e.run();
    CHECK(e.counters().surrogate_predictions > 0);

    int exploit_tables = 0;
    for (const auto& l : log.lines) {
        const auto j = Json::parse(l);
        const int gen = j["generation"].get<int>();
        if (j["type"] == "proposal") {
            CHECK(j.contains("predicted") == (gen > cfg.learning_generations));
        }
        if (j["type"] != "generation" || gen == 1) {
            continue;
        }
        const auto probs = j["mutation_probs"];
        if (gen <= cfg.learning_generations) {
            CHECK(j["phase"] == "LEARN");
            for (std::size_t i = 0; i < kGeneCount; ++i) {
                for (const auto& p : probs[i]) {
                    CHECK(p.get<double>() == 1.0 / kGeneCardinality[i]);
                }
            }
        } else {
            CHECK(j["phase"] == "EXPLOIT");
            const auto table = ValueScoreTable::from_json(j["score_table"]);
            for (std::size_t i = 0; i < kGeneCount; ++i) {
                const auto expect = mutation_probs(table, i, cfg.epsilon);
                for (std::size_t v = 0; v < expect.size(); ++v) {
                    CHECK(std::abs(probs[i][v].get<double>() - expect[v]) < 1e-12);
                }
            }
            ++exploit_tables;
        }
    }
    CHECK(exploit_tables == cfg.generations - cfg.learning_generations);
}

TEST_CASE("mea never touches the surrogate and variants share the initial population") {
    std::map<Variant, std::vector<Genome>> init;
    for (auto v : {Variant::Samea, Variant::Mea, Variant::Random}) {
        Captured log;
        Engine e(small_config(v, 8), nullptr, log.sink());
        e.run();
        if (v != Variant::Samea) {
            CHECK(e.counters().surrogate_predictions == 0);
            CHECK(e.counters().surrogate_fits == 0);
            for (const auto& l : log.lines) {
                CHECK(l.find("\"predicted\"") == std::string::npos);
            }
        }
        for (const auto& l : log.lines) {
            const auto j = Json::parse(l);
            if (j["type"] == "proposal" && j["generation"] == 1) {
                init[v].push_back(j["genome"].get<Genome>());
            }
        }
    }
    CHECK(init[Variant::Samea].size() == 10);
    CHECK(init[Variant::Samea] == init[Variant::Mea]);
    CHECK(init[Variant::Samea] == init[Variant::Random]);
}

TEST_CASE("same seed gives byte-identical logs") {
    const auto cfg = small_config(Variant::Samea, 21);
    Captured a;
    Captured b;
    Engine(cfg, nullptr, a.sink()).run();
    Engine(cfg, nullptr, b.sink()).run();
    CHECK(a.text() == b.text());
    Captured c;
    Engine(small_config(Variant::Samea, 22), nullptr, c.sink()).run();
    CHECK(a.text() != c.text());
}

TEST_CASE("resume from a checkpoint continues identically") {
    const auto cfg = small_config(Variant::Samea, 5);
    Captured full;
    Engine straight(cfg, nullptr, full.sink());
    const auto expect = straight.run();

    for (int stop : {1, 5, 9}) {
        Captured first;
        Engine e(cfg, nullptr, first.sink());
        for (int g = 0; g < stop; ++g) {
            e.step();
        }
        const auto cp = Json::parse(e.checkpoint().dump());
        CHECK(cp["log"]["lines"].get<std::size_t>() == first.lines.size());
        Captured rest = first;
        auto resumed = Engine::from_checkpoint(cp, nullptr, rest.sink());
        const auto got = resumed.run();
        CHECK(rest.text() == full.text());
        CHECK(got.nds == expect.nds);
        CHECK(got.counters == expect.counters);
        CHECK(resumed.checkpoint() == straight.checkpoint());
    }
}

TEST_CASE("corrupt checkpoints are rejected") {
    CHECK_THROWS_AS(Engine::from_checkpoint(Json::parse("{}")), CheckpointError);
    CHECK_THROWS_AS(Engine::from_checkpoint(Json::parse("[1,2]")), CheckpointError);
    Engine e(small_config());
    e.step();
    auto cp = e.checkpoint();
    cp["records"] = "nonsense";
    CHECK_THROWS_AS(Engine::from_checkpoint(cp), CheckpointError);
    cp = e.checkpoint();
    cp["version"] = 99;
    CHECK_THROWS_AS(Engine::from_checkpoint(cp), CheckpointError);
}

TEST_CASE("cache hits reuse logged objectives") {
    Captured log;
    Engine e(small_config(Variant::Samea, 2), nullptr, log.sink());
    e.run();
    std::map<std::int64_t, Genome> proposed;
    std::map<std::string, Json> first_objectives;
    int hits = 0;
    for (const auto& l : log.lines) {
        const auto j = Json::parse(l);
        if (j["type"] == "proposal") {
            proposed[j["seq"].get<std::int64_t>()] = j["genome"].get<Genome>();
        }
        if (j["type"] == "evaluation" && j["outcome"] != "failed") {
            const auto key = to_string(proposed.at(j["seq"].get<std::int64_t>()));
            if (j["outcome"] == "cache_hit") {
                ++hits;
                CHECK(first_objectives.at(key) == j["objectives"]);
            } else {
                CHECK(first_objectives.emplace(key, j["objectives"]).second);
            }
        }
    }
    CHECK(hits == e.counters().cache_hits);
}

TEST_CASE("archive hypervolume never decreases") {
    SyntheticEvaluator ev;
    const auto front = true_front(ev, ObjectiveConfig{});
    const auto ref = front.reference_point();
    Engine e(small_config(Variant::Samea, 6));
    double last = 0.0;
    while (!e.finished()) {
        e.step();
        std::vector<ObjectiveVector> pts;
        for (const auto& r : e.decomposition().nds()) {
            pts.push_back(r.objectives);
        }
        const double hv = hypervolume(pts, ref);
        CHECK(hv >= last);
        last = hv;
    }
}

TEST_CASE("evaluation failures are retried per slot") {
    auto cfg = small_config(Variant::Samea, 3);
    Engine e(cfg, std::make_unique<Flaky>(3));
    const auto result = e.run();
    CHECK(result.counters.failures > 0);
    // Initial-population failures are not retried; every later slot eventually succeeds.
    const auto done = result.counters.trained + result.counters.cache_hits;
    CHECK(done <= cfg.population * cfg.generations);
    CHECK(done >= cfg.population * (cfg.generations - 1));
}

TEST_CASE("a generation without any successful evaluation aborts the run") {
    Engine e(small_config(), std::make_unique<Flaky>(1));
    CHECK_THROWS_WITH_AS(e.step(), doctest::Contains("zero successful"), Error);
}
