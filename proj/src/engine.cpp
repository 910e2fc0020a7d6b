#include "moenas/engine.hpp"

#include <algorithm>
#include <cmath>

#include "moenas/error.hpp"

namespace moenas {

namespace {

constexpr std::string_view kCheckpointFormat = "moenas-checkpoint";
constexpr int kCheckpointVersion = 1;

Json distributions_json(const GeneDistributions& d) {
    Json j = Json::array();
    for (const auto& v : d) {
        j.push_back(v);
    }
    return j;
}

} // namespace

std::string_view variant_name(Variant v) noexcept {
    switch (v) {
    case Variant::Samea: return "samea";
    case Variant::Mea: return "mea";
    case Variant::Random: return "random";
    }
    return "?";
}

Variant parse_variant(std::string_view name) {
    if (name == "samea") return Variant::Samea;
    if (name == "mea") return Variant::Mea;
    if (name == "random") return Variant::Random;
    throw Error("unknown variant '" + std::string(name) + "' (expected samea, mea or random)");
}

std::string_view criterion_name(Criterion c) noexcept {
    switch (c) {
    case Criterion::None: return "none";
    case Criterion::PnsUpdate: return "pns_update";
    case Criterion::PredictedNonDominated: return "predicted_nondominated";
    case Criterion::MinPredictedEse: return "min_predicted_ese";
    case Criterion::MaxDispersion: return "max_dispersion";
    }
    return "?";
}

void validate(const EngineConfig& cfg) {
    if (cfg.population < 2) {
        throw ConfigError("engine.population", "must be >= 2");
    }
    if (cfg.neighborhood < 2 || cfg.neighborhood > cfg.population) {
        throw ConfigError("engine.neighborhood", "must satisfy 2 <= T <= N");
    }
    if (!(1 < cfg.learning_generations && cfg.learning_generations < cfg.generations)) {
        throw ConfigError("engine.learning_generations", "must satisfy 1 < LG < G");
    }
    if (!(cfg.mutation_rate > 0.0 && cfg.mutation_rate <= 1.0)) {
        throw ConfigError("engine.mutation_rate", "must be in (0, 1]");
    }
    if (!(cfg.epsilon > 0.0)) {
        throw ConfigError("engine.epsilon", "must be > 0");
    }
    if (!(cfg.epsilon_subproblem > 0.0)) {
        throw ConfigError("engine.epsilon_subproblem", "must be > 0");
    }
    if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) {
        throw ConfigError("engine.gamma", "must be in (0, 1]");
    }
    if (!(cfg.theta_pbi >= 0.0)) {
        throw ConfigError("engine.theta_pbi", "must be >= 0");
    }
    if (cfg.max_attempts < 1) {
        throw ConfigError("engine.max_attempts", "must be >= 1");
    }
    try {
        validate(cfg.objective);
    } catch (const RangeError& ex) {
        throw ConfigError("objective", ex.what());
    }
    try {
        validate(cfg.forest);
    } catch (const RangeError& ex) {
        throw ConfigError("forest", ex.what());
    }
}

void to_json(Json& j, const EngineConfig& c) {
    j = Json::object();
    j["population"] = c.population;
    j["neighborhood"] = c.neighborhood;
    j["generations"] = c.generations;
    j["learning_generations"] = c.learning_generations;
    j["epsilon"] = c.epsilon;
    j["epsilon_subproblem"] = c.epsilon_subproblem;
    j["theta_pbi"] = c.theta_pbi;
    j["gamma"] = c.gamma;
    j["mutation_rate"] = c.mutation_rate;
    j["max_attempts"] = c.max_attempts;
    j["seed"] = c.seed;
    j["variant"] = std::string(variant_name(c.variant));
    j["objective"] = c.objective;
    j["forest"] = c.forest;
    j["evaluator"] = c.evaluator;
}

void from_json(const Json& j, EngineConfig& c) {
    c.population = j.at("population").get<int>();
    c.neighborhood = j.at("neighborhood").get<int>();
    c.generations = j.at("generations").get<int>();
    c.learning_generations = j.at("learning_generations").get<int>();
    c.epsilon = j.at("epsilon").get<double>();
    c.epsilon_subproblem = j.at("epsilon_subproblem").get<double>();
    c.theta_pbi = j.at("theta_pbi").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.mutation_rate = j.at("mutation_rate").get<double>();
    c.max_attempts = j.at("max_attempts").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.objective = j.at("objective").get<ObjectiveConfig>();
    c.forest = j.at("forest").get<ForestConfig>();
    c.evaluator = j.at("evaluator").get<EvaluatorKind>();
}

void to_json(Json& j, const BudgetCounters& c) {
    j = Json{{"proposed", c.proposed},
             {"trained", c.trained},
             {"cache_hits", c.cache_hits},
             {"discarded", c.discarded},
             {"forced", c.forced},
             {"failures", c.failures},
             {"surrogate_fits", c.surrogate_fits},
             {"surrogate_predictions", c.surrogate_predictions}};
}

void from_json(const Json& j, BudgetCounters& c) {
    c.proposed = j.at("proposed").get<std::int64_t>();
    c.trained = j.at("trained").get<std::int64_t>();
    c.cache_hits = j.at("cache_hits").get<std::int64_t>();
    c.discarded = j.at("discarded").get<std::int64_t>();
    c.forced = j.at("forced").get<std::int64_t>();
    c.failures = j.at("failures").get<std::int64_t>();
    c.surrogate_fits = j.at("surrogate_fits").get<std::int64_t>();
    c.surrogate_predictions = j.at("surrogate_predictions").get<std::int64_t>();
}

std::vector<Genome> lhs_init(int n, std::uint64_t seed) {
    if (n < 2) {
        throw RangeError("lhs_init needs N >= 2");
    }
    Rng rng(seed);
    std::vector<Genome> pop(static_cast<std::size_t>(n));
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (std::size_t gene = 0; gene < kGeneCount; ++gene) {
        for (int k = 0; k < n; ++k) {
            perm[static_cast<std::size_t>(k)] = k;
        }
        rng.shuffle(perm.begin(), perm.end());
        const int card = kGeneCardinality[gene];
        for (int k = 0; k < n; ++k) {
            const double u = (perm[static_cast<std::size_t>(k)] + rng.uniform01()) / n;
            const int idx = std::min(static_cast<int>(std::floor(u * card)), card - 1);
            set_gene_index(pop[static_cast<std::size_t>(k)], gene, idx);
        }
    }
    return pop;
}

Genome make_child(const Genome& a, const Genome& b, const GeneDistributions& mutation, double mutation_rate, Rng& rng) {
    Genome child = a;
    for (std::size_t gene = 0; gene < kGeneCount; ++gene) {
        const bool from_b = rng.uniform01() < 0.5;
        if (from_b) {
            set_gene_index(child, gene, gene_index(b, gene));
        }
        if (rng.uniform01() < mutation_rate) {
            set_gene_index(child, gene, static_cast<int>(rng.categorical(mutation[gene])));
        }
    }
    return child;
}

Genome make_child(const Genome& a, const Genome& b, Phase phase, const ValueScoreTable& table, double epsilon,
                  double mutation_rate, Rng& rng) {
    const auto dists = phase == Phase::Exploit ? mutation_distributions(table, epsilon) : uniform_distributions();
    return make_child(a, b, dists, mutation_rate, rng);
}

void GenerationHistory::add(double predicted, double dispersion) {
    min_predicted = std::min(min_predicted, predicted);
    max_dispersion = std::max(max_dispersion, dispersion);
    ++count;
}

AcceptDecision accept_candidate(const DecompositionState& state, int origin, const ObjectiveVector& predicted,
                                double dispersion, const GenerationHistory& history) {
    if (state.would_replace(predicted, origin) > 0) {
        return {true, Criterion::PnsUpdate};
    }
    if (state.nondominated_by_archive(predicted)) {
        return {true, Criterion::PredictedNonDominated};
    }
    if (history.count == 0 || predicted.f1 < history.min_predicted) {
        return {true, Criterion::MinPredictedEse};
    }
    if (dispersion > history.max_dispersion) {
        return {true, Criterion::MaxDispersion};
    }
    return {};
}

Engine::Engine(EngineConfig cfg, std::unique_ptr<Evaluator> evaluator, LogSink sink)
    : cfg_(std::move(cfg)), evaluator_(std::move(evaluator)), sink_(std::move(sink)),
      rng_(derive_seed(cfg_.seed, "evolve")), utility_(static_cast<std::size_t>(cfg_.population)) {
    validate(cfg_);
    if (!evaluator_) {
        evaluator_ = make_evaluator(cfg_.evaluator);
    }
}

void Engine::emit(const Json& line) {
    const auto text = line.dump();
    ++log_lines_;
    log_bytes_ += text.size() + 1;
    if (sink_) {
        sink_(text);
    }
}

void Engine::step() {
    if (finished()) {
        return;
    }
    const int g = generation_ + 1;
    if (g == 1) {
        run_init();
    } else if (cfg_.variant == Variant::Random) {
        run_random_generation();
    } else if (cfg_.variant == Variant::Mea || g <= cfg_.learning_generations) {
        run_learning_generation(Phase::Learn);
    } else {
        run_exploit_generation();
    }
    generation_ = g;
}

RunResult Engine::run() {
    while (!finished()) {
        step();
    }
    return result();
}

RunResult Engine::result() const {
    return {state_.nds(), records_, counters_};
}

void Engine::log_generation(Phase phase, const GeneDistributions& dists, const std::vector<double>& sub_probs) {
    Json j;
    j["type"] = "generation";
    j["generation"] = generation_ + 1;
    j["phase"] = std::string(phase_name(phase));
    j["variant"] = std::string(variant_name(cfg_.variant));
    j["score_table"] = table_.to_json();
    j["mutation_probs"] = distributions_json(dists);
    j["utilities"] = utility_.to_json();
    j["subproblem_probs"] = sub_probs;
    j["counters"] = counters_;
    emit(j);
}

void Engine::run_init() {
    const auto pop = lhs_init(cfg_.population, derive_seed(cfg_.seed, "lhs"));
    Json head;
    head["type"] = "generation";
    head["generation"] = 1;
    head["phase"] = "INIT";
    head["variant"] = std::string(variant_name(cfg_.variant));
    emit(head);

    // Records are committed in canonical genome order.
    std::vector<Genome> order(pop);
    std::sort(order.begin(), order.end());
    std::vector<Genome> unique(order);
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

    std::vector<std::optional<TrainingMetrics>> metrics(unique.size());
    std::vector<std::string> errors(unique.size());
    try {
        auto batch = evaluator_->evaluate_batch(unique, cfg_.objective);
        for (std::size_t k = 0; k < unique.size(); ++k) {
            metrics[k] = batch[k];
        }
    } catch (const EvaluationError&) {
        for (std::size_t k = 0; k < unique.size(); ++k) {
            try {
                metrics[k] = evaluator_->evaluate(unique[k], cfg_.objective);
            } catch (const EvaluationError& ex) {
                errors[k] = ex.what();
            }
        }
    }

    std::vector<EvaluationRecord> initial;
    for (const auto& g : order) {
        const std::int64_t seq = seq_++;
        ++counters_.proposed;
        Json p;
        p["type"] = "proposal";
        p["seq"] = seq;
        p["generation"] = 1;
        p["phase"] = "INIT";
        p["genome"] = g;
        p["decision"] = "evaluate";
        emit(p);

        Json e;
        e["type"] = "evaluation";
        e["seq"] = seq;
        e["generation"] = 1;
        e["phase"] = "INIT";
        const auto k = static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), g) - unique.begin());
        if (cache_.contains(g)) {
            ++counters_.cache_hits;
            e["outcome"] = "cache_hit";
        } else if (!metrics[k]) {
            ++counters_.failures;
            e["outcome"] = "failed";
            e["error"] = errors[k];
        } else {
            try {
                auto rec = make_record(g, *metrics[k], cfg_.objective, 1, Phase::Init, seq);
                cache_.emplace(g, records_.size());
                records_.push_back(rec);
                ++counters_.trained;
                stp_.add(g, rec.objectives.f1);
                table_.record_trained(g, rec.objectives.f1, cfg_.objective);
                initial.push_back(rec);
                e["outcome"] = "trained";
                e["objectives"] = rec.objectives;
                e["metrics"] = rec.metrics;
            } catch (const RangeError& ex) {
                ++counters_.failures;
                e["outcome"] = "failed";
                e["error"] = ex.what();
            }
        }
        emit(e);
    }
    if (initial.empty()) {
        throw Error("generation 1 produced zero successful evaluations");
    }
    state_ = DecompositionState(cfg_.population, cfg_.neighborhood, cfg_.theta_pbi, initial);
    for (const auto& rec : initial) {
        state_.update_nds(rec);
    }
}

std::pair<Genome, Genome> Engine::pick_parents(int subproblem) {
    const auto& nb = state_.subproblems()[static_cast<std::size_t>(subproblem)].neighborhood;
    const std::size_t a = rng_.uniform_index(nb.size());
    std::size_t b = rng_.uniform_index(nb.size() - 1);
    if (b >= a) {
        ++b;
    }
    const auto& sps = state_.subproblems();
    return {sps[static_cast<std::size_t>(nb[a])].current.genome, sps[static_cast<std::size_t>(nb[b])].current.genome};
}

Engine::Proposal Engine::propose(int subproblem, const GeneDistributions& dists) {
    Proposal p;
    p.subproblem = subproblem;
    const auto [a, b] = pick_parents(subproblem);
    p.genome = make_child(a, b, dists, cfg_.mutation_rate, rng_);
    p.seq = seq_++;
    ++counters_.proposed;
    return p;
}

Engine::Outcome Engine::commit(const Proposal& p, Phase phase, bool forced) {
    const int g = generation_ + 1;
    Outcome out;
    Json e;
    e["type"] = "evaluation";
    e["seq"] = p.seq;
    e["generation"] = g;
    e["phase"] = std::string(phase_name(phase));
    e["subproblem"] = p.subproblem;
    e["forced"] = forced;

    const EvaluationRecord* rec = nullptr;
    if (const auto it = cache_.find(p.genome); it != cache_.end()) {
        ++counters_.cache_hits;
        rec = &records_[it->second];
        out.cache_hit = true;
        e["outcome"] = "cache_hit";
    } else {
        try {
            const auto m = evaluator_->evaluate(p.genome, cfg_.objective);
            auto r = make_record(p.genome, m, cfg_.objective, g, phase, p.seq);
            cache_.emplace(p.genome, records_.size());
            records_.push_back(std::move(r));
            rec = &records_.back();
            ++counters_.trained;
            stp_.add(rec->genome, rec->objectives.f1);
            table_.record_trained(rec->genome, rec->objectives.f1, cfg_.objective);
            out.entered_nds = state_.update_nds(*rec);
            e["outcome"] = "trained";
        } catch (const EvaluationError& ex) {
            ++counters_.failures;
            e["outcome"] = "failed";
            e["error"] = ex.what();
            emit(e);
            return out;
        } catch (const RangeError& ex) {
            ++counters_.failures;
            e["outcome"] = "failed";
            e["error"] = ex.what();
            emit(e);
            return out;
        }
    }
    out.ok = true;
    if (p.subproblem >= 0) {
        out.replaced = state_.update_pns(*rec, p.subproblem);
    }
    e["objectives"] = rec->objectives;
    e["metrics"] = rec->metrics;
    if (p.predicted) {
        e["predicted_f1"] = p.prediction.mean;
    }
    e["replaced"] = out.replaced;
    e["entered_nds"] = out.entered_nds;
    emit(e);
    return out;
}

void Engine::run_learning_generation(Phase label) {
    const auto dists = uniform_distributions();
    const int n = cfg_.population;
    std::vector<double> round_robin(static_cast<std::size_t>(n), 1.0 / n);
    log_generation(label, dists, round_robin);
    const int g = generation_ + 1;
    int successes = 0;
    std::vector<bool> contributed(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
            auto p = propose(i, dists);
            Json j;
            j["type"] = "proposal";
            j["seq"] = p.seq;
            j["generation"] = g;
            j["phase"] = std::string(phase_name(label));
            j["slot"] = i;
            j["attempt"] = attempt;
            j["subproblem"] = i;
            j["genome"] = p.genome;
            j["decision"] = "evaluate";
            emit(j);
            const auto out = commit(p, label, false);
            if (out.ok) {
                ++successes;
                contributed[static_cast<std::size_t>(i)] = out.replaced > 0 || out.entered_nds;
                break;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        utility_.record_contribution(static_cast<std::size_t>(i), contributed[static_cast<std::size_t>(i)], cfg_.gamma);
    }
    if (successes == 0) {
        throw Error("generation " + std::to_string(g) + " produced zero successful evaluations");
    }
}

const RandomForest& Engine::forest() {
    if (!forest_ || forest_size_ != stp_.size()) {
        // A forest dropped by a checkpoint restore is rebuilt identically and not counted again.
        const bool restored = !forest_ && forest_size_ == stp_.size();
        ForestConfig fc = cfg_.forest;
        fc.seed = derive_seed(cfg_.seed, "forest", stp_.size());
        forest_ = RandomForest::fit(stp_, fc);
        forest_size_ = stp_.size();
        if (!restored) {
            ++counters_.surrogate_fits;
        }
    }
    return *forest_;
}

void Engine::run_exploit_generation() {
    const auto dists = mutation_distributions(table_, cfg_.epsilon);
    const auto sub_probs = subproblem_probs(utility_, cfg_.epsilon_subproblem);
    log_generation(Phase::Exploit, dists, sub_probs);
    const int g = generation_ + 1;
    const int n = cfg_.population;
    GenerationHistory history;
    std::vector<bool> contributed(static_cast<std::size_t>(n), false);
    int successes = 0;

    for (int slot = 0; slot < n; ++slot) {
        for (int round = 0; round < cfg_.max_attempts; ++round) {
            std::vector<Proposal> rejected;
            std::optional<Proposal> chosen;
            bool forced = false;
            for (int attempt = 0; attempt < cfg_.max_attempts && !chosen; ++attempt) {
                const int sub = static_cast<int>(rng_.categorical(sub_probs));
                auto p = propose(sub, dists);
                p.prediction = forest().predict(encode(p.genome));
                p.predicted = true;
                ++counters_.surrogate_predictions;
                const ObjectiveVector predicted{p.prediction.mean, f2(decode(p.genome, cfg_.objective.num_classes).param_count)};
                const auto decision = accept_candidate(state_, sub, predicted, p.prediction.dispersion, history);
                history.add(p.prediction.mean, p.prediction.dispersion);

                Json j;
                j["type"] = "proposal";
                j["seq"] = p.seq;
                j["generation"] = g;
                j["phase"] = "EXPLOIT";
                j["slot"] = slot;
                j["attempt"] = attempt;
                j["subproblem"] = sub;
                j["genome"] = p.genome;
                j["predicted"] = Json{{"f1", predicted.f1}, {"f2", predicted.f2}, {"dispersion", p.prediction.dispersion}};
                j["decision"] = decision.accepted ? "accepted" : "rejected";
                j["criterion"] = std::string(criterion_name(decision.criterion));
                emit(j);
                if (decision.accepted) {
                    chosen = std::move(p);
                } else {
                    rejected.push_back(std::move(p));
                }
            }
            if (!chosen) {
                auto best = std::min_element(rejected.begin(), rejected.end(), [](const Proposal& a, const Proposal& b) {
                    return a.prediction.mean < b.prediction.mean;
                });
                chosen = *best;
                rejected.erase(best);
                forced = true;
                ++counters_.forced;
            }
            counters_.discarded += static_cast<std::int64_t>(rejected.size());
            const auto out = commit(*chosen, Phase::Exploit, forced);
            if (out.ok) {
                ++successes;
                if (out.replaced > 0 || out.entered_nds) {
                    contributed[static_cast<std::size_t>(chosen->subproblem)] = true;
                }
                break;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        utility_.record_contribution(static_cast<std::size_t>(i), contributed[static_cast<std::size_t>(i)], cfg_.gamma);
    }
    if (successes == 0) {
        throw Error("generation " + std::to_string(g) + " produced zero successful evaluations");
    }
}

void Engine::run_random_generation() {
    const auto dists = uniform_distributions();
    const int n = cfg_.population;
    std::vector<double> none;
    log_generation(Phase::Learn, dists, none);
    const int g = generation_ + 1;
    int successes = 0;
    for (int slot = 0; slot < n; ++slot) {
        for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
            Proposal p;
            p.subproblem = -1;
            for (std::size_t gene = 0; gene < kGeneCount; ++gene) {
                set_gene_index(p.genome, gene, static_cast<int>(rng_.uniform_index(static_cast<std::size_t>(kGeneCardinality[gene]))));
            }
            p.seq = seq_++;
            ++counters_.proposed;
            Json j;
            j["type"] = "proposal";
            j["seq"] = p.seq;
            j["generation"] = g;
            j["phase"] = "LEARN";
            j["slot"] = slot;
            j["attempt"] = attempt;
            j["genome"] = p.genome;
            j["decision"] = "evaluate";
            emit(j);
            if (commit(p, Phase::Learn, false).ok) {
                ++successes;
                break;
            }
        }
    }
    if (successes == 0) {
        throw Error("generation " + std::to_string(g) + " produced zero successful evaluations");
    }
}

Json Engine::checkpoint() const {
    Json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["config"] = cfg_;
    j["generation"] = generation_;
    j["seq"] = seq_;
    j["rng"] = rng_.state();
    j["records"] = records_;
    j["decomposition"] = generation_ > 0 ? state_.to_json() : Json();
    j["score_table"] = table_.to_json();
    j["utility"] = utility_.to_json();
    j["counters"] = counters_;
    j["forest_size"] = forest_size_;
    j["log"] = Json{{"lines", log_lines_}, {"bytes", log_bytes_}};
    return j;
}

Engine Engine::from_checkpoint(const Json& j, std::unique_ptr<Evaluator> evaluator, LogSink sink) {
    try {
        if (!j.is_object() || j.value("format", std::string{}) != kCheckpointFormat) {
            throw CheckpointError("not a checkpoint file");
        }
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw CheckpointError("unsupported checkpoint version");
        }
        Engine e(j.at("config").get<EngineConfig>(), std::move(evaluator), std::move(sink));
        e.generation_ = j.at("generation").get<int>();
        e.seq_ = j.at("seq").get<std::int64_t>();
        e.rng_.set_state(j.at("rng").get<std::string>());
        e.records_ = j.at("records").get<std::vector<EvaluationRecord>>();
        for (std::size_t k = 0; k < e.records_.size(); ++k) {
            const auto& r = e.records_[k];
            e.cache_.emplace(r.genome, k);
            e.stp_.add(r.genome, r.objectives.f1);
        }
        if (e.generation_ > 0) {
            e.state_ = DecompositionState::from_json(j.at("decomposition"));
        }
        e.table_ = ValueScoreTable::from_json(j.at("score_table"));
        e.utility_ = SubproblemUtility::from_json(j.at("utility"));
        if (e.utility_.size() != static_cast<std::size_t>(e.cfg_.population)) {
            throw CheckpointError("utility vector has the wrong size");
        }
        e.counters_ = j.at("counters").get<BudgetCounters>();
        e.forest_size_ = j.at("forest_size").get<std::size_t>();
        e.log_lines_ = j.at("log").at("lines").get<std::uint64_t>();
        e.log_bytes_ = j.at("log").at("bytes").get<std::uint64_t>();
        return e;
    } catch (const Json::exception& ex) {
        throw CheckpointError(std::string("corrupt checkpoint: ") + ex.what());
    } catch (const CheckpointError&) {
        throw;
    } catch (const Error& ex) {
        throw CheckpointError(std::string("corrupt checkpoint: ") + ex.what());
    }
}

} // namespace moenas
