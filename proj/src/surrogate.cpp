#include "moenas/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "moenas/error.hpp"
#include "moenas/rng.hpp"

namespace moenas {

FeatureVector encode(const Genome& g) {
    require_valid(g);
    FeatureVector x{};
    std::size_t offset = 0;
    for (std::size_t gene = 0; gene < 7; ++gene) {
        x[offset + static_cast<std::size_t>(gene_index(g, gene))] = 1.0;
        offset += static_cast<std::size_t>(kGeneCardinality[gene]);
    }
    x[offset++] = g.n_c;
    x[offset++] = g.n_f;
    x[offset++] = g.lr_level;
    return x;
}

void validate(const ForestConfig& cfg) {
    if (cfg.num_trees < 1) {
        throw RangeError("num_trees must be >= 1");
    }
    if (cfg.min_samples_split < 2) {
        throw RangeError("min_samples_split must be >= 2");
    }
    if (cfg.mtry < 1 || cfg.mtry > static_cast<int>(kFeatureCount)) {
        throw RangeError("mtry must be in [1, 24]");
    }
}

void to_json(Json& j, const ForestConfig& c) {
    j = Json{{"num_trees", c.num_trees}, {"min_samples_split", c.min_samples_split}, {"mtry", c.mtry}, {"seed", c.seed}};
}

void from_json(const Json& j, ForestConfig& c) {
    c.num_trees = j.at("num_trees").get<int>();
    c.min_samples_split = j.at("min_samples_split").get<int>();
    c.mtry = j.at("mtry").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
}

void SurrogateTrainingPopulation::add(const Genome& g, double ese_value) {
    features_.push_back(encode(g));
    targets_.push_back(ese_value);
}

double RegressionTree::predict(const FeatureVector& x) const {
    int k = 0;
    while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
        const auto& n = nodes_[static_cast<std::size_t>(k)];
        k = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(k)].value;
}

class TreeBuilder {
public:
    TreeBuilder(std::span<const FeatureVector> x, std::span<const double> y, const ForestConfig& cfg, Rng& rng)
        : x_(x), y_(y), cfg_(cfg), rng_(rng) {}

    RegressionTree build(std::vector<std::size_t> sample) {
        RegressionTree tree;
        nodes_ = &tree.nodes_;
        grow(sample, 0, sample.size());
        return tree;
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = -1.0; // sum_L^2/n_L + sum_R^2/n_R, larger is better
    };

    int grow(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
        const int id = static_cast<int>(nodes_->size());
        nodes_->emplace_back();
        const std::size_t n = end - begin;
        double sum = 0.0;
        bool constant = true;
        const double first = y_[idx[begin]];
        for (std::size_t k = begin; k < end; ++k) {
            sum += y_[idx[k]];
            constant = constant && y_[idx[k]] == first;
        }
        const double mean = sum / static_cast<double>(n);
        (*nodes_)[static_cast<std::size_t>(id)].value = constant ? first : mean;
        if (constant || n < static_cast<std::size_t>(cfg_.min_samples_split)) {
            return id;
        }
        const Split split = best_split(idx, begin, end);
        if (split.feature < 0) {
            return id;
        }
        const auto f = static_cast<std::size_t>(split.feature);
        const auto mid = std::stable_partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                               idx.begin() + static_cast<std::ptrdiff_t>(end),
                                               [&](std::size_t s) { return x_[s][f] <= split.threshold; });
        const auto cut = static_cast<std::size_t>(mid - idx.begin());
        const int left = grow(idx, begin, cut);
        const int right = grow(idx, cut, end);
        auto& node = (*nodes_)[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    Split best_split(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) {
        std::array<int, kFeatureCount> order{};
        std::iota(order.begin(), order.end(), 0);
        rng_.shuffle(order.begin(), order.end());

        // Examine mtry features; keep going past mtry only until a splittable one turns up.
        std::vector<int> candidates;
        bool splittable = false;
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            if (k >= static_cast<std::size_t>(cfg_.mtry) && splittable) {
                break;
            }
            const auto f = static_cast<std::size_t>(order[k]);
            const double v0 = x_[idx[begin]][f];
            bool varies = false;
            for (std::size_t s = begin + 1; s < end && !varies; ++s) {
                varies = x_[idx[s]][f] != v0;
            }
            if (varies) {
                candidates.push_back(order[k]);
                splittable = true;
            }
        }
        std::sort(candidates.begin(), candidates.end());

        Split best;
        std::vector<std::pair<double, double>> column(end - begin);
        for (int feature : candidates) {
            const auto f = static_cast<std::size_t>(feature);
            for (std::size_t s = begin; s < end; ++s) {
                column[s - begin] = {x_[idx[s]][f], y_[idx[s]]};
            }
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double total = 0.0;
            for (const auto& [v, t] : column) {
                total += t;
            }
            double left_sum = 0.0;
            const std::size_t n = column.size();
            for (std::size_t k = 0; k + 1 < n; ++k) {
                left_sum += column[k].second;
                if (column[k].first == column[k + 1].first) {
                    continue;
                }
                const double nl = static_cast<double>(k + 1);
                const double nr = static_cast<double>(n - k - 1);
                const double right_sum = total - left_sum;
                const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
                // Strict improvement keeps the lowest feature, then lowest threshold, on ties.
                if (score > best.score) {
                    best.score = score;
                    best.feature = feature;
                    best.threshold = 0.5 * (column[k].first + column[k + 1].first);
                }
            }
        }
        return best;
    }

    std::span<const FeatureVector> x_;
    std::span<const double> y_;
    const ForestConfig& cfg_;
    Rng& rng_;
    std::vector<RegressionTree::Node>* nodes_ = nullptr;
};

RandomForest RandomForest::fit(std::span<const FeatureVector> x, std::span<const double> y, const ForestConfig& cfg) {
    validate(cfg);
    if (x.size() != y.size()) {
        throw Error("feature/target size mismatch");
    }
    if (x.size() < 2) {
        throw Error("insufficient-data: random forest needs at least 2 samples");
    }
    RandomForest forest;
    forest.trees_.reserve(static_cast<std::size_t>(cfg.num_trees));
    const std::size_t n = x.size();
    for (int t = 0; t < cfg.num_trees; ++t) {
        Rng rng(derive_seed(cfg.seed, "tree", static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) {
            s = rng.uniform_index(n);
        }
        TreeBuilder builder(x, y, cfg, rng);
        forest.trees_.push_back(builder.build(std::move(sample)));
    }
    return forest;
}

Prediction RandomForest::predict(const FeatureVector& x) const {
    std::vector<double> p;
    p.reserve(trees_.size());
    double sum = 0.0;
    for (const auto& t : trees_) {
        p.push_back(t.predict(x));
        sum += p.back();
    }
    const double mean = sum / static_cast<double>(p.size());
    double var = 0.0;
    for (double v : p) {
        var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(p.size());
    // All trees agreeing must give exactly zero.
    const bool agree = std::all_of(p.begin(), p.end(), [&](double v) { return v == p.front(); });
    return {agree ? p.front() : mean, agree ? 0.0 : std::sqrt(var)};
}

void RandomForest::dump(std::ostream& os) const {
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        os << "tree " << t << '\n';
        const auto& nodes = trees_[t].nodes();
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const auto& n = nodes[k];
            if (n.feature < 0) {
                os << "  " << k << " leaf " << n.value << '\n';
            } else {
                os << "  " << k << " x[" << n.feature << "] <= " << n.threshold << " ? " << n.left << " : " << n.right
                   << '\n';
            }
        }
    }
}

} // namespace moenas
