#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "moenas/genome.hpp"
#include "moenas/json.hpp"

namespace moenas {

// One-hot blocks for i2 (2), i3 (3), i4 (4), o1..o4 (3 each), then the raw
// values of n_c, n_f and lr_level.
inline constexpr std::size_t kFeatureCount = 24;
using FeatureVector = std::array<double, kFeatureCount>;

FeatureVector encode(const Genome& g);

struct ForestConfig {
    int num_trees = 100;
    int min_samples_split = 5;
    int mtry = 8;
    std::uint64_t seed = 0;

    bool operator==(const ForestConfig&) const = default;
};

void validate(const ForestConfig& cfg);
void to_json(Json& j, const ForestConfig& c);
void from_json(const Json& j, ForestConfig& c);

// Append-only (features, ESE) pairs, one per trained architecture.
class SurrogateTrainingPopulation {
public:
    void add(const Genome& g, double ese_value);

    [[nodiscard]] std::size_t size() const noexcept { return targets_.size(); }
    [[nodiscard]] std::span<const FeatureVector> features() const noexcept { return features_; }
    [[nodiscard]] std::span<const double> targets() const noexcept { return targets_; }

private:
    std::vector<FeatureVector> features_;
    std::vector<double> targets_;
};

struct Prediction {
    double mean = 0.0;
    double dispersion = 0.0; // population std-dev of the per-tree predictions
};

class RegressionTree {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;

        bool operator==(const Node&) const = default;
    };

    [[nodiscard]] double predict(const FeatureVector& x) const;
    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }

    bool operator==(const RegressionTree&) const = default;

private:
    friend class TreeBuilder;
    std::vector<Node> nodes_;
};

// CART regression trees on bootstrap resamples, variance-reduction splits over
// mtry random features; thresholds are midpoints of consecutive distinct values,
// ties go to the lowest feature index then the lowest threshold.
class RandomForest {
public:
    // Throws Error("insufficient-data ...") for fewer than two samples.
    static RandomForest fit(std::span<const FeatureVector> x, std::span<const double> y, const ForestConfig& cfg);
    static RandomForest fit(const SurrogateTrainingPopulation& stp, const ForestConfig& cfg) {
        return fit(stp.features(), stp.targets(), cfg);
    }

    [[nodiscard]] Prediction predict(const FeatureVector& x) const;
    [[nodiscard]] const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

    void dump(std::ostream& os) const;

    bool operator==(const RandomForest&) const = default;

private:
    std::vector<RegressionTree> trees_;
};

} // namespace moenas
