#pragma once

#include <cstdint>

#include "moenas/json.hpp"

namespace moenas {

// Multi-class Dice is the sum of per-class Dice scores, so it ranges over [0, C].
struct TrainingMetrics {
    double mc_dice_train = 0.0;
    double mc_dice_val = 0.0;
    int e_max = 1;
    int total_epochs = 1;

    bool operator==(const TrainingMetrics&) const = default;
};

struct ObjectiveVector {
    double f1 = 0.0; // expected segmentation error
    double f2 = 0.0; // ln(parameter count)

    bool operator==(const ObjectiveVector&) const = default;
};

struct ObjectiveConfig {
    double alpha = 0.25;
    double beta = 0.10;
    int num_classes = 4;
    int total_epochs = 60;

    bool operator==(const ObjectiveConfig&) const = default;
};

void validate(const ObjectiveConfig& cfg);

// Throws RangeError if the metrics violate their ranges under cfg.
void validate(const TrainingMetrics& m, const ObjectiveConfig& cfg);

// alpha*(C - train) + (C - val) + beta*(E - e_max)/E
double ese(const TrainingMetrics& m, const ObjectiveConfig& cfg);

// Upper bound of ese over all valid metrics: (alpha + 1)*C + beta.
double ese_max(const ObjectiveConfig& cfg) noexcept;

// Natural log of the parameter count.
double f2(std::int64_t param_count);

ObjectiveVector objectives(const TrainingMetrics& m, std::int64_t param_count, const ObjectiveConfig& cfg);

void to_json(Json& j, const TrainingMetrics& m);
void from_json(const Json& j, TrainingMetrics& m);
void to_json(Json& j, const ObjectiveVector& v);
void from_json(const Json& j, ObjectiveVector& v);
void to_json(Json& j, const ObjectiveConfig& c);
void from_json(const Json& j, ObjectiveConfig& c);

} // namespace moenas
