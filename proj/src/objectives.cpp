#include "moenas/objectives.hpp"

#include <cmath>
#include <string>

#include "moenas/error.hpp"

namespace moenas {

void validate(const ObjectiveConfig& cfg) {
    if (!(cfg.alpha >= 0.0)) {
        throw RangeError("alpha must be >= 0");
    }
    if (!(cfg.beta >= 0.0)) {
        throw RangeError("beta must be >= 0");
    }
    if (cfg.num_classes < 2) {
        throw RangeError("num_classes must be >= 2");
    }
    if (cfg.total_epochs < 1) {
        throw RangeError("total_epochs must be >= 1");
    }
}

void validate(const TrainingMetrics& m, const ObjectiveConfig& cfg) {
    const double c = cfg.num_classes;
    if (!(m.mc_dice_train >= 0.0 && m.mc_dice_train <= c)) {
        throw RangeError("mc_dice_train out of [0, C]: " + std::to_string(m.mc_dice_train));
    }
    if (!(m.mc_dice_val >= 0.0 && m.mc_dice_val <= c)) {
        throw RangeError("mc_dice_val out of [0, C]: " + std::to_string(m.mc_dice_val));
    }
    if (m.total_epochs != cfg.total_epochs) {
        throw RangeError("total_epochs mismatch: " + std::to_string(m.total_epochs));
    }
    if (m.e_max < 1 || m.e_max > m.total_epochs) {
        throw RangeError("e_max out of [1, E]: " + std::to_string(m.e_max));
    }
}

double ese(const TrainingMetrics& m, const ObjectiveConfig& cfg) {
    validate(m, cfg);
    const double c = cfg.num_classes;
    const double e = cfg.total_epochs;
    return cfg.alpha * (c - m.mc_dice_train) + (c - m.mc_dice_val) + cfg.beta * ((e - m.e_max) / e);
}

double ese_max(const ObjectiveConfig& cfg) noexcept {
    return (cfg.alpha + 1.0) * cfg.num_classes + cfg.beta;
}

double f2(std::int64_t param_count) {
    if (param_count < 1) {
        throw RangeError("param_count must be >= 1");
    }
    return std::log(static_cast<double>(param_count));
}

ObjectiveVector objectives(const TrainingMetrics& m, std::int64_t param_count, const ObjectiveConfig& cfg) {
    return {ese(m, cfg), f2(param_count)};
}

void to_json(Json& j, const TrainingMetrics& m) {
    j = Json{{"mc_dice_train", m.mc_dice_train},
             {"mc_dice_val", m.mc_dice_val},
             {"e_max", m.e_max},
             {"total_epochs", m.total_epochs}};
}

void from_json(const Json& j, TrainingMetrics& m) {
    m.mc_dice_train = j.at("mc_dice_train").get<double>();
    m.mc_dice_val = j.at("mc_dice_val").get<double>();
    m.e_max = j.at("e_max").get<int>();
    m.total_epochs = j.at("total_epochs").get<int>();
}

void to_json(Json& j, const ObjectiveVector& v) {
    j = Json{{"f1", v.f1}, {"f2", v.f2}};
}

void from_json(const Json& j, ObjectiveVector& v) {
    v.f1 = j.at("f1").get<double>();
    v.f2 = j.at("f2").get<double>();
}

void to_json(Json& j, const ObjectiveConfig& c) {
    j = Json{{"alpha", c.alpha}, {"beta", c.beta}, {"num_classes", c.num_classes}, {"total_epochs", c.total_epochs}};
}

void from_json(const Json& j, ObjectiveConfig& c) {
    c.alpha = j.at("alpha").get<double>();
    c.beta = j.at("beta").get<double>();
    c.num_classes = j.at("num_classes").get<int>();
    c.total_epochs = j.at("total_epochs").get<int>();
}

} // namespace moenas
