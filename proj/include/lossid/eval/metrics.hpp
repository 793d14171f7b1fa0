#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "lossid/ml/model.hpp"
#include "lossid/ml/split.hpp"

namespace lossid::eval {

using sim::kNumClasses;
using sim::LossLabel;

// Rows are actual labels, columns predicted.
using Confusion = std::array<std::array<std::int64_t, kNumClasses>, kNumClasses>;

Confusion confusion_matrix(const std::vector<LossLabel>& actual,
                           const std::vector<LossLabel>& predicted);

struct PerClass {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    std::int64_t support_actual = 0;
    std::int64_t support_predicted = 0;
    // Set when a zero denominator forced the metric to 0.
    bool recall_undefined = false;
    bool precision_undefined = false;
};

std::array<PerClass, kNumClasses> per_class_metrics(const Confusion& cm);

struct MacroAverages {
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

// Unweighted mean over all three classes, unDrop included.
MacroAverages macro_averages(const std::array<PerClass, kNumClasses>& per_class);

struct EvalReport {
    std::array<PerClass, kNumClasses> per_class{};
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    Confusion confusion{};
    std::int64_t test_size = 0;
    // provenance
    std::string model_kind;
    std::string hyperparameters;
    std::uint64_t split_seed = 0;
    std::vector<std::string> feature_mask;  // active feature names

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json&);
};

// Predicts the test side of `split` and assembles the report. The model's
// schema must match the dataset's active columns exactly.
EvalReport evaluate(const ml::TrainedModel& model, const ml::Dataset& ds,
                    const ml::SplitIndices& split);

// Fixed-width table: per-class recall/F1/supports, macro row, accuracy, and
// the confusion matrix. Two-decimal rounding; the JSON keeps full precision.
std::string render_report(const EvalReport& report);

void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

}  // namespace lossid::eval
