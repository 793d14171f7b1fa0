#pragma once

#include "lossid/eval/metrics.hpp"
#include "lossid/ml/grid.hpp"

namespace lossid::eval {

// A named set of features to remove. "RTT" removes both rtt_ms and
// avg_rtt_ms; removing everything but timestamp/size needs an explicit
// opt-in since the leftovers carry almost no signal.
struct FeatureRemoval {
    std::string name;
    std::vector<int> removed;  // canonical feature indices
};

// The six standard rows, in report order: Jitter, RTT, cWnd, Jitter & RTT,
// the combined cWnd+Jitter+RTT removal, and the all-features reference row.
std::vector<FeatureRemoval> standard_removals();
FeatureRemoval removal_from_names(const std::string& row_name,
                                  const std::vector<std::string>& feature_names);

struct AblationCell {
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

struct AblationReport {
    std::vector<std::string> row_names;
    std::vector<std::string> kinds;                   // column order
    std::vector<std::vector<AblationCell>> cells;     // [row][kind]
    std::vector<EvalReport> baseline_reports;         // full-feature report per kind
    std::string dataset_fingerprint;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static AblationReport from_json(const nlohmann::json&);
};

struct AblationOptions {
    int cv_folds = 5;                 // for the one-time hyperparameter search
    bool use_grid_search = true;      // false: recommended_params per kind
    bool allow_empty_features = false;
    std::uint64_t seed = 1;
};

// For each model kind: tune once on the full feature set, then retrain and
// evaluate with the same hyperparameters under every removal. Rows with no
// active features left are refused unless allow_empty_features is set.
AblationReport run_ablation(const ml::Dataset& ds, const ml::SplitIndices& split,
                            const std::vector<ml::ModelKind>& kinds,
                            const std::vector<FeatureRemoval>& removals,
                            const AblationOptions& options);

std::string render_ablation(const AblationReport& report);
void save_ablation(const AblationReport& report, const std::string& path);
void save_ablation_csv(const AblationReport& report, const std::string& path);

}  // namespace lossid::eval
