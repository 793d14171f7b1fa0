#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lossid/errors.hpp"
#include "lossid/feat/dataset.hpp"

namespace lossid::ml {

using feat::Dataset;
using sim::LossLabel;

enum class ModelKind { DecisionTree, RandomForest, GradientBoosting, LogisticRegression, KNearestNeighbor };

const char* kind_name(ModelKind k);            // "dt", "rf", "gb", "lr", "knn"
ModelKind kind_from_name(const std::string&);  // accepts short and long names

// One flat bag covering every model kind; each trainer reads only its own
// fields. Serialized in full so model files are self-describing.
struct HyperParams {
    // trees
    int max_depth = -1;  // -1: unlimited
    int min_samples_leaf = 1;
    std::string criterion = "gini";  // or "entropy"
    // forest
    int n_trees = 100;
    std::string features_per_split = "sqrt";  // "sqrt", "all", or a number
    bool bootstrap = true;
    // boosting
    int n_stages = 100;
    // boosting and logistic regression
    double learning_rate = 0.1;
    // logistic regression
    int iterations = 1000;
    double l2 = 0.0;
    // knn
    int k = 5;
    std::string metric = "euclidean";  // or "manhattan"
    bool scale = true;
    // all kinds; "balanced" reweights rows by n/(K*n_c)
    std::string class_weight = "none";

    nlohmann::json to_json() const;
    static HyperParams from_json(const nlohmann::json&);
    std::string describe(ModelKind kind) const;  // only the fields the kind uses
};

// Grid-search tie-break: lexicographic "smaller model first" key.
std::vector<double> model_size_key(ModelKind kind, const HyperParams& hp);

// Sensible starting point per kind when no grid search is run (notably:
// boosting gets depth-3 stage trees instead of unlimited).
HyperParams default_params(ModelKind kind);

// The operating point the headline evaluation and ablation use: balanced
// class weights for the imbalance-sensitive learners and the settings that
// won the tuning sweep on the default dataset (see README).
HyperParams recommended_params(ModelKind kind);

// Materialized training input: active columns only, labels as class ids,
// per-row weights from the class_weight setting.
struct TrainView {
    std::vector<double> x;  // row-major, n * d
    std::vector<int> y;
    std::vector<double> w;
    int n = 0;
    int d = 0;

    const double* row(int i) const { return x.data() + static_cast<std::size_t>(i) * d; }
};

TrainView make_view(const Dataset& ds, const std::vector<int>& rows,
                    const std::string& class_weight);

struct TrainMeta {
    std::uint64_t seed = 0;
    HyperParams hp;
    std::string dataset_fingerprint;
};

class TrainedModel {
public:
    virtual ~TrainedModel() = default;

    ModelKind kind() const { return kind_; }
    const std::vector<std::string>& feature_schema() const { return schema_; }
    const TrainMeta& train_meta() const { return meta_; }

    // x in schema order. Default prediction is argmax of scores with ties
    // going to the lower class index; KNN overrides with its neighbor rule.
    virtual LossLabel predict(const std::vector<double>& x) const;
    virtual std::array<double, sim::kNumClasses> scores(const std::vector<double>& x) const = 0;

    // Projects a full canonical feature row onto the schema, then predicts.
    LossLabel predict_row(const std::array<double, feat::kNumFeatures>& full) const;

    virtual nlohmann::json params_json() const = 0;

protected:
    TrainedModel(ModelKind kind, std::vector<std::string> schema, TrainMeta meta);
    void check_input(const std::vector<double>& x) const;  // arity and NaN

    ModelKind kind_;
    std::vector<std::string> schema_;
    std::vector<int> canonical_idx_;  // schema position -> canonical column
    TrainMeta meta_;
};

// Dispatch on kind; `rows` indexes into ds.rows, the active mask selects
// columns. Deterministic for fixed (ds fingerprint, hp, seed).
std::unique_ptr<TrainedModel> train_model(ModelKind kind, const Dataset& ds,
                                          const std::vector<int>& rows, const HyperParams& hp,
                                          std::uint64_t seed);

// Versioned JSON model file. Unknown versions and kinds are rejected.
void save_model(const TrainedModel& model, const std::string& path);
std::unique_ptr<TrainedModel> load_model(const std::string& path);
nlohmann::json model_to_json(const TrainedModel& model);
std::unique_ptr<TrainedModel> model_from_json(const nlohmann::json& doc);

}  // namespace lossid::ml
