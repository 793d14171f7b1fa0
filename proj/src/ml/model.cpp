#include "lossid/ml/model.hpp"

#include <cmath>

#include "lossid/ml/boosting.hpp"
#include "lossid/ml/forest.hpp"
#include "lossid/ml/knn.hpp"
#include "lossid/ml/logistic.hpp"
#include "lossid/ml/tree.hpp"
#include "lossid/util.hpp"

#include <fstream>

namespace lossid::ml {

namespace {
constexpr int kModelFormatVersion = 1;
}

const char* kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::DecisionTree: return "dt";
        case ModelKind::RandomForest: return "rf";
        case ModelKind::GradientBoosting: return "gb";
        case ModelKind::LogisticRegression: return "lr";
        case ModelKind::KNearestNeighbor: return "knn";
    }
    return "?";
}

ModelKind kind_from_name(const std::string& s) {
    if (s == "dt" || s == "decision-tree" || s == "decision_tree") return ModelKind::DecisionTree;
    if (s == "rf" || s == "random-forest" || s == "random_forest") return ModelKind::RandomForest;
    if (s == "gb" || s == "gradient-boosting" || s == "gradient_boosting")
        return ModelKind::GradientBoosting;
    if (s == "lr" || s == "logistic-regression" || s == "logistic_regression")
        return ModelKind::LogisticRegression;
    if (s == "knn" || s == "k-nearest-neighbor" || s == "k_nearest_neighbor")
        return ModelKind::KNearestNeighbor;
    throw ConfigError("unknown model kind: " + s);
}

nlohmann::json HyperParams::to_json() const {
    return {{"max_depth", max_depth},
            {"min_samples_leaf", min_samples_leaf},
            {"criterion", criterion},
            {"n_trees", n_trees},
            {"features_per_split", features_per_split},
            {"bootstrap", bootstrap},
            {"n_stages", n_stages},
            {"learning_rate", learning_rate},
            {"iterations", iterations},
            {"l2", l2},
            {"k", k},
            {"metric", metric},
            {"scale", scale},
            {"class_weight", class_weight}};
}

HyperParams HyperParams::from_json(const nlohmann::json& j) {
    HyperParams hp;
    hp.max_depth = j.value("max_depth", hp.max_depth);
    hp.min_samples_leaf = j.value("min_samples_leaf", hp.min_samples_leaf);
    hp.criterion = j.value("criterion", hp.criterion);
    hp.n_trees = j.value("n_trees", hp.n_trees);
    hp.features_per_split = j.value("features_per_split", hp.features_per_split);
    hp.bootstrap = j.value("bootstrap", hp.bootstrap);
    hp.n_stages = j.value("n_stages", hp.n_stages);
    hp.learning_rate = j.value("learning_rate", hp.learning_rate);
    hp.iterations = j.value("iterations", hp.iterations);
    hp.l2 = j.value("l2", hp.l2);
    hp.k = j.value("k", hp.k);
    hp.metric = j.value("metric", hp.metric);
    hp.scale = j.value("scale", hp.scale);
    hp.class_weight = j.value("class_weight", hp.class_weight);
    return hp;
}

std::string HyperParams::describe(ModelKind kind) const {
    auto depth = [this] {
        return max_depth < 0 ? std::string("unlimited") : std::to_string(max_depth);
    };
    std::string s;
    switch (kind) {
        case ModelKind::DecisionTree:
            s = "max_depth=" + depth() + " min_samples_leaf=" + std::to_string(min_samples_leaf) +
                " criterion=" + criterion;
            break;
        case ModelKind::RandomForest:
            s = "n_trees=" + std::to_string(n_trees) + " max_depth=" + depth() +
                " features_per_split=" + features_per_split +
                (bootstrap ? " bootstrap" : " no-bootstrap");
            break;
        case ModelKind::GradientBoosting:
            s = "n_stages=" + std::to_string(n_stages) + " learning_rate=" +
                fmt_double(learning_rate) + " max_depth=" + depth();
            break;
        case ModelKind::LogisticRegression:
            s = "learning_rate=" + fmt_double(learning_rate) +
                " iterations=" + std::to_string(iterations) + " l2=" + fmt_double(l2);
            break;
        case ModelKind::KNearestNeighbor:
            s = "k=" + std::to_string(k) + " metric=" + metric + (scale ? " scaled" : " unscaled");
            break;
    }
    if (class_weight != "none") s += " class_weight=" + class_weight;
    return s;
}

std::vector<double> model_size_key(ModelKind kind, const HyperParams& hp) {
    const double depth = hp.max_depth < 0 ? 1e18 : hp.max_depth;
    switch (kind) {
        case ModelKind::DecisionTree: return {depth, -static_cast<double>(hp.min_samples_leaf)};
        case ModelKind::RandomForest: return {static_cast<double>(hp.n_trees), depth};
        case ModelKind::GradientBoosting: return {static_cast<double>(hp.n_stages), depth};
        case ModelKind::LogisticRegression: return {static_cast<double>(hp.iterations)};
        case ModelKind::KNearestNeighbor: return {static_cast<double>(hp.k)};
    }
    return {};
}

HyperParams default_params(ModelKind kind) {
    HyperParams hp;
    if (kind == ModelKind::GradientBoosting) hp.max_depth = 3;
    return hp;
}

HyperParams recommended_params(ModelKind kind) {
    HyperParams hp = default_params(kind);
    switch (kind) {
        case ModelKind::DecisionTree:
            hp.max_depth = 8;
            hp.class_weight = "balanced";
            break;
        case ModelKind::RandomForest:
            hp.max_depth = 8;
            hp.class_weight = "balanced";
            break;
        case ModelKind::GradientBoosting:
            hp.class_weight = "balanced";
            break;
        case ModelKind::LogisticRegression:
            hp.class_weight = "balanced";
            break;
        case ModelKind::KNearestNeighbor:
            hp.k = 3;
            break;
    }
    return hp;
}

TrainView make_view(const Dataset& ds, const std::vector<int>& rows,
                    const std::string& class_weight) {
    if (class_weight != "none" && class_weight != "balanced")
        throw ConfigError("unknown class_weight: " + class_weight);
    const auto cols = ds.active_indices();
    TrainView view;
    view.n = static_cast<int>(rows.size());
    view.d = static_cast<int>(cols.size());
    view.x.reserve(rows.size() * cols.size());
    view.y.reserve(rows.size());
    std::array<std::int64_t, sim::kNumClasses> counts{};
    for (int r : rows) {
        const auto& row = ds.rows[static_cast<std::size_t>(r)];
        for (int c : cols) view.x.push_back(row.x[static_cast<std::size_t>(c)]);
        view.y.push_back(static_cast<int>(row.label));
        ++counts[static_cast<int>(row.label)];
    }
    view.w.assign(rows.size(), 1.0);
    if (class_weight == "balanced") {
        std::array<double, sim::kNumClasses> wc{};
        for (int c = 0; c < sim::kNumClasses; ++c)
            wc[static_cast<std::size_t>(c)] =
                counts[static_cast<std::size_t>(c)] > 0
                    ? static_cast<double>(view.n) /
                          (sim::kNumClasses * static_cast<double>(counts[static_cast<std::size_t>(c)]))
                    : 0.0;
        for (int i = 0; i < view.n; ++i)
            view.w[static_cast<std::size_t>(i)] = wc[static_cast<std::size_t>(view.y[static_cast<std::size_t>(i)])];
    }
    return view;
}

TrainedModel::TrainedModel(ModelKind kind, std::vector<std::string> schema, TrainMeta meta)
    : kind_(kind), schema_(std::move(schema)), meta_(std::move(meta)) {
    canonical_idx_.reserve(schema_.size());
    for (const auto& name : schema_) {
        const int idx = feat::feature_index(name);
        if (idx < 0) throw SchemaError("unknown feature in model schema: " + name);
        canonical_idx_.push_back(idx);
    }
}

void TrainedModel::check_input(const std::vector<double>& x) const {
    if (x.size() != schema_.size())
        throw SchemaError("model expects " + std::to_string(schema_.size()) + " features, got " +
                          std::to_string(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::isnan(x[i])) throw SchemaError("feature " + schema_[i] + " is NaN");
}

LossLabel TrainedModel::predict(const std::vector<double>& x) const {
    const auto s = scores(x);
    int best = 0;
    for (int c = 1; c < sim::kNumClasses; ++c)
        if (s[static_cast<std::size_t>(c)] > s[static_cast<std::size_t>(best)]) best = c;
    return static_cast<LossLabel>(best);
}

LossLabel TrainedModel::predict_row(const std::array<double, feat::kNumFeatures>& full) const {
    std::vector<double> x(schema_.size());
    for (std::size_t i = 0; i < schema_.size(); ++i)
        x[i] = full[static_cast<std::size_t>(canonical_idx_[i])];
    return predict(x);
}

std::unique_ptr<TrainedModel> train_model(ModelKind kind, const Dataset& ds,
                                          const std::vector<int>& rows, const HyperParams& hp,
                                          std::uint64_t seed) {
    if (rows.empty()) throw ConfigError("training row set is empty");
    if (ds.active_indices().empty()) throw ConfigError("no active features to train on");
    switch (kind) {
        case ModelKind::DecisionTree: return train_decision_tree(ds, rows, hp, seed);
        case ModelKind::RandomForest: return train_random_forest(ds, rows, hp, seed);
        case ModelKind::GradientBoosting: return train_gradient_boosting(ds, rows, hp, seed);
        case ModelKind::LogisticRegression: return train_logistic_regression(ds, rows, hp, seed);
        case ModelKind::KNearestNeighbor: return train_knn(ds, rows, hp, seed);
    }
    throw ConfigError("unknown model kind");
}

nlohmann::json model_to_json(const TrainedModel& model) {
    return {{"format_version", kModelFormatVersion},
            {"kind", kind_name(model.kind())},
            {"feature_schema", model.feature_schema()},
            {"classes", {"qDrop", "wDrop", "unDrop"}},
            {"params", model.params_json()},
            {"train_meta",
             {{"seed", model.train_meta().seed},
              {"hyperparameters", model.train_meta().hp.to_json()},
              {"dataset_fingerprint", model.train_meta().dataset_fingerprint}}}};
}

std::unique_ptr<TrainedModel> model_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("format_version"))
        throw SchemaError("not a model file: missing format_version");
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw SchemaError("unsupported model format version " + std::to_string(version) +
                          " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
    const auto classes = doc.at("classes").get<std::vector<std::string>>();
    if (classes != std::vector<std::string>{"qDrop", "wDrop", "unDrop"})
        throw SchemaError("model class list does not match qDrop/wDrop/unDrop");
    auto schema = doc.at("feature_schema").get<std::vector<std::string>>();
    TrainMeta meta;
    if (doc.contains("train_meta")) {
        const auto& tm = doc.at("train_meta");
        meta.seed = tm.value("seed", std::uint64_t{0});
        if (tm.contains("hyperparameters")) meta.hp = HyperParams::from_json(tm.at("hyperparameters"));
        meta.dataset_fingerprint = tm.value("dataset_fingerprint", std::string{});
    }
    const std::string kind_str = doc.at("kind").get<std::string>();
    ModelKind kind;
    try {
        kind = kind_from_name(kind_str);
    } catch (const ConfigError&) {
        // a file naming a kind this build does not know is a format problem,
        // not a usage problem
        throw SchemaError("model file has unknown kind: " + kind_str);
    }
    const auto& params = doc.at("params");
    switch (kind) {
        case ModelKind::DecisionTree:
            return DecisionTreeModel::from_json(params, std::move(schema), std::move(meta));
        case ModelKind::RandomForest:
            return RandomForestModel::from_json(params, std::move(schema), std::move(meta));
        case ModelKind::GradientBoosting:
            return GradientBoostingModel::from_json(params, std::move(schema), std::move(meta));
        case ModelKind::LogisticRegression:
            return LogisticRegressionModel::from_json(params, std::move(schema), std::move(meta));
        case ModelKind::KNearestNeighbor:
            return KnnModel::from_json(params, std::move(schema), std::move(meta));
    }
    throw SchemaError("unknown model kind in file");
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << model_to_json(model).dump(2) << '\n';
    if (!out.flush()) throw ParseError("write failed: " + path);
}

std::unique_ptr<TrainedModel> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("model file " + path + " is not valid JSON: " + e.what());
    }
    return model_from_json(doc);
}

}  // namespace lossid::ml
