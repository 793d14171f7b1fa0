#include "lossid/ml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lossid::ml {

namespace {

double gini(const std::array<double, sim::kNumClasses>& wc, double total) {
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : wc) {
        const double p = c / total;
        s += p * p;
    }
    return 1.0 - s;
}

double entropy(const std::array<double, sim::kNumClasses>& wc, double total) {
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : wc) {
        if (c <= 0.0) continue;
        const double p = c / total;
        s -= p * std::log2(p);
    }
    return s;
}

struct ScanItem {
    double v;
    int y;
    double w;
};

// Midpoint that respects the partition rule x <= thr: if rounding lands the
// midpoint on the upper value, fall back to the lower one.
double safe_midpoint(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid < hi ? mid : lo;
}

struct ClassSplit {
    int feature = -1;
    double threshold = 0.0;
    double child_impurity = std::numeric_limits<double>::infinity();
};

class ClassBuilder {
public:
    ClassBuilder(const TrainView& view, const HyperParams& hp, int mtry, Rng* rng)
        : view_(view), hp_(hp), mtry_(mtry), rng_(rng), use_gini_(hp.criterion == "gini") {
        if (!use_gini_ && hp.criterion != "entropy")
            throw ConfigError("unknown split criterion: " + hp.criterion);
        if (hp.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
        if (hp.max_depth < -1 || hp.max_depth == 0)
            throw ConfigError("max_depth must be >= 1, or -1 for unlimited");
        if (mtry_ < 1 || mtry_ > view.d)
            throw ConfigError("features-per-split out of range: " + std::to_string(mtry_) +
                              " of " + std::to_string(view.d));
        feature_order_.resize(static_cast<std::size_t>(view.d));
        std::iota(feature_order_.begin(), feature_order_.end(), 0);
    }

    Tree build(std::vector<int> rows) {
        tree_.nodes.clear();
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    double impurity(const std::array<double, sim::kNumClasses>& wc, double total) const {
        return use_gini_ ? gini(wc, total) : entropy(wc, total);
    }

    int make_leaf(const std::array<double, sim::kNumClasses>& wc, double total) {
        TreeNode node;
        for (int c = 0; c < sim::kNumClasses; ++c)
            node.dist[static_cast<std::size_t>(c)] =
                total > 0.0 ? wc[static_cast<std::size_t>(c)] / total : 0.0;
        tree_.nodes.push_back(node);
        return static_cast<int>(tree_.nodes.size()) - 1;
    }

    std::vector<int> candidate_features() {
        if (mtry_ >= view_.d) return feature_order_;
        // Subsample without replacement from the per-tree stream, then sort
        // so the lowest-index tie rule still applies.
        std::vector<int> pool = feature_order_;
        rng_->shuffle(pool);
        pool.resize(static_cast<std::size_t>(mtry_));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    ClassSplit best_split(const std::vector<int>& rows,
                          const std::array<double, sim::kNumClasses>& wc, double total) {
        ClassSplit best;
        const int msl = hp_.min_samples_leaf;
        const int n = static_cast<int>(rows.size());
        for (int f : candidate_features()) {
            items_.clear();
            for (int r : rows)
                items_.push_back({view_.row(r)[f], view_.y[static_cast<std::size_t>(r)],
                                  view_.w[static_cast<std::size_t>(r)]});
            std::sort(items_.begin(), items_.end(),
                      [](const ScanItem& a, const ScanItem& b) { return a.v < b.v; });
            std::array<double, sim::kNumClasses> left{};
            double left_total = 0.0;
            for (int i = 1; i < n; ++i) {
                const ScanItem& prev = items_[static_cast<std::size_t>(i - 1)];
                left[static_cast<std::size_t>(prev.y)] += prev.w;
                left_total += prev.w;
                if (items_[static_cast<std::size_t>(i)].v == prev.v) continue;
                if (i < msl || n - i < msl) continue;
                std::array<double, sim::kNumClasses> right{};
                for (int c = 0; c < sim::kNumClasses; ++c)
                    right[static_cast<std::size_t>(c)] =
                        wc[static_cast<std::size_t>(c)] - left[static_cast<std::size_t>(c)];
                const double right_total = total - left_total;
                const double score = left_total * impurity(left, left_total) +
                                     right_total * impurity(right, right_total);
                if (score < best.child_impurity) {
                    best.child_impurity = score;
                    best.feature = f;
                    best.threshold =
                        safe_midpoint(prev.v, items_[static_cast<std::size_t>(i)].v);
                }
            }
        }
        return best;
    }

    int grow(std::vector<int> rows, int depth) {
        std::array<double, sim::kNumClasses> wc{};
        double total = 0.0;
        for (int r : rows) {
            wc[static_cast<std::size_t>(view_.y[static_cast<std::size_t>(r)])] +=
                view_.w[static_cast<std::size_t>(r)];
            total += view_.w[static_cast<std::size_t>(r)];
        }
        const bool pure = std::count_if(wc.begin(), wc.end(), [](double c) { return c > 0.0; }) <= 1;
        const bool depth_capped = hp_.max_depth >= 0 && depth >= hp_.max_depth;
        if (pure || depth_capped || static_cast<int>(rows.size()) < 2 * hp_.min_samples_leaf)
            return make_leaf(wc, total);
        const ClassSplit split = best_split(rows, wc, total);
        if (split.feature < 0) return make_leaf(wc, total);  // all candidate features constant

        std::vector<int> left_rows, right_rows;
        for (int r : rows)
            (view_.row(r)[split.feature] <= split.threshold ? left_rows : right_rows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        TreeNode node;
        node.feature = split.feature;
        node.threshold = split.threshold;
        tree_.nodes.push_back(node);
        const int self = static_cast<int>(tree_.nodes.size()) - 1;
        const int left = grow(std::move(left_rows), depth + 1);
        const int right = grow(std::move(right_rows), depth + 1);
        tree_.nodes[static_cast<std::size_t>(self)].left = left;
        tree_.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    const TrainView& view_;
    const HyperParams& hp_;
    int mtry_;
    Rng* rng_;
    bool use_gini_;
    std::vector<int> feature_order_;
    std::vector<ScanItem> items_;
    Tree tree_;
};

struct RegScanItem {
    double v;
    double wr;  // weight * residual
    double w;
};

class RegBuilder {
public:
    RegBuilder(const TrainView& view, int max_depth, int msl, const RegressionTarget& target)
        : view_(view), max_depth_(max_depth), msl_(msl), target_(target) {}

    Tree build(std::vector<int> rows) {
        tree_.nodes.clear();
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    int make_leaf(const std::vector<int>& rows) {
        TreeNode node;
        node.value = target_.leaf_value(rows, view_, *target_.residual);
        tree_.nodes.push_back(node);
        return static_cast<int>(tree_.nodes.size()) - 1;
    }

    int grow(std::vector<int> rows, int depth) {
        const int n = static_cast<int>(rows.size());
        if ((max_depth_ >= 0 && depth >= max_depth_) || n < 2 * msl_) return make_leaf(rows);

        // Minimize weighted SSE, equivalently maximize sum of (w*r sums)^2 / w
        // over the two children.
        int best_f = -1;
        double best_thr = 0.0, best_gain = -std::numeric_limits<double>::infinity();
        for (int f = 0; f < view_.d; ++f) {
            items_.clear();
            double total_wr = 0.0, total_w = 0.0;
            for (int r : rows) {
                const double w = view_.w[static_cast<std::size_t>(r)];
                const double wr = w * (*target_.residual)[static_cast<std::size_t>(r)];
                items_.push_back({view_.row(r)[f], wr, w});
                total_wr += wr;
                total_w += w;
            }
            std::sort(items_.begin(), items_.end(),
                      [](const RegScanItem& a, const RegScanItem& b) { return a.v < b.v; });
            double left_wr = 0.0, left_w = 0.0;
            for (int i = 1; i < n; ++i) {
                const RegScanItem& prev = items_[static_cast<std::size_t>(i - 1)];
                left_wr += prev.wr;
                left_w += prev.w;
                if (items_[static_cast<std::size_t>(i)].v == prev.v) continue;
                if (i < msl_ || n - i < msl_) continue;
                const double right_wr = total_wr - left_wr;
                const double right_w = total_w - left_w;
                if (left_w <= 0.0 || right_w <= 0.0) continue;
                const double gain =
                    left_wr * left_wr / left_w + right_wr * right_wr / right_w;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_f = f;
                    best_thr = safe_midpoint(prev.v, items_[static_cast<std::size_t>(i)].v);
                }
            }
        }
        if (best_f < 0) return make_leaf(rows);

        std::vector<int> left_rows, right_rows;
        for (int r : rows) (view_.row(r)[best_f] <= best_thr ? left_rows : right_rows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        TreeNode node;
        node.feature = best_f;
        node.threshold = best_thr;
        tree_.nodes.push_back(node);
        const int self = static_cast<int>(tree_.nodes.size()) - 1;
        const int left = grow(std::move(left_rows), depth + 1);
        const int right = grow(std::move(right_rows), depth + 1);
        tree_.nodes[static_cast<std::size_t>(self)].left = left;
        tree_.nodes[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    const TrainView& view_;
    int max_depth_;
    int msl_;
    const RegressionTarget& target_;
    std::vector<RegScanItem> items_;
    Tree tree_;
};

}  // namespace

nlohmann::json Tree::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : nodes)
        arr.push_back({n.feature, n.threshold, n.left, n.right,
                       {n.dist[0], n.dist[1], n.dist[2]}, n.value});
    return {{"nodes", std::move(arr)}};
}

Tree Tree::from_json(const nlohmann::json& j) {
    Tree t;
    for (const auto& e : j.at("nodes")) {
        TreeNode n;
        n.feature = e.at(0).get<int>();
        n.threshold = e.at(1).get<double>();
        n.left = e.at(2).get<int>();
        n.right = e.at(3).get<int>();
        for (int c = 0; c < sim::kNumClasses; ++c)
            n.dist[static_cast<std::size_t>(c)] = e.at(4).at(static_cast<std::size_t>(c)).get<double>();
        n.value = e.at(5).get<double>();
        t.nodes.push_back(n);
    }
    if (t.nodes.empty()) throw SchemaError("tree with no nodes");
    return t;
}

Tree build_classification_tree(const TrainView& view, const std::vector<int>& rows,
                               const HyperParams& hp, int mtry, Rng* rng) {
    if (mtry < view.d && rng == nullptr)
        throw ConfigError("feature subsampling requires an RNG stream");
    ClassBuilder builder(view, hp, mtry, rng);
    return builder.build(rows);
}

Tree build_regression_tree(const TrainView& view, const std::vector<int>& rows, int max_depth,
                           int min_samples_leaf, const RegressionTarget& target) {
    RegBuilder builder(view, max_depth, min_samples_leaf, target);
    return builder.build(rows);
}

std::array<double, sim::kNumClasses> DecisionTreeModel::scores(const std::vector<double>& x) const {
    check_input(x);
    return tree_.nodes[static_cast<std::size_t>(tree_.leaf_for(x.data()))].dist;
}

nlohmann::json DecisionTreeModel::params_json() const { return {{"tree", tree_.to_json()}}; }

std::unique_ptr<DecisionTreeModel> DecisionTreeModel::from_json(const nlohmann::json& params,
                                                                std::vector<std::string> schema,
                                                                TrainMeta meta) {
    return std::make_unique<DecisionTreeModel>(Tree::from_json(params.at("tree")),
                                               std::move(schema), std::move(meta));
}

std::unique_ptr<DecisionTreeModel> train_decision_tree(const Dataset& ds,
                                                       const std::vector<int>& rows,
                                                       const HyperParams& hp, std::uint64_t seed) {
    const TrainView view = make_view(ds, rows, hp.class_weight);
    std::vector<int> all(static_cast<std::size_t>(view.n));
    std::iota(all.begin(), all.end(), 0);
    Tree tree = build_classification_tree(view, all, hp, view.d, nullptr);
    TrainMeta meta{seed, hp, ds.fingerprint()};
    return std::make_unique<DecisionTreeModel>(std::move(tree), ds.active_names(), std::move(meta));
}

}  // namespace lossid::ml
