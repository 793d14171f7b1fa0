#pragma once

#include "lossid/ml/model.hpp"
#include "lossid/rng.hpp"

namespace lossid::ml {

// Axis-aligned binary tree node; x[feature] <= threshold goes left. Shared by
// the classification models and the boosting regression trees; `value` is the
// class distribution or the single regression output.
struct TreeNode {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<double, sim::kNumClasses> dist{};  // classification: weighted class fractions
    double value = 0.0;                           // regression leaf output

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    int leaf_for(const double* x) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf())
            i = x[nodes[static_cast<std::size_t>(i)].feature] <= nodes[static_cast<std::size_t>(i)].threshold
                    ? nodes[static_cast<std::size_t>(i)].left
                    : nodes[static_cast<std::size_t>(i)].right;
        return i;
    }

    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json&);
};

// CART with impurity-reduction splits at midpoints between distinct values.
// Ties go to the lowest feature index, then the lowest threshold (scan
// order). `mtry`: features considered per node; < d enables the
// random-forest subsampling, in which case rng must be provided.
Tree build_classification_tree(const TrainView& view, const std::vector<int>& rows,
                               const HyperParams& hp, int mtry, Rng* rng);

// Regression tree minimizing weighted squared error; leaf values are set by
// the caller through `leaf_value` from the rows that landed in the leaf.
struct RegressionTarget {
    const std::vector<double>* residual = nullptr;
    // Maps the leaf's row set to its output value.
    double (*leaf_value)(const std::vector<int>& rows, const TrainView& view,
                         const std::vector<double>& residual) = nullptr;
};

Tree build_regression_tree(const TrainView& view, const std::vector<int>& rows, int max_depth,
                           int min_samples_leaf, const RegressionTarget& target);

class DecisionTreeModel final : public TrainedModel {
public:
    DecisionTreeModel(Tree tree, std::vector<std::string> schema, TrainMeta meta)
        : TrainedModel(ModelKind::DecisionTree, std::move(schema), std::move(meta)),
          tree_(std::move(tree)) {}

    std::array<double, sim::kNumClasses> scores(const std::vector<double>& x) const override;
    nlohmann::json params_json() const override;
    const Tree& tree() const { return tree_; }

    static std::unique_ptr<DecisionTreeModel> from_json(const nlohmann::json& params,
                                                        std::vector<std::string> schema,
                                                        TrainMeta meta);

private:
    Tree tree_;
};

// Training is deterministic; the seed is only recorded in the model's meta.
std::unique_ptr<DecisionTreeModel> train_decision_tree(const Dataset& ds,
                                                       const std::vector<int>& rows,
                                                       const HyperParams& hp,
                                                       std::uint64_t seed = 0);

}  // namespace lossid::ml
