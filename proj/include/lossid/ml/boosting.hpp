#pragma once

#include "lossid/ml/tree.hpp"

namespace lossid::ml {

// One-vs-all multiclass gradient boosting on the softmax log-loss. Class
// score = initial log-odds + learning_rate * sum of stage-tree outputs;
// stage trees are regression trees fit to the residuals y_k - p_k.
class GradientBoostingModel final : public TrainedModel {
public:
    GradientBoostingModel(std::array<double, sim::kNumClasses> init_score,
                          std::vector<std::array<Tree, sim::kNumClasses>> stages,
                          std::vector<double> train_loss, std::vector<std::string> schema,
                          TrainMeta meta)
        : TrainedModel(ModelKind::GradientBoosting, std::move(schema), std::move(meta)),
          init_score_(init_score),
          stages_(std::move(stages)),
          train_loss_(std::move(train_loss)) {}

    std::array<double, sim::kNumClasses> scores(const std::vector<double>& x) const override;
    nlohmann::json params_json() const override;

    // Mean training log-loss after each stage; non-increasing in practice.
    const std::vector<double>& training_loss() const { return train_loss_; }

    static std::unique_ptr<GradientBoostingModel> from_json(const nlohmann::json& params,
                                                            std::vector<std::string> schema,
                                                            TrainMeta meta);

private:
    std::array<double, sim::kNumClasses> init_score_{};
    std::vector<std::array<Tree, sim::kNumClasses>> stages_;
    std::vector<double> train_loss_;
};

// Training is deterministic; the seed is only recorded in the model's meta.
std::unique_ptr<GradientBoostingModel> train_gradient_boosting(const Dataset& ds,
                                                               const std::vector<int>& rows,
                                                               const HyperParams& hp,
                                                               std::uint64_t seed = 0);

}  // namespace lossid::ml
