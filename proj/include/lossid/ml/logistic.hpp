#pragma once

#include "lossid/ml/model.hpp"

namespace lossid::ml {

// Multinomial softmax regression trained by full-batch gradient descent on
// L2-regularized cross-entropy (bias unregularized). Inputs are standardized
// with training-split statistics; the transform is stored in the model.
class LogisticRegressionModel final : public TrainedModel {
public:
    LogisticRegressionModel(std::vector<std::array<double, sim::kNumClasses>> weights,
                            std::array<double, sim::kNumClasses> bias, std::vector<double> mean,
                            std::vector<double> stdev, std::vector<double> train_loss,
                            std::vector<std::string> schema, TrainMeta meta)
        : TrainedModel(ModelKind::LogisticRegression, std::move(schema), std::move(meta)),
          weights_(std::move(weights)),
          bias_(bias),
          mean_(std::move(mean)),
          stdev_(std::move(stdev)),
          train_loss_(std::move(train_loss)) {}

    // Softmax probabilities; each row sums to 1.
    std::array<double, sim::kNumClasses> scores(const std::vector<double>& x) const override;
    nlohmann::json params_json() const override;

    const std::vector<double>& training_loss() const { return train_loss_; }

    static std::unique_ptr<LogisticRegressionModel> from_json(const nlohmann::json& params,
                                                              std::vector<std::string> schema,
                                                              TrainMeta meta);

private:
    std::vector<std::array<double, sim::kNumClasses>> weights_;  // [feature][class]
    std::array<double, sim::kNumClasses> bias_{};
    std::vector<double> mean_, stdev_;
    std::vector<double> train_loss_;
};

// Training is deterministic; the seed is only recorded in the model's meta.
std::unique_ptr<LogisticRegressionModel> train_logistic_regression(const Dataset& ds,
                                                                   const std::vector<int>& rows,
                                                                   const HyperParams& hp,
                                                                   std::uint64_t seed = 0);

// Loss and gradient of the regularized objective at (weights, bias) over
// standardized inputs; exposed so tests can check the gradient against
// finite differences. Returns the mean weighted cross-entropy plus the L2
// term; gradients are laid out like the model parameters.
double lr_objective(const TrainView& view, const std::vector<std::array<double, sim::kNumClasses>>& weights,
                    const std::array<double, sim::kNumClasses>& bias, double l2,
                    std::vector<std::array<double, sim::kNumClasses>>* grad_weights,
                    std::array<double, sim::kNumClasses>* grad_bias);

}  // namespace lossid::ml
