#pragma once

#include "lossid/ml/tree.hpp"

namespace lossid::ml {

// Bagged trees with per-node feature subsampling. Per-tree RNG streams are
// derived from (seed, tree index), so the forest is reproducible regardless
// of how many trees train concurrently. Prediction is a majority vote over
// tree leaf labels; vote ties go to the lower class index.
class RandomForestModel final : public TrainedModel {
public:
    RandomForestModel(std::vector<Tree> trees, std::vector<std::string> schema, TrainMeta meta)
        : TrainedModel(ModelKind::RandomForest, std::move(schema), std::move(meta)),
          trees_(std::move(trees)) {}

    std::array<double, sim::kNumClasses> scores(const std::vector<double>& x) const override;
    nlohmann::json params_json() const override;
    const std::vector<Tree>& trees() const { return trees_; }

    static std::unique_ptr<RandomForestModel> from_json(const nlohmann::json& params,
                                                        std::vector<std::string> schema,
                                                        TrainMeta meta);

private:
    std::vector<Tree> trees_;
};

std::unique_ptr<RandomForestModel> train_random_forest(const Dataset& ds,
                                                       const std::vector<int>& rows,
                                                       const HyperParams& hp, std::uint64_t seed);

}  // namespace lossid::ml
