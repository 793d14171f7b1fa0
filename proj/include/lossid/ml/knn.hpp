#pragma once

#include "lossid/ml/model.hpp"

namespace lossid::ml {

// Brute-force k-nearest-neighbor over stored (optionally standardized)
// training rows. Distance ties break on the lower stored-row index; vote
// ties go to the nearest neighbor holding one of the tied labels.
class KnnModel final : public TrainedModel {
public:
    KnnModel(std::vector<double> rows, std::vector<int> labels, std::vector<double> mean,
             std::vector<double> stdev, std::vector<std::string> schema, TrainMeta meta)
        : TrainedModel(ModelKind::KNearestNeighbor, std::move(schema), std::move(meta)),
          rows_(std::move(rows)),
          labels_(std::move(labels)),
          mean_(std::move(mean)),
          stdev_(std::move(stdev)) {}

    LossLabel predict(const std::vector<double>& x) const override;
    std::array<double, sim::kNumClasses> scores(const std::vector<double>& x) const override;
    nlohmann::json params_json() const override;

    std::int64_t stored_rows() const { return static_cast<std::int64_t>(labels_.size()); }

    static std::unique_ptr<KnnModel> from_json(const nlohmann::json& params,
                                               std::vector<std::string> schema, TrainMeta meta);

private:
    // Neighbor list in (distance, row index) order, length k.
    std::vector<int> neighbors(const std::vector<double>& x) const;

    std::vector<double> rows_;  // row-major, already scaled
    std::vector<int> labels_;
    std::vector<double> mean_, stdev_;  // identity transform when scaling is off
};

// Training is deterministic; the seed is only recorded in the model's meta.
std::unique_ptr<KnnModel> train_knn(const Dataset& ds, const std::vector<int>& rows,
                                    const HyperParams& hp, std::uint64_t seed = 0);

}  // namespace lossid::ml
