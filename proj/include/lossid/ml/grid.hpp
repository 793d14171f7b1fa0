#pragma once

#include "lossid/ml/model.hpp"
#include "lossid/ml/split.hpp"

namespace lossid::ml {

struct CvCell {
    HyperParams hp;
    std::vector<double> fold_macro_recall;
    double mean_macro_recall = 0.0;
    double mean_macro_f1 = 0.0;
};

struct GridResult {
    HyperParams best;
    int best_index = 0;  // into table / the input grid
    std::vector<CvCell> table;
};

// Stratified k-fold cross-validation on the training side of `split`,
// maximizing mean macro recall. Ties prefer the smaller model
// (model_size_key), then the earlier grid entry. Grid cells and folds may
// run in parallel; the outcome is order-independent.
GridResult grid_search(ModelKind kind, const std::vector<HyperParams>& grid, const Dataset& ds,
                       const SplitIndices& split, int folds, std::uint64_t seed);

// The committed default grids, documented in the README. `active_features`
// bounds features-per-split choices.
std::vector<HyperParams> default_grid(ModelKind kind);

void save_cv_table_csv(const GridResult& result, ModelKind kind, const std::string& path);

}  // namespace lossid::ml
