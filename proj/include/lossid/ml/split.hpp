#pragma once

#include <cstdint>
#include <vector>

#include "lossid/feat/dataset.hpp"

namespace lossid::ml {

struct SplitIndices {
    std::vector<int> train_rows;
    std::vector<int> test_rows;
    std::uint64_t seed = 0;
};

// Per-class shuffle and cut: each class contributes round(fraction * n_c)
// training rows, clamped so both sides keep at least one. Classes with a
// single row are unsplittable and rejected. Index lists come back sorted.
SplitIndices stratified_split(const feat::Dataset& ds, double train_fraction, std::uint64_t seed);

// First rows train, last rows test; for sensitivity checks against temporal
// leakage. No per-class guarantees.
SplitIndices time_ordered_split(const feat::Dataset& ds, double train_fraction);

// Partition `rows` into `folds` stratified folds (round-robin per class
// after a seeded shuffle). Every fold holds at least one row of every class
// present in `rows`, or the fold construction fails.
std::vector<std::vector<int>> stratified_folds(const feat::Dataset& ds,
                                               const std::vector<int>& rows, int folds,
                                               std::uint64_t seed);

}  // namespace lossid::ml
