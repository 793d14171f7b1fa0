#include "lossid/ml/split.hpp"

#include <algorithm>
#include <cmath>

#include "lossid/errors.hpp"
#include "lossid/rng.hpp"

namespace lossid::ml {

namespace {

// Stream tags for seed derivation, so split and fold shuffles never share a
// sequence with other consumers of the same master seed.
constexpr std::uint64_t kSplitStream = 0x5197;
constexpr std::uint64_t kFoldStream = 0xf01d;

std::array<std::vector<int>, sim::kNumClasses> group_by_class(const feat::Dataset& ds,
                                                              const std::vector<int>& rows) {
    std::array<std::vector<int>, sim::kNumClasses> groups;
    for (int r : rows)
        groups[static_cast<std::size_t>(ds.rows[static_cast<std::size_t>(r)].label)].push_back(r);
    return groups;
}

int clamp_train_count(double fraction, int n) {
    const int want = static_cast<int>(std::llround(fraction * n));
    return std::clamp(want, 1, n - 1);
}

}  // namespace

SplitIndices stratified_split(const feat::Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (ds.rows.empty()) throw ConfigError("cannot split an empty dataset");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must be in (0,1)");
    std::vector<int> all(ds.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    auto groups = group_by_class(ds, all);

    Rng rng(derive_seed(seed, kSplitStream));
    SplitIndices out;
    out.seed = seed;
    for (int c = 0; c < sim::kNumClasses; ++c) {
        auto& group = groups[static_cast<std::size_t>(c)];
        if (group.empty()) continue;
        if (group.size() == 1)
            throw ConfigError(std::string("unsplittable class: ") +
                              sim::label_name(static_cast<sim::LossLabel>(c)) +
                              " has a single row");
        rng.shuffle(group);
        const int n_train = clamp_train_count(train_fraction, static_cast<int>(group.size()));
        out.train_rows.insert(out.train_rows.end(), group.begin(), group.begin() + n_train);
        out.test_rows.insert(out.test_rows.end(), group.begin() + n_train, group.end());
    }
    std::sort(out.train_rows.begin(), out.train_rows.end());
    std::sort(out.test_rows.begin(), out.test_rows.end());
    return out;
}

SplitIndices time_ordered_split(const feat::Dataset& ds, double train_fraction) {
    const int n = static_cast<int>(ds.rows.size());
    if (n < 2) throw ConfigError("cannot split a dataset with fewer than 2 rows");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must be in (0,1)");
    const int n_train = clamp_train_count(train_fraction, n);
    SplitIndices out;
    for (int i = 0; i < n; ++i) (i < n_train ? out.train_rows : out.test_rows).push_back(i);
    return out;
}

std::vector<std::vector<int>> stratified_folds(const feat::Dataset& ds,
                                               const std::vector<int>& rows, int folds,
                                               std::uint64_t seed) {
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (rows.empty()) throw ConfigError("cannot fold an empty row set");
    auto groups = group_by_class(ds, rows);

    Rng rng(derive_seed(seed, kFoldStream));
    std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
    for (int c = 0; c < sim::kNumClasses; ++c) {
        auto& group = groups[static_cast<std::size_t>(c)];
        if (group.empty()) continue;
        if (static_cast<int>(group.size()) < folds)
            throw ConfigError(std::string("class ") +
                              sim::label_name(static_cast<sim::LossLabel>(c)) + " has " +
                              std::to_string(group.size()) + " rows but " +
                              std::to_string(folds) + " folds were requested; use fewer folds");
        rng.shuffle(group);
        for (std::size_t i = 0; i < group.size(); ++i)
            out[i % static_cast<std::size_t>(folds)].push_back(group[i]);
    }
    for (auto& fold : out) std::sort(fold.begin(), fold.end());
    return out;
}

}  // namespace lossid::ml
