#include "lossid/ml/grid.hpp"

#include <algorithm>
#include <fstream>

#include "lossid/parallel.hpp"
#include "lossid/rng.hpp"
#include "lossid/util.hpp"

namespace lossid::ml {

namespace {

constexpr std::uint64_t kFoldSeedStream = 0xcf;

struct FoldScore {
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

FoldScore score_fold(const TrainedModel& model, const Dataset& ds, const std::vector<int>& test) {
    const auto cols = ds.active_indices();
    std::array<std::array<std::int64_t, sim::kNumClasses>, sim::kNumClasses> cm{};
    std::vector<double> x(cols.size());
    for (int r : test) {
        const auto& row = ds.rows[static_cast<std::size_t>(r)];
        for (std::size_t j = 0; j < cols.size(); ++j)
            x[j] = row.x[static_cast<std::size_t>(cols[j])];
        const int pred = static_cast<int>(model.predict(x));
        ++cm[static_cast<std::size_t>(row.label)][static_cast<std::size_t>(pred)];
    }
    FoldScore s;
    for (int c = 0; c < sim::kNumClasses; ++c) {
        std::int64_t actual = 0, predicted = 0;
        for (int o = 0; o < sim::kNumClasses; ++o) {
            actual += cm[static_cast<std::size_t>(c)][static_cast<std::size_t>(o)];
            predicted += cm[static_cast<std::size_t>(o)][static_cast<std::size_t>(c)];
        }
        const auto tp = cm[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        const double recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
        const double precision =
            predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        s.macro_recall += recall / sim::kNumClasses;
        s.macro_f1 += f1 / sim::kNumClasses;
    }
    return s;
}

}  // namespace

GridResult grid_search(ModelKind kind, const std::vector<HyperParams>& grid, const Dataset& ds,
                       const SplitIndices& split, int folds, std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("empty hyperparameter grid");
    const auto fold_sets = stratified_folds(ds, split.train_rows, folds,
                                            derive_seed(seed, kFoldSeedStream));

    // Train rows for each held-out fold, shared across grid points.
    std::vector<std::vector<int>> fold_train(fold_sets.size());
    for (std::size_t f = 0; f < fold_sets.size(); ++f) {
        for (std::size_t o = 0; o < fold_sets.size(); ++o)
            if (o != f)
                fold_train[f].insert(fold_train[f].end(), fold_sets[o].begin(),
                                     fold_sets[o].end());
        std::sort(fold_train[f].begin(), fold_train[f].end());
    }

    const std::size_t n_tasks = grid.size() * fold_sets.size();
    std::vector<FoldScore> scores(n_tasks);
    parallel_for(n_tasks, [&](std::size_t i) {
        const std::size_t g = i / fold_sets.size();
        const std::size_t f = i % fold_sets.size();
        // Seed by fold only: every grid point sees identical randomness, so
        // duplicate entries tie exactly and the size tie-break is meaningful.
        const auto model = train_model(kind, ds, fold_train[f], grid[g], derive_seed(seed, f));
        scores[i] = score_fold(*model, ds, fold_sets[f]);
    });

    GridResult result;
    result.table.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CvCell cell;
        cell.hp = grid[g];
        for (std::size_t f = 0; f < fold_sets.size(); ++f) {
            const FoldScore& s = scores[g * fold_sets.size() + f];
            cell.fold_macro_recall.push_back(s.macro_recall);
            cell.mean_macro_recall += s.macro_recall;
            cell.mean_macro_f1 += s.macro_f1;
        }
        cell.mean_macro_recall /= static_cast<double>(fold_sets.size());
        cell.mean_macro_f1 /= static_cast<double>(fold_sets.size());
        result.table.push_back(std::move(cell));
    }

    int best = 0;
    for (int g = 1; g < static_cast<int>(result.table.size()); ++g) {
        const auto& cand = result.table[static_cast<std::size_t>(g)];
        const auto& cur = result.table[static_cast<std::size_t>(best)];
        if (cand.mean_macro_recall > cur.mean_macro_recall) {
            best = g;
        } else if (cand.mean_macro_recall == cur.mean_macro_recall &&
                   model_size_key(kind, cand.hp) < model_size_key(kind, cur.hp)) {
            best = g;  // equal score: prefer the smaller model, else keep grid order
        }
    }
    result.best_index = best;
    result.best = result.table[static_cast<std::size_t>(best)].hp;
    return result;
}

std::vector<HyperParams> default_grid(ModelKind kind) {
    std::vector<HyperParams> grid;
    HyperParams hp;
    switch (kind) {
        case ModelKind::DecisionTree:
            for (int depth : {4, 8, 16, -1}) {
                hp.max_depth = depth;
                grid.push_back(hp);
            }
            break;
        case ModelKind::RandomForest:
            for (int trees : {25, 50, 100})
                for (const char* fps : {"sqrt", "all"}) {
                    hp.n_trees = trees;
                    hp.features_per_split = fps;
                    grid.push_back(hp);
                }
            break;
        case ModelKind::GradientBoosting:
            for (int stages : {50, 100})
                for (double lr : {0.1, 0.3})
                    for (int depth : {2, 3}) {
                        hp.n_stages = stages;
                        hp.learning_rate = lr;
                        hp.max_depth = depth;
                        grid.push_back(hp);
                    }
            break;
        case ModelKind::LogisticRegression:
            for (double lr : {0.01, 0.1})
                for (int iters : {200, 1000})
                    for (double l2 : {0.0, 0.01}) {
                        hp.learning_rate = lr;
                        hp.iterations = iters;
                        hp.l2 = l2;
                        grid.push_back(hp);
                    }
            break;
        case ModelKind::KNearestNeighbor:
            for (int k : {1, 3, 5, 9, 15}) {
                hp.k = k;
                grid.push_back(hp);
            }
            break;
    }
    return grid;
}

void save_cv_table_csv(const GridResult& result, ModelKind kind, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "index,selected,mean_macro_recall,mean_macro_f1,fold_macro_recalls,params\n";
    for (std::size_t g = 0; g < result.table.size(); ++g) {
        const auto& cell = result.table[g];
        out << g << ',' << (static_cast<int>(g) == result.best_index ? 1 : 0) << ','
            << fmt_double(cell.mean_macro_recall) << ',' << fmt_double(cell.mean_macro_f1) << ',';
        for (std::size_t f = 0; f < cell.fold_macro_recall.size(); ++f)
            out << (f ? ";" : "") << fmt_double(cell.fold_macro_recall[f]);
        out << ',' << cell.hp.describe(kind) << '\n';
    }
    if (!out.flush()) throw ParseError("write failed: " + path);
}

}  // namespace lossid::ml
