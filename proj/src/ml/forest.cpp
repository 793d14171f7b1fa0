#include "lossid/ml/forest.hpp"

#include <cmath>
#include <numeric>

#include "lossid/parallel.hpp"
#include "lossid/util.hpp"

namespace lossid::ml {

namespace {

int resolve_mtry(const std::string& spec, int d) {
    int mtry;
    if (spec == "sqrt")
        mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
    else if (spec == "all")
        mtry = d;
    else
        mtry = static_cast<int>(parse_int(spec, "features_per_split"));
    if (mtry < 1) throw ConfigError("features_per_split must be >= 1");
    if (mtry > d)
        throw ConfigError("features_per_split " + std::to_string(mtry) + " exceeds the " +
                          std::to_string(d) + " active features");
    return mtry;
}

}  // namespace

std::array<double, sim::kNumClasses> RandomForestModel::scores(const std::vector<double>& x) const {
    check_input(x);
    std::array<double, sim::kNumClasses> votes{};
    for (const auto& tree : trees_) {
        const auto& dist = tree.nodes[static_cast<std::size_t>(tree.leaf_for(x.data()))].dist;
        int best = 0;
        for (int c = 1; c < sim::kNumClasses; ++c)
            if (dist[static_cast<std::size_t>(c)] > dist[static_cast<std::size_t>(best)]) best = c;
        votes[static_cast<std::size_t>(best)] += 1.0;
    }
    for (auto& v : votes) v /= static_cast<double>(trees_.size());
    return votes;
}

nlohmann::json RandomForestModel::params_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    return {{"trees", std::move(trees)}};
}

std::unique_ptr<RandomForestModel> RandomForestModel::from_json(const nlohmann::json& params,
                                                                std::vector<std::string> schema,
                                                                TrainMeta meta) {
    std::vector<Tree> trees;
    for (const auto& t : params.at("trees")) trees.push_back(Tree::from_json(t));
    if (trees.empty()) throw SchemaError("forest with no trees");
    return std::make_unique<RandomForestModel>(std::move(trees), std::move(schema),
                                               std::move(meta));
}

std::unique_ptr<RandomForestModel> train_random_forest(const Dataset& ds,
                                                       const std::vector<int>& rows,
                                                       const HyperParams& hp,
                                                       std::uint64_t seed) {
    if (hp.n_trees < 1) throw ConfigError("n_trees must be >= 1");
    const TrainView view = make_view(ds, rows, hp.class_weight);
    const int mtry = resolve_mtry(hp.features_per_split, view.d);

    std::vector<Tree> trees(static_cast<std::size_t>(hp.n_trees));
    parallel_for(static_cast<std::size_t>(hp.n_trees), [&](std::size_t t) {
        Rng rng(derive_seed(seed, t));
        std::vector<int> sample;
        if (hp.bootstrap) {
            sample.reserve(static_cast<std::size_t>(view.n));
            for (int i = 0; i < view.n; ++i)
                sample.push_back(static_cast<int>(rng.uniform_int(view.n)));
        } else {
            sample.resize(static_cast<std::size_t>(view.n));
            std::iota(sample.begin(), sample.end(), 0);
        }
        trees[t] = build_classification_tree(view, sample, hp, mtry, &rng);
    });

    TrainMeta meta{seed, hp, ds.fingerprint()};
    return std::make_unique<RandomForestModel>(std::move(trees), ds.active_names(),
                                               std::move(meta));
}

}  // namespace lossid::ml
