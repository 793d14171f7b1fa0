#include "lossid/ml/boosting.hpp"

#include <cmath>
#include <numeric>

namespace lossid::ml {

namespace {

constexpr double kClasses = static_cast<double>(sim::kNumClasses);

// Friedman's multiclass leaf step: (K-1)/K * sum(w r) / sum(w |r|(1-|r|)).
double friedman_leaf(const std::vector<int>& rows, const TrainView& view,
                     const std::vector<double>& residual) {
    double num = 0.0, den = 0.0;
    for (int r : rows) {
        const double w = view.w[static_cast<std::size_t>(r)];
        const double res = residual[static_cast<std::size_t>(r)];
        num += w * res;
        den += w * std::abs(res) * (1.0 - std::abs(res));
    }
    if (den < 1e-150) return 0.0;
    return (kClasses - 1.0) / kClasses * num / den;
}

void softmax_row(const double* f, double* p) {
    double m = f[0];
    for (int c = 1; c < sim::kNumClasses; ++c) m = std::max(m, f[c]);
    double sum = 0.0;
    for (int c = 0; c < sim::kNumClasses; ++c) {
        p[c] = std::exp(f[c] - m);
        sum += p[c];
    }
    for (int c = 0; c < sim::kNumClasses; ++c) p[c] /= sum;
}

}  // namespace

std::array<double, sim::kNumClasses> GradientBoostingModel::scores(
    const std::vector<double>& x) const {
    check_input(x);
    std::array<double, sim::kNumClasses> f = init_score_;
    const double lr = meta_.hp.learning_rate;
    for (const auto& stage : stages_)
        for (int c = 0; c < sim::kNumClasses; ++c) {
            const Tree& t = stage[static_cast<std::size_t>(c)];
            f[static_cast<std::size_t>(c)] +=
                lr * t.nodes[static_cast<std::size_t>(t.leaf_for(x.data()))].value;
        }
    std::array<double, sim::kNumClasses> p{};
    softmax_row(f.data(), p.data());
    return p;
}

nlohmann::json GradientBoostingModel::params_json() const {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& stage : stages_) {
        nlohmann::json trio = nlohmann::json::array();
        for (const auto& t : stage) trio.push_back(t.to_json());
        stages.push_back(std::move(trio));
    }
    return {{"init_score", {init_score_[0], init_score_[1], init_score_[2]}},
            {"stages", std::move(stages)},
            {"train_loss", train_loss_}};
}

std::unique_ptr<GradientBoostingModel> GradientBoostingModel::from_json(
    const nlohmann::json& params, std::vector<std::string> schema, TrainMeta meta) {
    std::array<double, sim::kNumClasses> init{};
    for (int c = 0; c < sim::kNumClasses; ++c)
        init[static_cast<std::size_t>(c)] = params.at("init_score").at(static_cast<std::size_t>(c)).get<double>();
    std::vector<std::array<Tree, sim::kNumClasses>> stages;
    for (const auto& stage : params.at("stages")) {
        std::array<Tree, sim::kNumClasses> trio;
        for (int c = 0; c < sim::kNumClasses; ++c)
            trio[static_cast<std::size_t>(c)] = Tree::from_json(stage.at(static_cast<std::size_t>(c)));
        stages.push_back(std::move(trio));
    }
    auto loss = params.value("train_loss", std::vector<double>{});
    return std::make_unique<GradientBoostingModel>(init, std::move(stages), std::move(loss),
                                                   std::move(schema), std::move(meta));
}

std::unique_ptr<GradientBoostingModel> train_gradient_boosting(const Dataset& ds,
                                                               const std::vector<int>& rows,
                                                               const HyperParams& hp,
                                                               std::uint64_t seed) {
    if (hp.n_stages < 1) throw ConfigError("n_stages must be >= 1");
    if (hp.learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
    const TrainView view = make_view(ds, rows, hp.class_weight);
    const std::size_t n = static_cast<std::size_t>(view.n);

    double total_w = 0.0;
    std::array<double, sim::kNumClasses> class_w{};
    for (std::size_t i = 0; i < n; ++i) {
        class_w[static_cast<std::size_t>(view.y[i])] += view.w[i];
        total_w += view.w[i];
    }
    std::array<double, sim::kNumClasses> init{};
    for (int c = 0; c < sim::kNumClasses; ++c)
        init[static_cast<std::size_t>(c)] =
            std::log(std::max(class_w[static_cast<std::size_t>(c)] / total_w, 1e-12));

    std::vector<double> f(n * sim::kNumClasses);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < sim::kNumClasses; ++c)
            f[i * sim::kNumClasses + static_cast<std::size_t>(c)] = init[static_cast<std::size_t>(c)];

    std::vector<double> p(n * sim::kNumClasses);
    auto mean_log_loss = [&] {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = p[i * sim::kNumClasses + static_cast<std::size_t>(view.y[i])];
            loss -= view.w[i] * std::log(std::max(pi, 1e-300));
        }
        return loss / total_w;
    };
    auto refresh_p = [&] {
        for (std::size_t i = 0; i < n; ++i)
            softmax_row(&f[i * sim::kNumClasses], &p[i * sim::kNumClasses]);
    };

    refresh_p();
    std::vector<double> train_loss;
    train_loss.reserve(static_cast<std::size_t>(hp.n_stages) + 1);
    train_loss.push_back(mean_log_loss());

    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> residual(n);
    RegressionTarget target{&residual, &friedman_leaf};

    std::vector<std::array<Tree, sim::kNumClasses>> stages;
    stages.reserve(static_cast<std::size_t>(hp.n_stages));
    for (int s = 0; s < hp.n_stages; ++s) {
        std::array<Tree, sim::kNumClasses> trio;
        for (int c = 0; c < sim::kNumClasses; ++c) {
            for (std::size_t i = 0; i < n; ++i)
                residual[i] = (view.y[i] == c ? 1.0 : 0.0) -
                              p[i * sim::kNumClasses + static_cast<std::size_t>(c)];
            Tree tree =
                build_regression_tree(view, all, hp.max_depth, hp.min_samples_leaf, target);
            for (std::size_t i = 0; i < n; ++i)
                f[i * sim::kNumClasses + static_cast<std::size_t>(c)] +=
                    hp.learning_rate *
                    tree.nodes[static_cast<std::size_t>(tree.leaf_for(view.row(static_cast<int>(i))))].value;
            trio[static_cast<std::size_t>(c)] = std::move(tree);
        }
        refresh_p();
        train_loss.push_back(mean_log_loss());
        stages.push_back(std::move(trio));
    }

    TrainMeta meta{seed, hp, ds.fingerprint()};
    return std::make_unique<GradientBoostingModel>(init, std::move(stages), std::move(train_loss),
                                                   ds.active_names(), std::move(meta));
}

}  // namespace lossid::ml
