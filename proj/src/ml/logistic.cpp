#include "lossid/ml/logistic.hpp"

#include <cmath>

namespace lossid::ml {

namespace {

void softmax3(const double* f, double* p) {
    const double m = std::max(f[0], std::max(f[1], f[2]));
    double sum = 0.0;
    for (int c = 0; c < sim::kNumClasses; ++c) {
        p[c] = std::exp(f[c] - m);
        sum += p[c];
    }
    for (int c = 0; c < sim::kNumClasses; ++c) p[c] /= sum;
}

}  // namespace

double lr_objective(const TrainView& view,
                    const std::vector<std::array<double, sim::kNumClasses>>& weights,
                    const std::array<double, sim::kNumClasses>& bias, double l2,
                    std::vector<std::array<double, sim::kNumClasses>>* grad_weights,
                    std::array<double, sim::kNumClasses>* grad_bias) {
    const std::size_t d = weights.size();
    if (grad_weights) grad_weights->assign(d, {});
    if (grad_bias) grad_bias->fill(0.0);

    double total_w = 0.0, loss = 0.0;
    double f[sim::kNumClasses], p[sim::kNumClasses];
    for (int i = 0; i < view.n; ++i) {
        const double* x = view.row(i);
        const double w = view.w[static_cast<std::size_t>(i)];
        for (int c = 0; c < sim::kNumClasses; ++c) f[c] = bias[static_cast<std::size_t>(c)];
        for (std::size_t j = 0; j < d; ++j)
            for (int c = 0; c < sim::kNumClasses; ++c) f[c] += x[j] * weights[j][static_cast<std::size_t>(c)];
        softmax3(f, p);
        loss -= w * std::log(std::max(p[view.y[static_cast<std::size_t>(i)]], 1e-300));
        total_w += w;
        if (grad_weights) {
            for (int c = 0; c < sim::kNumClasses; ++c) {
                const double err = w * (p[c] - (view.y[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0));
                (*grad_bias)[static_cast<std::size_t>(c)] += err;
                for (std::size_t j = 0; j < d; ++j) (*grad_weights)[j][static_cast<std::size_t>(c)] += err * x[j];
            }
        }
    }

    loss /= total_w;
    double reg = 0.0;
    for (const auto& col : weights)
        for (double v : col) reg += v * v;
    loss += 0.5 * l2 * reg;  // bias excluded from regularization

    if (grad_weights) {
        for (std::size_t j = 0; j < d; ++j)
            for (int c = 0; c < sim::kNumClasses; ++c) {
                (*grad_weights)[j][static_cast<std::size_t>(c)] /= total_w;
                (*grad_weights)[j][static_cast<std::size_t>(c)] += l2 * weights[j][static_cast<std::size_t>(c)];
            }
        for (auto& g : *grad_bias) g /= total_w;
    }
    return loss;
}

std::array<double, sim::kNumClasses> LogisticRegressionModel::scores(
    const std::vector<double>& x) const {
    check_input(x);
    double f[sim::kNumClasses];
    for (int c = 0; c < sim::kNumClasses; ++c) f[c] = bias_[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        const double z = (x[j] - mean_[j]) / stdev_[j];
        for (int c = 0; c < sim::kNumClasses; ++c) f[c] += z * weights_[j][static_cast<std::size_t>(c)];
    }
    std::array<double, sim::kNumClasses> p{};
    softmax3(f, p.data());
    return p;
}

nlohmann::json LogisticRegressionModel::params_json() const {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& col : weights_) w.push_back({col[0], col[1], col[2]});
    return {{"weights", std::move(w)},
            {"bias", {bias_[0], bias_[1], bias_[2]}},
            {"mean", mean_},
            {"stdev", stdev_},
            {"train_loss", train_loss_}};
}

std::unique_ptr<LogisticRegressionModel> LogisticRegressionModel::from_json(
    const nlohmann::json& params, std::vector<std::string> schema, TrainMeta meta) {
    std::vector<std::array<double, sim::kNumClasses>> weights;
    for (const auto& col : params.at("weights")) {
        std::array<double, sim::kNumClasses> c{};
        for (int k = 0; k < sim::kNumClasses; ++k) c[static_cast<std::size_t>(k)] = col.at(static_cast<std::size_t>(k)).get<double>();
        weights.push_back(c);
    }
    std::array<double, sim::kNumClasses> bias{};
    for (int k = 0; k < sim::kNumClasses; ++k)
        bias[static_cast<std::size_t>(k)] = params.at("bias").at(static_cast<std::size_t>(k)).get<double>();
    return std::make_unique<LogisticRegressionModel>(
        std::move(weights), bias, params.at("mean").get<std::vector<double>>(),
        params.at("stdev").get<std::vector<double>>(),
        params.value("train_loss", std::vector<double>{}), std::move(schema), std::move(meta));
}

std::unique_ptr<LogisticRegressionModel> train_logistic_regression(const Dataset& ds,
                                                                   const std::vector<int>& rows,
                                                                   const HyperParams& hp,
                                                                   std::uint64_t seed) {
    if (hp.iterations < 1) throw ConfigError("iterations must be >= 1");
    if (hp.learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (hp.l2 < 0.0) throw ConfigError("l2 must be >= 0");
    TrainView view = make_view(ds, rows, hp.class_weight);
    const std::size_t d = static_cast<std::size_t>(view.d);

    // Standardize in place with training statistics; constant columns map to 0.
    std::vector<double> mean(d, 0.0), stdev(d, 0.0);
    for (int i = 0; i < view.n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += view.row(i)[j];
    for (std::size_t j = 0; j < d; ++j) mean[j] /= view.n;
    for (int i = 0; i < view.n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = view.row(i)[j] - mean[j];
            stdev[j] += dv * dv;
        }
    for (std::size_t j = 0; j < d; ++j) {
        stdev[j] = std::sqrt(stdev[j] / view.n);
        if (stdev[j] == 0.0) stdev[j] = 1.0;
    }
    for (int i = 0; i < view.n; ++i) {
        double* x = view.x.data() + static_cast<std::size_t>(i) * d;
        for (std::size_t j = 0; j < d; ++j) x[j] = (x[j] - mean[j]) / stdev[j];
    }

    std::vector<std::array<double, sim::kNumClasses>> w(d, std::array<double, sim::kNumClasses>{});
    std::array<double, sim::kNumClasses> b{};
    std::vector<std::array<double, sim::kNumClasses>> gw;
    std::array<double, sim::kNumClasses> gb{};
    std::vector<double> train_loss;
    train_loss.reserve(static_cast<std::size_t>(hp.iterations) + 1);

    for (int t = 1; t <= hp.iterations; ++t) {
        const double loss = lr_objective(view, w, b, hp.l2, &gw, &gb);
        if (!std::isfinite(loss))
            throw DivergenceError("logistic regression diverged at iteration " +
                                  std::to_string(t) + "; reduce the learning rate");
        train_loss.push_back(loss);
        for (std::size_t j = 0; j < d; ++j)
            for (int c = 0; c < sim::kNumClasses; ++c)
                w[j][static_cast<std::size_t>(c)] -= hp.learning_rate * gw[j][static_cast<std::size_t>(c)];
        for (int c = 0; c < sim::kNumClasses; ++c)
            b[static_cast<std::size_t>(c)] -= hp.learning_rate * gb[static_cast<std::size_t>(c)];
    }
    const double final_loss = lr_objective(view, w, b, hp.l2, nullptr, nullptr);
    if (!std::isfinite(final_loss))
        throw DivergenceError("logistic regression diverged at iteration " +
                              std::to_string(hp.iterations) + "; reduce the learning rate");
    train_loss.push_back(final_loss);

    TrainMeta meta{seed, hp, ds.fingerprint()};
    return std::make_unique<LogisticRegressionModel>(std::move(w), b, std::move(mean),
                                                     std::move(stdev), std::move(train_loss),
                                                     ds.active_names(), std::move(meta));
}

}  // namespace lossid::ml
