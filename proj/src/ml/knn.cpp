#include "lossid/ml/knn.hpp"

#include <algorithm>
#include <cmath>

namespace lossid::ml {

namespace {

double sq_euclidean(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

double manhattan(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += std::abs(a[j] - b[j]);
    return s;
}

}  // namespace

std::vector<int> KnnModel::neighbors(const std::vector<double>& x) const {
    const std::size_t d = schema_.size();
    const std::size_t n = labels_.size();
    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) z[j] = (x[j] - mean_[j]) / stdev_[j];

    const bool euclid = meta_.hp.metric == "euclidean";
    std::vector<std::pair<double, int>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = rows_.data() + i * d;
        dist[i] = {euclid ? sq_euclidean(z.data(), row, d) : manhattan(z.data(), row, d),
                   static_cast<int>(i)};
    }
    const std::size_t k = static_cast<std::size_t>(meta_.hp.k);
    // (distance, stored index) is a total order, so the k-set is unique.
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    dist.resize(k);
    std::sort(dist.begin(), dist.end());
    std::vector<int> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

LossLabel KnnModel::predict(const std::vector<double>& x) const {
    check_input(x);
    const auto nbrs = neighbors(x);
    std::array<double, sim::kNumClasses> votes{};
    for (int idx : nbrs) votes[static_cast<std::size_t>(labels_[static_cast<std::size_t>(idx)])] += 1.0;
    double best = *std::max_element(votes.begin(), votes.end());
    int tied = 0;
    for (double v : votes) tied += v == best;
    if (tied == 1)
        return static_cast<LossLabel>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    // Vote tie: the nearest neighbor carrying one of the tied labels decides.
    for (int idx : nbrs) {
        const int label = labels_[static_cast<std::size_t>(idx)];
        if (votes[static_cast<std::size_t>(label)] == best) return static_cast<LossLabel>(label);
    }
    return static_cast<LossLabel>(0);  // unreachable
}

std::array<double, sim::kNumClasses> KnnModel::scores(const std::vector<double>& x) const {
    check_input(x);
    const auto nbrs = neighbors(x);
    std::array<double, sim::kNumClasses> votes{};
    for (int idx : nbrs) votes[static_cast<std::size_t>(labels_[static_cast<std::size_t>(idx)])] += 1.0;
    for (auto& v : votes) v /= static_cast<double>(nbrs.size());
    return votes;
}

nlohmann::json KnnModel::params_json() const {
    return {{"rows", rows_}, {"labels", labels_}, {"mean", mean_}, {"stdev", stdev_}};
}

std::unique_ptr<KnnModel> KnnModel::from_json(const nlohmann::json& params,
                                              std::vector<std::string> schema, TrainMeta meta) {
    auto rows = params.at("rows").get<std::vector<double>>();
    auto labels = params.at("labels").get<std::vector<int>>();
    if (labels.empty() || rows.size() != labels.size() * schema.size())
        throw SchemaError("knn row/label sizes do not match the schema");
    return std::make_unique<KnnModel>(std::move(rows), std::move(labels),
                                      params.at("mean").get<std::vector<double>>(),
                                      params.at("stdev").get<std::vector<double>>(),
                                      std::move(schema), std::move(meta));
}

std::unique_ptr<KnnModel> train_knn(const Dataset& ds, const std::vector<int>& rows,
                                    const HyperParams& hp, std::uint64_t seed) {
    if (hp.k < 1) throw ConfigError("k must be >= 1");
    if (static_cast<std::size_t>(hp.k) > rows.size())
        throw ConfigError("k = " + std::to_string(hp.k) + " exceeds the " +
                          std::to_string(rows.size()) + " training rows");
    if (hp.metric != "euclidean" && hp.metric != "manhattan")
        throw ConfigError("unknown distance metric: " + hp.metric);
    TrainView view = make_view(ds, rows, "none");
    const std::size_t d = static_cast<std::size_t>(view.d);

    std::vector<double> mean(d, 0.0), stdev(d, 1.0);
    if (hp.scale) {
        std::fill(stdev.begin(), stdev.end(), 0.0);
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
    }

    TrainMeta meta{seed, hp, ds.fingerprint()};
    return std::make_unique<KnnModel>(std::move(view.x), std::move(view.y), std::move(mean),
                                      std::move(stdev), ds.active_names(), std::move(meta));
}

}  // namespace lossid::ml
