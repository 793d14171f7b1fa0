#include "lossid/eval/ablation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "lossid/parallel.hpp"
#include "lossid/rng.hpp"
#include "lossid/util.hpp"

namespace lossid::eval {

namespace {

int require_feature(const char* name) {
    const int idx = feat::feature_index(name);
    if (idx < 0) throw SchemaError(std::string("unknown feature: ") + name);
    return idx;
}

}  // namespace

std::vector<FeatureRemoval> standard_removals() {
    const int jitter = require_feature("jitter_ms");
    const int rtt = require_feature("rtt_ms");
    const int avg_rtt = require_feature("avg_rtt_ms");
    const int cwnd = require_feature("cwnd_segments");
    return {
        {"Jitter", {jitter}},
        {"RTT", {rtt, avg_rtt}},  // the single RTT row covers both estimator columns
        {"cWnd", {cwnd}},
        {"Jitter & RTT", {jitter, rtt, avg_rtt}},
        {"cWnd, Jitter, RTT", {cwnd, jitter, rtt, avg_rtt}},
        {"All included", {}},
    };
}

FeatureRemoval removal_from_names(const std::string& row_name,
                                  const std::vector<std::string>& feature_names) {
    FeatureRemoval r;
    r.name = row_name;
    for (const auto& name : feature_names) r.removed.push_back(require_feature(name.c_str()));
    std::sort(r.removed.begin(), r.removed.end());
    r.removed.erase(std::unique(r.removed.begin(), r.removed.end()), r.removed.end());
    return r;
}

AblationReport run_ablation(const ml::Dataset& ds, const ml::SplitIndices& split,
                            const std::vector<ml::ModelKind>& kinds,
                            const std::vector<FeatureRemoval>& removals,
                            const AblationOptions& options) {
    if (kinds.empty()) throw ConfigError("ablation needs at least one model kind");
    if (removals.empty()) throw ConfigError("ablation needs at least one feature-removal row");
    const auto base_active = ds.active;
    for (const auto& removal : removals) {
        auto active = base_active;
        for (int idx : removal.removed) {
            if (!active[static_cast<std::size_t>(idx)])
                throw ConfigError("ablation row '" + removal.name + "' removes inactive feature " +
                                  feat::kFeatureNames[static_cast<std::size_t>(idx)]);
            active[static_cast<std::size_t>(idx)] = false;
        }
        if (!options.allow_empty_features &&
            std::none_of(active.begin(), active.end(), [](bool b) { return b; }))
            throw ConfigError("ablation row '" + removal.name +
                              "' removes every active feature; pass allow_empty_features to "
                              "run it anyway");
    }

    // Tune once per kind on the full feature set; every removal row reuses
    // those hyperparameters so rows stay comparable.
    std::vector<ml::HyperParams> tuned(kinds.size());
    std::vector<EvalReport> baselines(kinds.size());
    for (std::size_t m = 0; m < kinds.size(); ++m) {
        if (options.use_grid_search) {
            const auto grid = ml::default_grid(kinds[m]);
            const auto result = ml::grid_search(kinds[m], grid, ds, split, options.cv_folds,
                                                derive_seed(options.seed, m));
            tuned[m] = result.best;
        } else {
            tuned[m] = ml::recommended_params(kinds[m]);
        }
        const auto model =
            ml::train_model(kinds[m], ds, split.train_rows, tuned[m], derive_seed(options.seed, m));
        baselines[m] = evaluate(*model, ds, split);
    }

    AblationReport report;
    for (const auto& k : kinds) report.kinds.emplace_back(ml::kind_name(k));
    for (const auto& r : removals) report.row_names.push_back(r.name);
    report.baseline_reports = baselines;
    report.dataset_fingerprint = ds.fingerprint();
    report.seed = options.seed;
    report.cells.assign(removals.size(), std::vector<AblationCell>(kinds.size()));

    const std::size_t n_tasks = removals.size() * kinds.size();
    parallel_for(n_tasks, [&](std::size_t i) {
        const std::size_t row = i / kinds.size();
        const std::size_t m = i % kinds.size();
        if (removals[row].removed.empty()) {
            // The all-features row must equal the baseline evaluation exactly,
            // so reuse it rather than retraining.
            report.cells[row][m] = {baselines[m].macro_recall, baselines[m].macro_f1};
            return;
        }
        ml::Dataset masked = ds;
        for (int idx : removals[row].removed) masked.active[static_cast<std::size_t>(idx)] = false;
        const auto model = ml::train_model(kinds[m], masked, split.train_rows, tuned[m],
                                           derive_seed(options.seed, m));
        const EvalReport r = evaluate(*model, masked, split);
        report.cells[row][m] = {r.macro_recall, r.macro_f1};
    });
    return report;
}

std::string render_ablation(const AblationReport& report) {
    char buf[256];
    std::string out = "ablation: macro recall / macro F1 by removed features\n\n";
    std::snprintf(buf, sizeof buf, "%-22s", "features removed");
    out += buf;
    for (const auto& kind : report.kinds) {
        std::snprintf(buf, sizeof buf, " %6s  %-6s", kind.c_str(), "");
        out += buf;
    }
    out += '\n';
    std::snprintf(buf, sizeof buf, "%-22s", "");
    out += buf;
    for (std::size_t m = 0; m < report.kinds.size(); ++m) {
        std::snprintf(buf, sizeof buf, " %6s  %-6s", "recall", "F1");
        out += buf;
    }
    out += '\n';
    for (std::size_t row = 0; row < report.row_names.size(); ++row) {
        std::snprintf(buf, sizeof buf, "%-22s", report.row_names[row].c_str());
        out += buf;
        for (std::size_t m = 0; m < report.kinds.size(); ++m) {
            const AblationCell& cell = report.cells[row][m];
            std::snprintf(buf, sizeof buf, " %6.2f  %-6.2f", cell.macro_recall, cell.macro_f1);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

nlohmann::json AblationReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < row_names.size(); ++r) {
        nlohmann::json by_kind = nlohmann::json::object();
        for (std::size_t m = 0; m < kinds.size(); ++m)
            by_kind[kinds[m]] = {{"macro_recall", cells[r][m].macro_recall},
                                 {"macro_f1", cells[r][m].macro_f1}};
        rows.push_back({{"features_removed", row_names[r]}, {"models", std::move(by_kind)}});
    }
    nlohmann::json base = nlohmann::json::array();
    for (const auto& b : baseline_reports) base.push_back(b.to_json());
    return {{"rows", std::move(rows)},
            {"kinds", kinds},
            {"baseline_reports", std::move(base)},
            {"dataset_fingerprint", dataset_fingerprint},
            {"seed", seed}};
}

AblationReport AblationReport::from_json(const nlohmann::json& j) {
    AblationReport r;
    r.kinds = j.at("kinds").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
        r.row_names.push_back(row.at("features_removed").get<std::string>());
        std::vector<AblationCell> cells;
        for (const auto& kind : r.kinds) {
            const auto& cell = row.at("models").at(kind);
            cells.push_back(
                {cell.at("macro_recall").get<double>(), cell.at("macro_f1").get<double>()});
        }
        r.cells.push_back(std::move(cells));
    }
    for (const auto& b : j.at("baseline_reports"))
        r.baseline_reports.push_back(EvalReport::from_json(b));
    r.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
}

void save_ablation(const AblationReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << report.to_json().dump(2) << '\n';
    if (!out.flush()) throw ParseError("write failed: " + path);
}

void save_ablation_csv(const AblationReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "features_removed";
    for (const auto& kind : report.kinds) out << ',' << kind << "_macro_recall," << kind << "_macro_f1";
    out << '\n';
    for (std::size_t r = 0; r < report.row_names.size(); ++r) {
        out << '"' << report.row_names[r] << '"';
        for (std::size_t m = 0; m < report.kinds.size(); ++m)
            out << ',' << fmt_double(report.cells[r][m].macro_recall) << ','
                << fmt_double(report.cells[r][m].macro_f1);
        out << '\n';
    }
    if (!out.flush()) throw ParseError("write failed: " + path);
}

}  // namespace lossid::eval
