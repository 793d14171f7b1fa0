// lossid: simulate a lossy TCP path, extract per-packet features, train and
// evaluate loss-cause classifiers, and replay loss-reaction policies.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "lossid/errors.hpp"
#include "lossid/eval/ablation.hpp"
#include "lossid/eval/metrics.hpp"
#include "lossid/feat/dataset.hpp"
#include "lossid/ml/grid.hpp"
#include "lossid/parallel.hpp"
#include "lossid/rng.hpp"
#include "lossid/sim/simulator.hpp"
#include "lossid/util.hpp"

namespace {

using namespace lossid;

constexpr const char* kToolVersion = "0.1.0";

void log_line(const std::string& msg) { std::fprintf(stderr, "[lossid] %s\n", msg.c_str()); }

void require_writable(const std::string& path, bool force) {
    if (path.empty()) return;
    if (!force && std::filesystem::exists(path))
        throw ConfigError("output exists: " + path + " (use --force to overwrite)");
}

// Sidecar provenance record written next to every artifact-producing
// command's primary output. Outputs themselves stay byte-identical across
// reruns; the manifest carries the varying wall-clock field.
class Manifest {
public:
    Manifest(std::string command, std::uint64_t seed) : start_(std::chrono::steady_clock::now()) {
        doc_["command"] = std::move(command);
        doc_["tool_version"] = kToolVersion;
        doc_["seed"] = seed;
        doc_["inputs"] = nlohmann::json::object();
        doc_["outputs"] = nlohmann::json::object();
    }

    void add_input(const std::string& path) { doc_["inputs"][path] = digest_file(path); }
    void add_output(const std::string& path) { doc_["outputs"][path] = digest_file(path); }
    void set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }

    void write(const std::string& primary_output) {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        doc_["duration_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        const std::string path = primary_output + ".manifest.json";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ParseError("cannot open for writing: " + path);
        out << doc_.dump(2) << '\n';
        log_line("manifest " + path);
    }

private:
    nlohmann::json doc_;
    std::chrono::steady_clock::time_point start_;
};

sim::SimConfig resolve_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
    sim::SimConfig cfg =
        config_path.empty() ? sim::default_config() : sim::load_config(config_path);
    for (const auto& kv : overrides) sim::apply_override(cfg, kv);
    return cfg;
}

// Classifier adapter for model-discriminate replay arms.
struct ModelClassifier final : sim::LossClassifier {
    explicit ModelClassifier(std::unique_ptr<ml::TrainedModel> m) : model(std::move(m)) {}
    sim::LossLabel classify(const std::array<double, feat::kNumFeatures>& features) const override {
        return model->predict_row(features);
    }
    std::unique_ptr<ml::TrainedModel> model;
};

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string config_path, out_trace, throughput_csv, cwnd_csv;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> packets;
    std::optional<double> duration;
    bool force = false;
};

int cmd_simulate(const SimulateArgs& args) {
    sim::SimConfig cfg = resolve_config(args.config_path, args.overrides);
    if (args.seed) cfg.seed = *args.seed;
    if (args.packets) cfg.target_packets = *args.packets;
    if (args.duration) cfg.duration_s = *args.duration;
    cfg.validate();
    require_writable(args.out_trace, args.force);
    require_writable(args.throughput_csv, args.force);
    require_writable(args.cwnd_csv, args.force);

    Manifest manifest("simulate", cfg.seed);
    if (!args.config_path.empty()) manifest.add_input(args.config_path);
    manifest.set("resolved_config", nlohmann::json::parse(sim::config_to_json_text(cfg)));

    log_line("simulating " +
             (cfg.target_packets > 0 ? std::to_string(cfg.target_packets) + " packets"
                                     : fmt_double(cfg.duration_s) + " s") +
             " with seed " + std::to_string(cfg.seed));
    const sim::PacketTrace trace = sim::run_simulation(cfg);
    sim::save_trace(trace, args.out_trace);
    manifest.add_output(args.out_trace);
    if (!args.throughput_csv.empty()) {
        sim::save_series_csv(trace.throughput_series, "throughput_mbps", args.throughput_csv);
        manifest.add_output(args.throughput_csv);
    }
    if (!args.cwnd_csv.empty()) {
        sim::save_series_csv(trace.cwnd_series, "cwnd_segments", args.cwnd_csv);
        manifest.add_output(args.cwnd_csv);
    }

    const auto s = feat::class_summary_from_counts(trace.summary.total_packets,
                                                   trace.summary.qdrop_count,
                                                   trace.summary.wdrop_count);
    std::cout << feat::render_class_summary(s);
    manifest.write(args.out_trace);
    return kExitOk;
}

// --- extract ----------------------------------------------------------------

struct ExtractArgs {
    std::vector<std::string> trace_paths;
    std::string out_csv;
    int warmup = 1;
    bool force = false;
};

// Several --trace inputs pool into one dataset: per-trace extraction with the
// same warmup, rows concatenated in argument order.
int cmd_extract(const ExtractArgs& args) {
    require_writable(args.out_csv, args.force);
    Manifest manifest("extract", 0);
    manifest.set("warmup", args.warmup);

    feat::Dataset ds;
    for (const auto& path : args.trace_paths) {
        manifest.add_input(path);
        const sim::PacketTrace trace = sim::load_trace(path);
        feat::Dataset part = feat::extract_features(trace, args.warmup);
        ds.rows.insert(ds.rows.end(), part.rows.begin(), part.rows.end());
    }
    feat::save_dataset_csv(ds, args.out_csv);
    manifest.add_output(args.out_csv);
    manifest.set("dataset_fingerprint", ds.fingerprint());

    std::cout << feat::render_class_summary(feat::class_summary(ds));
    manifest.write(args.out_csv);
    return kExitOk;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
    std::string dataset_path, kind, out_model, cv_table, split_kind = "stratified";
    std::uint64_t seed = 1;
    int folds = 5;
    double train_fraction = 0.8;
    bool force = false;
    // explicit hyperparameters; any of them set skips the grid search
    std::optional<int> depth, min_leaf, trees, stages, iterations, k;
    std::optional<double> learning_rate, l2;
    std::optional<std::string> criterion, features_per_split, metric, class_weight;
    bool no_bootstrap = false, no_scale = false;
};

ml::SplitIndices make_split(const feat::Dataset& ds, const std::string& kind, double fraction,
                            std::uint64_t seed) {
    if (kind == "stratified") return ml::stratified_split(ds, fraction, seed);
    if (kind == "time-ordered") return ml::time_ordered_split(ds, fraction);
    throw ConfigError("unknown split kind: " + kind + " (expected stratified or time-ordered)");
}

int cmd_train(const TrainArgs& args) {
    ml::ModelKind kind;
    try {
        kind = ml::kind_from_name(args.kind);
    } catch (const ConfigError&) {
        throw ConfigError("unknown model kind '" + args.kind +
                          "'; valid kinds: dt, rf, gb, lr, knn");
    }
    require_writable(args.out_model, args.force);
    require_writable(args.cv_table, args.force);

    Manifest manifest("train", args.seed);
    manifest.add_input(args.dataset_path);
    const feat::Dataset ds = feat::load_dataset_csv(args.dataset_path);
    const auto split = make_split(ds, args.split_kind, args.train_fraction, args.seed);

    const bool explicit_params = args.depth || args.min_leaf || args.trees || args.stages ||
                                 args.iterations || args.k || args.learning_rate || args.l2 ||
                                 args.criterion || args.features_per_split || args.metric ||
                                 args.class_weight || args.no_bootstrap || args.no_scale;
    ml::HyperParams hp = ml::default_params(kind);
    if (explicit_params) {
        if (args.depth) hp.max_depth = *args.depth;
        if (args.min_leaf) hp.min_samples_leaf = *args.min_leaf;
        if (args.trees) hp.n_trees = *args.trees;
        if (args.stages) hp.n_stages = *args.stages;
        if (args.iterations) hp.iterations = *args.iterations;
        if (args.k) hp.k = *args.k;
        if (args.learning_rate) hp.learning_rate = *args.learning_rate;
        if (args.l2) hp.l2 = *args.l2;
        if (args.criterion) hp.criterion = *args.criterion;
        if (args.features_per_split) hp.features_per_split = *args.features_per_split;
        if (args.metric) hp.metric = *args.metric;
        if (args.class_weight) hp.class_weight = *args.class_weight;
        if (args.no_bootstrap) hp.bootstrap = false;
        if (args.no_scale) hp.scale = false;
        log_line("explicit hyperparameters, skipping grid search: " + hp.describe(kind));
    } else {
        log_line("grid search over " + std::to_string(ml::default_grid(kind).size()) +
                 " points, " + std::to_string(args.folds) + " folds");
        const auto result =
            ml::grid_search(kind, ml::default_grid(kind), ds, split, args.folds, args.seed);
        hp = result.best;
        log_line("selected " + hp.describe(kind) + " (mean macro recall " +
                 fmt_double(result.table[static_cast<std::size_t>(result.best_index)]
                                .mean_macro_recall) +
                 ")");
        if (!args.cv_table.empty()) {
            ml::save_cv_table_csv(result, kind, args.cv_table);
            manifest.add_output(args.cv_table);
        }
    }

    const auto model = ml::train_model(kind, ds, split.train_rows, hp, args.seed);
    ml::save_model(*model, args.out_model);
    manifest.add_output(args.out_model);
    manifest.set("hyperparameters", hp.to_json());
    manifest.set("dataset_fingerprint", ds.fingerprint());
    manifest.set("split", {{"kind", args.split_kind},
                           {"train_fraction", args.train_fraction},
                           {"train_rows", split.train_rows.size()},
                           {"test_rows", split.test_rows.size()}});
    manifest.write(args.out_model);
    return kExitOk;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string model_path, dataset_path, out_report, split_kind = "stratified";
    std::optional<std::uint64_t> split_seed;
    double train_fraction = 0.8;
    bool force = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
    require_writable(args.out_report, args.force);
    const auto model = ml::load_model(args.model_path);
    const feat::Dataset ds = feat::load_dataset_csv(args.dataset_path);
    const std::uint64_t seed = args.split_seed.value_or(model->train_meta().seed);

    Manifest manifest("evaluate", seed);
    manifest.add_input(args.model_path);
    manifest.add_input(args.dataset_path);

    const auto split = make_split(ds, args.split_kind, args.train_fraction, seed);
    const eval::EvalReport report = eval::evaluate(*model, ds, split);
    std::cout << eval::render_report(report);
    if (!args.out_report.empty()) {
        eval::save_report(report, args.out_report);
        manifest.add_output(args.out_report);
        manifest.write(args.out_report);
    }
    return kExitOk;
}

// --- ablate -----------------------------------------------------------------

struct AblateArgs {
    std::string dataset_path, models = "rf,knn,gb,lr,dt", out_report, out_csv;
    std::uint64_t seed = 1;
    int folds = 5;
    double train_fraction = 0.8;
    bool no_grid_search = false;
    bool force = false;
};

int cmd_ablate(const AblateArgs& args) {
    require_writable(args.out_report, args.force);
    require_writable(args.out_csv, args.force);
    Manifest manifest("ablate", args.seed);
    manifest.add_input(args.dataset_path);

    const feat::Dataset ds = feat::load_dataset_csv(args.dataset_path);
    std::vector<ml::ModelKind> kinds;
    for (const auto& name : split_csv_line(args.models))
        kinds.push_back(ml::kind_from_name(std::string(name)));

    const auto split = ml::stratified_split(ds, args.train_fraction, args.seed);
    eval::AblationOptions options;
    options.cv_folds = args.folds;
    options.use_grid_search = !args.no_grid_search;
    options.seed = args.seed;
    const auto report =
        eval::run_ablation(ds, split, kinds, eval::standard_removals(), options);

    std::cout << eval::render_ablation(report);
    if (!args.out_report.empty()) {
        eval::save_ablation(report, args.out_report);
        manifest.add_output(args.out_report);
    }
    if (!args.out_csv.empty()) {
        eval::save_ablation_csv(report, args.out_csv);
        manifest.add_output(args.out_csv);
    }
    if (!args.out_report.empty()) manifest.write(args.out_report);
    return kExitOk;
}

// --- replay-policy ----------------------------------------------------------

struct ReplayArgs {
    std::string config_path, policies = "always-reduce,oracle-discriminate", model_path, out_prefix;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    bool force = false;
};

int cmd_replay(const ReplayArgs& args) {
    sim::SimConfig cfg = resolve_config(args.config_path, args.overrides);
    if (args.seed) cfg.seed = *args.seed;

    std::vector<sim::LossReactionPolicy> policies;
    for (const auto& name : split_csv_line(args.policies)) {
        sim::LossReactionPolicy p;
        p.kind = sim::policy_from_name(std::string(name));
        if (p.kind == sim::PolicyKind::ModelDiscriminate) {
            if (args.model_path.empty())
                throw ConfigError("policy model-discriminate requires --model");
            p.model_path = args.model_path;
        }
        policies.push_back(p);
    }
    if (policies.empty()) throw ConfigError("no policies given");

    std::unique_ptr<ModelClassifier> classifier;
    if (!args.model_path.empty())
        classifier = std::make_unique<ModelClassifier>(ml::load_model(args.model_path));

    Manifest manifest("replay-policy", cfg.seed);
    if (!args.config_path.empty()) manifest.add_input(args.config_path);
    if (!args.model_path.empty()) manifest.add_input(args.model_path);
    manifest.set("resolved_config", nlohmann::json::parse(sim::config_to_json_text(cfg)));

    const auto outcomes = sim::replay_policy(cfg, policies, classifier.get());

    char buf[160];
    std::snprintf(buf, sizeof buf, "%-22s %12s %8s %12s %8s %8s %10s\n", "policy",
                  "throughput", "rtx", "loss_events", "qdrop", "wdrop", "end_s");
    std::cout << buf;
    std::int64_t total_loss_events = 0;
    for (const auto& o : outcomes) {
        std::snprintf(buf, sizeof buf, "%-22s %10.4f %10lld %12lld %8lld %8lld %10.2f\n",
                      o.policy.c_str(), o.mean_throughput_mbps,
                      static_cast<long long>(o.total_retransmissions),
                      static_cast<long long>(o.loss_events), static_cast<long long>(o.qdrop_count),
                      static_cast<long long>(o.wdrop_count), o.sim_end_s);
        std::cout << buf;
        total_loss_events += o.loss_events;
    }
    if (total_loss_events == 0) std::cout << "no loss events: policies behave identically\n";

    if (!args.out_prefix.empty()) {
        nlohmann::json summary = nlohmann::json::array();
        for (const auto& o : outcomes) {
            summary.push_back({{"policy", o.policy},
                               {"mean_throughput_mbps", o.mean_throughput_mbps},
                               {"total_retransmissions", o.total_retransmissions},
                               {"loss_events", o.loss_events},
                               {"qdrop_count", o.qdrop_count},
                               {"wdrop_count", o.wdrop_count},
                               {"sim_end_s", o.sim_end_s}});
            const std::string series_path = args.out_prefix + "." + o.policy + ".cwnd.csv";
            require_writable(series_path, args.force);
            sim::save_series_csv(o.cwnd_series, "cwnd_segments", series_path);
            manifest.add_output(series_path);
        }
        const std::string summary_path = args.out_prefix + ".summary.json";
        require_writable(summary_path, args.force);
        std::ofstream out(summary_path, std::ios::binary);
        if (!out) throw ParseError("cannot open for writing: " + summary_path);
        out << summary.dump(2) << '\n';
        out.flush();
        manifest.add_output(summary_path);
        manifest.write(summary_path);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TCP loss-cause simulation, classification, and policy replay"};
    app.require_subcommand(1);
    std::size_t jobs = 0;
    app.add_option("--jobs", jobs, "max worker threads (0: hardware concurrency)");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "run the flow simulation and write a trace");
    sim_cmd->add_option("--config", sim_args.config_path, "config file (JSON)");
    sim_cmd->add_option("--set", sim_args.overrides, "config override key=value (repeatable)");
    sim_cmd->add_option("--seed", sim_args.seed, "override config seed");
    sim_cmd->add_option("--packets", sim_args.packets, "override target packet count");
    sim_cmd->add_option("--duration", sim_args.duration, "override send duration (s)");
    sim_cmd->add_option("--out", sim_args.out_trace, "output trace path (.gz for gzip)")
        ->required();
    sim_cmd->add_option("--throughput-series", sim_args.throughput_csv, "throughput series CSV");
    sim_cmd->add_option("--cwnd-series", sim_args.cwnd_csv, "cwnd series CSV");
    sim_cmd->add_flag("--force", sim_args.force, "overwrite existing outputs");

    ExtractArgs ext_args;
    auto* ext_cmd = app.add_subcommand("extract", "extract the feature dataset from a trace");
    ext_cmd->add_option("--trace", ext_args.trace_paths,
                        "input trace (repeat to pool several runs into one dataset)")
        ->required();
    ext_cmd->add_option("--out", ext_args.out_csv, "output dataset CSV")->required();
    ext_cmd->add_option("--warmup", ext_args.warmup, "leading packets to skip");
    ext_cmd->add_flag("--force", ext_args.force, "overwrite existing outputs");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a classifier (grid search by default)");
    train_cmd->add_option("--dataset", train_args.dataset_path, "dataset CSV")->required();
    train_cmd->add_option("--kind", train_args.kind, "dt|rf|gb|lr|knn")->required();
    train_cmd->add_option("--seed", train_args.seed, "master seed (split + training)");
    train_cmd->add_option("--out", train_args.out_model, "output model file")->required();
    train_cmd->add_option("--cv-table", train_args.cv_table, "grid-search CV table CSV");
    train_cmd->add_option("--folds", train_args.folds, "CV folds");
    train_cmd->add_option("--train-fraction", train_args.train_fraction, "train side fraction");
    train_cmd->add_option("--split", train_args.split_kind, "stratified|time-ordered");
    train_cmd->add_option("--depth", train_args.depth, "max tree depth (-1: unlimited)");
    train_cmd->add_option("--min-leaf", train_args.min_leaf, "min samples per leaf");
    train_cmd->add_option("--criterion", train_args.criterion, "gini|entropy");
    train_cmd->add_option("--trees", train_args.trees, "forest size");
    train_cmd->add_option("--features-per-split", train_args.features_per_split,
                          "sqrt|all|<count>");
    train_cmd->add_flag("--no-bootstrap", train_args.no_bootstrap, "disable bagging");
    train_cmd->add_option("--stages", train_args.stages, "boosting stages");
    train_cmd->add_option("--learning-rate", train_args.learning_rate, "gb/lr step size");
    train_cmd->add_option("--iterations", train_args.iterations, "lr gradient steps");
    train_cmd->add_option("--l2", train_args.l2, "lr ridge strength");
    train_cmd->add_option("--k", train_args.k, "knn neighbor count");
    train_cmd->add_option("--metric", train_args.metric, "euclidean|manhattan");
    train_cmd->add_flag("--no-scale", train_args.no_scale, "knn: skip standardization");
    train_cmd->add_option("--class-weight", train_args.class_weight, "none|balanced");
    train_cmd->add_flag("--force", train_args.force, "overwrite existing outputs");

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a model on a dataset split");
    eval_cmd->add_option("--model", eval_args.model_path, "model file")->required();
    eval_cmd->add_option("--dataset", eval_args.dataset_path, "dataset CSV")->required();
    eval_cmd->add_option("--split-seed", eval_args.split_seed,
                         "split seed (default: the model's training seed)");
    eval_cmd->add_option("--train-fraction", eval_args.train_fraction, "train side fraction");
    eval_cmd->add_option("--split", eval_args.split_kind, "stratified|time-ordered");
    eval_cmd->add_option("--out", eval_args.out_report, "report JSON path");
    eval_cmd->add_flag("--force", eval_args.force, "overwrite existing outputs");

    AblateArgs abl_args;
    auto* abl_cmd = app.add_subcommand("ablate", "feature-removal grid over model kinds");
    abl_cmd->add_option("--dataset", abl_args.dataset_path, "dataset CSV")->required();
    abl_cmd->add_option("--models", abl_args.models, "comma list of kinds");
    abl_cmd->add_option("--seed", abl_args.seed, "master seed");
    abl_cmd->add_option("--folds", abl_args.folds, "CV folds for the baseline search");
    abl_cmd->add_option("--train-fraction", abl_args.train_fraction, "train side fraction");
    abl_cmd->add_flag("--no-grid-search", abl_args.no_grid_search,
                      "use the per-kind recommended hyperparameters");
    abl_cmd->add_option("--out", abl_args.out_report, "report JSON path");
    abl_cmd->add_option("--csv", abl_args.out_csv, "grid CSV path");
    abl_cmd->add_flag("--force", abl_args.force, "overwrite existing outputs");

    ReplayArgs rep_args;
    auto* rep_cmd = app.add_subcommand("replay-policy",
                                       "same seed under different loss-reaction policies");
    rep_cmd->add_option("--config", rep_args.config_path, "config file (JSON)");
    rep_cmd->add_option("--set", rep_args.overrides, "config override key=value (repeatable)");
    rep_cmd->add_option("--seed", rep_args.seed, "override config seed");
    rep_cmd->add_option("--policies", rep_args.policies,
                        "comma list: always-reduce,oracle-discriminate,model-discriminate");
    rep_cmd->add_option("--model", rep_args.model_path, "classifier for model-discriminate");
    rep_cmd->add_option("--out", rep_args.out_prefix, "output prefix for summary and series");
    rep_cmd->add_flag("--force", rep_args.force, "overwrite existing outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        std::cerr << "[lossid] " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        set_max_jobs(jobs);
        if (sim_cmd->parsed()) return cmd_simulate(sim_args);
        if (ext_cmd->parsed()) return cmd_extract(ext_args);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (eval_cmd->parsed()) return cmd_evaluate(eval_args);
        if (abl_cmd->parsed()) return cmd_ablate(abl_args);
        if (rep_cmd->parsed()) return cmd_replay(rep_args);
    } catch (const ConfigError& e) {
        std::cerr << "[lossid] " << e.what() << '\n';
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "[lossid] " << e.what() << '\n';
        return kExitSchema;
    } catch (const DivergenceError& e) {
        std::cerr << "[lossid] " << e.what() << '\n';
        return kExitDivergence;
    } catch (const ParseError& e) {
        std::cerr << "[lossid] " << e.what() << '\n';
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "[lossid] " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
