#include "lossid/eval/metrics.hpp"

#include <cstdio>
#include <fstream>

#include "lossid/util.hpp"

namespace lossid::eval {

Confusion confusion_matrix(const std::vector<LossLabel>& actual,
                           const std::vector<LossLabel>& predicted) {
    if (actual.size() != predicted.size())
        throw ConfigError("confusion matrix inputs differ in length: " +
                          std::to_string(actual.size()) + " actual vs " +
                          std::to_string(predicted.size()) + " predicted");
    Confusion cm{};
    for (std::size_t i = 0; i < actual.size(); ++i)
        ++cm[static_cast<std::size_t>(actual[i])][static_cast<std::size_t>(predicted[i])];
    return cm;
}

std::array<PerClass, kNumClasses> per_class_metrics(const Confusion& cm) {
    std::array<PerClass, kNumClasses> out{};
    for (int c = 0; c < kNumClasses; ++c) {
        PerClass& pc = out[static_cast<std::size_t>(c)];
        for (int o = 0; o < kNumClasses; ++o) {
            pc.support_actual += cm[static_cast<std::size_t>(c)][static_cast<std::size_t>(o)];
            pc.support_predicted += cm[static_cast<std::size_t>(o)][static_cast<std::size_t>(c)];
        }
        const auto tp = cm[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        if (pc.support_actual > 0) {
            pc.recall = static_cast<double>(tp) / static_cast<double>(pc.support_actual);
        } else {
            pc.recall_undefined = true;
        }
        if (pc.support_predicted > 0) {
            pc.precision = static_cast<double>(tp) / static_cast<double>(pc.support_predicted);
        } else {
            pc.precision_undefined = true;
        }
        pc.f1 = pc.precision + pc.recall > 0.0
                    ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                    : 0.0;
    }
    return out;
}

MacroAverages macro_averages(const std::array<PerClass, kNumClasses>& per_class) {
    MacroAverages m;
    for (const auto& pc : per_class) {
        m.macro_recall += pc.recall / kNumClasses;
        m.macro_f1 += pc.f1 / kNumClasses;
    }
    return m;
}

EvalReport evaluate(const ml::TrainedModel& model, const ml::Dataset& ds,
                    const ml::SplitIndices& split) {
    const auto active = ds.active_names();
    if (model.feature_schema() != active) {
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (const auto& name : v) s += (s.empty() ? "" : ", ") + name;
            return s;
        };
        throw SchemaError("model trained on [" + join(model.feature_schema()) +
                          "] but dataset provides [" + join(active) + "]");
    }

    const auto cols = ds.active_indices();
    std::vector<LossLabel> actual, predicted;
    actual.reserve(split.test_rows.size());
    predicted.reserve(split.test_rows.size());
    std::vector<double> x(cols.size());
    for (int r : split.test_rows) {
        const auto& row = ds.rows[static_cast<std::size_t>(r)];
        for (std::size_t j = 0; j < cols.size(); ++j)
            x[j] = row.x[static_cast<std::size_t>(cols[j])];
        actual.push_back(row.label);
        predicted.push_back(model.predict(x));
    }

    EvalReport report;
    report.confusion = confusion_matrix(actual, predicted);
    report.per_class = per_class_metrics(report.confusion);
    const MacroAverages m = macro_averages(report.per_class);
    report.macro_recall = m.macro_recall;
    report.macro_f1 = m.macro_f1;
    report.test_size = static_cast<std::int64_t>(actual.size());
    std::int64_t correct = 0;
    for (int c = 0; c < kNumClasses; ++c)
        correct += report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    report.accuracy =
        report.test_size ? static_cast<double>(correct) / static_cast<double>(report.test_size) : 0.0;
    report.model_kind = ml::kind_name(model.kind());
    report.hyperparameters = model.train_meta().hp.describe(model.kind());
    report.split_seed = split.seed;
    report.feature_mask = active;
    return report;
}

std::string render_report(const EvalReport& report) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "model %s (%s)\n", report.model_kind.c_str(),
                  report.hyperparameters.c_str());
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "test rows %lld    accuracy %.2f    macro recall %.2f    macro avg F1 %.2f\n\n",
                  static_cast<long long>(report.test_size), report.accuracy, report.macro_recall,
                  report.macro_f1);
    out += buf;
    std::snprintf(buf, sizeof buf, "%-8s %8s %8s %16s %14s\n", "class", "recall", "f1-score",
                  "support(actual)", "support(pred)");
    out += buf;
    for (int c = 0; c < kNumClasses; ++c) {
        const PerClass& pc = report.per_class[static_cast<std::size_t>(c)];
        std::snprintf(buf, sizeof buf, "%-8s %8.2f %8.2f %16lld %14lld%s\n",
                      sim::label_name(static_cast<LossLabel>(c)), pc.recall, pc.f1,
                      static_cast<long long>(pc.support_actual),
                      static_cast<long long>(pc.support_predicted),
                      pc.recall_undefined || pc.precision_undefined ? "  (undefined -> 0)" : "");
        out += buf;
    }
    out += "\nconfusion matrix (rows actual, cols predicted)\n";
    std::snprintf(buf, sizeof buf, "%-8s %8s %8s %8s\n", "", "qDrop", "wDrop", "unDrop");
    out += buf;
    for (int a = 0; a < kNumClasses; ++a) {
        std::snprintf(buf, sizeof buf, "%-8s %8lld %8lld %8lld\n",
                      sim::label_name(static_cast<LossLabel>(a)),
                      static_cast<long long>(report.confusion[static_cast<std::size_t>(a)][0]),
                      static_cast<long long>(report.confusion[static_cast<std::size_t>(a)][1]),
                      static_cast<long long>(report.confusion[static_cast<std::size_t>(a)][2]));
        out += buf;
    }
    return out;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json pc = nlohmann::json::array();
    for (int c = 0; c < kNumClasses; ++c) {
        const PerClass& p = per_class[static_cast<std::size_t>(c)];
        pc.push_back({{"class", sim::label_name(static_cast<LossLabel>(c))},
                      {"recall", p.recall},
                      {"precision", p.precision},
                      {"f1", p.f1},
                      {"support_actual", p.support_actual},
                      {"support_predicted", p.support_predicted},
                      {"recall_undefined", p.recall_undefined},
                      {"precision_undefined", p.precision_undefined}});
    }
    nlohmann::json cm = nlohmann::json::array();
    for (int a = 0; a < kNumClasses; ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < kNumClasses; ++p)
            row.push_back(confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)]);
        cm.push_back(std::move(row));
    }
    return {{"per_class", std::move(pc)},
            {"macro_recall", macro_recall},
            {"macro_f1", macro_f1},
            {"accuracy", accuracy},
            {"confusion", std::move(cm)},
            {"test_size", test_size},
            {"model_kind", model_kind},
            {"hyperparameters", hyperparameters},
            {"split_seed", split_seed},
            {"feature_mask", feature_mask}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    EvalReport r;
    const auto& pc = j.at("per_class");
    for (int c = 0; c < kNumClasses; ++c) {
        const auto& p = pc.at(static_cast<std::size_t>(c));
        PerClass& out = r.per_class[static_cast<std::size_t>(c)];
        out.recall = p.at("recall").get<double>();
        out.precision = p.at("precision").get<double>();
        out.f1 = p.at("f1").get<double>();
        out.support_actual = p.at("support_actual").get<std::int64_t>();
        out.support_predicted = p.at("support_predicted").get<std::int64_t>();
        out.recall_undefined = p.at("recall_undefined").get<bool>();
        out.precision_undefined = p.at("precision_undefined").get<bool>();
    }
    for (int a = 0; a < kNumClasses; ++a)
        for (int p = 0; p < kNumClasses; ++p)
            r.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] =
                j.at("confusion").at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(p)).get<std::int64_t>();
    r.macro_recall = j.at("macro_recall").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    r.test_size = j.at("test_size").get<std::int64_t>();
    r.model_kind = j.at("model_kind").get<std::string>();
    r.hyperparameters = j.at("hyperparameters").get<std::string>();
    r.split_seed = j.at("split_seed").get<std::uint64_t>();
    r.feature_mask = j.at("feature_mask").get<std::vector<std::string>>();
    return r;
}

void save_report(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << report.to_json().dump(2) << '\n';
    if (!out.flush()) throw ParseError("write failed: " + path);
}

EvalReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open report file: " + path);
    try {
        return EvalReport::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("report file " + path + " is not valid JSON: " + e.what());
    }
}

}  // namespace lossid::eval
