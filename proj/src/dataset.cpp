#include <fstream>

#include "lossid/feat/dataset.hpp"
#include "lossid/util.hpp"

namespace lossid::feat {

namespace {
constexpr const char* kCsvHeader =
    "timestamp_s,pkt_size_bytes,rtt_ms,avg_rtt_ms,jitter_ms,cwnd_segments,label";
}

int feature_index(const std::string& name) {
    for (int i = 0; i < kNumFeatures; ++i)
        if (name == kFeatureNames[static_cast<std::size_t>(i)]) return i;
    return -1;
}

std::vector<std::string> Dataset::active_names() const {
    std::vector<std::string> names;
    for (int i = 0; i < kNumFeatures; ++i)
        if (active[static_cast<std::size_t>(i)]) names.emplace_back(kFeatureNames[static_cast<std::size_t>(i)]);
    return names;
}

std::vector<int> Dataset::active_indices() const {
    std::vector<int> idx;
    for (int i = 0; i < kNumFeatures; ++i)
        if (active[static_cast<std::size_t>(i)]) idx.push_back(i);
    return idx;
}

std::array<std::int64_t, sim::kNumClasses> Dataset::class_counts() const {
    std::array<std::int64_t, sim::kNumClasses> counts{};
    for (const auto& row : rows) ++counts[static_cast<int>(row.label)];
    return counts;
}

std::string Dataset::fingerprint() const {
    // Text-based digest so the value is stable across platforms regardless of
    // float memory layout.
    Fnv1a64 h;
    for (int i = 0; i < kNumFeatures; ++i) h.update(active[static_cast<std::size_t>(i)] ? "1" : "0");
    h.update("|");
    for (const auto& row : rows) {
        for (double v : row.x) {
            h.update(fmt_double(v));
            h.update(",");
        }
        h.update(sim::label_name(row.label));
        h.update("\n");
    }
    return "fnv1a64:" + h.hex();
}

void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << kCsvHeader << '\n';
    for (const auto& row : ds.rows) {
        for (double v : row.x) out << fmt_double(v) << ',';
        out << sim::label_name(row.label) << '\n';
    }
    if (!out.flush()) throw ParseError("write failed: " + path);
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty dataset file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw SchemaError("unexpected dataset header in " + path + ": " + line);
    Dataset ds;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != kNumFeatures + 1)
            throw ParseError("dataset " + path + " line " + std::to_string(lineno) +
                             ": expected " + std::to_string(kNumFeatures + 1) + " fields, got " +
                             std::to_string(fields.size()));
        FeatureRow row;
        for (int i = 0; i < kNumFeatures; ++i)
            row.x[static_cast<std::size_t>(i)] =
                parse_double(fields[static_cast<std::size_t>(i)], kFeatureNames[static_cast<std::size_t>(i)]);
        row.label = sim::label_from_name(std::string(fields[kNumFeatures]));
        ds.rows.push_back(row);
    }
    return ds;
}

}  // namespace lossid::feat
