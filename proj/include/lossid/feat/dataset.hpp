#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lossid/sim/trace.hpp"

namespace lossid::feat {

using sim::LossLabel;

constexpr int kNumFeatures = 6;

// Canonical column order; also the dataset CSV header order.
constexpr std::array<const char*, kNumFeatures> kFeatureNames = {
    "timestamp_s", "pkt_size_bytes", "rtt_ms", "avg_rtt_ms", "jitter_ms", "cwnd_segments",
};

int feature_index(const std::string& name);  // -1 if unknown

// Per-packet feature vector as seen by the server at send time, plus the
// ground-truth label.
struct FeatureRow {
    std::array<double, kNumFeatures> x{};
    LossLabel label = LossLabel::UnDrop;

    double timestamp_s() const { return x[0]; }
    double pkt_size_bytes() const { return x[1]; }
    double rtt_ms() const { return x[2]; }
    double avg_rtt_ms() const { return x[3]; }
    double jitter_ms() const { return x[4]; }
    double cwnd_segments() const { return x[5]; }
};

// Rows plus the active-column mask used by the ablation runner. Masked
// columns are excluded when training code materializes its input matrix, so
// no training or prediction path can read them.
struct Dataset {
    std::vector<FeatureRow> rows;
    std::array<bool, kNumFeatures> active{true, true, true, true, true, true};

    std::vector<std::string> active_names() const;
    std::vector<int> active_indices() const;
    std::array<std::int64_t, sim::kNumClasses> class_counts() const;
    std::string fingerprint() const;  // "fnv1a64:<hex>" over rows and mask
};

struct ClassSummary {
    std::int64_t total = 0;
    std::array<std::int64_t, sim::kNumClasses> counts{};  // qDrop, wDrop, unDrop

    double pct(int cls) const { return total ? 100.0 * counts[cls] / total : 0.0; }
};

ClassSummary class_summary(const Dataset& ds);
ClassSummary class_summary_from_counts(std::int64_t total, std::int64_t qdrop, std::int64_t wdrop);
// Two-decimal drop-mix table.
std::string render_class_summary(const ClassSummary& s);

// One row per original transmission, skipping the first `warmup` packets.
// Estimator fields carry the state as of each packet's send time (zeros until
// the first RTT sample); labels copy the trace fates. Throws if no packet in
// the trace was ever acknowledged.
Dataset extract_features(const sim::PacketTrace& trace, int warmup = 1);

// CSV with the exact header
// timestamp_s,pkt_size_bytes,rtt_ms,avg_rtt_ms,jitter_ms,cwnd_segments,label
void save_dataset_csv(const Dataset& ds, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

}  // namespace lossid::feat
