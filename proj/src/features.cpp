#include <algorithm>
#include <cstdio>

#include "lossid/feat/dataset.hpp"
#include "lossid/feat/estimators.hpp"

namespace lossid::feat {

namespace {

struct RttSample {
    double ack_time_s;
    std::int64_t seq;
    double rtt_ms;
};

// RTT samples become visible to the sender when their ACK arrives. Cumulative
// ACKs cover several segments at once; ties on ack time feed in seq order,
// the same order the live tracker saw them.
std::vector<RttSample> collect_samples(const sim::PacketTrace& trace) {
    std::vector<RttSample> samples;
    for (const auto& ev : trace.events) {
        if (ev.has_rtt() && ev.has_ack_time())
            samples.push_back({ev.ack_time_s, ev.seq, ev.measured_rtt_ms});
    }
    std::sort(samples.begin(), samples.end(), [](const RttSample& a, const RttSample& b) {
        if (a.ack_time_s != b.ack_time_s) return a.ack_time_s < b.ack_time_s;
        return a.seq < b.seq;
    });
    return samples;
}

}  // namespace

Dataset extract_features(const sim::PacketTrace& trace, int warmup) {
    if (trace.events.empty()) throw ParseError("cannot extract features from an empty trace");
    const bool any_acked = std::any_of(trace.events.begin(), trace.events.end(),
                                       [](const sim::PacketEvent& ev) { return ev.has_ack_time(); });
    if (!any_acked) throw ParseError("no RTT reference: trace has no acknowledged packets");
    if (warmup < 0) throw ConfigError("warmup must be >= 0");

    const auto samples = collect_samples(trace);
    std::size_t cursor = 0;
    RttTracker tracker;

    Dataset ds;
    int originals_seen = 0;
    for (const auto& ev : trace.events) {
        if (ev.is_retransmission) continue;
        // A sample whose ACK landed at the send instant is visible: the send
        // was triggered by that ACK.
        while (cursor < samples.size() && samples[cursor].ack_time_s <= ev.send_time_s) {
            tracker.add_sample(samples[cursor].rtt_ms);
            ++cursor;
        }
        if (originals_seen++ < warmup) continue;
        FeatureRow row;
        row.x = {ev.send_time_s,     static_cast<double>(ev.size_bytes),
                 tracker.last_rtt_ms, tracker.srtt_ms,
                 tracker.jitter_ms,   ev.cwnd_at_send_segments};
        row.label = ev.fate;
        ds.rows.push_back(row);
    }
    return ds;
}

ClassSummary class_summary(const Dataset& ds) {
    ClassSummary s;
    s.total = static_cast<std::int64_t>(ds.rows.size());
    for (const auto& row : ds.rows) ++s.counts[static_cast<int>(row.label)];
    return s;
}

ClassSummary class_summary_from_counts(std::int64_t total, std::int64_t qdrop,
                                       std::int64_t wdrop) {
    ClassSummary s;
    s.total = total;
    s.counts[static_cast<int>(LossLabel::QDrop)] = qdrop;
    s.counts[static_cast<int>(LossLabel::WDrop)] = wdrop;
    s.counts[static_cast<int>(LossLabel::UnDrop)] = total - qdrop - wdrop;
    return s;
}

std::string render_class_summary(const ClassSummary& s) {
    const std::int64_t q = s.counts[static_cast<int>(LossLabel::QDrop)];
    const std::int64_t w = s.counts[static_cast<int>(LossLabel::WDrop)];
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-22s %10lld\n", "total packets",
                  static_cast<long long>(s.total));
    out += buf;
    std::snprintf(buf, sizeof buf, "%-22s %10lld (%.2f%%)\n", "dropped packets",
                  static_cast<long long>(q + w),
                  s.total ? 100.0 * static_cast<double>(q + w) / static_cast<double>(s.total) : 0.0);
    out += buf;
    std::snprintf(buf, sizeof buf, "  %-20s %10lld (%.2f%%)\n", "qDrop",
                  static_cast<long long>(q), s.pct(static_cast<int>(LossLabel::QDrop)));
    out += buf;
    std::snprintf(buf, sizeof buf, "  %-20s %10lld (%.2f%%)\n", "wDrop",
                  static_cast<long long>(w), s.pct(static_cast<int>(LossLabel::WDrop)));
    out += buf;
    return out;
}

}  // namespace lossid::feat
