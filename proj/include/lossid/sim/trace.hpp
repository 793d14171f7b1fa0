#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lossid/errors.hpp"

namespace lossid::sim {

// Ground-truth fate of one transmitted copy. qDrop: discarded at the full
// bottleneck queue. wDrop: lost on the wireless hop. unDrop: reached the
// client.
enum class LossLabel : std::uint8_t { QDrop = 0, WDrop = 1, UnDrop = 2 };

constexpr int kNumClasses = 3;

inline const char* label_name(LossLabel l) {
    switch (l) {
        case LossLabel::QDrop: return "qDrop";
        case LossLabel::WDrop: return "wDrop";
        default: return "unDrop";
    }
}

LossLabel label_from_name(const std::string& s);

// One transmission of one segment. Retransmissions get their own event with
// is_retransmission set; only original transmissions feed the summary and the
// feature dataset.
struct PacketEvent {
    std::int64_t seq = 0;
    double send_time_s = 0.0;
    std::int32_t size_bytes = 0;
    double cwnd_at_send_segments = 0.0;
    double ssthresh_at_send_segments = 0.0;
    LossLabel fate = LossLabel::UnDrop;
    bool is_retransmission = false;
    // Server time the segment was first cumulatively acknowledged. NaN if this
    // copy never reached the client.
    double ack_time_s = std::numeric_limits<double>::quiet_NaN();
    // RTT sample taken from this copy. NaN unless the copy was delivered as an
    // original transmission and the segment was never retransmitted (Karn).
    double measured_rtt_ms = std::numeric_limits<double>::quiet_NaN();

    bool has_ack_time() const { return !std::isnan(ack_time_s); }
    bool has_rtt() const { return !std::isnan(measured_rtt_ms); }
};

// Tallies over original transmissions only.
struct TraceSummary {
    std::int64_t total_packets = 0;
    std::int64_t qdrop_count = 0;
    std::int64_t wdrop_count = 0;

    double qdrop_pct() const { return total_packets ? 100.0 * qdrop_count / total_packets : 0.0; }
    double wdrop_pct() const { return total_packets ? 100.0 * wdrop_count / total_packets : 0.0; }
    double drop_pct() const { return qdrop_pct() + wdrop_pct(); }
};

struct SeriesSample {
    double time_s = 0.0;
    double value = 0.0;
};

struct PacketTrace {
    std::vector<PacketEvent> events;  // ordered by send_time
    TraceSummary summary;
    std::vector<SeriesSample> throughput_series;  // (time_s, mbps)
    std::vector<SeriesSample> cwnd_series;        // (time_s, segments)

    static TraceSummary summarize(const std::vector<PacketEvent>& events);
    void recompute_summary() { summary = summarize(events); }
};

// Newline-delimited event records; column order documented in the header
// line. A ".gz" suffix selects gzip framing. Series are not stored; the
// summary is recomputed on load.
void save_trace(const PacketTrace& trace, const std::string& path);
PacketTrace load_trace(const std::string& path);

void save_series_csv(const std::vector<SeriesSample>& series, const std::string& value_name,
                     const std::string& path);

}  // namespace lossid::sim
