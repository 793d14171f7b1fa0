#pragma once

#include <cstdint>
#include <string>

#include "lossid/sim/channel.hpp"

namespace lossid::sim {

// What the sender does with cwnd when a loss is detected.
//   AlwaysReduce:      stock behavior, reduce on every loss signal.
//   OracleDiscriminate: consult the ground-truth fate; skip the reduction for
//                       wireless drops.
//   ModelDiscriminate:  same, but the cause comes from a trained classifier.
enum class PolicyKind { AlwaysReduce, OracleDiscriminate, ModelDiscriminate };

const char* policy_name(PolicyKind k);
PolicyKind policy_from_name(const std::string& s);

struct LossReactionPolicy {
    PolicyKind kind = PolicyKind::AlwaysReduce;
    std::string model_path;  // ModelDiscriminate only
};

struct PayloadPattern {
    enum class Kind { Constant, Mixed };
    Kind kind = Kind::Constant;
    // Mixed: fraction of full-MSS segments; the rest draw a size uniformly
    // from [min_fraction * mss, mss].
    double full_fraction = 0.7;
    double min_fraction = 0.25;
};

struct SimConfig {
    std::uint64_t seed = 1;

    // Stop admitting new segments after this many originals (0 = unlimited)
    // or after this much simulated time (0 = unlimited). In-flight data is
    // always drained so every event gets a fate.
    std::int64_t target_packets = 100000;
    double duration_s = 0.0;

    std::int32_t mss_bytes = 1448;
    double wired_delay_ms = 5.0;       // one-way propagation, server <-> AP
    double wired_rate_mbps = 6.0;      // bottleneck link rate
    std::int64_t queue_capacity_pkts = 12;
    double wireless_delay_ms = 2.0;    // one-way propagation, AP <-> client

    ChannelModel channel;  // defaults set by default_config()

    double init_cwnd_segments = 1.0;
    std::int64_t init_ssthresh_segments = 64;
    std::int64_t max_cwnd_segments = 65535;  // receiver-window stand-in
    std::int32_t dupack_threshold = 3;
    double rto_ms = 300.0;  // fixed retransmission timeout

    LossReactionPolicy policy;
    PayloadPattern payload;

    double series_sample_s = 0.1;   // throughput / cwnd sampling cadence
    double max_sim_time_s = 0.0;    // hard stop; 0 = derived automatically

    void validate() const;
};

// Calibrated defaults: drop mix close to 0.8% queue / 0.78% wireless over a
// long run (see README for the calibration sweep).
SimConfig default_config();

// JSON config file mirroring SimConfig field-for-field. Every key optional,
// unknown keys rejected.
SimConfig load_config(const std::string& path);
SimConfig config_from_json_text(const std::string& text, const std::string& origin);
std::string config_to_json_text(const SimConfig& cfg);

// Dotted-path override, e.g. "channel.p_loss=0.01" or "seed=7".
void apply_override(SimConfig& cfg, const std::string& key_eq_value);

}  // namespace lossid::sim
