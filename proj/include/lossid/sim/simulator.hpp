#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "lossid/feat/dataset.hpp"
#include "lossid/sim/config.hpp"
#include "lossid/sim/trace.hpp"

namespace lossid::sim {

// Loss-cause classifier consulted by the ModelDiscriminate policy. Takes the
// full six-feature row in canonical order; implementations project onto
// whatever schema they were trained with. Injected by the caller so the
// simulator does not depend on the ML stack.
struct LossClassifier {
    virtual ~LossClassifier() = default;
    virtual LossLabel classify(const std::array<double, feat::kNumFeatures>& features) const = 0;
};

// Runs one TCP flow over the wired-queue-wireless path until target_packets
// originals (or duration_s) plus drain. Deterministic for a given config.
// A classifier is required iff config.policy is ModelDiscriminate.
PacketTrace run_simulation(const SimConfig& config, const LossClassifier* classifier = nullptr);

struct PolicyOutcome {
    std::string policy;
    double mean_throughput_mbps = 0.0;
    std::int64_t total_retransmissions = 0;
    std::int64_t loss_events = 0;  // reductions consulted (dupack or timeout)
    std::int64_t qdrop_count = 0;
    std::int64_t wdrop_count = 0;
    double sim_end_s = 0.0;
    std::vector<SeriesSample> cwnd_series;
};

// Replays the same config and seed under each policy; channel and payload
// randomness is drawn from identical streams, so arms are byte-identical
// until the first loss reaction diverges.
std::vector<PolicyOutcome> replay_policy(const SimConfig& config,
                                         const std::vector<LossReactionPolicy>& policies,
                                         const LossClassifier* classifier = nullptr);

}  // namespace lossid::sim
