#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "lossid/sim/config.hpp"
#include "lossid/sim/trace.hpp"

namespace lossid::sim {

enum class LossSignal { TripleDupAck, Timeout };

// Congestion-control state of the sender. Simplified NewReno: slow start,
// additive increase, fast retransmit after dupack_threshold duplicate ACKs,
// timeout resets cwnd to 1. cwnd is fractional (segments); ssthresh holds
// integer values.
struct TcpState {
    double cwnd = 1.0;
    double ssthresh = 64.0;
    double max_cwnd = 65535.0;
    int dupacks = 0;

    // Duplicate cumulative ACK. Returns true exactly when the counter reaches
    // the fast-retransmit threshold.
    bool on_dup_ack(int threshold) { return ++dupacks == threshold; }

    // New cumulative ACK. In slow start cwnd grows by one segment per ACK, in
    // congestion avoidance by 1/cwnd.
    void on_new_ack() {
        if (cwnd < ssthresh)
            cwnd += 1.0;
        else
            cwnd += 1.0 / cwnd;
        cwnd = std::min(cwnd, max_cwnd);
    }

    // Loss reaction. `cause` is the classified loss type (ground truth or
    // model output); nullopt means unknown, which reduces like a congestive
    // loss. Under the discriminating policies a wireless drop leaves cwnd and
    // ssthresh untouched; the caller still retransmits.
    void on_loss(LossSignal signal, std::optional<LossLabel> cause, PolicyKind policy) {
        if (policy != PolicyKind::AlwaysReduce && cause && *cause == LossLabel::WDrop) return;
        ssthresh = std::max(std::floor(cwnd / 2.0), 2.0);
        cwnd = (signal == LossSignal::Timeout) ? 1.0 : ssthresh;
    }
};

}  // namespace lossid::sim
