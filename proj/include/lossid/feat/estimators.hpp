#pragma once

#include <cmath>

namespace lossid::feat {

constexpr double kSrttAlpha = 1.0 / 8.0;
constexpr double kJitterGain = 1.0 / 16.0;

// EWMA step. Initialization (first sample becomes srtt) is handled by
// RttTracker.
inline double update_srtt(double srtt_ms, double sample_ms, double alpha = kSrttAlpha) {
    return (1.0 - alpha) * srtt_ms + alpha * sample_ms;
}

// Smoothed inter-sample RTT variation with gain 1/16.
inline double update_jitter(double jitter_ms, double rtt_curr_ms, double rtt_prev_ms) {
    return jitter_ms + (std::abs(rtt_curr_ms - rtt_prev_ms) - jitter_ms) * kJitterGain;
}

// Running RTT / average-RTT / jitter state as a server-side observer keeps
// it. The same tracker runs inside the simulator (for live loss
// classification) and inside feature extraction, fed identical samples in
// identical order.
struct RttTracker {
    int samples = 0;
    double last_rtt_ms = 0.0;
    double srtt_ms = 0.0;
    double jitter_ms = 0.0;

    bool has_sample() const { return samples > 0; }

    void add_sample(double rtt_ms) {
        if (samples == 0) {
            srtt_ms = rtt_ms;  // first sample initializes the average
        } else {
            jitter_ms = update_jitter(jitter_ms, rtt_ms, last_rtt_ms);
            srtt_ms = update_srtt(srtt_ms, rtt_ms);
        }
        last_rtt_ms = rtt_ms;
        ++samples;
    }
};

}  // namespace lossid::feat
