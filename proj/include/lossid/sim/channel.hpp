#pragma once

#include "lossid/errors.hpp"
#include "lossid/rng.hpp"

namespace lossid::sim {

// Wireless hop loss process. Bernoulli is the controlled-test model;
// Gilbert-Elliott produces the bursty losses a fading or mobile link shows.
struct ChannelModel {
    enum class Kind { Bernoulli, GilbertElliott };

    Kind kind = Kind::GilbertElliott;

    // Bernoulli
    double p_loss = 0.0;

    // Gilbert-Elliott: loss probability in each state plus transition
    // probabilities, applied once per packet.
    double p_good = 0.0;
    double p_bad = 0.0;
    double p_g2b = 0.0;
    double p_b2g = 0.0;

    void validate() const {
        auto prob = [](double p, const char* name) {
            if (!(p >= 0.0 && p <= 1.0))
                throw ConfigError(std::string("channel probability out of [0,1]: ") + name);
        };
        if (kind == Kind::Bernoulli) {
            prob(p_loss, "p_loss");
        } else {
            prob(p_good, "p_good");
            prob(p_bad, "p_bad");
            prob(p_g2b, "p_g2b");
            prob(p_b2g, "p_b2g");
        }
    }

    // Stationary loss rate of the two-state chain (Bernoulli: p_loss).
    double stationary_loss_rate() const {
        if (kind == Kind::Bernoulli) return p_loss;
        const double denom = p_g2b + p_b2g;
        if (denom <= 0.0) return p_good;  // chain never leaves the initial Good state
        const double pi_bad = p_g2b / denom;
        return (1.0 - pi_bad) * p_good + pi_bad * p_bad;
    }
};

enum class WirelessResult { Delivered, WDrop };

// Per-packet channel state. The channel owns its RNG stream: transmit() is
// the only consumer, so packet-loss draws stay aligned across policy-replay
// arms that share a seed.
class Channel {
public:
    Channel(const ChannelModel& model, std::uint64_t seed) : model_(model), rng_(seed) {
        model_.validate();
    }

    // One call per packet crossing the hop. Bernoulli consumes one draw,
    // Gilbert-Elliott two (loss in the current state, then state transition).
    WirelessResult transmit() {
        if (model_.kind == ChannelModel::Kind::Bernoulli) {
            return rng_.uniform() < model_.p_loss ? WirelessResult::WDrop
                                                  : WirelessResult::Delivered;
        }
        const double ploss = in_bad_ ? model_.p_bad : model_.p_good;
        const bool lost = rng_.uniform() < ploss;
        const double ptrans = in_bad_ ? model_.p_b2g : model_.p_g2b;
        if (rng_.uniform() < ptrans) in_bad_ = !in_bad_;
        return lost ? WirelessResult::WDrop : WirelessResult::Delivered;
    }

    bool in_bad_state() const { return in_bad_; }

private:
    ChannelModel model_;
    Rng rng_;
    bool in_bad_ = false;  // chain starts Good
};

}  // namespace lossid::sim
