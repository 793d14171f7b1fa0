// Sweep channel and bottleneck settings, reporting the queue/wireless drop
// mix over several seeds. Used to pick the shipped default config.

#include <cstdio>
#include <vector>

#include "lossid/sim/simulator.hpp"

using namespace lossid;

namespace {

struct Candidate {
    double p_bad, p_g2b, p_b2g, rate_mbps;
    int queue_cap;
};

void run_candidate(const Candidate& c, std::int64_t packets, int seeds) {
    double sum_q = 0.0, sum_w = 0.0;
    double min_q = 1e9, max_q = 0.0;
    for (int s = 1; s <= seeds; ++s) {
        sim::SimConfig cfg = sim::default_config();
        cfg.seed = static_cast<std::uint64_t>(s);
        cfg.target_packets = packets;
        cfg.channel.kind = sim::ChannelModel::Kind::GilbertElliott;
        cfg.channel.p_bad = c.p_bad;
        cfg.channel.p_g2b = c.p_g2b;
        cfg.channel.p_b2g = c.p_b2g;
        cfg.wired_rate_mbps = c.rate_mbps;
        cfg.queue_capacity_pkts = c.queue_cap;
        const auto trace = sim::run_simulation(cfg);
        const double q = trace.summary.qdrop_pct();
        sum_q += q;
        sum_w += trace.summary.wdrop_pct();
        min_q = std::min(min_q, q);
        max_q = std::max(max_q, q);
    }
    const double stationary =
        100.0 * (c.p_b2g * 0.0 + c.p_g2b * c.p_bad) / (c.p_g2b + c.p_b2g);  // p_good = 0
    std::printf(
        "p_bad=%.3f p_g2b=%.5f p_b2g=%.3f rate=%.1f cap=%d | qdrop %.3f%% [%.3f..%.3f] "
        "wdrop %.3f%% (stationary %.3f%%)\n",
        c.p_bad, c.p_g2b, c.p_b2g, c.rate_mbps, c.queue_cap, sum_q / seeds, min_q, max_q,
        sum_w / seeds, stationary);
}

}  // namespace

int main(int argc, char** argv) {
    std::int64_t packets = 100000;
    int seeds = 5;
    if (argc > 1) packets = std::atoll(argv[1]);
    if (argc > 2) seeds = std::atoi(argv[2]);

    std::vector<Candidate> grid;
    for (double p_bad : {0.2, 0.3, 0.4})
        for (double p_b2g : {0.04, 0.06, 0.1})
            for (double p_g2b : {0.0008, 0.0012, 0.0016, 0.0024})
                for (double rate : {6.0})
                    for (int cap : {10, 12, 16}) grid.push_back({p_bad, p_g2b, p_b2g, rate, cap});

    for (const auto& c : grid) run_candidate(c, packets, seeds);
    return 0;
}
