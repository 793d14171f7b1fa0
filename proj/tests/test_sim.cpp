#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "lossid/feat/estimators.hpp"
#include "lossid/rng.hpp"
#include "lossid/sim/channel.hpp"
#include "lossid/sim/config.hpp"
#include "lossid/sim/queue.hpp"
#include "lossid/sim/simulator.hpp"
#include "lossid/sim/tcp.hpp"
#include "lossid/sim/trace.hpp"
#include "lossid/util.hpp"

using namespace lossid;
using namespace lossid::sim;

namespace {

SimConfig small_config(std::uint64_t seed, std::int64_t packets = 3000) {
    SimConfig cfg = default_config();
    cfg.seed = seed;
    cfg.target_packets = packets;
    return cfg;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("channel empirical loss rate matches the stationary rate") {
    ChannelModel m;
    m.kind = ChannelModel::Kind::GilbertElliott;
    m.p_good = 0.001;
    m.p_bad = 0.5;
    m.p_g2b = 0.02;
    m.p_b2g = 0.1;
    const int n = 200000;
    Channel ch(m, 42);
    int lost = 0;
    for (int i = 0; i < n; ++i) lost += ch.transmit() == WirelessResult::WDrop;
    const double observed = static_cast<double>(lost) / n;
    CHECK(std::abs(observed - m.stationary_loss_rate()) < 0.005);
}

TEST_CASE("bernoulli channel hits p_loss and ignores the state machine") {
    ChannelModel m;
    m.kind = ChannelModel::Kind::Bernoulli;
    m.p_loss = 0.03;
    Channel ch(m, 7);
    int lost = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) lost += ch.transmit() == WirelessResult::WDrop;
    CHECK(std::abs(static_cast<double>(lost) / n - 0.03) < 0.005);
    CHECK(m.stationary_loss_rate() == 0.03);
}

TEST_CASE("channel streams are reproducible per seed") {
    ChannelModel m;
    m.kind = ChannelModel::Kind::GilbertElliott;
    m.p_bad = 0.6;
    m.p_g2b = 0.05;
    m.p_b2g = 0.2;
    Channel a(m, 99), b(m, 99), c(m, 100);
    bool differs = false;
    for (int i = 0; i < 2000; ++i) {
        const auto ra = a.transmit();
        CHECK(ra == b.transmit());
        differs |= ra != c.transmit();
    }
    CHECK(differs);
}

TEST_CASE("stationary rate with a frozen chain is the good-state rate") {
    ChannelModel m;
    m.kind = ChannelModel::Kind::GilbertElliott;
    m.p_good = 0.004;
    m.p_bad = 0.9;
    m.p_g2b = 0.0;
    m.p_b2g = 0.0;
    CHECK(m.stationary_loss_rate() == 0.004);
}

TEST_CASE("channel probabilities outside [0,1] are rejected") {
    ChannelModel m;
    m.kind = ChannelModel::Kind::Bernoulli;
    m.p_loss = 1.5;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m.kind = ChannelModel::Kind::GilbertElliott;
    m.p_loss = 0.0;
    m.p_b2g = -0.1;
    CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("queue occupancy never exceeds capacity and drops only when full") {
    Rng rng(314);
    for (int episode = 0; episode < 1200; ++episode) {
        const std::int64_t cap = 1 + static_cast<std::int64_t>(rng.uniform_int(10));
        BottleneckQueue q(cap);
        std::int64_t accepted = 0, dropped = 0, popped = 0;
        const int ops = 30 + static_cast<int>(rng.uniform_int(100));
        for (int i = 0; i < ops; ++i) {
            if (rng.uniform() < 0.6) {
                const bool was_full = q.occupancy() == cap;
                if (q.enqueue(i) == EnqueueResult::Accepted) {
                    REQUIRE(!was_full);
                    ++accepted;
                } else {
                    REQUIRE(was_full);
                    ++dropped;
                }
            } else if (!q.empty()) {
                q.pop_front();
                ++popped;
            }
            REQUIRE(q.occupancy() <= cap);
            REQUIRE(q.occupancy() >= 0);
        }
        REQUIRE(accepted - popped == q.occupancy());
        REQUIRE(accepted + dropped >= accepted);
    }
}

TEST_CASE("queue is FIFO") {
    BottleneckQueue q(4);
    for (int i = 0; i < 4; ++i) CHECK(q.enqueue(i) == EnqueueResult::Accepted);
    CHECK(q.enqueue(4) == EnqueueResult::QDrop);
    for (int i = 0; i < 4; ++i) CHECK(q.pop_front() == i);
    CHECK(q.empty());
}

TEST_CASE("cwnd grows by one per ACK in slow start and by 1/cwnd above ssthresh") {
    TcpState t;
    t.cwnd = 4.0;
    t.ssthresh = 8.0;
    t.on_new_ack();
    CHECK(t.cwnd == 5.0);

    t.cwnd = 10.0;
    t.ssthresh = 8.0;
    t.on_new_ack();
    CHECK(t.cwnd == doctest::Approx(10.1).epsilon(1e-12));
}

TEST_CASE("loss reactions halve or reset cwnd") {
    TcpState t;
    t.cwnd = 10.0;
    t.on_loss(LossSignal::TripleDupAck, std::nullopt, PolicyKind::AlwaysReduce);
    CHECK(t.ssthresh == 5.0);
    CHECK(t.cwnd == 5.0);

    t.cwnd = 11.0;
    t.on_loss(LossSignal::TripleDupAck, std::nullopt, PolicyKind::AlwaysReduce);
    CHECK(t.ssthresh == 5.0);  // floor(11/2)

    t.cwnd = 3.0;
    t.on_loss(LossSignal::TripleDupAck, std::nullopt, PolicyKind::AlwaysReduce);
    CHECK(t.ssthresh == 2.0);  // never below 2
    CHECK(t.cwnd == 2.0);

    t.cwnd = 9.0;
    t.on_loss(LossSignal::Timeout, std::nullopt, PolicyKind::AlwaysReduce);
    CHECK(t.ssthresh == 4.0);
    CHECK(t.cwnd == 1.0);
}

TEST_CASE("discriminating policies skip the reduction only for wireless drops") {
    TcpState t;
    t.cwnd = 12.0;
    t.on_loss(LossSignal::TripleDupAck, LossLabel::WDrop, PolicyKind::OracleDiscriminate);
    CHECK(t.cwnd == 12.0);
    t.on_loss(LossSignal::Timeout, LossLabel::WDrop, PolicyKind::ModelDiscriminate);
    CHECK(t.cwnd == 12.0);

    t.on_loss(LossSignal::TripleDupAck, LossLabel::QDrop, PolicyKind::OracleDiscriminate);
    CHECK(t.cwnd == 6.0);

    // AlwaysReduce ignores the cause entirely.
    t.cwnd = 12.0;
    t.on_loss(LossSignal::TripleDupAck, LossLabel::WDrop, PolicyKind::AlwaysReduce);
    CHECK(t.cwnd == 6.0);
}

TEST_CASE("dupack counter fires exactly at the threshold") {
    TcpState t;
    CHECK(!t.on_dup_ack(3));
    CHECK(!t.on_dup_ack(3));
    CHECK(t.on_dup_ack(3));
    CHECK(!t.on_dup_ack(3));  // past the threshold, no re-trigger
}

TEST_CASE("cwnd stays at least 1 under any reaction sequence") {
    Rng rng(2718);
    for (int episode = 0; episode < 1500; ++episode) {
        TcpState t;
        t.cwnd = 1.0 + rng.uniform() * 30.0;
        t.ssthresh = 2.0 + rng.uniform() * 30.0;
        t.max_cwnd = 64.0;
        for (int step = 0; step < 40; ++step) {
            const double r = rng.uniform();
            if (r < 0.6) {
                t.on_new_ack();
            } else {
                const auto signal = r < 0.8 ? LossSignal::TripleDupAck : LossSignal::Timeout;
                std::optional<LossLabel> cause;
                if (rng.uniform() < 0.5)
                    cause = static_cast<LossLabel>(rng.uniform_int(3));
                const auto policy = static_cast<PolicyKind>(rng.uniform_int(3));
                t.on_loss(signal, cause, policy);
            }
            REQUIRE(t.cwnd >= 1.0);
            REQUIRE(t.cwnd <= t.max_cwnd);
            REQUIRE(t.ssthresh >= 2.0);
        }
    }
}

TEST_CASE("srtt fixed point under a constant sample stream") {
    Rng rng(11);
    for (int case_i = 0; case_i < 1100; ++case_i) {
        const double c = 1.0 + rng.uniform() * 400.0;
        feat::RttTracker tr;
        for (int i = 0; i < 20; ++i) tr.add_sample(c);
        REQUIRE(tr.srtt_ms == doctest::Approx(c).epsilon(1e-12));
        REQUIRE(tr.jitter_ms == 0.0);  // |c - c| keeps the recurrence at zero exactly
        REQUIRE(tr.last_rtt_ms == c);
    }
}

TEST_CASE("estimator recurrences match their closed forms") {
    feat::RttTracker tr;
    tr.add_sample(40.0);
    CHECK(tr.srtt_ms == 40.0);  // first sample initializes
    CHECK(tr.jitter_ms == 0.0);
    tr.add_sample(56.0);
    CHECK(tr.srtt_ms == doctest::Approx(0.875 * 40.0 + 0.125 * 56.0).epsilon(1e-12));
    CHECK(tr.jitter_ms == doctest::Approx(16.0 / 16.0).epsilon(1e-12));
    tr.add_sample(56.0);
    // jitter decays toward zero with gain 1/16 when samples stop moving
    CHECK(tr.jitter_ms == doctest::Approx(1.0 + (0.0 - 1.0) / 16.0).epsilon(1e-12));
}

TEST_CASE("config json round-trips through text") {
    SimConfig cfg = default_config();
    cfg.seed = 77;
    cfg.channel.p_bad = 0.33;
    cfg.policy.kind = PolicyKind::OracleDiscriminate;
    cfg.payload.kind = PayloadPattern::Kind::Mixed;
    const std::string text = config_to_json_text(cfg);
    SimConfig back = config_from_json_text(text, "test");
    CHECK(config_to_json_text(back) == text);
    CHECK(back.seed == 77);
    CHECK(back.channel.p_bad == 0.33);
    CHECK(back.policy.kind == PolicyKind::OracleDiscriminate);
}

TEST_CASE("unknown config keys and malformed json are rejected") {
    CHECK_THROWS_AS(config_from_json_text("{\"sede\": 1}", "test"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text("{\"channel\": {\"p_bda\": 0.1}}", "test"), ConfigError);
    CHECK_THROWS_AS(config_from_json_text("not json", "test"), ParseError);
    CHECK_THROWS_AS(config_from_json_text("[1,2]", "test"), ConfigError);
}

TEST_CASE("config validation rejects out-of-range values") {
    SimConfig cfg = default_config();
    cfg.wired_rate_mbps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = default_config();
    cfg.target_packets = 0;
    cfg.duration_s = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = default_config();
    cfg.policy.kind = PolicyKind::ModelDiscriminate;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no model path
    cfg.policy.model_path = "model.json";
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("dotted overrides reach nested fields") {
    SimConfig cfg = default_config();
    apply_override(cfg, "seed=9");
    apply_override(cfg, "channel.p_bad=0.25");
    apply_override(cfg, "queue_capacity_pkts=5");
    apply_override(cfg, "policy.kind=oracle-discriminate");
    CHECK(cfg.seed == 9);
    CHECK(cfg.channel.p_bad == 0.25);
    CHECK(cfg.queue_capacity_pkts == 5);
    CHECK(cfg.policy.kind == PolicyKind::OracleDiscriminate);

    CHECK_THROWS_AS(apply_override(cfg, "no_such_key=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "seed"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "seed=abc"), ConfigError);
}

TEST_CASE("policy names round-trip") {
    for (auto k : {PolicyKind::AlwaysReduce, PolicyKind::OracleDiscriminate,
                   PolicyKind::ModelDiscriminate})
        CHECK(policy_from_name(policy_name(k)) == k);
    CHECK_THROWS_AS(policy_from_name("never-reduce"), ConfigError);
    CHECK_THROWS_AS(label_from_name("xDrop"), ParseError);
}

TEST_CASE("simulation is deterministic per seed") {
    const SimConfig cfg = small_config(5);
    const PacketTrace a = run_simulation(cfg);
    const PacketTrace b = run_simulation(cfg);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        REQUIRE(a.events[i].seq == b.events[i].seq);
        REQUIRE(a.events[i].send_time_s == b.events[i].send_time_s);
        REQUIRE(a.events[i].fate == b.events[i].fate);
        REQUIRE(a.events[i].cwnd_at_send_segments == b.events[i].cwnd_at_send_segments);
    }
    const PacketTrace c = run_simulation(small_config(6));
    CHECK(a.summary.qdrop_count + a.summary.wdrop_count > 0);
    bool differs = c.events.size() != a.events.size();
    for (std::size_t i = 0; !differs && i < a.events.size(); ++i)
        differs = a.events[i].send_time_s != c.events[i].send_time_s ||
                  a.events[i].fate != c.events[i].fate;
    CHECK(differs);
}

TEST_CASE("trace accounting: every original counted once, summary consistent") {
    const PacketTrace tr = run_simulation(small_config(3));
    std::int64_t originals = 0, q = 0, w = 0;
    std::set<std::int64_t> seqs;
    for (const auto& ev : tr.events) {
        if (ev.is_retransmission) continue;
        ++originals;
        CHECK(seqs.insert(ev.seq).second);  // one original per seq
        q += ev.fate == LossLabel::QDrop;
        w += ev.fate == LossLabel::WDrop;
    }
    CHECK(originals == tr.summary.total_packets);
    CHECK(originals == 3000);
    CHECK(q == tr.summary.qdrop_count);
    CHECK(w == tr.summary.wdrop_count);
    CHECK(PacketTrace::summarize(tr.events).qdrop_count == q);
}

TEST_CASE("send times are nondecreasing and acks follow sends") {
    const PacketTrace tr = run_simulation(small_config(4));
    double prev = 0.0;
    for (const auto& ev : tr.events) {
        CHECK(ev.send_time_s >= prev);
        prev = ev.send_time_s;
        if (ev.has_ack_time()) CHECK(ev.ack_time_s > ev.send_time_s);
        if (ev.has_rtt()) CHECK(ev.measured_rtt_ms > 0.0);
    }
}

TEST_CASE("retransmitted segments never contribute RTT samples") {
    SimConfig cfg = small_config(8, 5000);
    const PacketTrace tr = run_simulation(cfg);
    std::set<std::int64_t> retx_seqs;
    std::int64_t retx_events = 0;
    for (const auto& ev : tr.events)
        if (ev.is_retransmission) {
            retx_seqs.insert(ev.seq);
            ++retx_events;
        }
    REQUIRE(retx_events > 0);  // the default mix produces losses
    for (const auto& ev : tr.events)
        if (retx_seqs.count(ev.seq)) CHECK(!ev.has_rtt());
}

TEST_CASE("dropped copies carry no ack time") {
    const PacketTrace tr = run_simulation(small_config(12));
    for (const auto& ev : tr.events)
        if (ev.fate != LossLabel::UnDrop) CHECK(!ev.has_ack_time());
}

TEST_CASE("queue drops require a full queue configured") {
    SimConfig cfg = small_config(2, 2000);
    cfg.queue_capacity_pkts = 100000;  // effectively infinite
    const PacketTrace tr = run_simulation(cfg);
    CHECK(tr.summary.qdrop_count == 0);
}

TEST_CASE("lossless config delivers everything") {
    SimConfig cfg = small_config(1, 2000);
    cfg.channel.kind = ChannelModel::Kind::Bernoulli;
    cfg.channel.p_loss = 0.0;
    cfg.queue_capacity_pkts = 100000;
    const PacketTrace tr = run_simulation(cfg);
    CHECK(tr.summary.qdrop_count == 0);
    CHECK(tr.summary.wdrop_count == 0);
    for (const auto& ev : tr.events) CHECK(!ev.is_retransmission);
}

TEST_CASE("duration-based stop produces packets without a count target") {
    SimConfig cfg = small_config(1);
    cfg.target_packets = 0;
    cfg.duration_s = 2.0;
    const PacketTrace tr = run_simulation(cfg);
    CHECK(tr.summary.total_packets > 100);
    for (const auto& ev : tr.events)
        if (!ev.is_retransmission) CHECK(ev.send_time_s <= 2.0);
}

TEST_CASE("series sampling covers the run at the configured cadence") {
    SimConfig cfg = small_config(9, 4000);
    cfg.series_sample_s = 0.25;
    const PacketTrace tr = run_simulation(cfg);
    REQUIRE(tr.throughput_series.size() > 4);
    for (std::size_t i = 1; i < tr.throughput_series.size(); ++i)
        CHECK(tr.throughput_series[i].time_s - tr.throughput_series[i - 1].time_s ==
              doctest::Approx(0.25).epsilon(1e-9));
    for (const auto& s : tr.cwnd_series) CHECK(s.value >= 1.0);
}

TEST_CASE("model policy without a classifier is refused at start") {
    SimConfig cfg = small_config(1, 100);
    cfg.policy.kind = PolicyKind::ModelDiscriminate;
    cfg.policy.model_path = "irrelevant.json";
    CHECK_THROWS_AS(run_simulation(cfg, nullptr), ConfigError);
}

TEST_CASE("trace round-trips through plain and gzip files") {
    const PacketTrace tr = run_simulation(small_config(21, 1500));
    for (const char* name : {"lossid_trace_rt.tsv", "lossid_trace_rt.tsv.gz"}) {
        const std::string path = temp_path(name);
        save_trace(tr, path);
        const PacketTrace back = load_trace(path);
        REQUIRE(back.events.size() == tr.events.size());
        for (std::size_t i = 0; i < tr.events.size(); ++i) {
            const auto& a = tr.events[i];
            const auto& b = back.events[i];
            REQUIRE(a.seq == b.seq);
            REQUIRE(a.send_time_s == b.send_time_s);
            REQUIRE(a.size_bytes == b.size_bytes);
            REQUIRE(a.cwnd_at_send_segments == b.cwnd_at_send_segments);
            REQUIRE(a.ssthresh_at_send_segments == b.ssthresh_at_send_segments);
            REQUIRE(a.fate == b.fate);
            REQUIRE(a.is_retransmission == b.is_retransmission);
            REQUIRE((std::isnan(a.ack_time_s) ? std::isnan(b.ack_time_s)
                                              : a.ack_time_s == b.ack_time_s));
            REQUIRE((std::isnan(a.measured_rtt_ms) ? std::isnan(b.measured_rtt_ms)
                                                   : a.measured_rtt_ms == b.measured_rtt_ms));
        }
        CHECK(back.summary.total_packets == tr.summary.total_packets);
        CHECK(back.summary.qdrop_count == tr.summary.qdrop_count);
        std::filesystem::remove(path);
    }
}

TEST_CASE("saving the same trace twice produces identical bytes") {
    const PacketTrace tr = run_simulation(small_config(22, 800));
    const std::string p1 = temp_path("lossid_digest_a.tsv");
    const std::string p2 = temp_path("lossid_digest_b.tsv");
    save_trace(tr, p1);
    save_trace(tr, p2);
    CHECK(digest_file(p1) == digest_file(p2));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("loading a damaged trace file fails cleanly") {
    const std::string path = temp_path("lossid_bad_trace.tsv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("seq\tnot_the_real_header\n1\t2\n", f);
    std::fclose(f);
    CHECK_THROWS_AS(load_trace(path), ParseError);
    CHECK_THROWS_AS(load_trace(temp_path("lossid_missing.tsv")), ParseError);
    std::filesystem::remove(path);
}

TEST_CASE("policy replay arms agree when nothing is ever lost") {
    SimConfig cfg = small_config(31, 1200);
    cfg.channel.kind = ChannelModel::Kind::Bernoulli;
    cfg.channel.p_loss = 0.0;
    cfg.queue_capacity_pkts = 100000;
    const std::vector<LossReactionPolicy> policies = {
        {PolicyKind::AlwaysReduce, ""}, {PolicyKind::OracleDiscriminate, ""}};
    const auto outcomes = replay_policy(cfg, policies);
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0].loss_events == 0);
    CHECK(outcomes[1].loss_events == 0);
    CHECK(outcomes[0].mean_throughput_mbps == outcomes[1].mean_throughput_mbps);
    CHECK(outcomes[0].sim_end_s == outcomes[1].sim_end_s);
    CHECK(outcomes[0].policy == "always-reduce");
    CHECK(outcomes[1].policy == "oracle-discriminate");
}

TEST_CASE("replay reports per-arm outcomes at a lossy operating point") {
    SimConfig cfg = small_config(33, 4000);
    const std::vector<LossReactionPolicy> policies = {{PolicyKind::AlwaysReduce, ""},
                                                      {PolicyKind::OracleDiscriminate, ""}};
    const auto outcomes = replay_policy(cfg, policies);
    for (const auto& oc : outcomes) {
        CHECK(oc.loss_events > 0);
        CHECK(oc.wdrop_count > 0);
        CHECK(oc.sim_end_s > 0.0);
        CHECK(oc.mean_throughput_mbps > 0.0);
        CHECK(!oc.cwnd_series.empty());
    }
}
