#include "lossid/sim/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <queue>

#include "lossid/feat/estimators.hpp"
#include "lossid/rng.hpp"
#include "lossid/sim/queue.hpp"
#include "lossid/sim/tcp.hpp"

namespace lossid::sim {

namespace {

// RNG stream ids derived from the config seed. The channel and payload
// streams are consumed in packet order, so policy-replay arms that share a
// seed see identical draws until their senders diverge.
enum Stream : std::uint64_t { kChannelStream = 1, kPayloadStream = 2 };

enum class EvKind : std::uint8_t {
    Emit,
    QueueArrive,
    ServiceDone,
    WirelessTx,
    Deliver,
    Ack,
    Rto,
    Sample,
};

struct Event {
    double t = 0.0;
    std::uint64_t id = 0;  // tie-break: FIFO among equal times
    EvKind kind = EvKind::Sample;
    std::int64_t payload = 0;  // copy id, ack number, or timer generation
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.id > b.id;
    }
};

enum class CopyFate : std::uint8_t { Pending, QDrop, WDrop, Delivered };

struct Copy {
    std::int64_t seq = 0;
    double send_time = 0.0;
    std::int32_t size = 0;
    double cwnd_at_send = 0.0;
    double ssthresh_at_send = 0.0;
    bool retx = false;
    CopyFate fate = CopyFate::Pending;
    double rtt_ms = std::numeric_limits<double>::quiet_NaN();
    // Estimator state at send time, for live loss classification.
    double est_rtt = 0.0, est_srtt = 0.0, est_jitter = 0.0;
};

struct SeqState {
    std::int32_t size = 0;
    std::int32_t retx_count = 0;
    std::int64_t orig_copy = -1;
    std::int64_t latest_copy = -1;
    CopyFate last_decided = CopyFate::Pending;
    bool acked = false;
    double ack_time = std::numeric_limits<double>::quiet_NaN();
};

class Simulation {
public:
    Simulation(const SimConfig& cfg, const LossClassifier* classifier)
        : cfg_(cfg),
          classifier_(classifier),
          channel_(cfg.channel, derive_seed(cfg.seed, kChannelStream)),
          payload_rng_(derive_seed(cfg.seed, kPayloadStream)),
          queue_(cfg.queue_capacity_pkts) {
        cfg_.validate();
        if (cfg_.policy.kind == PolicyKind::ModelDiscriminate && classifier_ == nullptr)
            throw ConfigError("model-discriminate policy requires a loaded classifier");
        tcp_.cwnd = cfg_.init_cwnd_segments;
        tcp_.ssthresh = static_cast<double>(cfg_.init_ssthresh_segments);
        tcp_.max_cwnd = static_cast<double>(cfg_.max_cwnd_segments);
        hard_stop_ = cfg_.max_sim_time_s > 0
                         ? cfg_.max_sim_time_s
                         : (cfg_.duration_s > 0 ? cfg_.duration_s * 10 + 60 : 86400.0);
    }

    PacketTrace run() {
        try_send();
        schedule(cfg_.series_sample_s, EvKind::Sample, 0);
        while (!heap_.empty()) {
            const Event ev = heap_.top();
            heap_.pop();
            now_ = ev.t;
            dispatch(ev);
        }
        return finalize();
    }

    std::int64_t retransmissions() const { return rtx_total_; }
    std::int64_t loss_events() const { return loss_events_; }
    double end_time() const { return now_; }
    double acked_bytes() const { return static_cast<double>(acked_payload_bytes_); }

private:
    // --- scheduling ---------------------------------------------------------

    void schedule(double t, EvKind kind, std::int64_t payload) {
        heap_.push(Event{t, next_event_id_++, kind, payload});
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EvKind::Emit: on_emit(); break;
            case EvKind::QueueArrive: on_queue_arrive(ev.payload); break;
            case EvKind::ServiceDone: on_service_done(ev.payload); break;
            case EvKind::WirelessTx: on_wireless_tx(ev.payload); break;
            case EvKind::Deliver: on_deliver(ev.payload); break;
            case EvKind::Ack: on_ack(ev.payload); break;
            case EvKind::Rto: on_rto(ev.payload); break;
            case EvKind::Sample: on_sample(); break;
        }
    }

    // --- sender -------------------------------------------------------------

    bool admission_open() const {
        if (sending_frozen()) return false;
        if (cfg_.target_packets > 0 && next_seq_ >= cfg_.target_packets) return false;
        if (cfg_.duration_s > 0 && now_ >= cfg_.duration_s) return false;
        return true;
    }

    bool sending_frozen() const { return now_ >= hard_stop_; }

    bool sender_active() const { return admission_open() || snd_una_ < snd_nxt_; }

    std::int32_t draw_payload_size() {
        if (cfg_.payload.kind == PayloadPattern::Kind::Constant) return cfg_.mss_bytes;
        if (payload_rng_.uniform() < cfg_.payload.full_fraction) return cfg_.mss_bytes;
        const auto lo =
            std::max<std::int64_t>(1, std::llround(cfg_.payload.min_fraction * cfg_.mss_bytes));
        const std::int64_t span = cfg_.mss_bytes - lo + 1;
        return static_cast<std::int32_t>(lo + payload_rng_.uniform_int(span));
    }

    std::int64_t make_copy(std::int64_t seq, std::int32_t size, bool retx) {
        Copy c;
        c.seq = seq;
        c.send_time = now_;
        c.size = size;
        c.cwnd_at_send = tcp_.cwnd;
        c.ssthresh_at_send = tcp_.ssthresh;
        c.retx = retx;
        c.est_rtt = tracker_.last_rtt_ms;
        c.est_srtt = tracker_.srtt_ms;
        c.est_jitter = tracker_.jitter_ms;
        copies_.push_back(c);
        const auto id = static_cast<std::int64_t>(copies_.size()) - 1;
        auto& ss = seq_state(seq);
        ss.latest_copy = id;
        if (!retx) {
            ss.size = size;
            ss.orig_copy = id;
        }
        return id;
    }

    bool window_open() const {
        return static_cast<double>(snd_nxt_ - snd_una_) < std::floor(tcp_.cwnd + 1e-9);
    }

    // The sender's access link serializes at a multiple of the bottleneck
    // rate, so a freshly opened window drains as a paced flight instead of an
    // instantaneous burst. ACKs arriving mid-flight update the estimator and
    // cwnd between emissions.
    double pace_time(std::int32_t bytes) const {
        static const double mult = [] {
            const char* s = std::getenv("LOSSID_PACE");
            return s ? std::atof(s) : 2.0;
        }();
        return static_cast<double>(bytes) * 8.0 / (mult * cfg_.wired_rate_mbps * 1e6);
    }

    void try_send() {
        if (emit_scheduled_ || sending_frozen()) return;
        if (rtx_queue_.empty() && !(admission_open() && window_open())) return;
        emit_scheduled_ = true;
        schedule(std::max(now_, sender_free_at_), EvKind::Emit, 0);
    }

    void on_emit() {
        emit_scheduled_ = false;
        if (sending_frozen()) return;
        while (!rtx_queue_.empty()) {
            const std::int64_t seq = rtx_queue_.front();
            rtx_queue_.pop_front();
            if (seq < snd_una_) continue;  // hole closed before the wire freed up
            auto& ss = seq_state(seq);
            const std::int64_t id = make_copy(seq, ss.size, true);
            ++ss.retx_count;
            ++rtx_total_;
            schedule(now_, EvKind::QueueArrive, id);
            sender_free_at_ = now_ + pace_time(ss.size);
            try_send();
            return;
        }
        if (!(admission_open() && window_open())) return;
        const std::int64_t id = make_copy(next_seq_, draw_payload_size(), false);
        ++next_seq_;
        ++snd_nxt_;
        schedule(now_, EvKind::QueueArrive, id);
        sender_free_at_ = now_ + pace_time(copies_[id].size);
        if (!timer_armed_) arm_timer();
        try_send();
    }

    void retransmit(std::int64_t seq) {
        if (sending_frozen()) return;
        if (std::find(rtx_queue_.begin(), rtx_queue_.end(), seq) == rtx_queue_.end())
            rtx_queue_.push_back(seq);
        try_send();
    }

    void arm_timer() {
        if (sending_frozen()) return;
        timer_armed_ = true;
        ++rto_gen_;
        schedule(now_ + cfg_.rto_ms / 1000.0, EvKind::Rto, rto_gen_);
    }

    void cancel_timer() {
        timer_armed_ = false;
        ++rto_gen_;
    }

    // --- path ---------------------------------------------------------------

    double tx_time(std::int32_t bytes) const {
        return static_cast<double>(bytes) * 8.0 / (cfg_.wired_rate_mbps * 1e6);
    }

    void on_queue_arrive(std::int64_t id) {
        if (queue_.enqueue(id) == EnqueueResult::QDrop) {
            decide_fate(id, CopyFate::QDrop);
            return;
        }
        if (!serving_) {
            serving_ = true;
            schedule(now_ + tx_time(copies_[queue_.front()].size), EvKind::ServiceDone,
                     queue_.front());
        }
    }

    void on_service_done(std::int64_t id) {
        const std::int64_t head = queue_.pop_front();
        assert(head == id);
        (void)head;
        schedule(now_ + cfg_.wired_delay_ms / 1000.0, EvKind::WirelessTx, id);
        if (!queue_.empty()) {
            schedule(now_ + tx_time(copies_[queue_.front()].size), EvKind::ServiceDone,
                     queue_.front());
        } else {
            serving_ = false;
        }
    }

    void on_wireless_tx(std::int64_t id) {
        if (channel_.transmit() == WirelessResult::WDrop) {
            decide_fate(id, CopyFate::WDrop);
            return;
        }
        schedule(now_ + cfg_.wireless_delay_ms / 1000.0, EvKind::Deliver, id);
    }

    void on_deliver(std::int64_t id) {
        decide_fate(id, CopyFate::Delivered);
        const std::int64_t seq = copies_[id].seq;
        if (seq == rcv_nxt_) {
            ++rcv_nxt_;
            while (!ooo_.empty() && ooo_.front() == rcv_nxt_) {
                ooo_.pop_front();
                ++rcv_nxt_;
            }
        } else if (seq > rcv_nxt_) {
            insert_ooo(seq);
        }
        const double ack_delay = (cfg_.wireless_delay_ms + cfg_.wired_delay_ms) / 1000.0;
        schedule(now_ + ack_delay, EvKind::Ack, rcv_nxt_);
    }

    void insert_ooo(std::int64_t seq) {
        auto it = std::lower_bound(ooo_.begin(), ooo_.end(), seq);
        if (it == ooo_.end() || *it != seq) ooo_.insert(it, seq);
    }

    void decide_fate(std::int64_t id, CopyFate fate) {
        copies_[id].fate = fate;
        seq_state(copies_[id].seq).last_decided = fate;
    }

    // --- sender ACK / loss processing --------------------------------------

    void on_ack(std::int64_t acknum) {
        if (acknum > snd_una_) {
            const bool was_in_recovery = in_recovery();
            for (std::int64_t seq = snd_una_; seq < acknum; ++seq) ack_segment(seq);
            snd_una_ = acknum;
            tcp_.dupacks = 0;
            if (was_in_recovery) {
                if (snd_una_ >= recovery_point_) {
                    recovery_point_ = -1;  // full ACK, recovery done
                } else {
                    retransmit(snd_una_);  // partial ACK: repair next hole, no reduction
                }
            } else {
                tcp_.on_new_ack();
            }
            if (snd_una_ < snd_nxt_)
                arm_timer();
            else
                cancel_timer();
            try_send();
        } else if (acknum == snd_una_ && snd_una_ < snd_nxt_) {
            if (tcp_.on_dup_ack(cfg_.dupack_threshold) && !in_recovery()) {
                loss_reaction(LossSignal::TripleDupAck, snd_una_);
                recovery_point_ = snd_nxt_;
                retransmit(snd_una_);
                arm_timer();
            }
        }
        // stale ACK below snd_una: ignore
    }

    void ack_segment(std::int64_t seq) {
        auto& ss = seq_state(seq);
        if (ss.acked) return;
        ss.acked = true;
        ss.ack_time = now_;
        acked_payload_bytes_ += ss.size;
        // Karn: only never-retransmitted segments produce an RTT sample.
        if (ss.retx_count == 0 && ss.orig_copy >= 0 &&
            copies_[ss.orig_copy].fate == CopyFate::Delivered) {
            const double sample_ms = (now_ - copies_[ss.orig_copy].send_time) * 1000.0;
            copies_[ss.orig_copy].rtt_ms = sample_ms;
            tracker_.add_sample(sample_ms);
        }
    }

    bool in_recovery() const { return recovery_point_ >= 0; }

    void loss_reaction(LossSignal signal, std::int64_t seq) {
        ++loss_events_;
        tcp_.on_loss(signal, classify_cause(seq), cfg_.policy.kind);
    }

    std::optional<LossLabel> classify_cause(std::int64_t seq) {
        const auto& ss = seq_state(seq);
        switch (cfg_.policy.kind) {
            case PolicyKind::AlwaysReduce:
                return std::nullopt;
            case PolicyKind::OracleDiscriminate:
                switch (ss.last_decided) {
                    case CopyFate::QDrop: return LossLabel::QDrop;
                    case CopyFate::WDrop: return LossLabel::WDrop;
                    default: return LossLabel::UnDrop;  // spurious signal
                }
            case PolicyKind::ModelDiscriminate: {
                const Copy& c = copies_[ss.latest_copy >= 0 ? ss.latest_copy : ss.orig_copy];
                return classifier_->classify({c.send_time, static_cast<double>(c.size), c.est_rtt,
                                              c.est_srtt, c.est_jitter, c.cwnd_at_send});
            }
        }
        return std::nullopt;
    }

    void on_rto(std::int64_t gen) {
        if (!timer_armed_ || gen != rto_gen_) return;  // stale timer
        timer_armed_ = false;
        if (snd_una_ >= snd_nxt_) return;
        loss_reaction(LossSignal::Timeout, snd_una_);
        tcp_.dupacks = 0;
        recovery_point_ = snd_nxt_;
        retransmit(snd_una_);
        arm_timer();
    }

    // --- series sampling ----------------------------------------------------

    void on_sample() {
        cwnd_series_.push_back({now_, tcp_.cwnd});
        const double bits = static_cast<double>(acked_payload_bytes_ - last_sample_bytes_) * 8.0;
        throughput_series_.push_back({now_, bits / cfg_.series_sample_s / 1e6});
        last_sample_bytes_ = acked_payload_bytes_;
        if (sender_active() && now_ + cfg_.series_sample_s <= hard_stop_)
            schedule(now_ + cfg_.series_sample_s, EvKind::Sample, 0);
    }

    // --- output -------------------------------------------------------------

    PacketTrace finalize() {
        PacketTrace trace;
        trace.events.reserve(copies_.size());
        for (std::size_t i = 0; i < copies_.size(); ++i) {
            const Copy& c = copies_[i];
            PacketEvent ev;
            ev.seq = c.seq;
            ev.send_time_s = c.send_time;
            ev.size_bytes = c.size;
            ev.cwnd_at_send_segments = c.cwnd_at_send;
            ev.ssthresh_at_send_segments = c.ssthresh_at_send;
            ev.is_retransmission = c.retx;
            // Pending can only remain after a hard stop froze the sender.
            ev.fate = c.fate == CopyFate::QDrop
                          ? LossLabel::QDrop
                          : (c.fate == CopyFate::WDrop ? LossLabel::WDrop : LossLabel::UnDrop);
            if (c.fate == CopyFate::Delivered) {
                const auto& ss = seq_state(c.seq);
                if (ss.acked) ev.ack_time_s = ss.ack_time;
            }
            ev.measured_rtt_ms = c.rtt_ms;
            trace.events.push_back(ev);
        }
        trace.recompute_summary();
        trace.throughput_series = std::move(throughput_series_);
        trace.cwnd_series = std::move(cwnd_series_);
        return trace;
    }

    SeqState& seq_state(std::int64_t seq) {
        if (seq >= static_cast<std::int64_t>(seq_states_.size()))
            seq_states_.resize(static_cast<std::size_t>(seq) + 1);
        return seq_states_[static_cast<std::size_t>(seq)];
    }

    SimConfig cfg_;
    const LossClassifier* classifier_;
    Channel channel_;
    Rng payload_rng_;
    BottleneckQueue queue_;
    TcpState tcp_;
    feat::RttTracker tracker_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> heap_;
    std::uint64_t next_event_id_ = 0;
    double now_ = 0.0;
    double hard_stop_ = 0.0;

    std::vector<Copy> copies_;
    std::vector<SeqState> seq_states_;

    std::int64_t next_seq_ = 0;
    std::int64_t snd_una_ = 0;
    std::int64_t snd_nxt_ = 0;
    std::int64_t recovery_point_ = -1;
    bool serving_ = false;
    bool emit_scheduled_ = false;
    double sender_free_at_ = 0.0;
    std::deque<std::int64_t> rtx_queue_;

    bool timer_armed_ = false;
    std::int64_t rto_gen_ = 0;

    std::int64_t rcv_nxt_ = 0;
    std::deque<std::int64_t> ooo_;

    std::int64_t rtx_total_ = 0;
    std::int64_t loss_events_ = 0;
    std::int64_t acked_payload_bytes_ = 0;
    std::int64_t last_sample_bytes_ = 0;
    std::vector<SeriesSample> throughput_series_;
    std::vector<SeriesSample> cwnd_series_;
};

}  // namespace

PacketTrace run_simulation(const SimConfig& config, const LossClassifier* classifier) {
    Simulation sim(config, classifier);
    return sim.run();
}

std::vector<PolicyOutcome> replay_policy(const SimConfig& config,
                                         const std::vector<LossReactionPolicy>& policies,
                                         const LossClassifier* classifier) {
    if (policies.empty()) throw ConfigError("replay requires at least one policy");
    std::vector<PolicyOutcome> outcomes;
    outcomes.reserve(policies.size());
    for (const auto& policy : policies) {
        SimConfig arm = config;
        arm.policy = policy;
        Simulation sim(arm, classifier);
        PacketTrace trace = sim.run();
        PolicyOutcome out;
        out.policy = policy_name(policy.kind);
        out.total_retransmissions = sim.retransmissions();
        out.loss_events = sim.loss_events();
        out.qdrop_count = trace.summary.qdrop_count;
        out.wdrop_count = trace.summary.wdrop_count;
        out.sim_end_s = sim.end_time();
        out.mean_throughput_mbps =
            sim.end_time() > 0 ? sim.acked_bytes() * 8.0 / sim.end_time() / 1e6 : 0.0;
        out.cwnd_series = std::move(trace.cwnd_series);
        outcomes.push_back(std::move(out));
    }
    return outcomes;
}

}  // namespace lossid::sim
