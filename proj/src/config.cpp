#include "lossid/sim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lossid/errors.hpp"

namespace lossid::sim {

using nlohmann::json;

const char* policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::AlwaysReduce: return "always-reduce";
        case PolicyKind::OracleDiscriminate: return "oracle-discriminate";
        default: return "model-discriminate";
    }
}

PolicyKind policy_from_name(const std::string& s) {
    if (s == "always-reduce" || s == "always_reduce") return PolicyKind::AlwaysReduce;
    if (s == "oracle" || s == "oracle-discriminate" || s == "oracle_discriminate")
        return PolicyKind::OracleDiscriminate;
    if (s == "model-discriminate" || s == "model_discriminate")
        return PolicyKind::ModelDiscriminate;
    throw ConfigError("unknown policy '" + s +
                      "' (valid: always-reduce, oracle-discriminate, model-discriminate)");
}

void SimConfig::validate() const {
    if (mss_bytes <= 0) throw ConfigError("mss_bytes must be > 0");
    if (queue_capacity_pkts < 0) throw ConfigError("queue_capacity_pkts must be >= 0");
    if (wired_delay_ms < 0 || wireless_delay_ms < 0) throw ConfigError("delays must be >= 0");
    if (wired_rate_mbps <= 0) throw ConfigError("wired_rate_mbps must be > 0");
    if (target_packets < 0) throw ConfigError("target_packets must be >= 0");
    if (duration_s < 0) throw ConfigError("duration_s must be >= 0");
    if (target_packets == 0 && duration_s == 0)
        throw ConfigError("one of target_packets or duration_s must be set");
    if (init_cwnd_segments < 1) throw ConfigError("init_cwnd_segments must be >= 1");
    if (init_ssthresh_segments < 2) throw ConfigError("init_ssthresh_segments must be >= 2");
    if (max_cwnd_segments < 1) throw ConfigError("max_cwnd_segments must be >= 1");
    if (dupack_threshold < 1) throw ConfigError("dupack_threshold must be >= 1");
    if (rto_ms <= 0) throw ConfigError("rto_ms must be > 0");
    if (series_sample_s <= 0) throw ConfigError("series_sample_s must be > 0");
    if (max_sim_time_s < 0) throw ConfigError("max_sim_time_s must be >= 0");
    if (payload.kind == PayloadPattern::Kind::Mixed) {
        if (!(payload.full_fraction >= 0.0 && payload.full_fraction <= 1.0))
            throw ConfigError("payload.full_fraction must be in [0,1]");
        if (!(payload.min_fraction > 0.0 && payload.min_fraction <= 1.0))
            throw ConfigError("payload.min_fraction must be in (0,1]");
    }
    if (policy.kind == PolicyKind::ModelDiscriminate && policy.model_path.empty())
        throw ConfigError("policy model-discriminate requires a model path");
    channel.validate();
}

// Calibrated against the reference drop mix (~0.8% queue, ~0.78% wireless
// at 100k packets): severe ~20-transmission bad spells and a shallow
// bottleneck queue.
SimConfig default_config() {
    SimConfig cfg;
    cfg.channel.kind = ChannelModel::Kind::GilbertElliott;
    cfg.channel.p_good = 0.001;
    cfg.channel.p_bad = 0.7;
    cfg.channel.p_g2b = 0.001;
    cfg.channel.p_b2g = 0.05;
    cfg.queue_capacity_pkts = 7;
    return cfg;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown config key: " + where + it.key());
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            j.at(key).get_to(out);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad value for config key '") + key + "': " + e.what());
        }
    }
}

}  // namespace

SimConfig config_from_json_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError("config parse error in " + origin + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object in " + origin);

    reject_unknown(j, {"seed", "target_packets", "duration_s", "mss_bytes", "wired_delay_ms",
                       "wired_rate_mbps", "queue_capacity_pkts", "wireless_delay_ms", "channel",
                       "init_cwnd_segments", "init_ssthresh_segments", "max_cwnd_segments",
                       "dupack_threshold", "rto_ms", "policy", "payload", "series_sample_s",
                       "max_sim_time_s"},
                   "");

    SimConfig cfg = default_config();
    get_to(j, "seed", cfg.seed);
    get_to(j, "target_packets", cfg.target_packets);
    get_to(j, "duration_s", cfg.duration_s);
    get_to(j, "mss_bytes", cfg.mss_bytes);
    get_to(j, "wired_delay_ms", cfg.wired_delay_ms);
    get_to(j, "wired_rate_mbps", cfg.wired_rate_mbps);
    get_to(j, "queue_capacity_pkts", cfg.queue_capacity_pkts);
    get_to(j, "wireless_delay_ms", cfg.wireless_delay_ms);
    get_to(j, "init_cwnd_segments", cfg.init_cwnd_segments);
    get_to(j, "init_ssthresh_segments", cfg.init_ssthresh_segments);
    get_to(j, "max_cwnd_segments", cfg.max_cwnd_segments);
    get_to(j, "dupack_threshold", cfg.dupack_threshold);
    get_to(j, "rto_ms", cfg.rto_ms);
    get_to(j, "series_sample_s", cfg.series_sample_s);
    get_to(j, "max_sim_time_s", cfg.max_sim_time_s);

    if (j.contains("channel")) {
        const json& c = j.at("channel");
        reject_unknown(c, {"model", "p_loss", "p_good", "p_bad", "p_g2b", "p_b2g"}, "channel.");
        std::string model = "gilbert_elliott";
        get_to(c, "model", model);
        if (model == "bernoulli") {
            cfg.channel = ChannelModel{};
            cfg.channel.kind = ChannelModel::Kind::Bernoulli;
        } else if (model == "gilbert_elliott") {
            cfg.channel.kind = ChannelModel::Kind::GilbertElliott;
        } else {
            throw ConfigError("unknown channel.model '" + model +
                              "' (valid: bernoulli, gilbert_elliott)");
        }
        get_to(c, "p_loss", cfg.channel.p_loss);
        get_to(c, "p_good", cfg.channel.p_good);
        get_to(c, "p_bad", cfg.channel.p_bad);
        get_to(c, "p_g2b", cfg.channel.p_g2b);
        get_to(c, "p_b2g", cfg.channel.p_b2g);
    }
    if (j.contains("policy")) {
        const json& p = j.at("policy");
        reject_unknown(p, {"kind", "model_path"}, "policy.");
        std::string kind = "always-reduce";
        get_to(p, "kind", kind);
        cfg.policy.kind = policy_from_name(kind);
        get_to(p, "model_path", cfg.policy.model_path);
    }
    if (j.contains("payload")) {
        const json& p = j.at("payload");
        reject_unknown(p, {"pattern", "full_fraction", "min_fraction"}, "payload.");
        std::string pattern = "constant";
        get_to(p, "pattern", pattern);
        if (pattern == "constant") {
            cfg.payload.kind = PayloadPattern::Kind::Constant;
        } else if (pattern == "mixed") {
            cfg.payload.kind = PayloadPattern::Kind::Mixed;
        } else {
            throw ConfigError("unknown payload.pattern '" + pattern + "' (valid: constant, mixed)");
        }
        get_to(p, "full_fraction", cfg.payload.full_fraction);
        get_to(p, "min_fraction", cfg.payload.min_fraction);
    }

    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str(), path);
}

std::string config_to_json_text(const SimConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["target_packets"] = cfg.target_packets;
    j["duration_s"] = cfg.duration_s;
    j["mss_bytes"] = cfg.mss_bytes;
    j["wired_delay_ms"] = cfg.wired_delay_ms;
    j["wired_rate_mbps"] = cfg.wired_rate_mbps;
    j["queue_capacity_pkts"] = cfg.queue_capacity_pkts;
    j["wireless_delay_ms"] = cfg.wireless_delay_ms;
    if (cfg.channel.kind == ChannelModel::Kind::Bernoulli) {
        j["channel"] = {{"model", "bernoulli"}, {"p_loss", cfg.channel.p_loss}};
    } else {
        j["channel"] = {{"model", "gilbert_elliott"},
                        {"p_good", cfg.channel.p_good},
                        {"p_bad", cfg.channel.p_bad},
                        {"p_g2b", cfg.channel.p_g2b},
                        {"p_b2g", cfg.channel.p_b2g}};
    }
    j["init_cwnd_segments"] = cfg.init_cwnd_segments;
    j["init_ssthresh_segments"] = cfg.init_ssthresh_segments;
    j["max_cwnd_segments"] = cfg.max_cwnd_segments;
    j["dupack_threshold"] = cfg.dupack_threshold;
    j["rto_ms"] = cfg.rto_ms;
    j["policy"] = {{"kind", policy_name(cfg.policy.kind)}, {"model_path", cfg.policy.model_path}};
    j["payload"] = {{"pattern",
                     cfg.payload.kind == PayloadPattern::Kind::Constant ? "constant" : "mixed"},
                    {"full_fraction", cfg.payload.full_fraction},
                    {"min_fraction", cfg.payload.min_fraction}};
    j["series_sample_s"] = cfg.series_sample_s;
    j["max_sim_time_s"] = cfg.max_sim_time_s;
    return j.dump(2) + "\n";
}

void apply_override(SimConfig& cfg, const std::string& key_eq_value) {
    const auto eq = key_eq_value.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key=value, got '" + key_eq_value + "'");
    std::string key = key_eq_value.substr(0, eq);
    const std::string value = key_eq_value.substr(eq + 1);

    json j = json::parse(config_to_json_text(cfg));
    for (auto& c : key)
        if (c == '.') c = '/';
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;  // plain string
    }
    try {
        j[json::json_pointer("/" + key)] = parsed;
    } catch (const json::exception& e) {
        throw ConfigError("bad --set path '" + key_eq_value + "': " + e.what());
    }
    cfg = config_from_json_text(j.dump(), "--set " + key_eq_value);
}

}  // namespace lossid::sim
