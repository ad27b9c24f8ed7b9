#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "manetsec/adversary.hpp"
#include "manetsec/topology.hpp"

namespace manetsec {

// Raised on any scenario validation failure; message lists every offending
// field (with line positions when parsing a file).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DetectionConfig {
  bool enabled = true;
  double detection_interval = 5.0;  // seconds between scans
  double tnr_threshold = 1.5;
  std::uint32_t tnr_consecutive_scans = 2;  // scans a ratio must persist before it counts
  std::uint32_t window_capacity = 8;
  std::int64_t delta_threshold = 100;
  std::uint32_t min_hits = 3;
  double trust_reward = 0.05;
  double trust_penalty = 0.2;
  double blacklist_threshold = 0.2;
  double initial_trust = 0.5;
  double quarantine_period = 50.0;
  double probation_trust = 0.3;
  double energy_admission_threshold = 0.5;  // joules
};

struct AttackConfig {
  AttackProfile profile;
  double fraction = 0.0;
};

struct ScenarioConfig {
  WorldConfig world;               // node_count mirrors `nodes`
  double sim_time = 700.0;         // seconds
  double bandwidth_bps = 2.0e6;
  std::uint32_t packet_bytes = 512;   // data payload
  std::uint32_t control_bytes = 64;   // request/reply frames
  MobilityParams mobility;
  double mobility_tick = 0.1;      // seconds
  double traffic_rate = 4.0;       // packets/second per flow
  std::optional<NodeId> flow_source;  // defaults to 0
  std::optional<NodeId> flow_dest;    // defaults to nodes-1
  AttackConfig attack;
  DetectionConfig detection;
  double initial_energy_j = 100.0;
  double tx_cost_j = 0.02;
  double rx_cost_j = 0.01;
  double idle_cost_j = 0.0;
  double base_link_delay = 0.005;  // seconds
  double slack_factor = 2.0;
  double route_lifetime = 3.0;     // seconds
  double rreq_retry_interval = 0.5;  // seconds between discovery rounds per destination
  double jitter_max = 0.0001;      // seconds of per-arrival propagation jitter
  std::uint32_t ttl_max = 16;      // hop budget for data packets
  std::optional<std::uint64_t> seed;

  NodeId source() const { return flow_source.value_or(0); }
  NodeId dest() const {
    return flow_dest.value_or(static_cast<NodeId>(world.node_count - 1));
  }
};

inline void validate(const ScenarioConfig& c) {
  std::vector<std::string> problems;
  const auto bad = [&](const std::string& field, const std::string& why) {
    problems.push_back(field + ": " + why);
  };
  if (c.world.node_count < 2) bad("nodes", "minimum 2");
  if (c.world.area_width <= 0.0) bad("area_width", "must be positive");
  if (c.world.area_height <= 0.0) bad("area_height", "must be positive");
  if (c.world.radio_range <= 0.0) bad("radio_range", "must be positive");
  if (c.sim_time <= 0.0) bad("sim_time", "must be positive");
  if (c.bandwidth_bps <= 0.0) bad("bandwidth_bps", "must be positive");
  if (c.packet_bytes == 0) bad("packet_bytes", "must be positive");
  if (c.control_bytes == 0) bad("control_bytes", "must be positive");
  if (c.mobility.speed_min <= 0.0) bad("speed_min", "must be positive");
  if (c.mobility.speed_max < c.mobility.speed_min) bad("speed_max", "below speed_min");
  if (c.mobility.pause_time < 0.0) bad("pause_time", "must be non-negative");
  if (c.mobility_tick <= 0.0) bad("mobility_tick", "must be positive");
  if (c.traffic_rate <= 0.0) bad("traffic_rate", "must be positive");
  if (c.attack.fraction < 0.0 || c.attack.fraction > 1.0) bad("attack_fraction", "outside [0,1]");
  if (c.attack.profile.drop_probability < 0.0 || c.attack.profile.drop_probability > 1.0) {
    bad("drop_probability", "outside [0,1]");
  }
  if (c.attack.profile.inflation_amount == 0) bad("inflation_amount", "must be positive");
  if (c.attack.profile.kind == AttackKind::Delay &&
      c.attack.profile.added_delay <= c.base_link_delay * c.slack_factor) {
    bad("added_delay", "must exceed the honest forwarding deadline");
  }
  if (c.detection.detection_interval <= 0.0) bad("detection_interval", "must be positive");
  if (c.detection.tnr_threshold <= 0.0) bad("tnr_threshold", "must be positive");
  if (c.detection.tnr_consecutive_scans == 0) bad("tnr_consecutive_scans", "must be positive");
  if (c.detection.window_capacity == 0) bad("window_capacity", "must be positive");
  if (c.detection.min_hits == 0) bad("min_hits", "must be positive");
  if (c.detection.trust_reward <= 0.0) bad("trust_reward", "must be positive");
  if (c.detection.trust_penalty <= 0.0) bad("trust_penalty", "must be positive");
  if (c.detection.blacklist_threshold <= 0.0 || c.detection.blacklist_threshold >= 1.0) {
    bad("blacklist_threshold", "outside (0,1)");
  }
  if (c.detection.initial_trust < 0.0 || c.detection.initial_trust > 1.0) {
    bad("initial_trust", "outside [0,1]");
  }
  if (c.detection.quarantine_period <= 0.0) bad("quarantine_period", "must be positive");
  if (c.detection.probation_trust <= c.detection.blacklist_threshold ||
      c.detection.probation_trust > 1.0) {
    bad("probation_trust", "must lie in (blacklist_threshold, 1]");
  }
  if (c.detection.energy_admission_threshold < 0.0) {
    bad("energy_admission_threshold", "must be non-negative");
  }
  if (c.initial_energy_j <= 0.0) bad("initial_energy", "must be positive");
  if (c.tx_cost_j < 0.0) bad("tx_cost", "must be non-negative");
  if (c.rx_cost_j < 0.0) bad("rx_cost", "must be non-negative");
  if (c.idle_cost_j < 0.0) bad("idle_cost", "must be non-negative");
  if (c.base_link_delay <= 0.0) bad("base_link_delay", "must be positive");
  if (c.slack_factor < 1.0) bad("slack_factor", "must be at least 1");
  if (c.route_lifetime <= 0.0) bad("route_lifetime", "must be positive");
  if (c.rreq_retry_interval <= 0.0) bad("rreq_retry_interval", "must be positive");
  if (c.jitter_max < 0.0) bad("jitter_max", "must be non-negative");
  if (c.ttl_max == 0) bad("ttl_max", "must be positive");
  if (!c.seed) bad("seed", "missing (a seed is mandatory)");
  if (c.world.node_count >= 2) {
    if (c.source() >= c.world.node_count) bad("flow_source", "not a valid node id");
    if (c.dest() >= c.world.node_count) bad("flow_dest", "not a valid node id");
    if (c.source() == c.dest()) bad("flow_dest", "flow source and destination coincide");
  }
  if (!problems.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

namespace config_detail {

inline bool parse_bool(const std::string& v, bool& out) {
  if (v == "on" || v == "true" || v == "1") { out = true; return true; }
  if (v == "off" || v == "false" || v == "0") { out = false; return true; }
  return false;
}

inline bool parse_double(const std::string& v, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(v, &pos);
    return pos == v.size();
  } catch (...) {
    return false;
  }
}

inline bool parse_u64(const std::string& v, std::uint64_t& out) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) return false;
    out = x;
    return true;
  } catch (...) {
    return false;
  }
}

inline bool parse_u32(const std::string& v, std::uint32_t& out) {
  std::uint64_t x = 0;
  if (!parse_u64(v, x) || x > 0xffffffffULL) return false;
  out = static_cast<std::uint32_t>(x);
  return true;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace config_detail

// Applies one `key = value` assignment. Shared by the file parser and the
// command-line override path; `where` names the source for error messages.
inline void apply_config_key(ScenarioConfig& c, const std::string& key, const std::string& value,
                             const std::string& where) {
  using namespace config_detail;
  const auto fail = [&](const std::string& why) {
    throw ConfigError(where + ": " + key + ": " + why);
  };
  double d = 0.0;
  std::uint32_t u = 0;
  std::uint64_t u64 = 0;
  bool b = false;

  const auto need_double = [&]() { if (!parse_double(value, d)) fail("expected a number"); return d; };
  const auto need_u32 = [&]() { if (!parse_u32(value, u)) fail("expected a non-negative integer"); return u; };
  const auto need_u64 = [&]() { if (!parse_u64(value, u64)) fail("expected a non-negative integer"); return u64; };
  const auto need_bool = [&]() { if (!parse_bool(value, b)) fail("expected on/off"); return b; };

  if (key == "nodes") c.world.node_count = need_u32();
  else if (key == "area_width") c.world.area_width = need_double();
  else if (key == "area_height") c.world.area_height = need_double();
  else if (key == "radio_range") c.world.radio_range = need_double();
  else if (key == "sim_time") c.sim_time = need_double();
  else if (key == "bandwidth_bps") c.bandwidth_bps = need_double();
  else if (key == "packet_bytes") c.packet_bytes = need_u32();
  else if (key == "control_bytes") c.control_bytes = need_u32();
  else if (key == "speed_min") c.mobility.speed_min = need_double();
  else if (key == "speed_max") c.mobility.speed_max = need_double();
  else if (key == "pause_time") c.mobility.pause_time = need_double();
  else if (key == "mobility_tick") c.mobility_tick = need_double();
  else if (key == "traffic_rate") c.traffic_rate = need_double();
  else if (key == "flow_source") c.flow_source = need_u32();
  else if (key == "flow_dest") c.flow_dest = need_u32();
  else if (key == "attack_kind") {
    if (value == "blackhole") c.attack.profile.kind = AttackKind::Blackhole;
    else if (value == "grayhole") c.attack.profile.kind = AttackKind::Grayhole;
    else if (value == "seq_inflation") c.attack.profile.kind = AttackKind::SeqInflation;
    else if (value == "delay") c.attack.profile.kind = AttackKind::Delay;
    else fail("expected blackhole|grayhole|seq_inflation|delay");
  }
  else if (key == "attack_fraction") c.attack.fraction = need_double();
  else if (key == "drop_probability") c.attack.profile.drop_probability = need_double();
  else if (key == "warmup_packets") c.attack.profile.warmup_packets = need_u32();
  else if (key == "inflation_amount") c.attack.profile.inflation_amount = need_u64();
  else if (key == "added_delay") c.attack.profile.added_delay = need_double();
  else if (key == "detection") c.detection.enabled = need_bool();
  else if (key == "detection_interval") c.detection.detection_interval = need_double();
  else if (key == "tnr_threshold") c.detection.tnr_threshold = need_double();
  else if (key == "tnr_consecutive_scans") c.detection.tnr_consecutive_scans = need_u32();
  else if (key == "window_capacity") c.detection.window_capacity = need_u32();
  else if (key == "delta_threshold") c.detection.delta_threshold = static_cast<std::int64_t>(need_u64());
  else if (key == "min_hits") c.detection.min_hits = need_u32();
  else if (key == "trust_reward") c.detection.trust_reward = need_double();
  else if (key == "trust_penalty") c.detection.trust_penalty = need_double();
  else if (key == "blacklist_threshold") c.detection.blacklist_threshold = need_double();
  else if (key == "initial_trust") c.detection.initial_trust = need_double();
  else if (key == "quarantine_period") c.detection.quarantine_period = need_double();
  else if (key == "probation_trust") c.detection.probation_trust = need_double();
  else if (key == "energy_admission_threshold") c.detection.energy_admission_threshold = need_double();
  else if (key == "initial_energy") c.initial_energy_j = need_double();
  else if (key == "tx_cost") c.tx_cost_j = need_double();
  else if (key == "rx_cost") c.rx_cost_j = need_double();
  else if (key == "idle_cost") c.idle_cost_j = need_double();
  else if (key == "base_link_delay") c.base_link_delay = need_double();
  else if (key == "slack_factor") c.slack_factor = need_double();
  else if (key == "route_lifetime") c.route_lifetime = need_double();
  else if (key == "rreq_retry_interval") c.rreq_retry_interval = need_double();
  else if (key == "jitter_max") c.jitter_max = need_double();
  else if (key == "ttl_max") c.ttl_max = need_u32();
  else if (key == "seed") c.seed = need_u64();
  else fail("unknown key");
}

// Parses flat `key = value` text with `#` comments. Later assignments win.
// The result is not validated; callers apply overrides first, then validate.
inline ScenarioConfig parse_scenario_text(const std::string& text,
                                          const std::string& source_name = "<config>") {
  using namespace config_detail;
  ScenarioConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (value.empty()) throw ConfigError(where + ": empty value for " + key);
    apply_config_key(c, key, value, where);
  }
  return c;
}

inline ScenarioConfig parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

// Serializes every key in a fixed order; parse_scenario_text of the output
// reproduces the config exactly.
inline std::string serialize(const ScenarioConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "nodes = " << c.world.node_count << "\n";
  out << "area_width = " << c.world.area_width << "\n";
  out << "area_height = " << c.world.area_height << "\n";
  out << "radio_range = " << c.world.radio_range << "\n";
  out << "sim_time = " << c.sim_time << "\n";
  out << "bandwidth_bps = " << c.bandwidth_bps << "\n";
  out << "packet_bytes = " << c.packet_bytes << "\n";
  out << "control_bytes = " << c.control_bytes << "\n";
  out << "speed_min = " << c.mobility.speed_min << "\n";
  out << "speed_max = " << c.mobility.speed_max << "\n";
  out << "pause_time = " << c.mobility.pause_time << "\n";
  out << "mobility_tick = " << c.mobility_tick << "\n";
  out << "traffic_rate = " << c.traffic_rate << "\n";
  out << "flow_source = " << c.source() << "\n";
  out << "flow_dest = " << c.dest() << "\n";
  out << "attack_kind = " << to_string(c.attack.profile.kind) << "\n";
  out << "attack_fraction = " << c.attack.fraction << "\n";
  out << "drop_probability = " << c.attack.profile.drop_probability << "\n";
  out << "warmup_packets = " << c.attack.profile.warmup_packets << "\n";
  out << "inflation_amount = " << c.attack.profile.inflation_amount << "\n";
  out << "added_delay = " << c.attack.profile.added_delay << "\n";
  out << "detection = " << (c.detection.enabled ? "on" : "off") << "\n";
  out << "detection_interval = " << c.detection.detection_interval << "\n";
  out << "tnr_threshold = " << c.detection.tnr_threshold << "\n";
  out << "tnr_consecutive_scans = " << c.detection.tnr_consecutive_scans << "\n";
  out << "window_capacity = " << c.detection.window_capacity << "\n";
  out << "delta_threshold = " << c.detection.delta_threshold << "\n";
  out << "min_hits = " << c.detection.min_hits << "\n";
  out << "trust_reward = " << c.detection.trust_reward << "\n";
  out << "trust_penalty = " << c.detection.trust_penalty << "\n";
  out << "blacklist_threshold = " << c.detection.blacklist_threshold << "\n";
  out << "initial_trust = " << c.detection.initial_trust << "\n";
  out << "quarantine_period = " << c.detection.quarantine_period << "\n";
  out << "probation_trust = " << c.detection.probation_trust << "\n";
  out << "energy_admission_threshold = " << c.detection.energy_admission_threshold << "\n";
  out << "initial_energy = " << c.initial_energy_j << "\n";
  out << "tx_cost = " << c.tx_cost_j << "\n";
  out << "rx_cost = " << c.rx_cost_j << "\n";
  out << "idle_cost = " << c.idle_cost_j << "\n";
  out << "base_link_delay = " << c.base_link_delay << "\n";
  out << "slack_factor = " << c.slack_factor << "\n";
  out << "route_lifetime = " << c.route_lifetime << "\n";
  out << "rreq_retry_interval = " << c.rreq_retry_interval << "\n";
  out << "jitter_max = " << c.jitter_max << "\n";
  out << "ttl_max = " << c.ttl_max << "\n";
  if (c.seed) out << "seed = " << *c.seed << "\n";
  return out.str();
}

}  // namespace manetsec
