#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "manetsec/topology.hpp"

namespace manetsec {

enum class PacketKind : std::uint8_t { RouteRequest, RouteReply, Data, Ack };

inline const char* to_string(PacketKind k) {
  switch (k) {
    case PacketKind::RouteRequest: return "rreq";
    case PacketKind::RouteReply: return "rrep";
    case PacketKind::Data: return "data";
    case PacketKind::Ack: return "ack";
  }
  return "?";
}

// Control and data frames. Route requests and replies additionally carry the
// path metrics accumulated hop by hop (bottleneck residual energy, bottleneck
// link capacity, per-link costs) that route fitness is computed from.
struct Packet {
  PacketKind kind = PacketKind::Data;
  NodeId origin = 0;
  NodeId target = 0;
  std::uint32_t hop_count = 0;
  std::uint64_t seq_no = 0;       // destination seq for replies, origin seq otherwise
  std::uint64_t request_id = 0;   // discovery round, unique per origin
  std::uint32_t payload_size = 512;  // bytes
  double created_at = 0.0;        // seconds

  // Carried route metrics (control packets only).
  double path_min_energy_j = 0.0;
  double path_min_capacity_bps = 0.0;
  std::vector<double> link_costs;
  std::uint64_t known_target_seq = 0;  // requests: origin's last known target seq

  // Set by the origin on first transmission of a data packet; lets a failure
  // notice identify which of the origin's routes went bad.
  NodeId first_hop = 0;
};

struct RouteEntry {
  NodeId destination = 0;
  NodeId next_hop = 0;
  std::uint32_t hop_count = 1;
  std::uint64_t dest_seq_no = 0;
  double fitness = 0.0;     // in [0,1]
  double expires_at = 0.0;  // seconds
};

// Inputs to the route fitness score. Path connectivity is derived from the
// per-link costs, so it is exposed as an accessor rather than stored.
struct FitnessInputs {
  double residual_energy = 0.0;  // normalized, in [0,1]
  double capacity = 0.0;         // normalized, in [0,1]
  std::uint32_t path_length = 2;  // number of nodes on the path
  std::vector<double> link_costs;  // one per link, path_length - 1 entries

  double path_connectivity() const {
    double sum = 0.0;
    for (double c : link_costs) sum += c;
    if (sum <= 0.0) return 0.0;
    return std::clamp(1.0 / sum, 0.0, 1.0);
  }
};

// Reciprocal summed link cost, clamped to [0,1].
inline double path_connectivity(const std::vector<double>& link_costs) {
  FitnessInputs in;
  in.link_costs = link_costs;
  return in.path_connectivity();
}

// Route score: arithmetic mean of normalized residual energy, capacity and
// path connectivity.
inline double compute_fitness(double residual_energy, double capacity, double connectivity) {
  if (residual_energy < 0.0 || residual_energy > 1.0 || capacity < 0.0 || capacity > 1.0 ||
      connectivity < 0.0 || connectivity > 1.0) {
    throw std::domain_error("compute_fitness: components must lie in [0,1]");
  }
  return (residual_energy + capacity + connectivity) / 3.0;
}

inline double compute_fitness(const FitnessInputs& inputs) {
  if (inputs.path_length < 2) throw std::domain_error("compute_fitness: path needs two nodes");
  if (inputs.link_costs.size() != inputs.path_length - 1) {
    throw std::domain_error("compute_fitness: link cost count must equal path length - 1");
  }
  for (double c : inputs.link_costs) {
    if (c <= 0.0) throw std::domain_error("compute_fitness: link costs must be positive");
  }
  return compute_fitness(inputs.residual_energy, inputs.capacity, inputs.path_connectivity());
}

// Per-destination route candidates, one entry per next hop. Iteration order
// is by destination then next hop so replays stay stable.
class RoutingTable {
 public:
  void upsert(const RouteEntry& entry) {
    auto& cands = routes_[entry.destination];
    for (auto& e : cands) {
      if (e.next_hop == entry.next_hop) {
        e = entry;
        return;
      }
    }
    cands.push_back(entry);
    std::sort(cands.begin(), cands.end(),
              [](const RouteEntry& a, const RouteEntry& b) { return a.next_hop < b.next_hop; });
  }

  std::vector<RouteEntry> live(NodeId destination, double now) const {
    std::vector<RouteEntry> out;
    const auto it = routes_.find(destination);
    if (it == routes_.end()) return out;
    for (const auto& e : it->second) {
      if (e.expires_at > now) out.push_back(e);
    }
    return out;
  }

  void invalidate(NodeId destination, NodeId next_hop) {
    const auto it = routes_.find(destination);
    if (it == routes_.end()) return;
    auto& cands = it->second;
    cands.erase(std::remove_if(cands.begin(), cands.end(),
                               [&](const RouteEntry& e) { return e.next_hop == next_hop; }),
                cands.end());
  }

  // Removes every route through the given next hop (used when a neighbor is
  // blacklisted).
  void invalidate_via(NodeId next_hop) {
    for (auto& [dest, cands] : routes_) {
      cands.erase(std::remove_if(cands.begin(), cands.end(),
                                 [&](const RouteEntry& e) { return e.next_hop == next_hop; }),
                  cands.end());
    }
  }

  void refresh(NodeId destination, NodeId next_hop, double new_expiry) {
    const auto it = routes_.find(destination);
    if (it == routes_.end()) return;
    for (auto& e : it->second) {
      if (e.next_hop == next_hop) e.expires_at = std::max(e.expires_at, new_expiry);
    }
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [d, c] : routes_) n += c.size();
    return n;
  }

 private:
  std::map<NodeId, std::vector<RouteEntry>> routes_;
};

// Chooses among live candidates: blacklisted next hops are discarded, the
// survivor with the highest fitness wins, ties broken by higher destination
// sequence number, then fewer hops, then lower next-hop id. Returns nullopt
// when nothing survives (triggers rediscovery at the caller).
inline std::optional<RouteEntry> select_route(const std::vector<RouteEntry>& candidates,
                                              const std::set<NodeId>& blacklist) {
  std::optional<RouteEntry> best;
  for (const auto& c : candidates) {
    if (blacklist.count(c.next_hop)) continue;
    if (!best) {
      best = c;
      continue;
    }
    const auto key = [](const RouteEntry& e) {
      return std::make_tuple(e.fitness, e.dest_seq_no,
                             -static_cast<std::int64_t>(e.hop_count),
                             -static_cast<std::int64_t>(e.next_hop));
    };
    if (key(c) > key(*best)) best = c;
  }
  return best;
}

// Outbound load at a forwarding node, used to scale the supervision deadline.
struct LoadState {
  std::uint32_t queued_packets = 0;   // packets currently waiting at the node
  double base_link_delay = 0.005;     // seconds
  double arrival_rate = 0.0;          // packets/second, informational
};

// Time a neighbor is given to relay a handed-over packet before it is
// reported as a delay suspect. Grows linearly with the local queue.
inline double forward_deadline([[maybe_unused]] const Packet& pkt, const LoadState& load,
                               double slack_factor = 2.0) {
  if (load.base_link_delay <= 0.0) throw std::invalid_argument("forward_deadline: base delay");
  return load.base_link_delay * (1.0 + static_cast<double>(load.queued_packets)) * slack_factor;
}

// --- route discovery -------------------------------------------------------

struct RouteRequestPacket {
  Packet packet;
};

// Either a fresh request to broadcast or a still-live cached route.
using OriginateResult = std::variant<Packet, RouteEntry>;

inline OriginateResult originate_route_request(NodeId source, NodeId dest,
                                               const RoutingTable& table,
                                               const std::set<NodeId>& blacklist, double clock,
                                               std::uint64_t request_id, std::uint64_t own_seq,
                                               std::uint64_t known_target_seq = 0) {
  if (source == dest) throw std::invalid_argument("originate_route_request: source == dest");
  if (auto cached = select_route(table.live(dest, clock), blacklist)) return *cached;
  Packet req;
  req.kind = PacketKind::RouteRequest;
  req.origin = source;
  req.target = dest;
  req.hop_count = 0;
  req.seq_no = own_seq;
  req.request_id = request_id;
  req.payload_size = 0;  // sized by the engine's control frame setting
  req.created_at = clock;
  req.known_target_seq = known_target_seq;
  return req;
}

enum class RouteRequestOutcome : std::uint8_t { Rebroadcast, Reply, Drop };
enum class DropReason : std::uint8_t { None, Duplicate, BlacklistedSender, Malformed };

struct RouteRequestAction {
  RouteRequestOutcome outcome = RouteRequestOutcome::Drop;
  DropReason drop_reason = DropReason::None;
  Packet packet;  // the reply or the rebroadcast payload
};

// Parameters shared by the discovery handlers.
struct RoutingParams {
  double route_lifetime = 3.0;      // seconds
  double initial_energy_j = 100.0;  // normalizes residual energy
  double bandwidth_bps = 2.0e6;     // normalizes capacity
};

inline double fitness_from_carried(const Packet& pkt, const RoutingParams& params) {
  const double eg = std::clamp(pkt.path_min_energy_j / params.initial_energy_j, 0.0, 1.0);
  const double tp = std::clamp(pkt.path_min_capacity_bps / params.bandwidth_bps, 0.0, 1.0);
  return compute_fitness(eg, tp, path_connectivity(pkt.link_costs));
}

// Processes a route request received from `sender`. Duplicates and requests
// relayed by blacklisted senders are dropped; otherwise a reverse route to
// the origin is installed and the request is either answered (when this node
// is the target) or handed back for rebroadcast. `seen` keys are
// (origin, request_id) pairs.
inline RouteRequestAction handle_route_request(const Packet& req, NodeId sender, NodeId me,
                                               RoutingTable& table,
                                               const std::set<NodeId>& blacklist,
                                               std::set<std::pair<NodeId, std::uint64_t>>& seen,
                                               const RoutingParams& params, double now,
                                               std::uint64_t own_seq) {
  RouteRequestAction action;
  if (req.kind != PacketKind::RouteRequest) {
    action.drop_reason = DropReason::Malformed;
    return action;
  }
  if (blacklist.count(sender)) {
    action.drop_reason = DropReason::BlacklistedSender;
    return action;
  }
  if (!seen.insert({req.origin, req.request_id}).second) {
    action.drop_reason = DropReason::Duplicate;
    return action;
  }

  RouteEntry reverse;
  reverse.destination = req.origin;
  reverse.next_hop = sender;
  reverse.hop_count = req.hop_count + 1;
  reverse.dest_seq_no = req.seq_no;
  reverse.fitness = fitness_from_carried(req, params);
  reverse.expires_at = now + params.route_lifetime;
  table.upsert(reverse);

  if (me == req.target) {
    Packet reply;
    reply.kind = PacketKind::RouteReply;
    reply.origin = req.origin;
    reply.target = req.target;
    reply.hop_count = 0;
    reply.seq_no = own_seq;
    reply.request_id = req.request_id;
    reply.payload_size = 0;
    reply.created_at = now;
    action.outcome = RouteRequestOutcome::Reply;
    action.packet = reply;
    return action;
  }

  Packet relayed = req;
  relayed.hop_count += 1;
  action.outcome = RouteRequestOutcome::Rebroadcast;
  action.packet = relayed;
  return action;
}

// --- data forwarding -------------------------------------------------------

struct ForwardDeliver {};
struct ForwardSend {
  NodeId next_hop = 0;
};
struct ForwardDropNoRoute {};

using ForwardDecision = std::variant<ForwardDeliver, ForwardSend, ForwardDropNoRoute>;

inline ForwardDecision forward_data(const Packet& pkt, NodeId me, const RoutingTable& table,
                                    const std::set<NodeId>& blacklist, double now) {
  if (pkt.kind != PacketKind::Data) throw std::invalid_argument("forward_data: not a data packet");
  if (me == pkt.target) return ForwardDeliver{};
  const auto route = select_route(table.live(pkt.target, now), blacklist);
  if (!route) return ForwardDropNoRoute{};
  return ForwardSend{route->next_hop};
}

}  // namespace manetsec
