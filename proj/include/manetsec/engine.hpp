#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "manetsec/adversary.hpp"
#include "manetsec/config.hpp"
#include "manetsec/detection.hpp"
#include "manetsec/energy.hpp"
#include "manetsec/event_log.hpp"
#include "manetsec/metrics.hpp"
#include "manetsec/routing.hpp"
#include "manetsec/rng.hpp"
#include "manetsec/topology.hpp"

namespace manetsec {

// The event loop runs on an integer microsecond clock; ties are broken by a
// per-run scheduling counter so replays of the same config are bit-identical.
using SimTime = std::int64_t;

inline SimTime to_us(double seconds) { return static_cast<SimTime>(std::llround(seconds * 1e6)); }
inline double to_seconds(SimTime us) { return static_cast<double>(us) / 1e6; }

// Airtime of a frame at the configured bandwidth.
inline SimTime transmission_time_us(std::uint32_t bytes, double bandwidth_bps) {
  return static_cast<SimTime>(
      std::llround(static_cast<double>(bytes) * 8.0 * 1e6 / bandwidth_bps));
}

enum class EventKind : std::uint8_t {
  MobilityTick,
  PacketArrival,
  Timer,
  TrafficEmit,
  DetectionScan,
};

struct ArrivalPayload {
  Packet pkt;
  NodeId from = 0;
  NodeId intended = 0;  // meaningful when broadcast is false
  bool broadcast = false;
};

struct TimerPayload {
  enum class Kind : std::uint8_t { Watchdog, RouteRetry, RouteFail, DelayedForward };
  Kind kind = Kind::Watchdog;
  NodeId peer = 0;   // watchdog: supervised next hop; route-fail: failed first hop
  NodeId dest = 0;   // route retry / route fail: destination
  std::uint64_t key_origin = 0;  // watchdog key
  std::uint64_t key_seq = 0;
  std::int64_t stamp = 0;  // watchdog: hand-over time, guards against stale timers
  Packet pkt;  // delayed forward payload
};

struct TrafficPayload {
  std::size_t flow = 0;
};

struct Event {
  SimTime time = 0;
  std::uint64_t tie_seq = 0;
  EventKind kind = EventKind::Timer;
  NodeId subject = 0;
  std::variant<std::monostate, ArrivalPayload, TimerPayload, TrafficPayload> payload;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.tie_seq) > std::tie(b.time, b.tie_seq);
  }
};

struct RunResult {
  ScenarioConfig config;
  MetricsReport metrics;
  EventLog log;
  EnergyLedger ledger;
  std::map<NodeId, Role> roles;
  std::map<NodeId, bool> verdicts;  // blacklisted by at least one honest observer at run end
};

class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg)
      : cfg_(cfg),
        placement_rng_(splitmix64(*cfg.seed + 1)),
        mobility_rng_(splitmix64(*cfg.seed + 2)),
        channel_rng_(splitmix64(*cfg.seed + 3)),
        attacker_seed_rng_(splitmix64(*cfg.seed + 4)),
        attacker_rng_(splitmix64(*cfg.seed + 5)) {
    validate(cfg_);
    sim_end_us_ = to_us(cfg_.sim_time);
    costs_.transmit_uj = to_uj(cfg_.tx_cost_j);
    costs_.receive_uj = to_uj(cfg_.rx_cost_j);
    costs_.idle_uj = to_uj(cfg_.idle_cost_j);
    routing_params_.route_lifetime = cfg_.route_lifetime;
    routing_params_.initial_energy_j = cfg_.initial_energy_j;
    routing_params_.bandwidth_bps = cfg_.bandwidth_bps;
    trust_params_.reward = cfg_.detection.trust_reward;
    trust_params_.penalty = cfg_.detection.trust_penalty;
    trust_params_.blacklist_threshold = cfg_.detection.blacklist_threshold;
    trust_params_.initial_trust = cfg_.detection.initial_trust;
    trust_params_.quarantine_period = cfg_.detection.quarantine_period;
    trust_params_.probation_trust = cfg_.detection.probation_trust;
    anomaly_params_.delta_threshold = cfg_.detection.delta_threshold;
    anomaly_params_.min_hits = cfg_.detection.min_hits;
  }

  RunResult run() {
    init();
    while (!queue_.empty() && queue_.top().time <= sim_end_us_) {
      const Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      dispatch(ev);
    }
    now_ = sim_end_us_;
    return finalize();
  }

 private:
  // --- per-node runtime state ------------------------------------------------

  struct RequestInfo {
    NodeId target = 0;
    std::uint64_t known_target_seq = 0;
  };

  struct PendingWatch {
    NodeId next_hop = 0;
    SimTime handed_at = 0;
    SimTime deadline_us = 0;
  };

  struct NodeRuntime {
    NodeId id = 0;
    Role role = Role::Honest;
    bool alive = true;
    MobilityState mob;
    RoutingTable table;
    std::uint64_t seq_no = 0;
    std::uint64_t next_request_id = 0;
    std::set<std::pair<NodeId, std::uint64_t>> seen_requests;
    std::map<std::pair<NodeId, std::uint64_t>, RequestInfo> request_cache;
    std::map<NodeId, std::uint64_t> last_known_seq;  // per destination

    // Detection state (honest nodes with detection enabled).
    std::map<NodeId, TrustRecord> trust;
    std::set<NodeId> blacklist;
    SlidingWindows windows;
    std::map<std::pair<std::uint64_t, std::uint64_t>, PendingWatch> watch;
    std::map<NodeId, std::uint32_t> fresh_sl2_hits;  // over-threshold entries since last scan

    // Attacker state.
    AttackerState attacker;
    std::uint64_t observed_max_seq = 0;

    // Origin-side buffering and discovery pacing.
    std::map<NodeId, std::deque<Packet>> buffer;
    std::map<NodeId, SimTime> last_rreq;
    std::set<NodeId> retry_scheduled;

    std::size_t buffered_total() const {
      std::size_t n = 0;
      for (const auto& [d, q] : buffer) n += q.size();
      return n;
    }
  };

  struct Counters {
    std::uint64_t generated = 0;
    std::uint64_t transmitted = 0;  // data packets dispatched from their origin
    std::uint64_t delivered = 0;
    std::uint64_t delivered_bits = 0;
    double delay_sum_s = 0.0;
  };

  // --- initialization ----------------------------------------------------------

  void init() {
    const std::uint32_t n = cfg_.world.node_count;
    nodes_.resize(n);
    std::vector<NodeId> ids;
    for (std::uint32_t i = 0; i < n; ++i) {
      NodeRuntime& node = nodes_[i];
      node.id = i;
      node.mob.position = {placement_rng_.uniform(0.0, cfg_.world.area_width),
                           placement_rng_.uniform(0.0, cfg_.world.area_height)};
      node.mob.waypoint = {placement_rng_.uniform(0.0, cfg_.world.area_width),
                           placement_rng_.uniform(0.0, cfg_.world.area_height)};
      node.mob.speed = placement_rng_.uniform(cfg_.mobility.speed_min, cfg_.mobility.speed_max);
      node.mob.pause_remaining = 0.0;
      node.windows.capacity = cfg_.detection.window_capacity;
      ledger_.add_node(i, to_uj(cfg_.initial_energy_j));
      ids.push_back(i);
    }
    roles_ = cfg_.attack.fraction > 0.0
                 ? seed_attackers(ids, cfg_.attack.fraction, cfg_.attack.profile,
                                  attacker_seed_rng_, {cfg_.source(), cfg_.dest()})
                 : [&] {
                     std::map<NodeId, Role> all;
                     for (NodeId id : ids) all[id] = Role::Honest;
                     return all;
                   }();
    for (auto& node : nodes_) {
      node.role = roles_.at(node.id);
      if (node.role == Role::Attacker) {
        node.attacker.warmup_remaining = cfg_.attack.profile.warmup_packets;
      }
    }

    schedule(to_us(cfg_.mobility_tick), EventKind::MobilityTick, 0, std::monostate{});
    schedule(0, EventKind::TrafficEmit, cfg_.source(), TrafficPayload{0});
    if (cfg_.detection.enabled) {
      schedule(to_us(cfg_.detection.detection_interval), EventKind::DetectionScan, 0,
               std::monostate{});
    }
  }

  // --- event plumbing ----------------------------------------------------------

  template <typename Payload>
  void schedule(SimTime time, EventKind kind, NodeId subject, Payload&& payload) {
    Event ev;
    ev.time = time;
    ev.tie_seq = next_tie_++;
    ev.kind = kind;
    ev.subject = subject;
    ev.payload = std::forward<Payload>(payload);
    queue_.push(std::move(ev));
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::MobilityTick:
        on_mobility_tick();
        return;
      case EventKind::TrafficEmit:
        on_traffic_emit(std::get<TrafficPayload>(ev.payload));
        return;
      case EventKind::PacketArrival:
        on_arrival(nodes_[ev.subject], std::get<ArrivalPayload>(ev.payload));
        return;
      case EventKind::Timer:
        on_timer(nodes_[ev.subject], std::get<TimerPayload>(ev.payload));
        return;
      case EventKind::DetectionScan:
        on_detection_scan();
        return;
    }
  }

  // --- radio ---------------------------------------------------------------------

  std::vector<NodeId> alive_neighbors_of(NodeId id) const {
    std::vector<NodeId> out;
    const Position& p = nodes_[id].mob.position;
    const double range = cfg_.world.radio_range;
    for (const auto& other : nodes_) {
      if (other.id == id || !other.alive) continue;
      if (distance(p, other.mob.position) <= range) out.push_back(other.id);
    }
    return out;
  }

  std::uint32_t degree_of(NodeId id) const {
    return static_cast<std::uint32_t>(alive_neighbors_of(id).size());
  }

  bool reachable(NodeId a, NodeId b) const {
    return nodes_[b].alive &&
           distance(nodes_[a].mob.position, nodes_[b].mob.position) <= cfg_.world.radio_range;
  }

  void charge(NodeId id, EnergyAction action, std::uint32_t bytes) {
    if (!nodes_[id].alive) return;
    charge_energy(ledger_, id, action, bytes, costs_);
    if (ledger_.residual.at(id) == 0 && nodes_[id].alive) {
      nodes_[id].alive = false;
      log_.append(now_, "deactivate", id, "cause=energy-exhausted");
    }
  }

  double residual_j(NodeId id) const { return to_j(ledger_.residual.at(id)); }

  // Puts one frame on the air. Control frames accumulate the transmitter's
  // residual energy, capacity and a unit link cost so route fitness can be
  // computed at the far end. Every alive neighbor gets an arrival event; the
  // ones not addressed treat it as an overhear.
  void transmit(NodeRuntime& sender, Packet pkt, std::optional<NodeId> intended) {
    if (!sender.alive) {
      log_.append(now_, "drop", sender.id, "kind=%s cause=dead-sender", to_string(pkt.kind));
      return;
    }
    if (pkt.kind == PacketKind::RouteRequest || pkt.kind == PacketKind::RouteReply) {
      pkt.payload_size = cfg_.control_bytes;
      const double own = residual_j(sender.id);
      if (pkt.link_costs.empty()) {
        pkt.path_min_energy_j = own;
        pkt.path_min_capacity_bps = cfg_.bandwidth_bps;
      } else {
        pkt.path_min_energy_j = std::min(pkt.path_min_energy_j, own);
        pkt.path_min_capacity_bps = std::min(pkt.path_min_capacity_bps, cfg_.bandwidth_bps);
      }
      pkt.link_costs.push_back(1.0);
    }
    charge(sender.id, EnergyAction::Transmit, pkt.payload_size);
    if (intended) {
      log_.append(now_, "send", sender.id, "kind=%s origin=%u target=%u seq=%llu req=%llu hops=%u to=%u",
                  to_string(pkt.kind), pkt.origin, pkt.target,
                  static_cast<unsigned long long>(pkt.seq_no),
                  static_cast<unsigned long long>(pkt.request_id), pkt.hop_count, *intended);
    } else {
      log_.append(now_, "send", sender.id, "kind=%s origin=%u target=%u seq=%llu req=%llu hops=%u to=bcast",
                  to_string(pkt.kind), pkt.origin, pkt.target,
                  static_cast<unsigned long long>(pkt.seq_no),
                  static_cast<unsigned long long>(pkt.request_id), pkt.hop_count);
    }
    const SimTime tx = transmission_time_us(pkt.payload_size, cfg_.bandwidth_bps);
    const SimTime jitter_cap = to_us(cfg_.jitter_max);
    for (NodeId nb : alive_neighbors_of(sender.id)) {
      const SimTime jitter =
          jitter_cap > 0 ? static_cast<SimTime>(channel_rng_.uniform_u64(0, jitter_cap)) : 0;
      ArrivalPayload arrival;
      arrival.pkt = pkt;
      arrival.from = sender.id;
      arrival.intended = intended.value_or(0);
      arrival.broadcast = !intended.has_value();
      schedule(now_ + tx + jitter, EventKind::PacketArrival, nb, std::move(arrival));
    }
  }

  // --- traffic -------------------------------------------------------------------

  void on_traffic_emit(const TrafficPayload& t) {
    NodeRuntime& src = nodes_[cfg_.source()];
    if (src.alive) {
      Packet pkt;
      pkt.kind = PacketKind::Data;
      pkt.origin = src.id;
      pkt.target = cfg_.dest();
      pkt.seq_no = ++src.seq_no;
      pkt.payload_size = cfg_.packet_bytes;
      pkt.created_at = to_seconds(now_);
      counters_.generated += 1;
      log_.append(now_, "emit", src.id, "flow=%zu target=%u seq=%llu", t.flow, pkt.target,
                  static_cast<unsigned long long>(pkt.seq_no));
      dispatch_data(src, std::move(pkt), /*at_origin=*/true);
      const SimTime period = to_us(1.0 / cfg_.traffic_rate);
      if (now_ + period < sim_end_us_) {
        schedule(now_ + period, EventKind::TrafficEmit, src.id, TrafficPayload{t.flow});
      }
    }
  }

  // --- data plane ------------------------------------------------------------------

  const std::set<NodeId>& blacklist_of(const NodeRuntime& node) const {
    static const std::set<NodeId> kEmpty;
    return (cfg_.detection.enabled && node.role == Role::Honest) ? node.blacklist : kEmpty;
  }

  void dispatch_data(NodeRuntime& me, Packet pkt, bool at_origin) {
    const double now_s = to_seconds(now_);
    for (;;) {
      if (!me.alive) return;
      const ForwardDecision decision =
          forward_data(pkt, me.id, me.table, blacklist_of(me), now_s);
      if (std::holds_alternative<ForwardDeliver>(decision)) {
        deliver(me, pkt);
        return;
      }
      if (std::holds_alternative<ForwardDropNoRoute>(decision)) {
        if (at_origin) {
          log_.append(now_, "buffer", me.id, "target=%u seq=%llu", pkt.target,
                      static_cast<unsigned long long>(pkt.seq_no));
          me.buffer[pkt.target].push_back(pkt);
          maybe_discover(me, pkt.target);
        } else {
          log_.append(now_, "drop", me.id, "kind=data origin=%u seq=%llu cause=no-route truth=%s",
                      pkt.origin, static_cast<unsigned long long>(pkt.seq_no),
                      to_string(me.role));
          announce_forward_failure(me, pkt);
          notify_route_failure(pkt);
        }
        return;
      }
      const NodeId next = std::get<ForwardSend>(decision).next_hop;
      if (!reachable(me.id, next)) {
        me.table.invalidate(pkt.target, next);
        continue;  // try the next-best candidate
      }
      send_data(me, pkt, next, at_origin);
      return;
    }
  }

  // A relay that cannot move a packet on says so: supervisors treat the
  // announcement as an honest outcome, while a silent drop stays suspect.
  void announce_forward_failure(NodeRuntime& me, const Packet& pkt) {
    Packet ack;
    ack.kind = PacketKind::Ack;
    ack.origin = pkt.origin;
    ack.target = pkt.target;
    ack.seq_no = pkt.seq_no;
    ack.hop_count = pkt.hop_count;
    ack.payload_size = cfg_.control_bytes;
    ack.created_at = to_seconds(now_);
    transmit(me, ack, std::nullopt);
  }

  void send_data(NodeRuntime& me, Packet& pkt, NodeId next, bool at_origin) {
    pkt.hop_count += 1;
    if (pkt.hop_count > cfg_.ttl_max) {
      log_.append(now_, "drop", me.id, "kind=data origin=%u seq=%llu cause=ttl truth=%s",
                  pkt.origin, static_cast<unsigned long long>(pkt.seq_no), to_string(me.role));
      announce_forward_failure(me, pkt);
      notify_route_failure(pkt);
      return;
    }
    if (at_origin) {
      pkt.first_hop = next;
      counters_.transmitted += 1;
    }
    me.table.refresh(pkt.target, next, to_seconds(now_) + cfg_.route_lifetime);
    if (cfg_.detection.enabled && me.role == Role::Honest && next != pkt.target) {
      LoadState load;
      load.queued_packets = static_cast<std::uint32_t>(me.buffered_total());
      load.base_link_delay = cfg_.base_link_delay;
      load.arrival_rate = cfg_.traffic_rate;
      const SimTime deadline = to_us(forward_deadline(pkt, load, cfg_.slack_factor));
      me.watch[{pkt.origin, pkt.seq_no}] = {next, now_, deadline};
      TimerPayload timer;
      timer.kind = TimerPayload::Kind::Watchdog;
      timer.peer = next;
      timer.key_origin = pkt.origin;
      timer.key_seq = pkt.seq_no;
      timer.stamp = now_;
      // One tick past the deadline so an on-time relay heard exactly at the
      // deadline is processed first (the bound is inclusive).
      schedule(now_ + deadline + 1, EventKind::Timer, me.id, std::move(timer));
    }
    transmit(me, pkt, next);
  }

  void deliver(NodeRuntime& me, const Packet& pkt) {
    counters_.delivered += 1;
    counters_.delivered_bits += static_cast<std::uint64_t>(pkt.payload_size) * 8;
    const double delay = to_seconds(now_) - pkt.created_at;
    counters_.delay_sum_s += delay;
    log_.append(now_, "deliver", me.id, "origin=%u seq=%llu hops=%u delay_us=%lld", pkt.origin,
                static_cast<unsigned long long>(pkt.seq_no), pkt.hop_count,
                static_cast<long long>(std::llround(delay * 1e6)));
  }

  // A relay that lost the route tells the origin which first hop failed; the
  // origin reacts by invalidating that candidate and rediscovering. Modeled
  // as a fixed-latency control notice rather than an explicit error flood.
  void notify_route_failure(const Packet& pkt) {
    TimerPayload timer;
    timer.kind = TimerPayload::Kind::RouteFail;
    timer.dest = pkt.target;
    timer.peer = pkt.first_hop;
    schedule(now_ + kRouteFailNoticeUs, EventKind::Timer, pkt.origin, std::move(timer));
  }

  // --- discovery --------------------------------------------------------------------

  void maybe_discover(NodeRuntime& me, NodeId dest) {
    if (!me.alive) return;
    const SimTime retry = to_us(cfg_.rreq_retry_interval);
    const auto last = me.last_rreq.find(dest);
    if (last != me.last_rreq.end() && now_ - last->second < retry) {
      if (me.retry_scheduled.insert(dest).second) {
        TimerPayload timer;
        timer.kind = TimerPayload::Kind::RouteRetry;
        timer.dest = dest;
        schedule(last->second + retry, EventKind::Timer, me.id, std::move(timer));
      }
      return;
    }
    me.seq_no += 1;
    const std::uint64_t rid = me.next_request_id++;
    const std::uint64_t known = me.last_known_seq.count(dest) ? me.last_known_seq[dest] : 0;
    const OriginateResult result =
        originate_route_request(me.id, dest, me.table, blacklist_of(me), to_seconds(now_), rid,
                                me.seq_no, known);
    if (std::holds_alternative<RouteEntry>(result)) {
      flush_buffer(me, dest);
      return;
    }
    Packet req = std::get<Packet>(result);
    me.seen_requests.insert({me.id, rid});
    me.request_cache[{me.id, rid}] = {dest, known};
    me.last_rreq[dest] = now_;
    transmit(me, req, std::nullopt);
  }

  void flush_buffer(NodeRuntime& me, NodeId dest) {
    auto it = me.buffer.find(dest);
    if (it == me.buffer.end() || it->second.empty()) return;
    log_.append(now_, "flush", me.id, "target=%u packets=%zu", dest, it->second.size());
    while (!it->second.empty() && me.alive) {
      Packet pkt = it->second.front();
      it->second.pop_front();
      const ForwardDecision decision =
          forward_data(pkt, me.id, me.table, blacklist_of(me), to_seconds(now_));
      if (std::holds_alternative<ForwardSend>(decision)) {
        const NodeId next = std::get<ForwardSend>(decision).next_hop;
        if (!reachable(me.id, next)) {
          me.table.invalidate(dest, next);
          it->second.push_front(pkt);
          continue;
        }
        send_data(me, pkt, next, /*at_origin=*/true);
      } else {
        // Route vanished again; put the packet back and wait for the next reply.
        it->second.push_front(pkt);
        maybe_discover(me, dest);
        return;
      }
    }
  }

  // --- control plane -------------------------------------------------------------------

  void on_arrival(NodeRuntime& me, const ArrivalPayload& arrival) {
    if (!me.alive) return;
    const bool addressed = arrival.broadcast || arrival.intended == me.id;
    if (!addressed) {
      on_overhear(me, arrival);
      return;
    }
    charge(me.id, EnergyAction::Receive, arrival.pkt.payload_size);
    if (!me.alive) return;  // spent its last energy receiving
    log_.append(now_, "recv", me.id, "kind=%s origin=%u target=%u seq=%llu req=%llu hops=%u from=%u",
                to_string(arrival.pkt.kind), arrival.pkt.origin, arrival.pkt.target,
                static_cast<unsigned long long>(arrival.pkt.seq_no),
                static_cast<unsigned long long>(arrival.pkt.request_id), arrival.pkt.hop_count,
                arrival.from);
    switch (arrival.pkt.kind) {
      case PacketKind::RouteRequest:
        on_route_request(me, arrival);
        return;
      case PacketKind::RouteReply:
        on_route_reply(me, arrival);
        return;
      case PacketKind::Data:
        on_data(me, arrival);
        return;
      case PacketKind::Ack:
        // Forward-failure announcement: the supervised neighbor reacted, so
        // the pending watch is closed without a verdict either way.
        if (cfg_.detection.enabled && me.role == Role::Honest) {
          const auto it = me.watch.find({arrival.pkt.origin, arrival.pkt.seq_no});
          if (it != me.watch.end() && it->second.next_hop == arrival.from) me.watch.erase(it);
        }
        return;
    }
  }

  void on_overhear(NodeRuntime& me, const ArrivalPayload& arrival) {
    if (me.role == Role::Attacker) {
      observe_seq(me, arrival.pkt);
      return;
    }
    if (!cfg_.detection.enabled) return;
    if (arrival.pkt.kind == PacketKind::Data) {
      resolve_watch(me, arrival.pkt, arrival.from);
    } else if (arrival.pkt.kind == PacketKind::RouteReply) {
      note_reply(me, arrival.pkt, arrival.from);
    }
  }

  // Forging attackers track the highest sequence number seen anywhere so
  // their replies always outbid honest ones.
  void observe_seq(NodeRuntime& attacker, const Packet& pkt) {
    attacker.observed_max_seq = std::max(attacker.observed_max_seq, pkt.seq_no);
    attacker.observed_max_seq = std::max(attacker.observed_max_seq, pkt.known_target_seq);
  }

  bool forges_replies(const NodeRuntime& node) const {
    return node.role == Role::Attacker && cfg_.attack.profile.kind != AttackKind::Delay;
  }

  void on_route_request(NodeRuntime& me, const ArrivalPayload& arrival) {
    const Packet& req = arrival.pkt;
    if (me.role == Role::Attacker) observe_seq(me, req);
    if (forges_replies(me)) {
      // Blackhole-family relays answer every fresh request with a forged
      // one-hop reply and suppress the flood instead of relaying it.
      if (me.seen_requests.insert({req.origin, req.request_id}).second) {
        Packet forged =
            attacker_handle_route_request(req, cfg_.attack.profile, me.observed_max_seq);
        transmit(me, forged, arrival.from);
      } else {
        log_.append(now_, "drop", me.id, "kind=rreq origin=%u req=%llu cause=duplicate truth=%s",
                    req.origin, static_cast<unsigned long long>(req.request_id),
                    to_string(me.role));
      }
      return;
    }
    if (me.role == Role::Honest && cfg_.detection.enabled) {
      me.request_cache.try_emplace({req.origin, req.request_id},
                                   RequestInfo{req.target, req.known_target_seq});
    }
    RouteRequestAction action = handle_route_request(req, arrival.from, me.id, me.table,
                                                     blacklist_of(me), me.seen_requests,
                                                     routing_params_, to_seconds(now_),
                                                     me.seq_no + 1);
    switch (action.outcome) {
      case RouteRequestOutcome::Drop:
        log_.append(now_, "drop", me.id, "kind=rreq origin=%u req=%llu cause=%s truth=%s",
                    req.origin, static_cast<unsigned long long>(req.request_id),
                    action.drop_reason == DropReason::Duplicate ? "duplicate"
                    : action.drop_reason == DropReason::BlacklistedSender ? "blacklisted-sender"
                                                                          : "malformed",
                    to_string(me.role));
        return;
      case RouteRequestOutcome::Reply:
        me.seq_no += 1;  // the handler built the reply with the bumped value
        transmit(me, action.packet, arrival.from);
        return;
      case RouteRequestOutcome::Rebroadcast:
        if (cfg_.detection.enabled &&
            !energy_admission(residual_j(me.id), cfg_.detection.energy_admission_threshold)) {
          log_.append(now_, "drop", me.id, "kind=rreq origin=%u req=%llu cause=energy truth=%s",
                      req.origin, static_cast<unsigned long long>(req.request_id),
                      to_string(me.role));
          return;
        }
        transmit(me, action.packet, std::nullopt);
        return;
    }
  }

  void on_route_reply(NodeRuntime& me, const ArrivalPayload& arrival) {
    const Packet& rep = arrival.pkt;
    if (me.role == Role::Attacker) {
      observe_seq(me, rep);
      if (forges_replies(me)) return;  // never helps a competing route along
    }
    bool suppress_relay = false;
    if (cfg_.detection.enabled && me.role == Role::Honest) {
      note_reply(me, rep, arrival.from);
      if (me.blacklist.count(arrival.from)) {
        log_.append(now_, "drop", me.id, "kind=rrep origin=%u target=%u cause=blacklisted-sender",
                    rep.origin, rep.target);
        return;
      }
      // A reply whose sequence number jumps past the threshold is consumed
      // here: the local route install still happens (and is judged by the
      // trust machinery), but the reply is not propagated, so the inflation
      // stays attributed to the node that produced it.
      const auto cached = me.request_cache.find({rep.origin, rep.request_id});
      if (cached != me.request_cache.end()) {
        const std::int64_t delta = static_cast<std::int64_t>(rep.seq_no) -
                                   static_cast<std::int64_t>(cached->second.known_target_seq);
        suppress_relay = delta > anomaly_params_.delta_threshold;
      }
    }
    RouteEntry entry;
    entry.destination = rep.target;
    entry.next_hop = arrival.from;
    entry.hop_count = rep.hop_count + 1;
    entry.dest_seq_no = rep.seq_no;
    entry.fitness = fitness_from_carried(rep, routing_params_);
    entry.expires_at = to_seconds(now_) + cfg_.route_lifetime;
    me.table.upsert(entry);
    auto& known = me.last_known_seq[rep.target];
    known = std::max(known, rep.seq_no);

    if (me.id == rep.origin) {
      flush_buffer(me, rep.target);
      return;
    }
    if (suppress_relay) {
      log_.append(now_, "drop", me.id, "kind=rrep origin=%u target=%u cause=inflated-seq",
                  rep.origin, rep.target);
      return;
    }
    // Relay the reply toward the origin along the reverse route.
    const auto reverse = select_route(me.table.live(rep.origin, to_seconds(now_)),
                                      blacklist_of(me));
    if (!reverse) {
      log_.append(now_, "drop", me.id, "kind=rrep origin=%u target=%u cause=no-reverse-route",
                  rep.origin, rep.target);
      return;
    }
    if (!reachable(me.id, reverse->next_hop)) {
      log_.append(now_, "drop", me.id, "kind=rrep origin=%u target=%u cause=link-break",
                  rep.origin, rep.target);
      return;
    }
    Packet relayed = rep;
    relayed.hop_count += 1;
    me.table.refresh(rep.origin, reverse->next_hop, to_seconds(now_) + cfg_.route_lifetime);
    transmit(me, relayed, reverse->next_hop);
  }

  void on_data(NodeRuntime& me, const ArrivalPayload& arrival) {
    Packet pkt = arrival.pkt;
    if (cfg_.detection.enabled && me.role == Role::Honest) {
      // The supervised packet may come back addressed to us (route loop);
      // that still proves the neighbor relayed it.
      resolve_watch(me, pkt, arrival.from);
    }
    if (me.role == Role::Attacker && me.id != pkt.target) {
      const DataAction act =
          attacker_handle_data(pkt, cfg_.attack.profile, me.attacker, attacker_rng_);
      if (act == DataAction::Drop) {
        log_.append(now_, "drop", me.id, "kind=data origin=%u seq=%llu cause=attacker-drop truth=%s",
                    pkt.origin, static_cast<unsigned long long>(pkt.seq_no), to_string(me.role));
        return;
      }
      if (act == DataAction::Delay) {
        TimerPayload timer;
        timer.kind = TimerPayload::Kind::DelayedForward;
        timer.pkt = pkt;
        schedule(now_ + to_us(cfg_.attack.profile.added_delay), EventKind::Timer, me.id,
                 std::move(timer));
        return;
      }
      // Forward: fall through to the normal relay path.
    }
    if (cfg_.detection.enabled && me.id != pkt.target && me.role == Role::Honest &&
        !energy_admission(residual_j(me.id), cfg_.detection.energy_admission_threshold)) {
      log_.append(now_, "drop", me.id, "kind=data origin=%u seq=%llu cause=energy truth=%s",
                  pkt.origin, static_cast<unsigned long long>(pkt.seq_no), to_string(me.role));
      announce_forward_failure(me, pkt);
      notify_route_failure(pkt);
      return;
    }
    dispatch_data(me, std::move(pkt), /*at_origin=*/false);
  }

  // --- detection hooks ---------------------------------------------------------------

  void resolve_watch(NodeRuntime& me, const Packet& pkt, NodeId from) {
    const auto key = std::make_pair(pkt.origin, pkt.seq_no);
    const auto it = me.watch.find(key);
    if (it == me.watch.end() || it->second.next_hop != from) return;
    const ForwardObservation obs = monitor_forwarding(
        from, to_seconds(it->second.handed_at), to_seconds(now_),
        to_seconds(it->second.deadline_us));
    me.watch.erase(it);
    apply_observation(me, from, obs == ForwardObservation::Forwarded ? Observation::Forwarded
                                                                     : Observation::Violated);
  }

  void note_reply(NodeRuntime& me, const Packet& rep, NodeId from) {
    OverheardReply summary;
    summary.peer = from;
    summary.advertised_seq = rep.seq_no;
    const auto cached = me.request_cache.find({rep.origin, rep.request_id});
    if (cached != me.request_cache.end()) {
      summary.matched_request_seq = cached->second.known_target_seq;
    }
    me.windows = record_overheard(me.windows, summary, to_seconds(now_), degree_of(me.id));
    if (summary.matched_request_seq) {
      const std::int64_t delta = static_cast<std::int64_t>(rep.seq_no) -
                                 static_cast<std::int64_t>(*summary.matched_request_seq);
      if (delta > anomaly_params_.delta_threshold) {
        me.fresh_sl2_hits[from] += 1;
        const auto verdicts = detect_sequence_anomaly(me.windows, anomaly_params_);
        const auto v = verdicts.find(from);
        if (v != verdicts.end() && v->second == PeerVerdict::Suspicious) {
          apply_observation(me, from, Observation::Anomaly);
        }
      }
    }
  }

  void apply_observation(NodeRuntime& observer, NodeId peer, Observation obs) {
    auto [it, inserted] = observer.trust.try_emplace(peer);
    if (inserted) {
      it->second.peer = peer;
      it->second.trust = trust_params_.initial_trust;
    }
    const bool was_blacklisted = it->second.blacklisted;
    it->second = update_trust(it->second, obs, trust_params_, to_seconds(now_));
    if (!was_blacklisted && it->second.blacklisted) {
      observer.blacklist.insert(peer);
      observer.table.invalidate_via(peer);
      ever_blacklisted_.insert(peer);
      log_.append(now_, "blacklist", observer.id, "peer=%u reason=%s trust_milli=%d truth=%s",
                  peer, to_string(obs), static_cast<int>(std::llround(it->second.trust * 1000)),
                  to_string(roles_.at(peer)));
    } else if (was_blacklisted && !it->second.blacklisted) {
      observer.blacklist.erase(peer);
      log_.append(now_, "release", observer.id, "peer=%u truth=%s", peer,
                  to_string(roles_.at(peer)));
    }
  }

  void on_timer(NodeRuntime& me, const TimerPayload& timer) {
    switch (timer.kind) {
      case TimerPayload::Kind::Watchdog: {
        if (!me.alive) return;
        const auto key = std::make_pair(timer.key_origin, timer.key_seq);
        const auto it = me.watch.find(key);
        if (it == me.watch.end()) return;  // relay was overheard in time
        if (it->second.next_hop != timer.peer || it->second.handed_at != timer.stamp) {
          return;  // stale timer; the packet was since re-dispatched
        }
        me.watch.erase(it);
        if (!reachable(me.id, timer.peer)) {
          // The neighbor drifted out of range; silence is not evidence.
          log_.append(now_, "drop", me.id, "kind=watch peer=%u cause=out-of-range", timer.peer);
          return;
        }
        apply_observation(me, timer.peer, Observation::Violated);
        return;
      }
      case TimerPayload::Kind::RouteRetry: {
        me.retry_scheduled.erase(timer.dest);
        if (!me.alive) return;
        const auto buf = me.buffer.find(timer.dest);
        if (buf == me.buffer.end() || buf->second.empty()) return;
        if (!me.table.live(timer.dest, to_seconds(now_)).empty()) {
          flush_buffer(me, timer.dest);
        } else {
          maybe_discover(me, timer.dest);
        }
        return;
      }
      case TimerPayload::Kind::RouteFail: {
        if (!me.alive) return;
        me.table.invalidate(timer.dest, timer.peer);
        const auto buf = me.buffer.find(timer.dest);
        if (buf != me.buffer.end() && !buf->second.empty()) {
          if (!select_route(me.table.live(timer.dest, to_seconds(now_)), blacklist_of(me))) {
            maybe_discover(me, timer.dest);
          } else {
            flush_buffer(me, timer.dest);
          }
        }
        return;
      }
      case TimerPayload::Kind::DelayedForward: {
        if (!me.alive) return;
        Packet pkt = timer.pkt;
        dispatch_data(me, std::move(pkt), /*at_origin=*/false);
        return;
      }
    }
  }

  // --- periodic work --------------------------------------------------------------------

  void on_mobility_tick() {
    // All nodes keep moving regardless of energy state so the mobility stream
    // is independent of traffic history; dead nodes are simply off the air.
    for (auto& node : nodes_) {
      node.mob = step_mobility(node.mob, cfg_.mobility_tick, cfg_.world, cfg_.mobility,
                               mobility_rng_);
      if (costs_.idle_uj > 0 && node.alive) charge(node.id, EnergyAction::IdleTick, 0);
    }
    const SimTime tick = to_us(cfg_.mobility_tick);
    if (now_ + tick <= sim_end_us_) {
      schedule(now_ + tick, EventKind::MobilityTick, 0, std::monostate{});
    }
  }

  void on_detection_scan() {
    // Quarantine releases.
    for (auto& node : nodes_) {
      if (node.role != Role::Honest) continue;
      for (auto& [peer, record] : node.trust) {
        if (record.blacklisted && to_seconds(now_) >= record.quarantine_until) {
          record = release_if_quarantine_elapsed(record, trust_params_, to_seconds(now_));
          node.blacklist.erase(peer);
          log_.append(now_, "release", node.id, "peer=%u truth=%s", peer,
                      to_string(roles_.at(peer)));
        }
      }
    }

    // Degree-anomaly scan. A node must stay above the ratio threshold for the
    // configured number of consecutive scans before its neighbors penalize
    // it; transient hubs in a mobile disc graph decay within one interval.
    std::map<NodeId, std::set<NodeId>> adjacency;
    for (const auto& node : nodes_) {
      if (!node.alive) continue;
      auto nbrs = alive_neighbors_of(node.id);
      adjacency[node.id] = std::set<NodeId>(nbrs.begin(), nbrs.end());
    }
    const std::set<NodeId> flagged = tnr_scan(adjacency, cfg_.detection.tnr_threshold);
    for (auto it = tnr_streak_.begin(); it != tnr_streak_.end();) {
      if (!flagged.count(it->first)) it = tnr_streak_.erase(it);
      else ++it;
    }
    for (NodeId suspect : flagged) {
      const std::uint32_t streak = ++tnr_streak_[suspect];
      if (streak < cfg_.detection.tnr_consecutive_scans) continue;
      for (NodeId nb : adjacency.at(suspect)) {
        NodeRuntime& observer = nodes_[nb];
        if (observer.role != Role::Honest) continue;
        apply_observation(observer, suspect, Observation::TnrSuspect);
      }
    }

    // Re-evaluate peers with fresh over-threshold sequence deltas; a peer
    // that keeps inflating keeps losing trust at every scan.
    for (auto& node : nodes_) {
      if (node.role != Role::Honest) continue;
      if (node.fresh_sl2_hits.empty()) continue;
      const auto verdicts = detect_sequence_anomaly(node.windows, anomaly_params_);
      for (const auto& [peer, hits] : node.fresh_sl2_hits) {
        const auto v = verdicts.find(peer);
        if (v != verdicts.end() && v->second == PeerVerdict::Suspicious) {
          apply_observation(node, peer, Observation::Anomaly);
        }
      }
      node.fresh_sl2_hits.clear();
    }

    const SimTime interval = to_us(cfg_.detection.detection_interval);
    if (now_ + interval <= sim_end_us_) {
      schedule(now_ + interval, EventKind::DetectionScan, 0, std::monostate{});
    }
  }

  // --- finalization ----------------------------------------------------------------------

  RunResult finalize() {
    RunResult result;
    result.config = cfg_;
    result.roles = roles_;

    // A node counts as identified once any honest observer blacklisted it at
    // some point during the run; quarantine releases do not unflag it.
    for (const auto& node : nodes_) {
      result.verdicts[node.id] = ever_blacklisted_.count(node.id) > 0;
    }
    for (const auto& node : nodes_) {
      log_.append(sim_end_us_, "verdict", node.id, "flagged=%d truth=%s",
                  result.verdicts.at(node.id) ? 1 : 0, to_string(node.role));
    }

    MetricsReport& m = result.metrics;
    m.generated = counters_.generated;
    m.sent = counters_.transmitted;
    m.received = counters_.delivered;
    m.pdr = m.sent > 0 ? pdr(m.received, m.sent) : 0.0;
    if (m.generated > 0) {
      const Throughput t =
          throughput(m.received, m.generated, counters_.delivered_bits, cfg_.sim_time);
      m.throughput_fraction = t.fraction;
      m.throughput_bps = t.bits_per_second;
    }
    m.energy_consumed_j = energy_consumption(ledger_);
    m.mean_delay_s = m.received > 0 ? counters_.delay_sum_s / static_cast<double>(m.received) : 0.0;
    m.detection = detection_metrics(result.verdicts, roles_);

    result.ledger = ledger_;
    result.log = std::move(log_);
    return result;
  }

  static constexpr SimTime kRouteFailNoticeUs = 10000;  // 10 ms

  ScenarioConfig cfg_;
  Rng placement_rng_;
  Rng mobility_rng_;
  Rng channel_rng_;
  Rng attacker_seed_rng_;
  Rng attacker_rng_;

  SimTime sim_end_us_ = 0;
  SimTime now_ = 0;
  std::uint64_t next_tie_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::vector<NodeRuntime> nodes_;
  std::map<NodeId, Role> roles_;
  std::map<NodeId, std::uint32_t> tnr_streak_;
  std::set<NodeId> ever_blacklisted_;
  EnergyLedger ledger_;
  EnergyCosts costs_;
  RoutingParams routing_params_;
  TrustParams trust_params_;
  AnomalyParams anomaly_params_;
  EventLog log_;
  Counters counters_;
};

inline RunResult run(const ScenarioConfig& config) {
  Simulator sim(config);
  return sim.run();
}

}  // namespace manetsec
