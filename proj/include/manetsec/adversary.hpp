#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "manetsec/routing.hpp"
#include "manetsec/rng.hpp"

namespace manetsec {

enum class Role : std::uint8_t { Honest, Attacker };

inline const char* to_string(Role r) { return r == Role::Attacker ? "attacker" : "honest"; }

enum class AttackKind : std::uint8_t { Blackhole, Grayhole, SeqInflation, Delay };

inline const char* to_string(AttackKind k) {
  switch (k) {
    case AttackKind::Blackhole: return "blackhole";
    case AttackKind::Grayhole: return "grayhole";
    case AttackKind::SeqInflation: return "seq_inflation";
    case AttackKind::Delay: return "delay";
  }
  return "?";
}

struct AttackProfile {
  AttackKind kind = AttackKind::Blackhole;
  double drop_probability = 1.0;       // grayhole drop chance after warmup
  std::uint32_t warmup_packets = 20;   // grayhole honest-forwarding budget
  std::uint64_t inflation_amount = 1000;  // added to the highest observed seq
  double added_delay = 0.2;            // seconds, delay attack
};

// Marks round(fraction * node count) nodes as attackers, sampled with the
// given generator. Protected ids (the measured flow's endpoints) are never
// selected.
inline std::map<NodeId, Role> seed_attackers(const std::vector<NodeId>& node_ids, double fraction,
                                             [[maybe_unused]] const AttackProfile& profile,
                                             Rng& rng, const std::set<NodeId>& protected_ids = {}) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw std::invalid_argument("seed_attackers: fraction outside [0,1]");
  }
  const auto count =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(node_ids.size())));
  if (node_ids.size() < count + 2) {
    throw std::invalid_argument("seed_attackers: fewer than 2 honest nodes would remain");
  }
  std::vector<NodeId> eligible;
  for (NodeId id : node_ids) {
    if (!protected_ids.count(id)) eligible.push_back(id);
  }
  std::sort(eligible.begin(), eligible.end());
  if (eligible.size() < count) {
    throw std::invalid_argument("seed_attackers: not enough unprotected nodes");
  }
  // Partial Fisher-Yates: the first `count` slots become the attacker set.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.index(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  std::map<NodeId, Role> roles;
  for (NodeId id : node_ids) roles[id] = Role::Honest;
  for (std::size_t i = 0; i < count; ++i) roles[eligible[i]] = Role::Attacker;
  return roles;
}

// Forged route reply: claims a one-hop route to the requested target with a
// sequence number high enough to outbid any honest reply.
inline Packet attacker_handle_route_request(const Packet& req, const AttackProfile& profile,
                                            std::uint64_t observed_max_seq) {
  if (profile.kind == AttackKind::Delay) {
    throw std::invalid_argument("attacker_handle_route_request: delay profile does not forge");
  }
  if (profile.inflation_amount == 0) {
    throw std::invalid_argument("attacker_handle_route_request: inflation must be positive");
  }
  Packet reply;
  reply.kind = PacketKind::RouteReply;
  reply.origin = req.origin;
  reply.target = req.target;
  reply.hop_count = 1;  // pretends the target is one hop away
  reply.seq_no = observed_max_seq + profile.inflation_amount;
  reply.request_id = req.request_id;
  reply.payload_size = 0;
  reply.created_at = req.created_at;
  return reply;
}

struct AttackerState {
  std::int64_t warmup_remaining = 0;  // grayhole packets still forwarded honestly
};

enum class DataAction : std::uint8_t { Drop, Delay, Forward };

// Decides what a compromised relay does with a data packet.
inline DataAction attacker_handle_data([[maybe_unused]] const Packet& pkt,
                                       const AttackProfile& profile, AttackerState& state,
                                       Rng& rng) {
  switch (profile.kind) {
    case AttackKind::Blackhole:
      return DataAction::Drop;
    case AttackKind::Grayhole:
      if (state.warmup_remaining > 0) {
        state.warmup_remaining -= 1;
        return DataAction::Forward;
      }
      return rng.bernoulli(profile.drop_probability) ? DataAction::Drop : DataAction::Forward;
    case AttackKind::Delay:
      return DataAction::Delay;
    case AttackKind::SeqInflation:
      return DataAction::Forward;
  }
  return DataAction::Forward;
}

}  // namespace manetsec
