#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "manetsec/topology.hpp"

namespace manetsec {

// --- neighbor-ratio scan ----------------------------------------------------

struct NeighborStats {
  NodeId node = 0;
  std::uint32_t own_degree = 0;
  std::vector<std::uint32_t> neighbor_degrees;
  double ratio = 0.0;
};

// Own degree divided by the mean degree of the node's neighbors; 0 for an
// isolated node.
inline double neighbor_ratio(std::int64_t own_degree,
                             const std::vector<std::int64_t>& neighbor_degrees) {
  if (own_degree < 0) throw std::domain_error("neighbor_ratio: negative degree");
  if (static_cast<std::size_t>(own_degree) != neighbor_degrees.size()) {
    throw std::invalid_argument("neighbor_ratio: degree must match neighbor count");
  }
  if (own_degree == 0) return 0.0;
  std::int64_t sum = 0;
  for (std::int64_t d : neighbor_degrees) {
    if (d < 0) throw std::domain_error("neighbor_ratio: negative degree");
    sum += d;
  }
  const double mean = static_cast<double>(sum) / static_cast<double>(own_degree);
  if (mean <= 0.0) return 0.0;
  return static_cast<double>(own_degree) / mean;
}

// Flags every node whose neighbor ratio exceeds the threshold. The adjacency
// must be symmetric (it comes from an undirected disc graph).
inline std::set<NodeId> tnr_scan(const std::map<NodeId, std::set<NodeId>>& adjacency,
                                 double threshold) {
  for (const auto& [node, nbrs] : adjacency) {
    for (NodeId n : nbrs) {
      const auto it = adjacency.find(n);
      if (it == adjacency.end() || !it->second.count(node)) {
        throw std::invalid_argument("tnr_scan: adjacency is not symmetric");
      }
    }
  }
  std::set<NodeId> suspicious;
  for (const auto& [node, nbrs] : adjacency) {
    std::vector<std::int64_t> degrees;
    degrees.reserve(nbrs.size());
    for (NodeId n : nbrs) degrees.push_back(static_cast<std::int64_t>(adjacency.at(n).size()));
    if (neighbor_ratio(static_cast<std::int64_t>(nbrs.size()), degrees) > threshold) {
      suspicious.insert(node);
    }
  }
  return suspicious;
}

// --- sliding windows ---------------------------------------------------------

struct Sl1Entry {
  NodeId peer = 0;
  double time = 0.0;           // seconds
  std::uint32_t density = 0;   // observer's neighbor count at record time
  std::uint64_t seq_no = 0;    // advertised destination sequence number
};

struct Sl2Entry {
  NodeId peer = 0;
  double time = 0.0;           // seconds
  std::int64_t seq_delta = 0;  // reply seq minus matching request seq
};

// Two bounded histories of overheard control traffic: SL1 keeps reply
// metadata, SL2 keeps reply/request sequence-number deltas. Oldest entries
// are evicted first once a window is full.
struct SlidingWindows {
  std::deque<Sl1Entry> sl1;
  std::deque<Sl2Entry> sl2;
  std::uint32_t capacity = 8;
};

// Summary of one overheard route reply. The matched request sequence number
// is present when the observer saw the corresponding request.
struct OverheardReply {
  NodeId peer = 0;
  std::uint64_t advertised_seq = 0;
  std::optional<std::uint64_t> matched_request_seq;
};

inline SlidingWindows record_overheard(SlidingWindows windows, const OverheardReply& msg,
                                       double clock, std::uint32_t local_density) {
  windows.sl1.push_back({msg.peer, clock, local_density, msg.advertised_seq});
  while (windows.sl1.size() > windows.capacity) windows.sl1.pop_front();
  if (msg.matched_request_seq) {
    const std::int64_t delta = static_cast<std::int64_t>(msg.advertised_seq) -
                               static_cast<std::int64_t>(*msg.matched_request_seq);
    windows.sl2.push_back({msg.peer, clock, delta});
    while (windows.sl2.size() > windows.capacity) windows.sl2.pop_front();
  }
  return windows;
}

struct AnomalyParams {
  std::int64_t delta_threshold = 100;
  std::uint32_t min_hits = 3;
};

enum class PeerVerdict : std::uint8_t { Normal, Suspicious };

// A peer is suspicious once at least min_hits of its recorded sequence
// deltas exceed the threshold.
inline std::map<NodeId, PeerVerdict> detect_sequence_anomaly(const SlidingWindows& windows,
                                                             const AnomalyParams& params) {
  std::map<NodeId, std::uint32_t> hits;
  std::map<NodeId, PeerVerdict> verdicts;
  for (const auto& e : windows.sl2) {
    verdicts.emplace(e.peer, PeerVerdict::Normal);
    if (e.seq_delta > params.delta_threshold) hits[e.peer] += 1;
  }
  for (const auto& [peer, count] : hits) {
    if (count >= params.min_hits) verdicts[peer] = PeerVerdict::Suspicious;
  }
  return verdicts;
}

// --- forwarding supervision ---------------------------------------------------

enum class ForwardObservation : std::uint8_t { Forwarded, Violated };

// A handed-over packet must be overheard leaving the neighbor by
// handed_at + deadline; the bound is inclusive.
inline ForwardObservation monitor_forwarding([[maybe_unused]] NodeId peer, double handed_at,
                                             std::optional<double> overheard_relay_at,
                                             double deadline) {
  if (deadline <= 0.0) throw std::invalid_argument("monitor_forwarding: deadline must be positive");
  if (overheard_relay_at && *overheard_relay_at <= handed_at + deadline) {
    return ForwardObservation::Forwarded;
  }
  return ForwardObservation::Violated;
}

// --- trust records ------------------------------------------------------------

enum class Observation : std::uint8_t { Forwarded, Violated, Anomaly, TnrSuspect };

inline const char* to_string(Observation o) {
  switch (o) {
    case Observation::Forwarded: return "forwarded";
    case Observation::Violated: return "violated";
    case Observation::Anomaly: return "anomaly";
    case Observation::TnrSuspect: return "tnr-suspect";
  }
  return "?";
}

struct TrustRecord {
  NodeId peer = 0;
  double trust = 0.5;
  bool blacklisted = false;
  double last_update = 0.0;      // seconds
  double quarantine_until = 0.0;  // seconds, meaningful while blacklisted
};

struct TrustParams {
  double reward = 0.05;
  double penalty = 0.2;
  double blacklist_threshold = 0.2;
  double initial_trust = 0.5;
  double quarantine_period = 50.0;  // seconds
  double probation_trust = 0.3;
};

// Releases an expired quarantine: the peer returns at probation trust.
inline TrustRecord release_if_quarantine_elapsed(TrustRecord record, const TrustParams& params,
                                                 double now) {
  if (record.blacklisted && now >= record.quarantine_until) {
    record.blacklisted = false;
    record.trust = params.probation_trust;
    record.last_update = now;
  }
  return record;
}

// Applies one observation. Rewards and penalties clamp trust to [0,1]; a
// node whose trust falls below the threshold is blacklisted and stays so for
// the quarantine period, during which further observations are ignored.
inline TrustRecord update_trust(TrustRecord record, Observation observation,
                                const TrustParams& params, double now) {
  record = release_if_quarantine_elapsed(record, params, now);
  if (record.blacklisted) {
    record.last_update = now;
    return record;
  }
  if (observation == Observation::Forwarded) {
    record.trust = std::min(1.0, record.trust + params.reward);
  } else {
    record.trust = std::max(0.0, record.trust - params.penalty);
  }
  if (record.trust < params.blacklist_threshold) {
    record.blacklisted = true;
    record.quarantine_until = now + params.quarantine_period;
  }
  record.last_update = now;
  return record;
}

// --- relay admission and analytic probabilities -------------------------------

// A node qualifies as a relay while its residual energy is at or above the
// admission threshold.
inline bool energy_admission(double residual_j, double threshold_j = 0.5) {
  if (residual_j < 0.0) throw std::domain_error("energy_admission: negative residual energy");
  return residual_j >= threshold_j;
}

inline double prob_misbehaving(std::uint32_t misbehaving, std::uint32_t total) {
  if (total == 0) throw std::domain_error("prob_misbehaving: empty network");
  if (misbehaving > total) throw std::domain_error("prob_misbehaving: count exceeds network size");
  return static_cast<double>(misbehaving) / static_cast<double>(total);
}

// Probability that none of the h-1 intermediate nodes of an h-hop path
// misbehaves, assuming independent per-node misbehavior.
inline double prob_secure_path(std::uint32_t misbehaving, std::uint32_t total, std::uint32_t hops) {
  if (hops < 1) throw std::domain_error("prob_secure_path: hop count must be >= 1");
  const double pm = prob_misbehaving(misbehaving, total);
  return std::pow(1.0 - pm, static_cast<double>(hops - 1));
}

struct SecurityAnalytics {
  std::uint32_t misbehaving = 0;  // Nm
  std::uint32_t total = 0;        // Nn
  std::uint32_t mean_hops = 1;    // h

  double prob_misbehaving() const { return manetsec::prob_misbehaving(misbehaving, total); }
  double prob_secure_path() const {
    return manetsec::prob_secure_path(misbehaving, total, mean_hops);
  }
};

}  // namespace manetsec
