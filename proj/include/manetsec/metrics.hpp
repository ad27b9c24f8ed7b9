#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>

#include "manetsec/adversary.hpp"
#include "manetsec/energy.hpp"

namespace manetsec {

struct DetectionRates {
  double recall = 0.0;
  double precision = 0.0;
  double false_positive_rate = 0.0;
  bool degenerate = false;  // set when any denominator was zero
};

struct MetricsReport {
  double pdr = 0.0;                  // received / sent
  double throughput_fraction = 0.0;  // received / generated
  double throughput_bps = 0.0;       // delivered payload bits / sim time
  double energy_consumed_j = 0.0;
  DetectionRates detection;
  double mean_delay_s = 0.0;
  std::uint64_t sent = 0;       // data packets dispatched into the network
  std::uint64_t received = 0;   // data packets delivered at their target
  std::uint64_t generated = 0;  // data packets emitted by the traffic sources
};

// Packet delivery ratio. Reported as a ratio; multiply by 100 for percent.
inline double pdr(std::uint64_t received, std::uint64_t sent) {
  if (sent == 0) throw std::domain_error("pdr: no packets sent");
  return static_cast<double>(received) / static_cast<double>(sent);
}

struct Throughput {
  double fraction = 0.0;
  double bits_per_second = 0.0;
};

// Delivered fraction including packets that sat in a source buffer before
// dispatch, plus the raw delivered bit rate. The fraction equals the PDR
// whenever nothing is left buffered at the end of the run.
inline Throughput throughput(std::uint64_t received, std::uint64_t generated,
                             std::uint64_t delivered_bits, double sim_time_s) {
  if (generated == 0) throw std::domain_error("throughput: no packets generated");
  if (sim_time_s <= 0.0) throw std::domain_error("throughput: non-positive duration");
  Throughput t;
  t.fraction = static_cast<double>(received) / static_cast<double>(generated);
  t.bits_per_second = static_cast<double>(delivered_bits) / sim_time_s;
  return t;
}

inline double energy_consumption(const EnergyLedger& ledger) { return to_j(consumed_uj(ledger)); }

// Compares end-of-run verdicts against ground truth. Rates with an empty
// denominator are reported as 0 with the degenerate flag set.
inline DetectionRates detection_metrics(const std::map<NodeId, bool>& verdicts,
                                        const std::map<NodeId, Role>& ground_truth) {
  if (verdicts.size() != ground_truth.size()) {
    throw std::invalid_argument("detection_metrics: key sets differ");
  }
  std::uint64_t attackers = 0, honest = 0, true_pos = 0, false_pos = 0;
  for (const auto& [id, role] : ground_truth) {
    const auto it = verdicts.find(id);
    if (it == verdicts.end()) throw std::invalid_argument("detection_metrics: key sets differ");
    const bool flagged = it->second;
    if (role == Role::Attacker) {
      ++attackers;
      if (flagged) ++true_pos;
    } else {
      ++honest;
      if (flagged) ++false_pos;
    }
  }
  DetectionRates rates;
  const std::uint64_t flagged_total = true_pos + false_pos;
  if (attackers > 0) {
    rates.recall = static_cast<double>(true_pos) / static_cast<double>(attackers);
  } else {
    rates.degenerate = true;
  }
  if (flagged_total > 0) {
    rates.precision = static_cast<double>(true_pos) / static_cast<double>(flagged_total);
  } else {
    rates.degenerate = true;
  }
  if (honest > 0) {
    rates.false_positive_rate = static_cast<double>(false_pos) / static_cast<double>(honest);
  } else {
    rates.degenerate = true;
  }
  return rates;
}

}  // namespace manetsec
