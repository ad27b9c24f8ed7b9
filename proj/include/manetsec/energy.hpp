#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "manetsec/topology.hpp"

namespace manetsec {

// Energy bookkeeping is integer microjoules throughout so that the ledger
// balances exactly against the summed charges, with no float drift.
using MicroJoules = std::int64_t;

inline MicroJoules to_uj(double joules) { return static_cast<MicroJoules>(std::llround(joules * 1e6)); }
inline double to_j(MicroJoules uj) { return static_cast<double>(uj) / 1e6; }

enum class EnergyAction : std::uint8_t { Transmit, Receive, IdleTick };

struct EnergyCosts {
  MicroJoules transmit_uj = 20000;  // 0.02 J per packet
  MicroJoules receive_uj = 10000;   // 0.01 J per packet
  MicroJoules idle_uj = 0;
};

struct EnergyLedger {
  std::map<NodeId, MicroJoules> initial;
  std::map<NodeId, MicroJoules> residual;
  MicroJoules charged_total = 0;  // sum of every applied charge

  void add_node(NodeId id, MicroJoules energy) {
    initial[id] = energy;
    residual[id] = energy;
  }
};

// Applies one action's cost, floored at zero. Returns the amount actually
// drained so the charge log stays exact even at the floor.
inline MicroJoules charge_energy(EnergyLedger& ledger, NodeId node, EnergyAction action,
                                 [[maybe_unused]] std::uint32_t size_bytes,
                                 const EnergyCosts& costs) {
  const auto it = ledger.residual.find(node);
  if (it == ledger.residual.end()) throw std::out_of_range("charge_energy: unknown node");
  MicroJoules cost = 0;
  switch (action) {
    case EnergyAction::Transmit: cost = costs.transmit_uj; break;
    case EnergyAction::Receive: cost = costs.receive_uj; break;
    case EnergyAction::IdleTick: cost = costs.idle_uj; break;
  }
  const MicroJoules applied = std::min(cost, it->second);
  it->second -= applied;
  ledger.charged_total += applied;
  return applied;
}

// Total energy drained across the network: sum of initial minus residual.
inline MicroJoules consumed_uj(const EnergyLedger& ledger) {
  MicroJoules total = 0;
  for (const auto& [id, init] : ledger.initial) total += init - ledger.residual.at(id);
  return total;
}

}  // namespace manetsec
