#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

#include "manetsec/rng.hpp"

namespace manetsec {

using NodeId = std::uint32_t;

struct Position {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

inline double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct WorldConfig {
  double area_width = 1200.0;   // meters
  double area_height = 1200.0;  // meters
  double radio_range = 250.0;   // meters
  std::uint32_t node_count = 50;
};

// Random-waypoint parameters; a node alternates between moving toward its
// waypoint at a fixed speed and pausing once it arrives.
struct MobilityParams {
  double speed_min = 25.0;  // m/s
  double speed_max = 30.0;  // m/s
  double pause_time = 10.0;  // seconds
};

struct MobilityState {
  Position position;
  Position waypoint;
  double speed = 0.0;            // m/s, irrelevant while paused
  double pause_remaining = 0.0;  // seconds
};

// Advances one node by dt seconds. On arrival the node pauses and a fresh
// waypoint and speed are drawn immediately; movement resumes once the pause
// has elapsed. Paused ticks never move the node.
inline MobilityState step_mobility(MobilityState state, double dt, const WorldConfig& world,
                                   const MobilityParams& params, Rng& rng) {
  if (dt <= 0.0) throw std::invalid_argument("step_mobility: dt must be positive");
  if (state.pause_remaining > 0.0) {
    state.pause_remaining = std::max(0.0, state.pause_remaining - dt);
    return state;
  }
  const double dx = state.waypoint.x - state.position.x;
  const double dy = state.waypoint.y - state.position.y;
  const double dist = std::hypot(dx, dy);
  const double step = state.speed * dt;
  if (step >= dist) {
    state.position = state.waypoint;
    state.pause_remaining = params.pause_time;
    state.waypoint.x = rng.uniform(0.0, world.area_width);
    state.waypoint.y = rng.uniform(0.0, world.area_height);
    state.speed = rng.uniform(params.speed_min, params.speed_max);
  } else {
    state.position.x += dx / dist * step;
    state.position.y += dy / dist * step;
  }
  return state;
}

// Disc-model neighbor set: every other node within radio range (inclusive).
inline std::set<NodeId> neighbors(NodeId node_id, const std::map<NodeId, Position>& positions,
                                  double range) {
  const auto it = positions.find(node_id);
  if (it == positions.end()) throw std::out_of_range("neighbors: unknown node id");
  std::set<NodeId> out;
  for (const auto& [other, pos] : positions) {
    if (other != node_id && distance(it->second, pos) <= range) out.insert(other);
  }
  return out;
}

// Radius of the transmitting circle spanned by two points: half their
// Euclidean separation.
inline double transmission_radius(double a0, double b0, double a, double b) {
  return std::hypot(a - a0, b - b0) / 2.0;
}

// Mean number of neighbors inside a disc of the given radius under uniform
// placement: node density times disc area.
inline double expected_neighbor_count(std::uint32_t node_count, const WorldConfig& world,
                                      double radius) {
  if (radius < 0.0) throw std::invalid_argument("expected_neighbor_count: negative radius");
  const double area = world.area_width * world.area_height;
  if (area <= 0.0) throw std::invalid_argument("expected_neighbor_count: non-positive area");
  return static_cast<double>(node_count) / area * std::numbers::pi * radius * radius;
}

// Expected source-to-destination distance for an h-hop path with mean
// per-hop distance d_avg.
inline double expected_path_distance(std::uint32_t hops, double d_avg) {
  if (hops < 1) throw std::invalid_argument("expected_path_distance: hop count must be >= 1");
  if (d_avg < 0.0) throw std::invalid_argument("expected_path_distance: negative hop distance");
  return static_cast<double>(hops) * d_avg;
}

}  // namespace manetsec
