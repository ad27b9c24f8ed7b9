#pragma once

// Umbrella header for the manetsec simulation library.

#include "manetsec/adversary.hpp"
#include "manetsec/config.hpp"
#include "manetsec/detection.hpp"
#include "manetsec/energy.hpp"
#include "manetsec/engine.hpp"
#include "manetsec/event_log.hpp"
#include "manetsec/metrics.hpp"
#include "manetsec/routing.hpp"
#include "manetsec/rng.hpp"
#include "manetsec/sweep.hpp"
#include "manetsec/topology.hpp"
