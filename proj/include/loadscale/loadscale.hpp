#pragma once

// Umbrella header for the load-coupled C-RAN demand-scaling library.

#include "comp.hpp"
#include "metrics.hpp"
#include "network.hpp"
#include "scenario.hpp"
#include "solver.hpp"
