#pragma once

// Convenience umbrella header for the core library (no HTTP or CLI).

#include "analysis.hpp"
#include "catalog.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "model.hpp"
#include "render.hpp"
