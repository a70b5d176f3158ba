#pragma once

// Structured export. Keys are lower_snake_case and always emitted in the same
// order; absent optionals are null.

#include <string>

#include "tmkit/model.hpp"
#include "tmkit/sim.hpp"

namespace tmkit {

/// {"name", "version", "simplified", "machines", "arcs", "triggers",
///  "events", "chronology"}
std::string to_json(const Document& document);

/// {"model", "seed", "max_firings", "scenario", "truncated", "records",
///  "instances", "diagnostics"}
std::string to_json(const SimTrace& trace);

}  // namespace tmkit
