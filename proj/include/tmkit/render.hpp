#pragma once

// DOT emission plus the granularity-reducing simplification transform.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

enum class RankDir { LR, TB };

struct RenderOptions {
  bool show_triggers = true;
  std::optional<std::vector<std::string>> overlay;  // event ids drawn as regions
  RankDir rankdir = RankDir::LR;
};

/// Machines become nested clusters named "cluster_<slash path>", stages become
/// nodes named "<slash path>:<kind>[<disambiguator>]". Flows are solid edges
/// labeled with the thing; triggers are dashed. Overlay events become dashed
/// sub-clusters labeled with the event id inside each machine they touch; a
/// stage shared by several overlay events is drawn in the first one listed.
/// Throws Error when the model has errors or an overlay id is unknown.
std::string to_dot(const Model& model, const std::vector<Event>& events = {},
                   const RenderOptions& options = {});

/// One node per chronology event (id and, when known, description), one edge
/// per precedence pair. Throws Error on a cycle.
std::string chronology_dot(const Chronology& chronology, const std::vector<Event>& events = {},
                           RankDir rankdir = RankDir::LR);

/// Level 1 collapses each Release -> Transfer => Transfer -> Receive hop into
/// one Release -> Receive arc carrying the hop's thing, provided both transfer
/// stages have exactly one flow in, one flow out and no triggers. Level 2 then
/// reduces every machine that owns stages to a single process stage and keeps
/// one flow (and one trigger) arc per ordered machine pair. The result is
/// marked simplified when anything changed. Throws Error when the model has
/// errors or the level is not 1 or 2.
Model simplify(const Model& model, int level);

/// Ordered pairs (A, B), A != B, of innermost machines such that B is
/// reachable from A in the graph with an edge for every flow arc between
/// stages of different machines.
std::set<std::pair<std::string, std::string>> machine_reachability(const Model& model);

}  // namespace tmkit
