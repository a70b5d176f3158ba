#pragma once

// Deterministic execution of a document's dynamic view. Events fire in a
// topological order of the chronology; inside an event, region stages fire in
// causal order, moving numbered thing instances along flow arcs.

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

struct SimConfig {
  std::optional<std::vector<std::string>> scenario;  // enabled event ids; nullopt = all
  std::uint64_t seed = 0;  // recorded only; execution does not depend on it
  std::size_t max_firings = 10000;
};

struct ThingInstance {
  std::uint64_t id = 0;
  std::string label;
  std::string birth_event;
  StageRef birth_stage;

  bool operator==(const ThingInstance&) const = default;
};

struct Firing {
  StageRef stage;
  std::string node;  // "UAV/Control:create[instr]"
  std::uint64_t instance = 0;

  bool operator==(const Firing&) const = default;
};

struct TraceRecord {
  std::size_t tick = 0;
  std::string event;
  std::optional<std::uint64_t> time;  // echoed from the event, never reorders
  std::vector<Firing> firings;

  bool operator==(const TraceRecord&) const = default;
};

struct SimTrace {
  std::string model;
  std::uint64_t seed = 0;
  std::size_t max_firings = 0;
  std::optional<std::vector<std::string>> scenario;
  std::vector<TraceRecord> records;
  std::vector<ThingInstance> instances;
  bool truncated = false;
  std::vector<Diagnostic> diagnostics;  // STARVED_STAGE, TRIGGER_TARGET_UNAVAILABLE

  bool operator==(const SimTrace&) const = default;
};

/// Simulation state between events. Copies are cheap to make and independent;
/// the document itself is shared read-only.
class SimState {
 public:
  /// Throws Error when the document is invalid or the configuration names
  /// something that does not exist. max_firings must be positive.
  SimState(const Model& model, const std::vector<Event>& events, const Chronology& chronology,
           const SimConfig& config = {});

  const SimTrace& trace() const noexcept { return trace_; }

  /// Scenario events in firing order: chronology-topological, ties by id.
  const std::vector<std::string>& schedule() const;

  bool fired(const std::string& event_id) const;
  /// Scenario predecessors of `event_id` that have not fired yet.
  std::vector<std::string> unmet(const std::string& event_id) const;

  struct Context;

 private:
  friend SimState step(SimState state, const std::string& event_id);

  std::shared_ptr<const Context> ctx_;
  std::vector<std::deque<std::uint64_t>> inbox_;  // per stage, FIFO of instance ids
  std::vector<bool> done_;                         // per event
  std::uint64_t next_instance_ = 1;
  std::size_t firings_ = 0;
  SimTrace trace_;
};

/// Fires one event. Throws Error when the event cannot fire now; the message
/// for a premature step names the unmet predecessors.
SimState step(SimState state, const std::string& event_id);

/// Left fold of step over the schedule, stopping early on truncation.
SimTrace simulate(const Model& model, const std::vector<Event>& events,
                  const Chronology& chronology, const SimConfig& config = {});

/// Text form: "# key value" header lines, then one
/// "tick<TAB>event<TAB>node#instance ..." line per record, then
/// "# truncated" when the firing cap was hit.
std::string serialize_trace(const SimTrace& trace);

/// Re-reads the model and reports every violation of trace soundness: each
/// instance is born at a create firing, and every later firing of it follows
/// an earlier firing at a flow or trigger predecessor. Empty when sound.
std::vector<std::string> audit_trace(const Model& model, const SimTrace& trace);

}  // namespace tmkit
