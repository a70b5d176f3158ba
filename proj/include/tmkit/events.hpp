#pragma once

// The dynamic view. Events are regions of the static model; chronology edges
// can be derived from flow direction.

#include <cstddef>
#include <string>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

/// An event whose region is a single stage.
struct ElementaryEvent {
  std::string id;  // node name of the stage, e.g. "UAV/Control:create[instr]"
  StageRef stage;
  std::string thing;  // label arriving at (or, for sources, leaving) the stage

  bool operator==(const ElementaryEvent&) const = default;
};

struct ElementaryEvents {
  std::vector<ElementaryEvent> events;
  std::vector<Diagnostic> diagnostics;  // ISOLATED_STAGE warnings
};

/// One elementary event per stage touched by a flow or trigger arc, in causal
/// order (ties by machine path, kind, disambiguator). Throws Error when the
/// model has validation errors.
ElementaryEvents elementary_events(const Model& model);

struct EventGroup {
  std::string id;  // empty: members joined with '+'
  std::vector<std::string> members;
};

/// Thrown by compose_events; `group()` is the index of the offending group.
class CompositionError : public Error {
 public:
  CompositionError(std::string code, const std::string& message, std::size_t group)
      : Error(std::move(code), message), group_(group) {}

  std::size_t group() const noexcept { return group_; }

 private:
  std::size_t group_;
};

/// Coarsens elementary events. Groups may not overlap, and each one must be a
/// non-empty flow path in elementary order. Ungrouped
/// elementary events pass through as singletons. Output is ordered by each
/// event's first stage in elementary order.
std::vector<Event> compose_events(const Model& model, const std::vector<EventGroup>& groups);

/// Splits events back into the elementary events of their region stages, in
/// elementary order.
std::vector<ElementaryEvent> flatten(const Model& model, const std::vector<Event>& events);

/// Checks regions against the model and the chronology against flow. Never throws.
std::vector<Diagnostic> validate_dynamic(const Model& model, const std::vector<Event>& events,
                                         const Chronology& chronology);

struct InferredPrecedence {
  Chronology chronology;
  std::vector<Diagnostic> diagnostics;  // MUTUAL_FEED warnings
};

/// Chronology implied by flow direction between event regions, transitively
/// reduced. Throws Error when a region stage does not resolve.
InferredPrecedence infer_precedence(const Model& model, const std::vector<Event>& events);

}  // namespace tmkit
