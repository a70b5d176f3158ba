#pragma once

// Core metamodel types and the diagnostic record shared by every pass.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tmkit {

enum class StageKind : std::uint8_t { Create, Process, Release, Transfer, Receive };

inline constexpr std::array<StageKind, 5> kAllStageKinds{
    StageKind::Create, StageKind::Process, StageKind::Release, StageKind::Transfer,
    StageKind::Receive};

std::string_view to_string(StageKind kind);
std::optional<StageKind> parse_stage_kind(std::string_view text);

struct Stage {
  StageKind kind = StageKind::Create;
  std::string disambiguator;  // empty when the machine has one stage of this kind
  std::optional<int> number;  // "@N" traceability annotation

  bool operator==(const Stage&) const = default;
};

struct Machine {
  std::string id;
  std::string name;
  std::optional<std::string> parent;
  std::vector<std::string> children;
  std::vector<Stage> stages;

  bool operator==(const Machine&) const = default;
};

/// Address of one stage within its owning machine.
struct StageRef {
  std::string machine;
  StageKind kind = StageKind::Create;
  std::string disambiguator;

  auto operator<=>(const StageRef&) const = default;
  bool operator==(const StageRef&) const = default;
};

struct FlowArc {
  StageRef from;
  StageRef to;
  std::string thing;

  bool operator==(const FlowArc&) const = default;
};

struct TriggerArc {
  StageRef from;
  StageRef to;
  std::optional<std::string> label;

  bool operator==(const TriggerArc&) const = default;
};

/// The static model. `machines` is kept in pre-order: a parent always
/// precedes its children.
struct Model {
  std::string name;
  std::string version;
  std::vector<Machine> machines;
  std::vector<FlowArc> arcs;
  std::vector<TriggerArc> triggers;
  // 0 for an ordinary model, otherwise the simplification level applied.
  int simplified = 0;

  bool operator==(const Model&) const = default;
};

struct Event {
  std::string id;
  std::vector<StageRef> region;
  std::optional<std::uint64_t> time;
  std::optional<std::string> desc;

  bool operator==(const Event&) const = default;
};

struct Chronology {
  std::vector<std::string> events;
  std::vector<std::pair<std::string, std::string>> edges;  // (before, after)

  bool operator==(const Chronology&) const = default;
};

/// A static model together with its dynamic view.
struct Document {
  Model model;
  std::vector<Event> events;
  Chronology chronology;

  bool operator==(const Document&) const = default;
};

// ---------------------------------------------------------------------------
// Diagnostics

enum class Severity : std::uint8_t { Error, Warning };

std::string_view to_string(Severity severity);

struct SourceSpan {
  std::string file;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t length = 0;
  std::size_t offset = 0;  // byte offset of the first character

  bool operator==(const SourceSpan&) const = default;
};

/// What a diagnostic is about.
struct Site {
  enum class Kind : std::uint8_t { None, Machine, Stage, Arc, Trigger, Event, Edge };

  Kind kind = Kind::None;
  std::size_t index = 0;  // position in the list the kind refers to
  std::string name;       // machine or event id
  std::optional<StageRef> stage;

  static Site none() { return {}; }
  static Site machine(std::string id) { return {Kind::Machine, 0, std::move(id), std::nullopt}; }
  static Site of_stage(StageRef ref) { return {Kind::Stage, 0, {}, std::move(ref)}; }
  static Site arc(std::size_t i) { return {Kind::Arc, i, {}, std::nullopt}; }
  static Site trigger(std::size_t i) { return {Kind::Trigger, i, {}, std::nullopt}; }
  static Site event(std::string id) { return {Kind::Event, 0, std::move(id), std::nullopt}; }
  static Site edge(std::size_t i) { return {Kind::Edge, i, {}, std::nullopt}; }

  bool operator==(const Site&) const = default;
};

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  Site site;
  std::optional<SourceSpan> span;

  bool operator==(const Diagnostic&) const = default;
};

/// Stable diagnostic codes. Each code names exactly one rule.
namespace code {
// structure
inline constexpr std::string_view kDuplicateMachine = "DUPLICATE_MACHINE";
inline constexpr std::string_view kMachineTree = "MACHINE_TREE";
inline constexpr std::string_view kDuplicateStage = "DUPLICATE_STAGE";
inline constexpr std::string_view kDanglingRef = "DANGLING_REF";
// static flow rules
inline constexpr std::string_view kIllegalAdjacency = "ILLEGAL_ADJACENCY";
inline constexpr std::string_view kCrossMachineNonTransfer = "CROSS_MACHINE_NON_TRANSFER";
inline constexpr std::string_view kEmptyThing = "EMPTY_THING";
inline constexpr std::string_view kThingLabelMismatch = "THING_LABEL_MISMATCH";
inline constexpr std::string_view kTerminalRelease = "TERMINAL_RELEASE";
inline constexpr std::string_view kUnreachableStage = "UNREACHABLE_STAGE";
inline constexpr std::string_view kTriggerSameFlow = "TRIGGER_SAME_FLOW";
inline constexpr std::string_view kTriggerSourceKind = "TRIGGER_SOURCE_KIND";
inline constexpr std::string_view kTriggerTargetKind = "TRIGGER_TARGET_KIND";
// dynamic rules
inline constexpr std::string_view kDuplicateEvent = "DUPLICATE_EVENT";
inline constexpr std::string_view kEmptyRegion = "EMPTY_REGION";
inline constexpr std::string_view kRegionDisconnected = "REGION_DISCONNECTED";
inline constexpr std::string_view kUnknownEvent = "UNKNOWN_EVENT";
inline constexpr std::string_view kChronologyCycle = "CHRONOLOGY_CYCLE";
inline constexpr std::string_view kChronologyContradictsFlow = "CHRONOLOGY_CONTRADICTS_FLOW";
inline constexpr std::string_view kTimeConflict = "TIME_CONFLICT";
inline constexpr std::string_view kMutualFeed = "MUTUAL_FEED";
inline constexpr std::string_view kIsolatedStage = "ISOLATED_STAGE";
// event composition
inline constexpr std::string_view kEmptyGroup = "EMPTY_GROUP";
inline constexpr std::string_view kUnknownMember = "UNKNOWN_MEMBER";
inline constexpr std::string_view kOverlappingGroups = "OVERLAPPING_GROUPS";
inline constexpr std::string_view kNonContiguousGroup = "NON_CONTIGUOUS_GROUP";
// simulation
inline constexpr std::string_view kStarvedStage = "STARVED_STAGE";
inline constexpr std::string_view kTriggerTargetUnavailable = "TRIGGER_TARGET_UNAVAILABLE";
inline constexpr std::string_view kEventNotEnabled = "EVENT_NOT_ENABLED";
inline constexpr std::string_view kEventAlreadyFired = "EVENT_ALREADY_FIRED";
inline constexpr std::string_view kTraceTruncated = "TRACE_TRUNCATED";
inline constexpr std::string_view kInvalidConfig = "INVALID_CONFIG";
// surface syntax
inline constexpr std::string_view kSyntax = "SYNTAX_ERROR";
inline constexpr std::string_view kInvalidCharacter = "INVALID_CHARACTER";
inline constexpr std::string_view kUnterminatedString = "UNTERMINATED_STRING";
inline constexpr std::string_view kInvalidEscape = "INVALID_ESCAPE";
inline constexpr std::string_view kNestingTooDeep = "NESTING_TOO_DEEP";
}  // namespace code

bool has_errors(const std::vector<Diagnostic>& diagnostics);
const Diagnostic* first_error(const std::vector<Diagnostic>& diagnostics);

/// Orders diagnostics by site (machines, stages, arcs, triggers, events,
/// chronology edges; then index) and code. Stable for equal keys.
void sort_diagnostics(std::vector<Diagnostic>& diagnostics);

/// Raised by operations whose preconditions do not hold.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace tmkit
