#pragma once

#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

/// Whether a flow arc from `from` to `to` is legal, given whether it stays
/// inside one machine. Inside a machine:
///   create  -> process | release
///   receive -> process | release
///   process -> release
///   release -> transfer
///   transfer -> receive
/// Between machines only transfer -> transfer.
bool legal_flow(StageKind from, StageKind to, bool same_machine);

/// Kinds a trigger may target: create, process, transfer.
bool legal_trigger_target(StageKind kind);

/// Static validation. Never throws; all findings come back as diagnostics,
/// sorted with sort_diagnostics. Models marked as simplified skip the
/// stage-kind and flow-component rules and keep the structural ones.
std::vector<Diagnostic> validate(const Model& model);

/// Forward closure from `start` over flow arcs (and trigger arcs when
/// `follow_triggers`). Includes `start`. Sorted by StageRef ordering.
/// Throws Error(DANGLING_REF) when `start` does not resolve.
std::vector<StageRef> flow_reachable(const Model& model, const StageRef& start,
                                     bool follow_triggers);

}  // namespace tmkit
