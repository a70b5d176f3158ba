#include "tmkit/validate.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "tmkit/index.hpp"

namespace tmkit {
namespace {

std::string describe(const StageRef& ref) {
  std::string out = ref.machine;
  out += '.';
  out += to_string(ref.kind);
  if (!ref.disambiguator.empty()) out += "[" + ref.disambiguator + "]";
  return out;
}

// Create is the only kind that can never receive a flow.
bool accepts_flow(StageKind kind) {
  for (StageKind from : kAllStageKinds) {
    if (legal_flow(from, kind, true) || legal_flow(from, kind, false)) return true;
  }
  return false;
}

std::vector<bool> reach_from(const ModelIndex& index, StageId start, bool forward) {
  std::vector<bool> seen(index.stage_count(), false);
  std::deque<StageId> queue{start};
  seen[start] = true;
  while (!queue.empty()) {
    StageId s = queue.front();
    queue.pop_front();
    for (const auto& l : forward ? index.flow_out(s) : index.flow_in(s)) {
      if (!seen[l.stage]) {
        seen[l.stage] = true;
        queue.push_back(l.stage);
      }
    }
  }
  return seen;
}

class Validator {
 public:
  explicit Validator(const Model& model) : model_(model), index_(model) {}

  std::vector<Diagnostic> run() {
    check_machines();
    check_arcs();
    check_triggers();
    check_stages();
    sort_diagnostics(out_);
    return std::move(out_);
  }

 private:
  void emit(Severity sev, std::string_view code, std::string message, Site site) {
    out_.push_back({sev, std::string(code), std::move(message), std::move(site), std::nullopt});
  }

  bool relaxed() const { return model_.simplified > 0; }

  void check_machines() {
    std::unordered_map<std::string, std::size_t> first;
    for (std::size_t i = 0; i < model_.machines.size(); ++i) {
      const Machine& m = model_.machines[i];
      if (!first.try_emplace(m.id, i).second) {
        emit(Severity::Error, code::kDuplicateMachine, "machine '" + m.id + "' is declared twice",
             Site::machine(m.id));
      }
    }
    for (const Machine& m : model_.machines) {
      if (m.parent) {
        auto p = index_.find_machine(*m.parent);
        if (!p) {
          emit(Severity::Error, code::kMachineTree,
               "machine '" + m.id + "' names unknown parent '" + *m.parent + "'",
               Site::machine(m.id));
        } else {
          const auto& kids = model_.machines[*p].children;
          if (std::find(kids.begin(), kids.end(), m.id) == kids.end()) {
            emit(Severity::Error, code::kMachineTree,
                 "machine '" + *m.parent + "' does not list child '" + m.id + "'",
                 Site::machine(m.id));
          }
        }
      }
      for (const std::string& child : m.children) {
        auto c = index_.find_machine(child);
        if (!c || model_.machines[*c].parent != m.id) {
          emit(Severity::Error, code::kMachineTree,
               "machine '" + m.id + "' lists child '" + child + "' whose parent differs",
               Site::machine(m.id));
        }
      }
      // Walk up the parent chain looking for a cycle through m.
      std::unordered_set<std::string> seen{m.id};
      const Machine* cur = &m;
      while (cur->parent) {
        auto p = index_.find_machine(*cur->parent);
        if (!p) break;
        cur = &model_.machines[*p];
        if (!seen.insert(cur->id).second) {
          if (cur->id == m.id) {
            emit(Severity::Error, code::kMachineTree,
                 "machine '" + m.id + "' is its own ancestor", Site::machine(m.id));
          }
          break;
        }
      }

      std::set<std::pair<StageKind, std::string>> stages;
      for (const Stage& st : m.stages) {
        if (!stages.emplace(st.kind, st.disambiguator).second) {
          StageRef ref{m.id, st.kind, st.disambiguator};
          emit(Severity::Error, code::kDuplicateStage,
               "stage " + describe(ref) + " is declared twice", Site::of_stage(ref));
        }
      }
    }
  }

  bool resolve_endpoint(const StageRef& ref, const char* role, Site site) {
    if (index_.find(ref)) return true;
    std::string why = index_.find_machine(ref.machine) ? "no such stage" : "no such machine";
    emit(Severity::Error, code::kDanglingRef,
         std::string(role) + " " + describe(ref) + " does not resolve (" + why + ")",
         std::move(site));
    return false;
  }

  void check_arcs() {
    for (std::size_t i = 0; i < model_.arcs.size(); ++i) {
      const FlowArc& arc = model_.arcs[i];
      bool ok = resolve_endpoint(arc.from, "flow source", Site::arc(i));
      ok = resolve_endpoint(arc.to, "flow target", Site::arc(i)) && ok;
      if (arc.thing.empty()) {
        emit(Severity::Error, code::kEmptyThing, "flow arc carries no thing label", Site::arc(i));
      }
      if (relaxed()) continue;

      // Kinds and machine ids are known even when an endpoint dangles.
      const bool same = arc.from.machine == arc.to.machine;
      if (legal_flow(arc.from.kind, arc.to.kind, same)) {
        if (ok) check_labels(i);
        continue;
      }
      std::string pair = std::string(to_string(arc.from.kind)) + " -> " +
                         std::string(to_string(arc.to.kind));
      if (same || !accepts_flow(arc.to.kind)) {
        emit(Severity::Error, code::kIllegalAdjacency,
             "illegal flow " + pair + " (" + describe(arc.from) + " -> " + describe(arc.to) + ")",
             Site::arc(i));
      } else {
        emit(Severity::Error, code::kCrossMachineNonTransfer,
             "flow between machines '" + arc.from.machine + "' and '" + arc.to.machine +
                 "' must be transfer -> transfer, found " + pair,
             Site::arc(i));
      }
    }
  }

  // Only process and create may relabel a thing. Elsewhere each
  // (incoming, outgoing) label pair at a stage must agree.
  void check_labels(std::size_t arc_index) {
    const FlowArc& arc = model_.arcs[arc_index];
    StageId src = *index_.find(arc.from);
    StageKind k = index_.kind(src);
    if (k == StageKind::Create || k == StageKind::Process) return;
    for (const auto& in : index_.flow_in(src)) {
      const std::string& incoming = model_.arcs[in.arc].thing;
      if (incoming != arc.thing) {
        emit(Severity::Warning, code::kThingLabelMismatch,
             "'" + arc.thing + "' leaves " + describe(arc.from) + " but arc " +
                 std::to_string(in.arc) + " brings '" + incoming + "'",
             Site::arc(arc_index));
      }
    }
  }

  void check_triggers() {
    for (std::size_t i = 0; i < model_.triggers.size(); ++i) {
      const TriggerArc& trig = model_.triggers[i];
      bool ok = resolve_endpoint(trig.from, "trigger source", Site::trigger(i));
      ok = resolve_endpoint(trig.to, "trigger target", Site::trigger(i)) && ok;
      if (relaxed()) continue;

      if (trig.from.kind != StageKind::Process && trig.from.kind != StageKind::Create) {
        emit(Severity::Warning, code::kTriggerSourceKind,
             "trigger starts at a " + std::string(to_string(trig.from.kind)) +
                 " stage; triggers normally originate at process or create",
             Site::trigger(i));
      }
      if (!legal_trigger_target(trig.to.kind)) {
        emit(Severity::Error, code::kTriggerTargetKind,
             "trigger may not target a " + std::string(to_string(trig.to.kind)) + " stage",
             Site::trigger(i));
      }
      if (!ok) continue;
      StageId f = *index_.find(trig.from);
      StageId t = *index_.find(trig.to);
      if (f == t || reach_from(index_, f, true)[t] || reach_from(index_, f, false)[t]) {
        emit(Severity::Error, code::kTriggerSameFlow,
             "trigger " + describe(trig.from) + " ~> " + describe(trig.to) +
                 " connects stages already joined by flow",
             Site::trigger(i));
      }
    }
  }

  void check_stages() {
    if (relaxed()) return;
    const std::size_t n = index_.stage_count();
    std::vector<bool> live(n, false);
    std::deque<StageId> queue;
    for (StageId s = 0; s < n; ++s) {
      if (index_.kind(s) == StageKind::Create || !index_.trigger_in(s).empty()) {
        live[s] = true;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      StageId s = queue.front();
      queue.pop_front();
      auto visit = [&](StageId t) {
        if (!live[t]) {
          live[t] = true;
          queue.push_back(t);
        }
      };
      for (const auto& l : index_.flow_out(s)) visit(l.stage);
      for (const auto& l : index_.trigger_out(s)) visit(l.stage);
    }
    for (StageId s = 0; s < n; ++s) {
      const StageRef& ref = index_.ref(s);
      if (ref.kind == StageKind::Release && index_.flow_out(s).empty()) {
        emit(Severity::Warning, code::kTerminalRelease,
             describe(ref) + " releases a thing that is never transferred", Site::of_stage(ref));
      }
      if (!live[s]) {
        emit(Severity::Warning, code::kUnreachableStage,
             describe(ref) + " is not reachable from any create stage or trigger",
             Site::of_stage(ref));
      }
    }
  }

  const Model& model_;
  ModelIndex index_;
  std::vector<Diagnostic> out_;
};

}  // namespace

bool legal_flow(StageKind from, StageKind to, bool same_machine) {
  using K = StageKind;
  if (!same_machine) return from == K::Transfer && to == K::Transfer;
  switch (from) {
    case K::Create:
    case K::Receive: return to == K::Process || to == K::Release;
    case K::Process: return to == K::Release;
    case K::Release: return to == K::Transfer;
    case K::Transfer: return to == K::Receive;
  }
  return false;
}

bool legal_trigger_target(StageKind kind) {
  return kind == StageKind::Create || kind == StageKind::Process || kind == StageKind::Transfer;
}

std::vector<Diagnostic> validate(const Model& model) { return Validator(model).run(); }

std::vector<StageRef> flow_reachable(const Model& model, const StageRef& start,
                                     bool follow_triggers) {
  ModelIndex index(model);
  auto s = index.find(start);
  if (!s) {
    throw Error(std::string(code::kDanglingRef), "start stage " + describe(start) +
                                                     " does not resolve");
  }
  std::vector<bool> seen(index.stage_count(), false);
  std::deque<StageId> queue{*s};
  seen[*s] = true;
  while (!queue.empty()) {
    StageId cur = queue.front();
    queue.pop_front();
    auto visit = [&](StageId t) {
      if (!seen[t]) {
        seen[t] = true;
        queue.push_back(t);
      }
    };
    for (const auto& l : index.flow_out(cur)) visit(l.stage);
    if (follow_triggers) {
      for (const auto& l : index.trigger_out(cur)) visit(l.stage);
    }
  }
  std::vector<StageRef> out;
  for (StageId i = 0; i < index.stage_count(); ++i) {
    if (seen[i]) out.push_back(index.ref(i));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tmkit
