#include "tmkit/sim.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "tmkit/events.hpp"
#include "tmkit/index.hpp"
#include "tmkit/validate.hpp"

namespace tmkit {

struct SimState::Context {
  Context(const Model& m, const std::vector<Event>& e, const Chronology& c, const SimConfig& cfg)
      : model(m), events(e), chronology(c), config(cfg), index(model) {}

  Model model;
  std::vector<Event> events;
  Chronology chronology;
  SimConfig config;
  ModelIndex index;  // refers to `model` above; Context never moves

  std::map<std::string, std::size_t> by_id;
  std::vector<bool> enabled;                    // per event: in the scenario
  std::vector<std::vector<std::size_t>> preds;  // scenario events that must fire first
  std::vector<std::vector<StageId>> order;      // region stages, causal order
  std::vector<std::vector<std::size_t>> holders;  // per stage: scenario events covering it
  std::vector<std::string> schedule;
};

namespace {

void refuse_on_errors(const std::vector<Diagnostic>& found, std::string_view what) {
  if (const Diagnostic* d = first_error(found)) {
    throw Error(d->code, std::string(what) + ": " + d->message);
  }
}

std::string label_of(const ModelIndex& index, StageId s) {
  auto out = index.flow_out(s);
  if (out.empty()) return {};
  return index.model().arcs[out.front().arc].thing;
}

}  // namespace

SimState::SimState(const Model& model, const std::vector<Event>& events,
                   const Chronology& chronology, const SimConfig& config) {
  if (config.max_firings == 0) {
    throw Error(std::string(code::kInvalidConfig), "max_firings must be at least 1");
  }
  refuse_on_errors(validate(model), "model does not validate");
  refuse_on_errors(validate_dynamic(model, events, chronology), "events do not validate");

  auto ctx = std::make_shared<Context>(model, events, chronology, config);
  const std::size_t n = events.size();
  for (std::size_t e = 0; e < n; ++e) ctx->by_id.emplace(events[e].id, e);

  ctx->enabled.assign(n, !config.scenario.has_value());
  if (config.scenario) {
    for (const std::string& id : *config.scenario) {
      auto it = ctx->by_id.find(id);
      if (it == ctx->by_id.end()) {
        throw Error(std::string(code::kUnknownEvent), "scenario names unknown event '" + id + "'");
      }
      ctx->enabled[it->second] = true;
    }
  }

  // Transitive chronology predecessors, restricted to the scenario.
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [a, b] : chronology.edges) succ[ctx->by_id.at(a)].push_back(ctx->by_id.at(b));
  ctx->preds.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    if (!ctx->enabled[a]) continue;
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack(succ[a].begin(), succ[a].end());
    while (!stack.empty()) {
      std::size_t b = stack.back();
      stack.pop_back();
      if (seen[b]) continue;
      seen[b] = true;
      if (ctx->enabled[b]) ctx->preds[b].push_back(a);
      stack.insert(stack.end(), succ[b].begin(), succ[b].end());
    }
  }

  // Kahn's algorithm; the smallest ready id goes first.
  std::vector<std::size_t> missing(n, 0);
  std::vector<std::vector<std::size_t>> unlocks(n);
  std::set<std::string> ready;
  for (std::size_t b = 0; b < n; ++b) {
    if (!ctx->enabled[b]) continue;
    missing[b] = ctx->preds[b].size();
    for (std::size_t a : ctx->preds[b]) unlocks[a].push_back(b);
    if (missing[b] == 0) ready.insert(events[b].id);
  }
  while (!ready.empty()) {
    std::string id = *ready.begin();
    ready.erase(ready.begin());
    ctx->schedule.push_back(id);
    for (std::size_t b : unlocks[ctx->by_id.at(id)]) {
      if (--missing[b] == 0) ready.insert(events[b].id);
    }
  }

  const ModelIndex& index = ctx->index;
  ctx->order.resize(n);
  ctx->holders.resize(index.stage_count());
  for (std::size_t e = 0; e < n; ++e) {
    std::vector<StageId> region;
    for (const StageRef& ref : events[e].region) region.push_back(*index.find(ref));
    ctx->order[e] = causal_order(index, region);
    if (!ctx->enabled[e]) continue;
    for (StageId s : ctx->order[e]) ctx->holders[s].push_back(e);
  }

  inbox_.resize(index.stage_count());
  done_.assign(n, false);
  trace_.model = model.name;
  trace_.seed = config.seed;
  trace_.max_firings = config.max_firings;
  trace_.scenario = config.scenario;
  ctx_ = std::move(ctx);
}

const std::vector<std::string>& SimState::schedule() const { return ctx_->schedule; }

bool SimState::fired(const std::string& event_id) const {
  auto it = ctx_->by_id.find(event_id);
  return it != ctx_->by_id.end() && done_[it->second];
}

std::vector<std::string> SimState::unmet(const std::string& event_id) const {
  std::vector<std::string> out;
  auto it = ctx_->by_id.find(event_id);
  if (it == ctx_->by_id.end()) return out;
  for (std::size_t p : ctx_->preds[it->second]) {
    if (!done_[p]) out.push_back(ctx_->events[p].id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SimState step(SimState state, const std::string& event_id) {
  const auto& ctx = *state.ctx_;
  const ModelIndex& index = ctx.index;
  auto it = ctx.by_id.find(event_id);
  if (it == ctx.by_id.end() || !ctx.enabled[it->second]) {
    throw Error(std::string(code::kUnknownEvent),
                "event '" + event_id + "' is not part of the scenario");
  }
  const std::size_t e = it->second;
  if (state.done_[e]) {
    throw Error(std::string(code::kEventAlreadyFired), "event '" + event_id + "' already fired");
  }
  if (auto unmet = state.unmet(event_id); !unmet.empty()) {
    std::string list;
    for (const auto& u : unmet) list += (list.empty() ? "" : ", ") + u;
    throw Error(std::string(code::kEventNotEnabled),
                "event '" + event_id + "' has unmet predecessors: " + list);
  }
  if (state.trace_.truncated) {
    throw Error(std::string(code::kTraceTruncated), "the firing cap was reached");
  }

  SimTrace& trace = state.trace_;
  TraceRecord record;
  record.tick = trace.records.size();
  record.event = event_id;
  record.time = ctx.events[e].time;
  std::set<StageId> here(ctx.order[e].begin(), ctx.order[e].end());

  auto warn = [&](std::string_view code, std::string message) {
    trace.diagnostics.push_back({Severity::Warning, std::string(code), std::move(message),
                                 Site::event(event_id), std::nullopt});
  };

  // A trigger target can still fire if it is in this region or in the region
  // of a scenario event that has not fired yet.
  auto available = [&](StageId t) {
    if (here.count(t)) return true;
    const auto& hs = ctx.holders[t];
    return std::any_of(hs.begin(), hs.end(),
                       [&](std::size_t h) { return h != e && !state.done_[h]; });
  };

  auto fire = [&](StageId s, std::uint64_t instance) {
    if (state.firings_ >= ctx.config.max_firings) {
      trace.truncated = true;
      return false;
    }
    ++state.firings_;
    record.firings.push_back({index.ref(s), index.node_name(s), instance});
    for (const auto& l : index.flow_out(s)) state.inbox_[l.stage].push_back(instance);
    for (const auto& l : index.trigger_out(s)) {
      if (!available(l.stage)) {
        warn(code::kTriggerTargetUnavailable,
             index.node_name(s) + " triggers " + index.node_name(l.stage) +
                 ", which no pending event covers");
        continue;
      }
      // A create target mints its own instance; others carry the trigger's.
      state.inbox_[l.stage].push_back(index.kind(l.stage) == StageKind::Create ? 0 : instance);
    }
    return true;
  };

  for (StageId s : ctx.order[e]) {
    auto& inbox = state.inbox_[s];
    if (index.kind(s) == StageKind::Create) {
      inbox.clear();
      std::uint64_t id = state.next_instance_;
      if (!fire(s, id)) break;
      ++state.next_instance_;
      trace.instances.push_back({id, label_of(index, s), event_id, index.ref(s)});
      continue;
    }
    if (inbox.empty()) {
      warn(code::kStarvedStage, index.node_name(s) + " has no instance to work on");
      continue;
    }
    bool ok = true;
    while (!inbox.empty() && ok) {
      std::uint64_t id = inbox.front();
      ok = fire(s, id);
      if (ok) inbox.pop_front();
    }
    if (!ok) break;
  }

  state.done_[e] = true;
  trace.records.push_back(std::move(record));
  return state;
}

SimTrace simulate(const Model& model, const std::vector<Event>& events,
                  const Chronology& chronology, const SimConfig& config) {
  SimState state(model, events, chronology, config);
  const std::vector<std::string> order = state.schedule();
  for (const std::string& id : order) {
    if (state.trace().truncated) break;
    state = step(std::move(state), id);
  }
  return state.trace();
}

std::string serialize_trace(const SimTrace& trace) {
  std::ostringstream out;
  out << "# model " << trace.model << '\n';
  out << "# seed " << trace.seed << '\n';
  out << "# max_firings " << trace.max_firings << '\n';
  out << "# scenario";
  if (!trace.scenario) {
    out << " all";
  } else {
    for (const auto& id : *trace.scenario) out << ' ' << id;
  }
  out << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.tick << '\t' << r.event << '\t';
    for (std::size_t i = 0; i < r.firings.size(); ++i) {
      if (i) out << ' ';
      out << r.firings[i].node << '#' << r.firings[i].instance;
    }
    out << '\n';
  }
  if (trace.truncated) out << "# truncated\n";
  return out.str();
}

std::vector<std::string> audit_trace(const Model& model, const SimTrace& trace) {
  ModelIndex index(model);
  std::vector<std::string> problems;
  std::map<std::uint64_t, std::set<StageId>> visited;  // instance -> stages seen so far
  std::size_t creates = 0;
  std::size_t last_tick = 0;

  for (const TraceRecord& r : trace.records) {
    if (r.tick < last_tick) {
      problems.push_back("tick " + std::to_string(r.tick) + " goes backwards");
    }
    last_tick = r.tick;
    for (const Firing& f : r.firings) {
      auto s = index.find(f.stage);
      if (!s) {
        problems.push_back(r.event + ": firing at unknown stage " + f.node);
        continue;
      }
      auto& seen = visited[f.instance];
      if (index.kind(*s) == StageKind::Create) {
        ++creates;
        if (!seen.empty()) {
          problems.push_back(r.event + ": instance #" + std::to_string(f.instance) +
                             " minted twice");
        }
        seen.insert(*s);
        continue;
      }
      bool fed = false;
      for (const auto& l : index.flow_in(*s)) fed = fed || seen.count(l.stage);
      for (const auto& l : index.trigger_in(*s)) fed = fed || seen.count(l.stage);
      if (!fed) {
        problems.push_back(r.event + ": instance #" + std::to_string(f.instance) + " reaches " +
                           f.node + " without passing a predecessor");
      }
      seen.insert(*s);
    }
  }
  if (visited.size() != creates) {
    problems.push_back(std::to_string(visited.size()) + " instances but " +
                       std::to_string(creates) + " create firings");
  }
  return problems;
}

}  // namespace tmkit
