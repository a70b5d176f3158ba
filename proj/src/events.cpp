#include "tmkit/events.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "tmkit/index.hpp"
#include "tmkit/validate.hpp"

namespace tmkit {
namespace {

std::string describe(const StageRef& ref) {
  std::string out = ref.machine + "." + std::string(to_string(ref.kind));
  if (!ref.disambiguator.empty()) out += "[" + ref.disambiguator + "]";
  return out;
}

void require_valid(const Model& model) {
  auto found = validate(model);
  if (const Diagnostic* d = first_error(found)) {
    throw Error(d->code, "model does not validate: " + d->message);
  }
}

struct Elementary {
  std::vector<ElementaryEvent> events;
  std::vector<Diagnostic> diagnostics;
  std::vector<StageId> stages;                         // parallel to events
  std::unordered_map<StageId, std::size_t> position;  // stage -> index in events
};

Elementary extract(const ModelIndex& index) {
  const Model& model = index.model();
  Elementary out;
  std::vector<StageId> touched;
  for (StageId s = 0; s < index.stage_count(); ++s) {
    bool linked = !index.flow_in(s).empty() || !index.flow_out(s).empty() ||
                  !index.trigger_in(s).empty() || !index.trigger_out(s).empty();
    if (linked) {
      touched.push_back(s);
    } else {
      out.diagnostics.push_back({Severity::Warning, std::string(code::kIsolatedStage),
                                 describe(index.ref(s)) + " touches no flow or trigger",
                                 Site::of_stage(index.ref(s)), std::nullopt});
    }
  }
  out.stages = causal_order(index, touched);
  for (StageId s : out.stages) {
    std::string thing;
    if (!index.flow_in(s).empty()) {
      thing = model.arcs[index.flow_in(s).front().arc].thing;
    } else if (!index.flow_out(s).empty()) {
      thing = model.arcs[index.flow_out(s).front().arc].thing;
    }
    out.position[s] = out.events.size();
    out.events.push_back({index.node_name(s), index.ref(s), std::move(thing)});
  }
  return out;
}

// Event-level graph: which events' regions feed which by flow arcs.
struct FeedGraph {
  std::size_t n = 0;
  std::vector<std::set<std::size_t>> feeds;  // direct feed relation
  std::vector<std::vector<bool>> reach;      // transitive closure (non-reflexive)
};

std::vector<std::vector<bool>> closure(const std::vector<std::set<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a) {
    std::deque<std::size_t> queue(adj[a].begin(), adj[a].end());
    while (!queue.empty()) {
      std::size_t b = queue.front();
      queue.pop_front();
      if (reach[a][b]) continue;
      reach[a][b] = true;
      for (std::size_t c : adj[b]) {
        if (!reach[a][c]) queue.push_back(c);
      }
    }
  }
  return reach;
}

// `members[e]` holds the resolved stages of event e (empty when skipped).
FeedGraph feed_graph(const ModelIndex& index,
                     const std::vector<std::vector<StageId>>& members) {
  FeedGraph g;
  g.n = members.size();
  g.feeds.resize(g.n);
  std::vector<std::vector<std::size_t>> owners(index.stage_count());
  for (std::size_t e = 0; e < g.n; ++e) {
    for (StageId s : members[e]) owners[s].push_back(e);
  }
  for (StageId s = 0; s < index.stage_count(); ++s) {
    for (const auto& link : index.flow_out(s)) {
      for (std::size_t a : owners[s]) {
        for (std::size_t b : owners[link.stage]) {
          if (a != b) g.feeds[a].insert(b);
        }
      }
    }
  }
  g.reach = closure(g.feeds);
  return g;
}

bool weakly_connected(const ModelIndex& index, const std::vector<StageId>& stages) {
  if (stages.size() <= 1) return true;
  std::set<StageId> inside(stages.begin(), stages.end());
  std::set<StageId> seen{stages.front()};
  std::deque<StageId> queue{stages.front()};
  while (!queue.empty()) {
    StageId s = queue.front();
    queue.pop_front();
    auto visit = [&](std::span<const ModelIndex::Link> links) {
      for (const auto& l : links) {
        if (inside.count(l.stage) && seen.insert(l.stage).second) queue.push_back(l.stage);
      }
    };
    visit(index.flow_out(s));
    visit(index.flow_in(s));
    visit(index.trigger_out(s));
    visit(index.trigger_in(s));
  }
  return seen.size() == inside.size();
}

}  // namespace

ElementaryEvents elementary_events(const Model& model) {
  require_valid(model);
  ModelIndex index(model);
  Elementary e = extract(index);
  return {std::move(e.events), std::move(e.diagnostics)};
}

std::vector<Event> compose_events(const Model& model, const std::vector<EventGroup>& groups) {
  require_valid(model);
  ModelIndex index(model);
  Elementary elem = extract(index);
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < elem.events.size(); ++i) by_id[elem.events[i].id] = i;

  std::vector<std::optional<std::size_t>> owner(elem.events.size());
  std::vector<std::vector<std::size_t>> picked(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const EventGroup& group = groups[g];
    if (group.members.empty()) {
      throw CompositionError(std::string(code::kEmptyGroup),
                             "group " + std::to_string(g) + " has no members", g);
    }
    for (const std::string& m : group.members) {
      auto it = by_id.find(m);
      if (it == by_id.end()) {
        throw CompositionError(std::string(code::kUnknownMember),
                               "group " + std::to_string(g) + " names unknown elementary event '" +
                                   m + "'",
                               g);
      }
      if (owner[it->second]) {
        throw CompositionError(std::string(code::kOverlappingGroups),
                               "elementary event '" + m + "' is claimed by group " +
                                   std::to_string(*owner[it->second]) + " and group " +
                                   std::to_string(g),
                               g);
      }
      owner[it->second] = g;
      picked[g].push_back(it->second);
    }
    auto& members = picked[g];
    std::sort(members.begin(), members.end());
    for (std::size_t i = 1; i < members.size(); ++i) {
      StageId prev = elem.stages[members[i - 1]];
      StageId next = elem.stages[members[i]];
      auto out = index.flow_out(prev);
      bool joined = std::any_of(out.begin(), out.end(),
                                [&](const ModelIndex::Link& l) { return l.stage == next; });
      if (!joined) {
        throw CompositionError(std::string(code::kNonContiguousGroup),
                               "group " + std::to_string(g) + " is not a flow path: no arc from '" +
                                   elem.events[members[i - 1]].id + "' to '" +
                                   elem.events[members[i]].id + "'",
                               g);
      }
    }
  }

  // Emit in order of each event's first stage.
  std::vector<Event> out;
  for (std::size_t i = 0; i < elem.events.size(); ++i) {
    if (!owner[i]) {
      out.push_back({elem.events[i].id, {elem.events[i].stage}, std::nullopt, std::nullopt});
      continue;
    }
    std::size_t g = *owner[i];
    if (picked[g].front() != i) continue;
    Event ev;
    if (!groups[g].id.empty()) {
      ev.id = groups[g].id;
    } else {
      for (std::size_t m : picked[g]) ev.id += (ev.id.empty() ? "" : "+") + elem.events[m].id;
    }
    for (std::size_t m : picked[g]) ev.region.push_back(elem.events[m].stage);
    out.push_back(std::move(ev));
  }
  return out;
}

std::vector<ElementaryEvent> flatten(const Model& model, const std::vector<Event>& events) {
  require_valid(model);
  ModelIndex index(model);
  Elementary elem = extract(index);
  std::vector<std::size_t> positions;
  for (const Event& ev : events) {
    for (const StageRef& ref : ev.region) {
      auto s = index.find(ref);
      if (!s) {
        throw Error(std::string(code::kDanglingRef),
                    "event '" + ev.id + "' region stage " + describe(ref) + " does not resolve");
      }
      auto it = elem.position.find(*s);
      if (it == elem.position.end()) {
        throw Error(std::string(code::kIsolatedStage),
                    "event '" + ev.id + "' covers " + describe(ref) +
                        ", which has no elementary event");
      }
      positions.push_back(it->second);
    }
  }
  std::stable_sort(positions.begin(), positions.end());
  std::vector<ElementaryEvent> out;
  for (std::size_t p : positions) out.push_back(elem.events[p]);
  return out;
}

std::vector<Diagnostic> validate_dynamic(const Model& model, const std::vector<Event>& events,
                                         const Chronology& chron) {
  ModelIndex index(model);
  std::vector<Diagnostic> out;
  auto emit = [&](Severity sev, std::string_view code, std::string message, Site site) {
    out.push_back({sev, std::string(code), std::move(message), std::move(site), std::nullopt});
  };

  // Events: ids, regions, connectivity.
  std::map<std::string, std::size_t> by_id;
  std::vector<std::vector<StageId>> members(events.size());
  std::vector<bool> usable(events.size(), false);
  for (std::size_t e = 0; e < events.size(); ++e) {
    const Event& ev = events[e];
    if (!by_id.try_emplace(ev.id, e).second) {
      emit(Severity::Error, code::kDuplicateEvent, "event '" + ev.id + "' is declared twice",
           Site::event(ev.id));
      continue;
    }
    if (ev.region.empty()) {
      emit(Severity::Error, code::kEmptyRegion, "event '" + ev.id + "' has an empty region",
           Site::event(ev.id));
      continue;
    }
    bool resolved = true;
    for (const StageRef& ref : ev.region) {
      if (auto s = index.find(ref)) {
        members[e].push_back(*s);
      } else {
        resolved = false;
        emit(Severity::Error, code::kDanglingRef,
             "event '" + ev.id + "' region stage " + describe(ref) + " does not resolve",
             Site::event(ev.id));
      }
    }
    if (!resolved) {
      members[e].clear();
      continue;
    }
    std::sort(members[e].begin(), members[e].end());
    members[e].erase(std::unique(members[e].begin(), members[e].end()), members[e].end());
    usable[e] = true;
    if (!weakly_connected(index, members[e])) {
      emit(Severity::Warning, code::kRegionDisconnected,
           "region of event '" + ev.id + "' is not connected by flows or triggers",
           Site::event(ev.id));
    }
  }
  for (const std::string& id : chron.events) {
    if (!by_id.count(id)) {
      emit(Severity::Error, code::kUnknownEvent, "chronology lists undeclared event '" + id + "'",
           Site::event(id));
    }
  }

  // Chronology edges.
  const std::size_t n = events.size();
  std::vector<std::set<std::size_t>> before(n);
  std::vector<std::size_t> edge_from(chron.edges.size(), n), edge_to(chron.edges.size(), n);
  for (std::size_t i = 0; i < chron.edges.size(); ++i) {
    const auto& [a, b] = chron.edges[i];
    auto ia = by_id.find(a), ib = by_id.find(b);
    if (ia == by_id.end() || ib == by_id.end()) {
      const std::string& missing = ia == by_id.end() ? a : b;
      emit(Severity::Error, code::kUnknownEvent,
           "chronology edge " + a + " -> " + b + " names undeclared event '" + missing + "'",
           Site::edge(i));
      continue;
    }
    edge_from[i] = ia->second;
    edge_to[i] = ib->second;
    before[ia->second].insert(ib->second);
    const Event& ea = events[ia->second];
    const Event& eb = events[ib->second];
    if (ea.time && eb.time && *ea.time > *eb.time) {
      emit(Severity::Warning, code::kTimeConflict,
           "edge " + a + " -> " + b + " runs against their times (" + std::to_string(*ea.time) +
               " > " + std::to_string(*eb.time) + ")",
           Site::edge(i));
    }
  }
  auto chron_reach = closure(before);

  // One cycle diagnostic per strongly connected group of events, at its first edge.
  std::set<std::size_t> cyclic_reported;
  for (std::size_t i = 0; i < chron.edges.size(); ++i) {
    std::size_t a = edge_from[i], b = edge_to[i];
    if (a == n) continue;
    bool on_cycle = a == b || chron_reach[b][a];
    if (!on_cycle) continue;
    // Smallest member index identifies the component.
    std::size_t rep = a;
    for (std::size_t c = 0; c < n; ++c) {
      if (c == a || (chron_reach[a][c] && chron_reach[c][a])) {
        rep = std::min(rep, c);
      }
    }
    if (!cyclic_reported.insert(rep).second) continue;
    emit(Severity::Error, code::kChronologyCycle,
         "chronology edge " + chron.edges[i].first + " -> " + chron.edges[i].second +
             " lies on a cycle",
         Site::edge(i));
  }

  // Flow consistency.
  FeedGraph feed = feed_graph(index, members);
  for (std::size_t a = 0; a < n; ++a) {
    if (!usable[a]) continue;
    for (std::size_t b : feed.feeds[a]) {
      if (!usable[b] || feed.reach[b][a]) continue;
      if (!chron_reach[a][b]) {
        emit(Severity::Error, code::kChronologyContradictsFlow,
             "flow runs from event '" + events[a].id + "' into event '" + events[b].id +
                 "' but the chronology has no path " + events[a].id + " => " + events[b].id,
             Site::event(events[b].id));
      }
    }
  }

  sort_diagnostics(out);
  return out;
}

InferredPrecedence infer_precedence(const Model& model, const std::vector<Event>& events) {
  ModelIndex index(model);
  std::vector<std::vector<StageId>> members(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) {
    for (const StageRef& ref : events[e].region) {
      auto s = index.find(ref);
      if (!s) {
        throw Error(std::string(code::kDanglingRef), "event '" + events[e].id +
                                                         "' region stage " + describe(ref) +
                                                         " does not resolve");
      }
      members[e].push_back(*s);
    }
  }
  FeedGraph feed = feed_graph(index, members);
  const std::size_t n = events.size();

  InferredPrecedence out;
  for (const Event& ev : events) out.chronology.events.push_back(ev.id);

  std::vector<std::set<std::size_t>> required(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b : feed.feeds[a]) {
      if (feed.reach[b][a]) {
        if (a < b || !feed.feeds[b].count(a)) {
          out.diagnostics.push_back(
              {Severity::Warning, std::string(code::kMutualFeed),
               "events '" + events[a].id + "' and '" + events[b].id +
                   "' feed each other; no precedence inferred",
               Site::event(events[a].id), std::nullopt});
        }
      } else {
        required[a].insert(b);
      }
    }
  }
  auto req_reach = closure(required);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b : required[a]) {
      bool implied = false;
      for (std::size_t c = 0; c < n && !implied; ++c) {
        implied = c != a && c != b && req_reach[a][c] && req_reach[c][b];
      }
      if (!implied) out.chronology.edges.emplace_back(events[a].id, events[b].id);
    }
  }
  return out;
}

}  // namespace tmkit
