#include "tmkit/render.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>

#include "tmkit/events.hpp"
#include "tmkit/index.hpp"
#include "tmkit/validate.hpp"

namespace tmkit {
namespace {

std::string q(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  out += '"';
  return out;
}

std::string_view rankdir_name(RankDir r) { return r == RankDir::LR ? "LR" : "TB"; }

void require_valid(const Model& model) {
  auto found = validate(model);
  if (const Diagnostic* d = first_error(found)) {
    throw Error(d->code, "model does not validate: " + d->message);
  }
}

std::string stage_label(const StageRef& ref, const Stage& st) {
  std::string out(to_string(ref.kind));
  if (!ref.disambiguator.empty()) out += "[" + ref.disambiguator + "]";
  if (st.number) out += " " + std::to_string(*st.number);
  return out;
}

class DotWriter {
 public:
  DotWriter(const Model& model, const std::vector<Event>& events, const RenderOptions& opts)
      : model_(model), index_(model), opts_(opts) {
    if (opts.overlay) {
      for (const std::string& id : *opts.overlay) {
        auto ev = std::find_if(events.begin(), events.end(),
                               [&](const Event& e) { return e.id == id; });
        if (ev == events.end()) {
          throw Error(std::string(code::kUnknownEvent), "overlay names unknown event '" + id + "'");
        }
        for (const StageRef& ref : ev->region) {
          if (auto s = index_.find(ref)) region_of_.try_emplace(*s, id);
        }
      }
    }
  }

  std::string run() {
    out_ << "digraph " << q(model_.name) << " {\n";
    out_ << "  rankdir=" << rankdir_name(opts_.rankdir) << ";\n";
    out_ << "  node [shape=box, style=rounded];\n";
    for (std::size_t m = 0; m < model_.machines.size(); ++m) {
      if (!model_.machines[m].parent) machine(m, 1);
    }
    for (const FlowArc& arc : model_.arcs) {
      out_ << "  " << q(node(arc.from)) << " -> " << q(node(arc.to)) << " [label=" << q(arc.thing)
           << "];\n";
    }
    if (opts_.show_triggers) {
      for (const TriggerArc& t : model_.triggers) {
        out_ << "  " << q(node(t.from)) << " -> " << q(node(t.to)) << " [style=dashed";
        if (t.label) out_ << ", label=" << q(*t.label);
        out_ << "];\n";
      }
    }
    out_ << "}\n";
    return out_.str();
  }

 private:
  std::string node(const StageRef& ref) const {
    auto s = index_.find(ref);
    return index_.node_name(*s);
  }

  void stage_node(StageId s, const std::string& pad) {
    out_ << pad << q(index_.node_name(s)) << " [label=" << q(stage_label(index_.ref(s), index_.stage(s)))
         << "];\n";
  }

  void machine(std::size_t m, std::size_t depth) {
    const Machine& mach = model_.machines[m];
    const std::string pad(depth * 2, ' ');
    out_ << pad << "subgraph " << q("cluster_" + index_.slash_path(m)) << " {\n";
    out_ << pad << "  label=" << q(mach.name) << ";\n";

    // Stages of this machine; overlay members go into per-event sub-clusters.
    std::map<std::string, std::vector<StageId>> grouped;
    for (const Stage& st : mach.stages) {
      StageId s = *index_.find({mach.id, st.kind, st.disambiguator});
      if (index_.machine_of(s) != m) continue;
      auto it = region_of_.find(s);
      if (it == region_of_.end()) {
        stage_node(s, pad + "  ");
        continue;
      }
      grouped[it->second].push_back(s);
    }
    std::vector<std::string> ordered;
    for (const std::string& id : *opts_.overlay) {
      if (grouped.count(id)) ordered.push_back(id);
    }
    for (const std::string& id : ordered) {
      out_ << pad << "  subgraph " << q("cluster_" + index_.slash_path(m) + "@" + id) << " {\n";
      out_ << pad << "    label=" << q(id) << ";\n";
      out_ << pad << "    style=dashed;\n";
      for (StageId s : grouped[id]) stage_node(s, pad + "    ");
      out_ << pad << "  }\n";
    }

    for (const std::string& child : mach.children) {
      if (auto c = index_.find_machine(child)) machine(*c, depth + 1);
    }
    out_ << pad << "}\n";
  }

  const Model& model_;
  ModelIndex index_;
  const RenderOptions& opts_;
  std::unordered_map<StageId, std::string> region_of_;
  std::ostringstream out_;
};

std::vector<bool> collapsible_transfers(const ModelIndex& index) {
  std::vector<bool> ok(index.stage_count(), false);
  for (StageId s = 0; s < index.stage_count(); ++s) {
    ok[s] = index.kind(s) == StageKind::Transfer && index.flow_in(s).size() == 1 &&
            index.flow_out(s).size() == 1 && index.trigger_in(s).empty() &&
            index.trigger_out(s).empty();
  }
  return ok;
}

Model simplify_hops(const Model& model) {
  ModelIndex index(model);
  auto ok = collapsible_transfers(index);
  std::vector<bool> drop_arc(model.arcs.size(), false);
  std::vector<std::optional<FlowArc>> replace(model.arcs.size());
  std::vector<bool> drop_stage(index.stage_count(), false);

  for (std::size_t i = 0; i < model.arcs.size(); ++i) {
    const FlowArc& mid = model.arcs[i];
    auto t1 = index.find(mid.from);
    auto t2 = index.find(mid.to);
    if (!t1 || !t2 || index.machine_of(*t1) == index.machine_of(*t2)) continue;
    if (!ok[*t1] || !ok[*t2]) continue;
    const auto in = index.flow_in(*t1).front();
    const auto out = index.flow_out(*t2).front();
    if (index.kind(in.stage) != StageKind::Release || index.kind(out.stage) != StageKind::Receive ||
        index.machine_of(in.stage) != index.machine_of(*t1) ||
        index.machine_of(out.stage) != index.machine_of(*t2)) {
      continue;
    }
    replace[in.arc] = FlowArc{index.ref(in.stage), index.ref(out.stage), mid.thing};
    drop_arc[i] = true;
    drop_arc[out.arc] = true;
    drop_stage[*t1] = true;
    drop_stage[*t2] = true;
  }

  if (std::none_of(drop_stage.begin(), drop_stage.end(), [](bool b) { return b; })) return model;

  Model out = model;
  out.arcs.clear();
  for (std::size_t i = 0; i < model.arcs.size(); ++i) {
    if (replace[i]) {
      out.arcs.push_back(*replace[i]);
    } else if (!drop_arc[i]) {
      out.arcs.push_back(model.arcs[i]);
    }
  }
  for (Machine& m : out.machines) {
    std::erase_if(m.stages, [&](const Stage& st) {
      auto s = index.find({m.id, st.kind, st.disambiguator});
      return s && drop_stage[*s];
    });
  }
  out.simplified = std::max(out.simplified, 1);
  return out;
}

Model collapse_machines(const Model& model) {
  ModelIndex index(model);
  Model out = model;
  for (Machine& m : out.machines) {
    if (m.stages.empty()) continue;
    m.stages = {Stage{StageKind::Process, {}, std::nullopt}};
  }
  auto owner = [&](const StageRef& ref) { return model.machines[index.machine_of(*index.find(ref))].id; };

  std::set<std::pair<std::string, std::string>> seen;
  out.arcs.clear();
  for (const FlowArc& arc : model.arcs) {
    std::string a = owner(arc.from), b = owner(arc.to);
    if (a == b || !seen.emplace(a, b).second) continue;
    out.arcs.push_back({{a, StageKind::Process, {}}, {b, StageKind::Process, {}}, arc.thing});
  }
  seen.clear();
  out.triggers.clear();
  for (const TriggerArc& t : model.triggers) {
    std::string a = owner(t.from), b = owner(t.to);
    if (a == b || !seen.emplace(a, b).second) continue;
    out.triggers.push_back({{a, StageKind::Process, {}}, {b, StageKind::Process, {}}, t.label});
  }
  if (out == model) return model;
  out.simplified = 2;
  return out;
}

}  // namespace

std::string to_dot(const Model& model, const std::vector<Event>& events,
                   const RenderOptions& options) {
  require_valid(model);
  RenderOptions opts = options;
  if (!opts.overlay) opts.overlay.emplace();
  return DotWriter(model, events, opts).run();
}

std::string chronology_dot(const Chronology& chron, const std::vector<Event>& events,
                           RankDir rankdir) {
  std::vector<std::string> nodes = chron.events;
  std::set<std::string> known(nodes.begin(), nodes.end());
  std::set<std::string> extra;
  for (const auto& [a, b] : chron.edges) {
    if (!known.count(a)) extra.insert(a);
    if (!known.count(b)) extra.insert(b);
  }
  nodes.insert(nodes.end(), extra.begin(), extra.end());

  // Acyclicity check by repeated removal of sources.
  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& n : nodes) indegree[n] = 0;
  for (const auto& [a, b] : chron.edges) {
    ++indegree[b];
    succ[a].push_back(b);
  }
  std::deque<std::string> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.push_back(n);
  }
  std::size_t removed = 0;
  while (!ready.empty()) {
    std::string n = ready.front();
    ready.pop_front();
    ++removed;
    for (const auto& t : succ[n]) {
      if (--indegree[t] == 0) ready.push_back(t);
    }
  }
  if (removed != indegree.size()) {
    throw Error(std::string(code::kChronologyCycle), "chronology contains a cycle");
  }

  std::ostringstream out;
  out << "digraph \"chronology\" {\n";
  out << "  rankdir=" << rankdir_name(rankdir) << ";\n";
  out << "  node [shape=box];\n";
  for (const auto& n : nodes) {
    std::string label = n;
    auto ev = std::find_if(events.begin(), events.end(), [&](const Event& e) { return e.id == n; });
    if (ev != events.end() && ev->desc) label += "\n" + *ev->desc;
    out << "  " << q(n) << " [label=" << q(label) << "];\n";
  }
  for (const auto& [a, b] : chron.edges) out << "  " << q(a) << " -> " << q(b) << ";\n";
  out << "}\n";
  return out.str();
}

Model simplify(const Model& model, int level) {
  if (level != 1 && level != 2) {
    throw Error(std::string(code::kInvalidConfig), "simplification level must be 1 or 2");
  }
  require_valid(model);
  Model out = simplify_hops(model);
  if (level == 2) out = collapse_machines(out);
  return out;
}

std::set<std::pair<std::string, std::string>> machine_reachability(const Model& model) {
  ModelIndex index(model);
  const std::size_t n = model.machines.size();
  std::vector<std::set<std::size_t>> adj(n);
  for (const FlowArc& arc : model.arcs) {
    auto f = index.find(arc.from);
    auto t = index.find(arc.to);
    if (!f || !t) continue;
    std::size_t a = index.machine_of(*f), b = index.machine_of(*t);
    if (a != b) adj[a].insert(b);
  }
  std::set<std::pair<std::string, std::string>> out;
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue(adj[a].begin(), adj[a].end());
    while (!queue.empty()) {
      std::size_t b = queue.front();
      queue.pop_front();
      if (seen[b]) continue;
      seen[b] = true;
      if (b != a) out.emplace(model.machines[a].id, model.machines[b].id);
      queue.insert(queue.end(), adj[b].begin(), adj[b].end());
    }
  }
  return out;
}

}  // namespace tmkit
