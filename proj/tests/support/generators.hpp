#pragma once

// Hand-rolled random generators for property tests. Every generator is a
// pure function of the engine state, so a failing case is reproduced by its
// seed.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tmkit/events.hpp"
#include "tmkit/index.hpp"
#include "tmkit/model.hpp"
#include "tmkit/validate.hpp"

namespace tmkit::testing {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}
inline int between(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}
inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

// Identifiers deliberately include keywords of the surface syntax.
inline std::string random_ident(Rng& rng) {
  static const std::vector<std::string> pool{
      "A", "B", "UAV", "Server", "machine", "create", "flow", "stage", "region",
      "x", "Node_2", "event", "chronology", "transfer", "trigger", "desc", "time", "Q9"};
  return pool[pick(rng, pool.size())];
}

inline std::string random_text(Rng& rng) {
  static const std::vector<std::string> pool{
      "signal", "GPS coordinates", "a \"quoted\" thing", "back\\slash", "tab\there",
      "line\nbreak", "ünïcode", "#not a comment", "x -> y;", "{braces}", "s"};
  std::string out = pool[pick(rng, pool.size())];
  if (chance(rng, 0.3)) out += " " + std::to_string(pick(rng, 100));
  return out;
}

struct Thread {
  std::vector<StageRef> stages;  // in flow order, root first
};

struct GenOptions {
  int max_machines = 5;
  int max_threads = 4;
  int max_hops = 3;
  double trigger_rate = 0.5;
  double branch_rate = 0.3;
  bool events = true;
};

struct Generated {
  Document doc;
  std::vector<Thread> threads;
};

namespace detail {

inline void preorder(const std::vector<Machine>& in, const std::string& id,
                     std::vector<Machine>& out) {
  auto it = std::find_if(in.begin(), in.end(), [&](const Machine& m) { return m.id == id; });
  out.push_back(*it);
  for (const auto& c : it->children) preorder(in, c, out);
}

inline void declare(Model& m, const StageRef& ref, Rng& rng) {
  for (Machine& mach : m.machines) {
    if (mach.id != ref.machine) continue;
    std::optional<int> number;
    if (chance(rng, 0.3)) number = between(rng, 0, 99);
    mach.stages.push_back({ref.kind, ref.disambiguator, number});
    return;
  }
}

}  // namespace detail

/// A well-formed model (zero validation errors) made of flow threads that
/// hop between machines, optional fan-out branches and cross-thread triggers,
/// plus, when requested, events partitioning each thread into contiguous
/// segments with a chronology that respects flow direction.
inline Generated random_document(Rng& rng, const GenOptions& opt = {}) {
  Generated g;
  Model& model = g.doc.model;
  model.name = "gen";

  // Machine tree, then reordered into pre-order.
  const int n = between(rng, 1, opt.max_machines);
  std::vector<Machine> raw;
  std::set<std::string> used;
  for (int i = 0; i < n; ++i) {
    Machine m;
    do {
      m.id = random_ident(rng) + (chance(rng, 0.5) ? std::to_string(i) : "");
    } while (!used.insert(m.id).second);
    m.name = chance(rng, 0.3) ? random_text(rng) : m.id;
    if (i > 0 && chance(rng, 0.4)) {
      Machine& parent = raw[pick(rng, raw.size())];
      m.parent = parent.id;
      parent.children.push_back(m.id);
    }
    raw.push_back(std::move(m));
  }
  for (const Machine& m : raw) {
    if (!m.parent) detail::preorder(raw, m.id, model.machines);
  }
  const int threads = between(rng, 1, opt.max_threads);
  std::vector<StageRef> processes;  // candidate branch roots
  for (int t = 0; t < threads; ++t) {
    Thread th;
    std::string d = "t" + std::to_string(t);
    std::string label = random_text(rng);
    std::size_t m = pick(rng, model.machines.size());
    auto emit = [&](StageRef ref) {
      detail::declare(model, ref, rng);
      if (!th.stages.empty()) model.arcs.push_back({th.stages.back(), ref, label});
      th.stages.push_back(std::move(ref));
    };

    const bool branch = !processes.empty() && chance(rng, opt.branch_rate);
    if (branch) {
      StageRef root = processes[pick(rng, processes.size())];
      th.stages.push_back(root);  // already declared by its own thread
      m = *ModelIndex(model).find_machine(root.machine);
      label = random_text(rng);
    } else {
      emit({model.machines[m].id, StageKind::Create, d});
      if (chance(rng, 0.5)) {
        emit({model.machines[m].id, StageKind::Process, d});
        processes.push_back(th.stages.back());
        if (chance(rng, 0.5)) label = random_text(rng);
      }
    }

    const int hops = model.machines.size() > 1 ? between(rng, 0, opt.max_hops) : 0;
    if (hops == 0 && branch) {
      emit({model.machines[m].id, StageKind::Release, d});  // terminal release: warning only
    }
    for (int h = 0; h < hops; ++h) {
      std::size_t next;
      do {
        next = pick(rng, model.machines.size());
      } while (next == m);
      const std::string here = model.machines[m].id, there = model.machines[next].id;
      const std::string v = d + "h" + std::to_string(h);
      emit({here, StageKind::Release, v});
      emit({here, StageKind::Transfer, v + "o"});
      emit({there, StageKind::Transfer, v + "i"});
      emit({there, StageKind::Receive, v});
      if (chance(rng, 0.5)) {
        emit({there, StageKind::Process, v});
        processes.push_back(th.stages.back());
        if (chance(rng, 0.5)) label = random_text(rng);
      }
      m = next;
    }
    g.threads.push_back(std::move(th));
  }

  // Triggers between stages no flow path connects.
  if (chance(rng, opt.trigger_rate)) {
    ModelIndex index(model);
    std::vector<StageRef> sources, targets;
    for (StageId s = 0; s < index.stage_count(); ++s) {
      StageKind k = index.kind(s);
      if (k == StageKind::Process || k == StageKind::Create) sources.push_back(index.ref(s));
      if (legal_trigger_target(k)) targets.push_back(index.ref(s));
    }
    const int want = between(rng, 1, 3);
    for (int i = 0; i < want * 4 && !sources.empty(); ++i) {
      const StageRef& from = sources[pick(rng, sources.size())];
      const StageRef& to = targets[pick(rng, targets.size())];
      auto fwd = flow_reachable(model, from, false);
      auto back = flow_reachable(model, to, false);
      if (std::binary_search(fwd.begin(), fwd.end(), to) ||
          std::binary_search(back.begin(), back.end(), from)) {
        continue;
      }
      std::optional<std::string> lbl;
      if (chance(rng, 0.4)) lbl = random_text(rng);
      model.triggers.push_back({from, to, lbl});
      if (static_cast<int>(model.triggers.size()) >= want) break;
    }
  }

  if (!opt.events) return g;

  // Events: contiguous segments of each thread (branch roots belong to the
  // thread that declared them).
  std::set<StageRef> covered;
  int next_event = 1;
  for (const Thread& th : g.threads) {
    std::vector<StageRef> own;
    for (const StageRef& r : th.stages) {
      if (covered.insert(r).second) own.push_back(r);
    }
    std::size_t i = 0;
    while (i < own.size()) {
      std::size_t len = 1 + pick(rng, std::min<std::size_t>(own.size() - i, 4));
      Event ev;
      ev.id = chance(rng, 0.2) ? random_ident(rng) + "_e" + std::to_string(next_event)
                               : "E" + std::to_string(next_event);
      ++next_event;
      ev.region.assign(own.begin() + i, own.begin() + i + len);
      if (chance(rng, 0.3)) ev.time = pick(rng, 1000);
      if (chance(rng, 0.5)) ev.desc = random_text(rng);
      g.doc.events.push_back(std::move(ev));
      i += len;
    }
  }
  // Shuffle declaration order a little; ids stay unique.
  std::shuffle(g.doc.events.begin(), g.doc.events.end(), rng);
  for (const Event& e : g.doc.events) g.doc.chronology.events.push_back(e.id);

  InferredPrecedence inferred = infer_precedence(model, g.doc.events);
  if (chance(rng, 0.5)) {
    g.doc.chronology.edges = inferred.chronology.edges;
  } else {
    // A linear chain through a topological order of the inferred edges.
    std::map<std::string, int> indeg;
    std::map<std::string, std::vector<std::string>> succ;
    for (const Event& e : g.doc.events) indeg[e.id] = 0;
    for (const auto& [a, b] : inferred.chronology.edges) {
      ++indeg[b];
      succ[a].push_back(b);
    }
    std::vector<std::string> order;
    std::set<std::string> ready;
    for (const auto& [id, d] : indeg) {
      if (d == 0) ready.insert(id);
    }
    while (!ready.empty()) {
      auto it = std::next(ready.begin(), static_cast<long>(pick(rng, ready.size())));
      std::string id = *it;
      ready.erase(it);
      order.push_back(id);
      for (const auto& s : succ[id]) {
        if (--indeg[s] == 0) ready.insert(s);
      }
    }
    for (std::size_t k = 1; k < order.size(); ++k) {
      g.doc.chronology.edges.emplace_back(order[k - 1], order[k]);
    }
  }
  return g;
}

/// A single flow chain hopping across `machines` machines; no triggers.
inline Model chain_model(Rng& rng, int machines) {
  Model model;
  model.name = "chain";
  for (int i = 0; i < machines; ++i) {
    model.machines.push_back({"M" + std::to_string(i), "M" + std::to_string(i), std::nullopt, {}, {}});
  }
  std::vector<StageRef> seq;
  auto add = [&](int m, StageKind k, std::string d = {}) {
    StageRef ref{"M" + std::to_string(m), k, std::move(d)};
    model.machines[static_cast<std::size_t>(m)].stages.push_back({ref.kind, ref.disambiguator, std::nullopt});
    seq.push_back(ref);
  };
  add(0, StageKind::Create);
  if (chance(rng, 0.5)) add(0, StageKind::Process);
  for (int m = 0; m + 1 < machines; ++m) {
    add(m, StageKind::Release);
    add(m, StageKind::Transfer, "out");
    add(m + 1, StageKind::Transfer, "in");
    add(m + 1, StageKind::Receive);
    if (chance(rng, 0.5)) add(m + 1, StageKind::Process);
  }
  for (std::size_t i = 1; i < seq.size(); ++i) model.arcs.push_back({seq[i - 1], seq[i], "thing"});
  return model;
}

/// Random bytes with a bias towards fragments of the surface syntax.
inline std::string random_bytes(Rng& rng, std::size_t max_len) {
  static const std::vector<std::string> fragments{
      "machine", "stage", "flow", "trigger", "event", "chronology", "region", "time", "desc",
      "create", "process", "release", "transfer", "receive", "simplified", "{", "}", "[", "]",
      ";", ":", ".", ",", "@", "->", "~>", "\"", "\\", "#", "\n", " ", "A", "B.create",
      "99999999999999999999999", "\"unterminated", "\xff\xfe", std::string(1, '\0'),
      "{{{{{{{{"};
  std::string out;
  const std::size_t len = pick(rng, max_len + 1);
  while (out.size() < len) {
    if (chance(rng, 0.5)) {
      out += fragments[pick(rng, fragments.size())];
    } else {
      out += static_cast<char>(pick(rng, 256));
    }
  }
  return out;
}

}  // namespace tmkit::testing
