#include "tmkit/index.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>
#include <tuple>
#include <unordered_set>

namespace tmkit {
namespace {

std::string stage_key(const StageRef& ref) {
  std::string key = ref.machine;
  key += '\x1f';
  key += to_string(ref.kind);
  key += '\x1f';
  key += ref.disambiguator;
  return key;
}

}  // namespace

ModelIndex::ModelIndex(const Model& model) : model_(&model) {
  const auto& machines = model.machines;
  for (std::size_t i = 0; i < machines.size(); ++i) {
    machine_by_id_.try_emplace(machines[i].id, i);
  }

  // Paths walk the parent chain; a cycle or an unknown parent ends the walk.
  dotted_.resize(machines.size());
  slashed_.resize(machines.size());
  top_.resize(machines.size());
  for (std::size_t i = 0; i < machines.size(); ++i) {
    std::vector<std::size_t> chain{i};
    std::unordered_set<std::size_t> seen{i};
    std::size_t cur = i;
    while (machines[cur].parent) {
      auto it = machine_by_id_.find(*machines[cur].parent);
      if (it == machine_by_id_.end() || !seen.insert(it->second).second) break;
      cur = it->second;
      chain.push_back(cur);
    }
    top_[i] = chain.back();
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      if (it != chain.rbegin()) {
        dotted_[i] += '.';
        slashed_[i] += '/';
      }
      dotted_[i] += machines[*it].id;
      slashed_[i] += machines[*it].id;
    }
  }

  for (std::size_t m = 0; m < machines.size(); ++m) {
    if (machine_by_id_.at(machines[m].id) != m) continue;  // duplicate machine id
    for (const Stage& st : machines[m].stages) {
      StageRef ref{machines[m].id, st.kind, st.disambiguator};
      auto [it, fresh] = stage_by_key_.try_emplace(stage_key(ref), refs_.size());
      if (!fresh) continue;
      refs_.push_back(std::move(ref));
      stages_.push_back(&st);
      owner_.push_back(m);
    }
  }

  std::vector<StageId> order(refs_.size());
  std::iota(order.begin(), order.end(), StageId{0});
  std::sort(order.begin(), order.end(), [&](StageId a, StageId b) {
    return std::tie(slashed_[owner_[a]], refs_[a].kind, refs_[a].disambiguator) <
           std::tie(slashed_[owner_[b]], refs_[b].kind, refs_[b].disambiguator);
  });
  rank_.resize(refs_.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank_[order[r]] = r;

  flow_out_.resize(refs_.size());
  flow_in_.resize(refs_.size());
  trig_out_.resize(refs_.size());
  trig_in_.resize(refs_.size());
  for (std::size_t i = 0; i < model.arcs.size(); ++i) {
    auto f = find(model.arcs[i].from);
    auto t = find(model.arcs[i].to);
    if (!f || !t) continue;
    flow_out_[*f].push_back({*t, i});
    flow_in_[*t].push_back({*f, i});
  }
  for (std::size_t i = 0; i < model.triggers.size(); ++i) {
    auto f = find(model.triggers[i].from);
    auto t = find(model.triggers[i].to);
    if (!f || !t) continue;
    trig_out_[*f].push_back({*t, i});
    trig_in_[*t].push_back({*f, i});
  }
}

std::optional<std::size_t> ModelIndex::find_machine(std::string_view id) const {
  auto it = machine_by_id_.find(std::string(id));
  if (it == machine_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<StageId> ModelIndex::find(const StageRef& ref) const {
  auto it = stage_by_key_.find(stage_key(ref));
  if (it == stage_by_key_.end()) return std::nullopt;
  return it->second;
}

std::string ModelIndex::node_name(StageId s) const {
  return node_name(slashed_[owner_[s]], refs_[s]);
}

std::string ModelIndex::node_name(const std::string& slash_path, const StageRef& ref) {
  std::string out = slash_path;
  out += ':';
  out += to_string(ref.kind);
  if (!ref.disambiguator.empty()) {
    out += '[';
    out += ref.disambiguator;
    out += ']';
  }
  return out;
}

std::vector<StageId> causal_order(const ModelIndex& index, std::span<const StageId> subset,
                                  bool with_triggers) {
  std::unordered_set<StageId> members(subset.begin(), subset.end());
  std::unordered_map<StageId, std::size_t> indegree;
  for (StageId s : members) indegree[s] = 0;

  auto for_each_succ = [&](StageId s, auto&& fn) {
    for (const auto& l : index.flow_out(s)) {
      if (members.count(l.stage)) fn(l.stage);
    }
    if (with_triggers) {
      for (const auto& l : index.trigger_out(s)) {
        if (members.count(l.stage)) fn(l.stage);
      }
    }
  };
  for (StageId s : members) for_each_succ(s, [&](StageId t) { ++indegree[t]; });

  using Item = std::pair<std::size_t, StageId>;  // (rank, stage)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  std::set<Item> blocked;
  for (auto [s, deg] : indegree) {
    if (deg == 0) {
      ready.emplace(index.rank(s), s);
    } else {
      blocked.emplace(index.rank(s), s);
    }
  }

  std::vector<StageId> order;
  order.reserve(members.size());
  std::unordered_set<StageId> done;
  while (order.size() < members.size()) {
    StageId next;
    if (!ready.empty()) {
      next = ready.top().second;
      ready.pop();
      if (done.count(next)) continue;
    } else {
      // Only cycles remain: release the lowest-ranked blocked stage.
      next = blocked.begin()->second;
    }
    blocked.erase({index.rank(next), next});
    done.insert(next);
    order.push_back(next);
    for_each_succ(next, [&](StageId t) {
      if (done.count(t)) return;
      if (--indegree[t] == 0) {
        blocked.erase({index.rank(t), t});
        ready.emplace(index.rank(t), t);
      }
    });
  }
  return order;
}

}  // namespace tmkit
