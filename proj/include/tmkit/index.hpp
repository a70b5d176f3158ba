#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

using StageId = std::size_t;

/// Dense lookup tables over a Model. Holds a reference to the model, which
/// must outlive the index. Duplicate machines or stages resolve to their first
/// declaration; arcs with unresolved endpoints are left out of the adjacency
/// lists.
class ModelIndex {
 public:
  struct Link {
    StageId stage;
    std::size_t arc;  // index into Model::arcs or Model::triggers
  };

  explicit ModelIndex(const Model& model);

  const Model& model() const noexcept { return *model_; }

  std::optional<std::size_t> find_machine(std::string_view id) const;
  std::optional<StageId> find(const StageRef& ref) const;

  std::size_t machine_count() const noexcept { return model_->machines.size(); }
  std::size_t stage_count() const noexcept { return refs_.size(); }

  const StageRef& ref(StageId s) const { return refs_[s]; }
  const Stage& stage(StageId s) const { return *stages_[s]; }
  std::size_t machine_of(StageId s) const { return owner_[s]; }
  StageKind kind(StageId s) const { return refs_[s].kind; }

  /// Root-to-machine ids joined with `.` (DSL) or `/` (DOT, traces).
  const std::string& dotted_path(std::size_t machine) const { return dotted_[machine]; }
  const std::string& slash_path(std::size_t machine) const { return slashed_[machine]; }
  std::size_t top_level(std::size_t machine) const { return top_[machine]; }

  /// "UAV/Control:process[gps]"
  std::string node_name(StageId s) const;
  static std::string node_name(const std::string& slash_path, const StageRef& ref);

  std::span<const Link> flow_out(StageId s) const { return flow_out_[s]; }
  std::span<const Link> flow_in(StageId s) const { return flow_in_[s]; }
  std::span<const Link> trigger_out(StageId s) const { return trig_out_[s]; }
  std::span<const Link> trigger_in(StageId s) const { return trig_in_[s]; }

  /// Position of the stage in (machine path, kind, disambiguator) order.
  std::size_t rank(StageId s) const { return rank_[s]; }

 private:
  const Model* model_;
  std::unordered_map<std::string, std::size_t> machine_by_id_;
  std::vector<std::string> dotted_;
  std::vector<std::string> slashed_;
  std::vector<std::size_t> top_;

  std::vector<StageRef> refs_;
  std::vector<const Stage*> stages_;
  std::vector<std::size_t> owner_;
  std::vector<std::size_t> rank_;
  std::unordered_map<std::string, StageId> stage_by_key_;

  std::vector<std::vector<Link>> flow_out_, flow_in_, trig_out_, trig_in_;
};

/// Topological order of `subset` under flow arcs (and trigger arcs when
/// `with_triggers`) between members of the subset. Ties, and cycles, are
/// broken by smallest rank, so the result is total and deterministic.
std::vector<StageId> causal_order(const ModelIndex& index, std::span<const StageId> subset,
                                  bool with_triggers = true);

}  // namespace tmkit
