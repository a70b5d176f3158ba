#include "tmkit/json.hpp"

#include <json.hpp>

namespace tmkit {
namespace {

using Json = nlohmann::ordered_json;

template <typename T>
Json opt(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

Json ref_json(const StageRef& ref) {
  return Json{{"machine", ref.machine},
              {"kind", std::string(to_string(ref.kind))},
              {"disambiguator", ref.disambiguator}};
}

}  // namespace

std::string to_json(const Document& doc) {
  const Model& m = doc.model;
  Json machines = Json::array();
  for (const Machine& mach : m.machines) {
    Json stages = Json::array();
    for (const Stage& st : mach.stages) {
      stages.push_back(Json{{"kind", std::string(to_string(st.kind))},
                            {"disambiguator", st.disambiguator},
                            {"number", opt(st.number)}});
    }
    machines.push_back(Json{{"id", mach.id},
                            {"name", mach.name},
                            {"parent", opt(mach.parent)},
                            {"children", mach.children},
                            {"stages", std::move(stages)}});
  }
  Json arcs = Json::array();
  for (const FlowArc& a : m.arcs) {
    arcs.push_back(Json{{"from", ref_json(a.from)}, {"to", ref_json(a.to)}, {"thing", a.thing}});
  }
  Json triggers = Json::array();
  for (const TriggerArc& t : m.triggers) {
    triggers.push_back(
        Json{{"from", ref_json(t.from)}, {"to", ref_json(t.to)}, {"label", opt(t.label)}});
  }
  Json events = Json::array();
  for (const Event& e : doc.events) {
    Json region = Json::array();
    for (const StageRef& r : e.region) region.push_back(ref_json(r));
    events.push_back(Json{{"id", e.id},
                          {"region", std::move(region)},
                          {"time", opt(e.time)},
                          {"desc", opt(e.desc)}});
  }
  Json edges = Json::array();
  for (const auto& [a, b] : doc.chronology.edges) {
    edges.push_back(Json{{"before", a}, {"after", b}});
  }
  Json root{{"name", m.name},
            {"version", m.version},
            {"simplified", m.simplified},
            {"machines", std::move(machines)},
            {"arcs", std::move(arcs)},
            {"triggers", std::move(triggers)},
            {"events", std::move(events)},
            {"chronology", Json{{"events", doc.chronology.events}, {"edges", std::move(edges)}}}};
  return root.dump(2) + "\n";
}

std::string to_json(const SimTrace& trace) {
  Json records = Json::array();
  for (const TraceRecord& r : trace.records) {
    Json firings = Json::array();
    for (const Firing& f : r.firings) {
      firings.push_back(Json{{"node", f.node}, {"stage", ref_json(f.stage)}, {"instance", f.instance}});
    }
    records.push_back(Json{{"tick", r.tick},
                           {"event", r.event},
                           {"time", opt(r.time)},
                           {"firings", std::move(firings)}});
  }
  Json instances = Json::array();
  for (const ThingInstance& i : trace.instances) {
    instances.push_back(Json{{"id", i.id},
                             {"label", i.label},
                             {"birth_event", i.birth_event},
                             {"birth_stage", ref_json(i.birth_stage)}});
  }
  Json diagnostics = Json::array();
  for (const Diagnostic& d : trace.diagnostics) {
    diagnostics.push_back(Json{{"severity", std::string(to_string(d.severity))},
                               {"code", d.code},
                               {"event", d.site.name},
                               {"message", d.message}});
  }
  Json root{{"model", trace.model},
            {"seed", trace.seed},
            {"max_firings", trace.max_firings},
            {"scenario", opt(trace.scenario)},
            {"truncated", trace.truncated},
            {"records", std::move(records)},
            {"instances", std::move(instances)},
            {"diagnostics", std::move(diagnostics)}};
  return root.dump(2) + "\n";
}

}  // namespace tmkit
