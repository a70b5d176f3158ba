#include "tmkit/model.hpp"

#include <algorithm>
#include <tuple>

namespace tmkit {

std::string_view to_string(StageKind kind) {
  switch (kind) {
    case StageKind::Create: return "create";
    case StageKind::Process: return "process";
    case StageKind::Release: return "release";
    case StageKind::Transfer: return "transfer";
    case StageKind::Receive: return "receive";
  }
  return "?";
}

std::optional<StageKind> parse_stage_kind(std::string_view text) {
  for (StageKind k : kAllStageKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "ERROR" : "WARNING";
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return first_error(diagnostics) != nullptr;
}

const Diagnostic* first_error(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::Error) return &d;
  }
  return nullptr;
}

void sort_diagnostics(std::vector<Diagnostic>& diagnostics) {
  auto key = [](const Diagnostic& d) {
    const StageRef none{};
    return std::tuple(static_cast<int>(d.site.kind), d.site.index, d.site.name,
                      d.site.stage ? *d.site.stage : none);
  };
  std::stable_sort(diagnostics.begin(), diagnostics.end(),
                   [&](const Diagnostic& a, const Diagnostic& b) {
                     auto ka = key(a);
                     auto kb = key(b);
                     if (ka != kb) return ka < kb;
                     return a.code < b.code;
                   });
}

}  // namespace tmkit
