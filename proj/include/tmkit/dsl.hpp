#pragma once

// The ".tm" surface syntax.
//
//   model      := item*
//   item       := simplified | machine | flow | trigger | event | chronology
//   simplified := "simplified" INT ";"
//   machine    := "machine" IDENT STRING? "{" (machine | stage)* "}"
//   stage      := "stage" KIND IDENT? ("@" INT)? ";"
//   flow       := "flow" (STRING | IDENT) ":" ref ("->" ref)+ ";"
//   ref        := IDENT ("." IDENT)* "." KIND ("[" IDENT "]")?
//   trigger    := "trigger" (STRING ":")? ref "~>" ref ";"
//   event      := "event" IDENT "{" "region" ":" ref ("," ref)* ";"
//                 ("time" ":" INT ";")? ("desc" ":" STRING ";")? "}"
//   chronology := "chronology" "{" (IDENT "->" IDENT ";")* "}"
//
// Comments run from '#' to end of line. Strings are double-quoted with
// backslash escapes (\" \\ \n \t \r).

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

/// Where things came from in the source text.
struct SourceMap {
  std::vector<SourceSpan> arcs;      // the "->" of each flow arc
  std::vector<SourceSpan> triggers;  // the "~>" of each trigger
  std::vector<SourceSpan> edges;     // each chronology edge
  std::map<std::string, SourceSpan> machines;
  std::map<StageRef, SourceSpan> stages;  // declaration, or first reference
  std::map<std::string, SourceSpan> events;

  std::optional<SourceSpan> locate(const Site& site) const;
};

struct ParseResult {
  std::optional<Document> document;  // present iff no Error diagnostics
  std::vector<Diagnostic> diagnostics;
  SourceMap source_map;
};

/// Parses, then runs static validation (and dynamic validation when the static
/// model is clean). Every diagnostic carries a span. Never throws.
ParseResult parse(std::string_view text, std::string_view file_name);

/// Canonical text. Throws Error with the first validation error when the
/// document is not well-formed, or when an id is not a valid identifier.
std::string format(const Document& document);

bool is_identifier(std::string_view text);

}  // namespace tmkit
