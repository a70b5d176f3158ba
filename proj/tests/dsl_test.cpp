#include <gtest/gtest.h>

#include <algorithm>

#include "support/generators.hpp"
#include "tmkit/corpus.hpp"
#include "tmkit/dsl.hpp"

namespace tmkit {
namespace {

std::vector<std::string> error_codes(const ParseResult& r) {
  std::vector<std::string> out;
  for (const auto& d : r.diagnostics) {
    if (d.severity == Severity::Error) out.push_back(d.code);
  }
  return out;
}

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

TEST(Parse, MinimalMachine) {
  auto r = parse("machine UI { }", "ui.tm");
  ASSERT_TRUE(r.document);
  EXPECT_TRUE(r.diagnostics.empty());
  const Model& m = r.document->model;
  ASSERT_EQ(m.machines.size(), 1u);
  EXPECT_EQ(m.machines[0].id, "UI");
  EXPECT_EQ(m.machines[0].name, "UI");
  EXPECT_TRUE(m.machines[0].stages.empty());
  EXPECT_TRUE(m.arcs.empty());
}

TEST(Parse, DroneTopLevelMachines) {
  const Model& m = drone_model().model;
  std::vector<std::string> top;
  for (const Machine& mach : m.machines) {
    if (!mach.parent) top.push_back(mach.id);
  }
  EXPECT_EQ(top, (std::vector<std::string>{"UI", "Server", "DroneController", "DronePhysical"}));
}

TEST(Parse, IllegalAdjacencyPointsAtTheArrow) {
  const std::string text = "machine A { stage release; }\nmachine B { stage create; }\nflow s: A.release -> B.create;\n";
  auto r = parse(text, "bad.tm");
  EXPECT_FALSE(r.document);
  auto it = std::find_if(r.diagnostics.begin(), r.diagnostics.end(),
                         [](const Diagnostic& d) { return d.code == "ILLEGAL_ADJACENCY"; });
  ASSERT_NE(it, r.diagnostics.end());
  ASSERT_TRUE(it->span);
  EXPECT_EQ(it->span->file, "bad.tm");
  EXPECT_EQ(it->span->line, 3u);
  EXPECT_EQ(it->span->column, 19u);
  EXPECT_EQ(it->span->length, 2u);
  EXPECT_EQ(text.substr(it->span->offset, 2), "->");
}

TEST(Parse, BareFlowWithoutMachinesStillReportsAdjacency) {
  auto r = parse("flow s: A.release -> B.create;", "x.tm");
  EXPECT_FALSE(r.document);
  EXPECT_TRUE(contains(error_codes(r), "ILLEGAL_ADJACENCY"));
  EXPECT_TRUE(contains(error_codes(r), "DANGLING_REF"));
}

TEST(Parse, FlowAutoDeclaresStagesAndDesugarsChains) {
  auto r = parse(
      "machine A {}\nmachine B {}\n"
      "flow \"s\": A.create -> A.release -> A.transfer -> B.transfer -> B.receive;\n",
      "x.tm");
  ASSERT_TRUE(r.document) << r.diagnostics.front().message;
  const Model& m = r.document->model;
  EXPECT_EQ(m.machines[0].stages.size(), 3u);
  EXPECT_EQ(m.machines[1].stages.size(), 2u);
  ASSERT_EQ(m.arcs.size(), 4u);
  for (const FlowArc& a : m.arcs) EXPECT_EQ(a.thing, "s");
  EXPECT_EQ(m.arcs[2].from.machine, "A");
  EXPECT_EQ(m.arcs[2].to.machine, "B");
}

TEST(Parse, NestedMachinesAndPaths) {
  auto r = parse(
      "machine P { machine C { stage create; stage process; } }\n"
      "flow t: P.C.create -> C.process;\n",
      "x.tm");
  ASSERT_TRUE(r.document);
  const Model& m = r.document->model;
  ASSERT_EQ(m.machines.size(), 2u);
  EXPECT_EQ(m.machines[1].parent, "P");
  EXPECT_EQ(m.machines[0].children, std::vector<std::string>{"C"});
  EXPECT_EQ(m.arcs[0].from.machine, "C");

  auto bad = parse("machine P { machine C { stage create; } }\nmachine Q {}\n"
                   "flow t: Q.C.create -> C.create;\n",
                   "x.tm");
  EXPECT_TRUE(contains(error_codes(bad), "DANGLING_REF"));
}

TEST(Parse, SyntaxErrorsCarrySpans) {
  auto r = parse("machine A {\n  stage creat;\n}\n", "x.tm");
  EXPECT_FALSE(r.document);
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(r.diagnostics[0].code, "SYNTAX_ERROR");
  EXPECT_EQ(r.diagnostics[0].span->line, 2u);
}

TEST(Parse, LexicalErrors) {
  EXPECT_TRUE(contains(error_codes(parse("machine A { $ }", "x")), "INVALID_CHARACTER"));
  EXPECT_TRUE(contains(error_codes(parse("flow \"abc", "x")), "UNTERMINATED_STRING"));
  EXPECT_TRUE(contains(error_codes(parse("flow \"a\\qb\": A.create -> A.process;", "x")),
                       "INVALID_ESCAPE"));
}

TEST(Parse, DeepNestingIsRejectedWithoutCrashing) {
  std::string text;
  for (int i = 0; i < 400; ++i) text += "machine M" + std::to_string(i) + " { ";
  for (int i = 0; i < 400; ++i) text += "} ";
  auto r = parse(text, "deep.tm");
  EXPECT_FALSE(r.document);
  EXPECT_TRUE(contains(error_codes(r), "NESTING_TOO_DEEP"));
}

TEST(Parse, DuplicateMachine) {
  auto r = parse("machine A {}\nmachine A {}\n", "x.tm");
  ASSERT_EQ(error_codes(r), std::vector<std::string>{"DUPLICATE_MACHINE"});
  EXPECT_EQ(r.diagnostics[0].span->line, 2u);
}

TEST(Parse, EventsAndChronology) {
  auto r = parse(
      "machine A { stage create; stage process; }\n"
      "flow s: A.create -> A.process;\n"
      "event E1 { region: A.create; time: 3; desc: \"made\"; }\n"
      "event E2 { region: A.process; }\n"
      "chronology { E1 -> E2; }\n",
      "x.tm");
  ASSERT_TRUE(r.document);
  const Document& d = *r.document;
  ASSERT_EQ(d.events.size(), 2u);
  EXPECT_EQ(d.events[0].time, 3u);
  EXPECT_EQ(d.events[0].desc, "made");
  EXPECT_FALSE(d.events[1].time);
  EXPECT_EQ(d.chronology.events, (std::vector<std::string>{"E1", "E2"}));
  EXPECT_EQ(d.chronology.edges.size(), 1u);

  auto cyc = parse(
      "machine A { stage create; stage process; }\nflow s: A.create -> A.process;\n"
      "event E1 { region: A.create; }\nevent E2 { region: A.process; }\n"
      "chronology { E1 -> E2; E2 -> E1; }\n",
      "x.tm");
  EXPECT_TRUE(contains(error_codes(cyc), "CHRONOLOGY_CYCLE"));
}

TEST(Format, EmptyModelIsEmptyText) { EXPECT_EQ(format(Document{}), ""); }

TEST(Format, RefusesInvalidDocuments) {
  Document d;
  d.model.machines = {{"A", "A", std::nullopt, {}, {{StageKind::Receive}, {StageKind::Create}}}};
  d.model.arcs = {{{"A", StageKind::Receive, {}}, {"A", StageKind::Create, {}}, "s"}};
  try {
    format(d);
    FAIL() << "expected refusal";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "ILLEGAL_ADJACENCY");
  }
  Document bad_id;
  bad_id.model.machines = {{"not an id", "x", std::nullopt, {}, {}}};
  EXPECT_THROW(format(bad_id), Error);
}

TEST(Format, CorpusRoundTripsAndIsIdempotent) {
  for (const CorpusEntry& e : corpus_entries()) {
    auto first = parse(e.source, e.name);
    ASSERT_TRUE(first.document) << e.name;
    std::string text = format(*first.document);
    auto second = parse(text, e.name);
    ASSERT_TRUE(second.document) << e.name;
    EXPECT_EQ(*second.document, *first.document) << e.name;
    EXPECT_EQ(format(*second.document), text) << e.name;
  }
}

TEST(Format, GeneratedDocumentsRoundTrip) {
  testing::Rng rng(42);
  for (int i = 0; i < 300; ++i) {
    Document doc = testing::random_document(rng).doc;
    std::string text = format(doc);
    auto r = parse(text, "gen.tm");
    ASSERT_TRUE(r.document) << text << "\n" << r.diagnostics.front().code;
    EXPECT_EQ(*r.document, doc) << text;
    EXPECT_EQ(format(*r.document), text);
  }
}

TEST(Parse, SpansStayInsideTheInput) {
  testing::Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    std::string text = testing::random_bytes(rng, 200);
    ParseResult r;
    ASSERT_NO_THROW(r = parse(text, "fuzz.tm"));
    EXPECT_EQ(r.document.has_value(), !has_errors(r.diagnostics));
    for (const Diagnostic& d : r.diagnostics) {
      ASSERT_TRUE(d.span) << d.code;
      EXPECT_GE(d.span->line, 1u);
      EXPECT_GE(d.span->column, 1u);
      EXPECT_LE(d.span->offset + d.span->length, text.size()) << d.code;
    }
  }
}

TEST(Parse, MutatedCorpusNeverCrashes) {
  testing::Rng rng(10);
  const std::string base(corpus_entries().front().source);
  for (int i = 0; i < 300; ++i) {
    std::string text = base;
    for (int k = 0; k < 5; ++k) {
      std::size_t at = testing::pick(rng, text.size());
      switch (testing::pick(rng, 3)) {
        case 0: text.erase(at, testing::pick(rng, 20)); break;
        case 1: text.insert(at, testing::random_bytes(rng, 8)); break;
        default: text[at] = static_cast<char>(testing::pick(rng, 256)); break;
      }
    }
    ParseResult r;
    ASSERT_NO_THROW(r = parse(text, "mut.tm"));
    for (const Diagnostic& d : r.diagnostics) {
      ASSERT_TRUE(d.span);
      EXPECT_LE(d.span->offset + d.span->length, text.size());
    }
  }
}

}  // namespace
}  // namespace tmkit
