#pragma once

// Grammar-level checker for the DOT subset the renderer may emit:
//
//   graph     := "digraph" ID? "{" stmt* "}"
//   stmt      := (attr_stmt | subgraph | edge_or_node | ID "=" ID) ";"?
//   attr_stmt := ("graph" | "node" | "edge") attrs
//   subgraph  := "subgraph" ID? "{" stmt* "}"
//   edge_or_node := ID ("->" ID)* attrs?
//   attrs     := "[" (ID "=" ID ","?)* "]"
//
// IDs are bare words or double-quoted strings.

#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmkit::testing {

struct DotSummary {
  std::string name;
  std::vector<std::string> clusters;  // subgraph ids in order
  std::set<std::string> nodes;        // declared or mentioned
  std::size_t edges = 0;
  std::size_t dashed_edges = 0;
  std::vector<std::string> top_clusters;  // clusters directly under the graph
};

class DotParser {
 public:
  explicit DotParser(const std::string& text) : s_(text) {}

  DotSummary parse() {
    DotSummary out;
    skip();
    expect_word("digraph");
    if (peek() != '{') out.name = id();
    body(out, 0);
    skip();
    if (pos_ != s_.size()) fail("trailing text");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw std::runtime_error("DOT syntax error at byte " + std::to_string(pos_) + ": " + why);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool eat(const std::string& tok) {
    skip();
    if (s_.compare(pos_, tok.size(), tok) != 0) return false;
    pos_ += tok.size();
    return true;
  }
  void expect(const std::string& tok) {
    if (!eat(tok)) fail("expected '" + tok + "'");
  }
  void expect_word(const std::string& w) {
    if (id() != w) fail("expected " + w);
  }

  std::string id() {
    skip();
    if (pos_ >= s_.size()) fail("expected an ID");
    if (s_[pos_] == '"') {
      std::string out;
      ++pos_;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
          out += s_[pos_ + 1];
          pos_ += 2;
          continue;
        }
        if (s_[pos_] == '\n') fail("newline in string");
        out += s_[pos_++];
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      return out;
    }
    std::size_t start = pos_;
    auto is_id = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
    while (pos_ < s_.size() && is_id(s_[pos_])) ++pos_;
    if (start == pos_) fail("expected an ID");
    return s_.substr(start, pos_ - start);
  }

  std::vector<std::pair<std::string, std::string>> attrs() {
    std::vector<std::pair<std::string, std::string>> out;
    expect("[");
    while (peek() != ']') {
      std::string k = id();
      expect("=");
      out.emplace_back(k, id());
      eat(",");
    }
    expect("]");
    return out;
  }

  void body(DotSummary& out, int depth) {
    expect("{");
    while (peek() != '}') {
      if (peek() == '\0') fail("unbalanced braces");
      stmt(out, depth);
      eat(";");
    }
    expect("}");
  }

  void stmt(DotSummary& out, int depth) {
    std::string first = id();
    if (first == "subgraph") {
      std::string name;
      if (peek() != '{') name = id();
      out.clusters.push_back(name);
      if (depth == 0) out.top_clusters.push_back(name);
      body(out, depth + 1);
      return;
    }
    if ((first == "graph" || first == "node" || first == "edge") && peek() == '[') {
      attrs();
      return;
    }
    if (peek() == '=') {
      expect("=");
      id();
      return;
    }
    out.nodes.insert(first);
    std::size_t hops = 0;
    while (eat("->")) {
      out.nodes.insert(id());
      ++hops;
    }
    bool dashed = false;
    if (peek() == '[') {
      for (const auto& [k, v] : attrs()) dashed = dashed || (k == "style" && v == "dashed");
    }
    out.edges += hops;
    if (dashed && hops) out.dashed_edges += hops;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

inline DotSummary check_dot(const std::string& text) { return DotParser(text).parse(); }

}  // namespace tmkit::testing
