#include "tmkit/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>
#include <unordered_map>

#include "tmkit/events.hpp"
#include "tmkit/index.hpp"
#include "tmkit/validate.hpp"

namespace tmkit {
namespace {

constexpr std::size_t kMaxNesting = 256;
constexpr std::size_t kMaxSyntaxErrors = 64;

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  Ident, Int, String,
  LBrace, RBrace, LBracket, RBracket,
  Semi, Colon, Dot, Comma, At, Arrow, Squiggle,
  End
};

std::string_view tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Comma: return "','";
    case Tok::At: return "'@'";
    case Tok::Arrow: return "'->'";
    case Tok::Squiggle: return "'~>'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;  // raw token text; strings are decoded
  SourceSpan span;
};

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  Lexer(std::string_view text, std::string file, std::vector<Diagnostic>& diags)
      : text_(text), file_(std::move(file)), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (pos_ >= text_.size()) {
        out.push_back({Tok::End, {}, span_at(pos_, line_, col_, 0)});
        return out;
      }
      if (auto t = next()) out.push_back(std::move(*t));
    }
  }

 private:
  SourceSpan span_at(std::size_t offset, std::size_t line, std::size_t col,
                     std::size_t len) const {
    return {file_, line, col, len, offset};
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::optional<Token> next() {
    const std::size_t start = pos_, line = line_, col = col_;
    auto make = [&](Tok k, std::string txt = {}) {
      return Token{k, std::move(txt), span_at(start, line, col, pos_ - start)};
    };
    char c = text_[pos_];
    if (is_alpha(c)) {
      while (pos_ < text_.size() &&
             (is_alpha(text_[pos_]) || is_digit(text_[pos_]) || text_[pos_] == '_')) {
        advance();
      }
      return make(Tok::Ident, std::string(text_.substr(start, pos_ - start)));
    }
    if (is_digit(c)) {
      while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
      return make(Tok::Int, std::string(text_.substr(start, pos_ - start)));
    }
    if (c == '"') return string_literal();
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      advance();
      advance();
      return make(Tok::Arrow);
    }
    if (c == '~' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      advance();
      advance();
      return make(Tok::Squiggle);
    }
    Tok single = Tok::End;
    switch (c) {
      case '{': single = Tok::LBrace; break;
      case '}': single = Tok::RBrace; break;
      case '[': single = Tok::LBracket; break;
      case ']': single = Tok::RBracket; break;
      case ';': single = Tok::Semi; break;
      case ':': single = Tok::Colon; break;
      case '.': single = Tok::Dot; break;
      case ',': single = Tok::Comma; break;
      case '@': single = Tok::At; break;
      default: break;
    }
    advance();
    if (single != Tok::End) return make(single);

    std::string shown;
    auto uc = static_cast<unsigned char>(c);
    if (uc >= 0x20 && uc < 0x7f) {
      shown = std::string("'") + c + "'";
    } else {
      static constexpr char kHex[] = "0123456789abcdef";
      shown = std::string("byte 0x") + kHex[uc >> 4] + kHex[uc & 0xf];
    }
    diags_.push_back({Severity::Error, std::string(code::kInvalidCharacter),
                      "unexpected " + shown, Site::none(), span_at(start, line, col, 1)});
    return std::nullopt;
  }

  std::optional<Token> string_literal() {
    const std::size_t start = pos_, line = line_, col = col_;
    advance();  // opening quote
    std::string value;
    while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') {
      char c = text_[pos_];
      if (c != '\\') {
        value += c;
        advance();
        continue;
      }
      const std::size_t esc = pos_, esc_line = line_, esc_col = col_;
      advance();
      if (pos_ >= text_.size() || text_[pos_] == '\n') break;
      switch (text_[pos_]) {
        case '"': value += '"'; break;
        case '\\': value += '\\'; break;
        case 'n': value += '\n'; break;
        case 't': value += '\t'; break;
        case 'r': value += '\r'; break;
        default:
          diags_.push_back({Severity::Error, std::string(code::kInvalidEscape),
                            "unknown escape sequence", Site::none(),
                            span_at(esc, esc_line, esc_col, 2)});
          value += text_[pos_];
      }
      advance();
    }
    if (pos_ >= text_.size() || text_[pos_] != '"') {
      diags_.push_back({Severity::Error, std::string(code::kUnterminatedString),
                        "string literal is not terminated on this line", Site::none(),
                        span_at(start, line, col, pos_ - start)});
      return Token{Tok::String, std::move(value), span_at(start, line, col, pos_ - start)};
    }
    advance();  // closing quote
    return Token{Tok::String, std::move(value), span_at(start, line, col, pos_ - start)};
  }

  std::string_view text_;
  std::string file_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

// ---------------------------------------------------------------------------
// Syntax tree

struct RefNode {
  std::vector<std::string> path;  // machine path segments
  StageKind kind = StageKind::Create;
  std::string disambiguator;
  SourceSpan span;
};

struct StageDeclNode {
  Stage stage;
  SourceSpan span;
};

struct MachineNode {
  std::string id;
  std::optional<std::string> name;
  SourceSpan span;
  std::vector<StageDeclNode> stages;
  std::vector<MachineNode> children;
};

struct FlowNode {
  std::string thing;
  std::vector<RefNode> refs;
  std::vector<SourceSpan> arrows;
};

struct TriggerNode {
  std::optional<std::string> label;
  RefNode from, to;
  SourceSpan arrow;
};

struct EventNode {
  std::string id;
  SourceSpan span;
  std::vector<RefNode> region;
  std::optional<std::uint64_t> time;
  std::optional<std::string> desc;
};

struct EdgeNode {
  std::string before, after;
  SourceSpan span;
};

struct FileNode {
  std::optional<int> simplified;
  std::vector<MachineNode> machines;
  std::vector<FlowNode> flows;
  std::vector<TriggerNode> triggers;
  std::vector<EventNode> events;
  std::vector<EdgeNode> edges;
};

// ---------------------------------------------------------------------------
// Parser

struct SyntaxError {};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diags)
      : toks_(std::move(tokens)), diags_(diags) {}

  FileNode run() {
    FileNode file;
    while (peek().kind != Tok::End) {
      const std::size_t errors_before = errors_;
      try {
        item(file);
      } catch (const SyntaxError&) {
        if (errors_ >= kMaxSyntaxErrors) break;
        recover(errors_before);
      }
    }
    return file;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& take() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_keyword(std::string_view kw) const {
    return peek().kind == Tok::Ident && peek().text == kw;
  }

  [[noreturn]] void fail(const std::string& message) {
    ++errors_;
    diags_.push_back({Severity::Error, std::string(code::kSyntax), message, Site::none(),
                      peek().span});
    throw SyntaxError{};
  }

  const Token& expect(Tok kind, std::string_view what = {}) {
    if (peek().kind != kind) {
      std::string wanted = what.empty() ? std::string(tok_name(kind)) : std::string(what);
      fail("expected " + wanted + ", found " + describe(peek()));
    }
    return take();
  }

  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) fail("expected '" + std::string(kw) + "', found " + describe(peek()));
    take();
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::Ident) return "'" + t.text + "'";
    if (t.kind == Tok::Int) return "integer " + t.text;
    return std::string(tok_name(t.kind));
  }

  // Skip to the next token that can start a top-level item.
  void recover(std::size_t) {
    take();
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Ident &&
          (peek().text == "machine" || peek().text == "flow" || peek().text == "trigger" ||
           peek().text == "event" || peek().text == "chronology" ||
           peek().text == "simplified")) {
        return;
      }
      take();
    }
  }

  template <typename T>
  T integer(const Token& t, T max) {
    T value{};
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc{} || value > max) {
      ++errors_;
      diags_.push_back({Severity::Error, std::string(code::kSyntax),
                        "integer " + t.text + " is out of range", Site::none(), t.span});
      throw SyntaxError{};
    }
    return value;
  }

  void item(FileNode& file) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail("expected a declaration, found " + describe(t));
    if (t.text == "machine") {
      file.machines.push_back(machine(0));
    } else if (t.text == "flow") {
      file.flows.push_back(flow());
    } else if (t.text == "trigger") {
      file.triggers.push_back(trigger());
    } else if (t.text == "event") {
      file.events.push_back(event());
    } else if (t.text == "chronology") {
      chronology(file.edges);
    } else if (t.text == "simplified") {
      take();
      file.simplified = integer<int>(expect(Tok::Int), 2);
      expect(Tok::Semi);
    } else {
      fail("expected a declaration, found " + describe(t));
    }
  }

  MachineNode machine(std::size_t depth) {
    if (depth >= kMaxNesting) {
      ++errors_;
      diags_.push_back({Severity::Error, std::string(code::kNestingTooDeep),
                        "machines nested more than " + std::to_string(kMaxNesting) + " deep",
                        Site::none(), peek().span});
      throw SyntaxError{};
    }
    expect_keyword("machine");
    MachineNode node;
    const Token& id = expect(Tok::Ident, "machine name");
    node.id = id.text;
    node.span = id.span;
    if (peek().kind == Tok::String) node.name = take().text;
    expect(Tok::LBrace);
    while (peek().kind != Tok::RBrace) {
      if (at_keyword("machine")) {
        node.children.push_back(machine(depth + 1));
      } else if (at_keyword("stage")) {
        node.stages.push_back(stage_decl());
      } else {
        fail("expected 'stage', 'machine' or '}', found " + describe(peek()));
      }
    }
    take();
    return node;
  }

  StageKind kind_keyword() {
    const Token& t = peek();
    if (t.kind == Tok::Ident) {
      if (auto k = parse_stage_kind(t.text)) {
        take();
        return *k;
      }
    }
    fail("expected a stage kind (create, process, release, transfer, receive), found " +
         describe(t));
  }

  StageDeclNode stage_decl() {
    StageDeclNode node;
    node.span = peek().span;
    expect_keyword("stage");
    node.stage.kind = kind_keyword();
    if (peek().kind == Tok::Ident) node.stage.disambiguator = take().text;
    if (peek().kind == Tok::At) {
      take();
      node.stage.number = integer<int>(expect(Tok::Int), std::numeric_limits<int>::max());
    }
    expect(Tok::Semi);
    return node;
  }

  RefNode ref() {
    RefNode node;
    node.span = peek().span;
    std::vector<const Token*> segments{&expect(Tok::Ident, "machine name")};
    while (peek().kind == Tok::Dot) {
      take();
      segments.push_back(&expect(Tok::Ident, "machine name or stage kind"));
    }
    const Token* last = segments.back();
    auto kind = parse_stage_kind(last->text);
    if (segments.size() < 2 || !kind) {
      ++errors_;
      diags_.push_back({Severity::Error, std::string(code::kSyntax),
                        "stage reference must end in '.create', '.process', '.release', "
                        "'.transfer' or '.receive'",
                        Site::none(), last->span});
      throw SyntaxError{};
    }
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) node.path.push_back(segments[i]->text);
    node.kind = *kind;
    if (peek().kind == Tok::LBracket) {
      take();
      node.disambiguator = expect(Tok::Ident, "stage name").text;
      expect(Tok::RBracket);
    }
    const SourceSpan& end = toks_[pos_ - 1].span;
    node.span.length = end.offset + end.length - node.span.offset;
    return node;
  }

  FlowNode flow() {
    expect_keyword("flow");
    FlowNode node;
    if (peek().kind == Tok::String || peek().kind == Tok::Ident) {
      node.thing = take().text;
    } else {
      fail("expected a thing label, found " + describe(peek()));
    }
    expect(Tok::Colon);
    node.refs.push_back(ref());
    do {
      node.arrows.push_back(expect(Tok::Arrow).span);
      node.refs.push_back(ref());
    } while (peek().kind == Tok::Arrow);
    expect(Tok::Semi);
    return node;
  }

  TriggerNode trigger() {
    expect_keyword("trigger");
    TriggerNode node;
    if (peek().kind == Tok::String) {
      node.label = take().text;
      expect(Tok::Colon);
    }
    node.from = ref();
    node.arrow = expect(Tok::Squiggle).span;
    node.to = ref();
    expect(Tok::Semi);
    return node;
  }

  EventNode event() {
    expect_keyword("event");
    EventNode node;
    const Token& id = expect(Tok::Ident, "event name");
    node.id = id.text;
    node.span = id.span;
    expect(Tok::LBrace);
    expect_keyword("region");
    expect(Tok::Colon);
    node.region.push_back(ref());
    while (peek().kind == Tok::Comma) {
      take();
      node.region.push_back(ref());
    }
    expect(Tok::Semi);
    if (at_keyword("time")) {
      take();
      expect(Tok::Colon);
      node.time = integer<std::uint64_t>(expect(Tok::Int),
                                         std::numeric_limits<std::uint64_t>::max());
      expect(Tok::Semi);
    }
    if (at_keyword("desc")) {
      take();
      expect(Tok::Colon);
      node.desc = expect(Tok::String).text;
      expect(Tok::Semi);
    }
    expect(Tok::RBrace);
    return node;
  }

  void chronology(std::vector<EdgeNode>& edges) {
    expect_keyword("chronology");
    expect(Tok::LBrace);
    while (peek().kind != Tok::RBrace) {
      EdgeNode edge;
      const Token& before = expect(Tok::Ident, "event name");
      edge.before = before.text;
      edge.span = before.span;
      expect(Tok::Arrow);
      const Token& after = expect(Tok::Ident, "event name");
      edge.after = after.text;
      edge.span.length = after.span.offset + after.span.length - before.span.offset;
      expect(Tok::Semi);
      edges.push_back(std::move(edge));
    }
    take();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t errors_ = 0;
  std::vector<Diagnostic>& diags_;
};

// ---------------------------------------------------------------------------
// Building the document

class Builder {
 public:
  Builder(std::vector<Diagnostic>& diags, SourceMap& map) : diags_(diags), map_(map) {}

  Document build(FileNode& file, std::string model_name) {
    Document doc;
    doc.model.name = std::move(model_name);
    doc.model.simplified = file.simplified.value_or(0);
    for (MachineNode& m : file.machines) add_machine(doc.model, m, std::nullopt, {});

    for (FlowNode& f : file.flows) {
      std::vector<StageRef> refs;
      for (RefNode& r : f.refs) refs.push_back(resolve(doc.model, r, true));
      for (std::size_t i = 0; i + 1 < refs.size(); ++i) {
        doc.model.arcs.push_back({refs[i], refs[i + 1], f.thing});
        map_.arcs.push_back(f.arrows[i]);
      }
    }
    for (TriggerNode& t : file.triggers) {
      StageRef from = resolve(doc.model, t.from, true);
      StageRef to = resolve(doc.model, t.to, true);
      doc.model.triggers.push_back({std::move(from), std::move(to), t.label});
      map_.triggers.push_back(t.arrow);
    }

    std::set<std::string> seen;
    for (EventNode& e : file.events) {
      Event ev;
      ev.id = e.id;
      for (RefNode& r : e.region) ev.region.push_back(resolve(doc.model, r, false));
      ev.time = e.time;
      ev.desc = e.desc;
      map_.events.try_emplace(e.id, e.span);
      if (seen.insert(e.id).second) doc.chronology.events.push_back(e.id);
      doc.events.push_back(std::move(ev));
    }
    for (EdgeNode& e : file.edges) {
      doc.chronology.edges.emplace_back(e.before, e.after);
      map_.edges.push_back(e.span);
    }
    return doc;
  }

 private:
  void error(std::string_view code, std::string message, const SourceSpan& span) {
    diags_.push_back({Severity::Error, std::string(code), std::move(message), Site::none(), span});
  }

  void add_machine(Model& model, MachineNode& node, std::optional<std::string> parent,
                   std::vector<std::string> ancestors) {
    if (index_.count(node.id)) {
      error(code::kDuplicateMachine, "machine '" + node.id + "' is already declared", node.span);
      return;
    }
    index_[node.id] = model.machines.size();
    ancestors.push_back(node.id);
    paths_[node.id] = ancestors;
    map_.machines.try_emplace(node.id, node.span);

    Machine m;
    m.id = node.id;
    m.name = node.name.value_or(node.id);
    m.parent = parent;
    const std::size_t slot = model.machines.size();
    model.machines.push_back(std::move(m));
    for (StageDeclNode& s : node.stages) {
      StageRef ref{node.id, s.stage.kind, s.stage.disambiguator};
      auto& stages = model.machines[slot].stages;
      bool dup = std::any_of(stages.begin(), stages.end(), [&](const Stage& st) {
        return st.kind == s.stage.kind && st.disambiguator == s.stage.disambiguator;
      });
      if (dup) {
        error(code::kDuplicateStage,
              "stage '" + std::string(to_string(s.stage.kind)) +
                  (s.stage.disambiguator.empty() ? "" : " " + s.stage.disambiguator) +
                  "' is already declared in machine '" + node.id + "'",
              s.span);
        continue;
      }
      stages.push_back(s.stage);
      map_.stages.try_emplace(ref, s.span);
    }
    for (MachineNode& child : node.children) {
      if (index_.count(child.id)) {
        error(code::kDuplicateMachine, "machine '" + child.id + "' is already declared",
              child.span);
        continue;
      }
      model.machines[slot].children.push_back(child.id);
      add_machine(model, child, node.id, ancestors);
    }
  }

  // The last path segment names the machine; any leading segments must match
  // its ancestors. Flow and trigger references declare missing stages.
  StageRef resolve(Model& model, const RefNode& node, bool declare) {
    StageRef ref{node.path.back(), node.kind, node.disambiguator};
    auto it = index_.find(ref.machine);
    if (it == index_.end()) return ref;  // reported as DANGLING_REF by validation

    const auto& full = paths_[ref.machine];
    bool suffix = node.path.size() <= full.size() &&
                  std::equal(node.path.rbegin(), node.path.rend(), full.rbegin());
    if (!suffix) {
      std::string joined;
      for (const auto& seg : full) joined += (joined.empty() ? "" : ".") + seg;
      error(code::kDanglingRef,
            "machine path does not match declared nesting '" + joined + "'", node.span);
      return ref;
    }
    auto& stages = model.machines[it->second].stages;
    bool known = std::any_of(stages.begin(), stages.end(), [&](const Stage& st) {
      return st.kind == ref.kind && st.disambiguator == ref.disambiguator;
    });
    if (!known && declare) stages.push_back({ref.kind, ref.disambiguator, std::nullopt});
    if (known || declare) map_.stages.try_emplace(ref, node.span);
    return ref;
  }

  std::vector<Diagnostic>& diags_;
  SourceMap& map_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::vector<std::string>> paths_;
};

std::string model_name_from(std::string_view file_name) {
  auto slash = file_name.find_last_of("/\\");
  if (slash != std::string_view::npos) file_name.remove_prefix(slash + 1);
  if (file_name.size() > 3 && file_name.substr(file_name.size() - 3) == ".tm") {
    file_name.remove_suffix(3);
  }
  return std::string(file_name);
}

// ---------------------------------------------------------------------------
// Formatter

std::string quoted(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

class Formatter {
 public:
  explicit Formatter(const Document& doc) : doc_(doc), index_(doc.model) {}

  std::string run() {
    check_identifiers();
    std::vector<std::string> sections;
    if (doc_.model.simplified > 0) {
      sections.push_back("simplified " + std::to_string(doc_.model.simplified) + ";\n");
    }
    sections.push_back(machines());
    sections.push_back(flows());
    sections.push_back(triggers());
    sections.push_back(events());
    sections.push_back(chronology());

    std::string out;
    for (const auto& s : sections) {
      if (s.empty()) continue;
      if (!out.empty()) out += '\n';
      out += s;
    }
    return out;
  }

 private:
  static void require_identifier(std::string_view text, std::string_view what) {
    if (!is_identifier(text)) {
      throw Error("INVALID_IDENTIFIER",
                  std::string(what) + " '" + std::string(text) + "' is not an identifier");
    }
  }

  void check_identifiers() const {
    for (const Machine& m : doc_.model.machines) {
      require_identifier(m.id, "machine id");
      for (const Stage& s : m.stages) {
        if (!s.disambiguator.empty()) require_identifier(s.disambiguator, "stage name");
        if (s.number && *s.number < 0) {
          throw Error("INVALID_NUMBER", "stage numbers must be non-negative");
        }
      }
    }
    for (const Event& e : doc_.events) {
      require_identifier(e.id, "event id");
      for (const StageRef& r : e.region) {
        require_identifier(r.machine, "machine id");
        if (!r.disambiguator.empty()) require_identifier(r.disambiguator, "stage name");
      }
    }
    for (const auto& [a, b] : doc_.chronology.edges) {
      require_identifier(a, "event id");
      require_identifier(b, "event id");
    }
  }

  std::string ref(const StageRef& r) const {
    std::string out;
    auto m = index_.find_machine(r.machine);
    out = m ? index_.dotted_path(*m) : r.machine;
    out += '.';
    out += to_string(r.kind);
    if (!r.disambiguator.empty()) out += "[" + r.disambiguator + "]";
    return out;
  }

  void machine(const Machine& m, std::size_t depth, std::string& out) const {
    const std::string pad(depth * 2, ' ');
    out += pad + "machine " + m.id;
    if (m.name != m.id) out += " " + quoted(m.name);
    if (m.stages.empty() && m.children.empty()) {
      out += " {}\n";
      return;
    }
    out += " {\n";
    for (const Stage& s : m.stages) {
      out += pad + "  stage " + std::string(to_string(s.kind));
      if (!s.disambiguator.empty()) out += " " + s.disambiguator;
      if (s.number) out += " @" + std::to_string(*s.number);
      out += ";\n";
    }
    for (const std::string& child : m.children) {
      machine(doc_.model.machines[*index_.find_machine(child)], depth + 1, out);
    }
    out += pad + "}\n";
  }

  std::string machines() const {
    std::string out;
    for (const Machine& m : doc_.model.machines) {
      if (m.parent) continue;
      if (!out.empty()) out += '\n';
      machine(m, 0, out);
    }
    return out;
  }

  // Consecutive arcs that continue one another with the same label share a
  // statement; parsing desugars them back into the same arc sequence.
  std::string flows() const {
    std::string out;
    const auto& arcs = doc_.model.arcs;
    for (std::size_t i = 0; i < arcs.size();) {
      out += "flow " + quoted(arcs[i].thing) + ": " + ref(arcs[i].from) + " -> " +
             ref(arcs[i].to);
      std::size_t j = i + 1;
      while (j < arcs.size() && arcs[j].from == arcs[j - 1].to &&
             arcs[j].thing == arcs[i].thing) {
        out += " -> " + ref(arcs[j].to);
        ++j;
      }
      out += ";\n";
      i = j;
    }
    return out;
  }

  std::string triggers() const {
    std::string out;
    for (const TriggerArc& t : doc_.model.triggers) {
      out += "trigger ";
      if (t.label) out += quoted(*t.label) + ": ";
      out += ref(t.from) + " ~> " + ref(t.to) + ";\n";
    }
    return out;
  }

  std::string events() const {
    std::string out;
    for (const Event& e : doc_.events) {
      if (!out.empty()) out += '\n';
      out += "event " + e.id + " {\n  region: ";
      for (std::size_t i = 0; i < e.region.size(); ++i) {
        if (i) out += ", ";
        out += ref(e.region[i]);
      }
      out += ";\n";
      if (e.time) out += "  time: " + std::to_string(*e.time) + ";\n";
      if (e.desc) out += "  desc: " + quoted(*e.desc) + ";\n";
      out += "}\n";
    }
    return out;
  }

  std::string chronology() const {
    if (doc_.chronology.edges.empty()) return {};
    std::string out = "chronology {\n";
    for (const auto& [a, b] : doc_.chronology.edges) out += "  " + a + " -> " + b + ";\n";
    out += "}\n";
    return out;
  }

  const Document& doc_;
  ModelIndex index_;
};

}  // namespace

bool is_identifier(std::string_view text) {
  if (text.empty() || !is_alpha(text.front())) return false;
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return is_alpha(c) || is_digit(c) || c == '_'; });
}

std::optional<SourceSpan> SourceMap::locate(const Site& site) const {
  auto from_map = [](const auto& map, const auto& key) -> std::optional<SourceSpan> {
    auto it = map.find(key);
    if (it == map.end()) return std::nullopt;
    return it->second;
  };
  switch (site.kind) {
    case Site::Kind::Arc:
      if (site.index < arcs.size()) return arcs[site.index];
      break;
    case Site::Kind::Trigger:
      if (site.index < triggers.size()) return triggers[site.index];
      break;
    case Site::Kind::Edge:
      if (site.index < edges.size()) return edges[site.index];
      break;
    case Site::Kind::Machine: return from_map(machines, site.name);
    case Site::Kind::Event: return from_map(events, site.name);
    case Site::Kind::Stage:
      if (site.stage) {
        if (auto s = from_map(stages, *site.stage)) return s;
        return from_map(machines, site.stage->machine);
      }
      break;
    case Site::Kind::None: break;
  }
  return std::nullopt;
}

ParseResult parse(std::string_view text, std::string_view file_name) {
  ParseResult result;
  std::string file(file_name);

  Lexer lexer(text, file, result.diagnostics);
  std::vector<Token> tokens = lexer.run();
  Parser parser(std::move(tokens), result.diagnostics);
  FileNode tree = parser.run();
  Builder builder(result.diagnostics, result.source_map);
  Document doc = builder.build(tree, model_name_from(file_name));

  const SourceSpan fallback{file, 1, 1, 0, 0};
  auto attach = [&](std::vector<Diagnostic> found) {
    for (Diagnostic& d : found) {
      d.span = result.source_map.locate(d.site).value_or(fallback);
      result.diagnostics.push_back(std::move(d));
    }
  };

  std::vector<Diagnostic> statics = validate(doc.model);
  const bool static_ok = !has_errors(statics);
  attach(std::move(statics));
  if (static_ok && (!doc.events.empty() || !doc.chronology.edges.empty())) {
    attach(validate_dynamic(doc.model, doc.events, doc.chronology));
  }

  if (!has_errors(result.diagnostics)) result.document = std::move(doc);
  return result;
}

std::string format(const Document& document) {
  std::vector<Diagnostic> found = validate(document.model);
  if (!has_errors(found) && (!document.events.empty() || !document.chronology.edges.empty())) {
    found = validate_dynamic(document.model, document.events, document.chronology);
  }
  if (const Diagnostic* d = first_error(found)) throw Error(d->code, d->message);
  return Formatter(document).run();
}

}  // namespace tmkit
