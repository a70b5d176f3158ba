#include "tmkit/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "tmkit/dsl.hpp"
#include "tmkit/events.hpp"
#include "tmkit/index.hpp"
#include "tmkit/json.hpp"
#include "tmkit/render.hpp"
#include "tmkit/sim.hpp"

namespace tmkit {
namespace {

struct Options {
  std::string file;
  bool strict = false;
  // fmt
  bool write = false;
  // events
  std::vector<std::string> groups;
  bool infer = false;
  // simulate
  std::vector<std::string> scenario;
  bool scenario_given = false;
  std::size_t max_firings = 10000;
  std::uint64_t seed = 0;
  bool json = false;
  // dot
  std::vector<std::string> overlay;
  int simplify = 0;
  bool no_triggers = false;
  std::string rankdir = "LR";
  bool chronology = false;
};

class Session {
 public:
  Session(const Options& opts, std::istream& in, std::ostream& out, std::ostream& err)
      : opts_(opts), in_(in), out_(out), err_(err) {}

  int validate_cmd() {
    auto doc = load(out_);
    if (!doc) return status_;
    return status_;
  }

  int fmt_cmd() {
    auto doc = load(err_);
    if (!doc) return status_;
    std::string text = format(*doc);
    if (!opts_.write) {
      out_ << text;
      return status_;
    }
    if (opts_.file == "-") {
      err_ << "fmt: -w needs a file, not standard input\n";
      return kExitUsage;
    }
    std::ofstream f(opts_.file, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) {
      err_ << "fmt: cannot write '" << opts_.file << "'\n";
      return kExitUsage;
    }
    return status_;
  }

  int events_cmd() {
    auto doc = load(err_);
    if (!doc) return status_;
    if (opts_.infer) {
      InferredPrecedence p = infer_precedence(doc->model, doc->events);
      report(p.diagnostics, err_);
      for (const auto& [a, b] : p.chronology.edges) out_ << a << " -> " << b << '\n';
      return status_;
    }
    if (opts_.groups.empty()) {
      ElementaryEvents e = elementary_events(doc->model);
      report(e.diagnostics, err_);
      for (const ElementaryEvent& ev : e.events) out_ << ev.id << '\t' << ev.thing << '\n';
      return status_;
    }
    std::vector<EventGroup> groups;
    for (const std::string& arg : opts_.groups) {
      auto eq = arg.find('=');
      EventGroup g;
      std::string members = arg;
      if (eq != std::string::npos) {
        g.id = arg.substr(0, eq);
        members = arg.substr(eq + 1);
      }
      std::stringstream ss(members);
      for (std::string m; std::getline(ss, m, ',');) {
        if (!m.empty()) g.members.push_back(m);
      }
      groups.push_back(std::move(g));
    }
    ModelIndex index(doc->model);
    for (const Event& ev : compose_events(doc->model, groups)) {
      out_ << ev.id << '\t';
      for (std::size_t i = 0; i < ev.region.size(); ++i) {
        if (i) out_ << ' ';
        out_ << index.node_name(*index.find(ev.region[i]));
      }
      out_ << '\n';
    }
    return status_;
  }

  int simulate_cmd() {
    auto doc = load(err_);
    if (!doc) return status_;
    SimConfig cfg;
    if (opts_.scenario_given) cfg.scenario = opts_.scenario;
    cfg.max_firings = opts_.max_firings;
    cfg.seed = opts_.seed;
    SimTrace trace = simulate(doc->model, doc->events, doc->chronology, cfg);
    report(trace.diagnostics, err_);
    out_ << (opts_.json ? to_json(trace) : serialize_trace(trace));
    return status_;
  }

  int dot_cmd() {
    auto doc = load(err_);
    if (!doc) return status_;
    RankDir dir = opts_.rankdir == "TB" ? RankDir::TB : RankDir::LR;
    if (opts_.chronology) {
      out_ << chronology_dot(doc->chronology, doc->events, dir);
      return status_;
    }
    Model model = opts_.simplify ? simplify(doc->model, opts_.simplify) : doc->model;
    RenderOptions ro;
    ro.show_triggers = !opts_.no_triggers;
    ro.rankdir = dir;
    if (!opts_.overlay.empty()) ro.overlay = opts_.overlay;
    out_ << to_dot(model, doc->events, ro);
    return status_;
  }

  int export_cmd() {
    auto doc = load(err_);
    if (!doc) return status_;
    out_ << to_json(*doc);
    return status_;
  }

  // Reports an exception from a library call as a diagnostic line.
  int fail(const Error& e) {
    err_ << "ERROR " << e.code() << ' ' << display_name() << ":1:1 " << e.what() << '\n';
    return kExitErrors;
  }

 private:
  std::string display_name() const { return opts_.file == "-" ? "<stdin>" : opts_.file; }

  std::optional<Document> load(std::ostream& diag_out) {
    std::string text;
    if (opts_.file == "-") {
      std::ostringstream ss;
      ss << in_.rdbuf();
      text = ss.str();
    } else {
      std::ifstream f(opts_.file, std::ios::binary);
      if (!f) {
        err_ << "cannot read '" << opts_.file << "'\n";
        status_ = kExitUsage;
        return std::nullopt;
      }
      std::ostringstream ss;
      ss << f.rdbuf();
      text = ss.str();
    }
    result_ = parse(text, display_name());
    report(result_.diagnostics, diag_out);
    if (!result_.document) {
      status_ = kExitErrors;
      return std::nullopt;
    }
    return result_.document;
  }

  void report(const std::vector<Diagnostic>& diags, std::ostream& os) {
    for (const Diagnostic& d : diags) {
      bool error = d.severity == Severity::Error || opts_.strict;
      if (error) status_ = kExitErrors;
      SourceSpan span = d.span ? *d.span
                               : result_.source_map.locate(d.site).value_or(
                                     SourceSpan{display_name(), 1, 1, 0, 0});
      os << (error ? "ERROR" : "WARNING") << ' ' << d.code << ' ' << span.file << ':'
         << span.line << ':' << span.column << ' ' << d.message << '\n';
    }
  }

  const Options& opts_;
  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
  ParseResult result_;
  int status_ = kExitOk;
};

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Options opts;
  CLI::App app{"Thinging Machine model toolkit", "tmkit"};
  app.require_subcommand(1);
  app.add_flag("--strict", opts.strict, "Treat warnings as errors");

  auto add_file = [&](CLI::App* sub) {
    sub->add_option("file", opts.file, "Model file (.tm), or - for standard input")->required();
    sub->fallthrough();
  };

  auto* validate = app.add_subcommand("validate", "Parse and validate a model, print diagnostics");
  add_file(validate);

  auto* fmt = app.add_subcommand("fmt", "Print the canonical form of a model");
  add_file(fmt);
  fmt->add_flag("-w,--write", opts.write, "Rewrite the file in place");

  auto* events = app.add_subcommand("events", "List elementary or composed events");
  add_file(events);
  events->add_option("--group", opts.groups,
                     "Compose NAME=member,member,... (repeatable); members are elementary ids");
  events->add_flag("--infer", opts.infer, "Print the chronology implied by flow direction");

  auto* sim = app.add_subcommand("simulate", "Run the chronology and print a trace");
  add_file(sim);
  auto* scen = sim->add_option("--scenario", opts.scenario,
                               "Enabled event ids, comma separated (default: all; empty: none)")
                   ->delimiter(',')
                   ->expected(0, CLI::detail::expected_max_vector_size);
  sim->add_option("--max-firings", opts.max_firings, "Cap on elementary firings")
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", opts.seed, "Seed recorded in the trace header");
  sim->add_flag("--json", opts.json, "Structured output");

  auto* dot = app.add_subcommand("dot", "Render the model (or its chronology) as DOT");
  add_file(dot);
  dot->add_option("--overlay", opts.overlay, "Event ids to draw as regions")->delimiter(',');
  dot->add_option("--simplify", opts.simplify, "Simplification level")
      ->check(CLI::IsMember({1, 2}));
  dot->add_flag("--no-triggers", opts.no_triggers, "Omit trigger arcs");
  dot->add_option("--rankdir", opts.rankdir, "Layout direction")
      ->check(CLI::IsMember({"LR", "TB"}));
  dot->add_flag("--chronology", opts.chronology, "Render the chronology instead of the model");

  auto* exp = app.add_subcommand("export", "Print the model as structured data");
  add_file(exp);
  bool json_flag = true;
  exp->add_flag("--json", json_flag, "JSON output (the only format)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kExitUsage;
  }
  opts.scenario_given = scen->count() > 0;
  std::erase(opts.scenario, std::string());

  Session session(opts, in, out, err);
  try {
    if (validate->parsed()) return session.validate_cmd();
    if (fmt->parsed()) return session.fmt_cmd();
    if (events->parsed()) return session.events_cmd();
    if (sim->parsed()) return session.simulate_cmd();
    if (dot->parsed()) return session.dot_cmd();
    if (exp->parsed()) return session.export_cmd();
  } catch (const Error& e) {
    return session.fail(e);
  }
  return kExitUsage;
}

}  // namespace tmkit
