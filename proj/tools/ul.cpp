// Command-line front end.
//
//   ul check FILE                         parse, elaborate, typecheck
//   ul run FILE [--fuel N] [--trace P] [--stats]
//   ul translate FILE                     print the functional translation
//   ul meta [--samples N] [--seed S] [--props LIST] [--json P] [--compat-size K]
//
// Exit codes: 0 success, 1 check/run failure, 2 property violation, 64 usage.
// Language diagnostics go to stdout (they are the command's output and the
// corpus goldens compare them); I/O and usage problems go to stderr.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ul/ast.hpp"
#include "ul/errors.hpp"
#include "ul/eval.hpp"
#include "ul/funtrans.hpp"
#include "ul/parser.hpp"
#include "ul/pretty.hpp"
#include "ul/testkit.hpp"
#include "ul/typecheck.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kPropertyViolation = 2;
constexpr int kUsage = 64;

bool color_enabled() {
  const char* v = std::getenv("UL_COLOR");
  return v && std::string(v) == "1";
}

// One sentence per code, printed under the machine-greppable header line.
const char* explain(ul::Errc c) {
  using ul::Errc;
  switch (c) {
    case Errc::LinearVariableReused:
      return "A linear variable has exactly one consumer; this one is consumed twice.";
    case Errc::LinearVariableUnused:
      return "A linear variable must be consumed before it goes out of scope.";
    case Errc::BranchUsageMismatch:
      return "The branches of a case must consume the same linear resources.";
    case Errc::ShareCapturesLinear:
      return "A share body may mention duplicable things only; it cannot consume a linear variable or location from outside.";
    case Errc::CopyOfNonBang:
      return "copy duplicates shared values; its argument must have a ! type.";
    case Errc::TypeMismatch:
      return "The term does not have the type this position requires.";
    case Errc::UnboundVariable:
      return "No binder or definition introduces this name here.";
    case Errc::NonValueUnderTypeAbstraction:
      return "A type abstraction body must be a value (the value restriction).";
    case Errc::BoundaryTypeNotLumped:
      return "A UL boundary needs its inside at a shared lump type !Lump(tau).";
    case Errc::NonDuplicableLinearInScope:
      return "This position requires a duplicable type.";
    case Errc::LocationUnused:
      return "Every location of the store must be consumed exactly once; this one is never used.";
    case Errc::LocationReused:
      return "Every location of the store must be consumed exactly once; this one is used twice.";
    case Errc::StoreMismatch:
      return "The store does not have the shape the expression requires.";
    case Errc::DeadLocationHoldsValue:
      return "A location typed as empty holds a value.";
    case Errc::AliveLocationEmpty:
      return "A location typed as full holds no value.";
    case Errc::SharedLinearVariable:
      return "A variable shared here is linear and cannot be duplicated.";
    case Errc::NotInImage:
      return "No unrestricted type is compatible with this linear type, so the coercion has no target.";
    case Errc::ShapeMismatch:
      return "A converted value does not have the shape its type promises.";
    case Errc::NotTypable:
      return "The term has no type.";
    case Errc::UnboundName:
      return "A definition refers to a name no earlier definition introduces.";
    case Errc::ParseError:
      return "The source text does not match the grammar in docs/syntax.md.";
    case Errc::Uninhabited:
      return "The requested type has no inhabitant reachable within the budget.";
  }
  return "";
}

void diagnose(const ul::Error& e, const std::string& context) {
  std::string header = e.header();
  if (color_enabled()) header = "\x1b[31;1m" + header + "\x1b[0m";
  std::cout << header << "\n";
  std::cout << "  " << explain(e.code);
  if (!e.where.empty()) std::cout << " (at " << e.where << ")";
  if (!context.empty()) std::cout << " [" << context << "]";
  std::cout << "\n";
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Loaded {
  ul::Program prog;
};

// Parses and elaborates, or reports and returns nothing.
std::optional<Loaded> load(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "ul: cannot read " << path << "\n";
    return std::nullopt;
  }
  try {
    ul::SourceFile f = ul::parse_file(*text);
    return Loaded{ul::elaborate(f)};
  } catch (const ul::Error& e) {
    diagnose(e, path);
    return std::nullopt;
  }
}

// Typecheck one elaborated definition: the U reading wins when both readings
// typecheck; the error reported prefers the reading that exists.
struct DefType {
  std::string shown; // pretty type of the chosen reading
};

std::optional<DefType> check_def(const ul::TermDef& d) {
  std::optional<ul::Error> u_err, l_err;
  if (d.u) {
    try {
      ul::UTy t = ul::typecheck_u(ul::MixedContext{}, d.u);
      return DefType{ul::pretty(t)};
    } catch (const ul::Error& e) {
      u_err = e;
    }
  }
  if (d.l) {
    try {
      ul::LResult r = ul::typecheck_l_surface(ul::MixedContext{}, d.l);
      return DefType{ul::pretty(r.type)};
    } catch (const ul::Error& e) {
      l_err = e;
    }
  }
  if (u_err) throw *u_err;
  if (l_err) throw *l_err;
  throw ul::Error(ul::Errc::NotTypable, "definition " + d.name + " has no reading");
}

int cmd_check(const std::string& path) {
  auto loaded = load(path);
  if (!loaded) return kFailure;
  const ul::Program& p = loaded->prog;
  std::string last_type;
  for (const auto& d : p.defs) {
    try {
      last_type = check_def(d)->shown;
    } catch (const ul::Error& e) {
      diagnose(e, path + ", def " + d.name);
      return kFailure;
    }
  }
  if (p.main) {
    try {
      last_type = ul::pretty(ul::typecheck_u(ul::MixedContext{}, *p.main));
    } catch (const ul::Error& e) {
      diagnose(e, path + ", main");
      return kFailure;
    }
  }
  if (last_type.empty()) {
    std::cerr << "ul: " << path << " has no definitions\n";
    return kFailure;
  }
  std::cout << last_type << "\n";
  return kOk;
}

void print_stats(const ul::EvalStats& st) {
  std::cout << "steps=" << st.steps << "\n"
            << "new_allocs=" << st.new_allocs << "\n"
            << "frees=" << st.frees << "\n"
            << "copies=" << st.copies << "\n"
            << "boundary_crossings=" << st.boundary_crossings << "\n"
            << "u_pair_constructions=" << st.u_pair_constructions << "\n";
  for (const auto& [phase, n] : st.phase_new_allocs)
    std::cout << "new_allocs(" << phase << ")=" << n << "\n";
  for (const auto& [phase, n] : st.phase_u_pairs)
    std::cout << "u_pairs(" << phase << ")=" << n << "\n";
}

int cmd_run(const std::string& path, long fuel, const std::string& trace_path,
            bool stats) {
  auto loaded = load(path);
  if (!loaded) return kFailure;
  const ul::Program& p = loaded->prog;
  if (!p.main) {
    std::cerr << "ul: " << path << " has no main\n";
    return kFailure;
  }
  try {
    ul::typecheck_u(ul::MixedContext{}, *p.main);
  } catch (const ul::Error& e) {
    diagnose(e, path + ", main");
    return kFailure;
  }
  std::vector<ul::TraceEvent> trace;
  ul::EvalOptions opt;
  opt.fuel = fuel;
  if (!trace_path.empty()) opt.trace = &trace;
  ul::URunOutcome out = ul::run_u(*p.main, opt);
  if (!trace_path.empty()) {
    std::ofstream tf(trace_path, std::ios::binary);
    if (!tf) {
      std::cerr << "ul: cannot write " << trace_path << "\n";
      return kFailure;
    }
    for (const auto& ev : trace) {
      nlohmann::json j;
      j["step"] = ev.step;
      j["rule"] = ev.rule;
      j["pos"] = ev.pos;
      j["store_size"] = ev.store_size;
      j["allocs"] = ev.allocs;
      tf << j.dump() << "\n";
    }
  }
  switch (out.kind) {
    case ul::URunOutcome::Kind::Value:
      std::cout << ul::pretty(out.expr) << "\n";
      if (stats) print_stats(out.stats);
      return kOk;
    case ul::URunOutcome::Kind::Stuck:
      std::cout << "stuck after " << out.steps_used << " steps: " << out.stuck << "\n";
      return kFailure;
    case ul::URunOutcome::Kind::OutOfFuel:
      std::cout << "out of fuel after " << out.steps_used << " steps\n";
      return kFailure;
  }
  return kFailure;
}

int cmd_translate(const std::string& path) {
  auto loaded = load(path);
  if (!loaded) return kFailure;
  const ul::Program& p = loaded->prog;
  if (p.defs.empty() && !p.main) {
    std::cerr << "ul: " << path << " has no definitions\n";
    return kFailure;
  }
  try {
    for (const auto& d : p.defs) {
      // Defs already inline into main and into each other; re-emitting them
      // keeps the output readable. The U reading translates to itself.
      ul::UEx tr = d.u ? ul::funtrans_expr(d.u) : ul::funtrans_expr(d.l);
      std::cout << "def " << d.name << " = " << ul::pretty(tr) << "\n";
    }
    if (p.main) std::cout << "main = " << ul::pretty(ul::funtrans_expr(*p.main)) << "\n";
  } catch (const ul::Error& e) {
    diagnose(e, path);
    return kFailure;
  }
  return kOk;
}

int cmd_meta(long samples, std::uint64_t seed, const std::string& props,
             const std::string& json_path, int compat_size) {
  std::vector<std::string> want;
  {
    std::stringstream ss(props);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) want.push_back(item);
    }
  }
  auto wanted = [&](std::initializer_list<const char*> names) {
    if (want.empty()) return true;
    for (const auto& w : want)
      for (const char* n : names)
        if (w == n) return true;
    return false;
  };
  std::vector<ul::PropertyReport> reports;
  if (wanted({"subject_reduction", "sr"}))
    reports.push_back(ul::check_subject_reduction(samples, 50, seed));
  if (wanted({"differential", "diff"}))
    reports.push_back(ul::check_differential(samples, 100000, seed));
  if (wanted({"compat_determinism", "compat"}))
    reports.push_back(ul::check_compat_determinism(compat_size));
  if (wanted({"conversion_roundtrip", "roundtrip"}))
    reports.push_back(ul::check_conversion_roundtrip(samples, samples / 10 + 1, seed));
  if (wanted({"compositionality", "comp"}))
    reports.push_back(ul::check_compositionality_pairs(samples, seed));
  if (wanted({"rule_coverage", "coverage"}))
    reports.push_back(ul::check_rule_coverage(samples, seed));
  if (wanted({"mutation_sanity", "mutation"}))
    reports.push_back(ul::check_mutation_sanity(samples, seed));
  if (reports.empty()) {
    std::cerr << "ul: no property named in --props " << props << "\n";
    return kUsage;
  }
  bool violated = false;
  for (const auto& r : reports) {
    std::cout << ul::report_text(r);
    if (r.failures > 0) violated = true;
  }
  if (!json_path.empty()) {
    std::ofstream jf(json_path, std::ios::binary);
    if (!jf) {
      std::cerr << "ul: cannot write " << json_path << "\n";
      return kFailure;
    }
    jf << ul::reports_json(reports) << "\n";
  }
  return violated ? kPropertyViolation : kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"UL multi-language toolchain"};
  app.require_subcommand(1);

  std::string path;
  long fuel = 100000;
  std::string trace_path;
  bool stats = false;
  long samples = 1000;
  std::uint64_t seed = 1;
  std::string props;
  std::string json_path;
  int compat_size = 8;

  auto* check = app.add_subcommand("check", "Typecheck a file and print its type");
  check->add_option("file", path, "source file")->required();

  auto* run = app.add_subcommand("run", "Evaluate main and print the value");
  run->add_option("file", path, "source file")->required();
  run->add_option("--fuel", fuel, "step budget (default 100000)");
  run->add_option("--trace", trace_path, "write one JSON object per step to this path");
  run->add_flag("--stats", stats, "print key=value counters after the value");

  auto* translate = app.add_subcommand("translate", "Print the functional translation");
  translate->add_option("file", path, "source file")->required();

  auto* meta = app.add_subcommand("meta", "Run the metatheory property suites");
  meta->add_option("--samples", samples, "samples per property (default 1000)");
  meta->add_option("--seed", seed, "base seed (default 1)");
  meta->add_option("--props", props,
                   "comma list: sr,diff,compat,roundtrip,comp,coverage,mutation "
                   "(default all)");
  meta->add_option("--json", json_path, "also write a machine-readable summary here");
  meta->add_option("--compat-size", compat_size,
                   "node-count bound for the exhaustive compatibility check (default 8)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n";
    return kUsage;
  }

  try {
    if (check->parsed()) return cmd_check(path);
    if (run->parsed()) return cmd_run(path, fuel, trace_path, stats);
    if (translate->parsed()) return cmd_translate(path);
    if (meta->parsed()) return cmd_meta(samples, seed, props, json_path, compat_size);
  } catch (const ul::Error& e) {
    diagnose(e, "");
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "ul: internal error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
