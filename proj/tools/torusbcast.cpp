// torusbcast: optimal all-to-all broadcast on k-ary n-dimensional tori.
//
//   feasible K N          three-way feasibility verdict with witnesses
//   classes K N           (t, p, v) class counts, enumerated and factored
//   schedule K N --out F  build a balanced routing tree and write it to F
//   verify F              simulate a schedule file and check it
//   scan --k A..B --n C..D  feasibility grid
//   numtheory seq|legendre|carries|floorsum ...
//
// Exit codes: 0 success/feasible, 1 negative result, 2 usage or input
// error, 3 node budget exceeded.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "torusbcast/counting.hpp"
#include "torusbcast/feasibility.hpp"
#include "torusbcast/numtheory.hpp"
#include "torusbcast/schedule.hpp"
#include "torusbcast/schedule_io.hpp"
#include "torusbcast/simulate.hpp"
#include "torusbcast/torus.hpp"

namespace tb = torusbcast;
using ojson = nlohmann::ordered_json;

namespace {

enum ExitCode : int { kOk = 0, kNegative = 1, kUsage = 2, kBudget = 3 };

enum class Format { Human, Json, Csv };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Format parse_format(const std::string& s) {
  if (s == "human") return Format::Human;
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  throw UsageError("unknown format '" + s + "' (expected human, json or csv)");
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// --max-nodes, then $MAX_NODES, then the command default.
std::uint64_t resolve_budget(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MAX_NODES")) {
    if (auto v = parse_u64(env)) return *v;
    throw UsageError(std::string("MAX_NODES is not a nonnegative integer: ") + env);
  }
  return fallback;
}

tb::TorusShape make_shape(int k, int n) {
  try {
    return tb::TorusShape(k, n);
  } catch (const tb::DomainError& e) {
    throw UsageError(e.what());
  }
}

tb::IntRange parse_range(const std::string& s) {
  const auto dots = s.find("..");
  const std::string lo = dots == std::string::npos ? s : s.substr(0, dots);
  const std::string hi = dots == std::string::npos ? s : s.substr(dots + 2);
  auto a = parse_u64(lo);
  auto b = parse_u64(hi);
  if (!a || !b || *a > 1000 || *b > 1000) throw UsageError("invalid range '" + s + "' (expected LO..HI)");
  return {static_cast<int>(*a), static_cast<int>(*b)};
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------- feasible

int cmd_feasible(int k, int n, Format format, std::optional<std::uint64_t> max_nodes) {
  const auto shape = make_shape(k, n);
  const auto report = tb::feasibility_report(shape, resolve_budget(max_nodes, tb::kDefaultNodeBudget));

  switch (format) {
    case Format::Json:
      std::cout << tb::to_json(report).dump(2) << '\n';
      break;
    case Format::Csv: {
      tb::GridReport grid;
      grid.rows.push_back({k, n, shape.node_count(), report.verdict_bruteforce.value_or(false),
                           report.verdict_analytic, report.verdict_theorem, report.witnesses});
      tb::write_csv(std::cout, grid);
      break;
    }
    case Format::Human:
      std::cout << "torus k=" << k << " n=" << n << " (" << shape.node_count() << " nodes)\n";
      std::cout << "  class divisibility: "
                << (report.verdict_bruteforce ? yes_no(*report.verdict_bruteforce) : "not enumerated")
                << '\n';
      std::cout << "  analytic valuation: " << yes_no(report.verdict_analytic) << '\n';
      std::cout << "  closed form:        " << yes_no(report.verdict_theorem) << '\n';
      if (report.witnesses.empty()) {
        std::cout << "  witnesses: none\n";
      } else {
        std::cout << "  witnesses (count not divisible by " << 2 * n << "):\n";
        for (const auto& w : report.witnesses)
          std::cout << "    t=" << w.key.t << " p=" << w.key.p << " v=" << w.key.v
                    << " count=" << w.count << '\n';
      }
      break;
  }
  if (!report.agree()) {
    std::cerr << "error: feasibility predicates disagree for k=" << k << " n=" << n << '\n';
    return kNegative;
  }
  return report.feasible() ? kOk : kNegative;
}

// ----------------------------------------------------------------- classes

int cmd_classes(int k, int n, Format format, std::optional<std::uint64_t> max_nodes) {
  const auto shape = make_shape(k, n);
  const auto oracle = tb::class_table_oracle(shape, resolve_budget(max_nodes, tb::kDefaultNodeBudget));
  const auto rows = tb::compare_class_tables(oracle, tb::class_table_factored(shape));
  bool all_match = true;
  for (const auto& r : rows) all_match = all_match && r.match();

  switch (format) {
    case Format::Csv:
      std::cout << "t,p,v,count,factored,match\n";
      for (const auto& r : rows)
        std::cout << r.key.t << ',' << r.key.p << ',' << r.key.v << ',' << r.oracle << ','
                  << r.factored << ',' << yes_no(r.match()) << '\n';
      break;
    case Format::Json: {
      auto arr = ojson::array();
      for (const auto& r : rows)
        arr.push_back({{"t", r.key.t},
                       {"p", r.key.p},
                       {"v", r.key.v},
                       {"count", tb::count_to_json(r.oracle)},
                       {"factored", tb::count_to_json(r.factored)},
                       {"match", r.match()}});
      std::cout << arr.dump(2) << '\n';
      break;
    }
    case Format::Human:
      std::cout << std::setw(4) << "t" << std::setw(4) << "p" << std::setw(4) << "v" << std::setw(14)
                << "count" << std::setw(14) << "factored" << "  match\n";
      for (const auto& r : rows)
        std::cout << std::setw(4) << r.key.t << std::setw(4) << r.key.p << std::setw(4) << r.key.v
                  << std::setw(14) << r.oracle << std::setw(14) << r.factored << "  "
                  << yes_no(r.match()) << '\n';
      break;
  }
  return all_match ? kOk : kNegative;
}

// ---------------------------------------------------------------- schedule

void print_witness(const tb::InfeasibleWitness& w, Format format) {
  switch (format) {
    case Format::Json: {
      ojson j{{"feasible", false},
              {"step", w.step},
              {"kind", w.kind == tb::InfeasibleWitness::Kind::SphereNotDivisible ? "sphere_not_divisible"
                                                                                 : "quota_unmatched"},
              {"sphere_size", w.sphere_size},
              {"directions", w.directions},
              {"deficit", w.deficit}};
      std::cout << j.dump(2) << '\n';
      break;
    }
    case Format::Csv:
      std::cout << "step,kind,sphere_size,directions,deficit\n"
                << w.step << ','
                << (w.kind == tb::InfeasibleWitness::Kind::SphereNotDivisible ? "sphere_not_divisible"
                                                                            : "quota_unmatched")
                << ',' << w.sphere_size << ',' << w.directions << ',' << w.deficit << '\n';
      break;
    case Format::Human:
      std::cout << "no balanced schedule in this construction: " << w.describe() << '\n';
      break;
  }
}

void print_loads(const tb::TorusShape& shape, const tb::LinkLoadProfile& profile, Format format) {
  const auto loads = profile.uniform_loads();
  switch (format) {
    case Format::Json: {
      auto per_step = ojson::array();
      for (const auto& row : profile.per_step) per_step.push_back(row);
      ojson j{{"k", shape.k()},       {"n", shape.n()},         {"steps", profile.per_step.size()},
              {"balanced", profile.balanced()}, {"loads", loads}, {"per_direction", per_step}};
      std::cout << j.dump(2) << '\n';
      break;
    }
    case Format::Csv:
      std::cout << "step,axis,sign,load\n";
      for (std::size_t t = 0; t < profile.per_step.size(); ++t)
        for (std::size_t d = 0; d < profile.per_step[t].size(); ++d) {
          const auto dir = tb::DirectionIndex::from_index(static_cast<int>(d));
          std::cout << t + 1 << ',' << dir.axis << ',' << dir.sign << ',' << profile.per_step[t][d] << '\n';
        }
      break;
    case Format::Human:
      std::cout << "steps: " << profile.per_step.size() << "\nbalanced: " << yes_no(profile.balanced())
                << "\nloads:";
      for (auto l : loads) std::cout << ' ' << l;
      std::cout << '\n';
      break;
  }
}

int cmd_schedule(int k, int n, const std::string& out, const std::string& rule, Format format,
                 std::optional<std::uint64_t> max_nodes) {
  const auto shape = make_shape(k, n);
  tb::BuildOptions options;
  if (rule == "shortest") {
    options.rule = tb::RoutingRule::ShortestPath;
  } else if (rule == "nearest-axis") {
    options.rule = tb::RoutingRule::NearestAxis;
  } else {
    throw UsageError("unknown rule '" + rule + "' (expected shortest or nearest-axis)");
  }
  options.max_nodes = resolve_budget(max_nodes, tb::kDefaultNodeBudget);

  const auto outcome = tb::build_balanced_tree(shape, options);
  if (const auto* w = std::get_if<tb::InfeasibleWitness>(&outcome)) {
    print_witness(*w, format);
    return kNegative;
  }
  const auto& tree = std::get<tb::RoutingTree>(outcome);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw UsageError("cannot open '" + out + "' for writing");
  file << tb::write_schedule_json(tree);
  if (!file.flush()) throw UsageError("failed writing '" + out + "'");
  print_loads(shape, tb::link_loads(tree), format);
  return kOk;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const std::string& path, Format format, std::optional<std::uint64_t> max_nodes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::optional<tb::RoutingTree> tree;
  try {
    tree.emplace(tb::read_schedule_json(text));
  } catch (const tb::ScheduleFormatError& e) {
    std::cerr << path << ":" << e.line() << ": " << e.what() << '\n';
    return kUsage;
  }
  const auto report = tb::verify_schedule(*tree, resolve_budget(max_nodes, tb::kDefaultSimulationBudget));
  const auto profile = tb::link_loads(*tree);

  switch (format) {
    case Format::Json: {
      auto vs = ojson::array();
      for (const auto& v : report.violations)
        vs.push_back({{"node", v.node}, {"item", v.item}, {"detail", v.detail}});
      ojson j{{"k", tree->shape().k()},
              {"n", tree->shape().n()},
              {"nodup_ok", report.nodup_ok},
              {"shortest_ok", report.shortest_ok},
              {"balance_ok", report.balance_ok},
              {"steps", report.steps},
              {"loads", profile.uniform_loads()},
              {"violation_count", report.violation_count},
              {"violations", vs}};
      std::cout << j.dump(2) << '\n';
      break;
    }
    case Format::Csv:
      std::cout << "k,n,nodup_ok,shortest_ok,balance_ok,steps,violation_count\n"
                << tree->shape().k() << ',' << tree->shape().n() << ',' << yes_no(report.nodup_ok) << ','
                << yes_no(report.shortest_ok) << ',' << yes_no(report.balance_ok) << ',' << report.steps
                << ',' << report.violation_count << '\n';
      break;
    case Format::Human:
      std::cout << "torus k=" << tree->shape().k() << " n=" << tree->shape().n() << '\n'
                << "  received once:  " << yes_no(report.nodup_ok) << '\n'
                << "  shortest paths: " << yes_no(report.shortest_ok) << '\n'
                << "  balanced loads: " << yes_no(report.balance_ok) << '\n'
                << "  steps:          " << report.steps << '\n'
                << "  loads:         ";
      for (auto l : profile.uniform_loads()) std::cout << ' ' << l;
      std::cout << '\n';
      for (const auto& v : report.violations)
        std::cout << "  violation: node " << v.node << " item " << v.item << ": " << v.detail << '\n';
      if (report.violation_count > report.violations.size())
        std::cout << "  ... " << report.violation_count - report.violations.size() << " more\n";
      break;
  }
  return report.ok() ? kOk : kNegative;
}

// -------------------------------------------------------------------- scan

int cmd_scan(const std::string& k_range, const std::string& n_range, Format format,
             std::optional<std::uint64_t> max_nodes) {
  const auto grid = tb::cross_validate(parse_range(k_range), parse_range(n_range),
                                       resolve_budget(max_nodes, tb::kDefaultNodeBudget));
  switch (format) {
    case Format::Json:
      std::cout << tb::to_json(grid).dump(2) << '\n';
      break;
    case Format::Csv:
      tb::write_csv(std::cout, grid);
      break;
    case Format::Human:
      std::cout << std::setw(4) << "k" << std::setw(4) << "n" << std::setw(10) << "nodes"
                << "  brute  analytic  theorem  first witness\n";
      for (const auto& r : grid.rows)
        std::cout << std::setw(4) << r.k << std::setw(4) << r.n << std::setw(10) << r.nodes << "  "
                  << std::setw(5) << yes_no(r.brute) << "  " << std::setw(8) << yes_no(r.analytic) << "  "
                  << std::setw(7) << yes_no(r.theorem) << "  "
                  << (r.witnesses.empty() ? "-" : tb::to_string(r.witnesses.front())) << '\n';
      break;
  }
  for (const auto& r : grid.disagreements())
    std::cerr << "error: predicates disagree at k=" << r.k << " n=" << r.n << '\n';
  return grid.all_agree() ? kOk : kNegative;
}

// --------------------------------------------------------------- numtheory

std::uint64_t arg_u64(const std::vector<std::string>& args, std::size_t i, const char* what) {
  if (i >= args.size()) throw UsageError(std::string("missing argument ") + what);
  auto v = parse_u64(args[i]);
  if (!v) throw UsageError(std::string("invalid ") + what + " '" + args[i] + "'");
  return *v;
}

int cmd_numtheory(const std::string& sub, const std::vector<std::string>& args) {
  auto require_count = [&](std::size_t count) {
    if (args.size() != count)
      throw UsageError("numtheory " + sub + " takes " + std::to_string(count) + " arguments");
  };
  auto require_prime = [](std::uint64_t q) {
    if (!tb::is_prime(q)) throw UsageError(std::to_string(q) + " is not prime");
  };
  auto require_base = [](std::uint64_t q) {
    if (q < 2) throw UsageError("base must be at least 2");
  };

  if (sub == "seq") {
    require_count(2);
    const auto q = arg_u64(args, 0, "q");
    const auto r = arg_u64(args, 1, "r");
    require_base(q);
    if (r > 64) throw UsageError("depth too large");
    const auto seq = tb::s_sequence(q, static_cast<unsigned>(r));
    for (std::size_t i = 0; i < seq.size(); ++i) std::cout << (i ? " " : "") << seq[i];
    std::cout << '\n';
  } else if (sub == "legendre") {
    require_count(2);
    const auto q = arg_u64(args, 0, "q");
    require_prime(q);
    std::cout << tb::valuation_factorial(q, arg_u64(args, 1, "p")) << '\n';
  } else if (sub == "carries") {
    require_count(3);
    const auto q = arg_u64(args, 0, "q");
    require_prime(q);
    const auto a = arg_u64(args, 1, "a");
    const auto b = arg_u64(args, 2, "b");
    std::cout << "carries=" << tb::carries_in_addition(a, b, q)
              << " valuation=" << tb::valuation(q, tb::binomial(a + b, a)) << '\n';
  } else if (sub == "floorsum") {
    require_count(2);
    const auto m = arg_u64(args, 0, "m");
    const auto q = arg_u64(args, 1, "q");
    require_base(q);
    std::cout << tb::floor_sum(m, q) << '\n';
  } else {
    throw UsageError("unknown numtheory subcommand '" + sub + "' (seq, legendre, carries, floorsum)");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal all-to-all broadcast on k-ary n-dimensional tori"};
  app.require_subcommand(1);

  std::string format_name = "human";
  std::optional<std::uint64_t> max_nodes;
  int k = 0;
  int n = 0;

  auto add_common = [&](CLI::App* cmd, bool budget) {
    cmd->add_option("--format", format_name, "Output format: human, json or csv");
    if (budget) cmd->add_option("--max-nodes", max_nodes, "Node budget (also $MAX_NODES)");
  };
  auto add_shape = [&](CLI::App* cmd) {
    cmd->add_option("k", k, "Arity")->required();
    cmd->add_option("n", n, "Dimension")->required();
  };

  auto* feasible = app.add_subcommand("feasible", "Decide optimal broadcast feasibility");
  add_shape(feasible);
  add_common(feasible, true);

  auto* classes = app.add_subcommand("classes", "Class counts, enumerated and factored");
  add_shape(classes);
  add_common(classes, true);

  std::string out;
  std::string rule = "shortest";
  auto* schedule = app.add_subcommand("schedule", "Build a balanced schedule file");
  add_shape(schedule);
  schedule->add_option("--out", out, "Schedule file to write")->required();
  schedule->add_option("--rule", rule, "Arrival rule: shortest or nearest-axis");
  add_common(schedule, true);

  std::string path;
  auto* verify = app.add_subcommand("verify", "Simulate and check a schedule file");
  verify->add_option("file", path, "Schedule file")->required();
  add_common(verify, true);

  std::string k_range;
  std::string n_range;
  auto* scan = app.add_subcommand("scan", "Cross-validate feasibility over a grid");
  scan->add_option("--k", k_range, "Arity range LO..HI")->required();
  scan->add_option("--n", n_range, "Dimension range LO..HI")->required();
  add_common(scan, true);

  std::string nt_sub;
  std::vector<std::string> nt_args;
  auto* numtheory = app.add_subcommand("numtheory", "Number-theory helpers");
  numtheory->add_option("op", nt_sub, "seq | legendre | carries | floorsum")->required();
  numtheory->add_option("args", nt_args, "Arguments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Format format = parse_format(format_name);
    if (*feasible) return cmd_feasible(k, n, format, max_nodes);
    if (*classes) return cmd_classes(k, n, format, max_nodes);
    if (*schedule) return cmd_schedule(k, n, out, rule, format, max_nodes);
    if (*verify) return cmd_verify(path, format, max_nodes);
    if (*scan) return cmd_scan(k_range, n_range, format, max_nodes);
    if (*numtheory) return cmd_numtheory(nt_sub, nt_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const tb::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const tb::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
