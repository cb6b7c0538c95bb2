#pragma once

// Optimal all-to-all broadcast feasibility, decided three ways:
//  - brute force: every enumerated class count divisible by 2n,
//  - analytic: q-adic valuations of factored class counts at the extremal
//    distances of each (p, v) class, no node enumeration,
//  - closed form: n is a power of two and k is odd.

#include <algorithm>
#include <cstdint>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusbcast/counting.hpp"
#include "torusbcast/numtheory.hpp"
#include "torusbcast/torus.hpp"

namespace torusbcast {

/// A class whose size is not a multiple of the number of incoming links.
struct DivisibilityWitness {
  ClassKey key;
  BigInt count;
  int divisor = 0;

  friend bool operator==(const DivisibilityWitness&, const DivisibilityWitness&) = default;
};

inline std::string to_string(const DivisibilityWitness& w) {
  std::ostringstream os;
  os << "t=" << w.key.t << ";p=" << w.key.p << ";v=" << w.key.v << ";count=" << w.count;
  return os.str();
}

struct FeasibilityReport {
  TorusShape shape;
  /// Empty when the shape exceeds the enumeration budget.
  std::optional<bool> verdict_bruteforce;
  bool verdict_analytic = false;
  bool verdict_theorem = false;
  std::vector<DivisibilityWitness> witnesses;

  bool enumerated() const noexcept { return verdict_bruteforce.has_value(); }
  bool agree() const {
    if (verdict_analytic != verdict_theorem) return false;
    return !verdict_bruteforce || *verdict_bruteforce == verdict_theorem;
  }
  bool feasible() const { return verdict_theorem; }
};

inline bool theorem_predicate(const TorusShape& shape) {
  return shape.odd() && is_power_of_two(static_cast<std::uint64_t>(shape.n()));
}

/// Witnesses of class counts not divisible by 2n, smallest (t, p, v) first.
inline std::vector<DivisibilityWitness> divisibility_witnesses(const ClassTable& table) {
  const int divisor = 2 * table.shape.n();
  std::vector<DivisibilityWitness> out;
  for (const auto& [key, c] : table.entries) {
    if (key.t < 1) continue;
    if (c % divisor != 0) out.push_back({key, c, divisor});
  }
  return out;
}

/// Brute-force verdict only; verdict_analytic and verdict_theorem are left false.
inline FeasibilityReport divisibility_report(const TorusShape& shape,
                                             std::uint64_t budget = kDefaultNodeBudget) {
  FeasibilityReport report{shape, std::nullopt, false, false, {}};
  report.witnesses = divisibility_witnesses(class_table_oracle(shape, budget));
  report.verdict_bruteforce = report.witnesses.empty();
  return report;
}

/// Distances at which the analytic check evaluates class (p, v): the
/// smallest admissible t, where every free axis sits at v + 1 and N is
/// minimal, and for even k also the largest, where every free axis sits on
/// the boundary.
inline std::vector<int> extremal_distances(const TorusShape& shape, int p, int v) {
  const auto range = class_t_range(shape, p, v);
  if (range.empty()) return {};
  std::vector<int> ts{range.lo};
  if (!shape.odd() && range.hi != range.lo) ts.push_back(range.hi);
  return ts;
}

/// True iff for every nonempty class shape (p, v), every prime q | 2n and
/// every extremal t, v_q(class count) >= v_q(2n).
inline bool analytic_feasible(const TorusShape& shape) {
  const auto two_n = static_cast<std::uint64_t>(2 * shape.n());
  const auto primes = prime_factors(two_n);
  for (int p = 1; p <= shape.n(); ++p) {
    for (int v = 0; v <= shape.half(); ++v) {
      for (int t : extremal_distances(shape, p, v)) {
        const BigInt count = class_count_factored(shape, ClassKey{t, p, v});
        if (count == 0) continue;
        for (auto q : primes) {
          if (valuation(q, count) < valuation(q, two_n)) return false;
        }
      }
    }
  }
  return true;
}

/// All three verdicts. The brute-force verdict is computed only when
/// k^n <= budget.
inline FeasibilityReport feasibility_report(const TorusShape& shape,
                                            std::uint64_t budget = kDefaultNodeBudget) {
  FeasibilityReport report{shape, std::nullopt, false, false, {}};
  if (shape.node_count() <= budget) report = divisibility_report(shape, budget);
  report.verdict_analytic = analytic_feasible(shape);
  report.verdict_theorem = theorem_predicate(shape);
  return report;
}

struct IntRange {
  int lo = 0;
  int hi = -1;
};

struct GridRow {
  int k = 0;
  int n = 0;
  std::uint64_t nodes = 0;
  bool brute = false;
  bool analytic = false;
  bool theorem = false;
  std::vector<DivisibilityWitness> witnesses;

  bool agree() const { return brute == analytic && analytic == theorem; }
};

struct GridReport {
  std::vector<GridRow> rows;  // sorted by (k, n)

  bool all_agree() const {
    return std::all_of(rows.begin(), rows.end(), [](const GridRow& r) { return r.agree(); });
  }
  std::vector<GridRow> disagreements() const {
    std::vector<GridRow> out;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
                 [](const GridRow& r) { return !r.agree(); });
    return out;
  }
};

/// Runs the three predicates on every (k, n) in range with 3 <= k and
/// k^n <= node_budget. Cells are evaluated concurrently; row order is
/// (k, n) regardless of completion order.
inline GridReport cross_validate(IntRange k_range, IntRange n_range, std::uint64_t node_budget) {
  std::vector<std::future<GridRow>> pending;
  for (int k = std::max(k_range.lo, 3); k <= k_range.hi; ++k) {
    for (int n = std::max(n_range.lo, 1); n <= n_range.hi; ++n) {
      std::optional<TorusShape> shape;
      try {
        shape.emplace(k, n);
      } catch (const DomainError&) {
        continue;  // k^n overflows, far beyond any budget
      }
      if (shape->node_count() > node_budget) continue;
      pending.push_back(std::async(std::launch::async, [s = *shape, node_budget] {
        const auto report = feasibility_report(s, node_budget);
        return GridRow{s.k(),
                       s.n(),
                       s.node_count(),
                       report.verdict_bruteforce.value_or(false),
                       report.verdict_analytic,
                       report.verdict_theorem,
                       report.witnesses};
      }));
    }
  }
  GridReport grid;
  grid.rows.reserve(pending.size());
  for (auto& f : pending) grid.rows.push_back(f.get());
  return grid;
}

inline void write_csv(std::ostream& os, const GridReport& grid) {
  os << "k,n,nodes,brute,analytic,theorem,first_witness\n";
  for (const auto& r : grid.rows) {
    os << r.k << ',' << r.n << ',' << r.nodes << ',' << (r.brute ? "true" : "false") << ','
       << (r.analytic ? "true" : "false") << ',' << (r.theorem ? "true" : "false") << ','
       << (r.witnesses.empty() ? std::string() : to_string(r.witnesses.front())) << '\n';
  }
}

inline nlohmann::ordered_json to_json(const DivisibilityWitness& w) {
  return {{"t", w.key.t},
          {"p", w.key.p},
          {"v", w.key.v},
          {"count", count_to_json(w.count)},
          {"divisor", w.divisor}};
}

inline nlohmann::ordered_json to_json(const GridReport& grid) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : grid.rows) {
    nlohmann::ordered_json first = nullptr;
    if (!r.witnesses.empty()) first = to_json(r.witnesses.front());
    arr.push_back({{"k", r.k},
                   {"n", r.n},
                   {"nodes", r.nodes},
                   {"brute", r.brute},
                   {"analytic", r.analytic},
                   {"theorem", r.theorem},
                   {"first_witness", first}});
  }
  return arr;
}

inline nlohmann::ordered_json to_json(const FeasibilityReport& report) {
  nlohmann::ordered_json j;
  j["k"] = report.shape.k();
  j["n"] = report.shape.n();
  j["nodes"] = report.shape.node_count();
  j["enumerated"] = report.enumerated();
  j["bruteforce"] = report.verdict_bruteforce ? nlohmann::ordered_json(*report.verdict_bruteforce)
                                              : nlohmann::ordered_json(nullptr);
  j["analytic"] = report.verdict_analytic;
  j["theorem"] = report.verdict_theorem;
  j["agree"] = report.agree();
  auto ws = nlohmann::ordered_json::array();
  for (const auto& w : report.witnesses) ws.push_back(to_json(w));
  j["witnesses"] = std::move(ws);
  return j;
}

}  // namespace torusbcast
