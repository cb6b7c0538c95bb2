#pragma once

// Node counts per (t, p, v) class: a brute-force tally over every node and a
// symmetry-factored count that only enumerates value patterns of one
// quadrant.
//
// A class (t, p, v) holds the nodes at distance t whose minimal per-axis ring
// distance is v, attained on exactly p axes. Its size factors as
//
//   M = C(n, p) * G * N
//
// where C(n, p) picks the p minimal axes, G counts sign choices and N counts
// the ring-distance patterns y on the n - p remaining ("free") axes, with
// v + 1 <= y_i <= floor(k/2) and sum y_i = t - p*v.
//
// Odd k: every nonzero ring distance has two signed coordinates, so
// G = 2^(n-p) for v = 0 and 2^n otherwise, and N is a plain pattern count.
// Even k: the boundary distance k/2 names a single coordinate. G keeps only
// the p minimal axes (1 if v is 0 or k/2, else 2^p) and N weights each
// pattern by 2^(n-p-h), where h is the number of its free axes on the
// boundary.

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusbcast/errors.hpp"
#include "torusbcast/numtheory.hpp"
#include "torusbcast/torus.hpp"

namespace torusbcast {

struct ClassTable {
  TorusShape shape;
  std::map<ClassKey, BigInt> entries;

  BigInt count(const ClassKey& key) const {
    auto it = entries.find(key);
    return it == entries.end() ? BigInt(0) : it->second;
  }

  BigInt total() const {
    BigInt sum = 0;
    for (const auto& [key, c] : entries) sum += c;
    return sum;
  }
};

/// Tally of class_of over every non-reference node.
inline ClassTable class_table_oracle(const TorusShape& shape,
                                     std::uint64_t budget = kDefaultNodeBudget) {
  check_budget(shape.node_count(), budget);
  const int k = shape.k();
  std::map<ClassKey, std::uint64_t> tally;
  for_each_node(shape, [&](std::span<const int> x) {
    ClassKey key{0, 0, k};
    for (int c : x) {
      const int d = ring_distance(c, 0, k);
      key.t += d;
      if (d < key.v) {
        key.v = d;
        key.p = 1;
      } else if (d == key.v) {
        ++key.p;
      }
    }
    if (key.t > 0) ++tally[key];
  });
  ClassTable table{shape, {}};
  for (const auto& [key, c] : tally) table.entries.emplace(key, BigInt(c));
  return table;
}

/// Number of centered coordinates at ring distance `value` from 0.
inline int sign_multiplicity(int value, const TorusShape& shape) {
  if (value < 0 || value > shape.half())
    throw DomainError("ring distance " + std::to_string(value) + " out of range for k=" +
                      std::to_string(shape.k()));
  if (value == 0) return 1;
  if (!shape.odd() && value == shape.half()) return 1;
  return 2;
}

namespace detail {
inline void require_key(const TorusShape& shape, const ClassKey& key) {
  if (key.p < 1 || key.p > shape.n())
    throw DomainError("class multiplicity p=" + std::to_string(key.p) + " outside 1.." +
                      std::to_string(shape.n()));
  if (key.v < 0 || key.v > shape.half())
    throw DomainError("class value v=" + std::to_string(key.v) + " outside 0.." +
                      std::to_string(shape.half()));
  if (key.t < 0) throw DomainError("class distance t must be nonnegative");
}
}  // namespace detail

/// Plain counts of free-axis patterns for `key`, grouped by the number h of
/// free axes sitting at the even-k boundary k/2. For odd k every pattern
/// lands in h = 0. Returned vector has n - p + 1 entries.
inline std::vector<BigInt> quadrant_patterns_by_boundary(const TorusShape& shape,
                                                         const ClassKey& key) {
  detail::require_key(shape, key);
  const int free_axes = shape.n() - key.p;
  const int target = key.t - key.p * key.v;
  std::vector<BigInt> by_h(static_cast<std::size_t>(free_axes) + 1, 0);
  if (target < 0) return by_h;

  const int lo = key.v + 1;
  const int hi = shape.half();
  const bool has_boundary = !shape.odd();

  // ways[h][s]: patterns on the axes processed so far with sum s and h
  // boundary values.
  const auto width = static_cast<std::size_t>(target) + 1;
  std::vector<std::vector<BigInt>> ways(static_cast<std::size_t>(free_axes) + 1,
                                        std::vector<BigInt>(width, 0));
  ways[0][0] = 1;
  for (int axis = 0; axis < free_axes; ++axis) {
    std::vector<std::vector<BigInt>> next(ways.size(), std::vector<BigInt>(width, 0));
    for (std::size_t h = 0; h < ways.size(); ++h) {
      for (std::size_t s = 0; s < width; ++s) {
        if (ways[h][s] == 0) continue;
        for (int y = lo; y <= hi && s + static_cast<std::size_t>(y) < width; ++y) {
          const std::size_t nh = (has_boundary && y == hi) ? h + 1 : h;
          next[nh][s + static_cast<std::size_t>(y)] += ways[h][s];
        }
      }
    }
    ways = std::move(next);
  }
  for (std::size_t h = 0; h < ways.size(); ++h) by_h[h] = ways[h][width - 1];
  return by_h;
}

/// Quadrant pattern count N for class `key` (see file comment).
inline BigInt N_quadrant(const TorusShape& shape, const ClassKey& key) {
  const auto by_h = quadrant_patterns_by_boundary(shape, key);
  const int free_axes = shape.n() - key.p;
  BigInt total = 0;
  for (std::size_t h = 0; h < by_h.size(); ++h) {
    if (shape.odd()) {
      total += by_h[h];
    } else {
      total += by_h[h] << (free_axes - static_cast<int>(h));
    }
  }
  return total;
}

/// Sign factor G for class `key` (see file comment).
inline BigInt sign_factor(const TorusShape& shape, const ClassKey& key) {
  detail::require_key(shape, key);
  BigInt g = 1;
  for (int i = 0; i < key.p; ++i) g *= sign_multiplicity(key.v, shape);
  if (shape.odd()) g <<= (shape.n() - key.p);
  return g;
}

/// C(n, p) * G * N: the size of class `key` without enumerating nodes.
inline BigInt class_count_factored(const TorusShape& shape, const ClassKey& key) {
  const BigInt n_count = N_quadrant(shape, key);
  if (n_count == 0) return 0;
  return binomial(static_cast<std::uint64_t>(shape.n()), static_cast<std::uint64_t>(key.p)) *
         sign_factor(shape, key) * n_count;
}

/// Smallest and largest t for which class (p, v) can be nonempty; lo > hi
/// when it is empty for every t >= 1.
struct ClassRange {
  int lo = 1;
  int hi = 0;
  bool empty() const noexcept { return lo > hi; }
};

inline ClassRange class_t_range(const TorusShape& shape, int p, int v) {
  const int free_axes = shape.n() - p;
  if (free_axes > 0 && v + 1 > shape.half()) return {};
  ClassRange r{p * v + free_axes * (v + 1), p * v + free_axes * shape.half()};
  if (r.lo < 1) r.lo = 1;
  return r;
}

/// Same table as the oracle, built from class_count_factored alone.
inline ClassTable class_table_factored(const TorusShape& shape) {
  ClassTable table{shape, {}};
  for (int p = 1; p <= shape.n(); ++p) {
    for (int v = 0; v <= shape.half(); ++v) {
      const auto range = class_t_range(shape, p, v);
      for (int t = range.lo; t <= range.hi; ++t) {
        const ClassKey key{t, p, v};
        BigInt c = class_count_factored(shape, key);
        if (c > 0) table.entries.emplace(key, std::move(c));
      }
    }
  }
  return table;
}

/// Oracle and factored counts side by side.
struct ClassComparisonRow {
  ClassKey key;
  BigInt oracle;
  BigInt factored;
  bool match() const { return oracle == factored; }
};

inline std::vector<ClassComparisonRow> compare_class_tables(const ClassTable& oracle,
                                                            const ClassTable& factored) {
  std::map<ClassKey, ClassComparisonRow> rows;
  for (const auto& [key, c] : oracle.entries) rows[key] = {key, c, 0};
  for (const auto& [key, c] : factored.entries) {
    auto& row = rows[key];
    row.key = key;
    row.factored = c;
  }
  std::vector<ClassComparisonRow> out;
  out.reserve(rows.size());
  for (auto& [key, row] : rows) out.push_back(std::move(row));
  return out;
}

inline void write_csv(std::ostream& os, const ClassTable& table) {
  os << "t,p,v,count\n";
  for (const auto& [key, c] : table.entries)
    os << key.t << ',' << key.p << ',' << key.v << ',' << c << '\n';
}

/// Counts are emitted as JSON numbers when they fit in 64 bits and as
/// decimal strings otherwise.
inline nlohmann::ordered_json count_to_json(const BigInt& c) {
  if (c <= std::numeric_limits<std::uint64_t>::max()) return c.convert_to<std::uint64_t>();
  return c.str();
}

inline nlohmann::ordered_json to_json(const ClassTable& table) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [key, c] : table.entries)
    arr.push_back({{"t", key.t}, {"p", key.p}, {"v", key.v}, {"count", count_to_json(c)}});
  return arr;
}

}  // namespace torusbcast
