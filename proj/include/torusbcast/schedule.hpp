#pragma once

// Translation-invariant routing trees for all-port all-to-all broadcast.
//
// A tree assigns to every nonzero offset d the direction e over which an item
// arrives at relative position d; it came from d - e, one hop closer to its
// source. Translating the tree to every source yields the full schedule:
// at step t, every node s + d with |d| = t receives item s over the link from
// s + d - e.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "torusbcast/errors.hpp"
#include "torusbcast/torus.hpp"

namespace torusbcast {

/// Raised when an arrival assignment breaks a routing-tree invariant.
class TreeInvariantError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum class RoutingRule {
  /// Any direction whose reversal shortens the distance to the source.
  ShortestPath,
  /// Only directions on the axes with the smallest nonzero ring distance.
  NearestAxis,
};

/// Directions over which an item can arrive at offset `offset` along a
/// shortest path, in DirectionIndex order.
inline std::vector<DirectionIndex> admissible_directions(const NodeCoord& offset,
                                                         const TorusShape& shape,
                                                         RoutingRule rule = RoutingRule::ShortestPath) {
  if (offset.size() != static_cast<std::size_t>(shape.n()))
    throw DomainError("admissible_directions: dimension mismatch");
  if (offset.is_zero()) throw DomainError("admissible_directions: zero offset has no arrival");

  int nearest = shape.half() + 1;
  if (rule == RoutingRule::NearestAxis) {
    for (std::size_t i = 0; i < offset.size(); ++i) {
      const int d = std::abs(offset[i]);
      if (d != 0) nearest = std::min(nearest, d);
    }
  }

  std::vector<DirectionIndex> out;
  for (std::size_t i = 0; i < offset.size(); ++i) {
    const int c = offset[i];
    if (c == 0) continue;
    if (rule == RoutingRule::NearestAxis && std::abs(c) != nearest) continue;
    const int axis = static_cast<int>(i) + 1;
    if (!shape.odd() && c == shape.half()) {
      out.push_back({axis, 1});
      out.push_back({axis, -1});
    } else {
      out.push_back({axis, c > 0 ? 1 : -1});
    }
  }
  return out;
}

/// offset - direction, canonicalized.
inline NodeCoord parent_offset(const NodeCoord& offset, const DirectionIndex& dir,
                               const TorusShape& shape) {
  return translate(offset, DirectionIndex{dir.axis, -dir.sign}, shape);
}

class RoutingTree {
 public:
  using Map = std::map<NodeCoord, DirectionIndex>;

  /// Validates totality and that every arrival shortens the path by one hop.
  RoutingTree(TorusShape shape, Map arrival) : shape_(shape), arrival_(std::move(arrival)) {
    const auto n = static_cast<std::size_t>(shape_.n());
    for (const auto& [offset, dir] : arrival_) {
      if (offset.size() != n)
        throw TreeInvariantError("offset " + to_string(offset) + " has wrong dimension");
      if (offset.is_zero()) throw TreeInvariantError("zero offset must not have an arrival");
      if (dir.axis < 1 || dir.axis > shape_.n() || (dir.sign != 1 && dir.sign != -1))
        throw TreeInvariantError("offset " + to_string(offset) + ": invalid direction");
      const NodeCoord parent = parent_offset(offset, dir, shape_);
      if (norm(parent, shape_) != norm(offset, shape_) - 1)
        throw TreeInvariantError("offset " + to_string(offset) + ": arrival " + to_string(dir) +
                                 " does not come from a node one hop closer");
    }
    if (arrival_.size() != shape_.node_count() - 1)
      throw TreeInvariantError("tree has " + std::to_string(arrival_.size()) +
                               " entries, expected " + std::to_string(shape_.node_count() - 1));
  }

  const TorusShape& shape() const noexcept { return shape_; }
  const Map& arrivals() const noexcept { return arrival_; }
  DirectionIndex arrival(const NodeCoord& offset) const {
    auto it = arrival_.find(offset);
    if (it == arrival_.end()) throw DomainError("no arrival for offset " + to_string(offset));
    return it->second;
  }
  NodeCoord parent(const NodeCoord& offset) const {
    return parent_offset(offset, arrival(offset), shape_);
  }

  friend bool operator==(const RoutingTree&, const RoutingTree&) = default;

 private:
  TorusShape shape_;
  Map arrival_;
};

struct InfeasibleWitness {
  enum class Kind {
    /// |sphere(step)| is not a multiple of 2n.
    SphereNotDivisible,
    /// Quotas divide evenly but no assignment meets them.
    QuotaUnmatched,
  };
  Kind kind = Kind::SphereNotDivisible;
  int step = 0;
  std::uint64_t sphere_size = 0;
  int directions = 0;
  /// Offsets left without an arrival, or sphere_size mod directions.
  std::uint64_t deficit = 0;

  std::string describe() const {
    if (kind == Kind::SphereNotDivisible)
      return "step " + std::to_string(step) + ": |sphere(" + std::to_string(step) +
             ")| = " + std::to_string(sphere_size) + " not divisible by " +
             std::to_string(directions);
    return "step " + std::to_string(step) + ": balanced assignment leaves " +
           std::to_string(deficit) + " of " + std::to_string(sphere_size) + " offsets unassigned";
  }
};

struct BuildOptions {
  RoutingRule rule = RoutingRule::ShortestPath;
  std::uint64_t max_nodes = kDefaultNodeBudget;
};

using BuildOutcome = std::variant<RoutingTree, InfeasibleWitness>;

namespace detail {

/// Quota-constrained assignment of offsets to directions by augmenting
/// paths. Left vertices are tried in order, directions in index order.
class QuotaMatcher {
 public:
  QuotaMatcher(const std::vector<std::vector<int>>& options, int num_right, std::size_t quota)
      : options_(options), assigned_(options.size(), -1), holders_(static_cast<std::size_t>(num_right)),
        quota_(quota) {}

  std::size_t run() {
    std::size_t matched = 0;
    for (std::size_t u = 0; u < options_.size(); ++u) {
      visited_.assign(holders_.size(), false);
      if (augment(u)) ++matched;
    }
    return matched;
  }

  int assignment(std::size_t u) const { return assigned_[u]; }

 private:
  bool augment(std::size_t u) {
    for (int d : options_[u]) {
      const auto du = static_cast<std::size_t>(d);
      if (visited_[du]) continue;
      visited_[du] = true;
      if (holders_[du].size() < quota_) {
        take(u, d);
        return true;
      }
      const std::vector<std::size_t> current = holders_[du];
      for (std::size_t w : current) {
        if (augment(w)) {
          // w moved elsewhere, freeing a slot in d.
          take(u, d);
          return true;
        }
      }
    }
    return false;
  }

  void take(std::size_t u, int d) {
    if (assigned_[u] >= 0) {
      auto& old = holders_[static_cast<std::size_t>(assigned_[u])];
      old.erase(std::find(old.begin(), old.end(), u));
    }
    holders_[static_cast<std::size_t>(d)].push_back(u);
    assigned_[u] = d;
  }

  const std::vector<std::vector<int>>& options_;
  std::vector<int> assigned_;
  std::vector<std::vector<std::size_t>> holders_;
  std::vector<bool> visited_;
  std::size_t quota_;
};

}  // namespace detail

/// Builds a tree in which, at every step t, each of the 2n directions
/// receives exactly |sphere(t)| / 2n arrivals. Each level is solved
/// independently as a quota assignment.
inline BuildOutcome build_balanced_tree(const TorusShape& shape, const BuildOptions& options = {}) {
  check_budget(shape.node_count(), options.max_nodes);
  const int dirs = 2 * shape.n();
  RoutingTree::Map arrival;
  for (int t = 1; t <= diameter(shape); ++t) {
    const auto level = sphere(shape, t);
    const std::uint64_t size = level.size();
    if (size % static_cast<std::uint64_t>(dirs) != 0)
      return InfeasibleWitness{InfeasibleWitness::Kind::SphereNotDivisible, t, size, dirs,
                               size % static_cast<std::uint64_t>(dirs)};

    std::vector<std::vector<int>> choices(level.size());
    for (std::size_t i = 0; i < level.size(); ++i)
      for (const auto& d : admissible_directions(level[i], shape, options.rule))
        choices[i].push_back(d.index());

    detail::QuotaMatcher matcher(choices, dirs, size / static_cast<std::uint64_t>(dirs));
    const std::size_t matched = matcher.run();
    if (matched != level.size())
      return InfeasibleWitness{InfeasibleWitness::Kind::QuotaUnmatched, t, size, dirs,
                               size - matched};
    for (std::size_t i = 0; i < level.size(); ++i)
      arrival.emplace(level[i], DirectionIndex::from_index(matcher.assignment(i)));
  }
  return RoutingTree(shape, std::move(arrival));
}

/// Arrivals per step (index t - 1) per direction index.
struct LinkLoadProfile {
  std::vector<std::vector<std::uint64_t>> per_step;

  bool balanced() const {
    return std::all_of(per_step.begin(), per_step.end(), [](const auto& row) {
      return std::adjacent_find(row.begin(), row.end(), std::not_equal_to<>()) == row.end();
    });
  }

  /// The common per-link load of each step; meaningful when balanced.
  std::vector<std::uint64_t> uniform_loads() const {
    std::vector<std::uint64_t> out;
    for (const auto& row : per_step) out.push_back(row.empty() ? 0 : row.front());
    return out;
  }
};

inline LinkLoadProfile link_loads(const RoutingTree& tree) {
  const auto& shape = tree.shape();
  LinkLoadProfile profile;
  profile.per_step.assign(static_cast<std::size_t>(diameter(shape)),
                          std::vector<std::uint64_t>(2 * static_cast<std::size_t>(shape.n()), 0));
  for (const auto& [offset, dir] : tree.arrivals())
    ++profile.per_step[static_cast<std::size_t>(norm(offset, shape) - 1)]
                      [static_cast<std::size_t>(dir.index())];
  return profile;
}

}  // namespace torusbcast
