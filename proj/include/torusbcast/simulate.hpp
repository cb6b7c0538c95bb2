#pragma once

// Store-and-forward simulation of a translated routing tree, and a verifier
// that re-checks the broadcast conditions on the simulated traffic: each
// item reaches each node exactly once, at the step equal to its distance,
// and every directed link carries the same number of items at every step.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "torusbcast/errors.hpp"
#include "torusbcast/schedule.hpp"
#include "torusbcast/torus.hpp"

namespace torusbcast {

/// Simulation holds a k^n x k^n receipt matrix, so it has its own budget.
inline constexpr std::uint64_t kDefaultSimulationBudget = 20'000;

/// One item crossing one directed link.
struct Transfer {
  int step = 0;
  std::uint64_t from = 0;  // node index of the sender
  DirectionIndex direction;
  std::uint64_t to = 0;
  std::uint64_t item = 0;  // node index of the item's source

  friend bool operator==(const Transfer&, const Transfer&) = default;
};

template <class O>
concept TransferObserver = requires(O& o, const Transfer& tr, int step) {
  o.on_step_begin(step);
  o.on_transfer(tr);
  o.on_step_end(step);
};

namespace detail {

/// Per-axis modular arithmetic on dense node indices.
class NodeArithmetic {
 public:
  explicit NodeArithmetic(const TorusShape& shape) : shape_(shape) {
    const auto n = static_cast<std::size_t>(shape.n());
    stride_.assign(n, 1);
    for (std::size_t i = n - 1; i > 0; --i)
      stride_[i - 1] = stride_[i] * static_cast<std::uint64_t>(shape.k());
  }

  std::vector<int> digits(const NodeCoord& c) const {
    std::vector<int> d(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) d[i] = c[i] < 0 ? c[i] + shape_.k() : c[i];
    return d;
  }

  std::uint64_t add(std::uint64_t node, const std::vector<int>& offset_digits) const {
    const auto k = static_cast<std::uint64_t>(shape_.k());
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < stride_.size(); ++i) {
      const std::uint64_t digit = (node / stride_[i]) % k;
      out += ((digit + static_cast<std::uint64_t>(offset_digits[i])) % k) * stride_[i];
    }
    return out;
  }

 private:
  TorusShape shape_;
  std::vector<std::uint64_t> stride_;
};

}  // namespace detail

/// Runs diameter(shape) steps. At step t, for every source s and every
/// offset d at distance t, node s + d receives item s from s + parent(d).
template <TransferObserver Observer>
void simulate(const RoutingTree& tree, Observer& observer,
              std::uint64_t max_nodes = kDefaultSimulationBudget) {
  const auto& shape = tree.shape();
  check_budget(shape.node_count(), max_nodes);
  const detail::NodeArithmetic arith(shape);

  struct Edge {
    std::vector<int> offset;
    std::vector<int> parent;
    DirectionIndex direction;
  };
  std::vector<std::vector<Edge>> by_step(static_cast<std::size_t>(diameter(shape)) + 1);
  for (const auto& [offset, dir] : tree.arrivals()) {
    by_step[static_cast<std::size_t>(norm(offset, shape))].push_back(
        {arith.digits(offset), arith.digits(parent_offset(offset, dir, shape)), dir});
  }

  const std::uint64_t nodes = shape.node_count();
  for (int t = 1; t <= diameter(shape); ++t) {
    observer.on_step_begin(t);
    for (const auto& e : by_step[static_cast<std::size_t>(t)]) {
      for (std::uint64_t s = 0; s < nodes; ++s) {
        observer.on_transfer(Transfer{t, arith.add(s, e.parent), e.direction, arith.add(s, e.offset), s});
      }
    }
    observer.on_step_end(t);
  }
}

/// Collects every transfer and the final per-node inventories.
struct TranscriptRecorder {
  explicit TranscriptRecorder(const TorusShape& shape)
      : inventories(shape.node_count()) {
    for (std::uint64_t x = 0; x < shape.node_count(); ++x) inventories[x].push_back(x);
  }

  void on_step_begin(int) {}
  void on_transfer(const Transfer& tr) {
    transcript.push_back(tr);
    inventories[tr.to].push_back(tr.item);
  }
  void on_step_end(int step) {
    held_after_step.push_back(0);
    for (const auto& inv : inventories) held_after_step.back() += inv.size();
    (void)step;
  }

  std::vector<Transfer> transcript;
  std::vector<std::vector<std::uint64_t>> inventories;
  /// Total items held across all nodes after each step.
  std::vector<std::uint64_t> held_after_step;
};

struct Violation {
  std::uint64_t node = 0;
  std::uint64_t item = 0;
  std::string detail;
};

struct VerificationReport {
  bool nodup_ok = true;
  bool shortest_ok = true;
  bool balance_ok = true;
  int steps = 0;
  std::uint64_t violation_count = 0;
  /// At most kMaxListed entries; violation_count has the total.
  std::vector<Violation> violations;

  static constexpr std::size_t kMaxListed = 32;

  bool ok() const { return nodup_ok && shortest_ok && balance_ok; }
};

namespace detail {

class VerifyingObserver {
 public:
  VerifyingObserver(const TorusShape& shape, VerificationReport& report)
      : shape_(shape),
        nodes_(shape.node_count()),
        links_(2 * static_cast<std::uint64_t>(shape.n()) * nodes_),
        report_(report),
        held_(nodes_ * nodes_, false),
        incoming_(nodes_ * nodes_, false),
        load_(links_, 0) {
    const auto n = static_cast<std::size_t>(shape.n());
    coords_.reserve(nodes_ * n);
    neighbor_.reserve(links_);
    for (std::uint64_t x = 0; x < nodes_; ++x) {
      const NodeCoord c = node_at(x, shape);
      coords_.insert(coords_.end(), c.values().begin(), c.values().end());
      for (const auto& d : all_directions(shape)) neighbor_.push_back(node_index(translate(c, d, shape), shape));
      held_[x * nodes_ + x] = true;
    }
  }

  void on_step_begin(int) { std::fill(load_.begin(), load_.end(), 0); }

  void on_transfer(const Transfer& tr) {
    const int step = tr.step;
    if (!held_[tr.from * nodes_ + tr.item]) {
      report_.shortest_ok = false;
      flag(tr.from, tr.item, "step " + std::to_string(step) + ": sender does not hold the item");
    }
    if (neighbor_[link(tr.from, tr.direction)] != tr.to) {
      report_.shortest_ok = false;
      flag(tr.to, tr.item, "step " + std::to_string(step) + ": not adjacent to sender");
    }
    const std::uint64_t cell = tr.to * nodes_ + tr.item;
    if (held_[cell] || incoming_[cell]) {
      report_.nodup_ok = false;
      flag(tr.to, tr.item, "step " + std::to_string(step) + ": duplicate receipt");
    } else {
      incoming_[cell] = true;
      pending_.push_back(cell);
    }
    const int d = node_distance(tr.item, tr.to);
    if (d != step) {
      report_.shortest_ok = false;
      flag(tr.to, tr.item,
           "received at step " + std::to_string(step) + " but distance is " + std::to_string(d));
    }
    ++load_[link(tr.from, tr.direction)];
  }

  void on_step_end(int step) {
    report_.steps = step;
    // Items received during a step can be forwarded from the next one on.
    for (auto cell : pending_) {
      held_[cell] = true;
      incoming_[cell] = false;
    }
    pending_.clear();
    const auto [lo, hi] = std::minmax_element(load_.begin(), load_.end());
    if (*lo != *hi) {
      report_.balance_ok = false;
      const auto node = static_cast<std::uint64_t>(lo - load_.begin()) /
                        (2 * static_cast<std::uint64_t>(shape_.n()));
      flag(node, 0,
           "step " + std::to_string(step) + ": link loads range from " + std::to_string(*lo) +
               " to " + std::to_string(*hi));
    }
  }

  void finish() {
    for (std::uint64_t x = 0; x < nodes_; ++x) {
      for (std::uint64_t s = 0; s < nodes_; ++s) {
        if (!held_[x * nodes_ + s]) {
          report_.nodup_ok = false;
          flag(x, s, "item never received");
        }
      }
    }
  }

 private:
  std::uint64_t link(std::uint64_t node, const DirectionIndex& d) const {
    return node * 2 * static_cast<std::uint64_t>(shape_.n()) + static_cast<std::uint64_t>(d.index());
  }

  int node_distance(std::uint64_t a, std::uint64_t b) const {
    const auto n = static_cast<std::size_t>(shape_.n());
    int d = 0;
    for (std::size_t i = 0; i < n; ++i) d += ring_distance(coords_[a * n + i], coords_[b * n + i], shape_.k());
    return d;
  }

  void flag(std::uint64_t node, std::uint64_t item, std::string detail) {
    ++report_.violation_count;
    if (report_.violations.size() < VerificationReport::kMaxListed)
      report_.violations.push_back({node, item, std::move(detail)});
  }

  TorusShape shape_;
  std::uint64_t nodes_;
  std::uint64_t links_;
  VerificationReport& report_;
  std::vector<int> coords_;              // centered coordinates, n per node
  std::vector<std::uint64_t> neighbor_;  // neighbor_[link]
  std::vector<bool> held_;      // held_[node * nodes_ + item]
  std::vector<bool> incoming_;  // received during the current step
  std::vector<std::uint64_t> pending_;
  std::vector<std::uint64_t> load_;
};

}  // namespace detail

/// Simulates `tree` and checks the three broadcast conditions.
inline VerificationReport verify_schedule(const RoutingTree& tree,
                                          std::uint64_t max_nodes = kDefaultSimulationBudget) {
  check_budget(tree.shape().node_count(), max_nodes);
  VerificationReport report;
  detail::VerifyingObserver observer(tree.shape(), report);
  simulate(tree, observer, max_nodes);
  observer.finish();
  return report;
}

}  // namespace torusbcast
