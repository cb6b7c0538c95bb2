#pragma once

// k-ary n-dimensional torus: shapes, centered coordinates, the ring metric,
// spheres around the reference node and the (t, p, v) class of a node.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "torusbcast/errors.hpp"

namespace torusbcast {

class TorusShape {
 public:
  TorusShape(int arity, int dimension) : k_(arity), n_(dimension) {
    if (arity < 3)
      throw DomainError("arity k must be at least 3, got " + std::to_string(arity));
    if (dimension < 1)
      throw DomainError("dimension n must be at least 1, got " + std::to_string(dimension));
    std::uint64_t count = 1;
    for (int i = 0; i < dimension; ++i) {
      if (__builtin_mul_overflow(count, static_cast<std::uint64_t>(arity), &count))
        throw DomainError("node count " + std::to_string(arity) + "^" +
                          std::to_string(dimension) + " overflows 64 bits");
    }
    node_count_ = count;
  }

  int k() const noexcept { return k_; }
  int n() const noexcept { return n_; }
  int half() const noexcept { return k_ / 2; }
  bool odd() const noexcept { return k_ % 2 != 0; }
  std::uint64_t node_count() const noexcept { return node_count_; }

  /// Smallest and largest centered coordinate value.
  int min_coord() const noexcept { return odd() ? -half() : -half() + 1; }
  int max_coord() const noexcept { return half(); }

  friend bool operator==(const TorusShape&, const TorusShape&) = default;

 private:
  int k_;
  int n_;
  std::uint64_t node_count_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const TorusShape& s) {
  return os << "(k=" << s.k() << ", n=" << s.n() << ")";
}

/// Reduce any integer to its centered representative modulo k. For even k
/// the boundary value is +k/2.
inline int canonical_coord(long long value, int k) {
  long long r = value % k;
  if (r < 0) r += k;
  const int half = k / 2;
  return static_cast<int>(r > half ? r - k : r);
}

/// A node (or relative offset) in centered coordinates.
class NodeCoord {
 public:
  NodeCoord() = default;

  /// Accepts arbitrary integers and reduces each modulo k.
  NodeCoord(const TorusShape& shape, std::span<const long long> values) {
    if (static_cast<int>(values.size()) != shape.n())
      throw DomainError("coordinate has " + std::to_string(values.size()) +
                        " components, shape dimension is " + std::to_string(shape.n()));
    coords_.reserve(values.size());
    for (long long v : values) coords_.push_back(canonical_coord(v, shape.k()));
  }

  NodeCoord(const TorusShape& shape, std::initializer_list<long long> values)
      : NodeCoord(shape, std::span<const long long>(values.begin(), values.size())) {}

  static NodeCoord reference(const TorusShape& shape) {
    NodeCoord c;
    c.coords_.assign(static_cast<std::size_t>(shape.n()), 0);
    return c;
  }

  /// Builds from values that are already canonical; throws otherwise.
  static NodeCoord from_centered(const TorusShape& shape, std::vector<int> values) {
    if (static_cast<int>(values.size()) != shape.n())
      throw DomainError("coordinate has " + std::to_string(values.size()) +
                        " components, shape dimension is " + std::to_string(shape.n()));
    for (int v : values) {
      if (v < shape.min_coord() || v > shape.max_coord())
        throw DomainError("coordinate value " + std::to_string(v) +
                          " is not canonical for k=" + std::to_string(shape.k()));
    }
    NodeCoord c;
    c.coords_ = std::move(values);
    return c;
  }

  std::size_t size() const noexcept { return coords_.size(); }
  int operator[](std::size_t i) const { return coords_[i]; }
  std::span<const int> values() const noexcept { return coords_; }
  bool is_zero() const {
    return std::all_of(coords_.begin(), coords_.end(), [](int c) { return c == 0; });
  }

  friend bool operator==(const NodeCoord&, const NodeCoord&) = default;
  friend auto operator<=>(const NodeCoord& a, const NodeCoord& b) {
    return a.coords_ <=> b.coords_;
  }

 private:
  std::vector<int> coords_;
};

inline std::string to_string(const NodeCoord& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(c[i]);
  }
  return s + ")";
}

inline std::ostream& operator<<(std::ostream& os, const NodeCoord& c) {
  return os << to_string(c);
}

/// One of the 2n link directions: an axis in 1..n and a sign.
struct DirectionIndex {
  int axis = 1;
  int sign = 1;

  /// Dense index in 0..2n-1, ordered (1,+), (1,-), (2,+), ...
  int index() const noexcept { return 2 * (axis - 1) + (sign < 0 ? 1 : 0); }

  static DirectionIndex from_index(int index) {
    return DirectionIndex{index / 2 + 1, index % 2 == 0 ? 1 : -1};
  }

  friend bool operator==(const DirectionIndex&, const DirectionIndex&) = default;
  friend auto operator<=>(const DirectionIndex& a, const DirectionIndex& b) {
    return a.index() <=> b.index();
  }
};

inline std::string to_string(const DirectionIndex& d) {
  return "(axis " + std::to_string(d.axis) + (d.sign > 0 ? ", +)" : ", -)");
}

inline std::vector<DirectionIndex> all_directions(const TorusShape& shape) {
  std::vector<DirectionIndex> dirs;
  dirs.reserve(2 * static_cast<std::size_t>(shape.n()));
  for (int i = 0; i < 2 * shape.n(); ++i) dirs.push_back(DirectionIndex::from_index(i));
  return dirs;
}

/// (t, p, v): distance, multiplicity of the minimal ring distance, and that
/// minimal ring distance.
struct ClassKey {
  int t = 0;
  int p = 0;
  int v = 0;

  friend bool operator==(const ClassKey&, const ClassKey&) = default;
  friend auto operator<=>(const ClassKey&, const ClassKey&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ClassKey& key) {
  return os << "(t=" << key.t << "; p=" << key.p << ", v=" << key.v << ")";
}

inline int ring_distance(long long a, long long b, int k) {
  long long d = (a - b) % k;
  if (d < 0) d += k;
  return static_cast<int>(std::min<long long>(d, k - d));
}

inline int distance(const NodeCoord& x, const NodeCoord& y, const TorusShape& shape) {
  if (x.size() != static_cast<std::size_t>(shape.n()) || y.size() != x.size())
    throw DomainError("distance: dimension mismatch");
  int d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d += ring_distance(x[i], y[i], shape.k());
  return d;
}

/// Distance from the reference node.
inline int norm(const NodeCoord& x, const TorusShape& shape) {
  return distance(x, NodeCoord::reference(shape), shape);
}

inline int diameter(const TorusShape& shape) { return shape.n() * shape.half(); }

/// x + delta, reduced modulo k per axis.
inline NodeCoord translate(const NodeCoord& x, const DirectionIndex& d, const TorusShape& shape) {
  std::vector<long long> v(x.values().begin(), x.values().end());
  v[static_cast<std::size_t>(d.axis - 1)] += d.sign;
  return NodeCoord(shape, v);
}

inline NodeCoord add(const NodeCoord& x, const NodeCoord& y, const TorusShape& shape) {
  std::vector<long long> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = static_cast<long long>(x[i]) + y[i];
  return NodeCoord(shape, v);
}

inline NodeCoord subtract(const NodeCoord& x, const NodeCoord& y, const TorusShape& shape) {
  std::vector<long long> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = static_cast<long long>(x[i]) - y[i];
  return NodeCoord(shape, v);
}

/// The 2n adjacent nodes in lexicographic order.
inline std::vector<NodeCoord> neighbors(const NodeCoord& x, const TorusShape& shape) {
  std::vector<NodeCoord> out;
  out.reserve(2 * static_cast<std::size_t>(shape.n()));
  for (const auto& d : all_directions(shape)) out.push_back(translate(x, d, shape));
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

template <class Visit>
void visit_sphere(const TorusShape& shape, int axis, int remaining, std::vector<long long>& cur,
                  Visit& visit) {
  const int n = shape.n();
  if (axis == n) {
    if (remaining == 0) visit(cur);
    return;
  }
  const int rest_max = (n - axis - 1) * shape.half();
  for (int c = shape.min_coord(); c <= shape.max_coord(); ++c) {
    const int d = std::abs(c);
    if (d > remaining || remaining - d > rest_max) continue;
    cur[static_cast<std::size_t>(axis)] = c;
    visit_sphere(shape, axis + 1, remaining - d, cur, visit);
  }
}

}  // namespace detail

/// All nodes at distance t from the reference node, lexicographically.
inline std::vector<NodeCoord> sphere(const TorusShape& shape, int t) {
  if (t < 0 || t > diameter(shape))
    throw DomainError("sphere radius " + std::to_string(t) + " outside 0.." +
                      std::to_string(diameter(shape)));
  std::vector<NodeCoord> out;
  std::vector<long long> cur(static_cast<std::size_t>(shape.n()), 0);
  auto push = [&](const std::vector<long long>& c) { out.emplace_back(shape, c); };
  detail::visit_sphere(shape, 0, t, cur, push);
  return out;
}

/// Class of a non-reference node. The reference node maps to (0, n, 0).
inline ClassKey class_of(const NodeCoord& x, const TorusShape& shape) {
  if (x.size() != static_cast<std::size_t>(shape.n()))
    throw DomainError("class_of: dimension mismatch");
  ClassKey key{0, 0, std::numeric_limits<int>::max()};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int d = ring_distance(x[i], 0, shape.k());
    key.t += d;
    if (d < key.v) {
      key.v = d;
      key.p = 1;
    } else if (d == key.v) {
      ++key.p;
    }
  }
  return key;
}

// Dense node numbering: mixed radix over standard coordinates 0..k-1,
// axis 1 most significant.

inline std::uint64_t node_index(const NodeCoord& x, const TorusShape& shape) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int c = x[i] < 0 ? x[i] + shape.k() : x[i];
    idx = idx * static_cast<std::uint64_t>(shape.k()) + static_cast<std::uint64_t>(c);
  }
  return idx;
}

inline NodeCoord node_at(std::uint64_t index, const TorusShape& shape) {
  if (index >= shape.node_count()) throw DomainError("node index out of range");
  std::vector<long long> v(static_cast<std::size_t>(shape.n()));
  for (int i = shape.n() - 1; i >= 0; --i) {
    v[static_cast<std::size_t>(i)] = static_cast<long long>(index % static_cast<std::uint64_t>(shape.k()));
    index /= static_cast<std::uint64_t>(shape.k());
  }
  return NodeCoord(shape, v);
}

/// Visits every node in lexicographic order of centered coordinates.
template <class Visit>
void for_each_node(const TorusShape& shape, Visit&& visit) {
  const auto n = static_cast<std::size_t>(shape.n());
  std::vector<int> cur(n, shape.min_coord());
  for (;;) {
    visit(std::span<const int>(cur));
    std::size_t i = n;
    for (;;) {
      if (i == 0) return;
      --i;
      if (cur[i] < shape.max_coord()) {
        ++cur[i];
        break;
      }
      cur[i] = shape.min_coord();
    }
  }
}

}  // namespace torusbcast
