#pragma once

// Schedule file format:
//
//   {"k": 5, "n": 2, "tree": [
//     {"offset": [-2, -2], "axis": 1, "sign": -1},
//     ...
//   ]}
//
// Entries are sorted by offset; offsets are centered with the even-k
// boundary written as +k/2. The writer emits one entry per line and is
// byte-deterministic. The reader reports the line of the offending entry.

#include <cstddef>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "torusbcast/errors.hpp"
#include "torusbcast/schedule.hpp"
#include "torusbcast/torus.hpp"

namespace torusbcast {

class ScheduleFormatError : public std::runtime_error {
 public:
  ScheduleFormatError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline std::string write_schedule_json(const RoutingTree& tree) {
  std::ostringstream os;
  os << "{\"k\": " << tree.shape().k() << ", \"n\": " << tree.shape().n() << ", \"tree\": [";
  bool first = true;
  for (const auto& [offset, dir] : tree.arrivals()) {
    os << (first ? "\n" : ",\n") << "  {\"offset\": [";
    for (std::size_t i = 0; i < offset.size(); ++i) os << (i ? ", " : "") << offset[i];
    os << "], \"axis\": " << dir.axis << ", \"sign\": " << dir.sign << '}';
    first = false;
  }
  os << "\n]}\n";
  return os.str();
}

namespace detail {

/// Input iterator over a string that counts the newlines it has consumed.
class LineCountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  LineCountingIterator() = default;
  LineCountingIterator(const char* p, std::size_t* line) : p_(p), line_(line) {}

  reference operator*() const { return *p_; }
  LineCountingIterator& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  LineCountingIterator operator++(int) {
    auto tmp = *this;
    ++*this;
    return tmp;
  }
  friend bool operator==(const LineCountingIterator& a, const LineCountingIterator& b) {
    return a.p_ == b.p_;
  }

 private:
  const char* p_ = nullptr;
  std::size_t* line_ = nullptr;
};

/// Builds the DOM like nlohmann's own parser and records the line on which
/// every top-level key and every tree entry begins.
class LineTrackingSax {
 public:
  using json = nlohmann::json;
  using number_integer_t = json::number_integer_t;
  using number_unsigned_t = json::number_unsigned_t;
  using number_float_t = json::number_float_t;
  using string_t = json::string_t;
  using binary_t = json::binary_t;

  LineTrackingSax(json& root, const std::size_t* line) : dom_(root, true), line_(line) {}

  bool null() { return dom_.null(); }
  bool boolean(bool v) { return dom_.boolean(v); }
  bool number_integer(number_integer_t v) { return dom_.number_integer(v); }
  bool number_unsigned(number_unsigned_t v) { return dom_.number_unsigned(v); }
  bool number_float(number_float_t v, const string_t& s) { return dom_.number_float(v, s); }
  bool string(string_t& v) { return dom_.string(v); }
  bool binary(binary_t& v) { return dom_.binary(v); }

  bool start_object(std::size_t n) {
    if (depth_ == 2 && in_tree_) entry_lines.push_back(*line_);
    ++depth_;
    return dom_.start_object(n);
  }
  bool end_object() {
    --depth_;
    return dom_.end_object();
  }
  bool start_array(std::size_t n) {
    if (depth_ == 1 && last_top_key_ == "tree") {
      in_tree_ = true;
      tree_line = *line_;
    }
    ++depth_;
    return dom_.start_array(n);
  }
  bool end_array() {
    --depth_;
    if (depth_ == 1) in_tree_ = false;
    return dom_.end_array();
  }
  bool key(string_t& k) {
    if (depth_ == 1) {
      last_top_key_ = k;
      key_lines[k] = *line_;
    }
    return dom_.key(k);
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
    error_line = *line_;
    error_message = ex.what();
    return false;
  }

  std::vector<std::size_t> entry_lines;
  std::map<std::string, std::size_t> key_lines;
  std::size_t tree_line = 1;
  std::optional<std::size_t> error_line;
  std::string error_message;

 private:
  nlohmann::detail::json_sax_dom_parser<json> dom_;
  const std::size_t* line_;
  int depth_ = 0;
  bool in_tree_ = false;
  std::string last_top_key_;
};

inline int require_int(const nlohmann::json& j, const char* field, std::size_t line) {
  if (!j.contains(field)) throw ScheduleFormatError(line, std::string("missing field \"") + field + "\"");
  const auto& v = j.at(field);
  if (!v.is_number_integer())
    throw ScheduleFormatError(line, std::string("field \"") + field + "\" must be an integer");
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ScheduleFormatError(line, std::string("field \"") + field + "\" out of range");
  return static_cast<int>(x);
}

}  // namespace detail

/// Parses and validates a schedule file. Every structural or invariant
/// violation raises ScheduleFormatError carrying a 1-based line number.
inline RoutingTree read_schedule_json(std::string_view text) {
  using nlohmann::json;
  std::size_t line = 1;
  json root;
  detail::LineTrackingSax sax(root, &line);
  const detail::LineCountingIterator first(text.data(), &line);
  const detail::LineCountingIterator last(text.data() + text.size(), &line);
  const bool parsed = json::sax_parse(first, last, &sax);
  if (!parsed) {
    std::string msg = sax.error_message.empty() ? "malformed JSON" : sax.error_message;
    throw ScheduleFormatError(sax.error_line.value_or(line), msg);
  }
  if (!root.is_object()) throw ScheduleFormatError(1, "top level must be an object");

  auto key_line = [&](const char* key) {
    auto it = sax.key_lines.find(key);
    return it == sax.key_lines.end() ? std::size_t{1} : it->second;
  };
  const int k = detail::require_int(root, "k", key_line("k"));
  const int n = detail::require_int(root, "n", key_line("n"));
  std::optional<TorusShape> shape;
  try {
    shape.emplace(k, n);
  } catch (const DomainError& e) {
    throw ScheduleFormatError(key_line(k < 3 ? "k" : "n"), e.what());
  }
  if (!root.contains("tree")) throw ScheduleFormatError(1, "missing field \"tree\"");
  const auto& entries = root.at("tree");
  if (!entries.is_array()) throw ScheduleFormatError(key_line("tree"), "\"tree\" must be an array");

  RoutingTree::Map arrival;
  const NodeCoord* previous = nullptr;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::size_t at = i < sax.entry_lines.size() ? sax.entry_lines[i] : sax.tree_line;
    const auto& e = entries[i];
    if (!e.is_object()) throw ScheduleFormatError(at, "tree entry must be an object");
    if (!e.contains("offset")) throw ScheduleFormatError(at, "missing field \"offset\"");
    const auto& off = e.at("offset");
    if (!off.is_array()) throw ScheduleFormatError(at, "\"offset\" must be an array");
    std::vector<int> values;
    for (const auto& c : off) {
      if (!c.is_number_integer()) throw ScheduleFormatError(at, "offset components must be integers");
      values.push_back(c.get<int>());
    }
    NodeCoord offset;
    try {
      offset = NodeCoord::from_centered(*shape, std::move(values));
    } catch (const DomainError& ex) {
      throw ScheduleFormatError(at, ex.what());
    }
    if (offset.is_zero()) throw ScheduleFormatError(at, "zero offset must not appear in the tree");
    const int axis = detail::require_int(e, "axis", at);
    const int sign = detail::require_int(e, "sign", at);
    if (axis < 1 || axis > n)
      throw ScheduleFormatError(at, "axis " + std::to_string(axis) + " outside 1.." + std::to_string(n));
    if (sign != 1 && sign != -1) throw ScheduleFormatError(at, "sign must be 1 or -1");
    const DirectionIndex dir{axis, sign};
    const NodeCoord parent = parent_offset(offset, dir, *shape);
    if (norm(parent, *shape) != norm(offset, *shape) - 1)
      throw ScheduleFormatError(at, "offset " + to_string(offset) + ": arrival " + to_string(dir) +
                                        " is not on a shortest path");
    auto [it, inserted] = arrival.emplace(offset, dir);
    if (!inserted) throw ScheduleFormatError(at, "duplicate offset " + to_string(offset));
    if (previous && !(*previous < offset))
      throw ScheduleFormatError(at, "entries not sorted: " + to_string(offset) + " after " +
                                        to_string(*previous));
    previous = &it->first;
  }

  if (arrival.size() != shape->node_count() - 1) {
    std::optional<NodeCoord> missing;
    for (std::uint64_t x = 0; x < shape->node_count() && !missing; ++x) {
      NodeCoord c = node_at(x, *shape);
      if (!c.is_zero() && !arrival.contains(c)) missing = c;
    }
    throw ScheduleFormatError(sax.tree_line, "missing offset " + to_string(*missing) + " (" +
                                                 std::to_string(arrival.size()) + " of " +
                                                 std::to_string(shape->node_count() - 1) +
                                                 " entries present)");
  }
  return RoutingTree(*shape, std::move(arrival));
}

}  // namespace torusbcast
