#pragma once

// Exact integer number theory: the self-similar sequence s_r, q-adic
// valuations of factorials and binomials, base-q digits and carry counts.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "torusbcast/errors.hpp"

namespace torusbcast {

using BigInt = boost::multiprecision::cpp_int;

inline bool is_prime(std::uint64_t q) {
  if (q < 2) return false;
  if (q % 2 == 0) return q == 2;
  for (std::uint64_t d = 3; d * d <= q; d += 2)
    if (q % d == 0) return false;
  return true;
}

inline bool is_power_of_two(std::uint64_t n) {
  if (n == 0) throw DomainError("is_power_of_two: n must be positive");
  return (n & (n - 1)) == 0;
}

/// Distinct prime factors in increasing order.
inline std::vector<std::uint64_t> prime_factors(std::uint64_t m) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= m; ++d) {
    if (m % d != 0) continue;
    out.push_back(d);
    while (m % d == 0) m /= d;
  }
  if (m > 1) out.push_back(m);
  return out;
}

namespace detail {
inline void require_base(std::uint64_t q) {
  if (q < 2) throw DomainError("base must be at least 2, got " + std::to_string(q));
}
inline void require_prime(std::uint64_t q) {
  if (!is_prime(q)) throw DomainError(std::to_string(q) + " is not prime");
}
}  // namespace detail

/// Little-endian base-q expansion of m.
struct BaseQDigits {
  std::uint64_t m = 0;
  std::uint64_t q = 2;
  std::vector<std::uint64_t> digits;

  BaseQDigits(std::uint64_t value, std::uint64_t base) : m(value), q(base) {
    detail::require_base(base);
    for (std::uint64_t r = value; r > 0; r /= base) digits.push_back(r % base);
  }

  std::uint64_t digit(std::size_t i) const { return i < digits.size() ? digits[i] : 0; }

  std::uint64_t digit_sum() const {
    std::uint64_t s = 0;
    for (auto d : digits) s += d;
    return s;
  }
};

inline std::uint64_t digit_sum(std::uint64_t m, std::uint64_t q) { return BaseQDigits(m, q).digit_sum(); }

/// s_0 = [1]; s_r = (q-1) copies of s_{r-1} followed by s_{r-1} with its
/// last term incremented.
inline std::vector<std::uint64_t> s_sequence(std::uint64_t q, unsigned r,
                                             std::uint64_t budget = 10'000'000) {
  detail::require_base(q);
  std::uint64_t length = 1;
  for (unsigned i = 0; i < r; ++i) {
    if (__builtin_mul_overflow(length, q, &length)) throw BudgetExceeded(UINT64_MAX, budget);
  }
  check_budget(length, budget);

  std::vector<std::uint64_t> seq{1};
  seq.reserve(length);
  for (unsigned level = 0; level < r; ++level) {
    const std::size_t block = seq.size();
    for (std::uint64_t copy = 1; copy < q; ++copy)
      seq.insert(seq.end(), seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(block));
    seq.back() += 1;
  }
  return seq;
}

/// Sum of the first m terms of s_r for any r with q^r >= m, computed as
/// sum_{i >= 0} floor(m / q^i).
inline std::uint64_t s_partial_sum(std::uint64_t q, std::uint64_t m) {
  detail::require_base(q);
  if (m == 0) throw DomainError("s_partial_sum: m must be at least 1");
  std::uint64_t total = 0;
  for (std::uint64_t r = m; r > 0; r /= q) total += r;
  return total;
}

/// sum_{j >= 1} floor(m / q^j).
inline std::uint64_t floor_sum(std::uint64_t m, std::uint64_t q) {
  detail::require_base(q);
  std::uint64_t total = 0;
  for (std::uint64_t r = m / q; r > 0; r /= q) total += r;
  return total;
}

/// Exponent of the prime q in m.
inline unsigned valuation(std::uint64_t q, std::uint64_t m) {
  detail::require_prime(q);
  if (m == 0) throw DomainError("valuation of zero is undefined");
  unsigned e = 0;
  while (m % q == 0) {
    m /= q;
    ++e;
  }
  return e;
}

inline unsigned valuation(std::uint64_t q, BigInt m) {
  detail::require_prime(q);
  if (m <= 0) throw DomainError("valuation requires a positive integer");
  unsigned e = 0;
  const BigInt bq = q;
  for (;;) {
    BigInt quotient, remainder;
    boost::multiprecision::divide_qr(m, bq, quotient, remainder);
    if (remainder != 0) return e;
    m = std::move(quotient);
    ++e;
  }
}

/// Exponent of the prime q in p!, by Legendre's sum.
inline std::uint64_t valuation_factorial(std::uint64_t q, std::uint64_t p) {
  detail::require_prime(q);
  return floor_sum(p, q);
}

inline BigInt factorial(std::uint64_t p) {
  BigInt f = 1;
  for (std::uint64_t i = 2; i <= p; ++i) f *= i;
  return f;
}

inline BigInt binomial(std::uint64_t n, std::uint64_t p) {
  if (p > n) return 0;
  if (p > n - p) p = n - p;
  BigInt c = 1;
  for (std::uint64_t i = 1; i <= p; ++i) {
    c *= n - p + i;
    c /= i;
  }
  return c;
}

/// Number of carries when adding a and b in base q.
inline unsigned carries_in_addition(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  detail::require_base(q);
  unsigned carries = 0;
  std::uint64_t carry = 0;
  while (a > 0 || b > 0 || carry > 0) {
    const std::uint64_t s = a % q + b % q + carry;
    carry = s >= q ? 1 : 0;
    carries += static_cast<unsigned>(carry);
    a /= q;
    b /= q;
  }
  return carries;
}

/// Card{1 <= j <= max_j : n mod q^j < p mod q^j}: the positions that take a
/// borrow when p is subtracted from n in base q.
inline unsigned borrow_count(std::uint64_t n, std::uint64_t p, std::uint64_t q, unsigned max_j) {
  detail::require_base(q);
  unsigned count = 0;
  std::uint64_t modulus = 1;
  for (unsigned j = 1; j <= max_j; ++j) {
    if (__builtin_mul_overflow(modulus, q, &modulus)) break;
    if (n % modulus < p % modulus) ++count;
  }
  return count;
}

/// floor(log_q m) for m >= 1.
inline unsigned floor_log(std::uint64_t m, std::uint64_t q) {
  detail::require_base(q);
  if (m == 0) throw DomainError("floor_log of zero");
  unsigned e = 0;
  for (m /= q; m > 0; m /= q) ++e;
  return e;
}

enum class BorrowRange {
  /// Borrow positions 1..floor(log_q p), as the closed form is usually printed.
  PrintedToLogP,
  /// Borrow positions 1..floor(log_q n); always exact.
  Full,
};

/// Digit-based closed form of floor_sum(n - p, q):
///   ((n - p) - (digitsum(n) - digitsum(p))) / (q - 1) - borrows.
/// With BorrowRange::PrintedToLogP the borrow count stops at the length of
/// p and can overcount; e.g. q=3, n=10, p=4 gives 3 where the true value is 2.
inline long long floor_sum_from_digits(std::uint64_t n, std::uint64_t p, std::uint64_t q,
                                       BorrowRange range) {
  detail::require_base(q);
  if (p > n) throw DomainError("floor_sum_from_digits requires p <= n");
  const long long numerator = static_cast<long long>(n - p) -
                              (static_cast<long long>(digit_sum(n, q)) -
                               static_cast<long long>(digit_sum(p, q)));
  unsigned max_j = 0;
  if (range == BorrowRange::Full) {
    max_j = n > 0 ? floor_log(n, q) : 0;
  } else {
    max_j = p > 0 ? floor_log(p, q) : 0;
  }
  return numerator / static_cast<long long>(q - 1) - borrow_count(n, p, q, max_j);
}

}  // namespace torusbcast
