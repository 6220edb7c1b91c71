#pragma once

#include <compare>
#include <concepts>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include "prisoners/error.hpp"

namespace prisoners {

using Index = std::uint64_t;
using BigInt = mpz_class;

/// Exact rational number, always held in lowest terms with a positive
/// denominator. Backed by GMP.
class Rat {
 public:
  Rat() = default;

  template <std::integral T>
  Rat(T v) {  // NOLINT(google-explicit-constructor)
    if constexpr (std::is_signed_v<T>) {
      q_ = static_cast<long>(v);
    } else {
      q_ = static_cast<unsigned long>(v);
    }
  }

  Rat(const BigInt& num, const BigInt& den);
  explicit Rat(mpq_class q);

  /// Parses "n", "n/d" or "-n/d".
  static Rat parse(std::string_view text);

  /// 2^-k.
  static Rat pow2_inverse(unsigned k);

  BigInt numerator() const { return q_.get_num(); }
  BigInt denominator() const { return q_.get_den(); }
  const mpq_class& value() const { return q_; }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sign() == 0; }
  bool is_positive() const { return sign() > 0; }

  BigInt floor() const;
  BigInt ceil() const;

  Rat pow(unsigned e) const;
  Rat inverse() const;

  /// "numerator/denominator", denominator always printed.
  std::string str() const;
  double to_double() const { return q_.get_d(); }

  Rat& operator+=(const Rat& o);
  Rat& operator-=(const Rat& o);
  Rat& operator*=(const Rat& o);
  Rat& operator/=(const Rat& o);

  friend Rat operator+(Rat a, const Rat& b) { return a += b; }
  friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
  friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
  friend Rat operator/(Rat a, const Rat& b) { return a /= b; }
  Rat operator-() const { return Rat(mpq_class(-q_)); }

  friend bool operator==(const Rat& a, const Rat& b) { return cmp(a.q_, b.q_) == 0; }
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
    const int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class q_{0};
};

std::ostream& operator<<(std::ostream& os, const Rat& r);

Rat min(const Rat& a, const Rat& b);
Rat max(const Rat& a, const Rat& b);

/// Closed interval [lo, hi] known to contain some real value.
struct RatInterval {
  Rat lo;
  Rat hi;

  RatInterval() = default;
  RatInterval(Rat l, Rat h);
  static RatInterval point(const Rat& v) { return {v, v}; }

  Rat width() const { return hi - lo; }
  bool contains(const Rat& v) const { return lo <= v && v <= hi; }
  RatInterval intersect(const RatInterval& o) const;
};

RatInterval operator+(const RatInterval& a, const Rat& b);
RatInterval operator-(const RatInterval& a, const Rat& b);
RatInterval operator*(const RatInterval& a, const Rat& nonneg);

/// A real number known through a family of nested rational brackets.
/// bounds(level) returns an interval of width at most 2^-level.
class CertifiedReal {
 public:
  using Refiner = std::function<RatInterval(unsigned level)>;

  explicit CertifiedReal(Refiner refine);
  static CertifiedReal exact(Rat v);

  RatInterval bounds(unsigned level) const;
  const std::optional<Rat>& exact_value() const { return exact_; }
  bool is_exact() const { return exact_.has_value(); }

  CertifiedReal plus(const Rat& shift) const;
  CertifiedReal minus(const Rat& shift) const { return plus(-shift); }
  CertifiedReal times(const Rat& nonneg_factor) const;

 private:
  std::optional<Rat> exact_;
  std::shared_ptr<const Refiner> refine_;
};

enum class Comparison { Less, Greater, Equal, Undecided };

std::string_view to_string(Comparison c);

/// Certified comparison of x against q. Less means x < q.
Comparison compare_certified(const CertifiedReal& x, const Rat& q, unsigned max_refinements = 64);

/// Exact sum of 1/i for i in [a, b].
Rat harmonic_sum(Index a, Index b);

/// Exact H_n = harmonic_sum(1, n); H_0 = 0.
Rat harmonic_number(Index n);

/// Bracket of width <= width around the tail sum over i >= n of 1/i^exponent.
RatInterval power_tail_bounds(unsigned exponent, Index n, const Rat& width);

/// Exact tail sum over i >= n of ratio^i.
Rat geometric_tail(const Rat& ratio, Index n);

BigInt big_from_u128(unsigned __int128 v);

/// Certified bracket for harmonic_sum(a, b), using fixed-point arithmetic
/// with outward rounding. Width is at most (b - a + 1) * 2^-96.
class HarmonicAccumulator {
 public:
  explicit HarmonicAccumulator(Index start);

  /// Extends the running sum by 1/next() and advances.
  void extend();
  Index start() const { return start_; }
  /// Last index included; start() - 1 when empty.
  Index last() const { return next_ - 1; }
  RatInterval bounds() const;
  /// Less / Greater when certified; Undecided otherwise.
  Comparison compare(const Rat& q) const;

  /// Raw endpoints: the sum lies in [fixed_lo, fixed_hi] * 2^-kBits.
  static constexpr unsigned kBits = 96;
  unsigned __int128 fixed_lo() const { return lo_; }
  unsigned __int128 fixed_hi() const { return hi_; }

 private:
  Index start_;
  Index next_;
  unsigned __int128 lo_ = 0;
  unsigned __int128 hi_ = 0;
};

}  // namespace prisoners

template <>
struct std::hash<prisoners::Rat> {
  std::size_t operator()(const prisoners::Rat& r) const;
};
