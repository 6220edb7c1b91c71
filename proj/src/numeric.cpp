#include "prisoners/numeric.hpp"

#include <map>
#include <mutex>
#include <ostream>
#include <tuple>
#include <utility>
#include <vector>

namespace prisoners {

Rat::Rat(const BigInt& num, const BigInt& den) : q_(num, den) {
  if (den == 0) throw DomainError("zero denominator");
  q_.canonicalize();
}

Rat::Rat(mpq_class q) : q_(std::move(q)) {
  if (q_.get_den() == 0) throw DomainError("zero denominator");
  q_.canonicalize();
}

Rat Rat::parse(std::string_view text) {
  std::string s(text);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  std::size_t start = s.find_first_not_of(" \t");
  if (start == std::string::npos) throw DomainError("empty rational");
  s = s.substr(start);
  const auto slash = s.find('/');
  const std::string num = s.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  auto valid = [](const std::string& part, bool allow_sign) {
    if (part.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (part[0] == '-' || part[0] == '+')) i = 1;
    if (i == part.size()) return false;
    for (; i < part.size(); ++i) {
      if (part[i] < '0' || part[i] > '9') return false;
    }
    return true;
  };
  if (!valid(num, true) || !valid(den, false)) {
    throw DomainError("malformed rational '" + std::string(text) + "'");
  }
  return Rat(BigInt(num[0] == '+' ? num.substr(1) : num), BigInt(den));
}

Rat Rat::pow2_inverse(unsigned k) {
  BigInt den = 1;
  den <<= k;
  return Rat(BigInt(1), den);
}

BigInt Rat::floor() const {
  BigInt r;
  mpz_fdiv_q(r.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
  return r;
}

BigInt Rat::ceil() const {
  BigInt r;
  mpz_cdiv_q(r.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
  return r;
}

Rat Rat::pow(unsigned e) const {
  BigInt n;
  BigInt d;
  mpz_pow_ui(n.get_mpz_t(), q_.get_num_mpz_t(), e);
  mpz_pow_ui(d.get_mpz_t(), q_.get_den_mpz_t(), e);
  return Rat(n, d);
}

Rat Rat::inverse() const {
  if (is_zero()) throw DomainError("inverse of zero");
  return Rat(q_.get_den(), q_.get_num());
}

std::string Rat::str() const { return q_.get_num().get_str() + "/" + q_.get_den().get_str(); }

Rat& Rat::operator+=(const Rat& o) {
  q_ += o.q_;
  return *this;
}
Rat& Rat::operator-=(const Rat& o) {
  q_ -= o.q_;
  return *this;
}
Rat& Rat::operator*=(const Rat& o) {
  q_ *= o.q_;
  return *this;
}
Rat& Rat::operator/=(const Rat& o) {
  if (o.is_zero()) throw DomainError("division by zero");
  q_ /= o.q_;
  return *this;
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

Rat min(const Rat& a, const Rat& b) { return b < a ? b : a; }
Rat max(const Rat& a, const Rat& b) { return a < b ? b : a; }

RatInterval::RatInterval(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {
  if (hi < lo) throw DomainError("interval with lo > hi");
}

RatInterval RatInterval::intersect(const RatInterval& o) const {
  return {max(lo, o.lo), min(hi, o.hi)};
}

RatInterval operator+(const RatInterval& a, const Rat& b) { return {a.lo + b, a.hi + b}; }
RatInterval operator-(const RatInterval& a, const Rat& b) { return {a.lo - b, a.hi - b}; }
RatInterval operator*(const RatInterval& a, const Rat& nonneg) {
  if (nonneg.sign() < 0) throw DomainError("interval scaling by a negative factor");
  return {a.lo * nonneg, a.hi * nonneg};
}

CertifiedReal::CertifiedReal(Refiner refine)
    : refine_(std::make_shared<const Refiner>(std::move(refine))) {}

CertifiedReal CertifiedReal::exact(Rat v) {
  CertifiedReal r([v](unsigned) { return RatInterval::point(v); });
  r.exact_ = std::move(v);
  return r;
}

RatInterval CertifiedReal::bounds(unsigned level) const {
  if (exact_) return RatInterval::point(*exact_);
  return (*refine_)(level);
}

CertifiedReal CertifiedReal::plus(const Rat& shift) const {
  if (exact_) return exact(*exact_ + shift);
  auto inner = refine_;
  return CertifiedReal([inner, shift](unsigned level) { return (*inner)(level) + shift; });
}

CertifiedReal CertifiedReal::times(const Rat& factor) const {
  if (factor.sign() < 0) throw DomainError("negative scale factor");
  if (exact_) return exact(*exact_ * factor);
  if (factor.is_zero()) return exact(Rat(0));
  auto inner = refine_;
  // Pull a finer level so the scaled width stays within 2^-level.
  unsigned extra = 0;
  for (Rat f = factor; f > Rat(1); f /= Rat(2)) ++extra;
  return CertifiedReal(
      [inner, factor, extra](unsigned level) { return (*inner)(level + extra) * factor; });
}

std::string_view to_string(Comparison c) {
  switch (c) {
    case Comparison::Less: return "Less";
    case Comparison::Greater: return "Greater";
    case Comparison::Equal: return "Equal";
    case Comparison::Undecided: return "Undecided";
  }
  return "?";
}

Comparison compare_certified(const CertifiedReal& x, const Rat& q, unsigned max_refinements) {
  if (x.exact_value()) {
    const auto& v = *x.exact_value();
    if (v < q) return Comparison::Less;
    if (q < v) return Comparison::Greater;
    return Comparison::Equal;
  }
  RatInterval iv = x.bounds(0);
  for (unsigned level = 0;; ++level) {
    if (level > 0) iv = iv.intersect(x.bounds(level));
    if (q < iv.lo) return Comparison::Greater;
    if (iv.hi < q) return Comparison::Less;
    if (iv.lo == q && iv.hi == q) return Comparison::Equal;
    if (level >= max_refinements) return Comparison::Undecided;
  }
}

namespace {

class HarmonicTable {
 public:
  Rat get(Index n) {
    std::lock_guard lock(mu_);
    while (table_.size() <= n) {
      const Index i = table_.size();
      table_.push_back(table_.back() + Rat(BigInt(1), BigInt(static_cast<unsigned long>(i))));
    }
    return table_[n];
  }

 private:
  std::mutex mu_;
  std::vector<Rat> table_{Rat(0)};
};

HarmonicTable& harmonic_table() {
  static HarmonicTable t;
  return t;
}

Rat inverse_power(Index i, unsigned e) {
  BigInt d;
  mpz_ui_pow_ui(d.get_mpz_t(), static_cast<unsigned long>(i), e);
  return Rat(BigInt(1), d);
}

// Lower bracket of the tail over i > m of 1/i^e (trapezoid rule on a convex
// integrand), integral 1/((e-1)(m+1)^(e-1)) plus half the first term.
Rat tail_lower(unsigned e, Index m) {
  BigInt p;
  mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(m + 1), e - 1);
  return Rat(BigInt(1), BigInt(e - 1) * p) + inverse_power(m + 1, e) / Rat(2);
}

// Upper bracket: midpoint rule, integral from m + 1/2 to infinity.
Rat tail_upper(unsigned e, Index m) {
  BigInt p;
  mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(2 * m + 1), e - 1);
  BigInt num;
  mpz_ui_pow_ui(num.get_mpz_t(), 2, e - 1);
  return Rat(num, BigInt(e - 1) * p);
}

Rat tail_width(unsigned e, Index m) { return tail_upper(e, m) - tail_lower(e, m); }

Rat power_prefix(unsigned e, Index from, Index to) {
  static std::mutex mu;
  static std::map<std::tuple<unsigned, Index, Index>, Rat> cache;
  if (to < from) return Rat(0);
  const auto key = std::make_tuple(e, from, to);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  Rat s;
  for (Index i = from; i <= to; ++i) s += inverse_power(i, e);
  std::lock_guard lock(mu);
  if (cache.size() > 4096) cache.clear();
  cache.emplace(key, s);
  return s;
}

constexpr unsigned kFixedBits = HarmonicAccumulator::kBits;

}  // namespace

BigInt big_from_u128(unsigned __int128 v) {
  BigInt hi = static_cast<unsigned long>(v >> 64);
  BigInt lo = static_cast<unsigned long>(static_cast<std::uint64_t>(v));
  return (hi << 64) + lo;
}

Rat harmonic_number(Index n) { return harmonic_table().get(n); }

Rat harmonic_sum(Index a, Index b) {
  if (a == 0) throw DomainError("harmonic_sum: indices start at 1");
  if (a > b) throw DomainError("harmonic_sum: empty range");
  auto& table = harmonic_table();
  return table.get(b) - table.get(a - 1);
}

RatInterval power_tail_bounds(unsigned exponent, Index n, const Rat& width) {
  if (exponent < 2) throw DomainError("power_tail_bounds: exponent must be >= 2");
  if (n == 0) throw DomainError("power_tail_bounds: indices start at 1");
  if (!width.is_positive()) throw DomainError("power_tail_bounds: width must be positive");
  // Aim for half the requested width so the endpoints sit strictly inside
  // coarser brackets.
  const Rat target = width / Rat(2);
  const Index base = n - 1;
  Index m = base;
  if (target < tail_width(exponent, base)) {
    Index step = 1;
    while (target < tail_width(exponent, base + step)) step *= 2;
    Index lo = base + step / 2;  // too wide (or base)
    Index hi = base + step;      // narrow enough
    while (hi - lo > 1) {
      const Index mid = lo + (hi - lo) / 2;
      if (target < tail_width(exponent, mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    m = hi;
  }
  const Rat prefix = power_prefix(exponent, n, m);
  return {prefix + tail_lower(exponent, m), prefix + tail_upper(exponent, m)};
}

Rat geometric_tail(const Rat& ratio, Index n) {
  if (!ratio.is_positive() || !(ratio < Rat(1))) {
    throw DomainError("geometric_tail: ratio must lie in (0,1)");
  }
  return ratio.pow(static_cast<unsigned>(n)) / (Rat(1) - ratio);
}

HarmonicAccumulator::HarmonicAccumulator(Index start) : start_(start), next_(start) {
  if (start == 0) throw DomainError("harmonic indices start at 1");
}

void HarmonicAccumulator::extend() {
  const unsigned __int128 one = static_cast<unsigned __int128>(1) << kFixedBits;
  const unsigned __int128 i = next_;
  const unsigned __int128 q = one / i;
  lo_ += q;
  hi_ += (one % i == 0) ? q : q + 1;
  ++next_;
}

RatInterval HarmonicAccumulator::bounds() const {
  BigInt den = 1;
  den <<= kFixedBits;
  return {Rat(big_from_u128(lo_), den), Rat(big_from_u128(hi_), den)};
}

Comparison HarmonicAccumulator::compare(const Rat& q) const {
  // Compare q * 2^96 against the integer endpoints without building rationals.
  BigInt scaled_num = q.numerator();
  scaled_num <<= kFixedBits;
  const BigInt& den = q.denominator();
  // value > q  <=>  lo / 2^96 > q  <=>  lo * den > q.num * 2^96
  if (big_from_u128(lo_) * den > scaled_num) return Comparison::Greater;
  if (big_from_u128(hi_) * den < scaled_num) return Comparison::Less;
  return Comparison::Undecided;
}

}  // namespace prisoners

std::size_t std::hash<prisoners::Rat>::operator()(const prisoners::Rat& r) const {
  return std::hash<std::string>{}(r.str());
}
