#include "prisoners/analyzer.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "prisoners/error.hpp"
#include "prisoners/permutations.hpp"

namespace prisoners {

namespace {

void guard(Index m, const char* what) {
  if (m == 0) throw DomainError(std::string(what) + ": m must be >= 1");
  if (m > kMaxExhaustive) {
    throw DomainError(std::string(what) + ": m = " + std::to_string(m) + " exceeds the exhaustive limit " +
                      std::to_string(kMaxExhaustive));
  }
}

// Weighted sums over a small table of values. When a common denominator keeps
// every scaled numerator within 62 bits, sums run in 128-bit integers.
class Table {
 public:
  explicit Table(std::vector<Rat> values) : values_(std::move(values)) {
    BigInt d = 1;
    for (const auto& v : values_) mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), v.denominator().get_mpz_t());
    const BigInt limit = BigInt(1) << 62;
    fast_ = d < limit;
    for (const auto& v : values_) {
      const BigInt s = v.numerator() * (d / v.denominator());
      if (!(s < limit && s > -limit)) fast_ = false;
      if (fast_) scaled_.push_back(s.get_si());
    }
    den_ = d;
  }

  struct Sum {
    __int128 i = 0;
    Rat r;
  };

  void add(Sum& s, Index weight, std::size_t slot) const {
    if (fast_) {
      s.i += static_cast<__int128>(weight) * scaled_[slot];
    } else {
      s.r += Rat(weight) * values_[slot];
    }
  }
  int compare(const Sum& a, const Sum& b) const {
    if (fast_) return a.i < b.i ? -1 : (a.i > b.i ? 1 : 0);
    return a.r < b.r ? -1 : (b.r < a.r ? 1 : 0);
  }
  Rat value(const Sum& s) const {
    if (!fast_) return s.r;
    const auto hi = static_cast<long>(s.i >> 62);
    const auto lo = static_cast<unsigned long>(s.i & ((static_cast<__int128>(1) << 62) - 1));
    BigInt n = BigInt(hi);
    n <<= 62;
    n += BigInt(lo);
    return Rat(n, den_);
  }

 private:
  std::vector<Rat> values_;
  std::vector<long> scaled_;
  BigInt den_;
  bool fast_ = false;
};

std::vector<Rat> prefix_terms(const PriceModel& model, Index m) {
  std::vector<Rat> v;
  for (Index i = 1; i <= m; ++i) v.push_back(model.term(i));
  return v;
}

}  // namespace

MinResult brute_force_min(const PriceModel& model, Index m, unsigned jobs) {
  guard(m, "brute_force_min");
  const Table table(prefix_terms(model, m));
  struct Best {
    Table::Sum sum;
    std::vector<Index> perm;
  };
  // Worker w scans the permutations whose first image f has f % jobs == w,
  // each block in lexicographic order.
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(m)));
  std::vector<std::optional<Best>> best(jobs);
  auto better = [&](const Best& a, const Best& b) {
    const int c = table.compare(a.sum, b.sum);
    return c < 0 || (c == 0 && a.perm < b.perm);
  };
  auto work = [&](unsigned w) {
    for (Index f = 1; f <= m; ++f) {
      if ((f - 1) % jobs != w) continue;
      std::vector<Index> perm{f};
      for (Index i = 1; i <= m; ++i) {
        if (i != f) perm.push_back(i);
      }
      do {
        Table::Sum sum;
        for (Index n = 1; n <= m; ++n) table.add(sum, n, perm[n - 1] - 1);
        // Lexicographic scan: within a block only a strictly smaller sum wins.
        if (!best[w] || table.compare(sum, best[w]->sum) < 0) best[w] = Best{sum, perm};
      } while (std::next_permutation(perm.begin() + 1, perm.end()));
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
  }
  const Best* winner = nullptr;
  for (const auto& b : best) {
    if (b && (!winner || better(*b, *winner))) winner = &*b;
  }
  return {table.value(winner->sum), winner->perm};
}

std::string_view to_string(Existence e) {
  switch (e) {
    case Existence::Exists: return "Exists";
    case Existence::NotExists: return "NotExists";
    case Existence::Unknown: return "Unknown";
  }
  return "?";
}

ExistenceVerdict decide_existence(const PriceModel& model, Index diagnostic_horizon) {
  ExistenceVerdict v;
  switch (model.weighted_sum()) {
    case WeightedSumCertificate::ConvergesUnderSomeRearrangement:
      v.value = Existence::Exists;
      v.justification = "certificate: sum n p_delta(n) converges under some rearrangement";
      break;
    case WeightedSumCertificate::DivergesUnderAllRearrangements:
      v.value = Existence::NotExists;
      v.justification = "certificate: sum n p_delta(n) diverges under every rearrangement";
      break;
    case WeightedSumCertificate::Unknown:
      v.value = Existence::Unknown;
      v.justification = "no certificate; partial sums along the descending arrangement are diagnostics only";
      break;
  }
  if (diagnostic_horizon == 0) return v;
  const bool zeros = model.has_infinitely_many_zeros();
  Relabeling sigma;
  try {
    sigma = zeros ? quasi_descending_rearrangement(model, diagnostic_horizon)
                  : descending_rearrangement(model, diagnostic_horizon);
  } catch (const CapabilityError&) {
    // No tail structure: sort the window [1..horizon] only.
    std::vector<Index> window(diagnostic_horizon);
    std::iota(window.begin(), window.end(), Index{1});
    std::vector<Rat> values;
    for (Index i : window) values.push_back(model.term(i));
    std::stable_sort(window.begin(), window.end(),
                     [&](Index a, Index b) { return values[b - 1] < values[a - 1]; });
    sigma = Relabeling::from_table(window);
    v.justification += " (window [1.." + std::to_string(diagnostic_horizon) + "] sorted; no tail structure)";
  }
  Rat sum;
  Index next = 1;
  for (Index n = 1; n <= diagnostic_horizon; ++n) {
    sum += Rat(n) * model.term(sigma(n));
    if (n == next || n == diagnostic_horizon) {
      v.diagnostics.emplace_back(n, sum);
      next *= 2;
    }
  }
  if (v.value == Existence::Unknown && zeros) v.justification += " (quasi-descending: zeros interleaved)";
  return v;
}

CheckTrace check_zero_omission(const PriceModel& model, Index m) {
  guard(m, "check_zero_omission");
  CheckTrace trace;
  const Table table(prefix_terms(model, m));

  // Compacting away zero terms never raises the weighted sum.
  std::vector<Index> perm(m);
  std::iota(perm.begin(), perm.end(), Index{1});
  std::vector<bool> positive(m);
  for (Index i = 1; i <= m; ++i) positive[i - 1] = model.term(i).is_positive();
  do {
    Table::Sum p, q;
    Index k = 0;
    for (Index n = 1; n <= m; ++n) {
      table.add(p, n, perm[n - 1] - 1);
      if (positive[perm[n - 1] - 1]) table.add(q, ++k, perm[n - 1] - 1);
    }
    ++trace.checked;
    if (table.compare(q, p) > 0 && trace.failures.size() < 10) {
      trace.failures.push_back("compacted sum exceeds original for " + cycle_notation(perm));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  // Doubling: q_delta(k) at position 2k, zeros at the odd positions.
  const auto positives = model.positive_indices(m);
  if (positives.size() < m) {
    trace.notes.push_back("fewer than " + std::to_string(m) + " positive terms; doubling arm skipped");
  } else {
    std::vector<Index> zero_idx;
    const Index reach = positives.back() + 2 * m + 64;
    for (Index i = 1; zero_idx.size() < m && i <= reach; ++i) {
      if (model.term(i).is_zero()) zero_idx.push_back(i);
    }
    const auto omission = omit_zeros(model, positives.back());
    const PriceModel& q = omission.omitted;
    // alpha^{-1}: q-index k sits at p-index positives[k-1].
    for (Index k = 1; k <= m; ++k) {
      if (omission.alpha[k - 1] != std::pair<Index, Index>{positives[k - 1], k}) {
        trace.failures.push_back("alpha does not map p-index " + std::to_string(positives[k - 1]) + " to " +
                                 std::to_string(k));
      }
      if (!(q.term(k) == model.term(positives[k - 1]))) {
        trace.failures.push_back("q_" + std::to_string(k) + " differs from p_" + std::to_string(positives[k - 1]));
      }
    }
    if (zero_idx.size() < m) {
      trace.notes.push_back("no zeros to interleave: p and q agree term by term, identity embedding");
    } else {
      std::vector<Rat> values;
      for (Index k = 1; k <= m; ++k) values.push_back(q.term(k));
      const Table qt(values);
      std::vector<Index> delta(m);
      std::iota(delta.begin(), delta.end(), Index{1});
      do {
        Rat lhs;
        for (Index k = 1; k <= m; ++k) {
          lhs += Rat(2 * k - 1) * model.term(zero_idx[k - 1]);
          lhs += Rat(2 * k) * model.term(positives[delta[k - 1] - 1]);
        }
        Table::Sum rhs;
        for (Index k = 1; k <= m; ++k) qt.add(rhs, k, delta[k - 1] - 1);
        ++trace.checked;
        if (!(lhs == Rat(2) * qt.value(rhs)) && trace.failures.size() < 10) {
          trace.failures.push_back("doubling identity fails for " + cycle_notation(delta));
        }
      } while (std::next_permutation(delta.begin(), delta.end()));
    }
  }
  trace.pass = trace.failures.empty();
  return trace;
}

CheckTrace descending_partial_dominance(const PriceModel& model, std::size_t trials, Index m, std::uint64_t seed) {
  if (m == 0) throw DomainError("descending_partial_dominance: m must be >= 1");
  std::vector<Rat> values = prefix_terms(model, m);
  for (Index i = 1; i <= m; ++i) {
    if (!values[i - 1].is_positive()) {
      throw ContractViolation("hypothesis violated: term " + std::to_string(i) + " is not positive");
    }
  }
  const Table table(values);
  std::vector<Index> desc(m);
  std::iota(desc.begin(), desc.end(), Index{1});
  std::stable_sort(desc.begin(), desc.end(), [&](Index a, Index b) { return values[b - 1] < values[a - 1]; });
  Table::Sum base;
  for (Index n = 1; n <= m; ++n) table.add(base, n, desc[n - 1] - 1);

  CheckTrace trace;
  auto check = [&](const std::vector<Index>& perm) {
    Table::Sum s;
    for (Index n = 1; n <= m; ++n) table.add(s, n, perm[n - 1] - 1);
    ++trace.checked;
    if (table.compare(base, s) > 0 && trace.failures.size() < 10) {
      trace.failures.push_back("descending sum exceeds that of " + cycle_notation(perm));
    }
  };
  std::vector<Index> perm(m);
  std::iota(perm.begin(), perm.end(), Index{1});
  if (m <= kMaxExhaustive) {
    do check(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
      for (Index i = m; i > 1; --i) std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
      check(perm);
    }
  }
  trace.pass = trace.failures.empty();
  return trace;
}

std::string cycle_notation(const std::vector<Index>& perm) {
  std::string out;
  std::vector<bool> seen(perm.size() + 1);
  for (Index s = 1; s <= perm.size(); ++s) {
    if (seen[s]) continue;
    out += '(';
    for (Index i = s; !seen[i]; i = perm[i - 1]) {
      if (i != s) out += ' ';
      out += std::to_string(i);
      seen[i] = true;
    }
    out += ')';
  }
  return out;
}

void write_tsv(std::ostream& out, const std::vector<MinResult>& rows) {
  for (const auto& r : rows) {
    out << cycle_notation(r.perm) << '\t' << r.value.numerator().get_str() << '/' << r.value.denominator().get_str()
        << '\n';
  }
}

}  // namespace prisoners
