#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "prisoners/sequences.hpp"

namespace prisoners {

/// Largest m accepted by the exhaustive oracles (m! permutations).
inline constexpr Index kMaxExhaustive = 9;

struct MinResult {
  Rat value;
  /// One-line images of positions 1..m.
  std::vector<Index> perm;
};

/// Exact minimum of sum n * p_perm(n) over all permutations of [1..m]; the
/// lexicographically least minimizer.
MinResult brute_force_min(const PriceModel& model, Index m, unsigned jobs = 1);

enum class Existence { Exists, NotExists, Unknown };
std::string_view to_string(Existence e);

struct ExistenceVerdict {
  Existence value = Existence::Unknown;
  std::string justification;
  /// (m, sum_{n<=m} n * p_sigma(n)) along the descending (or quasi-descending)
  /// rearrangement, at m = 1, 2, 4, ...
  std::vector<std::pair<Index, Rat>> diagnostics;
};

/// A strategy exists iff some rearrangement makes sum n p_delta(n) finite.
ExistenceVerdict decide_existence(const PriceModel& model, Index diagnostic_horizon = 64);

struct CheckTrace {
  bool pass = true;
  std::size_t checked = 0;
  std::vector<std::string> failures;
  std::vector<std::string> notes;
};

/// Zero omission at desk scale: over all permutations of [1..m], compacting
/// away zeros never raises the weighted sum, and placing q_delta(k) at
/// position 2k (zeros at odd positions) doubles it exactly.
CheckTrace check_zero_omission(const PriceModel& model, Index m);

/// The non-increasing order of p_1..p_m has the least weighted sum among all
/// orders of those terms: exhaustive for m <= 9, `trials` random orders past
/// that. A non-positive term violates the hypothesis (ContractViolation).
CheckTrace descending_partial_dominance(const PriceModel& model, std::size_t trials, Index m, std::uint64_t seed);

/// "(1)(2 3)" for the permutation with one-line images perm.
std::string cycle_notation(const std::vector<Index>& perm);

/// "notation<TAB>num/den" lines.
void write_tsv(std::ostream& out, const std::vector<MinResult>& rows);

}  // namespace prisoners
