#pragma once

#include <string>

#include "prisoners/numeric.hpp"
#include "prisoners/permutations.hpp"
#include "prisoners/sequences.hpp"
#include "prisoners/strategies.hpp"

namespace prisoners {

struct AdversaryOptions {
  /// Largest index any witness search may reach.
  Index search_horizon = kDefaultSearchHorizon;
  unsigned max_refinements = 64;
};

struct DivergenceWitness {
  Relabeling delta;
  Index m = 0;
  /// Exact lower bound on sum_{n<=m} n * p_{delta(n)} exceeding the target.
  Rat lower_bound;
  bool identity = false;
};

/// A relabeling whose weighted partial sum through m exceeds target.
DivergenceWitness divergence_witness(const PriceModel& model, const Rat& target, Index horizon);

/// Zeros of the allocation raised so that they add up to 1: 1/z each for z
/// zeros, 2^-j for the j-th zero when there are infinitely many.
AllocationPlan zero_filled(const AllocationPlan& alloc);

/// Guard play against a finite-total allocation when sum n p_delta(n)
/// diverges under every rearrangement: consecutive cycles in the descending
/// order of the zero-filled amounts, each priced above its first member.
CyclePlan good_index_adversary(const PriceModel& model, const AllocationPlan& alloc, AdversaryOptions opts = {});

/// Consecutive blocks [s .. leader + ceil(T / p_leader)], T the allocation's
/// total bound: some member holds less than p_leader.
CyclePlan v1b_ceiling_adversary(const PriceModel& model, const AllocationPlan& alloc, AdversaryOptions opts = {});

/// 2-cycles (l, n) with a_n < p_l.
CyclePlan two_cycle_adversary(const PriceModel& model, const AllocationPlan& alloc, AdversaryOptions opts = {});

/// Blocks of minimal length k containing i with p_i > 0 and k * p_i > budget.
CyclePlan v1d_cycle_chooser(const PriceModel& model, const Rat& budget = Rat(1), AdversaryOptions opts = {});

/// Harmonic prices: blocks (k..n), n minimal with H(k,n) > max_{k<=j<=n} a_j.
CyclePlan v2a_block_adversary(const AllocationPlan& alloc, AdversaryOptions opts = {});

/// Harmonic prices: blocks (n..n+k), minimal with H(n,n+k) > a_n.
CyclePlan v2b_block_adversary(const AllocationPlan& alloc, AdversaryOptions opts = {});

/// Minimal n >= k with c * H_n < H(k, n), for 0 < c < 1.
Index scaled_harmonic_gap(Index k, const Rat& c, Index search_horizon = kDefaultSearchHorizon);

enum class ClaimKind {
  /// No member of any cycle after the first succeeds.
  NoSuccessAfterFirstCycle,
  /// Every cycle has at least one failing member.
  FailurePerCycle,
  /// Every member of every cycle fails.
  AllMembersFail,
  /// The first-listed member of every cycle fails.
  FirstMemberFails,
};

std::string_view to_string(ClaimKind k);

struct Adversary {
  std::string id;
  CyclePlan plan;
  ClaimKind claim;
};

/// Ids: good-index, v1b-ceiling, two-cycle, v1d-chooser, v2a-block, v2b-block.
Adversary make_adversary(const std::string& id, const PriceModel& model, const AllocationPlan& alloc,
                         AdversaryOptions opts = {});

}  // namespace prisoners
