#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "prisoners/numeric.hpp"
#include "prisoners/sequences.hpp"

namespace prisoners {

/// Ordered cycle (n_1, ..., n_k): sigma(n_i) = n_{i+1}, sigma(n_k) = n_1.
class Cycle {
 public:
  explicit Cycle(std::vector<Index> members);

  const std::vector<Index>& members() const { return members_; }
  std::size_t length() const { return members_.size(); }
  Index front() const { return members_.front(); }
  Index min() const;
  Index max() const;
  Index diameter() const { return max() - min(); }
  bool contains(Index n) const;

  Rat price(const PriceModel& model) const;
  Cycle rotated(std::size_t k) const;
  Cycle mapped(const Relabeling& delta) const;
  std::string str() const;

  friend bool operator==(const Cycle&, const Cycle&) = default;

 private:
  std::vector<Index> members_;
};

struct EmittedCycle {
  Cycle cycle;
  std::string witness;
};

/// Pull-based producer of pairwise-disjoint cycles.
class CycleSource {
 public:
  virtual ~CycleSource() = default;
  virtual std::optional<EmittedCycle> next() = 0;
};

enum class Coverage {
  PrefixThenIdentity,  // cycles cover [1..H], identity beyond
  LazyStream,          // only materialized cycles are known
};

/// A finite-cycle permutation of the positive integers at desk scale.
/// Move-only: lazy plans own a stateful stream.
class CyclePlan {
 public:
  /// Cycles must partition [1..horizon] exactly.
  static CyclePlan prefix(std::vector<Cycle> cycles, Index horizon);
  /// Finite cycle list with no claim about indices outside it.
  static CyclePlan materialized(std::vector<Cycle> cycles, std::vector<std::string> witnesses = {});
  static CyclePlan lazy(std::unique_ptr<CycleSource> source);

  CyclePlan(CyclePlan&&) noexcept = default;
  CyclePlan& operator=(CyclePlan&&) noexcept = default;
  CyclePlan(const CyclePlan&) = delete;
  CyclePlan& operator=(const CyclePlan&) = delete;

  Coverage coverage() const { return coverage_; }
  /// H for PrefixThenIdentity plans, 0 otherwise.
  Index prefix_horizon() const { return horizon_; }

  bool covers(Index n) const;
  /// Successor of n; throws NotMaterialized when n is not yet known.
  Index sigma(Index n) const;
  Index sigma_inverse(Index n) const;
  Cycle cycle_of(Index n) const;
  /// Emission position of n's cycle; empty for identity-tail fixed points.
  std::optional<std::size_t> cycle_index_of(Index n) const;

  const std::vector<Cycle>& cycles() const { return cycles_; }
  const std::vector<std::string>& witnesses() const { return witnesses_; }

  /// Materializes cycles until `count` exist or the source ends. Returns the
  /// number materialized.
  std::size_t pull(std::size_t count);
  bool has_source() const { return source_ != nullptr; }

  /// Finite copy of everything materialized so far.
  CyclePlan snapshot() const;

  /// One cycle per line; "# ..." witness lines when present; a final
  /// "identity-from H+1" line for prefix plans.
  std::string to_text() const;
  static CyclePlan parse(std::istream& in);

 private:
  CyclePlan() = default;
  void append(Cycle c, std::string witness);

  Coverage coverage_ = Coverage::LazyStream;
  Index horizon_ = 0;
  std::vector<Cycle> cycles_;
  std::vector<std::string> witnesses_;
  std::unordered_map<Index, std::pair<std::uint32_t, std::uint32_t>> where_;
  std::unique_ptr<CycleSource> source_;
};

/// Violations (repeated or uncovered indices) among the given cycles within
/// [1..horizon]. prefix_cover, when set, demands coverage of [1..H].
std::vector<std::string> validate_cycles(std::span<const Cycle> cycles, std::optional<Index> prefix_cover,
                                         Index horizon);
std::vector<std::string> validate_plan(const CyclePlan& plan, Index horizon);

/// Image of every cycle under delta.
CyclePlan conjugate(const CyclePlan& plan, const Relabeling& delta);

/// Random partition of [1..horizon] into cycles of length <= max_len with
/// random internal order; identity beyond.
CyclePlan random_plan(Index horizon, Index max_len, std::uint64_t seed);
/// Random partition with cycle diameter (max - min) <= d and length <= max_len.
CyclePlan random_plan_bounded_diameter(Index horizon, Index d, Index max_len, std::uint64_t seed);

/// Deterministic sub-seed for stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
/// Unbiased draw from [0, n).
Index uniform_below(std::mt19937_64& rng, Index n);

}  // namespace prisoners
