#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prisoners/numeric.hpp"

namespace prisoners {

/// Default bound on index scans that look for the next positive term.
inline constexpr Index kDefaultSearchHorizon = 1'000'000;

/// A bijection of the positive integers: an explicit permutation of [1..N]
/// followed by the identity.
class Relabeling {
 public:
  Relabeling() = default;

  static Relabeling identity() { return {}; }
  /// images[i] is the image of i + 1; must be a permutation of [1..size].
  static Relabeling from_table(std::vector<Index> images);
  /// Injective images for positions 1..k. Positions past k are filled with
  /// the unused indices of [1..max image] in ascending order.
  static Relabeling from_prefix_images(std::span<const Index> images);
  static Relabeling swap(Index a, Index b);

  Index operator()(Index n) const;
  Index inverse_of(Index n) const;
  Relabeling inverse() const;
  /// (this * other)(n) = this(other(n)).
  Relabeling compose(const Relabeling& other) const;

  /// N: the relabeling is the identity beyond this index.
  Index support() const { return table_.size(); }
  std::vector<Index> prefix(Index m) const;
  bool is_identity() const;

  friend bool operator==(const Relabeling& a, const Relabeling& b);

 private:
  std::vector<Index> table_;
  std::vector<Index> inverse_;
};

enum class TotalKind { ExactTotal, FiniteBracketed, DivergesToInfinity, Unknown };

struct TotalCertificate {
  TotalKind kind = TotalKind::Unknown;
  std::optional<Rat> exact;  // set iff kind == ExactTotal
};

enum class WeightedSumCertificate {
  ConvergesUnderSomeRearrangement,
  DivergesUnderAllRearrangements,
  Unknown,
};

std::string_view to_string(TotalKind k);
std::string_view to_string(WeightedSumCertificate c);

/// Tail catalog for custom models: term(n) for n >= from.
struct TailRule {
  enum class Kind { Zero, Geometric, InversePower };
  Kind kind = Kind::Zero;
  Index from = 1;
  Rat ratio;           // Geometric: term(n) = scale * ratio^n
  unsigned exponent{};  // InversePower: term(n) = scale / n^exponent
  Rat scale{1};
};

namespace detail {
class ModelImpl;
}

/// Price sequence p_1, p_2, ... with declared certificates.
class PriceModel {
 public:
  enum class Kind { Geometric, InverseSquare, Harmonic, Custom, EvenEmbedding, Scaled, Relabeled,
                    ZeroOmitted, BlackBox };

  static PriceModel geometric(const Rat& ratio);
  static PriceModel inverse_square();
  static PriceModel harmonic();
  /// prefix holds (index, value) pairs with index < tail.from; missing
  /// indices are zero. A declared certificate must agree with the one the
  /// tail rule implies (declaring Unknown is always accepted).
  static PriceModel custom(std::vector<std::pair<Index, Rat>> prefix, TailRule tail,
                           std::optional<WeightedSumCertificate> declared = std::nullopt);
  static PriceModel black_box(std::function<Rat(Index)> term, std::string name);

  /// Reads the custom text format: "index value" lines, then a tail line such
  /// as "tail geometric 1/2 from 11" or "tail zero from 11".
  static PriceModel parse_custom(std::istream& in);
  /// "geometric[:r]", "inverse-square", "harmonic", "even:<spec>", "file:<path>".
  static PriceModel from_spec(const std::string& spec);

  /// q with q(2k) = p(k) and q(odd) = 0.
  PriceModel even_embedding() const;
  PriceModel scaled(const Rat& factor) const;
  /// q(n) = p(delta(n)): the sequence read in relabeled order.
  PriceModel relabeled(const Relabeling& delta) const;

  Rat term(Index n) const;
  /// Tail sum over i >= n; empty when it is infinite or unknown.
  std::optional<CertifiedReal> tail(Index n) const;
  /// Exact sum over n >= m of tail(n), when available.
  std::optional<Rat> tail_of_tails(Index m) const;
  TotalCertificate total() const;
  WeightedSumCertificate weighted_sum() const;
  /// From this index on, positive terms are non-increasing in index order.
  std::optional<Index> positive_nonincreasing_from() const;
  /// All terms from this index on are zero.
  std::optional<Index> zero_beyond() const;
  bool has_infinitely_many_zeros() const;
  Kind kind() const;
  std::string name() const;

  /// Cached scan: the positive-term indices among [1..limit].
  std::vector<Index> positive_indices(Index count, Index limit = kDefaultSearchHorizon) const;

  explicit PriceModel(std::shared_ptr<const detail::ModelImpl> impl) : impl_(std::move(impl)) {}
  const std::shared_ptr<const detail::ModelImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<const detail::ModelImpl> impl_;
};

/// Arrangement with positive terms in non-increasing order (ties by smaller
/// index) over the first horizon positions, zeros after all positives.
Relabeling descending_rearrangement(const PriceModel& model, Index horizon);
Relabeling quasi_descending_rearrangement(const PriceModel& model, Index horizon);

struct ZeroOmission {
  PriceModel omitted;
  /// (p-index, q-index) for every positive p-term within the horizon.
  std::vector<std::pair<Index, Index>> alpha;
};

ZeroOmission omit_zeros(const PriceModel& model, Index horizon);

/// Sum over n in [1..m] of n * term(images[n-1]); images must be injective.
Rat weighted_partial_sum(const PriceModel& model, std::span<const Index> images);
Rat weighted_partial_sum(const PriceModel& model, const Relabeling& delta, Index m);

}  // namespace prisoners
