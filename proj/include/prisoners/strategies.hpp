#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prisoners/numeric.hpp"
#include "prisoners/permutations.hpp"
#include "prisoners/sequences.hpp"

namespace prisoners {

enum class AllocTotalKind { ExactTotal, AtMost, Unknown };

struct AllocationTotal {
  AllocTotalKind kind = AllocTotalKind::Unknown;
  std::optional<Rat> value;  // exact total, or the upper bound for AtMost
};

enum class TailShape { ZeroBeyond, NonIncreasingBeyond, Unstructured };

/// ZeroBeyond(Z): amount(n) = 0 for n >= Z.
/// NonIncreasingBeyond(M): amount positive and non-increasing for n >= M.
struct TailStructure {
  TailShape shape = TailShape::Unstructured;
  Index from = 1;
};

/// amount(n) = coef * (H_n - H_{start-1}) + offset for n >= start, 0 before.
struct HarmonicForm {
  Rat coef{1};
  Index start = 1;
  Rat offset;
};

/// The prisoners' division of funds, a_1, a_2, ...
class AllocationPlan {
 public:
  using AmountFn = std::function<Rat(Index)>;

  AllocationPlan(AmountFn amount, AllocationTotal total, TailStructure tail, std::string name);

  /// Prefix values then a TailRule (zero, scale * r^n or scale / n^e).
  static AllocationPlan custom(std::vector<std::pair<Index, Rat>> prefix, TailRule tail, std::string name = "custom");
  static AllocationPlan harmonic(HarmonicForm form, std::string name);
  /// amount(n) = model.term(n), with the model's total and tail structure.
  static AllocationPlan from_model(const PriceModel& model, std::string name);
  /// Reads the custom model text format as an allocation.
  static AllocationPlan parse(std::istream& in);

  Rat amount(Index n) const { return amount_(n); }
  const AllocationTotal& total() const { return total_; }
  const TailStructure& tail_structure() const { return tail_; }
  const std::optional<HarmonicForm>& harmonic_form() const { return harmonic_; }
  const std::string& name() const { return name_; }

  AllocationPlan scaled(const Rat& factor) const;
  /// b(n) = a(delta(n)).
  AllocationPlan relabeled(const Relabeling& delta) const;
  /// Sum of amount(1..n).
  Rat prefix_sum(Index n) const;

 private:
  AmountFn amount_;
  AllocationTotal total_;
  TailStructure tail_;
  std::optional<HarmonicForm> harmonic_;
  std::string name_;
};

enum class PatternKind {
  None,
  /// Least-rank member of every cycle whose ranks are all >= threshold.
  LeastMemberFrom,
  /// Every maximal-price member of every cycle whose ranks are all >= threshold.
  MaxPriceMemberAvoidingPrefix,
  /// Every prisoner of rank > threshold.
  AllAbove,
  /// Every member of every cycle whose ranks are all >= threshold.
  AllMembersWhollyAbove,
  /// Largest-index member of every cycle whose members are all >= threshold.
  LastMemberFrom,
};

std::string_view to_string(PatternKind k);

/// Which prisoners the construction guarantees to succeed. Ranks are
/// positions in the rearranged order: rank(i) = delta^{-1}(i).
struct SuccessPattern {
  PatternKind kind = PatternKind::None;
  Index threshold = 0;
  /// Hypotheses on cycles the claim covers; violating cycles are not claimed.
  std::optional<Index> max_length;
  std::optional<Index> max_diameter;  // in ranks
};

struct StrategyDescriptor {
  std::string builder;
  nlohmann::json params = nlohmann::json::object();
  Index m = 0;
  Relabeling delta;
  SuccessPattern pattern;

  Index rank(Index i) const { return delta.inverse_of(i); }
  nlohmann::json to_json() const;
};

struct Strategy {
  AllocationPlan alloc;
  StrategyDescriptor descriptor;
};

/// a_1 = 0, a_n = 2^{1-n}.
Strategy build_baseline_geometric();

/// a_1 = total - TT(m), a_n = 0 for 1 < n < m, a_n = tail(n) for n >= m,
/// computed on the model read in delta order.
Strategy build_tail_sum_strategy(const PriceModel& model, const Relabeling& delta, const Rat& total);

/// a_n = 0 for n < m, k * p_n for n >= m.
Strategy build_bounded_length_strategy(const PriceModel& model, Index k, const Rat& total);

/// Bounded-length allocation for the open-boxes variant: with prices
/// non-increasing from index 1 and ascending entry, the first member of a
/// cycle wholly >= m opens it all and the rest read their label for free.
Strategy build_open_boxes_strategy(const PriceModel& model, Index k, const Rat& total);

/// Zeros through m + d, amount(m + d + j) = tail(m + j), in delta order.
Strategy build_bounded_diameter_strategy(const PriceModel& model, Index d, const Relabeling& delta,
                                         const Rat& total);

/// Members of cycles wholly >= m get their cycle's price; requires the
/// plan's cycles to have length <= k.
Strategy build_cycle_informed_strategy(const PriceModel& model, const CyclePlan& plan, Index k, const Rat& total);

struct V2Kind {
  enum class Tag { Constant1, HarmonicPrefix, ShiftedHarmonic, LogShift, Scaled };
  Tag tag = Tag::Constant1;
  Index k = 1;   // ShiftedHarmonic
  Rat K;         // LogShift
  Rat c;         // Scaled

  static V2Kind constant1() { return {}; }
  static V2Kind harmonic_prefix() { return {Tag::HarmonicPrefix, 1, {}, {}}; }
  static V2Kind shifted(Index k) { return {Tag::ShiftedHarmonic, k, {}, {}}; }
  static V2Kind log_shift(const Rat& K) { return {Tag::LogShift, 1, K, {}}; }
  static V2Kind scaled(const Rat& c) { return {Tag::Scaled, 1, {}, c}; }
};

/// Least k with H_{k-1} >= K + 1, so that H(k, n) <= H_n - K - 1 < log n - K
/// for every n >= k.
Index log_shift_start(const Rat& K);

Strategy build_v2_strategy(const V2Kind& kind);

/// JSON parameter readers: rationals as "n/d" strings or integers.
Rat json_rat(const nlohmann::json& params, const char* key, const Rat& fallback);
Index json_index(const nlohmann::json& params, const char* key, Index fallback);

/// Builder lookup by id with JSON parameters (used by the CLI and scenarios).
Strategy build_from_json(const std::string& id, const nlohmann::json& params, const PriceModel& model,
                         const CyclePlan* plan = nullptr);

}  // namespace prisoners
