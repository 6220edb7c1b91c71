#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "prisoners/adversaries.hpp"
#include "prisoners/permutations.hpp"
#include "prisoners/sequences.hpp"
#include "prisoners/strategies.hpp"

namespace prisoners {

enum class VariantId { V1a, V1b, V1c, V1d, V2a, V2b };
enum class ReleaseRule { InfinitelyMany, CofinitelyMany };
enum class InfoModel { ClosedBoxes, OpenBoxesPersist, CycleSetsDisclosed };
enum class PriceRegime { Free, FixedHarmonic };

struct Variant {
  VariantId id = VariantId::V1a;
  ReleaseRule release = ReleaseRule::InfinitelyMany;
  InfoModel info = InfoModel::ClosedBoxes;
  PriceRegime prices = PriceRegime::Free;

  static Variant of(VariantId id);
  /// "V1a" .. "V2b", case-insensitive.
  static Variant parse(std::string_view text);
  std::string_view name() const;

  friend bool operator==(const Variant& a, const Variant& b) { return a.id == b.id; }
};

enum class FailureReason { None, BudgetExhausted, NotSimulated };
std::string_view to_string(FailureReason r);

struct PrisonerOutcome {
  Index prisoner = 0;
  /// Boxes paid for, in visiting order.
  std::vector<Index> opened;
  /// Boxes read for free because they were already open (V1c only).
  std::vector<Index> read;
  /// Exact amount paid. Empty when the cycle was too long to walk and the
  /// outcome was decided by comparing the budget with the cycle price.
  std::optional<Rat> spent;
  bool success = false;
  FailureReason reason = FailureReason::None;
};

enum class Verdict { PatternConfirmed, CounterexampleFound, Inconclusive };
std::string_view to_string(Verdict v);

struct SimulationReport {
  Variant variant;
  Index horizon = 0;
  /// Sorted by prisoner.
  std::vector<PrisonerOutcome> outcomes;
  /// Scored cycles in emission order.
  std::vector<Cycle> cycles;
  /// Prices the run used (harmonic for V2).
  PriceModel prices = PriceModel::harmonic();
  std::size_t success_count = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<Index> witnesses;
  std::string note;

  const PrisonerOutcome* find(Index prisoner) const;
  bool succeeded(Index prisoner) const;
  nlohmann::json to_json() const;
};

struct SimulateOptions {
  /// Worker threads for closed-box variants; 0 picks the hardware count.
  unsigned jobs = 1;
  /// Cycles up to this length are walked box by box; longer ones are decided
  /// by a certified budget-versus-price comparison.
  std::size_t walk_limit = 256;
  /// V1c: a prisoner who already sees their label stops at once (zero cost).
  /// When false they still walk their chain while funds last, opening boxes
  /// for later entrants.
  bool stop_when_visible = true;
};

/// Pointer following from box n: box b holds label sigma(b). Closed boxes are
/// opened while the remaining budget covers their price; boxes in open_boxes
/// are read for free, and newly opened boxes are added to it.
PrisonerOutcome run_prisoner(Index n, const Rat& budget, const CyclePlan& plan, const PriceModel& model,
                             std::unordered_set<Index>* open_boxes = nullptr, bool stop_when_visible = true);

/// Scores every prisoner whose materialized cycle lies inside [1..horizon].
/// entry_order is only accepted for V1c (default ascending).
SimulationReport simulate(const Variant& variant, const PriceModel& model, const AllocationPlan& alloc,
                          const CyclePlan& plan, Index horizon,
                          const std::optional<std::vector<Index>>& entry_order = std::nullopt,
                          SimulateOptions opts = {});

/// Finite proxy for the strategy's claimed success pattern.
Verdict evaluate_release(const Variant& variant, SimulationReport& report, const StrategyDescriptor& descriptor);
/// Finite proxy for an adversary's claimed failure pattern: CounterexampleFound
/// (witnesses: failing prisoners) when it holds on every simulated cycle,
/// Inconclusive (witnesses: prisoners breaking it) otherwise.
Verdict evaluate_release(const Variant& variant, SimulationReport& report, ClaimKind claim);

}  // namespace prisoners
