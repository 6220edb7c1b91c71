#include "prisoners/engine.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

namespace prisoners {

namespace {

constexpr unsigned kBits = HarmonicAccumulator::kBits;
// Exact sums are used up to this many terms; past it, fixed-point brackets.
constexpr std::size_t kExactTerms = 4096;

struct Bracket {
  std::optional<Rat> exact;
  BigInt lo, hi;  // value in [lo, hi] * 2^-kBits
};

Bracket of_exact(Rat q) {
  BigInt one = 1;
  one <<= kBits;
  const Rat scaled = q * Rat(one, BigInt(1));
  return {std::move(q), scaled.floor(), scaled.ceil()};
}

// H_n in fixed point, lo_[n] <= 2^kBits * H_n <= hi_[n].
class HarmonicTable {
 public:
  void extend_to(Index n) {
    const unsigned __int128 one = static_cast<unsigned __int128>(1) << kBits;
    while (lo_.size() <= n) {
      const unsigned __int128 i = lo_.size();
      const unsigned __int128 q = one / i;
      lo_.push_back(lo_.back() + q);
      hi_.push_back(hi_.back() + (one % i == 0 ? q : q + 1));
    }
  }
  // Exact H_n for n <= kExactTerms, built incrementally.
  void extend_exact_to(Index n) {
    n = std::min<Index>(n, kExactTerms);
    while (exact_.size() <= n) exact_.push_back(exact_.back() + Rat(BigInt(1), BigInt(exact_.size())));
  }
  const Rat* exact(Index n) const { return n < exact_.size() ? &exact_[n] : nullptr; }

  // 2^kBits * H(a, b), for a <= b already in the table.
  std::pair<BigInt, BigInt> range(Index a, Index b) const {
    return {big_from_u128(lo_[b] - hi_[a - 1]), big_from_u128(hi_[b] - lo_[a - 1])};
  }

 private:
  std::vector<unsigned __int128> lo_{0};
  std::vector<unsigned __int128> hi_{0};
  std::vector<Rat> exact_{Rat()};
};

Bracket budget_of(const AllocationPlan& alloc, Index n, const HarmonicTable& table) {
  const auto& form = alloc.harmonic_form();
  if (!form) return of_exact(alloc.amount(n));
  if (n < form->start) return of_exact(Rat());
  if (form->coef.is_zero()) return of_exact(form->offset);
  if (const Rat* hn = table.exact(n)) return of_exact(form->coef * (*hn - *table.exact(form->start - 1)) + form->offset);
  auto [lo, hi] = table.range(form->start, n);
  const Bracket off = of_exact(form->offset);
  const BigInt& cn = form->coef.numerator();
  const BigInt& cd = form->coef.denominator();
  lo *= cn;
  hi *= cn;
  mpz_fdiv_q(lo.get_mpz_t(), lo.get_mpz_t(), cd.get_mpz_t());
  mpz_cdiv_q(hi.get_mpz_t(), hi.get_mpz_t(), cd.get_mpz_t());
  return {std::nullopt, lo + off.lo, hi + off.hi};
}

Bracket price_of(const Cycle& c, const PriceModel& prices, bool harmonic) {
  if (c.length() <= kExactTerms) {
    Rat s;
    for (Index i : c.members()) s += prices.term(i);
    return of_exact(std::move(s));
  }
  if (harmonic) {
    const unsigned __int128 one = static_cast<unsigned __int128>(1) << kBits;
    unsigned __int128 lo = 0, hi = 0;
    for (Index i : c.members()) {
      const unsigned __int128 q = one / i;
      lo += q;
      hi += (one % i == 0) ? q : q + 1;
    }
    return {std::nullopt, big_from_u128(lo), big_from_u128(hi)};
  }
  Bracket b;
  for (Index i : c.members()) {
    const Bracket t = of_exact(prices.term(i));
    b.lo += t.lo;
    b.hi += t.hi;
  }
  return b;
}

// Closed boxes: success iff budget >= cycle price.
bool covers(const Bracket& budget, const Bracket& price, Index prisoner) {
  if (budget.exact && price.exact) return !(*budget.exact < *price.exact);
  if (budget.lo >= price.hi) return true;
  if (budget.hi < price.lo) return false;
  throw CapabilityError("budget of prisoner " + std::to_string(prisoner) +
                        " is too close to its cycle price to decide with fixed-point brackets");
}

std::vector<PrisonerOutcome> score_closed(const Cycle& c, const PriceModel& prices, bool harmonic,
                                          const AllocationPlan& alloc, const HarmonicTable& table,
                                          const CyclePlan& plan, std::size_t walk_limit) {
  std::vector<PrisonerOutcome> out;
  out.reserve(c.length());
  std::optional<Bracket> price;
  for (Index n : c.members()) {
    const Bracket budget = budget_of(alloc, n, table);
    if (c.length() <= walk_limit && budget.exact) {
      out.push_back(run_prisoner(n, *budget.exact, plan, prices));
      continue;
    }
    if (!price) price = price_of(c, prices, harmonic);
    PrisonerOutcome o;
    o.prisoner = n;
    o.success = covers(budget, *price, n);
    o.reason = o.success ? FailureReason::None : FailureReason::BudgetExhausted;
    if (o.success && price->exact) o.spent = price->exact;
    out.push_back(std::move(o));
  }
  return out;
}

std::string rat_json(const Rat& q) {
  return q.denominator() == 1 ? q.numerator().get_str() + "/1" : q.str();
}

}  // namespace

Variant Variant::of(VariantId id) {
  using enum ReleaseRule;
  switch (id) {
    case VariantId::V1a: return {id, InfinitelyMany, InfoModel::ClosedBoxes, PriceRegime::Free};
    case VariantId::V1b: return {id, CofinitelyMany, InfoModel::ClosedBoxes, PriceRegime::Free};
    case VariantId::V1c: return {id, CofinitelyMany, InfoModel::OpenBoxesPersist, PriceRegime::Free};
    case VariantId::V1d: return {id, CofinitelyMany, InfoModel::CycleSetsDisclosed, PriceRegime::Free};
    case VariantId::V2a: return {id, InfinitelyMany, InfoModel::ClosedBoxes, PriceRegime::FixedHarmonic};
    case VariantId::V2b: return {id, CofinitelyMany, InfoModel::ClosedBoxes, PriceRegime::FixedHarmonic};
  }
  throw DomainError("unknown variant");
}

Variant Variant::parse(std::string_view text) {
  std::string t(text);
  for (auto& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  static const std::pair<const char*, VariantId> names[] = {{"v1a", VariantId::V1a}, {"v1b", VariantId::V1b},
                                                            {"v1c", VariantId::V1c}, {"v1d", VariantId::V1d},
                                                            {"v2a", VariantId::V2a}, {"v2b", VariantId::V2b}};
  for (const auto& [name, id] : names) {
    if (t == name) return of(id);
  }
  throw DomainError("unknown variant '" + std::string(text) + "'");
}

std::string_view Variant::name() const {
  switch (id) {
    case VariantId::V1a: return "V1a";
    case VariantId::V1b: return "V1b";
    case VariantId::V1c: return "V1c";
    case VariantId::V1d: return "V1d";
    case VariantId::V2a: return "V2a";
    case VariantId::V2b: return "V2b";
  }
  return "?";
}

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::BudgetExhausted: return "budget-exhausted";
    case FailureReason::NotSimulated: return "not-simulated";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::PatternConfirmed: return "PatternConfirmed";
    case Verdict::CounterexampleFound: return "CounterexampleFound";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const PrisonerOutcome* SimulationReport::find(Index prisoner) const {
  auto it = std::lower_bound(outcomes.begin(), outcomes.end(), prisoner,
                             [](const PrisonerOutcome& o, Index p) { return o.prisoner < p; });
  return it != outcomes.end() && it->prisoner == prisoner ? &*it : nullptr;
}

bool SimulationReport::succeeded(Index prisoner) const {
  const auto* o = find(prisoner);
  return o && o->success;
}

nlohmann::json SimulationReport::to_json() const {
  nlohmann::json j;
  j["variant"] = std::string(variant.name());
  j["horizon"] = horizon;
  auto& arr = j["outcomes"] = nlohmann::json::array();
  for (const auto& o : outcomes) {
    nlohmann::json e;
    e["prisoner"] = o.prisoner;
    e["spent"] = o.spent ? nlohmann::json(rat_json(*o.spent)) : nlohmann::json();
    e["success"] = o.success;
    e["opened"] = o.opened;
    if (!o.read.empty()) e["read"] = o.read;
    if (o.reason == FailureReason::NotSimulated) e["reason"] = std::string(to_string(o.reason));
    arr.push_back(std::move(e));
  }
  j["verdict"] = std::string(to_string(verdict));
  j["witnesses"] = witnesses;
  return j;
}

PrisonerOutcome run_prisoner(Index n, const Rat& budget, const CyclePlan& plan, const PriceModel& model,
                             std::unordered_set<Index>* open_boxes, bool stop_when_visible) {
  PrisonerOutcome out;
  out.prisoner = n;
  Rat spent;
  // Box b holds label sigma(b), so label n sits in box sigma^{-1}(n).
  const Index target = plan.sigma_inverse(n);
  if (open_boxes && open_boxes->contains(target)) {
    out.success = true;
    if (stop_when_visible) {
      out.read.push_back(target);
      out.spent = spent;
      return out;
    }
  }
  for (Index b = n;; b = plan.sigma(b)) {
    if (open_boxes && open_boxes->contains(b)) {
      out.read.push_back(b);
    } else {
      const Rat p = model.term(b);
      if (budget < spent + p) {
        if (!out.success) out.reason = FailureReason::BudgetExhausted;
        break;
      }
      spent += p;
      out.opened.push_back(b);
      if (open_boxes) open_boxes->insert(b);
    }
    if (b == target) {
      out.success = true;
      break;
    }
  }
  out.spent = spent;
  return out;
}

SimulationReport simulate(const Variant& variant, const PriceModel& model, const AllocationPlan& alloc,
                          const CyclePlan& plan, Index horizon, const std::optional<std::vector<Index>>& entry_order,
                          SimulateOptions opts) {
  if (entry_order && variant.info != InfoModel::OpenBoxesPersist) {
    throw ContractViolation("entry order only applies to the open-boxes variant");
  }
  SimulationReport report;
  report.variant = variant;
  report.horizon = horizon;
  const bool harmonic = variant.prices == PriceRegime::FixedHarmonic;
  report.prices = harmonic ? PriceModel::harmonic() : model;

  std::vector<PrisonerOutcome> skipped;
  for (const auto& c : plan.cycles()) {
    if (c.max() <= horizon) {
      report.cycles.push_back(c);
    } else {
      for (Index i : c.members()) {
        if (i <= horizon) skipped.push_back({i, {}, {}, std::nullopt, false, FailureReason::NotSimulated});
      }
    }
  }
  if (plan.coverage() == Coverage::PrefixThenIdentity) {
    for (Index i = plan.prefix_horizon() + 1; i <= horizon; ++i) report.cycles.push_back(Cycle({i}));
  }

  std::vector<PrisonerOutcome>& out = report.outcomes;
  if (variant.info == InfoModel::OpenBoxesPersist) {
    std::vector<Index> order;
    for (const auto& c : report.cycles) order.insert(order.end(), c.members().begin(), c.members().end());
    std::sort(order.begin(), order.end());
    if (entry_order) {
      std::vector<Index> given = *entry_order;
      std::sort(given.begin(), given.end());
      if (given != order) throw ContractViolation("entry order is not a permutation of the simulated prisoners");
      order = *entry_order;
    }
    std::unordered_set<Index> open;
    for (Index n : order) out.push_back(run_prisoner(n, alloc.amount(n), plan, report.prices, &open, opts.stop_when_visible));
  } else {
    HarmonicTable table;
    if (const auto& f = alloc.harmonic_form(); f && !f->coef.is_zero()) {
      Index top = 0;
      for (const auto& c : report.cycles) top = std::max(top, c.max());
      table.extend_to(top);
      table.extend_exact_to(top);
    }
    std::vector<std::vector<PrisonerOutcome>> slots(report.cycles.size());
    unsigned jobs = opts.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.jobs;
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, slots.size())));
    std::vector<std::exception_ptr> errors(jobs);
    auto work = [&](unsigned w) {
      try {
        for (std::size_t i = w; i < slots.size(); i += jobs) {
          slots[i] = score_closed(report.cycles[i], report.prices, harmonic, alloc, table, plan, opts.walk_limit);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (jobs == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (auto& s : slots) std::move(s.begin(), s.end(), std::back_inserter(out));
  }
  out.insert(out.end(), skipped.begin(), skipped.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.prisoner < b.prisoner; });
  report.success_count = static_cast<std::size_t>(std::count_if(out.begin(), out.end(), [](const auto& o) {
    return o.success;
  }));
  return report;
}

namespace {

Verdict finish(SimulationReport& report, std::vector<Index> failures, bool any_claimed, std::string note) {
  report.witnesses = std::move(failures);
  report.note = std::move(note);
  if (!report.witnesses.empty()) {
    report.verdict = Verdict::CounterexampleFound;
  } else {
    report.verdict = any_claimed ? Verdict::PatternConfirmed : Verdict::Inconclusive;
  }
  return report.verdict;
}

void check_variant(const Variant& variant, const SimulationReport& report) {
  if (!(variant == report.variant)) {
    throw ContractViolation("report was produced under " + std::string(report.variant.name()) + ", not " +
                            std::string(variant.name()));
  }
}

}  // namespace

Verdict evaluate_release(const Variant& variant, SimulationReport& report, const StrategyDescriptor& d) {
  check_variant(variant, report);
  const SuccessPattern& pat = d.pattern;
  if (pat.kind == PatternKind::None) return finish(report, {}, false, "strategy claims no pattern");
  std::vector<Index> failures;
  bool any = false;
  auto claim = [&](Index i) {
    any = true;
    if (!report.succeeded(i)) failures.push_back(i);
  };
  for (const auto& c : report.cycles) {
    if (pat.max_length && c.length() > *pat.max_length) continue;
    Index rmin = d.rank(c.members().front()), rmax = rmin;
    for (Index i : c.members()) {
      rmin = std::min(rmin, d.rank(i));
      rmax = std::max(rmax, d.rank(i));
    }
    if (pat.max_diameter && rmax - rmin > *pat.max_diameter) continue;
    switch (pat.kind) {
      case PatternKind::None: break;
      case PatternKind::LeastMemberFrom:
        if (rmin >= pat.threshold) {
          for (Index i : c.members()) {
            if (d.rank(i) == rmin) claim(i);
          }
        }
        break;
      case PatternKind::MaxPriceMemberAvoidingPrefix:
        if (rmin >= pat.threshold) {
          Rat top = report.prices.term(c.members().front());
          for (Index i : c.members()) top = max(top, report.prices.term(i));
          for (Index i : c.members()) {
            if (report.prices.term(i) == top) claim(i);
          }
        }
        break;
      case PatternKind::AllAbove:
        for (Index i : c.members()) {
          if (d.rank(i) > pat.threshold) claim(i);
        }
        break;
      case PatternKind::AllMembersWhollyAbove:
        if (rmin >= pat.threshold) {
          for (Index i : c.members()) claim(i);
        }
        break;
      case PatternKind::LastMemberFrom:
        if (c.min() >= pat.threshold) claim(c.max());
        break;
    }
  }
  return finish(report, std::move(failures), any,
                std::string(to_string(pat.kind)) + " from " + std::to_string(pat.threshold));
}

Verdict evaluate_release(const Variant& variant, SimulationReport& report, ClaimKind claim) {
  check_variant(variant, report);
  if (report.cycles.empty()) return finish(report, {}, false, "no cycle was simulated");
  std::vector<Index> breaking;
  std::vector<Index> evidence;
  for (std::size_t k = 0; k < report.cycles.size(); ++k) {
    const auto& m = report.cycles[k].members();
    switch (claim) {
      case ClaimKind::NoSuccessAfterFirstCycle:
        if (k == 0) break;
        for (Index i : m) {
          if (report.succeeded(i)) breaking.push_back(i);
        }
        if (!report.succeeded(m.front())) evidence.push_back(m.front());
        break;
      case ClaimKind::FailurePerCycle: {
        auto it = std::find_if(m.begin(), m.end(), [&](Index i) { return !report.succeeded(i); });
        if (it == m.end()) {
          breaking.push_back(m.front());
        } else {
          evidence.push_back(*it);
        }
        break;
      }
      case ClaimKind::AllMembersFail:
        for (Index i : m) {
          if (report.succeeded(i)) breaking.push_back(i);
        }
        evidence.push_back(m.front());
        break;
      case ClaimKind::FirstMemberFails:
        if (report.succeeded(m.front())) {
          breaking.push_back(m.front());
        } else {
          evidence.push_back(m.front());
        }
        break;
    }
  }
  // Verdicts speak about the prisoners: a failure pattern that holds is a
  // counterexample to their release; a broken one leaves the run inconclusive.
  report.note = std::string(to_string(claim));
  if (!breaking.empty()) {
    report.verdict = Verdict::Inconclusive;
    report.witnesses = std::move(breaking);
    report.note += " broken by the listed prisoners";
  } else if (evidence.empty()) {
    report.verdict = Verdict::Inconclusive;
    report.witnesses.clear();
    report.note += " has nothing to show beyond the first cycle";
  } else {
    report.verdict = Verdict::CounterexampleFound;
    report.witnesses = std::move(evidence);
    report.note += " holds on every simulated cycle";
  }
  return report.verdict;
}

}  // namespace prisoners
