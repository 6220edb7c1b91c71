#include "prisoners/adversaries.hpp"

#include <algorithm>
#include <unordered_set>

namespace prisoners {

namespace {

// Exact fallback is only attempted while exact harmonic sums stay small.
constexpr Index kExactHarmonicLimit = 20000;

Rat total_bound(const AllocationPlan& alloc) {
  const auto& t = alloc.total();
  if (t.kind == AllocTotalKind::Unknown || !t.value) {
    throw CapabilityError("allocation '" + alloc.name() + "' has no certified finite total");
  }
  return *t.value;
}

std::string range_text(Index a, Index b) { return a == b ? std::to_string(a) : std::to_string(a) + ".." + std::to_string(b); }

Cycle block(Index a, Index b) {
  std::vector<Index> members;
  members.reserve(b - a + 1);
  for (Index i = a; i <= b; ++i) members.push_back(i);
  return Cycle(std::move(members));
}

// Fixed-point bracket of coef * H(start, j) + offset, advanced monotonically in j.
class HarmonicRhs {
 public:
  explicit HarmonicRhs(const HarmonicForm& f) : f_(f), acc_(f.start) {
    BigInt one = 1;
    one <<= HarmonicAccumulator::kBits;
    const mpq_class off = mpq_class(f.offset.numerator(), f.offset.denominator()) * mpq_class(one);
    off_lo_ = Rat(off).floor();
    off_hi_ = Rat(off).ceil();
  }

  std::pair<BigInt, BigInt> bracket(Index j) {
    if (j < f_.start) return {BigInt(0), BigInt(0)};
    while (acc_.last() < j) acc_.extend();
    if (f_.coef.is_zero()) return {off_lo_, off_hi_};
    const BigInt& cn = f_.coef.numerator();
    const BigInt& cd = f_.coef.denominator();
    BigInt lo = cn * big_from_u128(acc_.fixed_lo());
    BigInt hi = cn * big_from_u128(acc_.fixed_hi());
    mpz_fdiv_q(lo.get_mpz_t(), lo.get_mpz_t(), cd.get_mpz_t());
    mpz_cdiv_q(hi.get_mpz_t(), hi.get_mpz_t(), cd.get_mpz_t());
    return {lo + off_lo_, hi + off_hi_};
  }

  Rat exact(Index j) const { return j < f_.start ? Rat() : f_.coef * harmonic_sum(f_.start, j) + f_.offset; }

 private:
  HarmonicForm f_;
  HarmonicAccumulator acc_;
  BigInt off_lo_, off_hi_;
};

// Does H(k, n) (bracketed by acc) strictly exceed the value bracketed by [lo, hi] * 2^-96?
// Falls back to the exact comparison when the brackets overlap.
template <typename ExactRhs>
bool exceeds(const HarmonicAccumulator& acc, const BigInt& lo, const BigInt& hi, ExactRhs exact_rhs) {
  if (big_from_u128(acc.fixed_lo()) > hi) return true;
  if (big_from_u128(acc.fixed_hi()) < lo) return false;
  if (acc.last() > kExactHarmonicLimit) {
    throw CapabilityError("harmonic block comparison at index " + std::to_string(acc.last()) +
                          " is too close to decide with 96-bit brackets");
  }
  return harmonic_sum(acc.start(), acc.last()) > exact_rhs();
}

std::pair<BigInt, BigInt> fixed_of(const Rat& q) {
  BigInt one = 1;
  one <<= HarmonicAccumulator::kBits;
  const Rat scaled = q * Rat(one, BigInt(1));
  return {scaled.floor(), scaled.ceil()};
}

// ------------------------------------------------------------- good index

class GoodIndexSource final : public CycleSource {
 public:
  GoodIndexSource(PriceModel model, const AllocationPlan& alloc, AdversaryOptions opts)
      : model_(std::move(model)), filled_(zero_filled(alloc)), opts_(opts) {
    if (model_.weighted_sum() != WeightedSumCertificate::DivergesUnderAllRearrangements) {
      throw CapabilityError("good-index adversary needs a model whose weighted sum diverges under every rearrangement");
    }
    auto t = model_.tail(1);
    if (!t) throw CapabilityError("good-index adversary needs a finite price total");
    total_ = std::make_unique<CertifiedReal>(*t);
    (void)total_bound(alloc);
    const auto& ts = filled_.tail_structure();
    if (ts.shape != TailShape::NonIncreasingBeyond) {
      throw CapabilityError("allocation '" + alloc.name() + "' has no tail structure to reorder by");
    }
    tail_from_ = ts.from;
    tail_next_ = ts.from;
    for (Index i = 1; i < tail_from_; ++i) head_.emplace_back(filled_.amount(i), i);
    std::stable_sort(head_.begin(), head_.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    cum_.emplace_back();  // cum_[pos - 1] = sum of p' over positions < pos
  }

  std::optional<EmittedCycle> next() override {
    if (!started_) {
      started_ = true;
      Index n0 = 1;
      while (!good(n0)) {
        if (++n0 > opts_.search_horizon) throw HorizonError("no good index below the search horizon");
      }
      next_ = n0;
      if (n0 > 1) {
        std::vector<Index> members;
        for (Index pos = 1; pos < n0; ++pos) members.push_back(order_[pos - 1]);
        return EmittedCycle{Cycle(std::move(members)),
                            "positions 1.." + std::to_string(n0 - 1) + " precede the first good position " +
                                std::to_string(n0)};
      }
    }
    const Index n = next_;
    const Rat a = value(n);
    Rat price;
    for (Index k = 0;; ++k) {
      if (n + k > opts_.search_horizon) {
        throw HorizonError("cycle from position " + std::to_string(n) + " does not close below the search horizon");
      }
      price += p(n + k);
      if (price > a && good(n + k + 1)) {
        std::vector<Index> members;
        for (Index pos = n; pos <= n + k; ++pos) members.push_back(order_[pos - 1]);
        next_ = n + k + 1;
        return EmittedCycle{Cycle(std::move(members)),
                            "price " + price.str() + " > filled amount " + a.str() + " of prisoner " +
                                std::to_string(order_[n - 1]) + "; position " + std::to_string(n + k + 1) +
                                " is good"};
      }
    }
  }

 private:
  void ensure(Index pos) {
    while (order_.size() < pos) {
      if (!tail_value_) tail_value_ = filled_.amount(tail_next_);
      if (head_pos_ < head_.size() && !(head_[head_pos_].first < *tail_value_)) {
        push(head_[head_pos_].second, head_[head_pos_].first);
        ++head_pos_;
      } else {
        push(tail_next_, *tail_value_);
        ++tail_next_;
        tail_value_.reset();
      }
    }
  }

  void push(Index original, const Rat& amount) {
    order_.push_back(original);
    values_.push_back(amount);
    prices_.push_back(model_.term(original));
    cum_.push_back(cum_.back() + prices_.back());
  }

  const Rat& value(Index pos) {
    ensure(pos);
    return values_[pos - 1];
  }
  const Rat& p(Index pos) {
    ensure(pos);
    return prices_[pos - 1];
  }

  // s'_pos = total - sum of p' before pos, strictly above a'_pos. Brackets
  // of the total are refined one level at a time and kept.
  bool good(Index pos) {
    ensure(pos);
    const Rat& before = cum_[pos - 1];
    const Rat& a = values_[pos - 1];
    for (unsigned level = 0; level <= opts_.max_refinements; ++level) {
      if (brackets_.size() <= level) brackets_.push_back(total_->bounds(level));
      const RatInterval& b = brackets_[level];
      if (b.lo - before > a) return true;
      if (b.hi - before <= a) return false;
    }
    throw CapabilityError("goodness of position " + std::to_string(pos) + " is undecided");
  }

  PriceModel model_;
  AllocationPlan filled_;
  AdversaryOptions opts_;
  std::unique_ptr<CertifiedReal> total_;
  std::vector<RatInterval> brackets_;
  Index tail_from_ = 1;
  std::vector<std::pair<Rat, Index>> head_;
  std::size_t head_pos_ = 0;
  Index tail_next_ = 0;
  std::optional<Rat> tail_value_;
  std::vector<Index> order_;
  std::vector<Rat> values_;
  std::vector<Rat> prices_;
  std::vector<Rat> cum_;
  bool started_ = false;
  Index next_ = 1;
};

// ----------------------------------------------------------- v1b ceiling

class CeilingSource final : public CycleSource {
 public:
  CeilingSource(PriceModel model, AllocationPlan alloc, AdversaryOptions opts)
      : model_(std::move(model)), alloc_(std::move(alloc)), opts_(opts), T_(total_bound(alloc_)) {}

  std::optional<EmittedCycle> next() override {
    Index leader = start_;
    while (!model_.term(leader).is_positive()) {
      if (++leader > opts_.search_horizon) throw HorizonError("no positive price below the search horizon");
    }
    const Rat p = model_.term(leader);
    const BigInt extra = (T_ / p).ceil();
    if (extra > BigInt(opts_.search_horizon) || leader + extra.get_ui() > opts_.search_horizon) {
      throw HorizonError("block led by " + std::to_string(leader) + " needs " + extra.get_str() +
                         " further members, past the search horizon");
    }
    const Index end = leader + extra.get_ui();
    std::string witness = "block " + range_text(start_, end) + ": " + std::to_string(end - leader + 1) + " * " +
                          p.str() + " > total " + T_.str();
    for (Index j = leader; j <= end; ++j) {
      const Rat a = alloc_.amount(j);
      if (a < p) {
        witness += "; a_" + std::to_string(j) + " = " + a.str() + " < p_" + std::to_string(leader);
        break;
      }
    }
    Cycle c = block(start_, end);
    start_ = end + 1;
    return EmittedCycle{std::move(c), std::move(witness)};
  }

 private:
  PriceModel model_;
  AllocationPlan alloc_;
  AdversaryOptions opts_;
  Rat T_;
  Index start_ = 1;
};

// ------------------------------------------------------------- two cycle

class TwoCycleSource final : public CycleSource {
 public:
  TwoCycleSource(PriceModel model, AllocationPlan alloc, AdversaryOptions opts)
      : model_(std::move(model)), alloc_(std::move(alloc)), opts_(opts) {}

  std::optional<EmittedCycle> next() override {
    while (used_.contains(low_)) used_.erase(low_++);
    const Index l = low_;
    const Rat pl = model_.term(l);
    for (Index n = l + 1; n <= opts_.search_horizon; ++n) {
      if (used_.contains(n)) continue;
      const Rat a = alloc_.amount(n);
      const Rat bar = pl.is_positive() ? pl : model_.term(n);
      if (a < bar) {
        used_.insert(n);
        ++low_;
        const std::string who = pl.is_positive() ? "p_" + std::to_string(l) : "p_" + std::to_string(n);
        return EmittedCycle{Cycle({l, n}), "a_" + std::to_string(n) + " = " + a.str() + " < " + who + " = " + bar.str()};
      }
    }
    throw HorizonError("no partner for " + std::to_string(l) + " below the search horizon");
  }

 private:
  PriceModel model_;
  AllocationPlan alloc_;
  AdversaryOptions opts_;
  Index low_ = 1;
  std::unordered_set<Index> used_;
};

// ------------------------------------------------------------ v1d blocks

class ChooserSource final : public CycleSource {
 public:
  ChooserSource(PriceModel model, Rat budget, AdversaryOptions opts)
      : model_(std::move(model)), budget_(std::move(budget)), opts_(opts) {}

  std::optional<EmittedCycle> next() override {
    Rat best;
    Index best_i = 0;
    for (Index k = 1;; ++k) {
      const Index i = start_ + k - 1;
      if (i > opts_.search_horizon) {
        throw HorizonError("block from " + std::to_string(start_) + " does not close below the search horizon");
      }
      const Rat p = model_.term(i);
      if (p > best) {
        best = p;
        best_i = i;
      }
      if (best.is_positive() && Rat(k) * best > budget_) {
        Cycle c = block(start_, i);
        std::string witness = std::to_string(k) + " * p_" + std::to_string(best_i) + " = " + (Rat(k) * best).str() +
                              " > " + budget_.str();
        start_ = i + 1;
        return EmittedCycle{std::move(c), std::move(witness)};
      }
    }
  }

 private:
  PriceModel model_;
  Rat budget_;
  AdversaryOptions opts_;
  Index start_ = 1;
};

// ------------------------------------------------------- harmonic blocks

class V2aSource final : public CycleSource {
 public:
  V2aSource(AllocationPlan alloc, AdversaryOptions opts) : alloc_(std::move(alloc)), opts_(opts) {
    if (alloc_.harmonic_form()) {
      if (alloc_.harmonic_form()->coef.sign() < 0) throw DomainError("harmonic form with negative coefficient");
      rhs_.emplace(*alloc_.harmonic_form());
    }
  }

  std::optional<EmittedCycle> next() override {
    const Index k = start_;
    HarmonicAccumulator acc(k);
    Rat max_amount;
    for (Index n = k;; ++n) {
      if (n > opts_.search_horizon) {
        throw HorizonError("block from " + std::to_string(k) + " does not close below index " +
                           std::to_string(opts_.search_horizon));
      }
      acc.extend();
      bool done;
      if (rhs_) {
        // Non-decreasing amounts: the block maximum is a_n.
        const auto [lo, hi] = rhs_->bracket(n);
        done = exceeds(acc, lo, hi, [&] { return rhs_->exact(n); });
      } else {
        max_amount = max(max_amount, alloc_.amount(n));
        const auto [lo, hi] = fixed_of(max_amount);
        done = exceeds(acc, lo, hi, [&] { return max_amount; });
      }
      if (done) {
        start_ = n + 1;
        return EmittedCycle{block(k, n), "H(" + std::to_string(k) + "," + std::to_string(n) +
                                             ") exceeds every amount in the block"};
      }
    }
  }

 private:
  AllocationPlan alloc_;
  AdversaryOptions opts_;
  std::optional<HarmonicRhs> rhs_;
  Index start_ = 1;
};

class V2bSource final : public CycleSource {
 public:
  V2bSource(AllocationPlan alloc, AdversaryOptions opts) : alloc_(std::move(alloc)), opts_(opts) {
    if (alloc_.harmonic_form()) rhs_.emplace(*alloc_.harmonic_form());
  }

  std::optional<EmittedCycle> next() override {
    const Index n0 = start_;
    BigInt lo, hi;
    std::optional<Rat> a;
    if (rhs_) {
      std::tie(lo, hi) = rhs_->bracket(n0);
    } else {
      a = alloc_.amount(n0);
      std::tie(lo, hi) = fixed_of(*a);
    }
    auto exact_rhs = [&] { return a ? *a : rhs_->exact(n0); };
    HarmonicAccumulator acc(n0);
    for (Index n = n0;; ++n) {
      if (n > opts_.search_horizon) {
        throw HorizonError("block from " + std::to_string(n0) + " does not close below index " +
                           std::to_string(opts_.search_horizon));
      }
      acc.extend();
      if (exceeds(acc, lo, hi, exact_rhs)) {
        start_ = n + 1;
        return EmittedCycle{block(n0, n), "H(" + std::to_string(n0) + "," + std::to_string(n) + ") > a_" +
                                              std::to_string(n0)};
      }
    }
  }

 private:
  AllocationPlan alloc_;
  AdversaryOptions opts_;
  std::optional<HarmonicRhs> rhs_;
  Index start_ = 1;
};

}  // namespace

std::string_view to_string(ClaimKind k) {
  switch (k) {
    case ClaimKind::NoSuccessAfterFirstCycle: return "no-success-after-first-cycle";
    case ClaimKind::FailurePerCycle: return "failure-per-cycle";
    case ClaimKind::AllMembersFail: return "all-members-fail";
    case ClaimKind::FirstMemberFails: return "first-member-fails";
  }
  return "?";
}

DivergenceWitness divergence_witness(const PriceModel& model, const Rat& target, Index horizon) {
  // The identity may already do it.
  const auto tt = model.tail_of_tails(1);
  if (!tt || *tt > target) {
    Rat s;
    const Index limit = std::min<Index>(horizon, 4096);
    for (Index m = 1; m <= limit; ++m) {
      s += Rat(m) * model.term(m);
      if (s > target) return {Relabeling::identity(), m, s, true};
    }
  }

  // Move the (2k-1)-th positive term to a position j_k with j_k * p > 1.
  std::vector<Index> moved;
  std::vector<Index> positions;
  Rat bound;
  Index j = 0;
  for (std::size_t k = 1; !(bound > target); ++k) {
    const auto pos = model.positive_indices(2 * k - 1, horizon);
    if (pos.size() < 2 * k - 1) {
      throw HorizonError("only " + std::to_string(pos.size()) + " positive terms below index " +
                         std::to_string(horizon));
    }
    const Index n = pos[2 * k - 2];
    const Rat v = model.term(n);
    const BigInt fl = (Rat(1) / v).floor() + 1;
    if (!fl.fits_ulong_p() || fl.get_ui() > horizon) {
      throw HorizonError("position for p_" + std::to_string(n) + " lies past the horizon");
    }
    j = std::max<Index>(j + 1, fl.get_ui());
    if (j > horizon) throw HorizonError("witness positions run past the horizon");
    moved.push_back(n);
    positions.push_back(j);
    bound += Rat(j) * v;
  }
  const Index m = j;
  std::vector<Index> images(m, 0);
  std::unordered_set<Index> placed(moved.begin(), moved.end());
  for (std::size_t i = 0; i < moved.size(); ++i) images[positions[i] - 1] = moved[i];
  Index fill = 1;
  for (Index p = 0; p < m; ++p) {
    if (images[p] != 0) continue;
    while (placed.contains(fill)) ++fill;
    images[p] = fill++;
  }
  return {Relabeling::from_prefix_images(images), m, bound, false};
}

AllocationPlan zero_filled(const AllocationPlan& alloc) {
  const TailStructure ts = alloc.tail_structure();
  AllocationTotal total = alloc.total();
  if (total.value) total.value = *total.value + Rat(1);
  if (ts.shape == TailShape::ZeroBeyond) {
    auto zeros = std::make_shared<std::vector<Index>>(ts.from, 0);  // zeros among [1..i]
    for (Index i = 1; i < ts.from; ++i) (*zeros)[i] = (*zeros)[i - 1] + (alloc.amount(i).is_zero() ? 1 : 0);
    auto fn = [alloc, zeros, from = ts.from](Index n) -> Rat {
      if (n >= from) return Rat::pow2_inverse((*zeros)[from - 1] + (n - from + 1));
      const Rat a = alloc.amount(n);
      return a.is_zero() ? Rat::pow2_inverse((*zeros)[n]) : a;
    };
    return AllocationPlan(std::move(fn), total, {TailShape::NonIncreasingBeyond, ts.from}, alloc.name() + "+fill");
  }
  if (ts.shape == TailShape::NonIncreasingBeyond) {
    Index z = 0;
    for (Index i = 1; i < ts.from; ++i) z += alloc.amount(i).is_zero() ? 1 : 0;
    if (z == 0) return alloc;
    const Rat share(BigInt(1), BigInt(static_cast<unsigned long>(z)));
    auto fn = [alloc, share](Index n) {
      const Rat a = alloc.amount(n);
      return a.is_zero() ? share : a;
    };
    return AllocationPlan(std::move(fn), total, ts, alloc.name() + "+fill");
  }
  throw CapabilityError("allocation '" + alloc.name() + "' has no tail structure; zeros cannot be located");
}

CyclePlan good_index_adversary(const PriceModel& model, const AllocationPlan& alloc, AdversaryOptions opts) {
  return CyclePlan::lazy(std::make_unique<GoodIndexSource>(model, alloc, opts));
}

CyclePlan v1b_ceiling_adversary(const PriceModel& model, const AllocationPlan& alloc, AdversaryOptions opts) {
  return CyclePlan::lazy(std::make_unique<CeilingSource>(model, alloc, opts));
}

CyclePlan two_cycle_adversary(const PriceModel& model, const AllocationPlan& alloc, AdversaryOptions opts) {
  return CyclePlan::lazy(std::make_unique<TwoCycleSource>(model, alloc, opts));
}

CyclePlan v1d_cycle_chooser(const PriceModel& model, const Rat& budget, AdversaryOptions opts) {
  if (!budget.is_positive()) throw DomainError("budget must be positive");
  return CyclePlan::lazy(std::make_unique<ChooserSource>(model, budget, opts));
}

CyclePlan v2a_block_adversary(const AllocationPlan& alloc, AdversaryOptions opts) {
  return CyclePlan::lazy(std::make_unique<V2aSource>(alloc, opts));
}

CyclePlan v2b_block_adversary(const AllocationPlan& alloc, AdversaryOptions opts) {
  return CyclePlan::lazy(std::make_unique<V2bSource>(alloc, opts));
}

Index scaled_harmonic_gap(Index k, const Rat& c, Index search_horizon) {
  if (k == 0) throw DomainError("k must be >= 1");
  if (!(c.is_positive() && c < Rat(1))) throw DomainError("c must lie in (0, 1)");
  HarmonicRhs rhs(HarmonicForm{c, 1, Rat()});
  HarmonicAccumulator acc(k);
  for (Index n = k; n <= search_horizon; ++n) {
    acc.extend();
    const auto [lo, hi] = rhs.bracket(n);
    if (exceeds(acc, lo, hi, [&] { return rhs.exact(n); })) return n;
  }
  throw HorizonError("no gap index below " + std::to_string(search_horizon));
}

Adversary make_adversary(const std::string& id, const PriceModel& model, const AllocationPlan& alloc,
                         AdversaryOptions opts) {
  if (id == "good-index") return {id, good_index_adversary(model, alloc, opts), ClaimKind::NoSuccessAfterFirstCycle};
  if (id == "v1b-ceiling") return {id, v1b_ceiling_adversary(model, alloc, opts), ClaimKind::FailurePerCycle};
  if (id == "two-cycle") return {id, two_cycle_adversary(model, alloc, opts), ClaimKind::FailurePerCycle};
  if (id == "v1d-chooser") {
    return {id, v1d_cycle_chooser(model, total_bound(alloc), opts), ClaimKind::FailurePerCycle};
  }
  if (id == "v2a-block") return {id, v2a_block_adversary(alloc, opts), ClaimKind::AllMembersFail};
  if (id == "v2b-block") return {id, v2b_block_adversary(alloc, opts), ClaimKind::FirstMemberFails};
  throw DomainError("unknown adversary '" + id + "'");
}

}  // namespace prisoners
