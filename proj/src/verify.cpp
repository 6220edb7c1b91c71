#include "prisoners/verify.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "prisoners/adversaries.hpp"
#include "prisoners/analyzer.hpp"
#include "prisoners/engine.hpp"

namespace prisoners {

namespace {

constexpr std::size_t kMaxWitnesses = 20;

struct Ctx {
  const nlohmann::json& p;
  std::uint64_t seed;
  unsigned jobs;
  VerificationReport& r;

  void fail(std::string what) {
    r.pass = false;
    if (r.witnesses.size() < kMaxWitnesses) r.witnesses.push_back(std::move(what));
  }
  PriceModel model(const char* fallback) const { return PriceModel::from_spec(p.value("model", std::string(fallback))); }
  Index index(const char* key, Index fallback) const { return json_index(p, key, fallback); }
  Rat rat(const char* key, const Rat& fallback) const { return json_rat(p, key, fallback); }
};

std::string list(const std::vector<Index>& v, std::size_t cap = 8) {
  std::string s;
  for (std::size_t i = 0; i < v.size() && i < cap; ++i) s += (i ? " " : "") + std::to_string(v[i]);
  if (v.size() > cap) s += " ...";
  return s;
}

struct StrategyRun {
  std::size_t confirmed = 0;
  std::size_t inconclusive = 0;
};

// Simulates `count` plans, each with the strategy built for it; any
// counterexample fails the check.
StrategyRun run_strategy(Ctx& cx, const Variant& variant, const PriceModel& model, std::size_t count, Index horizon,
                         const std::function<CyclePlan(std::uint64_t)>& make_plan,
                         const std::function<Strategy(const CyclePlan&)>& build, const std::string& label) {
  StrategyRun out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(cx.seed, i);
    const CyclePlan plan = make_plan(s);
    const Strategy st = build(plan);
    SimulateOptions opts;
    opts.jobs = cx.jobs;
    auto rep = simulate(variant, model, st.alloc, plan, horizon, std::nullopt, opts);
    const Verdict v = evaluate_release(variant, rep, st.descriptor);
    ++cx.r.checked;
    if (v == Verdict::PatternConfirmed) {
      ++out.confirmed;
    } else if (v == Verdict::CounterexampleFound) {
      cx.fail(label + " plan seed " + std::to_string(s) + ": claimed prisoners failed: " + list(rep.witnesses));
    } else {
      ++out.inconclusive;
    }
  }
  if (out.confirmed == 0) cx.fail(label + ": no plan exercised the claimed pattern");
  return out;
}

// Pulls `cycles` adversary cycles and checks the adversary's failure claim.
void run_adversary(Ctx& cx, const Variant& variant, const PriceModel& model, const AllocationPlan& alloc,
                   const std::string& id, std::size_t cycles, AdversaryOptions opts = {}) {
  Adversary adv = make_adversary(id, model, alloc, opts);
  std::string shortfall;
  try {
    adv.plan.pull(cycles);
  } catch (const HorizonError& e) {
    shortfall = e.what();
  }
  const std::size_t got = adv.plan.cycles().size();
  const std::string label = id + " vs " + alloc.name();
  if (got < cycles) {
    cx.fail(label + ": only " + std::to_string(got) + " of " + std::to_string(cycles) + " cycles within the search horizon" +
            (shortfall.empty() ? "" : " (" + shortfall + ")"));
  }
  if (got == 0) return;
  Index horizon = 0;
  for (const auto& c : adv.plan.cycles()) horizon = std::max(horizon, c.max());
  SimulateOptions so;
  so.jobs = cx.jobs;
  auto rep = simulate(variant, model, alloc, adv.plan, horizon, std::nullopt, so);
  const Verdict v = evaluate_release(variant, rep, adv.claim);
  cx.r.checked += got;
  if (v != Verdict::CounterexampleFound) {
    cx.fail(label + ": claim " + std::string(to_string(adv.claim)) + " broken by " + list(rep.witnesses));
  }
}

std::vector<AllocationPlan> allocations(const Ctx& cx, const std::string& kind, std::size_t count) {
  std::vector<AllocationPlan> out;
  if (kind == "baseline") {
    out.push_back(build_baseline_geometric().alloc);
  } else if (kind == "constant1") {
    out.push_back(build_v2_strategy(V2Kind::constant1()).alloc);
  } else if (kind == "harmonic-prefix") {
    out.push_back(build_v2_strategy(V2Kind::harmonic_prefix()).alloc);
  } else if (kind == "random") {
    for (std::size_t i = 0; i < count; ++i) out.push_back(random_allocation(derive_seed(cx.seed, 1000 + i)));
  } else {
    throw DomainError("unknown allocation kind '" + kind + "'");
  }
  return out;
}

void tail_sum_strategy(Ctx& cx) {
  const auto model = cx.model("geometric");
  const Rat total = cx.rat("total", Rat(1));
  const Index horizon = cx.index("horizon", 1000), max_len = cx.index("max_len", 20);
  const auto st = build_tail_sum_strategy(model, Relabeling::identity(), total);
  run_strategy(cx, Variant::of(VariantId::V1a), model, cx.index("plans", 200), horizon,
               [&](std::uint64_t s) { return random_plan(horizon, max_len, s); },
               [&](const CyclePlan&) { return st; }, "tail-sum m=" + std::to_string(st.descriptor.m));
  cx.r.summary = "tail-sum strategy, total " + total.str() + ", cutoff m = " + std::to_string(st.descriptor.m);
}

void rearranged_strategy(Ctx& cx) {
  const auto model = cx.model("geometric");
  const Index support = cx.index("support", 8), horizon = cx.index("horizon", 500), max_len = cx.index("max_len", 10);
  std::mt19937_64 rng(derive_seed(cx.seed, 77));
  std::vector<Index> table(support);
  std::iota(table.begin(), table.end(), Index{1});
  std::shuffle(table.begin(), table.end(), rng);
  const auto delta = Relabeling::from_table(table);
  const auto st = build_tail_sum_strategy(model, delta, cx.rat("total", Rat(1)));
  run_strategy(cx, Variant::of(VariantId::V1a), model, cx.index("plans", 100), horizon,
               [&](std::uint64_t s) { return random_plan(horizon, max_len, s); },
               [&](const CyclePlan&) { return st; }, "rearranged");
  cx.r.summary = "tail-sum strategy in relabeled order (" + list(table) + "), m = " + std::to_string(st.descriptor.m);
}

void divergence_witness_check(Ctx& cx) {
  const auto model = cx.model("geometric");
  const Rat target = cx.rat("target", Rat(5));
  const auto w = divergence_witness(model, target, cx.index("horizon", kDefaultSearchHorizon));
  const Rat exact = weighted_partial_sum(model, w.delta, w.m);
  cx.r.checked = w.m;
  if (!(w.lower_bound > target)) cx.fail("lower bound " + w.lower_bound.str() + " does not exceed " + target.str());
  if (exact < w.lower_bound) cx.fail("exact sum " + exact.str() + " below the claimed bound");
  if (!(exact > target)) cx.fail("exact sum " + exact.str() + " does not exceed " + target.str());
  cx.r.summary = "relabeling through m = " + std::to_string(w.m) + " reaches about " +
                 std::to_string(exact.to_double()) + " > " + target.str();
}

void identity_minimality(Ctx& cx) {
  const Index m = cx.index("m", 6);
  const auto res = brute_force_min(PriceModel::inverse_square(), m, cx.jobs);
  std::vector<Index> id(m);
  std::iota(id.begin(), id.end(), Index{1});
  Index perms = 1;
  for (Index i = 2; i <= m; ++i) perms *= i;
  cx.r.checked = perms;
  if (res.value != harmonic_number(m)) cx.fail("minimum " + res.value.str() + " != H_m " + harmonic_number(m).str());
  if (res.perm != id) cx.fail("minimizer " + cycle_notation(res.perm) + " is not the identity");
  cx.r.summary = "exhaustive over " + std::to_string(perms) + " permutations: minimum " + res.value.str() + " at identity";
}

void good_index(Ctx& cx) {
  const auto model = cx.model("inverse-square");
  const std::size_t n = cx.index("allocations", 5), cycles = cx.index("cycles", 40);
  const Index probe = cx.index("probe", 200);
  for (std::size_t i = 0; i < n; ++i) {
    const auto alloc = random_allocation(derive_seed(cx.seed, i));
    run_adversary(cx, Variant::of(VariantId::V1a), model, alloc, "good-index", cycles);
    // Zero fill adds 1 in total when there are zeros and never lowers an amount.
    const auto filled = zero_filled(alloc);
    const Rat bound = *alloc.total().value + Rat(1);
    const Rat& ft = *filled.total().value;
    if (ft != bound && ft != *alloc.total().value) cx.fail(alloc.name() + ": zero-filled total " + ft.str());
    Rat sum;
    for (Index j = 1; j <= probe; ++j) {
      if (filled.amount(j) < alloc.amount(j)) cx.fail(alloc.name() + ": zero fill lowered index " + std::to_string(j));
      sum += filled.amount(j);
    }
    if (sum > bound) cx.fail(alloc.name() + ": filled prefix sum exceeds " + bound.str());
  }
  cx.r.summary = std::to_string(n) + " allocations, " + std::to_string(cycles) + " cycles each";
}

void existence_criterion(Ctx& cx) {
  const auto geo = PriceModel::geometric(Rat(1, 2));
  const auto sq = PriceModel::inverse_square();
  const auto exists = decide_existence(geo);
  if (exists.value != Existence::Exists) cx.fail("geometric: " + std::string(to_string(exists.value)));
  const auto st = build_tail_sum_strategy(geo, Relabeling::identity(), Rat(1));
  run_strategy(cx, Variant::of(VariantId::V1a), geo, cx.index("plans", 20), 300,
               [&](std::uint64_t s) { return random_plan(300, 10, s); }, [&](const CyclePlan&) { return st; },
               "geometric builder");
  const auto none = decide_existence(sq);
  if (none.value != Existence::NotExists) cx.fail("inverse-square: " + std::string(to_string(none.value)));
  run_adversary(cx, Variant::of(VariantId::V1a), sq, random_allocation(derive_seed(cx.seed, 5)), "good-index",
                cx.index("cycles", 20));
  const auto harm = decide_existence(PriceModel::harmonic());
  if (harm.value != Existence::NotExists) cx.fail("harmonic: " + std::string(to_string(harm.value)));
  cx.r.summary = "geometric Exists (builder confirmed), inverse-square and harmonic NotExists (adversary confirmed)";
}

void descending_reduction(Ctx& cx) {
  const Index m = cx.index("m", 7);
  const std::size_t prefixes = cx.index("prefixes", 20);
  auto take = [&](const PriceModel& model, const std::string& label) {
    for (Index k = 1; k <= m; ++k) {
      const auto t = descending_partial_dominance(model, cx.index("trials", 1000), k, cx.seed);
      cx.r.checked += t.checked;
      if (!t.pass) cx.fail(label + " at m = " + std::to_string(k) + ": " + t.failures.front());
    }
  };
  take(PriceModel::inverse_square(), "inverse-square");
  std::mt19937_64 rng(derive_seed(cx.seed, 3));
  for (std::size_t i = 0; i < prefixes; ++i) {
    std::vector<std::pair<Index, Rat>> prefix;
    for (Index j = 1; j <= m; ++j) prefix.emplace_back(j, Rat(BigInt(1 + uniform_below(rng, 100)), BigInt(128)));
    TailRule zero;
    zero.from = m + 1;
    take(PriceModel::custom(prefix, zero), "prefix " + std::to_string(i));
  }
  cx.r.summary = "descending order minimal at every m' <= " + std::to_string(m) + " on inverse-square and " +
                 std::to_string(prefixes) + " random prefixes";
}

std::vector<PriceModel> zero_patterned_models() {
  std::vector<std::pair<Index, Rat>> thirds, finite;
  for (Index i = 1; i <= 12; ++i) thirds.emplace_back(i, i % 3 == 0 ? Rat() : Rat::pow2_inverse(static_cast<unsigned>(i)));
  TailRule geo;
  geo.kind = TailRule::Kind::Geometric;
  geo.from = 13;
  geo.ratio = Rat(1, 2);
  for (Index i = 1; i <= 4; ++i) finite.emplace_back(i, i == 2 ? Rat() : Rat(BigInt(1), BigInt(i + 1)));
  TailRule zero;
  zero.from = 5;
  return {PriceModel::geometric(Rat(1, 2)).even_embedding(), PriceModel::custom(thirds, geo),
          PriceModel::custom(finite, zero)};
}

void zero_omission(Ctx& cx) {
  const Index m = cx.index("m", 6);
  for (const auto& model : zero_patterned_models()) {
    const auto t = check_zero_omission(model, m);
    cx.r.checked += t.checked;
    for (const auto& f : t.failures) cx.fail(model.name() + ": " + f);
    if (!t.pass && t.failures.empty()) cx.fail(model.name() + ": check failed");
  }
  cx.r.summary = "three zero-patterned models, all permutations at m = " + std::to_string(m);
}

void bounded_length_v1a(Ctx& cx) {
  const auto model = cx.model("inverse-square");
  const Index k = cx.index("k", 3), horizon = cx.index("horizon", 300);
  const auto st = build_bounded_length_strategy(model, k, cx.rat("total", Rat(1)));
  run_strategy(cx, Variant::of(VariantId::V1a), model, cx.index("plans", 200), horizon,
               [&](std::uint64_t s) { return random_plan(horizon, k, s); }, [&](const CyclePlan&) { return st; },
               "bounded-length");
  cx.r.summary = "cycles of length <= " + std::to_string(k) + ", cutoff m = " + std::to_string(st.descriptor.m);
}

void v1b_no_strategy(Ctx& cx) {
  const auto model = cx.model("geometric");
  const std::size_t cycles = cx.index("cycles", 2);
  for (const auto& alloc : allocations(cx, cx.p.value("alloc", std::string("random")), cx.index("allocations", 5))) {
    run_adversary(cx, Variant::of(VariantId::V1b), model, alloc, "v1b-ceiling", cycles);
  }
  cx.r.summary = "ceiling blocks, " + std::to_string(cycles) + " per allocation";
}

void bounded_diameter_v1b(Ctx& cx) {
  const auto model = cx.model("geometric");
  const Index d = cx.index("d", 2), horizon = cx.index("horizon", 200);
  const auto st = build_bounded_diameter_strategy(model, d, Relabeling::identity(), cx.rat("total", Rat(1)));
  run_strategy(cx, Variant::of(VariantId::V1b), model, cx.index("plans", 200), horizon,
               [&](std::uint64_t s) { return random_plan_bounded_diameter(horizon, d, d + 1, s); },
               [&](const CyclePlan&) { return st; }, "bounded-diameter");
  cx.r.summary = "diameter <= " + std::to_string(d) + ", every prisoner above " + std::to_string(st.descriptor.m + d);
}

void two_cycle_v1b(Ctx& cx) {
  const auto model = cx.model("geometric");
  const std::size_t cycles = cx.index("cycles", 100);
  for (const auto& alloc : allocations(cx, cx.p.value("alloc", std::string("baseline")), cx.index("allocations", 5))) {
    run_adversary(cx, Variant::of(VariantId::V1b), model, alloc, "two-cycle", cycles);
  }
  cx.r.summary = std::to_string(cycles) + " two-cycles per allocation, each with a failing member";
}

void open_boxes_v1c(Ctx& cx) {
  const auto model = cx.model("geometric");
  const Index k = cx.index("k", 3), horizon = cx.index("horizon", 200);
  const auto st = build_open_boxes_strategy(model, k, cx.rat("total", Rat(1)));
  const auto variant = Variant::of(VariantId::V1c);
  std::size_t confirmed = 0;
  for (std::size_t i = 0; i < cx.index("plans", 200); ++i) {
    const auto plan = random_plan(horizon, k, derive_seed(cx.seed, i));
    auto rep = simulate(variant, model, st.alloc, plan, horizon);
    const Verdict v = evaluate_release(variant, rep, st.descriptor);
    ++cx.r.checked;
    if (v == Verdict::CounterexampleFound) cx.fail("plan " + std::to_string(i) + ": " + list(rep.witnesses));
    if (v == Verdict::PatternConfirmed) ++confirmed;
    // Later members of a claimed cycle read their label for free.
    for (const auto& c : rep.cycles) {
      if (c.min() < st.descriptor.m) continue;
      for (Index n : c.members()) {
        if (n == c.min()) continue;
        const auto* o = rep.find(n);
        if (!o || !o->success || !o->spent || !o->spent->is_zero()) {
          cx.fail("plan " + std::to_string(i) + ": later member " + std::to_string(n) + " paid or failed");
        }
      }
    }
  }
  if (confirmed == 0) cx.fail("no plan exercised the claimed pattern");
  cx.r.summary = "ascending entry, cycles of length <= " + std::to_string(k) + ", m = " + std::to_string(st.descriptor.m);
}

void v1d_no_strategy(Ctx& cx) {
  const auto model = cx.model("inverse-square");
  const std::size_t cycles = cx.index("cycles", 4);
  for (const auto& alloc : allocations(cx, cx.p.value("alloc", std::string("random")), cx.index("allocations", 5))) {
    run_adversary(cx, Variant::of(VariantId::V1d), model, alloc, "v1d-chooser", cycles);
  }
  cx.r.summary = "chooser blocks, " + std::to_string(cycles) + " per allocation";
}

void v1d_bounded(Ctx& cx) {
  const auto model = cx.model("geometric");
  const Index k = cx.index("k", 3), horizon = cx.index("horizon", 300);
  const Rat total = cx.rat("total", Rat(1));
  const auto st0 = build_cycle_informed_strategy(model, random_plan(horizon, k, cx.seed), k, total);
  run_strategy(cx, Variant::of(VariantId::V1d), model, cx.index("plans", 200), horizon,
               [&](std::uint64_t s) { return random_plan(horizon, k, s); },
               [&](const CyclePlan& plan) { return build_cycle_informed_strategy(model, plan, k, total); },
               "cycle-informed");
  cx.r.summary = "cycle sets disclosed, length <= " + std::to_string(k) + ", m = " + std::to_string(st0.descriptor.m);
}

void v2a_strategies(Ctx& cx) {
  const auto model = PriceModel::harmonic();
  const Index horizon = cx.index("horizon", 500), max_len = cx.index("max_len", 10);
  const std::size_t plans = cx.index("plans", 50), blocks = cx.index("blocks", 4);
  const auto variant = Variant::of(VariantId::V2a);
  for (const auto& kind : {V2Kind::harmonic_prefix(), V2Kind::shifted(5)}) {
    const auto st = build_v2_strategy(kind);
    run_strategy(cx, variant, model, plans, horizon, [&](std::uint64_t s) { return random_plan(horizon, max_len, s); },
                 [&](const CyclePlan&) { return st; }, st.alloc.name());
  }
  for (const auto& kind : {V2Kind::constant1(), V2Kind::scaled(Rat(1, 2))}) {
    run_adversary(cx, variant, model, build_v2_strategy(kind).alloc, "v2a-block", blocks);
  }
  const Index gap = scaled_harmonic_gap(2, Rat(1, 2));
  if (gap != 4) cx.fail("scaled gap (2, 1/2) = " + std::to_string(gap));
  cx.r.summary = "HarmonicPrefix and Shifted(5) confirmed on " + std::to_string(plans) + " plans; Constant1 and " +
                 "Scaled(1/2) defeated on " + std::to_string(blocks) + " blocks";
}

void scaled_gap(Ctx& cx) {
  const Index k = cx.index("k", 2);
  const Rat c = cx.rat("c", Rat(1, 2));
  const Index n = scaled_harmonic_gap(k, c);
  auto holds = [&](Index j) { return c * harmonic_number(j) < harmonic_number(j) - harmonic_number(k - 1); };
  cx.r.checked = n - k + 1;
  if (!holds(n)) cx.fail("c H_n < H(k,n) fails at n = " + std::to_string(n));
  for (Index j = k; j < n; ++j) {
    if (holds(j)) cx.fail("smaller gap at n = " + std::to_string(j));
  }
  if (cx.p.contains("expect") && n != cx.index("expect", 0)) cx.fail("expected " + std::to_string(cx.index("expect", 0)));
  cx.r.summary = "least n >= " + std::to_string(k) + " with " + c.str() + " H_n < H(" + std::to_string(k) + ",n) is " +
                 std::to_string(n);
}

void v2b_no_strategy(Ctx& cx) {
  const std::size_t cycles = cx.index("cycles", 10);
  const auto variant = Variant::of(VariantId::V2b);
  for (const auto& alloc :
       allocations(cx, cx.p.value("alloc", std::string("constant1")), cx.index("allocations", 10))) {
    run_adversary(cx, variant, PriceModel::harmonic(), alloc, "v2b-block", cycles);
  }
  cx.r.summary = std::to_string(cycles) + " blocks per allocation, first member fails";
}

const std::vector<std::pair<std::string, void (*)(Ctx&)>>& registry() {
  static const std::vector<std::pair<std::string, void (*)(Ctx&)>> r = {
      {"tail-sum-strategy", tail_sum_strategy},
      {"rearranged-strategy", rearranged_strategy},
      {"divergence-witness", divergence_witness_check},
      {"identity-minimality", identity_minimality},
      {"good-index-adversary", good_index},
      {"existence-criterion", existence_criterion},
      {"descending-reduction", descending_reduction},
      {"zero-omission", zero_omission},
      {"bounded-length-v1a", bounded_length_v1a},
      {"v1b-no-strategy", v1b_no_strategy},
      {"bounded-diameter-v1b", bounded_diameter_v1b},
      {"two-cycle-v1b", two_cycle_v1b},
      {"open-boxes-v1c", open_boxes_v1c},
      {"v1d-no-strategy", v1d_no_strategy},
      {"v1d-bounded", v1d_bounded},
      {"v2a-strategies", v2a_strategies},
      {"scaled-gap", scaled_gap},
      {"v2b-no-strategy", v2b_no_strategy},
  };
  return r;
}

}  // namespace

nlohmann::json VerificationReport::to_json() const {
  return {{"id", id},         {"pass", pass},     {"summary", summary}, {"checked", checked},
          {"witnesses", witnesses}, {"params", params}, {"seed", seed}};
}

const std::vector<std::string>& verify_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [id, fn] : registry()) v.push_back(id);
    return v;
  }();
  return ids;
}

VerificationReport verify_theorem(const std::string& id, const nlohmann::json& raw, std::uint64_t seed, unsigned jobs) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == id; });
  if (it == reg.end()) throw DomainError("unknown verification id '" + id + "'");
  const nlohmann::json params = raw.is_null() ? nlohmann::json::object() : raw;
  if (!params.is_object()) throw DomainError("verification parameters must be a JSON object");
  VerificationReport r;
  r.id = id;
  r.pass = true;
  r.params = params;
  r.seed = seed;
  Ctx cx{params, seed, jobs, r};
  it->second(cx);
  return r;
}

AllocationPlan random_allocation(std::uint64_t seed, const Rat& total) {
  std::mt19937_64 rng(seed);
  const Index len = 1 + uniform_below(rng, 8);
  std::vector<Index> w(len);
  Index sum = 0;
  for (auto& x : w) sum += (x = uniform_below(rng, 5));
  const Rat share = sum == 0 ? Rat() : total / Rat(2);
  std::vector<std::pair<Index, Rat>> prefix;
  for (Index i = 0; i < len; ++i) prefix.emplace_back(i + 1, sum == 0 ? Rat() : share * Rat(BigInt(w[i]), BigInt(sum)));
  static const Rat ratios[] = {Rat(1, 2), Rat(1, 3), Rat(2, 3), Rat(3, 4)};
  TailRule tail;
  tail.kind = TailRule::Kind::Geometric;
  tail.from = len + 1;
  tail.ratio = ratios[uniform_below(rng, 4)];
  // scale * sum_{n > len} r^n = scale * r^(len+1) / (1 - r) = total - share
  tail.scale = (total - share) * (Rat(1) - tail.ratio) / tail.ratio.pow(static_cast<unsigned>(len + 1));
  return AllocationPlan::custom(std::move(prefix), tail, "random#" + std::to_string(seed));
}

}  // namespace prisoners
