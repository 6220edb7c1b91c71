// One line per acceptance criterion. Arithmetic is exact, so every numeric
// tolerance is zero; the only pinned limits are the time budgets below.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "prisoners/analyzer.hpp"
#include "prisoners/engine.hpp"
#include "prisoners/verify.hpp"

using namespace prisoners;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr unsigned kJobs = 4;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail.clear();
    if (!detail.empty()) detail += "; ";
    if (pass || detail.size() < 400) detail += what;
    pass = false;
  }
  void note(const std::string& what) {
    if (pass) detail += (detail.empty() ? "" : "; ") + what;
  }
};

void verified(Outcome& o, const std::string& id, const json& params) {
  const auto r = verify_theorem(id, params, kSeed, kJobs);
  if (r.pass) {
    o.note(id + ": " + r.summary);
    return;
  }
  o.require(false, id + ": " + r.witnesses.front() +
                       (r.witnesses.size() > 1 ? " (+" + std::to_string(r.witnesses.size() - 1) + " more)" : ""));
}

Outcome baseline_pattern() {
  Outcome o;
  const auto model = PriceModel::geometric(Rat(1, 2));
  const auto s = build_baseline_geometric();
  const auto v = Variant::of(VariantId::V1a);
  o.require(s.descriptor.pattern.kind == PatternKind::LeastMemberFrom && s.descriptor.pattern.threshold == 2,
            "baseline claims the wrong pattern");
  std::size_t claimed = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto plan = random_plan(1000, 20, derive_seed(kSeed, i));
    auto r = simulate(v, model, s.alloc, plan, 1000, std::nullopt, {kJobs});
    o.require(evaluate_release(v, r, s.descriptor) == Verdict::PatternConfirmed,
              "plan " + std::to_string(i) + " not confirmed");
    for (const auto& c : r.cycles) {
      if (c.min() < 2) continue;
      ++claimed;
      o.require(r.succeeded(c.min()), "least member " + std::to_string(c.min()) + " failed");
    }
  }
  o.note("200 plans, " + std::to_string(claimed) + " least members succeeded");
  return o;
}

Outcome tail_sum() {
  Outcome o;
  const auto g = PriceModel::geometric(Rat(1, 2));
  const Index m1 = build_tail_sum_strategy(g, Relabeling::identity(), Rat(1)).descriptor.m;
  const Index m4 = build_tail_sum_strategy(g, Relabeling::identity(), Rat(1, 4)).descriptor.m;
  o.require(m1 == 3, "cutoff for total 1 is " + std::to_string(m1));
  o.require(m4 > m1, "cutoff for total 1/4 is " + std::to_string(m4));
  verified(o, "tail-sum-strategy", {{"total", "1"}});
  verified(o, "tail-sum-strategy", {{"total", "1/4"}});
  return o;
}

Outcome identity_minimality() {
  Outcome o;
  const Rat expected(BigInt(363), BigInt(140));
  const auto sq = PriceModel::inverse_square();
  // Plain exhaustive oracle, independent of the analyzer's scan.
  std::vector<Index> perm(7);
  std::iota(perm.begin(), perm.end(), Index{1});
  std::optional<Rat> best;
  std::size_t count = 0;
  do {
    Rat s;
    for (Index n = 1; n <= 7; ++n) s += Rat(n) / Rat(perm[n - 1] * perm[n - 1]);
    if (!best || s < *best) best = s;
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  o.require(count == 5040 && *best == expected, "oracle minimum " + best->str());
  const auto r = brute_force_min(sq, 7, kJobs);
  std::vector<Index> id(7);
  std::iota(id.begin(), id.end(), Index{1});
  o.require(r.value == expected, "minimum " + r.value.str());
  o.require(r.perm == id, "minimizer " + cycle_notation(r.perm));
  o.note("5040 permutations, minimum " + r.value.str() + " at the identity");
  return o;
}

Outcome dominance() {
  Outcome o;
  verified(o, "descending-reduction", {{"m", 7}, {"prefixes", 20}});
  return o;
}

Outcome good_index() {
  Outcome o;
  verified(o, "good-index-adversary", {{"model", "inverse-square"}, {"allocations", 20}, {"cycles", 40}});
  return o;
}

Outcome v1b_impossibility() {
  Outcome o;
  verified(o, "v1b-no-strategy", {{"model", "geometric"}, {"alloc", "random"}, {"allocations", 20}, {"cycles", 100}});
  verified(o, "two-cycle-v1b", {{"model", "geometric"}, {"alloc", "random"}, {"allocations", 20}, {"cycles", 100}});
  return o;
}

Outcome bounded_length() {
  Outcome o;
  verified(o, "bounded-length-v1a", {{"k", 3}, {"plans", 200}});
  verified(o, "v1d-bounded", {{"k", 3}, {"plans", 200}});
  verified(o, "open-boxes-v1c", {{"k", 3}, {"plans", 200}});
  return o;
}

Outcome bounded_diameter() {
  Outcome o;
  verified(o, "bounded-diameter-v1b", {{"model", "geometric"}, {"d", 2}, {"plans", 200}});
  return o;
}

Outcome v2a() {
  Outcome o;
  verified(o, "v2a-strategies", {{"plans", 200}, {"horizon", 3000}, {"blocks", 50}});
  o.require(scaled_harmonic_gap(2, Rat(1, 2)) == 4, "scaled gap (2, 1/2) != 4");
  return o;
}

Outcome v2b() {
  Outcome o;
  verified(o, "v2b-no-strategy", {{"alloc", "constant1"}, {"cycles", 30}});
  verified(o, "v2b-no-strategy", {{"alloc", "harmonic-prefix"}, {"cycles", 30}});
  verified(o, "v2b-no-strategy", {{"alloc", "random"}, {"allocations", 10}, {"cycles", 30}});
  return o;
}

Outcome equivariance() {
  Outcome o;
  const auto v = Variant::of(VariantId::V1a);
  constexpr Index kH = 40;
  std::mt19937_64 rng(kSeed);
  const Rat ratios[] = {Rat(1, 2), Rat(1, 3), Rat(2, 3)};
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto model = PriceModel::geometric(ratios[uniform_below(rng, 3)]);
    const auto alloc = random_allocation(derive_seed(kSeed, 500 + i));
    const auto plan = random_plan(kH, 1 + uniform_below(rng, 6), derive_seed(kSeed, i));
    std::vector<Index> table(kH);
    std::iota(table.begin(), table.end(), Index{1});
    std::shuffle(table.begin(), table.end(), rng);
    const auto delta = Relabeling::from_table(table);
    const Rat factor(BigInt(1 + uniform_below(rng, 9)), BigInt(1 + uniform_below(rng, 9)));

    const auto base = simulate(v, model, alloc, plan, kH);
    const auto moved = simulate(v, model.relabeled(delta.inverse()), alloc.relabeled(delta.inverse()),
                                conjugate(plan, delta), kH);
    const auto scaled = simulate(v, model.scaled(factor), alloc.scaled(factor), plan, kH);
    for (const auto& b : base.outcomes) {
      const auto* m = moved.find(delta(b.prisoner));
      const auto* s = scaled.find(b.prisoner);
      std::vector<Index> mapped;
      for (Index x : b.opened) mapped.push_back(delta(x));
      const bool same_move = m && m->success == b.success && m->spent == b.spent && m->opened == mapped;
      const bool same_scale = s && s->success == b.success && s->opened == b.opened && s->spent && b.spent &&
                              *s->spent == *b.spent * factor;
      o.require(same_move, "scenario " + std::to_string(i) + ": prisoner " + std::to_string(b.prisoner) +
                               " changes under relabeling");
      o.require(same_scale, "scenario " + std::to_string(i) + ": prisoner " + std::to_string(b.prisoner) +
                                " changes under scaling");
    }
  }
  o.note("100 scenarios: outcomes map through delta and scale exactly");
  return o;
}

Outcome zero_omission() {
  Outcome o;
  verified(o, "zero-omission", {{"m", 6}});
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "baseline pattern", 10, baseline_pattern},
      {2, "tail-sum strategy", 10, tail_sum},
      {3, "identity minimality", 5, identity_minimality},
      {4, "descending dominance", 10, dominance},
      {5, "good-index adversary", 30, good_index},
      {6, "V1b impossibility and two-cycle adversary", 20, v1b_impossibility},
      {7, "bounded-length strategies", 20, bounded_length},
      {8, "bounded-diameter V1b strategy", 10, bounded_diameter},
      {9, "V2a strategies", 60, v2a},
      {10, "V2b impossibility", 30, v2b},
      {11, "equivariance and scaling", 10, equivariance},
      {12, "zero omission", 10, zero_omission},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("error: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(s <= c.budget_s, "over the time budget");
    if (!o.pass) ++failed;
    std::printf("%s %2d %s (%.2fs of %.0fs): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, s, c.budget_s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
