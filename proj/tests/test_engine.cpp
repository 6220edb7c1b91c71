#include <random>

#include "doctest.h"
#include "prisoners/engine.hpp"

using namespace prisoners;

namespace {

Rat R(long n, long d = 1) { return Rat(BigInt(n), BigInt(d)); }

const Variant V1a = Variant::of(VariantId::V1a);
const Variant V1b = Variant::of(VariantId::V1b);
const Variant V1c = Variant::of(VariantId::V1c);
const Variant V2a = Variant::of(VariantId::V2a);

std::vector<Index> successes(const SimulationReport& r) {
  std::vector<Index> out;
  for (const auto& o : r.outcomes) {
    if (o.success) out.push_back(o.prisoner);
  }
  return out;
}

}  // namespace

TEST_CASE("pointer following") {
  const auto g = PriceModel::geometric(R(1, 2));
  auto plan = CyclePlan::prefix({Cycle({1}), Cycle({2}), Cycle({3, 5, 4})}, 5);
  const auto fixed = run_prisoner(2, R(1, 4), plan, g);
  CHECK(fixed.success);
  CHECK(*fixed.spent == R(1, 4));

  const auto walk = run_prisoner(3, R(1, 4), plan, g);
  CHECK(walk.success);
  CHECK(walk.opened == std::vector<Index>{3, 5, 4});
  CHECK(*walk.spent == R(7, 32));

  const auto broke = run_prisoner(3, R(1, 10), plan, g);
  CHECK_FALSE(broke.success);
  CHECK(broke.opened.empty());
  CHECK(broke.reason == FailureReason::BudgetExhausted);

  // Prisoner 5 starts at box 5 and finds label 5 in box 3.
  const auto five = run_prisoner(5, R(1), plan, g);
  CHECK(five.opened == std::vector<Index>{5, 4, 3});
}

TEST_CASE("closed boxes: success iff budget covers the cycle price") {
  const auto sq = PriceModel::inverse_square();
  std::mt19937_64 rng(7);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 10000; ++seed) {
    auto plan = random_plan(40, 6, seed);
    for (const auto& c : plan.cycles()) {
      Rat price;
      for (Index i : c.members()) price += sq.term(i);
      // Budgets around the price, including the exact boundary.
      const Rat budget = price * R(static_cast<long>(uniform_below(rng, 5)) + 8, 10);
      for (const Rat& b : {budget, price}) {
        const auto o = run_prisoner(c.members().front(), b, plan, sq);
        CHECK(o.success == !(b < price));
        CHECK(!(b < *o.spent));
        ++checked;
      }
    }
  }
}

TEST_CASE("V1a baseline on a small plan") {
  const auto g = PriceModel::geometric(R(1, 2));
  const auto s = build_baseline_geometric();
  auto plan = CyclePlan::prefix({Cycle({1}), Cycle({2, 3}), Cycle({4, 5, 6})}, 6);
  auto r = simulate(V1a, g, s.alloc, plan, 6);
  CHECK_FALSE(r.succeeded(1));
  CHECK(r.succeeded(2));
  CHECK(r.succeeded(4));
  CHECK(evaluate_release(V1a, r, s.descriptor) == Verdict::PatternConfirmed);
  const auto j = r.to_json();
  CHECK(j["variant"] == "V1a");
  CHECK(j["outcomes"][1]["spent"] == "3/8");
  CHECK(j["verdict"] == "PatternConfirmed");
}

TEST_CASE("baseline pattern on 500 random plans") {
  const auto g = PriceModel::geometric(R(1, 2));
  const auto s = build_baseline_geometric();
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    auto plan = random_plan(60, 8, derive_seed(11, seed));
    auto r = simulate(V1a, g, s.alloc, plan, 60);
    CHECK(evaluate_release(V1a, r, s.descriptor) == Verdict::PatternConfirmed);
  }
}

TEST_CASE("a broken claim yields witnesses") {
  const auto g = PriceModel::geometric(R(1, 2));
  auto s = build_baseline_geometric();
  s.descriptor.pattern.kind = PatternKind::AllMembersWhollyAbove;
  auto plan = CyclePlan::prefix({Cycle({1}), Cycle({2, 3})}, 3);
  auto r = simulate(V1a, g, s.alloc, plan, 3);
  CHECK(evaluate_release(V1a, r, s.descriptor) == Verdict::CounterexampleFound);
  CHECK(r.witnesses == std::vector<Index>{3});

  s.descriptor.pattern.kind = PatternKind::None;
  CHECK(evaluate_release(V1a, r, s.descriptor) == Verdict::Inconclusive);
  CHECK_THROWS_AS(evaluate_release(V1b, r, s.descriptor), ContractViolation);
  CHECK_THROWS_AS(simulate(V1a, g, s.alloc, plan, 3, std::vector<Index>{1, 2, 3}), ContractViolation);

  auto empty = CyclePlan::materialized({});
  auto e = simulate(V1b, g, s.alloc, empty, 10);
  CHECK(evaluate_release(V1b, e, ClaimKind::FailurePerCycle) == Verdict::Inconclusive);

  // A failure pattern that does not hold is reported with the prisoners breaking it.
  auto rb = simulate(V1b, g, s.alloc, plan, 3);
  CHECK(evaluate_release(V1b, rb, ClaimKind::FirstMemberFails) == Verdict::Inconclusive);
  CHECK(rb.witnesses == std::vector<Index>{2});
}

TEST_CASE("V1c: later members read the open cycle") {
  const auto g = PriceModel::geometric(R(1, 2));
  const auto s = build_open_boxes_strategy(g, 3, R(1));
  auto plan = CyclePlan::prefix({Cycle({1, 2}), Cycle({3, 5, 4}), Cycle({6, 8}), Cycle({7})}, 8);
  auto r = simulate(V1c, g, s.alloc, plan, 8);
  CHECK(evaluate_release(V1c, r, s.descriptor) == Verdict::PatternConfirmed);
  for (Index i : {4, 5, 8}) {
    CHECK(r.succeeded(i));
    CHECK(*r.find(i)->spent == R(0));
    CHECK(r.find(i)->opened.empty());
  }

  CHECK_THROWS_AS(simulate(V1c, g, s.alloc, plan, 8, std::vector<Index>{1, 2}), ContractViolation);
}

TEST_CASE("V1c: success sets only grow with more entrants ahead") {
  const auto g = PriceModel::geometric(R(1, 3));
  const auto s = build_open_boxes_strategy(g, 4, R(1, 2));
  SimulateOptions walk;
  walk.stop_when_visible = false;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto plan = random_plan(30, 4, seed);
    std::vector<Index> order(30);
    for (Index i = 0; i < 30; ++i) order[i] = i + 1;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto base = simulate(V1c, g, s.alloc, plan, 30, order, walk);
    // Move the last entrant to the front: everyone else gains one entrant ahead.
    auto front = order;
    std::rotate(front.begin(), front.begin() + static_cast<long>(order.size() - 1), front.end());
    auto more = simulate(V1c, g, s.alloc, plan, 30, front, walk);
    for (Index i = 1; i <= 30; ++i) {
      if (i == order.back()) continue;
      if (base.succeeded(i)) CHECK(more.succeeded(i));
    }
  }
}

TEST_CASE("V1c: stopping at a visible label can starve later entrants") {
  // Cycle (6 23 4 15): prisoner 6 entering first lets 15 see its label early,
  // so 15 stops without opening the boxes 15's successors needed.
  const auto g = PriceModel::geometric(R(1, 3));
  const auto s = build_open_boxes_strategy(g, 4, R(1, 2));
  auto plan = random_plan(30, 4, 0);
  std::vector<Index> order(30);
  for (Index i = 0; i < 30; ++i) order[i] = i + 1;
  std::mt19937_64 rng(0);
  std::shuffle(order.begin(), order.end(), rng);
  auto front = order;
  std::rotate(front.begin(), front.begin() + static_cast<long>(order.size() - 1), front.end());
  auto base = simulate(V1c, g, s.alloc, plan, 30, order);
  auto more = simulate(V1c, g, s.alloc, plan, 30, front);
  bool lost = false;
  for (Index i = 1; i <= 30; ++i) lost = lost || (i != order.back() && base.succeeded(i) && !more.succeeded(i));
  CHECK(lost);
}

TEST_CASE("V2a harmonic prefix: the last member of every cycle succeeds") {
  const auto s = build_v2_strategy(V2Kind::harmonic_prefix());
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto plan = random_plan(80, 7, seed);
    auto r = simulate(V2a, PriceModel::harmonic(), s.alloc, plan, 80);
    for (const auto& c : r.cycles) CHECK(r.succeeded(c.max()));
    CHECK(evaluate_release(V2a, r, s.descriptor) == Verdict::PatternConfirmed);
  }
}

TEST_CASE("long cycles use certified brackets") {
  // Constant 1 against harmonic blocks: every member fails.
  const auto s = build_v2_strategy(V2Kind::constant1());
  auto adv = make_adversary("v2a-block", PriceModel::harmonic(), s.alloc);
  adv.plan.pull(9);
  const Index horizon = adv.plan.cycles().back().max();
  CHECK(adv.plan.cycles().back().length() > 4096);
  auto r = simulate(V2a, PriceModel::harmonic(), s.alloc, adv.plan, horizon, std::nullopt, {4, 256});
  CHECK(r.success_count == 0);
  CHECK(evaluate_release(V2a, r, adv.claim) == Verdict::CounterexampleFound);
  CHECK(r.witnesses.size() == r.cycles.size());

  // Harmonic-prefix amounts past the exact range against long blocks.
  const auto hp = build_v2_strategy(V2Kind::harmonic_prefix());
  std::vector<Index> members;
  for (Index i = 5000; i < 15000; ++i) members.push_back(i);
  auto one = CyclePlan::materialized({Cycle(members)});
  auto hr = simulate(V2a, PriceModel::harmonic(), hp.alloc, one, 20000);
  // a_n = H_n >= H(5000, 14999) ~ 1.1 for every member.
  CHECK(hr.success_count == members.size());
}

TEST_CASE("conjugation equivariance and scale invariance") {
  const auto g = PriceModel::geometric(R(1, 2));
  const auto s = build_baseline_geometric();
  const auto delta = Relabeling::from_table({3, 1, 2, 5, 4, 7, 6});
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto plan = random_plan(20, 5, seed);
    auto r = simulate(V1a, g, s.alloc, plan, 20);
    auto moved = conjugate(plan, delta);
    auto rc = simulate(V1a, g.relabeled(delta.inverse()), s.alloc.relabeled(delta.inverse()), moved, 20);
    for (Index i = 1; i <= 20; ++i) CHECK(r.succeeded(i) == rc.succeeded(delta(i)));

    auto rs = simulate(V1a, g.scaled(R(7, 3)), s.alloc.scaled(R(7, 3)), plan, 20);
    CHECK(successes(r) == successes(rs));
  }
}

TEST_CASE("reports are deterministic across job counts") {
  const auto sq = PriceModel::inverse_square();
  const auto s = build_bounded_length_strategy(sq, 3, R(1));
  auto plan = random_plan(300, 3, 99);
  auto a = simulate(V1a, sq, s.alloc, plan, 300, std::nullopt, {1, 256});
  auto b = simulate(V1a, sq, s.alloc, plan, 300, std::nullopt, {4, 256});
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(evaluate_release(V1a, a, s.descriptor) == Verdict::PatternConfirmed);
}

TEST_CASE("cycles past the horizon are not scored") {
  const auto g = PriceModel::geometric(R(1, 2));
  const auto s = build_baseline_geometric();
  auto plan = CyclePlan::prefix({Cycle({1, 2}), Cycle({3, 9}), Cycle({4}), Cycle({5}), Cycle({6}), Cycle({7}),
                                 Cycle({8})},
                                9);
  auto r = simulate(V1a, g, s.alloc, plan, 5);
  REQUIRE(r.find(3) != nullptr);
  CHECK(r.find(3)->reason == FailureReason::NotSimulated);
  CHECK(r.find(9) == nullptr);
  CHECK(r.find(5)->success);
}

TEST_CASE("good-index adversary defeats random allocations") {
  const auto sq = PriceModel::inverse_square();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<Index, Rat>> prefix;
    Rat used;
    for (Index i = 1; i <= 6; ++i) {
      const Rat a = R(static_cast<long>(uniform_below(rng, 4)), 32);
      prefix.emplace_back(i, a);
      used += a;
    }
    TailRule t;
    t.kind = TailRule::Kind::Geometric;
    t.ratio = R(1, 2);
    t.from = 7;
    t.scale = (R(1) - used) * R(64);  // tail sums to 1 - used
    const auto alloc = AllocationPlan::custom(prefix, t);
    auto adv = make_adversary("good-index", sq, alloc);
    adv.plan.pull(40);
    Index top = 0;
    for (const auto& c : adv.plan.cycles()) top = std::max(top, c.max());
    auto r = simulate(V1a, sq, alloc, adv.plan, top);
    CHECK(evaluate_release(V1a, r, adv.claim) == Verdict::CounterexampleFound);
    CHECK_FALSE(r.witnesses.empty());
  }
}
