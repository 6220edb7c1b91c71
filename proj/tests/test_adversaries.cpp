#include "doctest.h"
#include "prisoners/adversaries.hpp"

using namespace prisoners;

namespace {

Rat R(long n, long d = 1) { return Rat(BigInt(n), BigInt(d)); }

AllocationPlan geometric_alloc() {
  TailRule t;
  t.kind = TailRule::Kind::Geometric;
  t.ratio = R(1, 2);
  t.from = 1;
  return AllocationPlan::custom({}, t, "2^-n");
}

std::vector<Cycle> take(CyclePlan& plan, std::size_t n) {
  plan.pull(n);
  return plan.cycles();
}

std::vector<Index> range(Index a, Index b) {
  std::vector<Index> v;
  for (Index i = a; i <= b; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST_CASE("divergence witness") {
  const auto g = PriceModel::geometric(R(1, 2));
  const auto zero = divergence_witness(g, R(0), 1000);
  CHECK(zero.identity);
  CHECK(zero.m == 1);

  const auto w = divergence_witness(g, R(6), 1 << 20);
  CHECK(w.lower_bound > R(6));
  CHECK(w.m > 1000);
  // Independent recomputation of the weighted partial sum.
  Rat s;
  for (Index n = 1; n <= w.m; ++n) s += Rat(n) * g.term(w.delta(n));
  CHECK(s >= w.lower_bound);
  CHECK(weighted_partial_sum(g, w.delta, w.m) == s);

  TailRule none;
  none.from = 4;
  const auto finite = PriceModel::custom({{1, R(1, 2)}, {2, R(1, 4)}, {3, R(1, 4)}}, none);
  CHECK_THROWS_AS(divergence_witness(finite, R(10), 1000), HorizonError);
}

TEST_CASE("zero fill") {
  std::vector<std::pair<Index, Rat>> prefix{{1, R(1, 2)}, {2, R(0)}, {3, R(1, 2)}};
  TailRule zero;
  zero.from = 4;
  const auto a = AllocationPlan::custom(prefix, zero);
  const auto f = zero_filled(a);
  CHECK(f.amount(1) == R(1, 2));
  CHECK(f.amount(2) == R(1, 2));
  CHECK(f.amount(4) == R(1, 4));
  CHECK(f.amount(5) == R(1, 8));
  CHECK(*f.total().value == R(2));
  // Prefix sums approach 2 from below.
  Rat sum;
  for (Index n = 1; n <= 40; ++n) sum += f.amount(n);
  CHECK(sum < R(2));
  CHECK(R(2) - sum == Rat::pow2_inverse(38));
  CHECK(f.tail_structure().shape == TailShape::NonIncreasingBeyond);

  const auto g = geometric_alloc();
  CHECK(zero_filled(g).amount(3) == R(1, 8));
}

TEST_CASE("good-index adversary") {
  const auto sq = PriceModel::inverse_square();
  auto plan = good_index_adversary(sq, geometric_alloc());
  const auto cycles = take(plan, 8);
  REQUIRE(cycles.size() == 8);
  CHECK(cycles[0].members() == std::vector<Index>{1});
  // Every cycle is priced above its first member's amount, which is the
  // largest amount in it after descending reordering.
  for (const auto& c : cycles) {
    Rat price;
    Rat top;
    for (Index i : c.members()) {
      price += sq.term(i);
      top = max(top, R(1) / Rat(BigInt(1) << static_cast<unsigned>(i)));
    }
    CHECK(price > top);
  }
  CHECK_THROWS_AS(good_index_adversary(PriceModel::geometric(R(1, 2)), geometric_alloc()), CapabilityError);
}

TEST_CASE("v1b ceiling blocks") {
  const auto g = PriceModel::geometric(R(1, 2));
  const auto a = geometric_alloc();
  auto plan = v1b_ceiling_adversary(g, a);
  const auto cycles = take(plan, 2);
  CHECK(cycles[0].members() == range(1, 3));
  CHECK(cycles[1].members() == range(4, 20));

  AdversaryOptions small;
  small.search_horizon = 1000000;
  auto far = v1b_ceiling_adversary(g, a, small);
  CHECK_THROWS_AS(far.pull(3), HorizonError);
}

TEST_CASE("two-cycle adversary") {
  const auto g = PriceModel::geometric(R(1, 2));
  auto plan = two_cycle_adversary(g, geometric_alloc());
  const auto cycles = take(plan, 3);
  CHECK(cycles[0].members() == std::vector<Index>{1, 2});
  CHECK(cycles[1].members() == std::vector<Index>{3, 4});
  for (const auto& c : cycles) {
    CHECK(geometric_alloc().amount(c.members()[1]) < g.term(c.members()[0]));
  }
  // A zero amount is an immediate witness.
  TailRule rest;
  rest.from = 3;
  const auto z = AllocationPlan::custom({{1, R(0)}, {2, R(0)}}, rest);
  auto zp = two_cycle_adversary(g, z);
  CHECK(take(zp, 1)[0].members() == std::vector<Index>{1, 2});
}

TEST_CASE("v1d chooser") {
  auto plan = v1d_cycle_chooser(PriceModel::geometric(R(1, 2)));
  const auto cycles = take(plan, 2);
  CHECK(cycles[0].members() == range(1, 3));
  CHECK(cycles[1].members() == range(4, 20));
  CHECK(cycles[1].members().size() == 17);
}

TEST_CASE("v2a blocks") {
  auto plan = v2a_block_adversary(build_v2_strategy(V2Kind::constant1()).alloc);
  const auto cycles = take(plan, 3);
  CHECK(cycles[0].members() == range(1, 2));
  CHECK(cycles[1].members() == range(3, 7));
  CHECK(harmonic_sum(3, 7) == R(153, 140));
  CHECK(harmonic_sum(3, 6) < R(1));
  // Greedy minimality against exact sums.
  for (const auto& c : cycles) {
    const Index k = c.min(), n = c.max();
    CHECK(harmonic_sum(k, n) > R(1));
    if (n > k) CHECK(!(harmonic_sum(k, n - 1) > R(1)));
  }

  auto scaled = v2a_block_adversary(build_v2_strategy(V2Kind::scaled(R(1, 2))).alloc);
  const auto first = take(scaled, 1)[0];
  CHECK(first.max() == scaled_harmonic_gap(1, R(1, 2)));

  AdversaryOptions opts;
  opts.search_horizon = 5000;
  auto hp = v2a_block_adversary(build_v2_strategy(V2Kind::harmonic_prefix()).alloc, opts);
  CHECK_THROWS_AS(hp.pull(1), HorizonError);
}

TEST_CASE("v2b blocks") {
  auto plan = v2b_block_adversary(build_v2_strategy(V2Kind::constant1()).alloc);
  CHECK(take(plan, 1)[0].members() == range(1, 2));

  const auto zero = AllocationPlan::custom({}, TailRule{});
  auto zp = v2b_block_adversary(zero);
  const auto singles = take(zp, 4);
  for (Index i = 0; i < 4; ++i) CHECK(singles[i].members() == std::vector<Index>{i + 1});

  auto hp = v2b_block_adversary(build_v2_strategy(V2Kind::harmonic_prefix()).alloc);
  const auto blocks = take(hp, 3);
  for (const auto& c : blocks) {
    CHECK(harmonic_sum(c.min(), c.max()) > harmonic_number(c.min()));
    if (c.max() > c.min()) CHECK(!(harmonic_sum(c.min(), c.max() - 1) > harmonic_number(c.min())));
  }
}

TEST_CASE("scaled harmonic gap") {
  for (const auto& c : {R(1, 10), R(1, 2), R(9, 10)}) CHECK(scaled_harmonic_gap(1, c) == 1);
  CHECK(scaled_harmonic_gap(2, R(1, 2)) == 4);
  CHECK(harmonic_number(4) / R(2) == R(25, 24));
  CHECK(harmonic_sum(2, 4) == R(13, 12));
  // Exact-search oracle and monotonicity in c.
  for (Index k = 2; k <= 4; ++k) {
    Index prev = 0;
    for (long c = 1; c <= 5; ++c) {
      const Rat cc = R(c, 8);
      Index n = k;
      while (!(cc * harmonic_number(n) < harmonic_sum(k, n))) ++n;
      CHECK(scaled_harmonic_gap(k, cc) == n);
      CHECK(n >= prev);
      prev = n;
    }
  }
  CHECK_THROWS_AS(scaled_harmonic_gap(2, R(1)), DomainError);
}

TEST_CASE("adversary registry") {
  const auto g = PriceModel::geometric(R(1, 2));
  const auto a = geometric_alloc();
  for (const char* id : {"v1b-ceiling", "two-cycle", "v1d-chooser", "v2a-block", "v2b-block"}) {
    auto adv = make_adversary(id, g, a);
    CHECK(adv.id == id);
    adv.plan.pull(1);
    CHECK(adv.plan.cycles().size() == 1);
  }
  CHECK(make_adversary("v2b-block", g, a).claim == ClaimKind::FirstMemberFails);
  CHECK_THROWS_AS(make_adversary("nope", g, a), DomainError);
}
