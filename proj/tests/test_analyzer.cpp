#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "prisoners/analyzer.hpp"
#include "prisoners/permutations.hpp"

using namespace prisoners;

namespace {

Rat R(long n, long d = 1) { return Rat(BigInt(n), BigInt(d)); }

std::vector<Index> iota_perm(Index m) {
  std::vector<Index> v(m);
  std::iota(v.begin(), v.end(), Index{1});
  return v;
}

}  // namespace

TEST_CASE("brute-force minimum") {
  const auto sq = PriceModel::inverse_square();
  const auto r = brute_force_min(sq, 4);
  CHECK(r.value == R(25, 12));
  CHECK(r.perm == iota_perm(4));
  // The identity minimum equals sum_{n<=m} 1/n for inverse-square prices.
  for (Index m = 1; m <= 7; ++m) CHECK(brute_force_min(sq, m, 3).value == harmonic_number(m));

  const auto one = brute_force_min(PriceModel::geometric(R(1, 3)), 1);
  CHECK(one.value == R(1, 3));
  CHECK(one.perm == std::vector<Index>{1});

  // Increasing prefix: the reversal puts the largest price first.
  std::vector<std::pair<Index, Rat>> up;
  for (Index i = 1; i <= 6; ++i) up.emplace_back(i, R(static_cast<long>(i), 10));
  TailRule zero;
  zero.from = 7;
  const auto rev = brute_force_min(PriceModel::custom(up, zero), 6);
  CHECK(rev.perm == std::vector<Index>{6, 5, 4, 3, 2, 1});

  CHECK_THROWS_AS(brute_force_min(sq, 10), DomainError);
}

TEST_CASE("brute-force minimum is a lower bound, serial and parallel agree") {
  const auto sq = PriceModel::inverse_square();
  std::mt19937_64 rng(3);
  for (Index m = 2; m <= 8; ++m) {
    const auto serial = brute_force_min(sq, m, 1);
    const auto parallel = brute_force_min(sq, m, 4);
    CHECK(serial.value == parallel.value);
    CHECK(serial.perm == parallel.perm);
    for (int t = 0; t < 50; ++t) {
      auto perm = iota_perm(m);
      std::shuffle(perm.begin(), perm.end(), rng);
      CHECK(serial.value <= weighted_partial_sum(sq, perm));
    }
  }
  // Ties resolve to the lexicographically least minimizer.
  TailRule zero;
  zero.from = 4;
  const auto flat = PriceModel::custom({{1, R(1, 4)}, {2, R(1, 4)}, {3, R(1, 4)}}, zero);
  CHECK(brute_force_min(flat, 3, 2).perm == iota_perm(3));
}

TEST_CASE("inverse transform identity") {
  const auto g = PriceModel::geometric(R(2, 5));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    auto table = iota_perm(8);
    std::shuffle(table.begin(), table.end(), rng);
    const auto delta = Relabeling::from_table(table);
    Rat lhs, rhs;
    for (Index n = 1; n <= 8; ++n) {
      lhs += Rat(n) * g.term(delta(n));
      rhs += Rat(delta.inverse_of(n)) * g.term(n);
    }
    CHECK(lhs == rhs);
  }
}

TEST_CASE("existence decision") {
  CHECK(decide_existence(PriceModel::geometric(R(1, 2))).value == Existence::Exists);
  CHECK(decide_existence(PriceModel::inverse_square()).value == Existence::NotExists);
  const auto box = PriceModel::black_box([](Index n) { return Rat(BigInt(1), BigInt(n * n + 1)); }, "box");
  const auto v = decide_existence(box, 16);
  CHECK(v.value == Existence::Unknown);
  REQUIRE(v.diagnostics.size() == 5);
  CHECK(v.diagnostics.front().first == 1);
  CHECK(v.diagnostics.back().first == 16);
  Rat s;
  for (Index n = 1; n <= 16; ++n) s += Rat(n) * box.term(n);
  CHECK(v.diagnostics.back().second == s);
}

TEST_CASE("zero omission") {
  const auto plain = check_zero_omission(PriceModel::geometric(R(1, 2)), 5);
  CHECK(plain.pass);
  CHECK_FALSE(plain.notes.empty());

  const auto even = PriceModel::geometric(R(1, 2)).even_embedding();
  const auto t = check_zero_omission(even, 6);
  CHECK(t.pass);
  CHECK(t.checked == 2 * 720);

  // Doubling identity by hand for (0, 1/2, 0, 1/4, ...), delta = identity.
  Rat lhs, rhs;
  for (Index k = 1; k <= 4; ++k) {
    lhs += Rat(2 * k) * even.term(2 * k);
    rhs += Rat(k) * Rat::pow2_inverse(static_cast<unsigned>(k));
  }
  CHECK(lhs == R(2) * rhs);
  CHECK_THROWS_AS(check_zero_omission(even, 10), DomainError);
}

TEST_CASE("descending dominance") {
  const auto sq = PriceModel::inverse_square();
  const auto ex = descending_partial_dominance(sq, 0, 5, 1);
  CHECK(ex.pass);
  CHECK(ex.checked == 120);

  std::vector<std::pair<Index, Rat>> prefix;
  std::mt19937_64 rng(9);
  for (Index i = 1; i <= 20; ++i) prefix.emplace_back(i, R(static_cast<long>(1 + uniform_below(rng, 50)), 64));
  TailRule zero;
  zero.from = 21;
  const auto rnd = descending_partial_dominance(PriceModel::custom(prefix, zero), 1000, 20, 17);
  CHECK(rnd.pass);
  CHECK(rnd.checked == 1000);

  const auto holes = PriceModel::geometric(R(1, 2)).even_embedding();
  CHECK_THROWS_AS(descending_partial_dominance(holes, 10, 4, 1), ContractViolation);
}

TEST_CASE("tsv output") {
  CHECK(cycle_notation({2, 3, 1, 4}) == "(1 2 3)(4)");
  std::ostringstream out;
  write_tsv(out, {brute_force_min(PriceModel::inverse_square(), 3)});
  CHECK(out.str() == "(1)(2)(3)\t11/6\n");
}
