#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "prisoners/sequences.hpp"

using namespace prisoners;

namespace {

Rat R(long n, long d = 1) { return Rat(BigInt(n), BigInt(d)); }

PriceModel zero_tail_model(std::vector<Rat> values) {
  std::vector<std::pair<Index, Rat>> prefix;
  for (std::size_t i = 0; i < values.size(); ++i) prefix.emplace_back(i + 1, values[i]);
  TailRule tail;
  tail.kind = TailRule::Kind::Zero;
  tail.from = values.size() + 1;
  return PriceModel::custom(std::move(prefix), tail);
}

// p(2k) = 2^-k, p(odd) = 0.
PriceModel alternating_zeros() { return PriceModel::geometric(R(1, 2)).even_embedding(); }

}  // namespace

TEST_CASE("builtin models") {
  CHECK(PriceModel::geometric(R(1, 2)).term(3) == R(1, 8));
  CHECK(PriceModel::inverse_square().term(4) == R(1, 16));
  CHECK(PriceModel::harmonic().term(7) == R(1, 7));

  const auto g = PriceModel::geometric(R(1, 2)).total();
  CHECK(g.kind == TotalKind::ExactTotal);
  CHECK(*g.exact == R(1));
  CHECK(PriceModel::geometric(R(1, 2)).weighted_sum() == WeightedSumCertificate::ConvergesUnderSomeRearrangement);
  CHECK(PriceModel::inverse_square().total().kind == TotalKind::FiniteBracketed);
  CHECK(PriceModel::inverse_square().weighted_sum() == WeightedSumCertificate::DivergesUnderAllRearrangements);
  CHECK(PriceModel::harmonic().total().kind == TotalKind::DivergesToInfinity);
  CHECK(PriceModel::harmonic().weighted_sum() == WeightedSumCertificate::DivergesUnderAllRearrangements);
  CHECK(!PriceModel::harmonic().tail(1).has_value());
}

TEST_CASE("tails agree with terms") {
  const auto g = PriceModel::geometric(R(1, 3));
  for (Index n = 1; n < 15; ++n) {
    CHECK(g.tail(n)->exact_value().value() - g.tail(n + 1)->exact_value().value() == g.term(n));
  }
  const auto sq = PriceModel::inverse_square();
  for (Index n = 1; n < 30; ++n) {
    const RatInterval a = sq.tail(n)->bounds(20);
    const RatInterval b = sq.tail(n + 1)->bounds(20);
    CHECK(a.lo - b.hi <= sq.term(n));
    CHECK(sq.term(n) <= a.hi - b.lo);
  }
  const auto finite = zero_tail_model({R(1, 4), R(1, 2), R(1, 8)});
  CHECK(finite.tail(1)->exact_value().value() == R(7, 8));
  CHECK(finite.tail(4)->exact_value().value() == R(0));
  CHECK(*finite.total().exact == R(7, 8));
}

TEST_CASE("tail of tails") {
  // sum over n >= m of 2^(1-n) = 2^(2-m).
  const auto g = PriceModel::geometric(R(1, 2));
  CHECK(*g.tail_of_tails(1) == R(2));
  for (Index m = 2; m < 10; ++m) CHECK(*g.tail_of_tails(m) == Rat::pow2_inverse(m - 2));
  const auto finite = zero_tail_model({R(1, 4), R(1, 2), R(1, 8)});
  // tails: 7/8, 5/8, 1/8, 0...
  CHECK(*finite.tail_of_tails(1) == R(13, 8));
  CHECK(*finite.tail_of_tails(3) == R(1, 8));
  CHECK(!PriceModel::inverse_square().tail_of_tails(1).has_value());

  // even embedding: oracle by direct summation of tails over a long prefix.
  const auto e = alternating_zeros();
  for (Index m = 1; m <= 6; ++m) {
    Rat s;
    for (Index n = m; n < 200; ++n) s += e.tail(n)->exact_value().value();
    const Rat tt = *e.tail_of_tails(m);
    CHECK(s <= tt);
    CHECK(tt - s < Rat::pow2_inverse(80));
  }
}

TEST_CASE("custom model certificates and parsing") {
  TailRule inv;
  inv.kind = TailRule::Kind::InversePower;
  inv.from = 3;
  inv.exponent = 2;
  CHECK_THROWS_AS(PriceModel::custom({{1, R(1)}}, inv, WeightedSumCertificate::ConvergesUnderSomeRearrangement),
                  ContractViolation);
  CHECK_NOTHROW(PriceModel::custom({{1, R(1)}}, inv, WeightedSumCertificate::Unknown));

  std::istringstream text("# prices\n1 1/4\n2 1/2\n3 1/8\ntail geometric 1/2 from 4\n");
  const auto m = PriceModel::parse_custom(text);
  CHECK(m.term(2) == R(1, 2));
  CHECK(m.term(5) == R(1, 32));
  CHECK(*m.total().exact == R(1, 4) + R(1, 2) + R(1, 8) + R(1, 8));

  std::istringstream bad("1 1/4\n");
  CHECK_THROWS(PriceModel::parse_custom(bad));
  std::istringstream neg("1 -1/4\ntail zero from 2\n");
  CHECK_THROWS(PriceModel::parse_custom(neg));
}

TEST_CASE("descending rearrangement") {
  CHECK(descending_rearrangement(PriceModel::inverse_square(), 50).is_identity());
  CHECK(descending_rearrangement(PriceModel::geometric(R(1, 2)), 50).is_identity());

  const auto d = descending_rearrangement(zero_tail_model({R(1, 4), R(1, 2), R(1, 8)}), 3);
  CHECK(d.prefix(3) == std::vector<Index>{2, 1, 3});

  const auto bb = PriceModel::black_box([](Index n) { return R(1, static_cast<long>(n)); }, "bb");
  CHECK_THROWS_AS(descending_rearrangement(bb, 5), CapabilityError);

  // Random finite prefixes: direct scan of the rearranged order.
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Rat> v;
    const int len = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < len; ++i) v.push_back(R(static_cast<long>(rng() % 5), 1 + static_cast<long>(rng() % 4)));
    const auto model = zero_tail_model(v);
    const auto delta = descending_rearrangement(model, static_cast<Index>(len));
    for (Index n = 1; n < static_cast<Index>(len); ++n) {
      CHECK(model.term(delta(n + 1)) <= model.term(delta(n)));
      if (model.term(delta(n + 1)) == model.term(delta(n))) CHECK(delta(n) < delta(n + 1));
    }
  }
}

TEST_CASE("quasi-descending rearrangement") {
  const auto q = quasi_descending_rearrangement(zero_tail_model({R(1, 8), R(0), R(1, 2)}), 3);
  CHECK(q.prefix(3) == std::vector<Index>{3, 1, 2});

  const auto e = alternating_zeros();
  const auto delta = quasi_descending_rearrangement(e, 20);
  Rat last = R(1);
  for (Index n = 1; n <= 20; ++n) {
    const Rat v = e.term(delta(n));
    if (v.is_positive()) {
      CHECK(v <= last);
      last = v;
    }
  }
  CHECK(quasi_descending_rearrangement(PriceModel::inverse_square(), 10).is_identity());
}

TEST_CASE("omit zeros") {
  const auto z = omit_zeros(alternating_zeros(), 20);
  for (Index k = 1; k <= 10; ++k) CHECK(z.omitted.term(k) == Rat::pow2_inverse(k));
  CHECK(z.alpha.size() == 10);
  for (const auto& [p, q] : z.alpha) CHECK(p == 2 * q);

  const auto mixed = zero_tail_model({R(0), R(1, 2), R(0), R(1, 4), R(1, 8)});
  const auto zm = omit_zeros(mixed, 5);
  CHECK(zm.alpha == std::vector<std::pair<Index, Index>>{{2, 1}, {4, 2}, {5, 3}});
  CHECK(zm.omitted.term(1) == R(1, 2));
  CHECK(zm.omitted.term(3) == R(1, 8));

  const auto plain = omit_zeros(PriceModel::inverse_square(), 8);
  for (const auto& [p, q] : plain.alpha) CHECK(p == q);

  // alpha strictly increasing and reproduces every positive p-term.
  for (std::size_t i = 1; i < zm.alpha.size(); ++i) CHECK(zm.alpha[i - 1].second < zm.alpha[i].second);
  for (const auto& [p, q] : zm.alpha) CHECK(zm.omitted.term(q) == mixed.term(p));
}

TEST_CASE("weighted partial sums") {
  const auto sq = PriceModel::inverse_square();
  for (Index m : {1u, 4u, 9u}) CHECK(weighted_partial_sum(sq, Relabeling::identity(), m) == harmonic_sum(1, m));
  CHECK(weighted_partial_sum(sq, Relabeling::swap(1, 2), 2) == R(9, 4));
  CHECK(weighted_partial_sum(sq, Relabeling::identity(), 2) == R(3, 2));
  const auto g = PriceModel::geometric(R(1, 3));
  CHECK(weighted_partial_sum(g, Relabeling::identity(), 1) == g.term(1));
  const std::vector<Index> dup{1, 1};
  CHECK_THROWS_AS(weighted_partial_sum(sq, dup), DomainError);
}

TEST_CASE("descending arrangement minimizes weighted sums over its index set") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rat> v;
    for (int i = 0; i < 6; ++i) v.push_back(R(1 + static_cast<long>(rng() % 9), 1 + static_cast<long>(rng() % 9)));
    const auto model = zero_tail_model(v);
    const auto best = descending_rearrangement(model, 6);
    for (Index m = 1; m <= 6; ++m) {
      std::vector<Index> perm = best.prefix(m);
      const Rat target = weighted_partial_sum(model, perm);
      std::sort(perm.begin(), perm.end());
      do {
        CHECK(target <= weighted_partial_sum(model, perm));
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
}

TEST_CASE("relabelings") {
  const auto s = Relabeling::swap(1, 2);
  CHECK(s(1) == 2);
  CHECK(s(2) == 1);
  CHECK(s(7) == 7);
  CHECK(s.compose(s).is_identity());
  CHECK(s.inverse() == s);
  CHECK_THROWS(Relabeling::from_table({1, 1}));
  const std::vector<Index> imgs{5, 2};
  const auto p = Relabeling::from_prefix_images(imgs);
  CHECK(p.prefix(5) == std::vector<Index>{5, 2, 1, 3, 4});
  CHECK(p.compose(p.inverse()).is_identity());
  CHECK(Relabeling::from_table({1, 2, 3}) == Relabeling::identity());

  // Relabeled model reads in delta order.
  const auto sq = PriceModel::inverse_square().relabeled(s);
  CHECK(sq.term(1) == R(1, 4));
  CHECK(sq.term(2) == R(1));
}
