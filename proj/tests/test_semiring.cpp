#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "emp/semiring.hpp"

using namespace emp;

namespace {

std::vector<EntropyWeight> random_pairs(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<EntropyWeight> out(n);
  for (auto& w : out) w = {d(rng), d(rng)};
  return out;
}

// Cross terms paired with the wrong factor: still commutative, no longer
// distributive.
struct BrokenEntropy : Entropy {
  static value_type mul(const value_type& a, const value_type& b) noexcept {
    return {a.score * b.score, a.score * a.aux + b.score * b.aux};
  }
};

}  // namespace

TEST(EntropySemiring, AddIsComponentwise) {
  EXPECT_EQ(Entropy::add({1, 2}, {3, 4}), (EntropyWeight{4, 6}));
  const EntropyWeight k{0.7, -3.25};
  EXPECT_EQ(Entropy::add(k, Entropy::zero()), k);
}

TEST(EntropySemiring, MulIsProductRule) {
  EXPECT_EQ(Entropy::mul({2, 3}, {4, 5}), (EntropyWeight{8, 22}));
  const EntropyWeight k{0.7, -3.25};
  EXPECT_EQ(Entropy::mul(k, Entropy::one()), k);
  EXPECT_EQ(Entropy::mul(k, Entropy::zero()), Entropy::zero());
}

TEST(SumProductSemiring, OrdinaryArithmetic) {
  EXPECT_EQ(SumProduct::add(2, 3), 5);
  EXPECT_EQ(SumProduct::mul(2, 3), 6);
  EXPECT_EQ(MaxProduct::add(0.2, 0.7), 0.7);
}

TEST(NaryProduct, ClosedFormExamples) {
  const std::vector<EntropyWeight> items{{2, 1}, {3, 1}, {4, 1}};
  EXPECT_EQ(nary_product<Entropy>(items), (EntropyWeight{24, 26}));
  EXPECT_EQ(entropy_product_closed_form(items), (EntropyWeight{24, 26}));
  EXPECT_EQ(nary_product<Entropy>(std::vector<EntropyWeight>{}), Entropy::one());
  const std::vector<EntropyWeight> single{{1.5, -2}};
  EXPECT_EQ(nary_product<Entropy>(single), single.front());
}

TEST(NaryProduct, EqualsLeftFoldAndClosedForm) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto items = random_pairs(rng, len(rng), 0.5, 2.0);
    EntropyWeight fold = Entropy::one();
    bool first = true;
    for (const auto& w : items) {
      fold = first ? w : Entropy::mul(fold, w);
      first = false;
    }
    const auto nary = nary_product<Entropy>(items);
    EXPECT_EQ(nary, fold);
    EXPECT_LE(Entropy::distance(nary, entropy_product_closed_form(items)), 1e-9);
  }
}

TEST(Lift, ZeroAbsorbsUndefinedCompanion) {
  EXPECT_EQ(lift(0.5, -1), (EntropyWeight{0.5, -0.5}));
  EXPECT_EQ(lift(0.0, std::nan("")), (EntropyWeight{0, 0}));
  EXPECT_EQ(lift(0.0, -INFINITY), (EntropyWeight{0, 0}));
  EXPECT_EQ(lift(1, 0), (EntropyWeight{1, 0}));
}

TEST(VerifyAxioms, EntropyRandomSamples) {
  std::mt19937_64 rng(11);
  const auto samples = random_pairs(rng, 50, -10, 10);
  const auto report = verify_axioms<Entropy>(samples, 1e-9);
  EXPECT_TRUE(report.pass) << "max violation " << report.max_violation;
  EXPECT_EQ(report.checked, 50u * 50u * 50u * 8u);
}

TEST(VerifyAxioms, RealSemirings) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0, 10);
  std::vector<double> samples(30);
  for (auto& x : samples) x = d(rng);
  EXPECT_TRUE(verify_axioms<SumProduct>(samples, 1e-9).pass);
  const auto max_report = verify_axioms<MaxProduct>(samples, 1e-9);
  EXPECT_TRUE(max_report.pass);
}

TEST(VerifyAxioms, BooleanIsExact) {
  const bool samples[] = {false, true};
  const auto report = verify_axioms<Boolean>(std::span<const bool>(samples), 0.0);
  EXPECT_TRUE(report.pass);
  EXPECT_EQ(report.max_violation, 0.0);
}

TEST(VerifyAxioms, BrokenMultiplicationIsReported) {
  std::mt19937_64 rng(5);
  const auto samples = random_pairs(rng, 6, -3, 3);
  const auto report = verify_axioms<BrokenEntropy>(samples, 1e-9);
  EXPECT_FALSE(report.pass);
  EXPECT_TRUE(report.violated("right-distributivity"));
  EXPECT_TRUE(report.violated("left-distributivity"));
  EXPECT_FALSE(report.violated("mul-commutativity"));
  EXPECT_GT(report.max_violation, 1e-3);
}

TEST(EntropySemiring, FirstComponentIsOrdinaryArithmetic) {
  std::mt19937_64 rng(9);
  const auto w = random_pairs(rng, 100, -5, 5);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    EXPECT_EQ(Entropy::mul(w[i], w[i + 1]).score, SumProduct::mul(w[i].score, w[i + 1].score));
    EXPECT_EQ(Entropy::add(w[i], w[i + 1]).score, SumProduct::add(w[i].score, w[i + 1].score));
  }
}

TEST(EntropySemiring, ScalingIsBilinear) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> scale(-4, 4);
  const auto w = random_pairs(rng, 100, -5, 5);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const double c = scale(rng);
    const auto lhs = Entropy::mul(Entropy::scale(w[i], c), w[i + 1]);
    const auto rhs = Entropy::scale(Entropy::mul(w[i], w[i + 1]), c);
    EXPECT_LE(Entropy::distance(lhs, rhs), 1e-12);
  }
}

TEST(VisitSemiring, DispatchesById) {
  for (auto id : {SemiringId::SumProduct, SemiringId::MaxProduct, SemiringId::Boolean,
                  SemiringId::Entropy})
    EXPECT_EQ(visit_semiring(id, [](auto s) { return decltype(s)::id; }), id);
}
