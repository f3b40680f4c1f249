#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "emp/hmm.hpp"
#include "emp/oracle.hpp"
#include "support/random_models.hpp"

using namespace emp;

namespace {

HmmSpec uniform(std::size_t states, std::size_t alphabet, std::size_t length) {
  HmmSpec h;
  h.states = states;
  h.alphabet = alphabet;
  h.initial.assign(states, 1.0 / states);
  h.transition.assign(states, std::vector<double>(states, 1.0 / states));
  h.emission.assign(states, std::vector<double>(alphabet, 1.0 / alphabet));
  for (std::size_t t = 0; t < length; ++t) h.observations.push_back(t % alphabet);
  return h;
}

HmmSpec deterministic() {
  return {2, 2, {1, 0}, {{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}, {0, 0, 0}};
}

}  // namespace

TEST(HmmGraph, UniformModelHasQuarterEntries) {
  const auto wg = hmm_to_weighted_graph(uniform(2, 2, 5));
  ASSERT_EQ(wg.base.variables().size(), 5u);
  ASSERT_EQ(wg.base.factors().size(), 5u);
  for (const auto& f : wg.base.factors())
    for (double v : f.values) EXPECT_EQ(v, 0.25);
  const auto checked = validate(wg.base);
  EXPECT_EQ(checked.num_components(), 1u);
}

TEST(HmmGraph, SingleStateIsScalar) {
  HmmSpec h{1, 2, {1}, {{1}}, {{0.3, 0.7}}, {0, 1, 1}};
  const auto wg = hmm_to_weighted_graph(h);
  for (const auto& f : wg.base.factors()) EXPECT_EQ(f.values.size(), 1u);
  EXPECT_NEAR(*hmm_entropy(h).entropy_bits, 0.0, 1e-12);
}

TEST(HmmGraph, DeterministicChain) {
  const auto wg = hmm_to_weighted_graph(deterministic());
  EXPECT_EQ(wg.base.factors()[0].values, (std::vector<double>{1, 0}));
  EXPECT_EQ(wg.base.factors()[1].values, (std::vector<double>{1, 0, 0, 0}));
  EXPECT_TRUE(std::isnan(wg.companions[1][1]));
  EXPECT_EQ(oracle::enumerate_marginal(wg.base, 2), (std::vector<double>{1, 0}));
}

TEST(HmmGraph, RejectsInvalidModels) {
  auto h = uniform(2, 2, 3);
  h.observations[1] = 5;
  EXPECT_THROW((void)hmm_to_weighted_graph(h), Error);
  auto bad = uniform(2, 2, 3);
  bad.transition[0] = {0.7, 0.7};
  try {
    validate_hmm(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidModel);
    EXPECT_EQ(e.path(), "A[0]");
  }
}

TEST(HmmEntropy, EdgeCases) {
  EXPECT_NEAR(*hmm_entropy(uniform(2, 2, 5)).entropy_bits, 5.0, 1e-9);
  EXPECT_NEAR(*hmm_entropy(deterministic()).entropy_bits, 0.0, 1e-9);
}

TEST(HmmEntropy, WorkedExampleMatchesPathEnumeration) {
  HmmSpec h{2, 2, {0.6, 0.4}, {{0.7, 0.3}, {0.4, 0.6}}, {{0.9, 0.1}, {0.2, 0.8}}, {0, 1, 0, 0}};
  const double engine = *hmm_entropy(h).entropy_bits;
  EXPECT_NEAR(engine, oracle::enumerate_hmm_entropy(h), 1e-9);
  EXPECT_NEAR(engine, oracle::enumerate_entropy(hmm_to_weighted_graph(h).base), 1e-9);
}

TEST(HmmEntropy, ZeroEvidence) {
  HmmSpec h{2, 2, {1, 0}, {{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}, {0, 1}};
  try {
    (void)hmm_entropy(h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroEvidence);
  }
}

TEST(HmmEntropy, RandomModelsMatchEnumerationAndBound) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> states(1, 3), alphabet(1, 4), length(1, 7);
  for (int seed = 0; seed < 50; ++seed) {
    const auto h = fixtures::random_hmm(rng, states(rng), alphabet(rng), length(rng));
    const double bits = *hmm_entropy(h).entropy_bits;
    EXPECT_NEAR(bits, oracle::enumerate_hmm_entropy(h), 1e-9);
    EXPECT_GE(bits, 0.0);
    EXPECT_LE(bits, h.observations.size() * std::log2(static_cast<double>(h.states)) + 1e-9);
  }
}

TEST(HmmEntropy, RescaledLongChainStaysFinite) {
  std::mt19937_64 rng(6);
  const auto h = fixtures::random_hmm(rng, 2, 3, 20'000);
  const auto r = hmm_entropy(h);
  ASSERT_TRUE(r.entropy_bits.has_value());
  EXPECT_TRUE(std::isfinite(*r.entropy_bits));
  EXPECT_GT(*r.entropy_bits, 0.0);
  EXPECT_LE(*r.entropy_bits, 20'000.0);
  // A short prefix rescaled or not gives the same answer.
  auto prefix = h;
  prefix.observations.resize(200);
  EXPECT_NEAR(*hmm_entropy(prefix, true).entropy_bits, *hmm_entropy(prefix, false).entropy_bits,
              1e-9 * 200);
}
