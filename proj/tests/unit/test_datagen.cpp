#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "agrisk/datagen.hpp"
#include "agrisk/random.hpp"
#include "test_support.hpp"

namespace {

using namespace agrisk;
using agrisk::testing::small_spec;

TEST(Random, Xoshiro256ReferenceStream) {
  // First outputs of xoshiro256** from the state SplitMix64(0) expands to.
  SplitMix64 sm(0);
  EXPECT_EQ(sm.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(sm.next(), 0x6e789e6aa1b965f4ULL);
  Xoshiro256 a(42);
  Xoshiro256 b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(Random, DistributionsStayInRange) {
  Xoshiro256 rng(9);
  for (int i = 0; i < 100000; ++i) {
    const auto k = rng.uniform_int(3, 9);
    ASSERT_GE(k, 3u);
    ASSERT_LE(k, 9u);
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.uniform01_open_low();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    const float f = rng.uniform01f();
    ASSERT_GE(f, 0.0f);
    ASSERT_LT(f, 1.0f);
  }
  EXPECT_EQ(rng.uniform_int(5, 5), 5u);
  EXPECT_NE(derive_seed(7, 1, 0), derive_seed(7, 1, 1));
  EXPECT_NE(derive_seed(7, 1, 0), derive_seed(7, 2, 0));
}

TEST(Random, UniformIntIsUnbiased) {
  Xoshiro256 rng(5);
  std::vector<int> counts(6, 0);
  const int n = 600000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_int(0, 5)];
  for (int c : counts) EXPECT_NEAR(c, n / 6, 1500);
}

TEST(GenerateYet, PaperShapedTrialLengths) {
  GenSpec spec = small_spec(7, 1000, 800, 100000, 10);
  spec.events_max = 1500;
  const auto yet = generate_yet(spec);
  EXPECT_TRUE(validate_yet(yet, TrialLengthBounds{800, 1500}).empty());
  ASSERT_EQ(yet.num_trials(), 1000u);
  std::size_t shortest = 1500;
  std::size_t longest = 0;
  for (std::size_t i = 0; i < yet.num_trials(); ++i) {
    shortest = std::min(shortest, yet.trial(i).size());
    longest = std::max(longest, yet.trial(i).size());
  }
  EXPECT_GE(shortest, 800u);
  EXPECT_LE(longest, 1500u);
  // Uniform lengths over 701 values: 1000 draws reach both ends closely.
  EXPECT_LT(shortest, 820u);
  EXPECT_GT(longest, 1480u);
}

TEST(GenerateYet, DeterministicForSeed) {
  const auto spec = small_spec(7, 50, 20, 1000, 10);
  EXPECT_EQ(generate_yet(spec), generate_yet(spec));
  auto other = spec;
  other.seed = 8;
  EXPECT_NE(generate_yet(spec), generate_yet(other));
}

TEST(GenerateYet, DegenerateSingleEvent) {
  const auto yet = generate_yet(small_spec(7, 1, 1, 1000, 10));
  ASSERT_EQ(yet.num_trials(), 1u);
  EXPECT_EQ(yet.trial(0).size(), 1u);
  EXPECT_EQ(yet.trial(0).trial_id, 1u);
}

TEST(GenerateYet, EventIdsCoverCatalogUniformly) {
  const auto yet = generate_yet(small_spec(3, 200, 500, 10, 1));
  std::vector<int> counts(11, 0);
  for (std::size_t i = 0; i < yet.num_trials(); ++i) {
    for (auto e : yet.trial(i).events) ++counts[e];
  }
  EXPECT_EQ(counts[0], 0);
  for (int e = 1; e <= 10; ++e) EXPECT_NEAR(counts[e], 10000, 500);
}

TEST(GenerateYet, RejectsInvalidSpec) {
  EXPECT_THROW((void)generate_yet(small_spec(7, 0, 1, 10, 1)), InvalidArgument);
  auto bad = small_spec(7, 1, 5, 10, 1);
  bad.events_max = 4;
  EXPECT_THROW((void)generate_yet(bad), InvalidArgument);
  bad = small_spec(7, 1, 0, 10, 1);
  EXPECT_THROW((void)generate_yet(bad), InvalidArgument);
}

TEST(GenerateElt, PaperDensity) {
  const auto elt = generate_elt(small_spec(7, 1, 1, 1'000'000, 10'000), 1);
  ASSERT_EQ(elt.size(), 10'000u);
  std::set<std::uint32_t> ids;
  double sum = 0.0;
  for (const auto& e : elt.entries()) {
    ids.insert(e.event);
    ASSERT_GT(e.loss, 0.0);
    ASSERT_GE(e.event, 1u);
    ASSERT_LE(e.event, 1'000'000u);
    sum += e.loss;
  }
  EXPECT_EQ(ids.size(), 10'000u);
  // Log-normal with sigma 1: the sample mean of 10k draws is within a few
  // percent of loss_scale.
  EXPECT_NEAR(sum / 10'000.0, 1.0e5, 0.05e5);
}

TEST(GenerateElt, DeterministicPerEltId) {
  const auto spec = small_spec(7, 1, 1, 5000, 300);
  EXPECT_EQ(generate_elt(spec, 3), generate_elt(spec, 3));
  EXPECT_NE(generate_elt(spec, 3), generate_elt(spec, 4));
}

TEST(GenerateElt, SaturatedCatalog) {
  const auto elt = generate_elt(small_spec(7, 1, 1, 500, 500), 1);
  ASSERT_EQ(elt.size(), 500u);
  for (std::uint32_t e = 1; e <= 500; ++e) EXPECT_EQ(elt.entries()[e - 1].event, e);
}

TEST(GenerateElt, RejectsMoreEntriesThanCatalog) {
  EXPECT_THROW((void)generate_elt(small_spec(7, 1, 1, 10, 11), 1), InvalidArgument);
}

TEST(GenerateElt, TermsWithinRanges) {
  auto spec = small_spec(7, 1, 1, 1000, 10);
  for (std::uint32_t id = 1; id <= 200; ++id) {
    const auto t = generate_elt(spec, id).terms();
    ASSERT_GE(t.retention, spec.elt_terms.retention_lo * spec.loss_scale);
    ASSERT_LE(t.retention, spec.elt_terms.retention_hi * spec.loss_scale);
    if (t.limit != kUnlimited) {
      ASSERT_GE(t.limit, spec.elt_terms.limit_lo * spec.loss_scale);
      ASSERT_LE(t.limit, spec.elt_terms.limit_hi * spec.loss_scale);
    }
  }
}

TEST(GeneratePortfolio, ExperimentalShape) {
  const auto gp = generate_portfolio(small_spec(7, 1, 1, 100000, 1000), 1, 1, 16);
  ASSERT_EQ(gp.portfolio.programs.size(), 1u);
  ASSERT_EQ(gp.portfolio.programs[0].layers.size(), 1u);
  const auto& layer = gp.portfolio.programs[0].layers[0];
  EXPECT_EQ(layer.elt_refs.size(), 16u);
  ASSERT_EQ(gp.elts.size(), 16u);
  for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(gp.elts[j].id(), layer.elt_refs[j]);
  EXPECT_NO_THROW(validate_portfolio(gp.portfolio));
}

TEST(GeneratePortfolio, MinimalAndMultiLevel) {
  const auto spec = small_spec(7, 1, 1, 1000, 10);
  const auto minimal = generate_portfolio(spec, 1, 1, 1);
  EXPECT_EQ(minimal.elts.size(), 1u);
  const auto big = generate_portfolio(spec, 3, 2, 4);
  EXPECT_EQ(big.elts.size(), 24u);
  EXPECT_EQ(big.portfolio.programs.size(), 3u);
  EXPECT_EQ(big.portfolio.programs[2].layers[1].elt_refs.back(), 24u);
  EXPECT_EQ(generate_portfolio(spec, 3, 2, 4).portfolio, big.portfolio);
}

TEST(GeneratePortfolio, RejectsOutOfRangeCounts) {
  const auto spec = small_spec(7, 1, 1, 1000, 10);
  EXPECT_THROW((void)generate_portfolio(spec, 11, 1, 1), InvalidArgument);
  EXPECT_THROW((void)generate_portfolio(spec, 0, 1, 1), InvalidArgument);
  EXPECT_THROW((void)generate_portfolio(spec, 1, 0, 1), InvalidArgument);
  EXPECT_THROW((void)generate_portfolio(spec, 1, 1, 31), InvalidArgument);
  EXPECT_THROW((void)generate_portfolio(spec, 1, 1, 0), InvalidArgument);
}

}  // namespace
