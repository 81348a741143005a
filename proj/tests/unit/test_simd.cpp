#include <cmath>
#include <cstring>
#include <vector>

#include "capassign/simd/kernels.hpp"
#include "test_util.hpp"

using namespace capassign;
using simd::Level;

namespace {

std::vector<double> draw(SplitMix64& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class SimdEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (!simd::supported(Level::Avx2)) GTEST_SKIP() << "avx2 not available";
  }
};

}  // namespace

TEST(Simd, ScalarMatchesDefinition) {
  SplitMix64 rng(1);
  const std::size_t n = 3, m = 5, dim = 3;
  const auto a = draw(rng, n * dim, -5, 5);
  const auto b = draw(rng, dim * m, -5, 5);
  std::vector<double> out(n * m);
  simd::pairwise_distance(Level::Scalar, a, n, b, m, dim, 1.0, out);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[i * dim + k] - b[k * m + j];
        sq += d * d;
      }
      EXPECT_NEAR(out[i * m + j], std::sqrt(sq), 1e-12);
    }
  }
}

TEST(Simd, RelaxRowSkipsUsedColumns) {
  const std::vector<double> row = {5, 1, 3, 0.5};
  const std::vector<double> v = {0, 0, 0, 0};
  const std::vector<std::uint8_t> used = {0, 0, 0, 1};
  std::vector<double> slack(4, 10.0);
  std::vector<std::int32_t> pred(4, -1);
  const auto scan = simd::relax_row(Level::Scalar, row, 0.0, v, used, slack, pred, 7);
  EXPECT_EQ(scan.delta, 1.0);
  EXPECT_EQ(scan.column, 1u);
  EXPECT_EQ(pred[3], -1);
  EXPECT_EQ(slack[3], 10.0);
  EXPECT_EQ(pred[0], 7);
}

TEST(Simd, SizeMismatchThrows) {
  std::vector<double> a(6), b(6), out(3);
  EXPECT_ERROR_CODE(simd::pairwise_distance(Level::Scalar, a, 2, b, 2, 3, 1.0, out),
                    ErrorCode::DimensionMismatch);
}

TEST_P(SimdEquivalence, PairwiseDistanceBitwise) {
  const std::size_t m = GetParam();
  SplitMix64 rng(10 + m);
  for (std::size_t n : {1u, 4u, 9u}) {
    const auto a = draw(rng, n * 3, -1000, 1000);
    const auto b = draw(rng, 3 * m, -1000, 1000);
    for (double e : {1.0, 2.0, 2.5}) {
      std::vector<double> s(n * m), v(n * m);
      simd::pairwise_distance(Level::Scalar, a, n, b, m, 3, e, s);
      simd::pairwise_distance(Level::Avx2, a, n, b, m, 3, e, v);
      EXPECT_TRUE(bitwise_equal(s, v)) << "n=" << n << " m=" << m << " e=" << e;
    }
  }
}

TEST_P(SimdEquivalence, BilinearCostBitwise) {
  const std::size_t m = GetParam();
  SplitMix64 rng(20 + m);
  for (std::size_t dim : {3u, 6u, 12u}) {
    const std::size_t n = 5;
    const auto x = draw(rng, n * dim, -100, 100);
    const auto rows = draw(rng, n, 0, 1e6);
    const auto w = draw(rng, dim * m, -100, 100);
    const auto cols = draw(rng, m, 0, 1e6);
    std::vector<double> s(n * m), v(n * m);
    simd::bilinear_cost(Level::Scalar, x, rows, n, w, cols, m, dim, s);
    simd::bilinear_cost(Level::Avx2, x, rows, n, w, cols, m, dim, v);
    EXPECT_TRUE(bitwise_equal(s, v)) << "dim=" << dim << " m=" << m;
  }
}

TEST_P(SimdEquivalence, RelaxRowBitwiseIncludingTies) {
  const std::size_t m = GetParam();
  SplitMix64 rng(30 + m);
  for (int trial = 0; trial < 20; ++trial) {
    auto row = draw(rng, m, 0, 10);
    if (trial % 2) {
      for (double& c : row) c = std::round(c);  // ties
    }
    const auto v = draw(rng, m, -1, 1);
    std::vector<std::uint8_t> used(m);
    for (auto& u : used) u = rng.below(3) == 0;
    auto slack_s = draw(rng, m, 0, 12);
    auto slack_v = slack_s;
    std::vector<std::int32_t> pred_s(m, -1), pred_v(m, -1);
    const auto rs = simd::relax_row(Level::Scalar, row, 0.25, v, used, slack_s, pred_s, 3);
    const auto rv = simd::relax_row(Level::Avx2, row, 0.25, v, used, slack_v, pred_v, 3);
    EXPECT_EQ(std::memcmp(&rs.delta, &rv.delta, sizeof(double)), 0);
    EXPECT_EQ(rs.column, rv.column);
    EXPECT_EQ(pred_s, pred_v);
    EXPECT_TRUE(bitwise_equal(slack_s, slack_v));
  }
}

INSTANTIATE_TEST_SUITE_P(Widths, SimdEquivalence,
                         ::testing::Values(1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 33u));
