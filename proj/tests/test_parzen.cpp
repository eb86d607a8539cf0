#include <gtest/gtest.h>

#include <random>

#include "crreg/parzen.hpp"
#include "support.hpp"

using namespace crreg;
using parzen::ParzenConfig;
using testing_support::cube;
using testing_support::gauss;

TEST(ParzenConfig, DefaultConfigArithmetic) {
  std::vector<double> ramp(64);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i) / 63.0;
  const ParzenConfig a = parzen::default_config(Volume(cube(4), ramp), 32, 1.0);
  EXPECT_DOUBLE_EQ(a.bandwidth(), 0.03125);
  EXPECT_DOUBLE_EQ(a.centers()[0], 0.015625);
  EXPECT_DOUBLE_EQ(a.intensity_min(), 0.0);
  EXPECT_DOUBLE_EQ(a.intensity_max(), 1.0);

  for (double& v : ramp) v *= 2.0;
  const ParzenConfig b = parzen::default_config(Volume(cube(4), ramp), 4, 1.0);
  ASSERT_EQ(b.bins(), 4u);
  EXPECT_DOUBLE_EQ(b.centers()[0], 0.25);
  EXPECT_DOUBLE_EQ(b.centers()[1], 0.75);
  EXPECT_DOUBLE_EQ(b.centers()[2], 1.25);
  EXPECT_DOUBLE_EQ(b.centers()[3], 1.75);

  const ParzenConfig c = parzen::default_config(Volume(cube(4), ramp), 8, 0.25);
  EXPECT_DOUBLE_EQ(c.bandwidth(), 0.25 * 2.0 / 8.0);
}

TEST(ParzenConfig, RejectsDegenerateSetups) {
  EXPECT_THROW(parzen::default_config(Volume(cube(4), 0.3)), Error);
  EXPECT_THROW(ParzenConfig(0.0, 1.0, 1, 0.1), Error);
  EXPECT_THROW(ParzenConfig(0.0, 1.0, 8, 0.0), Error);
  EXPECT_THROW(ParzenConfig(1.0, 1.0, 8, 0.1), Error);
}

TEST(ParzenWeights, PeakAndTailValues) {
  const ParzenConfig cfg(0.0, 3.2, 32, 0.1);
  const double c = cfg.centers()[7];
  EXPECT_NEAR(parzen::weights(c, cfg)[7], 3.98942, 1e-5);
  EXPECT_NEAR(parzen::weights(c, cfg)[7], 1.0 / (0.1 * std::sqrt(2.0 * M_PI)), 1e-14);

  const double tail = parzen::weights(c + 0.5, cfg)[7];
  EXPECT_NEAR(tail, 1.4867e-5, 1e-9);
  EXPECT_NEAR(tail, gauss(c + 0.5, c, 0.1), 1e-18);
}

TEST(ParzenWeights, EvenAboutEachCenter) {
  const ParzenConfig cfg(0.0, 1.0, 10, 0.07);
  for (std::size_t k = 1; k + 1 < cfg.bins(); ++k) {
    for (double d : {0.01, 0.033, 0.05}) {
      EXPECT_NEAR(parzen::weights(cfg.centers()[k] - d, cfg)[k],
                  parzen::weights(cfg.centers()[k] + d, cfg)[k], 1e-12);
    }
  }
}

TEST(ParzenWeights, ClampsOutOfRangeIntensities) {
  const ParzenConfig cfg(0.0, 1.0, 8, 0.125);
  EXPECT_EQ(parzen::weights(-3.0, cfg), parzen::weights(0.0, cfg));
  EXPECT_EQ(parzen::weights(7.0, cfg), parzen::weights(1.0, cfg));
}

TEST(ParzenWeights, SlopeMatchesFiniteDifference) {
  const ParzenConfig cfg(-1.0, 2.0, 12, 0.2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.99, 1.99);
  std::vector<double> w(12), dw(12);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = u(rng);
    parzen::weights_and_slopes(x, cfg, w, dw);
    const auto ref = parzen::weights(x, cfg);
    for (std::size_t k = 0; k < 12; ++k) {
      EXPECT_EQ(w[k], ref[k]);
      EXPECT_NEAR(dw[k], -(x - cfg.centers()[k]) / (0.2 * 0.2) * w[k], 1e-12 * (1 + std::abs(dw[k])));
      const double fd = testing_support::central_difference(
          [&](double t) { return parzen::weights(t, cfg)[k]; }, x, 1e-6);
      if (std::abs(dw[k]) > 1e-6) {
        EXPECT_NEAR(fd, dw[k], 1e-6 * std::abs(dw[k]));
      } else {
        EXPECT_NEAR(fd, dw[k], 1e-9);
      }
    }
  }
}

TEST(WeightTable, MatchesScalarOracle) {
  std::mt19937_64 rng(5);
  const Volume v = testing_support::random_volume(cube(8), rng, 0.2, 1.7);
  const ParzenConfig cfg = parzen::default_config(v, 32, 1.0);
  const auto t = parzen::weight_table(v, cfg);
  ASSERT_EQ(t.rows, v.size());
  ASSERT_EQ(t.cols, 32u);
  for (std::size_t i = 0; i < t.rows; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < t.cols; ++k) {
      const double ref = gauss(v[i], cfg.centers()[k], cfg.bandwidth());
      EXPECT_NEAR(t(i, k), ref, 1e-14 * std::max(1.0, ref));
      EXPECT_GE(t(i, k), 0.0);
      row += t(i, k);
    }
    EXPECT_NEAR(t.row_sums[i], row, 1e-12 * row);
    EXPECT_GT(t.row_sums[i], 0.0);
  }
  double rs = 0.0, cs = 0.0;
  for (double r : t.row_sums) rs += r;
  for (double c : t.col_sums) cs += c;
  EXPECT_NEAR(rs, cs, 1e-12 * rs);
  for (std::size_t k = 0; k < t.cols; ++k) {
    double col = 0.0;
    for (std::size_t i = 0; i < t.rows; ++i) col += t(i, k);
    EXPECT_NEAR(t.col_sums[k], col, 1e-12 * std::max(col, 1e-300));
  }
}

TEST(WeightTable, TwoVoxelsAtFirstCenter) {
  const ParzenConfig cfg(0.0, 1.0, 4, 0.05);
  const std::vector<double> x{0.125, 0.125};
  const auto t = parzen::weight_table(x, cfg);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(t(0, k), t(1, k));
  EXPECT_NEAR(t.col_sums[0], 2.0 / (0.05 * std::sqrt(2.0 * M_PI)), 1e-12);
}

TEST(WeightTable, ResponsibilitiesEqualNormalizedRows) {
  std::mt19937_64 rng(6);
  const Volume v = testing_support::random_volume(cube(6), rng);
  const ParzenConfig cfg(0.0, 1.0, 16, 0.04);
  const auto a = parzen::normalize_rows(parzen::weight_table(v, cfg));
  const auto b = parzen::responsibilities(v.data(), cfg);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_NEAR(a.entries[i], b.entries[i], 1e-15);
  for (std::size_t i = 0; i < a.rows; ++i) EXPECT_NEAR(b.row_sums[i], 1.0, 1e-9);
}

TEST(WeightTable, NarrowKernelRowsKeepUnitMass) {
  // Midway between two centers 62 bandwidths apart every raw weight underflows.
  const ParzenConfig cfg(0.0, 1.0, 4, 0.002);
  const std::vector<double> x{0.25, 0.3, 0.875, 1.0};
  const auto t = parzen::weight_table(x, cfg);
  EXPECT_EQ(t.row_sums[0], 0.0);
  const auto a = parzen::responsibilities(x, cfg);
  for (std::size_t i = 0; i < a.rows; ++i) EXPECT_NEAR(a.row_sums[i], 1.0, 1e-9);
  EXPECT_NEAR(a(0, 0), 0.5, 1e-9);
  EXPECT_NEAR(a(0, 1), 0.5, 1e-9);
  EXPECT_NEAR(a(1, 1), 1.0, 1e-9);
  EXPECT_NEAR(a(3, 3), 1.0, 1e-9);
}

TEST(BinWeights, SumToOne) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Volume v = testing_support::random_volume(cube(5), rng, -10.0 * trial, 3.0 + trial);
    const ParzenConfig cfg = parzen::default_config(v, 2 + trial, 0.3 + 0.1 * trial);
    const auto n = parzen::normalized_bin_weights(parzen::weight_table(v, cfg));
    double s = 0.0;
    for (double x : n) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(BinWeights, ConcentratedAtOneCenter) {
  const ParzenConfig cfg(0.0, 1.0, 8, 0.125 / 4.0);
  const std::vector<double> x(100, cfg.centers()[3]);
  const auto n = parzen::normalized_bin_weights(parzen::weight_table(x, cfg));
  // Expected shares from the kernel values of one sample against all bins.
  double total = 0.0;
  std::vector<double> g(8);
  for (std::size_t k = 0; k < 8; ++k) total += g[k] = gauss(cfg.centers()[3], cfg.centers()[k], cfg.bandwidth());
  for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(n[k], g[k] / total, 1e-12);
  EXPECT_GT(n[3], 0.999);
}

TEST(BinWeights, UniformSamplesSpreadEvenly) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(10000);
  for (double& v : x) v = u(rng);
  const ParzenConfig cfg(0.0, 1.0, 16, 1.0 / 16.0);
  const auto n = parzen::normalized_bin_weights(parzen::weight_table(x, cfg));
  // Brute-force expectation: the mean of each bin's kernel over the samples.
  for (std::size_t k = 2; k + 2 < 16; ++k) {
    double ref = 0.0, total = 0.0;
    for (double v : x) {
      for (std::size_t m = 0; m < 16; ++m) total += gauss(v, cfg.centers()[m], cfg.bandwidth());
      ref += gauss(v, cfg.centers()[k], cfg.bandwidth());
    }
    EXPECT_NEAR(n[k], ref / total, 1e-12);
    EXPECT_NEAR(n[k], 1.0 / 16.0, 0.15 / 16.0);
  }
}

TEST(BinWeights, InvariantUnderCommonAffineMap) {
  std::mt19937_64 rng(9);
  const Volume v = testing_support::random_volume(cube(6), rng);
  const auto n0 = parzen::normalized_bin_weights(parzen::weight_table(v, parzen::default_config(v)));
  for (auto [scale, shift] : {std::pair{3.0, -2.0}, std::pair{0.01, 5.0}, std::pair{250.0, 0.0}}) {
    Volume w = v;
    for (double& x : w.data()) x = scale * x + shift;
    const auto n1 =
        parzen::normalized_bin_weights(parzen::weight_table(w, parzen::default_config(w)));
    for (std::size_t k = 0; k < n0.size(); ++k) EXPECT_NEAR(n0[k], n1[k], 1e-10);
  }
}
