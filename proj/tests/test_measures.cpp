#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "test_util.hpp"

namespace wbounds {
namespace {

using testing::cube;

ErrorCode parse_error(const std::string& text) {
  try {
    parse_grid_measure(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ErrorCode::InvalidArgument;
}

TEST(GridSpec, LayoutIsAxisZeroFastest) {
  const GridSpec g({3, 2});
  EXPECT_EQ(g.size(), 6);
  EXPECT_EQ(g.unravel(4), (std::vector<Index>{1, 1}));
  EXPECT_EQ(g.ravel({2, 1}), 5);
  const MatrixXd pts = g.points();
  EXPECT_EQ(pts(0, 1), 2.0);
  EXPECT_EQ(pts(1, 1), 1.0);
  EXPECT_EQ(pts(1, 3), 2.0);
  EXPECT_THROW(GridSpec({2, 0}), Error);
  EXPECT_THROW(GridSpec(std::vector<Index>{}), Error);
}

TEST(Load, ParsesGridText) {
  const GridMeasure a = parse_grid_measure("2 2 2\n1 0 0 1");
  EXPECT_EQ(a.grid, GridSpec({2, 2}));
  EXPECT_EQ(a.mass, (VectorXd(4) << 1, 0, 0, 1).finished());

  const GridMeasure b = parse_grid_measure("1 3\n0.5 0.5 0");
  EXPECT_EQ(b.grid, GridSpec({3}));
  EXPECT_EQ(b.mass, (VectorXd(3) << 0.5, 0.5, 0).finished());
}

TEST(Load, SkipsCommentsAndKeepsMassesVerbatim) {
  const GridMeasure m = parse_grid_measure("# header comment\n1 2\n# mid\n3 5\n");
  EXPECT_EQ(m.mass, (VectorXd(2) << 3, 5).finished());
}

TEST(Load, RejectsNegativeMassWithIndex) {
  try {
    parse_grid_measure("2 2 2\n1 -1 0 1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeMass);
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos) << e.what();
  }
}

TEST(Load, RejectsMalformedInput) {
  EXPECT_EQ(parse_error(""), ErrorCode::MalformedHeader);
  EXPECT_EQ(parse_error("0\n"), ErrorCode::MalformedHeader);
  EXPECT_EQ(parse_error("2 2\n1 1"), ErrorCode::MalformedHeader);
  EXPECT_EQ(parse_error("1 x\n1"), ErrorCode::MalformedHeader);
  EXPECT_EQ(parse_error("1 3\n1 1"), ErrorCode::CountMismatch);
  EXPECT_EQ(parse_error("1 2\n1 1 1"), ErrorCode::CountMismatch);
  EXPECT_EQ(parse_error("1 2\n1 abc"), ErrorCode::CountMismatch);
}

TEST(Load, SaveRoundTripsExactly) {
  std::mt19937_64 rng(5);
  const GridMeasure m = testing::random_measure(GridSpec({3, 4}), rng);
  std::stringstream ss;
  save_grid_measure(ss, m);
  const GridMeasure back = load_grid_measure(ss);
  EXPECT_EQ(back.grid, m.grid);
  EXPECT_EQ(back.mass, m.mass);
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize(GridMeasure(GridSpec({4}), (VectorXd(4) << 2, 2, 0, 0).finished())).mass,
            (VectorXd(4) << 0.5, 0.5, 0, 0).finished());
  EXPECT_EQ(normalize(GridMeasure(GridSpec({1}), VectorXd::Ones(1))).mass, VectorXd::Ones(1));
  try {
    normalize(GridMeasure(GridSpec({2}), VectorXd::Zero(2)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroTotalMass);
  }
}

TEST(Normalize, SumsToOne) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const GridMeasure m = testing::random_measure(cube(7, 2), rng, 0.3);
    EXPECT_NEAR(m.total(), 1.0, 1e-12);
  }
}

TEST(Coarsen, UniformBlocks) {
  const GridMeasure u(cube(4, 2), VectorXd::Constant(16, 1.0 / 16));
  const GridMeasure c2 = coarsen_measure(u, CoarseningSpec(u.grid, 2));
  EXPECT_EQ(c2.grid, cube(2, 2));
  for (Index k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(c2.mass[k], 0.25);
  const GridMeasure c4 = coarsen_measure(u, CoarseningSpec(u.grid, 4));
  EXPECT_EQ(c4.mass.size(), 1);
  EXPECT_DOUBLE_EQ(c4.mass[0], 1.0);
}

TEST(Coarsen, MatchesBruteForceBlockSums) {
  std::mt19937_64 rng(3);
  const GridSpec g = cube(4, 2);
  const GridMeasure m = testing::random_measure(g, rng);
  const GridMeasure c = coarsen_measure(m, CoarseningSpec(g, 2));
  for (Index bx = 0; bx < 2; ++bx) {
    for (Index by = 0; by < 2; ++by) {
      double sum = 0.0;
      for (Index x = 2 * bx; x < 2 * bx + 2; ++x)
        for (Index y = 2 * by; y < 2 * by + 2; ++y) sum += m.mass[x + 4 * y];
      EXPECT_NEAR(c.mass[bx + 2 * by], sum, 1e-15);
    }
  }
}

TEST(Coarsen, PreservesMassBitwiseInAscendingOrder) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const GridSpec g({6, 5});
    const GridMeasure m = testing::random_measure(g, rng, 0.2);
    const CoarseningSpec c(g, 2);
    const GridMeasure cm = coarsen_measure(m, c);
    VectorXd expect = VectorXd::Zero(c.coarse().size());
    for (Index i = 0; i < g.size(); ++i) expect[c.block_of(i)] += m.mass[i];
    EXPECT_EQ(cm.mass, expect);
  }
}

TEST(Coarsen, KappaOneIsIdentity) {
  std::mt19937_64 rng(2);
  const GridMeasure m = testing::random_measure(cube(5, 2), rng);
  const GridMeasure c = coarsen_measure(m, CoarseningSpec(m.grid, 1));
  EXPECT_EQ(c.grid, m.grid);
  EXPECT_EQ(c.mass, m.mass);
}

TEST(Coarsen, PadsNonDivisibleAxes) {
  const GridMeasure m(GridSpec({5}), (VectorXd(5) << 1, 2, 3, 4, 5).finished());
  const CoarseningSpec c(m.grid, 2);
  EXPECT_EQ(c.coarse_dims(), (std::vector<Index>{3}));
  EXPECT_EQ(coarsen_measure(m, c).mass, (VectorXd(3) << 3, 7, 5).finished());
  const MatrixXd centers = coarsen_grid(c);
  EXPECT_DOUBLE_EQ(centers(0, 2), 5.0);
}

TEST(CoarsenGrid, Centers) {
  const MatrixXd a = coarsen_grid(CoarseningSpec(GridSpec({4}), 2));
  EXPECT_EQ(a, (MatrixXd(1, 2) << 1.5, 3.5).finished());
  const MatrixXd b = coarsen_grid(CoarseningSpec(cube(2, 2), 2));
  EXPECT_EQ(b, (MatrixXd(2, 1) << 1.5, 1.5).finished());
  const MatrixXd c = coarsen_grid(CoarseningSpec(GridSpec({4}), 1));
  EXPECT_EQ(c, (MatrixXd(1, 4) << 1, 2, 3, 4).finished());
}

TEST(CoarsenGrid, CenterIsMeanOfBlockCoordinates) {
  const GridSpec g({6, 4});
  const CoarseningSpec c(g, 2);
  const MatrixXd pts = g.points();
  const MatrixXd centers = coarsen_grid(c);
  MatrixXd sums = MatrixXd::Zero(2, c.coarse().size());
  VectorXd counts = VectorXd::Zero(c.coarse().size());
  for (Index i = 0; i < g.size(); ++i) {
    sums.col(c.block_of(i)) += pts.col(i);
    counts[c.block_of(i)] += 1.0;
  }
  for (Index k = 0; k < c.coarse().size(); ++k)
    EXPECT_TRUE(centers.col(k).isApprox(sums.col(k) / counts[k], 1e-15));
}

TEST(TvWeights, Examples) {
  EXPECT_EQ(tv_weights(GridSpec({3}), 1.0), (VectorXd(3) << 1, 0, 1).finished());
  EXPECT_EQ(tv_weights(GridSpec({2}), 2.0), (VectorXd(2) << 0.25, 0.25).finished());
}

// The farthest cell of [128]^2 from the center (64.5, 64.5) sits at
// distance 63.5 * sqrt(2) = 89.80; the radius bound 1/2 sqrt(d) N = 90.51
// dominates it.
TEST(TvWeights, RadiusOn128Grid) {
  const GridSpec g = cube(128, 2);
  const double r = grid_radius(g);
  EXPECT_NEAR(r, 0.5 * std::sqrt(2.0) * 128.0, 1e-12);
  EXPECT_NEAR(r, 90.51, 5e-3);
  for (double p : {1.0, 2.0}) {
    const double max_dist = std::pow(tv_weights(g, p).maxCoeff(), 1.0 / p);
    EXPECT_NEAR(max_dist, 63.5 * std::sqrt(2.0), 1e-9);
    EXPECT_LE(max_dist, r);
  }
}

TEST(WeightedTv, Examples) {
  const GridSpec g({3});
  const VectorXd w = tv_weights(g, 1.0);
  const GridMeasure a = testing::dirac(g, 0), b = testing::dirac(g, 1);
  EXPECT_EQ(weighted_tv(a, a, w, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(weighted_tv(a, b, w, 1.0), 1.0);
  const double tv2 = weighted_tv(a, b, w, 2.0);
  EXPECT_DOUBLE_EQ(tv2, std::sqrt(2.0));
  EXPECT_GE(tv2, wasserstein_1d(a, b, 2.0));
  EXPECT_DOUBLE_EQ(wasserstein_1d(a, b, 2.0), 1.0);
}

TEST(WeightedTv, DominatesExactDistance) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 60; ++t) {
    const Index d = 1 + t % 2;
    const Index n = d == 1 ? 8 : 2 + t % 7;
    const double p = 1.0 + t % 2;
    const GridSpec g = cube(n, d);
    const GridMeasure a = testing::random_measure(g, rng, 0.4);
    const GridMeasure b = testing::random_measure(g, rng, 0.4);
    const double w = std::pow(testing::exact_cost(a, b, p), 1.0 / p);
    EXPECT_GE(weighted_tv(a, b, tv_weights(g, p), p), w - 1e-9);
  }
}

TEST(WeightedTv, CorrectionMagnitudeBound) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const Index d = 1 + t % 3;
    const Index n = 4 + t % 9;
    const double p = 1.0 + (t % 4) * 0.5;
    const double xi = std::pow(10.0, -1.0 - t % 8);
    const GridSpec g = cube(n, d);
    const GridMeasure mu = testing::random_measure(g, rng), nu = testing::random_measure(g, rng);
    // Perturbations with ||a - mu||_1 + ||nu - b||_1 = 0.999 xi.
    VectorXd da(g.size()), db(g.size());
    for (Index i = 0; i < g.size(); ++i) {
      da[i] = u(rng);
      db[i] = u(rng);
    }
    const double scale = 0.999 * xi / (da.lpNorm<1>() + db.lpNorm<1>());
    const VectorXd a = mu.mass + scale * da, b = nu.mass + scale * db;
    const VectorXd w = tv_weights(g, p);
    const double corrections = weighted_tv(a, mu.mass, w, p) + weighted_tv(nu.mass, b, w, p);
    EXPECT_LT(corrections, std::pow(2.0, 2.0 - 2.0 / p) * std::pow(xi, 1.0 / p) * grid_radius(g));
  }
}

TEST(WeightedTv, GridMismatch) {
  const GridMeasure a(GridSpec({2}), VectorXd::Ones(2)), b(GridSpec({1, 2}), VectorXd::Ones(2));
  EXPECT_THROW(weighted_tv(a, b, VectorXd::Ones(2), 1.0), Error);
}

}  // namespace
}  // namespace wbounds
