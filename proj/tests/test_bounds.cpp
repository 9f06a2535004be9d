#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "test_util.hpp"

namespace wbounds {
namespace {

using testing::cube;

double rho_p(const GridSpec& g, Index i, Index j, double p) { return CostSpec(g, p)(i, j); }

TEST(WeightedCostBound, DiracsAreExact) {
  const GridSpec g = cube(8, 2);
  const Index x = g.ravel({1, 2}), y = g.ravel({6, 3});
  for (double p : {1.0, 2.0}) {
    const BoundReport r = weighted_cost_upper_bound(testing::dirac(g, x), testing::dirac(g, y), 2, p);
    EXPECT_NEAR(r.value, std::pow(rho_p(g, x, y, p), 1.0 / p), 1e-12);
    EXPECT_EQ(weighted_cost_upper_bound(testing::dirac(g, x), testing::dirac(g, x), 2, p).value, 0.0);
  }
}

TEST(WeightedCostBound, DiracExactnessOnePointPerBlock) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 20; ++t) {
    const GridSpec g = cube(8, 2);
    const CoarseningSpec c(g, 2);
    VectorXd mu = VectorXd::Zero(g.size()), nu = VectorXd::Zero(g.size());
    std::map<Index, bool> used_mu, used_nu;
    for (int k = 0; k < 5; ++k) {
      const Index i = static_cast<Index>(rng() % 64), j = static_cast<Index>(rng() % 64);
      if (!used_mu[c.block_of(i)]) {
        used_mu[c.block_of(i)] = true;
        mu[i] = 1.0 + k;
      }
      if (!used_nu[c.block_of(j)]) {
        used_nu[c.block_of(j)] = true;
        nu[j] = 2.0 + k;
      }
    }
    const GridMeasure a = normalize(GridMeasure(g, mu)), b = normalize(GridMeasure(g, nu));
    const double p = 1.0 + t % 2;
    const double w = std::pow(testing::exact_cost(a, b, p), 1.0 / p);
    EXPECT_NEAR(weighted_cost_upper_bound(a, b, 2, p).value, w, 1e-9);
  }
}

TEST(MinCostBound, Examples) {
  std::mt19937_64 rng(59);
  const GridSpec g = cube(8, 2);
  const GridMeasure mu = testing::random_measure(g, rng);
  EXPECT_EQ(min_cost_lower_bound(mu, mu, 2, 2.0).value, 0.0);
  const GridMeasure a = testing::dirac(g, g.ravel({0, 0})), b = testing::dirac(g, g.ravel({3, 3}));
  EXPECT_EQ(min_cost_lower_bound(a, b, 4, 1.0).value, 0.0);
}

TEST(QuantBounds, RandomSandwich8x8) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 10; ++t) {
    const GridSpec g = cube(8, 2);
    const GridMeasure mu = testing::random_measure(g, rng, 0.2), nu = testing::random_measure(g, rng, 0.2);
    const double w2 = std::sqrt(testing::exact_cost(mu, nu, 2.0));
    const double w1 = testing::exact_cost(mu, nu, 1.0);
    EXPECT_GE(weighted_cost_upper_bound(mu, nu, 2, 2.0).value, w2 - 1e-9);
    EXPECT_LE(min_cost_lower_bound(mu, nu, 2, 1.0).value, w1 + 1e-9);
  }
}

TEST(QuantBounds, MinCostBelowWeightedCostOnCoarseProblem) {
  std::mt19937_64 rng(67);
  for (int t = 0; t < 20; ++t) {
    const GridSpec g = cube(8, 1 + t % 2);
    const Index kappa = 2 + 2 * (t % 2);
    const double p = 1.0 + (t / 2) % 2;
    const GridMeasure mu = testing::random_measure(g, rng, 0.3), nu = testing::random_measure(g, rng, 0.3);
    const BoundReport lo = min_cost_lower_bound(mu, nu, kappa, p);
    const BoundReport hi = weighted_cost_upper_bound(mu, nu, kappa, p);
    EXPECT_LE(lo.transport_term, hi.transport_term + 1e-12);
  }
}

TEST(Upscale, SingleBlockExpansion) {
  const CoarseningSpec c(GridSpec({2}), 2);
  SparseCoupling coarse;
  coarse.rows = coarse.cols = 1;
  coarse.triples = {Triplet(0, 0, 1.0)};
  const SparseCoupling fine = upscale_coupling(coarse, UpscaleKernel::uniform(2, 1), c);
  ASSERT_EQ(fine.triples.size(), 4u);
  for (const Triplet& t : fine.triples) EXPECT_EQ(t.value(), 0.25);
}

TEST(Upscale, KappaOneIsIdentity) {
  const CoarseningSpec c(cube(3, 2), 1);
  SparseCoupling coarse;
  coarse.rows = coarse.cols = 9;
  coarse.triples = {Triplet(0, 4, 0.5), Triplet(7, 2, 0.5)};
  const SparseCoupling fine = upscale_coupling(coarse, UpscaleKernel::uniform(1, 2), c);
  ASSERT_EQ(fine.triples.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(fine.triples[k].row(), coarse.triples[k].row());
    EXPECT_EQ(fine.triples[k].col(), coarse.triples[k].col());
    EXPECT_EQ(fine.triples[k].value(), coarse.triples[k].value());
  }
}

TEST(Upscale, BlockSumsReproduceCoarseEntries) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index n : {4, 5}) {
    const CoarseningSpec c(cube(n, 2), 2);
    const Index nc = c.coarse().size();
    SparseCoupling coarse;
    coarse.rows = coarse.cols = nc;
    RowMatrixXd dense = RowMatrixXd::Zero(nc, nc);
    for (int k = 0; k < 12; ++k) dense(static_cast<Index>(rng() % nc), static_cast<Index>(rng() % nc)) += u(rng);
    dense /= dense.sum();
    for (Index k = 0; k < nc; ++k)
      for (Index l = 0; l < nc; ++l)
        if (dense(k, l) > 0) coarse.triples.emplace_back(k, l, dense(k, l));

    VectorXd w(16);
    for (Index k = 0; k < 16; ++k) w[k] = u(rng);
    const SparseCoupling fine = upscale_coupling(coarse, UpscaleKernel(2, 2, w), c);
    EXPECT_NEAR(fine.total(), 1.0, 1e-12);
    RowMatrixXd sums = RowMatrixXd::Zero(nc, nc);
    for (const Triplet& t : fine.triples) {
      EXPECT_GE(t.value(), 0.0);
      sums(c.block_of(t.row()), c.block_of(t.col())) += t.value();
    }
    EXPECT_LE((sums - dense).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(PrimalUpscaling, Examples) {
  std::mt19937_64 rng(73);
  const GridSpec g = cube(4, 2);
  const GridMeasure mu = testing::random_measure(g, rng);
  EXPECT_GE(primal_upscaling_upper_bound(mu, mu, 2, 2.0, 1e-9).value, 0.0);
  EXPECT_GE(primal_upscaling_upper_bound(mu, mu, 4, 2.0, 1e-12).value, 0.0);

  const GridSpec g8 = cube(8, 2);
  const Index x = g8.ravel({0, 1}), y = g8.ravel({5, 6});
  const PrimalUpscaling out = primal_upscaling(testing::dirac(g8, x), testing::dirac(g8, y), 2, 1.0, 1e-9);
  ASSERT_EQ(out.coarse.triples.size(), 1u);
  EXPECT_EQ(out.coarse.triples[0].row(), CoarseningSpec(g8, 2).block_of(x));
  EXPECT_NEAR(out.report.transport_term, rho_p(g8, x, y, 1.0), 1e-9);
  EXPECT_GE(out.report.value, rho_p(g8, x, y, 1.0));
}

TEST(PrimalUpscaling, RandomUpperBound8x8) {
  std::mt19937_64 rng(79);
  for (int t = 0; t < 10; ++t) {
    const double p = 1.0 + t % 2;
    const GridSpec g = cube(8, 2);
    const GridMeasure mu = testing::random_measure(g, rng, 0.2), nu = testing::random_measure(g, rng, 0.2);
    const double w = std::pow(testing::exact_cost(mu, nu, p), 1.0 / p);
    const BoundReport r = primal_upscaling_upper_bound(mu, nu, 2, p, 1e-9);
    EXPECT_TRUE(r.converged);
    EXPECT_GE(r.value, w - 1e-7);
  }
}

TEST(PrimalUpscaling, WidensDegenerateUserKernel) {
  // Diagonal kernel: offset s only reaches offset s, but the mass must move
  // from offset 0 to offset 1 of the same block.
  const GridSpec g({2});
  VectorXd w = VectorXd::Zero(4);
  w[0] = w[3] = 1.0;
  const PrimalUpscaling out =
      primal_upscaling(testing::dirac(g, 0), testing::dirac(g, 1), 2, 1.0, 1e-9, UpscaleKernel(2, 1, w));
  EXPECT_TRUE(out.kernel_widened);
  EXPECT_GE(out.report.value, 1.0);
}

TEST(Interpolate, Examples) {
  const CoarseningSpec c(GridSpec({4}), 2);
  const VectorXd f = (VectorXd(2) << 0, 2).finished();
  EXPECT_EQ(interpolate_potential(f, c, Interpolation::Multilinear), (VectorXd(4) << 0, 0.5, 1.5, 2).finished());
  EXPECT_EQ(interpolate_potential(f, c, Interpolation::Nearest), (VectorXd(4) << 0, 0, 2, 2).finished());
  const CoarseningSpec c2(cube(6, 2), 2);
  for (auto m : {Interpolation::Multilinear, Interpolation::Nearest})
    EXPECT_EQ(interpolate_potential(VectorXd::Constant(9, 3.25), c2, m), VectorXd::Constant(36, 3.25));
}

TEST(Interpolate, BilinearAgreesWithAffineFunctions) {
  // Multilinear interpolation is exact for affine data inside the hull of
  // the centers.
  const CoarseningSpec c(cube(8, 2), 2);
  const MatrixXd centers = coarsen_grid(c);
  const VectorXd coarse = (2.0 * centers.row(0) - 0.5 * centers.row(1)).transpose();
  const VectorXd fine = interpolate_potential(coarse, c, Interpolation::Multilinear);
  const MatrixXd pts = c.fine().points();
  for (Index i = 0; i < pts.cols(); ++i) {
    const double x = std::clamp(pts(0, i), 1.5, 7.5), y = std::clamp(pts(1, i), 1.5, 7.5);
    EXPECT_NEAR(fine[i], 2.0 * x - 0.5 * y, 1e-12);
  }
}

TEST(CTransform, Examples) {
  const CostSpec cost(cube(3, 2), 2.0);
  EXPECT_EQ(c_transform(VectorXd::Zero(9), cost, CTransformDirection::ToTarget), VectorXd::Zero(9));
  EXPECT_EQ(c_transform(VectorXd::Constant(9, 1.5), cost, CTransformDirection::ToSource),
            VectorXd::Constant(9, -1.5));

  // Points {1, 2}, p = 1: out_j = min(C_1j - 0, C_2j - 5).
  const CostSpec line(GridSpec({2}), 1.0);
  const VectorXd f = (VectorXd(2) << 0, 5).finished();
  VectorXd brute(2);
  for (Index j = 0; j < 2; ++j) brute[j] = std::min(line(0, j) - f[0], line(1, j) - f[1]);
  const VectorXd fc = c_transform(f, line, CTransformDirection::ToTarget);
  EXPECT_EQ(fc, brute);
  EXPECT_EQ(fc, (VectorXd(2) << -4, -5).finished());
}

TEST(CTransform, RectangularDirections) {
  const MatrixXd src = (MatrixXd(1, 2) << 0, 10).finished();
  const MatrixXd dst = (MatrixXd(1, 3) << 1, 2, 3).finished();
  const CostSpec cost(src, dst, 1.0);
  EXPECT_EQ(c_transform(VectorXd::Zero(2), cost, CTransformDirection::ToTarget), (VectorXd(3) << 1, 2, 3).finished());
  EXPECT_EQ(c_transform(VectorXd::Zero(3), cost, CTransformDirection::ToSource), (VectorXd(2) << 1, 7).finished());
  EXPECT_THROW(c_transform(VectorXd::Zero(3), cost, CTransformDirection::ToTarget), Error);
}

TEST(DualUpscaling, Examples) {
  std::mt19937_64 rng(83);
  const GridSpec g = cube(8, 2);
  const GridMeasure mu = testing::random_measure(g, rng);
  const BoundReport same = dual_upscaling_lower_bound(mu, mu, 2, 2.0);
  EXPECT_LE(same.raw_value, 1e-12);
  EXPECT_EQ(same.value, std::max(0.0, same.raw_value));

  const Index x = g.ravel({0, 0}), y = g.ravel({7, 4});
  for (double p : {1.0, 2.0})
    EXPECT_LE(dual_upscaling_lower_bound(testing::dirac(g, x), testing::dirac(g, y), 2, p).value,
              std::pow(rho_p(g, x, y, p), 1.0 / p) + 1e-12);
}

TEST(DualUpscaling, AdmissibleAndIdempotent) {
  std::mt19937_64 rng(89);
  for (int t = 0; t < 16; ++t) {
    const Index d = 1 + t % 2;
    const Index n = d == 1 ? 8 : 4 + 4 * (t % 4 >= 2);
    const Index kappa = 2 + 2 * ((t / 4) % 2 == 1);
    const double p = 1.0 + (t / 8) % 2;
    const GridSpec g = cube(n, d);
    const GridMeasure mu = testing::random_measure(g, rng, 0.3), nu = testing::random_measure(g, rng, 0.3);
    for (auto method : {Interpolation::Multilinear, Interpolation::Nearest}) {
      const DualUpscaling du = dual_upscaling(mu, nu, kappa, p, method);
      const CostSpec cost(g, p);
      double worst = 0.0;
      for (Index i = 0; i < g.size(); ++i)
        for (Index j = 0; j < g.size(); ++j) worst = std::min(worst, cost(i, j) - du.f[i] - du.g[j]);
      EXPECT_GE(worst, -1e-9);
      const VectorXd g3 = c_transform(du.f, cost, CTransformDirection::ToTarget);
      EXPECT_LE((g3 - du.g).cwiseAbs().maxCoeff(), 1e-12);
      const double w = std::pow(testing::exact_cost(mu, nu, p), 1.0 / p);
      EXPECT_LE(du.report.value, w + 1e-7);
    }
  }
}

TEST(QuantBounds, SandwichAcrossSizes) {
  std::mt19937_64 rng(97);
  int cases = 0;
  for (Index n : {4, 8, 16}) {
    for (Index d : {1, 2}) {
      for (Index kappa : {2, 4}) {
        for (double p : {1.0, 2.0}) {
          const GridSpec g = cube(n, d);
          const GridMeasure mu = testing::random_measure(g, rng, 0.25), nu = testing::random_measure(g, rng, 0.25);
          const double w = std::pow(testing::exact_cost(mu, nu, p), 1.0 / p);
          EXPECT_LE(min_cost_lower_bound(mu, nu, kappa, p).value, w + 1e-7);
          EXPECT_LE(dual_upscaling_lower_bound(mu, nu, kappa, p).value, w + 1e-7);
          EXPECT_GE(weighted_cost_upper_bound(mu, nu, kappa, p).value, w - 1e-7);
          EXPECT_GE(primal_upscaling_upper_bound(mu, nu, kappa, p, default_xi(g)).value, w - 1e-7);
          ++cases;
        }
      }
    }
  }
  EXPECT_EQ(cases, 24);
}

TEST(QuantBounds, PaddedGridsStayValid) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 8; ++t) {
    const GridSpec g({7, 5});
    const double p = 1.0 + t % 2;
    const GridMeasure mu = testing::random_measure(g, rng, 0.2), nu = testing::random_measure(g, rng, 0.2);
    const double w = std::pow(testing::exact_cost(mu, nu, p), 1.0 / p);
    EXPECT_LE(min_cost_lower_bound(mu, nu, 2, p).value, w + 1e-7);
    EXPECT_LE(dual_upscaling_lower_bound(mu, nu, 2, p).value, w + 1e-7);
    EXPECT_GE(weighted_cost_upper_bound(mu, nu, 2, p).value, w - 1e-7);
    const PrimalUpscaling pu = primal_upscaling(mu, nu, 2, p, 1e-9);
    EXPECT_GE(pu.report.value, w - 1e-7);
    EXPECT_NEAR(pu.upscaled.total(), 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace wbounds
