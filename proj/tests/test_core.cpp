#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "jtphase/core/error.hpp"
#include "jtphase/core/grid.hpp"
#include "jtphase/core/mat2.hpp"
#include "jtphase/core/quadrature.hpp"
#include "jtphase/core/special.hpp"
#include "jtphase/core/summation.hpp"
#include "oracles/oracles.hpp"

using namespace jtphase;

// --- summation ----------------------------------------------------------

TEST(CompensatedSum, RecoversSmallTermsLostByNaiveSum) {
  CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1.0);
}

TEST(CompensatedSum, SpanHelperMatchesIncremental) {
  const std::vector<double> v{0.1, 0.2, 0.3, -0.6};
  CompensatedSum s;
  for (double x : v) s += x;
  EXPECT_EQ(compensated_sum(v), s.value());
  // exact sum of the four binary values is 2^-55, not 0
  EXPECT_EQ(s.value(), std::ldexp(1.0, -55));
}

// --- erf --------------------------------------------------------------------

TEST(ErfStable, SpecExamples) {
  EXPECT_EQ(erf_stable(0.0), 0.0);
  EXPECT_TRUE(std::signbit(erf_stable(-0.0)));
  EXPECT_NEAR(erf_stable(1.0), 0.8427007929497149, 1e-16);
  EXPECT_NEAR(erf_stable(6.0), 1.0, 1e-15);
}

TEST(ErfStable, MatchesSeriesOracleToRelative1e14) {
  for (double x = -6.0; x <= 6.0; x += 0.0625) {
    if (x == 0.0) continue;
    const double ref = oracle::erf_series(x);
    EXPECT_LE(std::abs(erf_stable(x) - ref), 1e-14 * std::abs(ref)) << "x = " << x;
  }
}

TEST(ErfStable, OddSymmetryExact) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int i = 0; i < 500; ++i) {
    const double x = u(rng);
    EXPECT_EQ(erf_stable(-x), -erf_stable(x));
  }
}

// --- grids ---------------------------------------------------------------

TEST(Grid1D, RejectsInvalidConstruction) {
  EXPECT_THROW(Grid1D(0.0, 1.0, 2), InvalidArgument);
  EXPECT_THROW(Grid1D(1.0, 1.0, 10), InvalidArgument);
  EXPECT_THROW(Grid1D(2.0, 1.0, 10), InvalidArgument);
  EXPECT_THROW(Grid1D(0.0, std::numeric_limits<double>::infinity(), 10), InvalidArgument);
}

TEST(Grid1D, UniformNodesAndTrapezoidWeights) {
  const Grid1D g(-3.0, 5.0, 801);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.01);
  EXPECT_EQ(g.node(0), -3.0);
  EXPECT_EQ(g.node(800), 5.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    wsum += g.weight(i);
    if (i) {
      EXPECT_GT(g.node(i), g.node(i - 1));
      EXPECT_NEAR(g.node(i) - g.node(i - 1), g.spacing(), 1e-13);
    }
  }
  EXPECT_NEAR(wsum, 8.0, 1e-12);
}

TEST(MassParam, DefaultAndValidation) {
  EXPECT_EQ(MassParam{}.value(), 1.0);
  EXPECT_EQ(MassParam(2.5).value(), 2.5);
  EXPECT_THROW(MassParam(0.0), InvalidArgument);
  EXPECT_THROW(MassParam(-1.0), InvalidArgument);
}

class RadialRules : public ::testing::TestWithParam<RadialRule> {};

TEST_P(RadialRules, NodesInsideAndWeightsPositive) {
  const auto g = RadialGrid::make(GetParam(), 10.0, 401);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_GE(g.node(i), 0.0);
    EXPECT_LE(g.node(i), 10.0);
    EXPECT_GT(g.weight(i), 0.0);
  }
}

TEST_P(RadialRules, GaussianMomentTo1e12) {
  const auto g = RadialGrid::make(GetParam(), 10.0, 401);
  const double v = integrate_radial([](double q) { return q * std::exp(-q * q); }, g);
  EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST_P(RadialRules, CoshIntegralMatchesClosedForm) {
  const auto g = RadialGrid::make(GetParam(), 12.0, 801);
  const double v = integrate_radial([](double q) { return q * std::exp(-q * q) * std::cosh(2.0 * q); }, g);
  const double ref = oracle::d_closed(1.0);
  EXPECT_NEAR(v, ref, 1e-11 * ref);
  EXPECT_NEAR(ref, 2.5300784692787, 1e-12);
  // independent fine-step brute force agrees with the closed form
  const double bf =
      oracle::simpson([](double q) { return q * std::exp(-q * q) * std::cosh(2.0 * q); }, 0.0, 12.0, 200000);
  EXPECT_NEAR(bf, ref, 1e-12);
}

TEST_P(RadialRules, ZeroIntegrand) {
  const auto g = RadialGrid::make(GetParam(), 3.0, 101);
  EXPECT_EQ(integrate_radial([](double) { return 0.0; }, g), 0.0);
}

TEST_P(RadialRules, DoublingNodesChangesSmoothIntegralsBy1e10) {
  for (double qmax : {5.0, 12.0, 20.0}) {
    const auto a = RadialGrid::make(GetParam(), qmax, 401);
    const auto b = RadialGrid::make(GetParam(), qmax, 801);
    auto f = [](double q) { return q * std::exp(-(q - 3.0) * (q - 3.0)) * (1.0 + std::sin(q)); };
    const double va = integrate_radial(f, a);
    const double vb = integrate_radial(f, b);
    EXPECT_LE(std::abs(va - vb), 1e-10 * std::abs(vb)) << "q_max = " << qmax;
  }
}

INSTANTIATE_TEST_SUITE_P(Core, RadialRules,
                         ::testing::Values(RadialRule::gauss_legendre_mapped, RadialRule::composite_simpson));

TEST(RadialGrid, RejectsBadParameters) {
  EXPECT_THROW(RadialGrid::composite_simpson(5.0, 100), InvalidArgument);
  EXPECT_THROW(RadialGrid::gauss_legendre(0.0, 100), InvalidArgument);
  EXPECT_THROW(RadialGrid::gauss_legendre(-1.0, 100), InvalidArgument);
}

TEST(RadialGrid, GaussLegendreExactForPolynomials) {
  const auto g = RadialGrid::gauss_legendre(2.0, 8);
  // degree 15 is integrated exactly by 8 points
  const double v = integrate_radial([](double q) { return std::pow(q, 15); }, g);
  EXPECT_NEAR(v, std::pow(2.0, 16) / 16.0, 1e-10);
}

TEST(Quadrature, NonFiniteIntegrandNamesTheNode) {
  const auto g = RadialGrid::composite_simpson(4.0, 5);
  try {
    (void)integrate_radial([](double q) { return q == 2.0 ? std::nan("") : 1.0; }, g);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("node 2"), std::string::npos) << e.what();
  }
}

TEST(Quadrature, DeterministicBitIdentical) {
  const auto g = RadialGrid::gauss_legendre(15.0, 600);
  auto f = [](double q) { return q * std::exp(-(q - 4.0) * (q - 4.0)); };
  const double a = integrate_radial(f, g);
  const double b = integrate_radial(f, RadialGrid::gauss_legendre(15.0, 600));
  EXPECT_EQ(a, b);
}

// --- 2x2 algebra -----------------------------------------------------------

TEST(Mat2, PauliAlgebraExact) {
  EXPECT_EQ(SIGMA_X * SIGMA_X, IDENTITY);
  EXPECT_EQ(SIGMA_Z * SIGMA_Z, IDENTITY);
  EXPECT_EQ(SIGMA_Y * SIGMA_Y, IDENTITY);
  const Mat2c anti = SIGMA_X * SIGMA_Z + SIGMA_Z * SIGMA_X;
  EXPECT_EQ(anti, Mat2c{});
  EXPECT_EQ(SIGMA_X * SIGMA_Y, cplx(0.0, 1.0) * SIGMA_Z);
}

TEST(Mat2Exp, SpecExamples) {
  EXPECT_EQ(mat2_exp_hermitian(Mat2c{}), IDENTITY);
  const Mat2c e = mat2_exp_hermitian(std::log(2.0) * SIGMA_Z);
  EXPECT_NEAR(e(0, 0).real(), 2.0, 1e-15);
  EXPECT_NEAR(e(1, 1).real(), 0.5, 1e-15);
  EXPECT_EQ(e(0, 1), cplx{});
  EXPECT_EQ(e(1, 0), cplx{});
}

TEST(Mat2Exp, RejectsNonHermitianAndNonFinite) {
  EXPECT_THROW(mat2_exp_hermitian(Mat2c{0.0, 1.0, 0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(mat2_exp_hermitian(Mat2c{cplx(0.0, 1.0), 0.0, 0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(mat2_exp_hermitian(Mat2c{std::nan(""), 0.0, 0.0, 0.0}), InvalidArgument);
}

TEST(Mat2Exp, MatchesTaylorOracleOnRandomHermitian) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double c = u(rng);
    const double vx = u(rng);
    const double vy = u(rng);
    const double vz = u(rng);
    const Mat2c m = c * IDENTITY + vx * SIGMA_X + vy * SIGMA_Y + vz * SIGMA_Z;
    const Mat2c exact = mat2_exp_hermitian(m);
    const Mat2c ref = oracle::taylor_expm(m);
    EXPECT_LE((exact - ref).max_abs(), 1e-12 * ref.max_abs()) << "trial " << trial;
    // positive definite: trace > 0, det > 0, Hermitian
    EXPECT_GT(exact.trace().real(), 0.0);
    EXPECT_GT(exact.determinant().real(), 0.0);
    EXPECT_TRUE(is_hermitian(exact));
  }
}
