#include "hyckn/geometry.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hyckn;

namespace {

bool has(const std::vector<Violation>& v, const std::string& name) {
  for (const auto& x : v)
    if (x.constraint == name) return true;
  return false;
}

}  // namespace

TEST(Geometry, ClosedFormsAgainstLongDouble) {
  for (double r : {1e-9, 1e-4, 0.1, 0.5, 0.9, 0.999999}) {
    const long double R = r;
    EXPECT_NEAR(rho(r), 2.0L / ((1.0L - R) * (1.0L + R)), 2e-15 * rho(r));
    EXPECT_NEAR(dist(r), std::log1p(2.0L * R / (1.0L - R)), 1e-14 * dist(r));
  }
}

TEST(Geometry, SinhIdentityAndInverse) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double r = U(rng) * 0.999999 + 1e-9;
    EXPECT_NEAR(rho(r) * r, std::sinh(dist(r)), 1e-13 * std::sinh(dist(r)));
    EXPECT_NEAR(r_of_d(dist(r)), r, 1e-13);
  }
}

TEST(Geometry, DistanceBounds) {
  for (double r : {1e-8, 0.01, 0.3, 0.7, 0.99}) {
    const auto c = dist_bounds_check(r);
    EXPECT_TRUE(c.lower_ok);
    EXPECT_TRUE(c.upper_ok);
  }
  EXPECT_THROW(dist(1.0), DomainError);
  EXPECT_THROW(dist(-0.1), DomainError);
}

TEST(Geometry, FactorsAreNonNegative) {
  for (double r : {1e-10, 1e-6, 1e-3, 0.05, 0.2, 0.5, 0.8, 0.99, 0.999999}) {
    const GeomFactors g = geom_factors(r);
    const double rr = g.rho * r;
    EXPECT_GE(g.A, -1e-14);
    EXPECT_GE(g.B, 1.0 - 1e-15);
    EXPECT_GE(g.dist * rr - g.A, -1e-12);
    EXPECT_GE(g.dist * rr * g.B - (g.B * g.B - 1.0), -1e-12 * g.B * g.B);
    // 1 + rho r^2 = A + B
    EXPECT_NEAR(1.0 + g.rho * r * r, g.A + g.B, 1e-13 * (g.A + g.B));
  }
}

TEST(Geometry, SeriesAndDirectBranchesMeet) {
  // B = sinh t / t on both sides of the series switch
  for (double t : {0.0999, 0.1, 0.1001}) EXPECT_NEAR(sinhc(t), std::sinh(t) / t, 1e-15);
}

TEST(Geometry, DivFactorMatchesFiniteDifference) {
  // div(f(r) x) = N f + r f'
  for (int N : {3, 4, 6})
    for (double gam : {-1.0, 0.0, 0.7})
      for (double r : {0.1, 0.4, 0.8}) {
        auto f = [&](double x) { return std::pow(dist(x), gam) * std::pow(rho(x), N); };
        const double fd = N + r * oracle::d1(f, r, 1e-4) / f(r);
        EXPECT_NEAR(div_factor(gam, r, N), fd, 1e-7 * std::fabs(fd));
        auto g = [&](double x) { return std::pow(dist(x), gam) * std::pow(rho(x), N - 2); };
        const double fdg = N + r * oracle::d1(g, r, 1e-4) / g(r);
        EXPECT_NEAR(div_factor_grad(gam, r, N), fdg, 1e-7 * std::fabs(fdg));
      }
}

TEST(Geometry, Constants) {
  EXPECT_DOUBLE_EQ(hardy_constant(3, 0.0), 0.25);
  EXPECT_DOUBLE_EQ(hardy_constant(3, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(spectral_floor(3), 1.0);
  EXPECT_DOUBLE_EQ(sobolev_exponent(3), 6.0);
  EXPECT_DOUBLE_EQ(critical_exponent(3, 0.0, 0.0), 6.0);
  EXPECT_DOUBLE_EQ(critical_exponent(3, 1.0, 0.5), 3.5);
  EXPECT_DOUBLE_EQ(ckn_exponent(3, 0.0, 1.0), 2.0);
  EXPECT_NEAR(sphere_area(3), 4.0 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_area(4), 2.0 * std::numbers::pi * std::numbers::pi, 1e-13);
}

TEST(Geometry, ValidationCkn) {
  Params P;
  P.b = 2.0;
  EXPECT_TRUE(has(validate(P, Mode::ckn), "b-a<=1"));
  P.b = -0.5;
  EXPECT_TRUE(has(validate(P, Mode::ckn), "0<=b-a"));
  P.b = 0.0;
  P.a = 0.5;
  P.b = 0.6;
  EXPECT_TRUE(has(validate(P, Mode::ckn), "a<(N-2)/2"));
  P.a = 0.0;
  P.b = 1.0;
  EXPECT_TRUE(validate(P, Mode::ckn).empty());
  P.N = 2;
  EXPECT_TRUE(has(validate(P, Mode::ckn), "N>=3"));
}

TEST(Geometry, ValidationSolve) {
  Params P;
  EXPECT_TRUE(validate(P, Mode::solve).empty());
  P.q = 6.0;
  EXPECT_TRUE(has(validate(P, Mode::solve), "q<2_alpha^beta"));
  P.q = 2.0;
  EXPECT_TRUE(has(validate(P, Mode::solve), "q>2"));
  P.q = 4.0;
  P.lambda = 0.25;
  EXPECT_TRUE(has(validate(P, Mode::solve), "lambda<hardy"));
  P.lambda = 0.0;
  P.beta = -2.0;
  EXPECT_TRUE(has(validate(P, Mode::solve), "alpha-2<=beta"));
  P.beta = 0.0;
  P.alpha = -1.5;
  EXPECT_TRUE(has(validate(P, Mode::solve), "alpha-2>-N"));
  P.alpha = 0.0;
  P.beta = std::nan("");
  EXPECT_TRUE(has(validate(P, Mode::solve), "finite"));
}

TEST(Geometry, ValidationPohozaev) {
  Params P;
  P.p = 7.0;
  EXPECT_TRUE(validate(P, Mode::pohozaev).empty());
  P.lambda = 0.1;
  EXPECT_TRUE(has(validate(P, Mode::pohozaev), "lambda=0"));
  P.lambda = 0.0;
  P.alpha = 2.0;
  P.beta = -0.5;
  EXPECT_TRUE(has(validate(P, Mode::pohozaev), "alpha-2<=beta"));
}
