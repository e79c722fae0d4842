#include "hyckn/functionals.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hyckn;

namespace {

// (N-1)/2 < s keeps every integral finite on the truncated grid
RadialFn expo(GridPtr g, double s) {
  return RadialFn::sample(std::move(g), [s](double t) { return std::exp(-s * t); });
}

}  // namespace

// agreement is limited by interpolating the exponential, not by the quadrature
TEST(Functionals, EnergiesAgainstOracle) {
  const auto g = build_grid(800, 30.0);
  const double s = 1.7;
  const RadialFn u = expo(g, s);
  for (double alpha : {0.0, 0.6, -0.5}) {
    const double ge = oracle::weighted_integral([&](double t) { return s * s * std::exp(-2 * s * t); }, alpha, 30.0, 3);
    EXPECT_NEAR(grad_energy(u, alpha, 3), ge, 1e-7 * ge);
    const double he = oracle::weighted_integral([&](double t) { return std::exp(-2 * s * t); }, alpha - 2.0, 30.0, 3);
    EXPECT_NEAR(hardy_energy(u, alpha, 3), he, 1e-7 * he);
  }
  const double lq = oracle::weighted_integral([&](double t) { return std::exp(-3.5 * s * t); }, 0.5, 30.0, 3);
  EXPECT_NEAR(lq_weighted(u, 0.5, 3.5, 3), lq, 1e-7 * lq);
}

TEST(Functionals, HardyInequalityOnRandomFunctions) {
  const auto g = build_grid(600, 40.0);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> c(-1, 1), s(1.3, 3.0);
  for (double alpha : {0.0, 1.0, 0.5}) {
    const double C = hardy_constant(3, alpha);
    for (int i = 0; i < 30; ++i) {
      const double c1 = c(rng), s1 = s(rng), s2 = s(rng);
      const RadialFn u = RadialFn::sample(g, [&](double t) { return std::exp(-s1 * t) + c1 * t * std::exp(-s2 * t); });
      EXPECT_GE(grad_energy(u, alpha, 3), C * hardy_energy(u, alpha, 3) * (1 - 1e-9));
    }
  }
}

TEST(Functionals, SpectralQuotientOfExponential) {
  // exp(-s t) has u' = -s u, so the quotient is s^2 on any interval
  const auto g = build_grid(800, 20.0);
  for (double s : {1.1, 1.5, 2.0}) EXPECT_NEAR(rayleigh_spectral(expo(g, s), 3), s * s, 1e-7 * s * s);
}

TEST(Functionals, ShiftedNormAndEnergy) {
  const auto g = build_grid(300, 25.0);
  const RadialFn u = expo(g, 1.8);
  const double n2 = shifted_norm_sq(u, 0.0, 0.1, 3);
  EXPECT_NEAR(n2, grad_energy(u, 0.0, 3) - 0.1 * hardy_energy(u, 0.0, 3), 1e-12 * n2);
  Params P;
  P.lambda = 0.1;
  EXPECT_NEAR(energy_I(u, P), 0.5 * n2 - lq_weighted(u, 0.0, 4.0, 3) / 4.0, 1e-12);
  P.q = 7.0;
  EXPECT_THROW(energy_I(u, P), DomainError);
}

TEST(Functionals, ChangeOfVariablesIdentity) {
  const auto g = build_grid(600, 40.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> al(-0.9, 2.0), ga(0.01, 1.0), s(1.3, 2.5);
  for (int i = 0; i < 10; ++i) {
    const double s1 = s(rng);
    const RadialFn w = RadialFn::sample(g, [&](double t) { return (1.0 + t) * std::exp(-s1 * t); });
    EXPECT_LT(cov_residual(w, al(rng), ga(rng), ga(rng), 3), 1e-6);
  }
  EXPECT_THROW(cov_residual(expo(g, 2.0), -1.5, 0.5, 0.5, 3), IntegrabilityError);
}

TEST(Functionals, QuotientRejectsZero) {
  const auto g = build_grid(100, 5.0);
  EXPECT_THROW(rayleigh_ckn(RadialFn::zero(g), 0.0, 0.0, 3), ZeroDenominatorError);
  EXPECT_THROW(rayleigh_spectral(RadialFn::zero(g), 3), ZeroDenominatorError);
}

TEST(Functionals, CknQuotientIsScaleInvariant) {
  const auto g = build_grid(300, 20.0);
  const RadialFn u = expo(g, 1.4);
  const double q1 = rayleigh_ckn(u, 0.2, 0.7, 3);
  EXPECT_NEAR(rayleigh_ckn(u.scaled(-3.7), 0.2, 0.7, 3), q1, 1e-12 * q1);
}

TEST(Functionals, EnergyReportFlagsTail) {
  const auto g = build_grid(200, 10.0);
  Params P;
  EXPECT_FALSE(energy_report(expo(g, 2.5), P).tail_warning);
  EXPECT_TRUE(energy_report(expo(g, 1.05), P).tail_warning);
}
