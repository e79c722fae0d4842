#include "hyckn/quadrature.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace hyckn;

TEST(Quadrature, BallVolumeClosedForm) {
  const auto g = build_grid(256, 1.0);
  const double vol = integrate_weighted([](double) { return 1.0; }, 0.0, *g, 3);
  EXPECT_NEAR(vol, std::numbers::pi * (std::sinh(2.0) - 2.0), 1e-12);
  EXPECT_NEAR(vol, 5.1109327, 1e-7);
}

TEST(Quadrature, SingularWeightsAgainstTanhSinh) {
  const auto g = build_grid(300, 8.0);
  for (int N : {3, 4, 5})
    for (double gam : {-N + 0.3, -1.7, -0.5, 0.0, 0.8, 2.5}) {
      auto f = [](double t) { return std::exp(-1.5 * t) * (2.0 + std::sin(3.0 * t)); };
      const double ref = oracle::weighted_integral(f, gam, 8.0, N);
      EXPECT_NEAR(integrate_weighted(f, gam, *g, N), ref, 1e-9 * std::fabs(ref)) << "N=" << N << " gamma=" << gam;
    }
}

TEST(Quadrature, RCoordinateRuleAgrees) {
  for (double gam : {-2.5, -1.0, 0.0, 1.3}) {
    auto f = [](double t) { return std::exp(-2.5 * t) * (1.0 + t * t); };
    const double T = 10.0;
    const double ref = oracle::weighted_integral(f, gam, T, 3);
    EXPECT_NEAR(integrate_weighted_r(f, gam, T, 3), ref, 1e-9 * std::fabs(ref));
  }
}

TEST(Quadrature, RejectsNonIntegrableWeight) {
  const auto g = build_grid(64, 2.0);
  EXPECT_THROW(g->weighted_rule(-3.0, 3), IntegrabilityError);
  EXPECT_THROW(integrate_weighted_r([](double) { return 1.0; }, -3.5, 1.0, 3), IntegrabilityError);
  EXPECT_NO_THROW(g->weighted_rule(-2.9, 3));
}

TEST(Quadrature, GridShape) {
  const auto g = build_grid(200, 20.0);
  const auto t = g->nodes();
  // first panel carries right Radau nodes, so the origin is not a node
  EXPECT_GT(t.front(), 0.0);
  EXPECT_LT(t.front(), 1e-3);
  EXPECT_DOUBLE_EQ(t.back(), 20.0);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i], t[i - 1]);
  EXPECT_EQ((g->size() - 1) % g->degree(), 0u);
  EXPECT_THROW(build_grid(8, 1.0), std::invalid_argument);
  EXPECT_THROW(build_grid(100, -1.0), std::invalid_argument);
  EXPECT_THROW(build_grid(32, 1.0), std::invalid_argument);  // layers do not fit
}

TEST(Quadrature, InterpolantReproducesPolynomials) {
  Grading gr;
  gr.degree = 4;
  const auto g = build_grid(120, 3.0, gr);
  auto p = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t * t - 0.1 * t * t * t * t; };
  auto dp = [](double t) { return -2.0 + 1.5 * t * t - 0.4 * t * t * t; };
  const RadialFn u = RadialFn::sample(g, p);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double t = U(rng);
    EXPECT_NEAR(u(t), p(t), 1e-11);
    EXPECT_NEAR(u.derivative(t), dp(t), 1e-9);
  }
}

TEST(Quadrature, ConvergesWithRefinement) {
  auto f = [](double t) { return std::exp(-t) * std::cos(t); };
  const double ref = oracle::weighted_integral([&](double t) { return f(t) * f(t); }, 0.0, 6.0, 3);
  double prev = INFINITY;
  for (int n : {64, 128, 256}) {
    const RadialFn u = RadialFn::sample(build_grid(n, 6.0), f);
    const auto rule = u.grid().weighted_rule(0.0, 3);
    const auto v = rule.values(u.values());
    const double err = std::fabs(rule.sum([&](std::size_t q) { return v[q] * v[q]; }) - ref);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-9);
}

TEST(Quadrature, WeightFaultScalesOnePanel) {
  const auto g = build_grid(100, 2.0);
  const auto f = g->with_weight_fault(g->panel_count() - 1, 1.5);
  const double a = integrate_weighted([](double) { return 1.0; }, 0.0, *g, 3);
  const double b = integrate_weighted([](double) { return 1.0; }, 0.0, *f, 3);
  EXPECT_GT(std::fabs(a - b), 1e-8 * a);
}

TEST(Quadrature, CsvRoundTripIsExact) {
  const auto g = build_grid(96, 5.0);
  const RadialFn u = RadialFn::sample(g, [](double t) { return std::exp(-0.3 * t) / 3.0; });
  std::stringstream ss;
  write_csv(ss, u);
  EXPECT_EQ(ss.str().rfind("# schema=1\nt,u\n", 0), 0u);
  const RadialFn v = read_radial_csv(ss, g);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(u[i], v[i]);
  std::stringstream bad("# schema=1\nt,u\n0,1\n");
  EXPECT_THROW(read_radial_csv(bad, g), std::runtime_error);
}

TEST(Quadrature, TailIndicator) {
  const auto g = build_grid(100, 10.0);
  const RadialFn fast = RadialFn::sample(g, [](double t) { return std::exp(-3.0 * t); });
  const RadialFn slow = RadialFn::sample(g, [](double t) { return std::exp(-0.5 * t); });
  EXPECT_LT(tail_indicator(fast, 3), 1e-16);
  EXPECT_GT(tail_indicator(slow, 3), 1.0);
}
