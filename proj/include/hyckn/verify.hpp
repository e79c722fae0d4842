#pragma once

// Invariant checks behind `hyckn verify`. Each check reports its worst
// violation against a tolerance; random samples come from a fixed seed.

#include "hyckn/functionals.hpp"
#include "hyckn/geometry.hpp"
#include "hyckn/pohozaev.hpp"
#include "hyckn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace hyckn::verify {

struct CheckResult {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Options {
  int N = 3;
  int samples = 10000;        // radii per geometry scan
  int functions = 40;         // random functions per quotient check
  int grid_n = 600;
  double tmax = 40.0;
  std::uint64_t seed = 20240611;
  int fault_panel = -1;       // test hook: scale the weights of one panel
  double fault_factor = 1.0;
};

inline const std::vector<std::string>& check_groups() {
  static const std::vector<std::string> g{"geometry", "quadrature", "hardy", "spectral", "cov", "positivity"};
  return g;
}

namespace detail {

inline CheckResult make(std::string name, double worst, double tol) {
  return {std::move(name), worst, tol, worst <= tol};
}

inline GridPtr grid(const Options& o, int n, double T, const Grading& g = {}) {
  GridPtr p = build_grid(n, T, g);
  if (o.fault_panel >= 0) p = p->with_weight_fault(std::min(o.fault_panel, p->panel_count() - 1), o.fault_factor);
  return p;
}

inline std::vector<double> radii(int n) {
  std::vector<double> r;
  const double top = 0.999999;
  for (int i = 1; i <= n / 2; ++i) r.push_back(top * i / (n / 2));
  const double lo = std::log(1e-12), hi = std::log(top);
  for (int i = 0; i < n - n / 2; ++i) r.push_back(std::exp(lo + (hi - lo) * i / (n - n / 2 - 1.0)));
  return r;
}

// sum_k c_k t^j_k e^{-s_k t}: smooth, decaying faster than e^{-(N-1)t/2}
inline RadialFn random_fn(GridPtr g, std::mt19937_64& rng, int N, bool vanish_at_origin) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0), rate(0.6 * (N - 1) + 0.1, 3.0);
  std::uniform_int_distribution<int> pw(vanish_at_origin ? 1 : 0, 3);
  std::vector<std::array<double, 3>> terms(3);
  for (auto& t : terms) t = {coef(rng), double(pw(rng)), rate(rng)};
  terms[0][0] = 1.0;
  return RadialFn::sample(std::move(g), [&](double t) {
    double s = 0.0;
    for (const auto& k : terms) s += k[0] * std::pow(t, k[1]) * std::exp(-k[2] * t);
    return s;
  });
}

}  // namespace detail

inline std::vector<CheckResult> geometry_checks(const Options& o) {
  double sinh_err = 0.0, inv_err = 0.0, bound_err = 0.0, factor_err = 0.0;
  for (double r : detail::radii(o.samples)) {
    const double d = dist(r);
    const double rr = rho(r) * r;
    sinh_err = std::max(sinh_err, std::fabs(rr - std::sinh(d)) / std::sinh(d));
    inv_err = std::max(inv_err, std::fabs(r_of_d(d) - r));
    bound_err = std::max({bound_err, 2.0 * r - d, d - rr});
    const GeomFactors g = geom_factors(r);
    factor_err = std::max({factor_err, -g.A, 1.0 - g.B, g.A - d * rr, (g.B * g.B - 1.0) - d * rr * g.B});
  }
  return {detail::make("geometry.sinh_identity", sinh_err, 1e-13), detail::make("geometry.inverse", inv_err, 1e-12),
          detail::make("geometry.distance_bounds", std::max(0.0, bound_err), 1e-12),
          detail::make("geometry.factor_signs", std::max(0.0, factor_err), 1e-12)};
}

inline std::vector<CheckResult> quadrature_checks(const Options& o) {
  const auto g = detail::grid(o, 256, 1.0);
  const double exact = std::numbers::pi * (std::sinh(2.0) - 2.0);
  const double vol = integrate_weighted([](double) { return 1.0; }, 0.0, *g, 3);
  const double gold = std::fabs(vol - exact) / exact;

  const auto h = detail::grid(o, 400, 12.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double s = 2.2 + 0.2 * k, gam = -1.5 + 0.4 * k;
    auto f = [&](double t) { return std::exp(-s * t) * (1.0 + std::cos(k * t)); };
    const double a = integrate_weighted(f, gam, *h, o.N);
    const double b = integrate_weighted_r(f, gam, h->t_max(), o.N);
    worst = std::max(worst, std::fabs(a - b) / std::fabs(b));
  }
  return {detail::make("quadrature.ball_volume", gold, 1e-8), detail::make("quadrature.coordinates", worst, 1e-8)};
}

inline CheckResult hardy_check(const Options& o, double alpha) {
  const auto g = detail::grid(o, o.grid_n, o.tmax);
  std::mt19937_64 rng(o.seed + static_cast<std::uint64_t>(10 * alpha));
  const double C = hardy_constant(o.N, alpha);
  double worst = 0.0;
  for (int i = 0; i < o.functions; ++i) {
    const RadialFn u = detail::random_fn(g, rng, o.N, false);
    const double ratio = grad_energy(u, alpha, o.N) / (C * hardy_energy(u, alpha, o.N));
    worst = std::max(worst, 1.0 - ratio);
  }
  return detail::make("hardy.alpha=" + format_double(alpha), std::max(0.0, worst), 1e-6);
}

inline CheckResult spectral_check(const Options& o) {
  const auto g = detail::grid(o, o.grid_n, o.tmax);
  std::mt19937_64 rng(o.seed + 7);
  const double floor = spectral_floor(o.N);
  double worst = 0.0;
  for (int i = 0; i < o.functions; ++i) {
    const RadialFn u = detail::random_fn(g, rng, o.N, false);
    worst = std::max(worst, 1.0 - rayleigh_spectral(u, o.N) / floor);
  }
  return detail::make("spectral.floor", std::max(0.0, worst), 1e-6);
}

inline CheckResult cov_check(const Options& o) {
  const auto g = detail::grid(o, o.grid_n, o.tmax);
  std::mt19937_64 rng(o.seed + 11);
  std::uniform_real_distribution<double> al(2.0 - o.N + 0.1, 2.0), ga(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const RadialFn w = detail::random_fn(g, rng, o.N, false);
    const double a = al(rng);
    double g1 = ga(rng), g2 = ga(rng);
    g1 = std::max(g1, 1e-3);
    g2 = std::max(g2, 1e-3);
    worst = std::max(worst, cov_residual(w, a, g1, g2, o.N));
  }
  return detail::make("cov.identity", worst, 1e-6);
}

/// Parameter sets with p >= max{2*, 2_alpha^beta}, -N < alpha-2 <= beta, N >= alpha-1.
inline std::vector<Params> positivity_parameter_set() {
  std::vector<Params> out;
  auto add = [&](int N, double alpha, double beta, double p) {
    Params P;
    P.N = N;
    P.alpha = alpha;
    P.beta = beta;
    P.p = p;
    out.push_back(P);
  };
  add(3, 0.0, 0.0, 6.0);
  add(3, 0.0, 0.0, 8.0);
  add(3, 1.0, 0.0, 6.0);
  add(3, 0.5, -1.0, 6.0);
  add(3, -0.5, -2.5, 6.0);
  add(3, 2.0, 1.0, 7.0);
  add(4, 0.0, 0.0, 4.0);
  add(4, 1.5, 0.5, 5.0);
  add(5, -2.0, -4.0, 3.5);
  add(5, 3.0, 2.0, 4.0);
  return out;
}

inline std::vector<CheckResult> positivity_checks(const Options& o) {
  double worst = 0.0;
  for (const Params& P : positivity_parameter_set()) {
    const ScanSummary s = positivity_scan(P, o.samples);
    worst = std::max({worst, -s.min_bracket, -s.min_laplacian});
  }
  Params edge;
  edge.p = 6.0;
  const double zero = positivity_scan(edge, o.samples).max_abs_bracket;
  return {detail::make("positivity.factors", std::max(0.0, worst), 1e-10),
          detail::make("positivity.critical_cancellation", zero, 1e-14)};
}

/// Runs the named groups (all when empty) in a fixed order.
inline std::vector<CheckResult> run_checks(const std::vector<std::string>& groups, const Options& o = {}) {
  for (const auto& g : groups)
    if (std::find(check_groups().begin(), check_groups().end(), g) == check_groups().end())
      throw std::invalid_argument("unknown check group: " + g);
  auto want = [&](const std::string& g) {
    return groups.empty() || std::find(groups.begin(), groups.end(), g) != groups.end();
  };
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> v) { out.insert(out.end(), v.begin(), v.end()); };
  if (want("geometry")) append(geometry_checks(o));
  if (want("quadrature")) append(quadrature_checks(o));
  if (want("hardy")) append({hardy_check(o, 0.0), hardy_check(o, 1.0)});
  if (want("spectral")) append({spectral_check(o)});
  if (want("cov")) append({cov_check(o)});
  if (want("positivity")) append(positivity_checks(o));
  return out;
}

}  // namespace hyckn::verify
