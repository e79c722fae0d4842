#pragma once

// Closed-form radial geometry of the Poincare ball model.
//
// Every quantity is available in the Euclidean radius r in [0,1) and in the
// geodesic radius t = d(r) = log((1+r)/(1-r)). The two are tied by
// r = tanh(t/2), rho(r) r = sinh(t) and rho(r) r^2 = sinh(t) tanh(t/2).

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyckn {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Problem parameters shared by the inequality, solver and Pohozaev modes.
struct Params {
  int N = 3;
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double q = 4.0;
  double p = 6.0;
  double a = 0.0;
  double b = 0.0;
};

enum class Mode { ckn, solve, pohozaev };

struct Violation {
  std::string constraint;
  std::string message;
};

/// (rho, d, A, B) at one radius; see geom_factors().
struct GeomFactors {
  double rho = 0.0;
  double dist = 0.0;
  double A = 0.0;
  double B = 1.0;
};

namespace detail {

inline void require_ball(double r, const char* what) {
  if (!(r >= 0.0 && r < 1.0))
    throw DomainError(std::string(what) + ": radius must lie in [0,1), got " + std::to_string(r));
}

inline void require_open_ball(double r, const char* what) {
  if (!(r > 0.0 && r < 1.0))
    throw DomainError(std::string(what) + ": radius must lie in (0,1), got " + std::to_string(r));
}

// (sinh t - t)/t, accurate for all t >= 0.
inline double sinhc_minus_one(double t) {
  if (t < 0.1) {
    const double t2 = t * t;
    // t^2/3! + t^4/5! + ... + t^12/13!
    double term = t2 / 6.0;
    double sum = term;
    for (int k = 2; k <= 6; ++k) {
      term *= t2 / double((2 * k) * (2 * k + 1));
      sum += term;
    }
    return sum;
  }
  return (std::sinh(t) - t) / t;
}

}  // namespace detail

/// Conformal factor rho(r) = 2/(1-r^2).
inline double rho(double r) {
  detail::require_ball(r, "rho");
  return 2.0 / ((1.0 - r) * (1.0 + r));
}

/// Hyperbolic distance from the origin, log((1+r)/(1-r)).
inline double dist(double r) {
  detail::require_ball(r, "dist");
  return 2.0 * std::atanh(r);
}

/// Inverse of dist(): r = tanh(t/2).
inline double r_of_d(double t) {
  if (!(t >= 0.0)) throw DomainError("r_of_d: geodesic radius must be >= 0");
  return std::tanh(0.5 * t);
}

/// sinh(t)/t, equal to B = rho r / d.
inline double sinhc(double t) { return 1.0 + detail::sinhc_minus_one(t); }

/// Factors in the geodesic coordinate t > 0 (t = 0 returns the limits).
inline GeomFactors geom_factors_t(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("geom_factors_t: need finite t >= 0");
  GeomFactors g;
  const double r = std::tanh(0.5 * t);
  g.rho = 2.0 / ((1.0 - r) * (1.0 + r));
  g.dist = t;
  const double bm1 = detail::sinhc_minus_one(t);
  g.B = 1.0 + bm1;
  // rho r^2 = sinh(t) tanh(t/2) = cosh(t) - 1
  const double rho_r2 = t < 0.1 ? 2.0 * std::pow(std::sinh(0.5 * t), 2) : std::cosh(t) - 1.0;
  g.A = rho_r2 - bm1;
  return g;
}

/// (rho, d, A, B) with A = 1 + rho r^2 - rho r/d and B = rho r/d, for r in (0,1).
inline GeomFactors geom_factors(double r) {
  detail::require_open_ball(r, "geom_factors");
  GeomFactors g = geom_factors_t(dist(r));
  g.rho = rho(r);
  return g;
}

struct DistBoundsCheck {
  bool lower_ok = false;
  bool upper_ok = false;
};

/// Checks 2r <= d(r) <= 2r/(1-r^2).
inline DistBoundsCheck dist_bounds_check(double r) {
  detail::require_ball(r, "dist_bounds_check");
  const double d = dist(r);
  return {2.0 * r <= d, d <= rho(r) * r};
}

/// N + N rho r^2 + gamma B, i.e. div(d^gamma rho^N x)/(d^gamma rho^N).
inline double div_factor(double gamma, double r, int N) {
  const GeomFactors g = geom_factors(r);
  return N + N * g.rho * r * r + gamma * g.B;
}

/// N + (N-2) rho r^2 + gamma B, i.e. div(d^gamma rho^(N-2) x)/(d^gamma rho^(N-2)).
inline double div_factor_grad(double gamma, double r, int N) {
  const GeomFactors g = geom_factors(r);
  return N + (N - 2) * g.rho * r * r + gamma * g.B;
}

/// Weighted critical exponent 2(N+beta)/(N-2+alpha).
inline double critical_exponent(int N, double alpha, double beta) {
  const double den = N - 2 + alpha;
  if (!(den > 0.0)) throw DomainError("critical_exponent: N-2+alpha must be positive");
  if (!(N + beta > 0.0)) throw DomainError("critical_exponent: N+beta must be positive");
  return 2.0 * (N + beta) / den;
}

/// Sharp weighted Hardy constant ((N-2+alpha)/2)^2.
inline double hardy_constant(int N, double alpha) {
  const double h = 0.5 * (N - 2 + alpha);
  return h * h;
}

/// Sobolev exponent 2N/(N-2).
inline double sobolev_exponent(int N) { return 2.0 * N / (N - 2.0); }

/// Bottom of the spectrum of -Delta on the ball, (N-1)^2/4.
inline double spectral_floor(int N) { return 0.25 * (N - 1.0) * (N - 1.0); }

/// CKN exponent 2N/(N-2+2(b-a)).
inline double ckn_exponent(int N, double a, double b) { return 2.0 * N / (N - 2.0 + 2.0 * (b - a)); }

/// Area of the unit sphere S^{N-1} in R^N.
inline double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

/// Every violated admissibility constraint for the given mode; empty means ok.
inline std::vector<Violation> validate(const Params& P, Mode mode) {
  std::vector<Violation> out;
  auto fail = [&](std::string name, std::string msg) { out.push_back({std::move(name), std::move(msg)}); };

  if (P.N < 3) fail("N>=3", "dimension must be at least 3");
  if (!std::isfinite(P.alpha) || !std::isfinite(P.beta) || !std::isfinite(P.lambda) ||
      !std::isfinite(P.q) || !std::isfinite(P.p) || !std::isfinite(P.a) || !std::isfinite(P.b))
    fail("finite", "all parameters must be finite");

  switch (mode) {
    case Mode::ckn: {
      const double amax = 0.5 * (P.N - 2);
      if (!(P.a < amax)) fail("a<(N-2)/2", "a must be below (N-2)/2");
      if (!(P.b - P.a >= 0.0)) fail("0<=b-a", "b-a must be non-negative");
      if (!(P.b - P.a <= 1.0)) fail("b-a<=1", "b-a must not exceed 1");
      break;
    }
    case Mode::solve: {
      if (!(P.alpha - 2 > -P.N)) fail("alpha-2>-N", "need alpha-2 > -N");
      if (!(P.alpha - 2 < P.beta))
        fail("alpha-2<=beta",
             "solve mode needs alpha-2 < beta strictly; at equality the exponent interval (2, 2_alpha^beta) is empty");
      if (!(P.lambda < hardy_constant(P.N, P.alpha)))
        fail("lambda<hardy", "lambda must be below ((N-2+alpha)/2)^2");
      if (!(P.q > 2.0)) fail("q>2", "q must exceed 2");
      if (P.N - 2 + P.alpha > 0 && P.N + P.beta > 0) {
        if (!(P.q < critical_exponent(P.N, P.alpha, P.beta)))
          fail("q<2_alpha^beta", "q must be below the critical exponent 2(N+beta)/(N-2+alpha)");
      }
      break;
    }
    case Mode::pohozaev: {
      if (!(P.alpha - 2 > -P.N)) fail("alpha-2>-N", "need alpha-2 > -N");
      if (!(P.alpha - 2 <= P.beta)) fail("alpha-2<=beta", "need alpha-2 <= beta");
      if (!(P.p > 2.0)) fail("p>2", "p must exceed 2");
      if (P.lambda != 0.0) fail("lambda=0", "the Pohozaev problem carries no Hardy term");
      break;
    }
  }
  return out;
}

}  // namespace hyckn
