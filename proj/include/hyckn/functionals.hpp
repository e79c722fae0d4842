#pragma once

// Weighted energies, quotients and the change-of-variables check for radial
// functions. In the geodesic coordinate |grad_B u| = |du/dt| and the volume
// element is omega_{N-1} sinh^{N-1}(t) dt, so every energy is a 1D integral.

#include "hyckn/fem.hpp"
#include "hyckn/geometry.hpp"
#include "hyckn/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hyckn {

class ZeroDenominatorError : public DomainError {
 public:
  using DomainError::DomainError;
};

inline constexpr double kQuotientFloor = 1e-300;
inline constexpr double kCovFloor = 1e-12;

/// int t^alpha u'(t)^2 dV.
inline double grad_energy(const RadialFn& u, double alpha, int N) {
  if (!(alpha > 2.0 - N))
    throw IntegrabilityError("grad_energy: need alpha > 2-N (alpha = " + std::to_string(alpha) + ")");
  const WeightedRule rule = u.grid().weighted_rule(alpha, N);
  const auto du = rule.derivs(u.values());
  return rule.sum([&](std::size_t q) { return du[q] * du[q]; });
}

/// int t^(alpha-2) u^2 dV.
inline double hardy_energy(const RadialFn& u, double alpha, int N) {
  if (!(alpha - 2.0 > -N))
    throw IntegrabilityError("hardy_energy: need alpha-2 > -N (alpha = " + std::to_string(alpha) + ")");
  const WeightedRule rule = u.grid().weighted_rule(alpha - 2.0, N);
  const auto v = rule.values(u.values());
  return rule.sum([&](std::size_t q) { return v[q] * v[q]; });
}

/// int t^beta |u|^q dV, i.e. ||u||_{beta,q}^q.
inline double lq_weighted(const RadialFn& u, double beta, double q, int N) {
  if (!(beta > -N)) throw IntegrabilityError("lq_weighted: need beta > -N (beta = " + std::to_string(beta) + ")");
  if (!(q >= 1.0)) throw DomainError("lq_weighted: need q >= 1");
  return fem::power_mass(u.grid().weighted_rule(beta, N), u.values(), q);
}

/// grad_energy - lambda * hardy_energy.
inline double shifted_norm_sq(const RadialFn& u, double alpha, double lambda, int N) {
  if (!(lambda < hardy_constant(N, alpha)))
    throw DomainError("shifted_norm_sq: lambda must be below the Hardy constant");
  const double g = grad_energy(u, alpha, N);
  return lambda == 0.0 ? g : g - lambda * hardy_energy(u, alpha, N);
}

inline void require_solve_params(const Params& P, const char* what) {
  const auto v = validate(P, Mode::solve);
  if (!v.empty()) throw DomainError(std::string(what) + ": invalid parameters, violates " + v.front().constraint);
}

/// I(u) = ||u||^2/2 - (1/q) int t^beta |u|^q dV.
inline double energy_I(const RadialFn& u, const Params& P) {
  require_solve_params(P, "energy_I");
  return 0.5 * shifted_norm_sq(u, P.alpha, P.lambda, P.N) - lq_weighted(u, P.beta, P.q, P.N) / P.q;
}

/// max_i |I'(u) phi_i| / ||phi_i|| over the nodal basis, the node at T_max excluded.
inline double weak_residual(const RadialFn& u, const Params& P) {
  require_solve_params(P, "weak_residual");
  const RadialGrid& g = u.grid();
  const std::size_t n = g.size();
  const fem::SpMat K = fem::shifted_stiffness(g, P.N, P.alpha, P.lambda);
  const fem::Vec F = K * fem::to_vec(u.values()) - fem::power_load(g.weighted_rule(P.beta, P.N), u.values(), P.q, n);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double kii = K.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (kii > 0.0) worst = std::max(worst, std::fabs(F[static_cast<Eigen::Index>(i)]) / std::sqrt(kii));
  }
  return worst;
}

/// (int t^(-2a) u'^2 dV) / (int t^(-bp) |u|^p dV)^(2/p), p = 2N/(N-2+2(b-a)).
inline double rayleigh_ckn(const RadialFn& u, double a, double b, int N) {
  Params P;
  P.N = N;
  P.a = a;
  P.b = b;
  const auto v = validate(P, Mode::ckn);
  if (!v.empty()) throw DomainError("rayleigh_ckn: invalid parameters, violates " + v.front().constraint);
  const double p = ckn_exponent(N, a, b);
  const double den = lq_weighted(u, -b * p, p, N);
  if (!(den > kQuotientFloor)) throw ZeroDenominatorError("rayleigh_ckn: denominator vanishes");
  return grad_energy(u, -2.0 * a, N) / std::pow(den, 2.0 / p);
}

/// int u'^2 dV / int u^2 dV.
inline double rayleigh_spectral(const RadialFn& u, int N) {
  const double den = lq_weighted(u, 0.0, 2.0, N);
  if (!(den > kQuotientFloor)) throw ZeroDenominatorError("rayleigh_spectral: denominator vanishes");
  return grad_energy(u, 0.0, N) / den;
}

/// Both sides of the substitution u = t^(alpha/2) w in the shifted Hardy form.
struct CovReport {
  double lhs = 0.0;     // int |grad u|^2 - g1 u^2/d^2 - g2 u^2
  double rhs = 0.0;     // the same quantity rewritten through w
  double grad_w = 0.0;  // int d^alpha |grad w|^2
  double residual = 0.0;
};

inline CovReport cov_report(const RadialFn& w, double alpha, double gamma1, double gamma2, int N) {
  if (!(alpha > 2.0 - N)) throw IntegrabilityError("cov_residual: need alpha > 2-N");
  if (!(gamma1 > 0.0 && gamma2 > 0.0)) throw DomainError("cov_residual: need gamma1, gamma2 > 0");
  // weight t^(alpha-2) carried by the rule; the brackets are smooth in t
  const WeightedRule rule = w.grid().weighted_rule(alpha - 2.0, N);
  const auto v = rule.values(w.values());
  const auto dv = rule.derivs(w.values());
  const auto t = rule.points();
  const double c1 = 0.25 * alpha * (alpha - 2.0);
  const double c2 = 0.5 * alpha * (N - 1);
  CovReport r;
  r.lhs = rule.sum([&](std::size_t q) {
    const double s = t[q] * dv[q] + 0.5 * alpha * v[q];
    return s * s - (gamma1 + gamma2 * t[q] * t[q]) * v[q] * v[q];
  });
  r.grad_w = rule.sum([&](std::size_t q) { return t[q] * t[q] * dv[q] * dv[q]; });
  r.rhs = r.grad_w + rule.sum([&](std::size_t q) {
    const double tq = t[q];
    const double pot = c1 + c2 / sinhc(tq) + gamma1 + gamma2 * tq * tq + c2 * tq * std::tanh(0.5 * tq);
    return -pot * v[q] * v[q];
  });
  r.residual = std::fabs(r.lhs - r.rhs) / (std::fabs(r.lhs) + std::fabs(r.rhs) + kCovFloor);
  return r;
}

inline double cov_residual(const RadialFn& w, double alpha, double gamma1, double gamma2, int N) {
  return cov_report(w, alpha, gamma1, gamma2, N).residual;
}

struct EnergyReport {
  Params params;
  double grad_energy = 0.0;
  double hardy_energy = 0.0;
  double lq_mass = 0.0;
  double shifted_norm_sq = 0.0;
  double I_value = 0.0;
  double tail_indicator = 0.0;
  bool tail_warning = false;
};

inline EnergyReport energy_report(const RadialFn& u, const Params& P, double tail_floor = kDefaultTailFloor) {
  require_solve_params(P, "energy_report");
  EnergyReport r;
  r.params = P;
  r.grad_energy = grad_energy(u, P.alpha, P.N);
  r.hardy_energy = hardy_energy(u, P.alpha, P.N);
  r.lq_mass = lq_weighted(u, P.beta, P.q, P.N);
  r.shifted_norm_sq = r.grad_energy - P.lambda * r.hardy_energy;
  r.I_value = 0.5 * r.shifted_norm_sq - r.lq_mass / P.q;
  r.tail_indicator = tail_indicator(u, P.N);
  r.tail_warning = r.tail_indicator > tail_floor;
  return r;
}

inline nlohmann::ordered_json params_json(const Params& P) {
  return {{"N", P.N}, {"alpha", P.alpha}, {"beta", P.beta}, {"lambda", P.lambda},
          {"q", P.q}, {"p", P.p},         {"a", P.a},       {"b", P.b}};
}

inline nlohmann::ordered_json to_json(const EnergyReport& r) {
  nlohmann::ordered_json j = params_json(r.params);
  j["grad_energy"] = r.grad_energy;
  j["hardy_energy"] = r.hardy_energy;
  j["lq_mass"] = r.lq_mass;
  j["shifted_norm_sq"] = r.shifted_norm_sq;
  j["I_value"] = r.I_value;
  j["tail_indicator"] = r.tail_indicator;
  j["tail_warning"] = r.tail_warning;
  return j;
}

}  // namespace hyckn
