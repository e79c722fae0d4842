#pragma once

// Assembly of the discrete forms on a RadialGrid. The unknowns are the nodal
// values of a RadialFn; every matrix is banded with half-bandwidth = degree.

#include "hyckn/quadrature.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <span>
#include <vector>

namespace hyckn::fem {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// sum_q c_q w_q b_i(q) b_j(q), with b = basis values or t-derivatives.
inline SpMat assemble(const WeightedRule& rule, bool derivative, std::size_t n, std::span<const double> coeff = {}) {
  const int k = rule.degree();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(rule.size() * (k + 1) * (k + 1));
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double w = rule.weights()[q] * (coeff.empty() ? 1.0 : coeff[q]);
    if (w == 0.0) continue;
    const auto b = derivative ? rule.dphi(q) : rule.phi(q);
    const std::size_t base = static_cast<std::size_t>(rule.panel(q)) * k;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j) trip.emplace_back(base + i, base + j, w * b[i] * b[j]);
  }
  SpMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Matrix of u -> int t^alpha u'^2 dV - lambda int t^(alpha-2) u^2 dV.
inline SpMat shifted_stiffness(const RadialGrid& grid, int N, double alpha, double lambda) {
  SpMat K = assemble(grid.weighted_rule(alpha, N), true, grid.size());
  if (lambda != 0.0) K -= lambda * assemble(grid.weighted_rule(alpha - 2.0, N), false, grid.size());
  return K;
}

/// Load vector of the power term: g_i = int t^beta |u|^(q-2) u phi_i dV.
inline Vec power_load(const WeightedRule& rule, std::span<const double> u, double q, std::size_t n) {
  const int k = rule.degree();
  const auto uq = rule.values(u);
  Vec g = Vec::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < rule.size(); ++s) {
    const double v = uq[s];
    const double f = rule.weights()[s] * std::pow(std::fabs(v), q - 2.0) * v;
    const auto b = rule.phi(s);
    const std::size_t base = static_cast<std::size_t>(rule.panel(s)) * k;
    for (int i = 0; i <= k; ++i) g[static_cast<Eigen::Index>(base + i)] += f * b[i];
  }
  return g;
}

/// int t^beta |u|^q dV.
inline double power_mass(const WeightedRule& rule, std::span<const double> u, double q) {
  const auto uq = rule.values(u);
  return rule.sum([&](std::size_t s) { return std::pow(std::fabs(uq[s]), q); });
}

/// Jacobian of power_load: (q-1) int t^beta |u|^(q-2) phi_i phi_j dV.
inline SpMat power_jacobian(const WeightedRule& rule, std::span<const double> u, double q, std::size_t n) {
  const auto uq = rule.values(u);
  std::vector<double> c(uq.size());
  for (std::size_t s = 0; s < uq.size(); ++s) c[s] = (q - 1.0) * std::pow(std::fabs(uq[s]), q - 2.0);
  return assemble(rule, false, n, c);
}

inline Vec to_vec(std::span<const double> u) {
  return Eigen::Map<const Vec>(u.data(), static_cast<Eigen::Index>(u.size()));
}

}  // namespace hyckn::fem
