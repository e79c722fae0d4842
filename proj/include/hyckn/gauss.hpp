#pragma once

// Gauss-type rules on [-1,1] from the Jacobi three-term recurrence
// (Golub-Welsch). Jacobi weight is (1-x)^a (1+x)^b.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hyckn::gauss {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

inline Rule jacobi(int m, double a, double b) {
  if (m < 1) throw std::invalid_argument("gauss::jacobi: need at least one point");
  if (!(a > -1.0 && b > -1.0)) throw std::invalid_argument("gauss::jacobi: exponents must exceed -1");

  Eigen::VectorXd diag(m);
  Eigen::VectorXd sub(std::max(m - 1, 1));
  const double ab = a + b;
  diag(0) = (b - a) / (ab + 2.0);
  for (int n = 1; n < m; ++n) {
    const double s = 2.0 * n + ab;
    diag(n) = (b * b - a * a) / (s * (s + 2.0));
  }
  for (int n = 1; n < m; ++n) {
    const double s = 2.0 * n + ab;
    double beta;
    if (n == 1)
      beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    else
      beta = 4.0 * n * (n + a) * (n + b) * (n + ab) / (s * s * (s + 1.0) * (s - 1.0));
    sub(n - 1) = std::sqrt(beta);
  }

  Rule rule;
  rule.x.resize(m);
  rule.w.resize(m);
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                              std::lgamma(ab + 2.0));
  if (m == 1) {
    rule.x[0] = diag(0);
    rule.w[0] = mu0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(m - 1), Eigen::ComputeEigenvectors);
  for (int i = 0; i < m; ++i) {
    rule.x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.w[i] = mu0 * v0 * v0;
  }
  return rule;
}

inline Rule legendre(int m) { return jacobi(m, 0.0, 0.0); }

// Weights of the interpolatory rule on given nodes, integrating each
// Lagrange basis polynomial exactly.
inline std::vector<double> interpolatory_weights(const std::vector<double>& nodes) {
  const int n = static_cast<int>(nodes.size());
  const Rule gl = legendre(n / 2 + 2);
  std::vector<double> w(n, 0.0);
  for (std::size_t q = 0; q < gl.x.size(); ++q) {
    for (int j = 0; j < n; ++j) {
      double l = 1.0;
      for (int k = 0; k < n; ++k)
        if (k != j) l *= (gl.x[q] - nodes[k]) / (nodes[j] - nodes[k]);
      w[j] += gl.w[q] * l;
    }
  }
  return w;
}

/// Gauss-Lobatto-Legendre rule with m >= 2 points, endpoints included.
inline Rule lobatto(int m) {
  if (m < 2) throw std::invalid_argument("gauss::lobatto: need at least two points");
  Rule r;
  r.x.push_back(-1.0);
  if (m > 2) {
    const Rule inner = jacobi(m - 2, 1.0, 1.0);
    r.x.insert(r.x.end(), inner.x.begin(), inner.x.end());
  }
  r.x.push_back(1.0);
  r.w = interpolatory_weights(r.x);
  return r;
}

/// Gauss-Radau rule with m >= 1 points, +1 included and -1 excluded.
inline Rule radau_right(int m) {
  if (m < 1) throw std::invalid_argument("gauss::radau_right: need at least one point");
  Rule r;
  if (m > 1) r.x = jacobi(m - 1, 1.0, 0.0).x;
  r.x.push_back(1.0);
  r.w = interpolatory_weights(r.x);
  return r;
}

}  // namespace hyckn::gauss
