#pragma once

// Independent reference values for the tests. Nothing here calls into the
// library's quadrature or solver code.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

namespace oracle {

inline double sphere_area(int N) { return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N); }

/// omega_{N-1} int_0^T t^gamma f(t) sinh^{N-1}(t) dt by double-exponential quadrature.
template <class F>
double weighted_integral(F&& f, double gamma, double T, int N) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto g = [&](double t) {
    return t <= 0.0 ? 0.0 : f(t) * std::exp(gamma * std::log(t) + (N - 1) * std::log(std::sinh(t)));
  };
  return sphere_area(N) * ts.integrate(g, 0.0, T, 1e-14);
}

/// Euclidean radial integral omega int_0^inf g(r) r^{N-1} dr.
template <class F>
double euclidean_radial(F&& g, int N) {
  boost::math::quadrature::exp_sinh<double> es;
  return sphere_area(N) * es.integrate([&](double r) { return g(r) * std::pow(r, N - 1); }, 0.0,
                                       std::numeric_limits<double>::infinity(), 1e-13);
}

/// Sobolev quotient of the bubble (1+|x|^2)^{-1/2} computed directly in R^3.
inline double euclidean_sobolev_r3() {
  auto u = [](double r) { return 1.0 / std::sqrt(1.0 + r * r); };
  auto du = [](double r) { return -r * std::pow(1.0 + r * r, -1.5); };
  const double num = euclidean_radial([&](double r) { return du(r) * du(r); }, 3);
  const double den = euclidean_radial([&](double r) { return std::pow(u(r), 6); }, 3);
  return num / std::cbrt(den);
}

/// omega int_0^R h(r) dr with r-coordinate adaptive quadrature.
template <class F>
double r_integral(F&& h, double R, int N) {
  return sphere_area(N) * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(h, 0.0, R, 12, 1e-13);
}

/// Fourth-order central difference.
template <class F>
double d1(F&& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

}  // namespace oracle
