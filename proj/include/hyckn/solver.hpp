#pragma once

// Ground states of
//   -div(d^alpha grad_B u) - lambda d^(alpha-2) u = d^beta |u|^(q-2) u
// as minimizers of ||v||^2 on {int t^beta |v|^q dV = 1}, plus a shooting
// integrator for the radial ODE used as an independent check.

#include "hyckn/fem.hpp"
#include "hyckn/functionals.hpp"
#include "hyckn/geometry.hpp"
#include "hyckn/quadrature.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <boost/numeric/odeint.hpp>
#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyckn {

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TailError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadratic form t^alpha u'^2 - lambda t^(alpha-2) u^2 against the constraint int t^beta |u|^q.
struct QuotientProblem {
  int N = 3;
  double alpha = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  double q = 4.0;

  static QuotientProblem from(const Params& P) { return {P.N, P.alpha, P.lambda, P.beta, P.q}; }
  static QuotientProblem ckn(int N, double a, double b) {
    const double p = ckn_exponent(N, a, b);
    return {N, -2.0 * a, 0.0, -b * p, p};
  }
};

struct MinimizeOptions {
  double tol = 1e-8;            // relative projected-gradient norm
  int max_iter = 5000;
  bool newton = true;           // polish q > 2 problems with Newton on K u = g(u)
  double newton_switch = 1e-4;  // stationarity at which Newton takes over
  bool dirichlet = true;        // pin the node at T_max to zero
};

struct MinimizeResult {
  double mu = 0.0;
  RadialFn v;
  int iterations = 0;
  bool converged = false;
  double stationarity = 0.0;
  std::vector<double> history;
  std::string method;
};

namespace detail {

class QuotientSystem {
 public:
  QuotientSystem(const QuotientProblem& pb, GridPtr grid, bool dirichlet)
      : pb_(pb), grid_(std::move(grid)), n_(grid_->size()), m_(dirichlet ? n_ - 1 : n_),
        rule_(grid_->weighted_rule(pb.beta, pb.N)) {
    const fem::SpMat full = fem::shifted_stiffness(*grid_, pb.N, pb.alpha, pb.lambda);
    K_ = full.topLeftCorner(m_, m_);
    ldlt_.compute(K_);
    if (ldlt_.info() != Eigen::Success || !(ldlt_.vectorD().minCoeff() > 0.0))
      throw DomainError("quadratic form is not positive definite on this grid (lambda too large?)");
  }

  std::size_t free_size() const { return m_; }
  const fem::SpMat& K() const { return K_; }
  fem::Vec solveK(const fem::Vec& g) const { return ldlt_.solve(g); }

  std::vector<double> full(const fem::Vec& v) const {
    std::vector<double> u(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) u[i] = v[static_cast<Eigen::Index>(i)];
    return u;
  }
  fem::Vec free(std::span<const double> u) const { return fem::to_vec(u).head(static_cast<Eigen::Index>(m_)); }

  double mass(const fem::Vec& v) const { return fem::power_mass(rule_, full(v), pb_.q); }
  fem::Vec load(const fem::Vec& v) const {
    return fem::power_load(rule_, full(v), pb_.q, n_).head(static_cast<Eigen::Index>(m_));
  }
  fem::SpMat jacobian(const fem::Vec& v) const {
    const fem::SpMat J = K_ - fem::SpMat(fem::power_jacobian(rule_, full(v), pb_.q, n_).topLeftCorner(m_, m_));
    return J;
  }
  double knorm2(const fem::Vec& v) const { return v.dot(K_ * v); }

  RadialFn fn(const fem::Vec& v) const { return RadialFn(grid_, full(v)); }

 private:
  QuotientProblem pb_;
  GridPtr grid_;
  std::size_t n_, m_;
  WeightedRule rule_;
  fem::SpMat K_;
  Eigen::SimplicialLDLT<fem::SpMat> ldlt_;
};

// v normalized, mu = v.Kv, w = K^{-1} g(v); returns ||v - mu w||_K / ||v||_K.
inline double stationarity(const QuotientSystem& S, const fem::Vec& v, double& mu, fem::Vec& w) {
  mu = S.knorm2(v);
  w = S.solveK(S.load(v));
  const fem::Vec r = v - mu * w;
  return std::sqrt(std::max(0.0, S.knorm2(r)) / mu);
}

// Newton on K u = g(u) started from mu^{1/(q-2)} v; false if it stalls or collapses.
inline bool newton_polish(const QuotientSystem& S, double q, fem::Vec& v, int& iters) {
  const double mu0 = S.knorm2(v);
  fem::Vec u = std::pow(mu0, 1.0 / (q - 2.0)) * v;
  const double size0 = S.knorm2(u);
  auto res_norm = [&](const fem::Vec& x) {
    const fem::Vec F = S.K() * x - S.load(x);
    return std::sqrt(std::max(0.0, F.dot(S.solveK(F))));
  };
  double rn = res_norm(u);
  bool ok = false;
  for (int k = 0; k < 60; ++k) {
    ++iters;
    const fem::Vec F = S.K() * u - S.load(u);
    Eigen::SparseLU<fem::SpMat> lu;
    lu.compute(S.jacobian(u));
    if (lu.info() != Eigen::Success) return false;
    const fem::Vec d = lu.solve(F);
    if (lu.info() != Eigen::Success || !d.allFinite()) return false;
    double step = 1.0;
    fem::Vec trial = u - d;
    double rt = res_norm(trial);
    for (int h = 0; h < 20 && !(rt < rn); ++h) {
      step *= 0.5;
      trial = u - step * d;
      rt = res_norm(trial);
    }
    if (!(rt < rn) && rn > 1e-15 * std::sqrt(size0)) return false;
    const double dn = std::sqrt(std::max(0.0, S.knorm2(step * d)));
    u = trial;
    rn = std::min(rn, rt);
    if (S.knorm2(u) < 1e-6 * size0) return false;  // fell onto the trivial solution
    if (dn <= 1e-14 * std::sqrt(S.knorm2(u))) {
      ok = true;
      break;
    }
  }
  if (!ok) return false;
  v = u / std::pow(S.mass(u), 1.0 / q);
  return true;
}

}  // namespace detail

/// Minimizes v.Kv over {int t^beta |v|^q dV = 1} from init. Inverse iteration
/// v <- K^{-1} g(v), renormalized, decreases the quotient at every step; for
/// q > 2 Newton finishes once the iterate is close.
inline MinimizeResult minimize_rayleigh(const QuotientProblem& pb, GridPtr grid, const RadialFn& init,
                                        const MinimizeOptions& opts = {}) {
  if (!(pb.q >= 2.0)) throw DomainError("minimize_quotient: need q >= 2");
  if (init.grid_ptr() != grid && init.size() != grid->size())
    throw std::invalid_argument("minimize_quotient: init lives on a different grid");
  const detail::QuotientSystem S(pb, grid, opts.dirichlet);
  fem::Vec v = S.free(init.values());
  const double g0 = S.mass(v);
  if (!(g0 > kQuotientFloor) || !std::isfinite(g0)) throw DomainError("minimize_quotient: degenerate init");
  v /= std::pow(g0, 1.0 / pb.q);

  MinimizeResult res{0.0, init, 0, false, 0.0, {}, "inverse-iteration"};
  fem::Vec w;
  double mu = 0.0;
  double newton_at = opts.newton_switch;  // halves after each failed polish
  for (int it = 0; it < opts.max_iter; ++it) {
    const double s = detail::stationarity(S, v, mu, w);
    res.history.push_back(mu);
    res.stationarity = s;
    res.iterations = it;
    if (s < opts.tol) {
      res.converged = true;
      break;
    }
    if (opts.newton && pb.q > 2.0 && s < newton_at) {
      newton_at = 0.5 * s;
      fem::Vec trial = v;
      int extra = 0;
      if (detail::newton_polish(S, pb.q, trial, extra)) {
        double mu_t = 0.0;
        fem::Vec w_t;
        const double s_t = detail::stationarity(S, trial, mu_t, w_t);
        if (s_t < opts.tol && mu_t <= mu * (1.0 + 1e-6)) {
          v = trial;
          mu = mu_t;
          res.history.push_back(mu);
          res.stationarity = s_t;
          res.iterations = it + extra;
          res.converged = true;
          res.method = "inverse-iteration+newton";
          break;
        }
      }
    }
    const double gw = S.mass(w);
    if (!(gw > kQuotientFloor)) throw DomainError("minimize_quotient: iterate collapsed to zero");
    v = w / std::pow(gw, 1.0 / pb.q);
  }
  if (!res.converged) {
    mu = S.knorm2(v);
    res.iterations = opts.max_iter;
  }
  res.mu = mu;
  res.v = S.fn(v);
  return res;
}

/// Validated entry point; throws NonConvergenceError when opts.max_iter is exhausted.
inline MinimizeResult minimize_quotient(const Params& P, GridPtr grid, const RadialFn& init,
                                        const MinimizeOptions& opts = {}) {
  require_solve_params(P, "minimize_quotient");
  MinimizeResult r = minimize_rayleigh(QuotientProblem::from(P), std::move(grid), init, opts);
  if (!r.converged)
    throw NonConvergenceError("minimize_quotient: no convergence after " + std::to_string(opts.max_iter) +
                              " iterations (stationarity " + format_double(r.stationarity) + ")");
  return r;
}

/// u = mu^{1/(q-2)} v.
inline RadialFn scale_to_solution(const RadialFn& v, double mu, double q) {
  if (!(q > 2.0)) throw DomainError("scale_to_solution: need q > 2");
  if (!(mu > 0.0)) throw DomainError("scale_to_solution: need mu > 0");
  return v.scaled(std::pow(mu, 1.0 / (q - 2.0)));
}

/// t e^{-(N-1)t/2}.
inline RadialFn default_init(GridPtr grid, int N) {
  return RadialFn::sample(std::move(grid), [N](double t) { return t * std::exp(-0.5 * (N - 1) * t); });
}

struct SolveOptions {
  MinimizeOptions minimize;
  double residual_tol = 1e-6;
  bool full_space = true;   // require a negligible tail at T_max
  double tail_tol = 1e-8;   // |u| at 3/4 T_max relative to max |u|
  std::optional<RadialFn> init;
};

struct SolveResult {
  Params params;
  RadialFn u;
  double quotient = 0.0;
  double residual = 0.0;
  std::string method = "nehari";
  std::string detail;
  int iterations = 0;
  bool converged = false;
  bool positivity_ok = false;
  bool monotone = false;
  double nehari_gap = 0.0;
  double energy = 0.0;
  std::vector<double> history;
};

/// Positive radial ground state on grid with u(T_max) = 0.
inline SolveResult solve_ground_state(const Params& P, GridPtr grid, const SolveOptions& opts = {}) {
  require_solve_params(P, "solve_ground_state");
  const QuotientProblem pb = QuotientProblem::from(P);
  const RadialFn init = opts.init ? *opts.init : default_init(grid, P.N);

  // rough minimization, then sign removal, then polish
  MinimizeOptions rough = opts.minimize;
  rough.newton = false;
  rough.tol = std::max(opts.minimize.tol, opts.minimize.newton_switch);
  MinimizeResult r1 = minimize_rayleigh(pb, grid, init, rough);
  MinimizeResult r = minimize_rayleigh(pb, grid, r1.v.abs(), opts.minimize);

  SolveResult s{P, scale_to_solution(r.v, r.mu, P.q)};
  s.quotient = r.mu;
  s.iterations = r1.iterations + r.iterations;
  s.history = r1.history;
  s.history.insert(s.history.end(), r.history.begin(), r.history.end());
  s.detail = r.method;

  const RadialFn& u = s.u;
  s.residual = weak_residual(u, P);
  const double nrm = shifted_norm_sq(u, P.alpha, P.lambda, P.N);
  const double lq = lq_weighted(u, P.beta, P.q, P.N);
  s.nehari_gap = std::fabs(nrm - lq) / nrm;
  s.energy = 0.5 * nrm - lq / P.q;

  double umin = std::numeric_limits<double>::infinity();
  s.monotone = true;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    umin = std::min(umin, u[i]);
    if (u[i + 1] > u[i] * (1.0 + 1e-12)) s.monotone = false;
  }
  s.positivity_ok = umin > 0.0;
  s.converged = r.converged && s.residual < opts.residual_tol;

  if (opts.full_space) {
    const double far = u(0.75 * grid->t_max());
    if (std::fabs(far) > opts.tail_tol * u.max_abs())
      throw TailError("solve_ground_state: solution has not decayed by T_max = " + format_double(grid->t_max()) +
                      " (|u(3T/4)|/max|u| = " + format_double(std::fabs(far) / u.max_abs()) +
                      "); increase --tmax");
  }
  return s;
}

inline nlohmann::ordered_json to_json(const SolveResult& s) {
  nlohmann::ordered_json j = params_json(s.params);
  j["method"] = s.method;
  j["algorithm"] = s.detail;
  j["quotient"] = s.quotient;
  j["residual"] = s.residual;
  j["nehari_gap"] = s.nehari_gap;
  j["energy"] = s.energy;
  j["iterations"] = s.iterations;
  j["converged"] = s.converged;
  j["positivity_ok"] = s.positivity_ok;
  j["monotone"] = s.monotone;
  j["grid_n"] = s.u.size();
  j["tmax"] = s.u.grid().t_max();
  return j;
}

// ---- mountain-pass geometry ----------------------------------------------

struct MountainPass {
  std::vector<std::array<double, 2>> samples;  // (t, I(t u))
  double norm_sq = 0.0;
  double lq = 0.0;
  double t_star = 0.0;  // argmax of I(t u)
  double t_root = 0.0;  // positive zero of I(t u)
  bool small_sphere_positive = false;
  bool eventually_negative = false;
};

inline MountainPass mountain_pass_profile(const RadialFn& u, const Params& P, std::span<const double> ts) {
  MountainPass m;
  m.norm_sq = shifted_norm_sq(u, P.alpha, P.lambda, P.N);
  m.lq = lq_weighted(u, P.beta, P.q, P.N);
  if (!(m.norm_sq > 0.0 && m.lq > 0.0)) throw ZeroDenominatorError("mountain_pass_profile: u vanishes");
  m.t_star = std::pow(m.norm_sq / m.lq, 1.0 / (P.q - 2.0));
  m.t_root = std::pow(P.q * m.norm_sq / (2.0 * m.lq), 1.0 / (P.q - 2.0));
  bool pos = true, neg = false;
  for (double t : ts) {
    const double I = 0.5 * t * t * m.norm_sq - std::pow(std::fabs(t), P.q) * m.lq / P.q;
    m.samples.push_back({t, I});
    if (t > 0.0 && t < m.t_root && !(I > 0.0)) pos = false;
    if (t > m.t_root && I < 0.0) neg = true;
  }
  m.small_sphere_positive = pos;
  m.eventually_negative = neg;
  return m;
}

// ---- shooting --------------------------------------------------------------

struct ShootOptions {
  double eps = 1e-6;      // start radius
  double rel_tol = 1e-12;
  double abs_tol = 1e-20;
  double t_tol = 1e-8;    // tolerance on the first zero
  int max_bisect = 200;
};

struct Shot {
  double s0 = 0.0;
  double first_zero = std::numeric_limits<double>::infinity();
  double slope_at_zero = 0.0;
  std::vector<double> t, u, du;  // accepted steps
};

namespace detail {

using State = std::array<double, 2>;

struct RadialOde {
  int N;
  double alpha, beta, lambda, q;
  double coeff(double t) const { return std::pow(t, alpha) * std::exp((N - 1) * log_sinh(t)); }
  void operator()(const State& y, State& dy, double t) const {
    const double S = std::exp((N - 1) * log_sinh(t));
    const double u = y[0];
    dy[0] = y[1] / (std::pow(t, alpha) * S);
    dy[1] = -(lambda * std::pow(t, alpha - 2.0) * u + std::pow(t, beta) * std::pow(std::fabs(u), q - 2.0) * u) * S;
  }
};

// Leading behaviour at t = eps: u = s0 t^nu (1 + ...), flux = t^alpha S u'.
inline State taylor_start(const RadialOde& ode, double s0, double eps) {
  State y{};
  if (ode.lambda == 0.0) {
    const double e = ode.beta - ode.alpha + 2.0;
    const double c = std::pow(s0, ode.q - 1.0) / ((ode.beta + ode.N) * e);
    y[0] = s0 - c * std::pow(eps, e);
    y[1] = ode.coeff(eps) * (-c * e * std::pow(eps, e - 1.0));
  } else {
    const double m = ode.alpha + ode.N - 2.0;
    const double nu = 0.5 * (-m + std::sqrt(m * m - 4.0 * ode.lambda));
    y[0] = s0 * std::pow(eps, nu);
    y[1] = ode.coeff(eps) * s0 * nu * std::pow(eps, nu - 1.0);
  }
  return y;
}

}  // namespace detail

/// Integrates the radial ODE from eps up to the first zero of u or t_cap.
inline Shot shoot(const Params& P, double s0, double t_cap, const ShootOptions& opts = {}) {
  namespace ode = boost::numeric::odeint;
  if (!(s0 > 0.0)) throw DomainError("shoot: need s0 > 0");
  if (!(t_cap > opts.eps)) throw DomainError("shoot: need t_cap > eps");
  if (!(P.alpha - 2.0 < P.beta) && P.lambda == 0.0) throw DomainError("shoot: need alpha-2 < beta");
  const detail::RadialOde sys{P.N, P.alpha, P.beta, P.lambda, P.q};
  auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol, ode::runge_kutta_dopri5<detail::State>());
  detail::State y = detail::taylor_start(sys, s0, opts.eps);
  Shot shot;
  shot.s0 = s0;
  auto record = [&](double t, const detail::State& x) {
    shot.t.push_back(t);
    shot.u.push_back(x[0]);
    shot.du.push_back(x[1] / sys.coeff(t));
  };
  record(opts.eps, y);
  stepper.initialize(y, opts.eps, 1e-3 * opts.eps);
  int steps = 0;
  while (stepper.current_time() < t_cap) {
    if (++steps > 2000000) throw NonConvergenceError("shoot: step budget exhausted (stiff?)");
    const auto [t0, t1] = stepper.do_step(sys);
    const detail::State& x1 = stepper.current_state();
    if (!std::isfinite(x1[0]) || !std::isfinite(x1[1])) throw NonConvergenceError("shoot: integration blew up");
    if (x1[0] <= 0.0) {
      // locate the zero with the dense output
      double lo = t0, hi = t1;
      detail::State x;
      for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, x);
        (x[0] > 0.0 ? lo : hi) = mid;
      }
      stepper.calc_state(hi, x);
      shot.first_zero = hi;
      shot.slope_at_zero = x[1] / sys.coeff(hi);
      record(hi, x);
      return shot;
    }
    if (t1 > t_cap) {
      detail::State x;
      stepper.calc_state(t_cap, x);
      record(t_cap, x);
      return shot;
    }
    record(t1, x1);
  }
  return shot;
}

struct BallShot {
  Shot shot;
  std::vector<std::array<double, 2>> brackets;  // (s0, first zero) in evaluation order
  bool converged = false;
};

/// Bisection in log s0 until the first zero of u lands at T.
inline BallShot shoot_dirichlet(const Params& P, double T, const ShootOptions& opts = {}) {
  if (!(T > 0.0)) throw DomainError("shoot_ball: need T > 0");
  const double cap = 2.0 * T;
  BallShot out;
  auto zero_at = [&](double s) {
    Shot sh = shoot(P, s, cap, opts);
    out.brackets.push_back({s, sh.first_zero});
    return sh;
  };
  double lo = 1.0, hi = 1.0;
  Shot s = zero_at(1.0);
  // larger s0 moves the zero inward
  if (s.first_zero > T) {
    for (int k = 0; k < 200 && s.first_zero > T; ++k) s = zero_at(hi *= 2.0);
    lo = hi / 2.0;
  } else {
    for (int k = 0; k < 200 && s.first_zero <= T; ++k) s = zero_at(lo /= 2.0);
    hi = lo * 2.0;
  }
  if (!(s.first_zero != T)) {
    out.shot = s;
    out.converged = true;
    return out;
  }
  for (int k = 0; k < opts.max_bisect; ++k) {
    const double mid = std::sqrt(lo * hi);
    s = zero_at(mid);
    if (std::fabs(s.first_zero - T) < opts.t_tol) {
      out.converged = true;
      break;
    }
    (s.first_zero > T ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  if (!out.converged) throw NonConvergenceError("shoot_ball: bisection did not place the zero at T");
  out.shot = std::move(s);
  return out;
}

/// Trajectory from shooting value s0 sampled at the nodes of a grid on [0, T].
/// Values past the first zero are set to 0.
inline RadialFn shoot_ball(const Params& P, double T, double s0, GridPtr grid, const ShootOptions& opts = {}) {
  namespace ode = boost::numeric::odeint;
  if (std::fabs(grid->t_max() - T) > 1e-12 * T) throw std::invalid_argument("shoot_ball: grid must end at T");
  const detail::RadialOde sys{P.N, P.alpha, P.beta, P.lambda, P.q};
  const auto nodes = grid->nodes();
  std::vector<double> vals(nodes.size(), 0.0);
  auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol, ode::runge_kutta_dopri5<detail::State>());
  detail::State y = detail::taylor_start(sys, s0, opts.eps);
  stepper.initialize(y, opts.eps, 1e-3 * opts.eps);
  std::size_t i = 0;
  // nodes inside (0, eps) take the series value
  for (; i < nodes.size() && nodes[i] <= opts.eps; ++i) vals[i] = detail::taylor_start(sys, s0, nodes[i])[0];
  bool crossed = false;
  while (i < nodes.size() && !crossed) {
    const auto [t0, t1] = stepper.do_step(sys);
    (void)t0;
    for (; i < nodes.size() && nodes[i] <= t1; ++i) {
      detail::State x;
      stepper.calc_state(nodes[i], x);
      if (x[0] <= 0.0) {
        crossed = true;
        break;
      }
      vals[i] = x[0];
    }
    if (stepper.current_state()[0] <= 0.0) crossed = true;
  }
  return RadialFn(std::move(grid), std::move(vals));
}

}  // namespace hyckn
