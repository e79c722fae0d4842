#pragma once

// Pohozaev identity for radial Dirichlet solutions of
//   -div(d^alpha rho^(N-2) grad u) = d^beta rho^N |u|^(p-2) u   in |x| < R,
// written as boundary = bracket + laplacian with
//   boundary  = -1/2 int_{|x|=R} d^alpha rho^(N-2) |grad u|^2 x.nu dsigma
//   bracket   = int d^alpha |grad_B u|^2 (-1 + G_alpha/2 - F_beta/p) dV
//   laplacian = 1/(2p) int u^2 div(d^alpha rho^(N-2) grad F_beta) dx
// where F_beta = div(d^beta rho^N x)/(d^beta rho^N) and G_alpha is the same
// quotient with rho^(N-2).

#include "hyckn/functionals.hpp"
#include "hyckn/gauss.hpp"
#include "hyckn/geometry.hpp"
#include "hyckn/quadrature.hpp"
#include "hyckn/solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hyckn {

class CrossCheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geodesic ball {|x| < tanh(T/2)}.
struct BallDomain {
  double T = 1.0;

  explicit BallDomain(double T_) : T(T_) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("BallDomain: need T > 0");
  }
  double euclidean_radius() const { return std::tanh(0.5 * T); }
};

inline constexpr double kPohozaevFloor = 1e-300;
inline constexpr double kCrossTol = 1e-6;

namespace detail {

// ((N-2)/2 - N/p)(1 + rho r^2) + (alpha/2 - beta/p) B, with 1 + rho r^2 = A + B.
inline double bracket2_t(const Params& P, const GeomFactors& g) {
  const double c1 = 0.5 * (P.N - 2) - P.N / P.p;
  const double c2 = 0.5 * P.alpha - P.beta / P.p;
  return c1 * (g.A + g.B) + c2 * g.B;
}

// Delta^alpha(F_beta) / (d^(alpha-1) rho^N), with rho r = sinh t.
inline double laplacian_norm(const Params& P, const GeomFactors& g, double rho_r) {
  const int N = P.N;
  const double d = g.dist, A = g.A, B = g.B;
  const double bm = P.beta / rho_r;
  const double b2m1 = (B - 1.0) * (B + 1.0);
  return (N * A + (N - 1 + P.alpha) * B) * (N * d + bm * A) + N * d * B + bm * b2m1;
}

}  // namespace detail

/// -1 + G_alpha/2 - F_beta/p = ((N-2)/2 - N/p)(1 + rho r^2) + (alpha/2 - beta/p) rho r/d.
inline double bracket2(const Params& P, double r) {
  const GeomFactors g = geom_factors(r);
  return detail::bracket2_t(P, g);
}

/// Same quantity assembled from div_factor and div_factor_grad.
inline double bracket2_from_div(const Params& P, double r) {
  return -1.0 + 0.5 * div_factor_grad(P.alpha, r, P.N) - div_factor(P.beta, r, P.N) / P.p;
}

/// Normalized form (NA+(N-1+alpha)B)(Nd + beta A/(rho r)) + NdB + beta(B^2-1)/(rho r).
inline double laplacian_factor_normalized(const Params& P, double r) {
  const GeomFactors g = geom_factors(r);
  return detail::laplacian_norm(P, g, g.rho * r);
}

/// div(d^alpha rho^(N-2) grad F_beta), the unnormalized weighted Laplacian of div_factor.
inline double laplacian_factor(const Params& P, double r) {
  const GeomFactors g = geom_factors(r);
  return std::pow(g.dist, P.alpha - 1.0) * std::pow(g.rho, P.N) * detail::laplacian_norm(P, g, g.rho * r);
}

struct Hypotheses {
  bool p_supercritical = false;  // p >= max{2*, 2_alpha^beta}
  bool dimension_ok = false;  // N >= alpha - 1
  bool beta_integrable = false;  // beta > -N
  std::vector<std::string> warnings;
};

inline Hypotheses check_hypotheses(const Params& P) {
  Hypotheses h;
  const double crit = (P.N - 2 + P.alpha > 0.0 && P.N + P.beta > 0.0) ? critical_exponent(P.N, P.alpha, P.beta)
                                                                        : std::numeric_limits<double>::infinity();
  h.p_supercritical = P.p >= std::max(sobolev_exponent(P.N), crit);
  h.dimension_ok = P.N >= P.alpha - 1.0;
  h.beta_integrable = P.beta > -P.N;
  if (!h.p_supercritical) h.warnings.push_back("p<max(2*,2_alpha^beta): positivity of the bracket is not claimed");
  if (!h.dimension_ok) h.warnings.push_back("N<alpha-1: Laplacian factor positivity is not claimed");
  if (!h.beta_integrable) h.warnings.push_back("beta<=-N: Laplacian factor positivity is not claimed");
  return h;
}

struct ScanRow {
  double r, bracket2, laplacian_factor;
};

struct ScanSummary {
  std::vector<ScanRow> rows;
  double min_bracket = std::numeric_limits<double>::infinity();
  double min_laplacian = std::numeric_limits<double>::infinity();
  double max_abs_bracket = 0.0;
};

/// Half uniform, half log-spaced radii in (0, r_max).
inline std::vector<double> scan_radii(int samples, double r_max) {
  if (samples < 2) throw std::invalid_argument("scan: need at least 2 samples");
  if (!(r_max > 0.0 && r_max < 1.0)) throw DomainError("scan: r_max must lie in (0,1)");
  std::vector<double> r;
  const int nu = samples / 2, nl = samples - nu;
  for (int i = 1; i <= nu; ++i) r.push_back(r_max * i / (nu + 1.0));
  const double lo = std::log(1e-8 * r_max), hi = std::log(r_max);
  for (int i = 0; i < nl; ++i) r.push_back(std::exp(lo + (hi - lo) * i / (nl - 1.0)) * (1.0 - 1e-12));
  std::sort(r.begin(), r.end());
  return r;
}

inline ScanSummary positivity_scan(const Params& P, int samples = 10000, double r_max = 1.0 - 1e-6) {
  ScanSummary s;
  for (double r : scan_radii(samples, r_max)) {
    const ScanRow row{r, bracket2(P, r), laplacian_factor(P, r)};
    s.min_bracket = std::min(s.min_bracket, row.bracket2);
    s.min_laplacian = std::min(s.min_laplacian, row.laplacian_factor);
    s.max_abs_bracket = std::max(s.max_abs_bracket, std::fabs(row.bracket2));
    s.rows.push_back(row);
  }
  return s;
}

struct PohozaevTerms {
  double boundary = 0.0;
  double bracket = 0.0;
  double laplacian = 0.0;
};

struct PohozaevReport {
  Params params;
  double T = 0.0;
  double boundary_term = 0.0;
  double bracket_integral = 0.0;
  double laplacian_integral = 0.0;
  double residual = 0.0;
  PohozaevTerms euclidean;  // same terms from the r-coordinate rule
  double cross_disagreement = 0.0;
  double min_bracket = 0.0;
  double min_laplacian_factor = 0.0;
  Hypotheses hypotheses;
};

namespace detail {

inline double rel_gap(double x, double y) { return std::fabs(x - y) / (std::fabs(x) + std::fabs(y) + kPohozaevFloor); }

// omega int_0^R h(r) r^expo dr over the r-images of the grid panels: Gauss in r,
// Gauss-Jacobi with weight r^expo on the first panel.
template <class H>
double r_panels(const RadialGrid& grid, int N, double expo, int m, H&& h) {
  const auto br = grid.breaks();
  const gauss::Rule gl = gauss::legendre(m);
  const gauss::Rule gj = gauss::jacobi(m, 0.0, expo);
  double s = 0.0;
  const double r1 = std::tanh(0.5 * br[1]);
  for (int j = 0; j < m; ++j) s += std::pow(0.5 * r1, expo + 1.0) * gj.w[j] * h(0.5 * r1 * (gj.x[j] + 1.0));
  for (std::size_t e = 1; e + 1 < br.size(); ++e) {
    const double a = std::tanh(0.5 * br[e]), b = std::tanh(0.5 * br[e + 1]);
    for (int j = 0; j < m; ++j) {
      const double r = a + 0.5 * (b - a) * (gl.x[j] + 1.0);
      s += 0.5 * (b - a) * gl.w[j] * std::pow(r, expo) * h(r);
    }
  }
  return s * sphere_area(N);
}

// Terms in the geodesic coordinate.
inline PohozaevTerms terms_t(const RadialFn& u, const Params& P) {
  const RadialGrid& g = u.grid();
  const double T = g.t_max();
  PohozaevTerms out;
  const double ut = u.derivative(T);
  out.boundary = -0.5 * sphere_area(P.N) * std::pow(T, P.alpha) * std::exp(P.N * log_sinh(T)) * ut * ut;

  const WeightedRule ra = g.weighted_rule(P.alpha, P.N);
  const auto du = ra.derivs(u.values());
  const auto ta = ra.points();
  out.bracket = ra.sum([&](std::size_t q) { return du[q] * du[q] * bracket2_t(P, geom_factors_t(ta[q])); });

  const WeightedRule rl = g.weighted_rule(P.alpha - 1.0, P.N);
  const auto v = rl.values(u.values());
  const auto tl = rl.points();
  out.laplacian = rl.sum([&](std::size_t q) {
                    const GeomFactors gf = geom_factors_t(tl[q]);
                    return v[q] * v[q] * laplacian_norm(P, gf, std::sinh(tl[q]));
                  }) /
                  (2.0 * P.p);
  return out;
}

// Terms from the Euclidean formulas in r, with u_r = u'(d(r)) rho(r).
inline PohozaevTerms terms_r(const RadialFn& u, const Params& P) {
  const RadialGrid& g = u.grid();
  const int N = P.N;
  const int m = g.grading().rule_points() + 4;
  const double R = std::tanh(0.5 * g.t_max());
  PohozaevTerms out;
  {
    const double d = dist(R), rh = rho(R);
    const double ur = u.derivative(g.t_max()) * rh;
    // |x| = R sphere: area omega R^(N-1), x.nu = R
    out.boundary = -0.5 * sphere_area(N) * std::pow(R, N - 1) * std::pow(d, P.alpha) * std::pow(rh, N - 2) * ur * ur * R;
  }
  // d^alpha rho^(N-2) u_r^2 bracket2 r^(N-1), singular part r^(alpha+N-1)
  out.bracket = r_panels(g, N, P.alpha + N - 1, m, [&](double r) {
    const double d = dist(r), rh = rho(r);
    const double ur = u.derivative(std::min(d, g.t_max())) * rh;
    return std::pow(d / r, P.alpha) * std::pow(rh, N - 2) * ur * ur * bracket2(P, r);
  });
  // u^2 Delta^alpha(F) r^(N-1) / (2p), singular part r^(alpha+N-2)
  out.laplacian = r_panels(g, N, P.alpha + N - 2, m, [&](double r) {
                    const double d = dist(r), rh = rho(r);
                    const double uv = u(std::min(d, g.t_max()));
                    return std::pow(d / r, P.alpha - 1.0) * std::pow(rh, N) * laplacian_factor_normalized(P, r) * uv * uv;
                  }) /
                  (2.0 * P.p);
  return out;
}

}  // namespace detail

/// Every term of the identity for a Dirichlet function u on the grid [0, dom.T].
/// Throws CrossCheckError when the t and r evaluations disagree.
inline PohozaevReport pohozaev_report(const RadialFn& u, const BallDomain& dom, const Params& P, int scan_samples = 10000) {
  const auto v = validate(P, Mode::pohozaev);
  if (!v.empty()) throw DomainError("pohozaev_report: invalid parameters, violates " + v.front().constraint);
  const RadialGrid& g = u.grid();
  if (std::fabs(g.t_max() - dom.T) > 1e-12 * dom.T) throw DomainError("pohozaev_report: grid must end at the domain radius");
  const double umax = u.max_abs();
  if (std::fabs(u[u.size() - 1]) > 1e-8 * std::max(umax, 1e-300))
    throw DomainError("pohozaev_report: u must vanish on the boundary");

  PohozaevReport rep;
  rep.params = P;
  rep.T = dom.T;
  rep.hypotheses = check_hypotheses(P);
  const PohozaevTerms tt = detail::terms_t(u, P);
  rep.boundary_term = tt.boundary;
  rep.bracket_integral = tt.bracket;
  rep.laplacian_integral = tt.laplacian;
  rep.euclidean = detail::terms_r(u, P);
  const double scale = std::fabs(tt.boundary) + std::fabs(tt.bracket) + std::fabs(tt.laplacian) + kPohozaevFloor;
  rep.cross_disagreement = std::max({std::fabs(tt.boundary - rep.euclidean.boundary),
                                     std::fabs(tt.bracket - rep.euclidean.bracket),
                                     std::fabs(tt.laplacian - rep.euclidean.laplacian)}) /
                           scale;
  if (rep.cross_disagreement > kCrossTol)
    throw CrossCheckError("pohozaev_report: t and r evaluations disagree by " + format_double(rep.cross_disagreement));
  rep.residual = detail::rel_gap(tt.boundary, tt.bracket + tt.laplacian);
  if (umax == 0.0) rep.residual = 0.0;

  const ScanSummary scan = positivity_scan(P, scan_samples, dom.euclidean_radius());
  rep.min_bracket = scan.min_bracket;
  rep.min_laplacian_factor = scan.min_laplacian;
  return rep;
}

inline nlohmann::ordered_json to_json(const PohozaevReport& r) {
  nlohmann::ordered_json j = params_json(r.params);
  j["T"] = r.T;
  j["boundary_term"] = r.boundary_term;
  j["bracket_integral"] = r.bracket_integral;
  j["laplacian_integral"] = r.laplacian_integral;
  j["residual"] = r.residual;
  j["boundary_term_r"] = r.euclidean.boundary;
  j["bracket_integral_r"] = r.euclidean.bracket;
  j["laplacian_integral_r"] = r.euclidean.laplacian;
  j["cross_disagreement"] = r.cross_disagreement;
  j["min_bracket"] = r.min_bracket;
  j["min_laplacian_factor"] = r.min_laplacian_factor;
  j["p_supercritical"] = r.hypotheses.p_supercritical;
  j["factor_hypotheses_ok"] = r.hypotheses.dimension_ok && r.hypotheses.beta_integrable;
  j["warnings"] = r.hypotheses.warnings;
  return j;
}

/// Dirichlet solution of the subcritical problem (q = p) on the ball, then its report.
struct IdentityRun {
  SolveResult solve;
  PohozaevReport report;
};

inline IdentityRun pohozaev_identity_run(const Params& P, const BallDomain& dom, int n, const SolveOptions& base = {}) {
  Params Q = P;
  Q.q = P.p;
  SolveOptions o = base;
  o.full_space = false;
  auto grid = build_grid(n, dom.T);
  SolveResult s = solve_ground_state(Q, grid, o);
  PohozaevReport rep = pohozaev_report(s.u, dom, P);
  return {std::move(s), std::move(rep)};
}

// ---- concentrating families ---------------------------------------------

enum class Profile { bump, bubble };

/// exp(1 - 1/(1-s^2)) on [0,1).
inline double bump_profile(double s) {
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / ((1.0 - s) * (1.0 + s)));
}

inline constexpr double kBubbleCut = 200.0;

/// (1+s^2)^(-1/2) - (1+S^2)^(-1/2) on [0, S], S = kBubbleCut.
inline double bubble_profile(double s) {
  if (s >= kBubbleCut) return 0.0;
  return 1.0 / std::sqrt(1.0 + s * s) - 1.0 / std::sqrt(1.0 + kBubbleCut * kBubbleCut);
}

inline double profile_support(Profile p) { return p == Profile::bump ? 1.0 : kBubbleCut; }
inline double profile_value(Profile p, double s) { return p == Profile::bump ? bump_profile(s) : bubble_profile(s); }

/// phi(t/eps) on its own grid [0, eps * support], so the relative resolution does not depend on eps.
inline RadialFn concentrated(Profile p, double eps, int n, const Grading& grading = {}) {
  const double L = eps * profile_support(p);
  if (!(L > 1e-10)) throw DomainError("concentrating family: eps below grid resolution");
  return RadialFn::sample(build_grid(n, L, grading), [&](double t) { return profile_value(p, t / eps); });
}

/// int t^alpha u'^2 dV / (int t^beta |u|^p dV)^(2/p).
inline double nehari_quotient(const RadialFn& u, const Params& P) {
  const double den = lq_weighted(u, P.beta, P.p, P.N);
  if (!(den > kQuotientFloor)) throw ZeroDenominatorError("nehari_quotient: denominator vanishes");
  return grad_energy(u, P.alpha, P.N) / std::pow(den, 2.0 / P.p);
}

struct ProbeReport {
  Params params;
  double T = 0.0;
  Profile profile = Profile::bump;
  std::string regime;  // supercritical, critical, subcritical
  std::vector<double> eps, quotient, ratio;
  bool tail_decreasing = false;  // last `window` ratios all < 1
  bool increasing = false;       // every ratio > 1
  int window = 5;
  Hypotheses hypotheses;
};

/// Quotients of phi(t/eps_k), eps_k = eps_0 2^-k, eps_0 the largest scale fitting in the ball.
inline ProbeReport supercritical_probe(const Params& P, const BallDomain& dom, int family_size,
                                       Profile profile = Profile::bump, int n = 400) {
  if (family_size < 2) throw std::invalid_argument("supercritical_probe: need family_size >= 2");
  const auto v = validate(P, Mode::pohozaev);
  if (!v.empty()) throw DomainError("supercritical_probe: invalid parameters, violates " + v.front().constraint);
  ProbeReport rep;
  rep.params = P;
  rep.T = dom.T;
  rep.profile = profile;
  rep.hypotheses = check_hypotheses(P);
  const double ps = sobolev_exponent(P.N);
  const double crit = std::max(ps, critical_exponent(P.N, P.alpha, P.beta));
  rep.regime = P.p > crit ? "supercritical" : (P.p == crit ? "critical" : "subcritical");
  const double eps0 = dom.T / profile_support(profile);
  for (int k = 0; k < family_size; ++k) {
    const double eps = eps0 * std::ldexp(1.0, -k);
    rep.eps.push_back(eps);
    rep.quotient.push_back(nehari_quotient(concentrated(profile, eps, n), P));
    if (k > 0) rep.ratio.push_back(rep.quotient[k] / rep.quotient[k - 1]);
  }
  const int w = std::min<int>(rep.window, static_cast<int>(rep.ratio.size()));
  rep.tail_decreasing = std::all_of(rep.ratio.end() - w, rep.ratio.end(), [](double r) { return r < 1.0; });
  rep.increasing = std::all_of(rep.ratio.begin(), rep.ratio.end(), [](double r) { return r > 1.0; });
  return rep;
}

inline nlohmann::ordered_json to_json(const ProbeReport& r) {
  nlohmann::ordered_json j = params_json(r.params);
  j["T"] = r.T;
  j["profile"] = r.profile == Profile::bump ? "bump" : "bubble";
  j["regime"] = r.regime;
  j["eps"] = r.eps;
  j["quotient"] = r.quotient;
  j["ratio"] = r.ratio;
  j["tail_decreasing"] = r.tail_decreasing;
  j["increasing"] = r.increasing;
  j["p_supercritical"] = r.hypotheses.p_supercritical;
  j["factor_hypotheses_ok"] = r.hypotheses.dimension_ok && r.hypotheses.beta_integrable;
  j["warnings"] = r.hypotheses.warnings;
  return j;
}

/// grad u . grad(grad u . x) - |grad u|^2 - 1/2 grad|grad u|^2 . x for radial u(r),
/// by central differences of step h, relative to |u'|^2 + r |u' u''|.
template <class F>
double bochner_defect(F&& u, double r, double h = 1e-4) {
  auto D = [h](auto&& f, double x) { return (f(x + h) - f(x - h)) / (2.0 * h); };
  auto du = [&](double x) { return D(u, x); };
  auto radial = [&](double x) { return x * du(x); };      // grad u . x
  auto sq = [&](double x) { return du(x) * du(x); };       // |grad u|^2
  const double g1 = du(r);
  const double lhs = g1 * D(radial, r);
  const double rhs = g1 * g1 + 0.5 * r * D(sq, r);
  const double u2 = D(du, r);
  return std::fabs(lhs - rhs) / (g1 * g1 + std::fabs(r * g1 * u2) + 1e-300);
}

}  // namespace hyckn
