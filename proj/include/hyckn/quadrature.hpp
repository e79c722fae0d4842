#pragma once

// Graded panel grids on the geodesic half-line [0, T_max] and the radial
// functions that live on them.
//
// A grid is a chain of panels 0 = b_0 < b_1 < ... < b_P = T_max. The panels
// inside [0, h] shrink geometrically toward the origin, the rest have width
// h. Every panel carries a degree-k Lagrange element: Gauss-Lobatto nodes on
// interior panels and right Gauss-Radau nodes on the first panel, so no node
// sits at t = 0 and the node count is P k + 1. A RadialFn is the continuous
// piecewise polynomial through its nodal values.
//
// Weighted integrals omega_{N-1} int t^gamma f(t) sinh^{N-1}(t) dt use a
// separate, finer Gauss rule per panel. On the first panel the factor
// t^{gamma+N-1} is absorbed into a Gauss-Jacobi rule, which keeps the rule
// exact order for any gamma > -N.

#include "hyckn/gauss.hpp"
#include "hyckn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace hyckn {

class IntegrabilityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Node-distribution law of a RadialGrid.
struct Grading {
  int degree = 3;        // polynomial degree per panel
  int layers = 12;       // geometric panels between the first panel and the uniform zone
  double ratio = 0.5;    // width ratio between neighbouring geometric panels
  int quad_points = 0;   // Gauss points per panel for weighted integrals; 0 picks degree + 5

  int rule_points() const { return quad_points > 0 ? quad_points : degree + 5; }
};

namespace detail {

inline double log_sinh(double t) {
  if (t > 20.0) return t - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * t));
  return std::log(std::sinh(t));
}

inline void lagrange(std::span<const double> xi, double x, std::span<double> phi, std::span<double> dphi) {
  const std::size_t n = xi.size();
  for (std::size_t j = 0; j < n; ++j) {
    double v = 1.0;
    double dv = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      const double den = xi[j] - xi[k];
      dv = dv * (x - xi[k]) / den + v / den;
      v *= (x - xi[k]) / den;
    }
    phi[j] = v;
    if (!dphi.empty()) dphi[j] = dv;
  }
}

}  // namespace detail

class WeightedRule;

class RadialGrid {
 public:
  /// Composite graded grid with (at least) n nodes on [0, T_max].
  static std::shared_ptr<const RadialGrid> build(int n, double T_max, const Grading& grading = {}) {
    if (n < 16) throw std::invalid_argument("build_grid: need n >= 16 nodes");
    if (!(T_max > 0.0) || !std::isfinite(T_max)) throw std::invalid_argument("build_grid: need T_max > 0");
    const Grading& g = grading;
    if (g.degree < 1 || g.degree > 16) throw std::invalid_argument("build_grid: grading degree must be in [1,16]");
    if (g.layers < 0) throw std::invalid_argument("build_grid: grading layers must be >= 0");
    if (!(g.ratio > 0.0 && g.ratio < 1.0)) throw std::invalid_argument("build_grid: grading ratio must be in (0,1)");
    if (g.quad_points < 0 || g.quad_points > 64)
      throw std::invalid_argument("build_grid: grading quad_points must be in [0,64]");

    const int k = g.degree;
    const int panels = (n - 1 + k - 1) / k;
    const int uniform = panels - g.layers - 1;
    if (uniform < 1)
      throw std::invalid_argument("build_grid: too few nodes for the requested geometric layers");

    auto grid = std::shared_ptr<RadialGrid>(new RadialGrid());
    grid->grading_ = g;
    grid->t_max_ = T_max;
    const double h = T_max / (uniform + 1);
    grid->breaks_.push_back(0.0);
    for (int j = g.layers; j >= 1; --j) grid->breaks_.push_back(h * std::pow(g.ratio, j));
    for (int j = 1; j <= uniform + 1; ++j) grid->breaks_.push_back(j == uniform + 1 ? T_max : h * j);
    grid->init();
    return grid;
  }

  std::size_t size() const { return nodes_.size(); }
  double t_max() const { return t_max_; }
  const Grading& grading() const { return grading_; }
  int degree() const { return grading_.degree; }
  int panel_count() const { return static_cast<int>(breaks_.size()) - 1; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> breaks() const { return breaks_; }

  /// Global index of local node j (0..degree) of panel e.
  std::size_t dof(int e, int j) const { return static_cast<std::size_t>(e) * grading_.degree + j; }

  /// Reference nodes on [-1,1] used by panel e.
  std::span<const double> ref_nodes(int e) const { return e == 0 ? std::span<const double>(radau_.x) : lobatto_.x; }

  int panel_of(double t) const {
    if (!(t >= 0.0 && t <= t_max_)) throw DomainError("RadialGrid: t outside [0, T_max]");
    auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, t);
    return static_cast<int>(it - breaks_.begin()) - 1;
  }

  /// Basis values and t-derivatives of panel e at geodesic radius t.
  void basis(int e, double t, std::span<double> phi, std::span<double> dphi) const {
    const double a = breaks_[e], b = breaks_[e + 1];
    const double xi = 2.0 * (t - a) / (b - a) - 1.0;
    detail::lagrange(ref_nodes(e), xi, phi, dphi);
    if (!dphi.empty())
      for (auto& d : dphi) d *= 2.0 / (b - a);
  }

  /// Copy whose weighted rules scale the Gauss weights of one panel by factor.
  /// Used to inject a deliberate quadrature fault in verification runs.
  std::shared_ptr<const RadialGrid> with_weight_fault(int panel, double factor) const {
    auto g = std::make_shared<RadialGrid>(*this);
    g->fault_panel_ = panel;
    g->fault_factor_ = factor;
    return g;
  }

  WeightedRule weighted_rule(double gamma, int N) const;

  /// Plain nodal quadrature of f over [0, T_max].
  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(nodes_[i]);
    return s;
  }

 private:
  RadialGrid() = default;

  void init() {
    const int k = grading_.degree;
    lobatto_ = gauss::lobatto(k + 1);
    radau_ = gauss::radau_right(k + 1);
    legendre_ = gauss::legendre(grading_.rule_points());
    const int P = panel_count();
    nodes_.assign(static_cast<std::size_t>(P) * k + 1, 0.0);
    weights_.assign(nodes_.size(), 0.0);
    for (int e = 0; e < P; ++e) {
      const double a = breaks_[e], b = breaks_[e + 1];
      const auto& ref = e == 0 ? radau_ : lobatto_;
      for (int j = 0; j <= k; ++j) {
        const std::size_t i = dof(e, j);
        nodes_[i] = a + 0.5 * (b - a) * (ref.x[j] + 1.0);
        weights_[i] += 0.5 * (b - a) * ref.w[j];
      }
    }
    nodes_.back() = t_max_;
  }

  friend class WeightedRule;

  Grading grading_;
  double t_max_ = 0.0;
  std::vector<double> breaks_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  gauss::Rule lobatto_, radau_, legendre_;
  int fault_panel_ = -1;
  double fault_factor_ = 1.0;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Convenience wrapper matching the grid constructor.
inline GridPtr build_grid(int n, double T_max, const Grading& grading = {}) {
  return RadialGrid::build(n, T_max, grading);
}

/// Radial function sampled at the nodes of a grid, continuous piecewise polynomial in t.
class RadialFn {
 public:
  RadialFn(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("RadialFn: null grid");
    if (values_.size() != grid_->size()) throw std::invalid_argument("RadialFn: value count does not match grid");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("RadialFn: non-finite value");
  }

  template <class F>
  static RadialFn sample(GridPtr grid, F&& f) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->nodes()[i]);
    return RadialFn(std::move(grid), std::move(v));
  }

  static RadialFn zero(GridPtr grid) {
    const std::size_t n = grid->size();
    return RadialFn(std::move(grid), std::vector<double>(n, 0.0));
  }

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  double operator()(double t) const { return eval(t, false); }
  double derivative(double t) const { return eval(t, true); }

  /// du/dt at the nodes; panel junctions take the mean of both one-sided values.
  std::vector<double> nodal_derivatives() const {
    const int k = grid_->degree();
    std::vector<double> d(values_.size(), 0.0), cnt(values_.size(), 0.0);
    std::vector<double> phi(k + 1), dphi(k + 1);
    for (int e = 0; e < grid_->panel_count(); ++e) {
      for (int j = 0; j <= k; ++j) {
        const std::size_t i = grid_->dof(e, j);
        grid_->basis(e, grid_->nodes()[i], phi, dphi);
        double s = 0.0;
        for (int l = 0; l <= k; ++l) s += dphi[l] * values_[grid_->dof(e, l)];
        d[i] += s;
        cnt[i] += 1.0;
      }
    }
    for (std::size_t i = 0; i < d.size(); ++i) d[i] /= cnt[i];
    return d;
  }

  RadialFn scaled(double c) const {
    std::vector<double> v(values_);
    for (auto& x : v) x *= c;
    return RadialFn(grid_, std::move(v));
  }

  RadialFn abs() const {
    std::vector<double> v(values_);
    for (auto& x : v) x = std::fabs(x);
    return RadialFn(grid_, std::move(v));
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
  }

 private:
  double eval(double t, bool deriv) const {
    const int e = grid_->panel_of(t);
    const int k = grid_->degree();
    double phi[17], dphi[17];
    grid_->basis(e, t, std::span<double>(phi, k + 1), std::span<double>(dphi, k + 1));
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += (deriv ? dphi[j] : phi[j]) * values_[grid_->dof(e, j)];
    return s;
  }

  GridPtr grid_;
  std::vector<double> values_;
};

/// Quadrature points and weights for omega_{N-1} int t^gamma f(t) sinh^{N-1}(t) dt,
/// together with the element basis at every point.
class WeightedRule {
 public:
  WeightedRule(const RadialGrid& grid, double gamma, int N) : gamma_(gamma), N_(N), k_(grid.degree()) {
    if (N < 1) throw DomainError("weighted_rule: N must be positive");
    const double expo = gamma + N - 1;
    if (!(expo > -1.0))
      throw IntegrabilityError("weighted integral diverges at the origin: need gamma > -N (gamma = " +
                               std::to_string(gamma) + ", N = " + std::to_string(N) + ")");
    const double omega = sphere_area(N);
    const int P = grid.panel_count();
    const int m = grid.grading_.rule_points();
    t_.reserve(static_cast<std::size_t>(P) * m);

    auto push = [&](int e, double t, double w) {
      t_.push_back(t);
      w_.push_back(w);
      panel_.push_back(e);
      const std::size_t off = phi_.size();
      phi_.resize(off + k_ + 1);
      dphi_.resize(off + k_ + 1);
      grid.basis(e, t, std::span<double>(phi_.data() + off, k_ + 1), std::span<double>(dphi_.data() + off, k_ + 1));
    };

    // first panel: Gauss-Jacobi with weight t^expo
    {
      const double b1 = grid.breaks_[1];
      const gauss::Rule gj = gauss::jacobi(m, 0.0, expo);
      const double scale = std::pow(0.5 * b1, expo + 1.0) * omega * (grid.fault_panel_ == 0 ? grid.fault_factor_ : 1.0);
      for (int j = 0; j < m; ++j) {
        const double t = 0.5 * b1 * (gj.x[j] + 1.0);
        push(0, t, scale * gj.w[j] * std::pow(sinhc(t), N - 1));
      }
    }
    const auto& gl = grid.legendre_;
    for (int e = 1; e < P; ++e) {
      const double a = grid.breaks_[e], b = grid.breaks_[e + 1];
      const double f = grid.fault_panel_ == e ? grid.fault_factor_ : 1.0;
      for (int j = 0; j < m; ++j) {
        const double t = a + 0.5 * (b - a) * (gl.x[j] + 1.0);
        const double lw = std::log(0.5 * (b - a) * gl.w[j] * omega) + gamma * std::log(t) + (N - 1) * detail::log_sinh(t);
        push(e, t, f * std::exp(lw));
      }
    }
  }

  double gamma() const { return gamma_; }
  int dimension() const { return N_; }
  std::size_t size() const { return t_.size(); }
  int degree() const { return k_; }
  std::span<const double> points() const { return t_; }
  std::span<const double> weights() const { return w_; }
  int panel(std::size_t q) const { return panel_[q]; }
  std::span<const double> phi(std::size_t q) const { return {phi_.data() + q * (k_ + 1), static_cast<std::size_t>(k_ + 1)}; }
  std::span<const double> dphi(std::size_t q) const { return {dphi_.data() + q * (k_ + 1), static_cast<std::size_t>(k_ + 1)}; }

  /// Interpolated values of nodal data at the rule points.
  std::vector<double> values(std::span<const double> u) const { return apply(u, phi_); }
  std::vector<double> derivs(std::span<const double> u) const { return apply(u, dphi_); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t q = 0; q < t_.size(); ++q) s += w_[q] * f(t_[q]);
    return s;
  }

  /// sum_q w_q g(q) over point indices.
  template <class G>
  double sum(G&& g) const {
    double s = 0.0;
    for (std::size_t q = 0; q < t_.size(); ++q) s += w_[q] * g(q);
    return s;
  }

 private:
  std::vector<double> apply(std::span<const double> u, const std::vector<double>& table) const {
    std::vector<double> out(t_.size(), 0.0);
    for (std::size_t q = 0; q < t_.size(); ++q) {
      const int e = panel_[q];
      const std::size_t base = static_cast<std::size_t>(e) * k_;
      const double* row = table.data() + q * (k_ + 1);
      double s = 0.0;
      for (int j = 0; j <= k_; ++j) s += row[j] * u[base + j];
      out[q] = s;
    }
    return out;
  }

  double gamma_;
  int N_;
  int k_;
  std::vector<double> t_, w_;
  std::vector<int> panel_;
  std::vector<double> phi_, dphi_;
};

inline WeightedRule RadialGrid::weighted_rule(double gamma, int N) const { return WeightedRule(*this, gamma, N); }

/// omega_{N-1} int_0^{T_max} t^gamma f(t) sinh^{N-1}(t) dt for a callable f.
template <class F>
double integrate_weighted(F&& f, double gamma, const RadialGrid& grid, int N) {
  return grid.weighted_rule(gamma, N).integrate(std::forward<F>(f));
}

/// Same integral for a RadialFn, evaluated through its interpolant.
inline double integrate_weighted(const RadialFn& u, double gamma, int N) {
  const WeightedRule rule = u.grid().weighted_rule(gamma, N);
  const auto v = rule.values(u.values());
  return rule.sum([&](std::size_t q) { return v[q]; });
}

/// f(T_max)^2 sinh^{N-1}(T_max): size of the boundary layer dropped by truncation.
template <class F>
double tail_indicator(F&& f, const RadialGrid& grid, int N) {
  const double T = grid.t_max();
  const double v = f(T);
  return v * v * std::exp((N - 1) * detail::log_sinh(T));
}

inline double tail_indicator(const RadialFn& u, int N) {
  return tail_indicator([&](double t) { return u(t); }, u.grid(), N);
}

inline constexpr double kDefaultTailFloor = 1e-10;

/// The same weighted integral computed in the Euclidean radius r in (0, R],
/// R = tanh(T/2), with weight d(r)^gamma rho(r)^N r^{N-1}. Its panels are
/// graded toward r = 0 and toward r = R; it shares no nodes with the t-grid.
template <class F>
double integrate_weighted_r(F&& f, double gamma, double T, int N, int points_per_panel = 16) {
  const double expo = gamma + N - 1;
  if (!(expo > -1.0)) throw IntegrabilityError("integrate_weighted_r: need gamma > -N");
  const double R = std::tanh(0.5 * T);
  const double omega = sphere_area(N);
  std::vector<double> all{0.0};
  const double half = 0.5 * R;
  for (int j = 48; j >= 1; --j) all.push_back(half * std::pow(0.5, j));
  all.push_back(half);
  // halve the distance to R until panels reach the (1-R) scale of rho^N
  double gap = R - half;
  const double floor_w = 0.5 * (1.0 - R);
  while (gap > 2.0 * floor_w) {
    gap *= 0.5;
    all.push_back(R - gap);
  }
  all.push_back(R - 0.5 * gap);
  all.push_back(R);

  auto integrand = [&](double r) {
    const double t = 2.0 * std::atanh(r);
    const double rh = 2.0 / ((1.0 - r) * (1.0 + r));
    return omega * std::pow(t / r, gamma) * std::pow(rh, N) * f(t);
  };
  double s = 0.0;
  {
    const gauss::Rule gj = gauss::jacobi(points_per_panel, 0.0, expo);
    const double b1 = all[1];
    const double scale = std::pow(0.5 * b1, expo + 1.0);
    for (std::size_t j = 0; j < gj.x.size(); ++j) {
      const double r = 0.5 * b1 * (gj.x[j] + 1.0);
      s += scale * gj.w[j] * integrand(r);  // r^expo carried by the rule
    }
  }
  const gauss::Rule gl = gauss::legendre(points_per_panel);
  for (std::size_t e = 1; e + 1 < all.size(); ++e) {
    const double a = all[e], b = all[e + 1];
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      const double r = a + 0.5 * (b - a) * (gl.x[j] + 1.0);
      s += 0.5 * (b - a) * gl.w[j] * std::pow(r, expo) * integrand(r);
    }
  }
  return s;
}

// ---- CSV ----------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const RadialFn& u) {
  os << "# schema=1\n" << "t,u\n";
  for (std::size_t i = 0; i < u.size(); ++i)
    os << format_double(u.grid().nodes()[i]) << ',' << format_double(u[i]) << '\n';
}

inline void write_grid_csv(std::ostream& os, const RadialGrid& g) {
  os << "# schema=1\n" << "t,weight\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    os << format_double(g.nodes()[i]) << ',' << format_double(g.weights()[i]) << '\n';
}

struct Columns {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV with a header line; '#' lines are comments.
inline Columns read_csv(std::istream& is) {
  Columns c;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (c.header.empty()) {
      c.header = cells;
      continue;
    }
    if (cells.size() != c.header.size()) throw std::runtime_error("read_csv: ragged row: " + line);
    std::vector<double> row;
    for (const auto& s : cells) row.push_back(std::stod(s));
    c.rows.push_back(std::move(row));
  }
  return c;
}

/// Reads a `t,u` profile onto a grid whose nodes it must match.
inline RadialFn read_radial_csv(std::istream& is, GridPtr grid) {
  const Columns c = read_csv(is);
  if (c.header.size() != 2 || c.header[0] != "t" || c.header[1] != "u")
    throw std::runtime_error("read_radial_csv: expected header t,u");
  if (c.rows.size() != grid->size()) throw std::runtime_error("read_radial_csv: row count does not match grid");
  std::vector<double> v(c.rows.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = c.rows[i][0];
    if (std::fabs(t - grid->nodes()[i]) > 1e-12 * std::max(1.0, t))
      throw std::runtime_error("read_radial_csv: node mismatch at row " + std::to_string(i));
    v[i] = c.rows[i][1];
  }
  return RadialFn(std::move(grid), std::move(v));
}

}  // namespace hyckn
