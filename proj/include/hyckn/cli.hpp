#pragma once

// Batch commands behind the `hyckn` executable. Each cmd_* takes a RunConfig,
// writes its artifacts under cfg.out and returns the process exit code.

#include "hyckn/functionals.hpp"
#include "hyckn/geometry.hpp"
#include "hyckn/io.hpp"
#include "hyckn/pohozaev.hpp"
#include "hyckn/quadrature.hpp"
#include "hyckn/solver.hpp"
#include "hyckn/verify.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

namespace hyckn::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum Exit : int { kOk = 0, kError = 1, kValidation = 2, kNonConvergence = 3, kVerification = 4 };

/// lo:hi:n, n evenly spaced values including both ends.
struct Range {
  double lo = 0.0, hi = 0.0;
  int n = 1;

  static Range parse(const std::string& s) {
    Range r;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%d%c", &r.lo, &r.hi, &r.n, &tail) != 3 || r.n < 1)
      throw std::invalid_argument("range must look like lo:hi:n, got '" + s + "'");
    if (r.n == 1 && r.lo != r.hi) throw std::invalid_argument("range with n=1 needs lo == hi");
    return r;
  }
  std::vector<double> values() const {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return v;
  }
};

struct RunConfig {
  std::string command;
  Params params;
  int grid_n = 600;
  std::optional<double> tmax;   // command default when unset
  std::optional<int> layers;    // command default when unset
  double ratio = 0.5;
  int degree = 3;
  double tol = 1e-8;
  int max_iter = 5000;
  std::string out = "hyckn_out";
  std::vector<std::string> formats{"csv", "json"};
  int jobs = 1;
  int family = 12;
  std::vector<std::string> checks;
  std::string inject_fault;  // panel:factor
  std::optional<Range> a_range, b_range, alpha_range, beta_range, lambda_range, q_range;

  bool wants(const std::string& f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }
};

inline double default_tmax(const RunConfig& c) {
  if (c.tmax) return *c.tmax;
  return c.command == "pohozaev" ? 1.0 : 40.0;
}

inline Grading grading_for(const RunConfig& c) {
  Grading g;
  g.degree = c.degree;
  g.ratio = c.ratio;
  // the Hardy quotient needs many log-scales near the origin
  g.layers = c.layers ? *c.layers : (c.command == "constant" || c.command == "sweep" ? 90 : 12);
  return g;
}

inline json violations_json(const std::string& command, const std::vector<Violation>& v) {
  json j;
  j["status"] = "invalid";
  j["command"] = command;
  j["violations"] = json::array();
  for (const auto& x : v) j["violations"].push_back({{"constraint", x.constraint}, {"message", x.message}});
  return j;
}

inline int report_invalid(const RunConfig& c, const std::vector<Violation>& v, std::ostream& log) {
  const json j = violations_json(c.command, v);
  log << j.dump() << "\n";
  io::write_atomic(fs::path(c.out) / "violations.json", io::dump(j));
  return kValidation;
}

inline void emit(const RunConfig& c, const std::string& name, const std::string& text) {
  io::write_atomic(fs::path(c.out) / name, text);
}

// ---- constant ----------------------------------------------------------------

struct ConstantSummary {
  json summary;
  std::optional<RadialFn> minimizer;
  std::vector<double> history;
};

/// S(a,b) upper estimates: optimizer on the grid and a concentrating bubble family,
/// with the Hardy and spectral floors alongside.
inline ConstantSummary constant_compute(const RunConfig& c) {
  const Params& P = c.params;
  const int N = P.N;
  const double p = ckn_exponent(N, P.a, P.b);
  const double T = default_tmax(c);
  const GridPtr grid = build_grid(c.grid_n, T, grading_for(c));

  MinimizeOptions mo;
  mo.tol = c.tol;
  mo.max_iter = c.max_iter;
  mo.newton = p > 2.0 && p < sobolev_exponent(N);
  const QuotientProblem pb = QuotientProblem::ckn(N, P.a, P.b);
  const MinimizeResult opt = minimize_rayleigh(pb, grid, default_init(grid, N), mo);

  // where the minimizer's constraint mass sits
  const WeightedRule rb = grid->weighted_rule(pb.beta, N);
  const auto vq = rb.values(opt.v.values());
  const auto tq = rb.points();
  const double mass = rb.sum([&](std::size_t q) { return std::pow(std::fabs(vq[q]), p); });
  const double centroid = rb.sum([&](std::size_t q) { return tq[q] * std::pow(std::fabs(vq[q]), p); }) / mass;

  double conc = INFINITY, conc_eps = 0.0;
  json fam = json::array();
  for (int k = 0; k < c.family; ++k) {
    const double eps = 1e-2 * std::ldexp(1.0, -k);
    const double qv = rayleigh_ckn(concentrated(Profile::bubble, eps, c.grid_n), P.a, P.b, N);
    fam.push_back({{"eps", eps}, {"quotient", qv}});
    if (qv < conc) {
      conc = qv;
      conc_eps = eps;
    }
  }

  const double alpha = -2.0 * P.a;
  MinimizeOptions lo = mo;
  lo.newton = false;
  const MinimizeResult hardy =
      minimize_rayleigh({N, alpha, 0.0, alpha - 2.0, 2.0}, grid, default_init(grid, N), lo);
  const MinimizeResult spec = minimize_rayleigh({N, 0.0, 0.0, 0.0, 2.0}, grid, default_init(grid, N), lo);

  json j = params_json(P);
  j["p"] = p;
  j["estimate"] = std::min(opt.mu, conc);
  j["optimizer_estimate"] = opt.mu;
  j["optimizer_converged"] = opt.converged;
  j["optimizer_iterations"] = opt.iterations;
  j["optimizer_stationarity"] = opt.stationarity;
  j["mass_centroid"] = centroid;
  j["concentrating_estimate"] = conc;
  j["concentrating_eps"] = conc_eps;
  j["concentrating_family"] = fam;
  j["hardy_floor"] = hardy_constant(N, alpha);
  j["hardy_estimate"] = hardy.mu;
  j["spectral_floor"] = spectral_floor(N);
  j["spectral_estimate"] = spec.mu;
  j["grid_n"] = grid->size();
  j["tmax"] = T;
  return {j, opt.v, opt.history};
}

inline int cmd_constant(const RunConfig& c, std::ostream& log) {
  const auto v = validate(c.params, Mode::ckn);
  if (!v.empty()) return report_invalid(c, v, log);
  const ConstantSummary s = constant_compute(c);
  if (c.wants("json")) emit(c, "constant.json", io::dump(s.summary));
  if (c.wants("csv")) {
    emit(c, "constant_profile.csv", io::profile_csv(*s.minimizer));
    io::CsvTable h({"iteration", "quotient"});
    for (std::size_t i = 0; i < s.history.size(); ++i) h.add_numbers({double(i), s.history[i]});
    emit(c, "constant_history.csv", h.str());
  }
  if (c.wants("svg")) {
    const auto& u = *s.minimizer;
    io::Series prof{"minimizer", {u.grid().nodes().begin(), u.grid().nodes().end()}, {u.values().begin(), u.values().end()}};
    emit(c, "constant_profile.svg", io::svg_plot({prof}, "normalized minimizer", "t", "v(t)"));
    io::Series hist{"quotient", {}, s.history};
    for (std::size_t i = 0; i < s.history.size(); ++i) hist.x.push_back(double(i));
    emit(c, "constant_history.svg", io::svg_plot({hist}, "quotient per iteration", "iteration", "quotient"));
  }
  log << "S(a,b) estimate " << format_double(s.summary["estimate"].get<double>()) << "  hardy floor "
      << format_double(s.summary["hardy_floor"].get<double>()) << "  hardy estimate "
      << format_double(s.summary["hardy_estimate"].get<double>()) << "\n";
  return kOk;
}

// ---- solve -------------------------------------------------------------------

inline SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o;
  o.minimize.tol = c.tol;
  o.minimize.max_iter = c.max_iter;
  return o;
}

inline SolveResult solve_compute(const RunConfig& c) {
  const GridPtr grid = build_grid(c.grid_n, default_tmax(c), grading_for(c));
  return solve_ground_state(c.params, grid, solve_options(c));
}

inline json solve_summary(const SolveResult& s) {
  json j = to_json(s);
  const EnergyReport e = energy_report(s.u, s.params);
  j["grad_energy"] = e.grad_energy;
  j["hardy_energy"] = e.hardy_energy;
  j["lq_mass"] = e.lq_mass;
  j["shifted_norm_sq"] = e.shifted_norm_sq;
  j["I_value"] = e.I_value;
  return j;
}

inline int cmd_solve(const RunConfig& c, std::ostream& log) {
  const auto v = validate(c.params, Mode::solve);
  if (!v.empty()) return report_invalid(c, v, log);
  std::optional<SolveResult> s;
  try {
    s = solve_compute(c);
  } catch (const NonConvergenceError& e) {
    log << "non-convergence: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const TailError& e) {
    log << "non-convergence: " << e.what() << "\n";
    return kNonConvergence;
  }
  if (c.wants("json")) emit(c, "solve.json", io::dump(solve_summary(*s)));
  if (c.wants("csv")) {
    emit(c, "solution.csv", io::profile_csv(s->u));
    io::CsvTable h({"iteration", "quotient"});
    for (std::size_t i = 0; i < s->history.size(); ++i) h.add_numbers({double(i), s->history[i]});
    emit(c, "solve_history.csv", h.str());
  }
  if (c.wants("svg")) {
    const auto& u = s->u;
    io::Series prof{"u", {u.grid().nodes().begin(), u.grid().nodes().end()}, {u.values().begin(), u.values().end()}};
    emit(c, "solution.svg", io::svg_plot({prof}, "ground state", "t", "u(t)"));
  }
  log << "mu " << format_double(s->quotient) << "  residual " << format_double(s->residual) << "  nehari gap "
      << format_double(s->nehari_gap) << "  converged " << s->converged << "  positive " << s->positivity_ok << "\n";
  return s->converged && s->positivity_ok ? kOk : kNonConvergence;
}

// ---- verify ------------------------------------------------------------------

inline int cmd_verify(const RunConfig& c, std::ostream& log) {
  verify::Options o;
  o.N = c.params.N;
  if (!c.inject_fault.empty()) {
    int panel = 0;
    double factor = 1.0;
    char tail = 0;
    if (std::sscanf(c.inject_fault.c_str(), "%d:%lf%c", &panel, &factor, &tail) != 2 || panel < 0)
      throw std::invalid_argument("--inject-fault expects panel:factor");
    o.fault_panel = panel;
    o.fault_factor = factor;
  }
  const auto results = verify::run_checks(c.checks, o);
  io::CsvTable t({"check", "worst_violation", "tolerance", "pass"});
  bool ok = true;
  for (const auto& r : results) {
    t.add({r.name, format_double(r.worst), format_double(r.tolerance), r.pass ? "true" : "false"});
    ok = ok && r.pass;
    char line[160];
    std::snprintf(line, sizeof line, "%-32s %-5s worst %.3e  tol %.1e\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                  r.worst, r.tolerance);
    log << line;
  }
  emit(c, "verify.csv", t.str());
  return ok ? kOk : kVerification;
}

// ---- pohozaev ----------------------------------------------------------------

inline int cmd_pohozaev(const RunConfig& c, std::ostream& log) {
  const auto v = validate(c.params, Mode::pohozaev);
  if (!v.empty()) return report_invalid(c, v, log);
  const Params& P = c.params;
  const BallDomain dom(default_tmax(c));
  const Hypotheses hyp = check_hypotheses(P);
  for (const auto& w : hyp.warnings) log << "warning: " << w << "\n";

  const ScanSummary scan = positivity_scan(P, 10000, dom.euclidean_radius());
  if (c.wants("csv")) {
    io::CsvTable t({"r", "bracket2", "laplacian_factor"});
    for (const auto& r : scan.rows) t.add_numbers({r.r, r.bracket2, r.laplacian_factor});
    emit(c, "pohozaev_scan.csv", t.str());
  }
  if (c.wants("svg")) {
    io::Series s{"bracket2", {}, {}};
    for (std::size_t i = 0; i < scan.rows.size(); i += 20) {
      s.x.push_back(scan.rows[i].r);
      s.y.push_back(scan.rows[i].bracket2);
    }
    emit(c, "pohozaev_bracket2.svg", io::svg_plot({s}, "bracket2(r)", "r", "bracket2"));
  }

  Params Q = P;
  Q.q = P.p;
  if (validate(Q, Mode::solve).empty()) {
    // subcritical: verify the identity on a Dirichlet solution
    SolveOptions so = solve_options(c);
    std::optional<IdentityRun> run;
    try {
      run = pohozaev_identity_run(P, dom, c.grid_n, so);
    } catch (const NonConvergenceError& e) {
      log << "non-convergence: " << e.what() << "\n";
      return kNonConvergence;
    }
    json j = to_json(run->report);
    j["mode"] = "identity";
    j["solve_converged"] = run->solve.converged;
    j["solve_residual"] = run->solve.residual;
    if (c.wants("json")) emit(c, "pohozaev.json", io::dump(j));
    if (c.wants("csv")) emit(c, "pohozaev_solution.csv", io::profile_csv(run->solve.u));
    log << "pohozaev residual " << format_double(run->report.residual) << "  cross-coordinate "
        << format_double(run->report.cross_disagreement) << "\n";
    if (!run->solve.converged) return kNonConvergence;
    return run->report.residual < 1e-2 ? kOk : kVerification;
  }

  const ProbeReport pr = supercritical_probe(P, dom, c.family);
  json j = to_json(pr);
  j["mode"] = "probe";
  j["min_bracket"] = scan.min_bracket;
  j["min_laplacian_factor"] = scan.min_laplacian;
  if (c.wants("json")) emit(c, "pohozaev.json", io::dump(j));
  if (c.wants("csv")) {
    io::CsvTable t({"eps", "quotient", "ratio"});
    for (std::size_t k = 0; k < pr.eps.size(); ++k)
      t.add_numbers({pr.eps[k], pr.quotient[k], k ? pr.ratio[k - 1] : std::nan("")});
    emit(c, "pohozaev_probe.csv", t.str());
  }
  log << "probe regime " << pr.regime << "  last quotient " << format_double(pr.quotient.back())
      << "  tail decreasing " << pr.tail_decreasing << "\n";
  return kOk;
}

// ---- sweep -------------------------------------------------------------------

struct Cell {
  Params params;
  std::vector<double> coords;
};

inline int cmd_sweep(const RunConfig& c, std::ostream& log) {
  const bool ab = c.a_range || c.b_range;
  const bool sv = c.alpha_range || c.beta_range || c.lambda_range || c.q_range;
  if (ab == sv) {
    log << violations_json("sweep", {{"ranges", "give either --a-range/--b-range or --alpha/beta/lambda/q-range"}}).dump()
        << "\n";
    return kValidation;
  }
  auto vals = [](const std::optional<Range>& r, double dflt) { return r ? r->values() : std::vector<double>{dflt}; };
  std::vector<Cell> cells;
  std::vector<std::string> head;
  if (ab) {
    head = {"a", "b", "p", "status", "estimate", "optimizer_estimate", "concentrating_estimate", "hardy_floor",
            "hardy_estimate", "spectral_estimate", "mass_centroid", "converged"};
    for (double a : vals(c.a_range, c.params.a))
      for (double b : vals(c.b_range, c.params.b)) {
        Params P = c.params;
        P.a = a;
        P.b = b;
        cells.push_back({P, {a, b}});
      }
  } else {
    head = {"alpha", "beta", "lambda", "q", "status", "quotient", "residual", "nehari_gap", "energy", "converged",
            "positivity_ok"};
    for (double al : vals(c.alpha_range, c.params.alpha))
      for (double be : vals(c.beta_range, c.params.beta))
        for (double la : vals(c.lambda_range, c.params.lambda))
          for (double q : vals(c.q_range, c.params.q)) {
            Params P = c.params;
            P.alpha = al;
            P.beta = be;
            P.lambda = la;
            P.q = q;
            cells.push_back({P, {al, be, la, q}});
          }
  }

  const fs::path dir = fs::path(c.out) / "cells";
  fs::create_directories(dir);
  auto cell_name = [](std::size_t i) {
    char b[32];
    std::snprintf(b, sizeof b, "cell_%05zu", i);
    return std::string(b);
  };

  auto run_cell = [&](std::size_t i) -> json {
    RunConfig cc = c;
    cc.params = cells[i].params;
    cc.command = ab ? "constant" : "solve";
    cc.layers = c.layers ? c.layers : std::optional<int>(grading_for(c).layers);
    json row;
    try {
      if (ab) {
        const auto v = validate(cc.params, Mode::ckn);
        if (!v.empty()) return {{"status", "invalid:" + v.front().constraint}};
        row = constant_compute(cc).summary;
        row["status"] = "ok";
      } else {
        const auto v = validate(cc.params, Mode::solve);
        if (!v.empty()) return {{"status", "invalid:" + v.front().constraint}};
        cc.layers = c.layers ? c.layers : std::optional<int>(12);
        const SolveResult s = solve_compute(cc);
        row = to_json(s);
        row["status"] = s.converged && s.positivity_ok ? "ok" : "nonconverged";
      }
    } catch (const std::exception& e) {
      row = {{"status", "error"}, {"message", e.what()}};
    }
    return row;
  };

  std::vector<json> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> reran{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const fs::path jf = dir / (cell_name(i) + ".json"), done = dir / (cell_name(i) + ".done");
      if (fs::exists(done) && fs::exists(jf)) {
        std::ifstream is(jf);
        rows[i] = json::parse(is);
        continue;
      }
      rows[i] = run_cell(i);
      io::write_atomic(jf, io::dump(rows[i]));
      io::write_atomic(done, "");
      ++reran;
      std::lock_guard<std::mutex> lk(log_mu);
      log << cell_name(i) << " " << rows[i]["status"].get<std::string>() << "\n";
    }
  };
  const int jobs = std::max(1, std::min<int>(c.jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  io::CsvTable t(head);
  auto num = [](const json& r, const char* k) {
    return r.contains(k) && r[k].is_number() ? format_double(r[k].get<double>()) : std::string();
  };
  auto flag = [](const json& r, const char* k) {
    return r.contains(k) && r[k].is_boolean() ? std::string(r[k].get<bool>() ? "true" : "false") : std::string();
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const json& r = rows[i];
    std::vector<std::string> cellv;
    for (double x : cells[i].coords) cellv.push_back(format_double(x));
    if (ab) {
      const Params& P = cells[i].params;
      const bool ok = validate(P, Mode::ckn).empty();
      cellv.push_back(ok ? format_double(ckn_exponent(P.N, P.a, P.b)) : std::string());
      cellv.push_back(r["status"].get<std::string>());
      for (const char* k : {"estimate", "optimizer_estimate", "concentrating_estimate", "hardy_floor", "hardy_estimate",
                            "spectral_estimate", "mass_centroid"})
        cellv.push_back(num(r, k));
      cellv.push_back(flag(r, "optimizer_converged"));
    } else {
      cellv.push_back(r["status"].get<std::string>());
      for (const char* k : {"quotient", "residual", "nehari_gap", "energy"}) cellv.push_back(num(r, k));
      cellv.push_back(flag(r, "converged"));
      cellv.push_back(flag(r, "positivity_ok"));
    }
    t.add(cellv);
  }
  emit(c, "sweep.csv", t.str());
  log << "sweep: " << cells.size() << " cells, " << reran.load() << " computed\n";
  return kOk;
}

inline int run(const RunConfig& c, std::ostream& log) {
  try {
    std::error_code ec;
    fs::remove(fs::path(c.out) / "violations.json", ec);
    if (c.command == "constant") return cmd_constant(c, log);
    if (c.command == "solve") return cmd_solve(c, log);
    if (c.command == "verify") return cmd_verify(c, log);
    if (c.command == "pohozaev") return cmd_pohozaev(c, log);
    if (c.command == "sweep") return cmd_sweep(c, log);
    log << "unknown command '" << c.command << "'\n";
    return kValidation;
  } catch (const DomainError& e) {
    log << violations_json(c.command, {{"domain", e.what()}}).dump() << "\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {
    log << violations_json(c.command, {{"arguments", e.what()}}).dump() << "\n";
    return kValidation;
  } catch (const NonConvergenceError& e) {
    log << "non-convergence: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace hyckn::cli
