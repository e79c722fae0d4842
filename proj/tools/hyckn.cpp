// hyckn: batch front end. Usage: hyckn <constant|solve|verify|pohozaev|sweep> [flags]

#include "hyckn/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::optional<hyckn::cli::Range> range_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return hyckn::cli::Range::parse(s);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace hyckn::cli;
  CLI::App app{"weighted CKN toolkit on the Poincare ball"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "key = value file; command-line flags win");

  RunConfig cfg;
  hyckn::Params& P = cfg.params;
  double tmax = 0.0;
  int layers = 0;
  std::string format = "csv,json";
  std::string checks;
  std::string ra, rb, ralpha, rbeta, rlambda, rq;

  app.add_option("--N", P.N, "dimension");
  app.add_option("--a", P.a, "CKN parameter a");
  app.add_option("--b", P.b, "CKN parameter b");
  app.add_option("--alpha", P.alpha, "gradient weight exponent");
  app.add_option("--beta", P.beta, "nonlinearity weight exponent");
  app.add_option("--lambda", P.lambda, "Hardy coefficient");
  app.add_option("--q", P.q, "nonlinearity exponent (solve)");
  app.add_option("--p", P.p, "exponent (pohozaev)");
  app.add_option("--grid-n", cfg.grid_n, "number of grid nodes");
  auto* tm = app.add_option("--tmax", tmax, "geodesic truncation radius (ball radius for pohozaev)");
  auto* ly = app.add_option("--layers", layers, "geometric layers near the origin");
  app.add_option("--ratio", cfg.ratio, "geometric grading ratio");
  app.add_option("--degree", cfg.degree, "element degree");
  app.add_option("--tol", cfg.tol, "stationarity tolerance");
  app.add_option("--max-iter", cfg.max_iter, "iteration cap");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--format", format, "comma list of csv,json,svg");
  app.add_option("--jobs", cfg.jobs, "concurrent sweep cells");
  app.add_option("--checks", checks, "comma list of verify groups");
  app.add_option("--inject-fault", cfg.inject_fault, "panel:factor weight fault for verify");
  app.add_option("--family", cfg.family, "concentrating family length");
  app.add_option("--a-range", ra, "lo:hi:n");
  app.add_option("--b-range", rb, "lo:hi:n");
  app.add_option("--alpha-range", ralpha, "lo:hi:n");
  app.add_option("--beta-range", rbeta, "lo:hi:n");
  app.add_option("--lambda-range", rlambda, "lo:hi:n");
  app.add_option("--q-range", rq, "lo:hi:n");

  for (const char* name : {"constant", "solve", "verify", "pohozaev", "sweep"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kValidation;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  if (tm->count() > 0) cfg.tmax = tmax;
  if (ly->count() > 0) cfg.layers = layers;
  auto split = [](const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');)
      if (!x.empty()) v.push_back(x);
    return v;
  };
  cfg.formats = split(format);
  cfg.checks = split(checks);
  try {
    cfg.a_range = range_opt(ra);
    cfg.b_range = range_opt(rb);
    cfg.alpha_range = range_opt(ralpha);
    cfg.beta_range = range_opt(rbeta);
    cfg.lambda_range = range_opt(rlambda);
    cfg.q_range = range_opt(rq);
  } catch (const std::exception& e) {
    std::cout << violations_json(cfg.command, {{"ranges", e.what()}}).dump() << "\n";
    return kValidation;
  }
  return run(cfg, std::cout);
}
