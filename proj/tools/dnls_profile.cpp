// dnls_profile: command-line front end for the self-similar profile library.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dnls/cli.hpp"
#include "dnls/errors.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<double> a0, a1, y_max, rel_tol, abs_tol, fit_lo, fit_hi, grid_step, phi0;
  std::optional<std::string> out;
  std::string format = "csv";
  std::string compare;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "key = value config file");
  sub->add_option("--a0", o.a0, "A(0)");
  sub->add_option("--a1", o.a1, "A'(0)");
  sub->add_option("--y-max", o.y_max, "integrate on [-y_max, y_max]");
  sub->add_option("--rel-tol", o.rel_tol, "relative tolerance");
  sub->add_option("--abs-tol", o.abs_tol, "absolute tolerance");
  sub->add_option("--fit-lo", o.fit_lo, "fit window start in eta");
  sub->add_option("--fit-hi", o.fit_hi, "fit window end in eta");
  sub->add_option("--grid-step", o.grid_step, "output grid spacing in y");
  sub->add_option("--phi0", o.phi0, "phase at y = 0");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--compare", o.compare, "reference directory to compare outputs with");
}

dnls::cli::RunConfig resolve(const Overrides& o) {
  dnls::cli::RunConfig c;
  if (!o.config.empty()) c = dnls::cli::load_config(o.config);
  if (o.a0) c.a0 = *o.a0;
  if (o.a1) c.a1 = *o.a1;
  if (o.y_max) c.y_max = *o.y_max;
  if (o.rel_tol) c.solver.rel_tol = *o.rel_tol;
  if (o.abs_tol) c.solver.abs_tol = *o.abs_tol;
  if (o.fit_lo) c.fit_lo = *o.fit_lo;
  if (o.fit_hi) c.fit_hi = *o.fit_hi;
  if (o.grid_step) c.grid_step = *o.grid_step;
  if (o.phi0) c.phi0 = *o.phi0;
  if (o.out) c.output_dir = *o.out;
  return c;
}

dnls::cli::Options options(const Overrides& o) {
  dnls::cli::Options opt;
  opt.format = o.format == "json" ? dnls::cli::Format::Json : dnls::cli::Format::Csv;
  opt.compare_dir = o.compare;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-similar profiles of the derivative NLS"};
  app.set_version_flag("--version", dnls::cli::kToolVersion);
  app.require_subcommand(1);

  Overrides o;
  std::vector<double> a0_list;
  std::vector<double> ys;

  auto* solve = app.add_subcommand("solve", "integrate both sides and write trajectory, energies, summary");
  auto* fit = app.add_subcommand("fit", "fit the logarithmic phase law on each side");
  auto* sweep = app.add_subcommand("sweep", "solve and fit over a list of A0");
  auto* bessel = app.add_subcommand("bessel", "tabulate the linearized solutions");
  auto* check = app.add_subcommand("check", "run the invariant checks");
  auto* exp = app.add_subcommand("export", "write the polar B-paths");
  for (auto* s : {solve, fit, sweep, check, exp}) add_common(s, o);
  sweep->add_option("--a0-list", a0_list, "A0 values")->required()->delimiter(',');
  bessel->add_option("--y", ys, "y values")->required()->delimiter(',');
  bessel->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bessel) return dnls::cli::cmd_bessel(ys, options(o), std::cout);
    const auto cfg = resolve(o);
    const auto opt = options(o);
    if (*solve) return dnls::cli::cmd_solve(cfg, opt, std::cout);
    if (*fit) return dnls::cli::cmd_fit(cfg, opt, std::cout);
    if (*sweep) return dnls::cli::cmd_sweep(cfg, a0_list, opt, std::cout);
    if (*check) return dnls::cli::cmd_check(cfg, std::cout);
    if (*exp) return dnls::cli::cmd_export(cfg, opt, std::cout);
  } catch (const dnls::Error& e) {
    std::cerr << "error (" << dnls::to_string(e.kind()) << "): " << e.what() << "\n";
    return 2;
  }
  return 0;
}
