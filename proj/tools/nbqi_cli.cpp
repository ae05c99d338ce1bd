// nbqi: command-line front end for the quasi-interpolation harness.
//
// Exit codes: 0 success, 1 some report row failed, 2 usage or data error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nbqi/harness.hpp"
#include "nbqi/norms.hpp"

namespace {

using namespace nbqi;

struct ExperimentFlags {
  std::string config;
  std::vector<std::string> operators;
  std::vector<int> degrees;
  std::vector<std::string> partitions;
  std::vector<int> p_values;
  std::optional<int> grid;
  std::optional<int> samples;
  std::optional<int> quadrature;
  bool kernel = false;
  bool no_lebesgue = false;
  std::optional<std::string> function;
  std::optional<int> levels;
  std::optional<std::string> base;
  std::vector<double> h;
  std::string out;
  std::string summary;
};

void add_output_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("-o,--out", f.out, "CSV output file (default: stdout)");
  cmd->add_option("--summary", f.summary, "JSON summary file (default: stderr)");
}

void add_sweep_flags(CLI::App* cmd, ExperimentFlags& f, bool strides) {
  cmd->add_option("--config", f.config, "JSON experiment config; flags override its fields")
      ->check(CLI::ExistingFile);
  cmd->add_option("--qi", f.operators,
                  "operator: q2, q2star, qpstar, q3, g1, g2, gpstar [:p=P][:q=Q] (repeatable)");
  cmd->add_option("--m", f.degrees, "spline degree (repeatable; default 2..6, q3 uses 3)");
  cmd->add_option("--partitions", f.partitions,
                  "kind:params, e.g. uniform:40, geometric:40:rho=2, "
                  "random:200:seed=7:n=40:r=3, section11:h=1000, file:knots.txt (repeatable)");
  if (strides) cmd->add_option("--p", f.p_values, "stride (repeatable; default m..m+2)");
  cmd->add_option("--grid", f.grid, "samples per knot interval for Lebesgue maxima (default 64)");
  cmd->add_option("--quadrature", f.quadrature,
                  "Gauss nodes per knot interval for M-spline means (default ceil((m+6)/2))");
}

ExperimentConfig make_config(const std::string& experiment, const ExperimentFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) c = load_config(f.config);
  c.experiment = experiment;
  if (!f.operators.empty()) c.operators = f.operators;
  if (!f.degrees.empty()) c.degrees = f.degrees;
  if (!f.partitions.empty()) c.partitions = f.partitions;
  if (!f.p_values.empty()) c.p_values = f.p_values;
  if (f.grid) c.points_per_interval = *f.grid;
  if (f.samples) c.samples = *f.samples;
  if (f.quadrature) c.quadrature_nodes = *f.quadrature;
  if (f.kernel) c.integral_kernel = true;
  if (f.no_lebesgue) c.lebesgue = false;
  if (f.function) c.function = *f.function;
  if (f.levels) c.levels = *f.levels;
  if (f.base) c.base_partition = *f.base;
  if (!f.h.empty()) c.h_values = f.h;
  if (c.points_per_interval < 1) throw ParameterError("--grid must be >= 1");
  return c;
}

std::ostream& open_or(std::ofstream& file, const std::string& path, std::ostream& fallback) {
  if (path.empty()) return fallback;
  file.open(path);
  if (!file) throw DataError("cannot write " + path);
  return file;
}

int run_and_write(const ExperimentConfig& c, const ExperimentFlags& f) {
  const ExperimentReport report = run_experiment(c);
  std::ofstream csv_file, json_file;
  report.write_csv(open_or(csv_file, f.out, std::cout));
  open_or(json_file, f.summary, std::cerr) << report.summary_json() << '\n';
  return report.fail_count() == 0 ? 0 : 1;
}

struct SingleFlags {
  std::string qi;
  int m = 3;
  std::optional<int> p;
  std::string partition;
  int grid = 64;
  bool kernel = false;
  std::string out;
};

void add_single_flags(CLI::App* cmd, SingleFlags& f) {
  cmd->add_option("--qi", f.qi, "operator: q2, q2star, qpstar, q3, g1, g2, gpstar")->required();
  cmd->add_option("--m", f.m, "spline degree")->capture_default_str();
  cmd->add_option("--p", f.p, "stride for qpstar/gpstar (default m)");
  cmd->add_option("--partition", f.partition, "kind:params, one window")->required();
  cmd->add_option("-o,--out", f.out, "CSV output file (default: stdout)");
}

QuasiInterpolant single_operator(const SingleFlags& f) {
  const OperatorSpec op = parse_operator(f.qi);
  const auto windows = generate(parse_partition(f.partition), f.m);
  if (windows.size() != 1) throw ParameterError("--partition must describe exactly one window");
  return build_operator(op, windows.front().window, f.p.value_or(op.p.value_or(f.m)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spline quasi-interpolants: exactness, norm bounds, near-best certificates, "
               "convergence and the stretched-interval study.\n"
               "Exit codes: 0 success, 1 failed rows, 2 usage or data error.\n"
               "QI_THREADS caps worker threads."};
  app.require_subcommand(1);

  ExperimentFlags ex, bd, nb, cv, s11;

  auto* exactness = app.add_subcommand("exactness", "reproduce monomials e_0..e_q at sample points");
  add_sweep_flags(exactness, ex, false);
  exactness->add_option("--samples", ex.samples, "sample points per operator (default 200)");
  add_output_flags(exactness, ex);

  auto* bounds = app.add_subcommand("bounds", "max functional l1 norms against the closed-form bounds");
  add_sweep_flags(bounds, bd, false);
  bounds->add_flag("--kernel", bd.kernel, "integral operators: sample the kernel Lebesgue function");
  bounds->add_flag("--no-lebesgue", bd.no_lebesgue, "skip the sampled Lebesgue rows");
  add_output_flags(bounds, bd);

  auto* nearbest = app.add_subcommand("nearbest", "l1-optimal stencils, conditions and certificates");
  add_sweep_flags(nearbest, nb, true);
  add_output_flags(nearbest, nb);

  auto* converge = app.add_subcommand("converge", "errors and orders under dyadic refinement");
  add_sweep_flags(converge, cv, false);
  converge->add_option("--function", cv.function, "sin, exp, runge, e2, e3 (default sin)");
  converge->add_option("--levels", cv.levels, "refinement levels (default 5)");
  converge->add_option("--base", cv.base,
                       "base partition, mapped onto the measuring interval with a quarter-length "
                       "margin (default random:1:seed=1:n=24:r=1.5)");
  add_output_flags(converge, cv);

  auto* section11 = app.add_subcommand("section11", "cubic operator on the single stretched interval");
  section11->set_help_flag("--help", "Print this help message and exit");
  section11->add_option("--h", s11.h, "stretched interval length (repeatable; default 1 10 100 1000 10000)");
  section11->add_option("--grid", s11.grid, "samples per knot interval (default 64)");
  add_output_flags(section11, s11);

  SingleFlags lf, cf;
  auto* lebesgue = app.add_subcommand("lebesgue", "sampled Lebesgue function of one operator");
  add_single_flags(lebesgue, lf);
  lebesgue->add_option("--grid", lf.grid, "samples per knot interval")->capture_default_str();
  lebesgue->add_flag("--kernel", lf.kernel, "integral operators: kernel Lebesgue function");

  auto* coeffs = app.add_subcommand("coeffs", "dump functional weights of one operator");
  add_single_flags(coeffs, cf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (exactness->parsed()) return run_and_write(make_config("exactness", ex), ex);
    if (bounds->parsed()) return run_and_write(make_config("bounds", bd), bd);
    if (nearbest->parsed()) return run_and_write(make_config("nearbest", nb), nb);
    if (converge->parsed()) return run_and_write(make_config("convergence", cv), cv);
    if (section11->parsed()) return run_and_write(make_config("section11", s11), s11);
    if (lebesgue->parsed()) {
      const QuasiInterpolant qi = single_operator(lf);
      LebesgueOptions opt;
      opt.points_per_interval = lf.grid;
      opt.integral_kernel = lf.kernel;
      const LebesgueProfile prof = lebesgue_sample(qi, opt);
      std::ofstream file;
      prof.write_csv(open_or(file, lf.out, std::cout));
      nlohmann::ordered_json j;
      j["operator"] = qi.name();
      j["kind"] = to_string(prof.kind);
      j["max"] = prof.max;
      j["argmax"] = prof.argmax;
      j["nu1"] = nu1_bound(qi);
      std::cerr << j.dump(2) << '\n';
      return 0;
    }
    if (coeffs->parsed()) {
      const QuasiInterpolant qi = single_operator(cf);
      std::ofstream file;
      write_coefficients_csv(open_or(file, cf.out, std::cout), qi);
      return 0;
    }
  } catch (const nbqi::Error& e) {
    std::cerr << "nbqi: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
