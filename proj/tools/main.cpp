// isolab: command-line driver for the isospectral-pair experiments.

#include "commands.hpp"
#include "config.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

using namespace isolab::cli;
using nlohmann::json;

namespace {

// Options bind to scratch storage and are copied into the config only when
// given, so flags override the config file and absent flags leave it alone.
class Overrides {
 public:
  template <class T, class Apply>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& help, Apply apply) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    entries_.push_back({opt, [value, apply](RunConfig& c) { apply(c, *value); }});
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& name, const std::string& help,
                    std::function<void(RunConfig&)> apply) {
    CLI::Option* opt = app->add_flag(name, help);
    entries_.push_back({opt, std::move(apply)});
    return opt;
  }

  void apply(RunConfig& c) const {
    for (const auto& [opt, fn] : entries_)
      if (opt->count() > 0) fn(c);
  }

 private:
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> entries_;
};

void set_bump(BumpConfig& b, const std::vector<double>& v) { b = {v[0], v[1], v[2]}; }

int config_error(const std::vector<std::string>& errors) {
  json report{{"schema_version", kSchemaVersion}, {"status", "config error"}, {"exit_code", kConfigError},
              {"errors", errors}};
  std::cerr << report.dump() << "\n";
  return kConfigError;
}

const char* kColumns = R"(CSV columns by subcommand (files go to <out>/<subcommand>.csv):
  potential  x, V_minus, V_plus, phi_minus, phi_plus
  spectrum   j, E, err
  sweep      h, j, half_width, E_plus, E_minus, gap, gap_error, err_plus,
             err_minus, harmonic_ref, usable
  fit        j, slope, intercept, r_squared, h_min, h_max, points, c_lo, c_hi,
             in_bracket, status
  hadamard   orientation, j, fd_derivative, quadrature_derivative, rel_err,
             direct, integrated, ft_rel_err
  rescale    j, h, l2_diff, linf_diff
  agmon      potential, h, j, C_req, D_req, boundary_left, boundary_right,
             barrier_min_margin, barrier_checks
  hermite    j, max_root, tight_bound, loose_bound, bisection_max_diff
Every file starts with '#' lines giving schema_version, config_hash and the
config. Extended-precision values carry 32 significant digits.

Exit codes: 0 pass, 2 invariant failure, 3 config error, 4 solver failure.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of semiclassical double-bump potentials and the checks around them."};
  app.footer(kColumns);
  app.require_subcommand(1, 1);
  app.fallthrough();

  Overrides o;
  std::string config_file;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string fit_input;

  app.add_option("--config", config_file, "JSON config file; flags given alongside override it")
      ->check(CLI::ExistingFile);
  app.add_option("--jobs", jobs, "Parallel (h, j) tasks (default: available cores)")->check(CLI::Range(1u, 4096u));
  o.add<std::string>(&app, "--out", "Output directory", [](RunConfig& c, const std::string& v) { c.output_dir = v; });
  o.add<std::vector<std::string>>(&app, "--format", "Output formats among csv, json, svg",
                                  [](RunConfig& c, const std::vector<std::string>& v) { c.formats = v; })
      ->delimiter(',');
  o.add<std::vector<double>>(&app, "--alpha", "alpha bump as lo,hi,amplitude",
                             [](RunConfig& c, const std::vector<double>& v) { set_bump(c.alpha, v); })
      ->delimiter(',')
      ->expected(3);
  o.add<std::vector<double>>(&app, "--beta", "beta bump as lo,hi,amplitude",
                             [](RunConfig& c, const std::vector<double>& v) { set_bump(c.beta, v); })
      ->delimiter(',')
      ->expected(3);
  o.add<double>(&app, "--alpha-amp", "alpha amplitude", [](RunConfig& c, double v) { c.alpha.amplitude = v; });
  o.add<double>(&app, "--beta-amp", "beta amplitude", [](RunConfig& c, double v) { c.beta.amplitude = v; });
  o.add<double>(&app, "--h-max", "Largest h of the log-spaced grid", [](RunConfig& c, double v) { c.h_hi = v; });
  o.add<double>(&app, "--h-min", "Smallest h of the log-spaced grid", [](RunConfig& c, double v) { c.h_lo = v; });
  o.add<int>(&app, "--h-count", "Number of log-spaced h values", [](RunConfig& c, int v) { c.h_count = v; });
  o.add<std::vector<double>>(&app, "--h-values", "Explicit decreasing h values (override the log grid)",
                             [](RunConfig& c, const std::vector<double>& v) { c.h_values = v; })
      ->delimiter(',');
  o.add<int>(&app, "--j-max", "Largest eigen-index for sweeps and envelopes", [](RunConfig& c, int v) { c.j_max = v; });
  o.add<int>(&app, "--n", "Interior points of the base grid", [](RunConfig& c, int v) { c.n = v; });
  o.add<double>(&app, "--L", "Grid half-width (default: chosen per h)",
                [](RunConfig& c, double v) { c.half_width = v; });
  o.add<double>(&app, "--truncation-target", "Domain truncation target used to choose L",
                [](RunConfig& c, double v) { c.truncation_target = v; });
  o.add<double>(&app, "--delta", "Envelope exponent slack", [](RunConfig& c, double v) { c.delta = v; });
  o.add<double>(&app, "--window-r", "Inner radius of the envelope window",
                [](RunConfig& c, double v) { c.window_r = v; });
  o.add<double>(&app, "--window-R", "Outer radius of the envelope window",
                [](RunConfig& c, double v) { c.window_R = v; });
  o.add<double>(&app, "--eigen-tol", "Bisection width", [](RunConfig& c, double v) { c.eigen_tol = v; });
  o.add<double>(&app, "--residual-tol", "Inverse iteration residual target",
                [](RunConfig& c, double v) { c.residual_tol = v; });
  o.add<std::uint64_t>(&app, "--seed", "Reserved; every computation is deterministic",
                       [](RunConfig& c, std::uint64_t v) { c.seed = v; });

  app.add_subcommand("potential", "Dump V-, V+ and their tunneling actions on a uniform grid");
  app.add_subcommand("spectrum", "Extrapolated eigenvalues 0..j_max of one potential at one h");
  app.add_subcommand("sweep", "Gaps E- - E+ across the h grid with positivity and local-order checks");
  app.add_subcommand("fit", "Fit log(gap) against 1/h and compare with the action bracket");
  app.add_subcommand("hadamard", "Hadamard variational formula and its integrated form");
  app.add_subcommand("rescale", "Rescaled eigenfunctions against Hermite functions");
  app.add_subcommand("agmon", "Envelope constants, turning-point values and barrier checks");
  app.add_subcommand("hermite", "Hermite root bounds from the companion matrix");
  app.add_subcommand("all", "Every subcommand plus summary.json");

  auto* potential = app.get_subcommand("potential");
  o.add<double>(potential, "--extent", "Dump over [-extent, extent]", [](RunConfig& c, double v) { c.dump_extent = v; });
  o.add<int>(potential, "--points", "Number of dump points", [](RunConfig& c, int v) { c.dump_points = v; });

  auto* spectrum = app.get_subcommand("spectrum");
  o.add<double>(spectrum, "--h-value", "Semiclassical parameter", [](RunConfig& c, double v) { c.spectrum_h = v; });
  o.add<std::string>(spectrum, "--potential", "plus, minus or harmonic",
                     [](RunConfig& c, const std::string& v) { c.spectrum_potential = v; });

  app.get_subcommand("fit")->add_option("--input", fit_input, "Sweep CSV to fit instead of running a sweep")
      ->check(CLI::ExistingFile);

  auto* hadamard = app.get_subcommand("hadamard");
  o.add<double>(hadamard, "--h-value", "Semiclassical parameter", [](RunConfig& c, double v) { c.hadamard_h = v; });
  o.add<double>(hadamard, "--t", "Family parameter", [](RunConfig& c, double v) { c.hadamard_t = v; });
  o.add<double>(hadamard, "--dt", "Central difference step", [](RunConfig& c, double v) { c.hadamard_dt = v; });
  o.add<int>(hadamard, "--jmax", "Largest eigen-index", [](RunConfig& c, int v) { c.hadamard_j_max = v; });
  o.add<int>(hadamard, "--s-nodes", "Gauss-Legendre nodes in s (8, 16 or 32)",
             [](RunConfig& c, int v) { c.s_nodes = v; });

  auto* rescale = app.get_subcommand("rescale");
  o.add<std::vector<double>>(rescale, "--rescale-h", "h values, decreasing",
                             [](RunConfig& c, const std::vector<double>& v) { c.rescale_h = v; })
      ->delimiter(',');
  o.add<int>(rescale, "--jmax", "Largest eigen-index", [](RunConfig& c, int v) { c.rescale_j_max = v; });
  o.add<std::vector<double>>(rescale, "--interval", "y interval as lo,hi",
                             [](RunConfig& c, const std::vector<double>& v) {
                               c.rescale_lo = v[0];
                               c.rescale_hi = v[1];
                             })
      ->delimiter(',')
      ->expected(2);
  o.flag(rescale, "--no-bumps", "Use the pure harmonic potential", [](RunConfig& c) { c.rescale_bumps = false; });

  o.add<int>(app.get_subcommand("hermite"), "--jmax", "Largest order (rows j = 2..jmax)",
             [](RunConfig& c, int v) { c.hermite_j_max = v; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config_error({std::string("arguments: ") + e.what()});
  }

  RunConfig config;
  std::vector<std::string> errors;
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    json file = json::parse(in, nullptr, false);
    if (file.is_discarded())
      errors.push_back("config: " + config_file + " is not valid JSON");
    else
      merge_json(config, file, errors);
  }
  if (!errors.empty()) return config_error(errors);
  o.apply(config);
  errors = validate(config);
  if (!errors.empty()) return config_error(errors);

  const std::string name = app.get_subcommands().front()->get_name();
  CommandResult result;
  try {
    result = run(name, config, RunContext{jobs, fit_input});
  } catch (const std::invalid_argument& e) {
    return config_error({std::string("arguments: ") + e.what()});
  } catch (const std::filesystem::filesystem_error& e) {
    return config_error({std::string("output.dir: ") + e.what()});
  }

  std::cout << name << ": " << result.report.value("status", "") << " (config " << config_hash(config) << ")\n";
  if (result.report.contains("checks"))
    for (const auto& check : result.report["checks"])
      std::cout << "  " << check["status"].get<std::string>() << "  " << check["name"].get<std::string>() << "\n";
  if (result.report.contains("modules"))
    for (auto it = result.report["modules"].begin(); it != result.report["modules"].end(); ++it)
      std::cout << "  " << it.value()["status"].get<std::string>() << "  " << it.key() << "\n";
  if (result.exit_code != kPass) std::cerr << failure_report(result).dump() << "\n";
  return result.exit_code;
}
