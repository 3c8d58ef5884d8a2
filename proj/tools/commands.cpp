#include "commands.hpp"

#include "output.hpp"

#include "isolab/agmon.hpp"
#include "isolab/experiments.hpp"
#include "isolab/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>

namespace isolab::cli {

using nlohmann::json;

namespace {

// Accumulates named checks; "fail" anywhere fails the command.
class Checks {
 public:
  void pass(const std::string& name, json detail = json::object()) { add(name, "pass", std::move(detail)); }
  void fail(const std::string& name, json detail = json::object()) { add(name, "fail", std::move(detail)); }
  void not_applicable(const std::string& name, const std::string& reason) {
    add(name, "not applicable", {{"reason", reason}});
  }
  void expect(bool ok, const std::string& name, json detail = json::object()) {
    ok ? pass(name, std::move(detail)) : fail(name, std::move(detail));
  }
  bool failed() const { return failed_; }
  const json& list() const { return list_; }

 private:
  void add(const std::string& name, const char* status, json detail) {
    if (std::string(status) == "fail") failed_ = true;
    list_.push_back({{"name", name}, {"status", status}, {"detail", std::move(detail)}});
  }
  json list_ = json::array();
  bool failed_ = false;
};

CommandResult finish(const RunConfig& c, const std::string& name, json payload, const Checks& checks) {
  CommandResult r;
  r.name = name;
  r.report = json_header(c, name);
  r.report["status"] = checks.failed() ? "fail" : "pass";
  r.report["checks"] = checks.list();
  for (auto it = payload.begin(); it != payload.end(); ++it) r.report[it.key()] = it.value();
  r.exit_code = checks.failed() ? kInvariantFailure : kPass;
  if (c.wants("json")) write_json(c, name, r.report);
  return r;
}

bool degenerate(const RunConfig& c) { return c.alpha.amplitude == 0.0 || c.beta.amplitude == 0.0; }

std::string degenerate_reason(const RunConfig& c) {
  return c.beta.amplitude == 0.0 ? "beta amplitude is 0: the pair is identical"
                                 : "alpha amplitude is 0: the pair is related by reflection";
}

// Common grid for several potentials: the widest choose_domain answer.
GridSpec grid_for(const RunConfig& c, const std::vector<PotentialSpec>& vs, double h, Eigen::Index j) {
  const auto n = static_cast<std::size_t>(c.n);
  if (c.half_width) return GridSpec(*c.half_width, n);
  double L = 0.0;
  for (const auto& v : vs) {
    try {
      L = std::max(L, choose_domain(v, h, j, c.truncation_target, n).half_width());
    } catch (const std::runtime_error& e) {
      throw SolverFailure(h, j, e.what());
    }
  }
  return GridSpec(L, n);
}

SweepOptions sweep_options(const RunConfig& c, unsigned jobs) {
  SweepOptions o;
  o.n = static_cast<std::size_t>(c.n);
  o.truncation_target = c.truncation_target;
  o.half_width = c.half_width;
  o.solver = c.solver();
  o.jobs = jobs;
  return o;
}

json h_j(double h, Eigen::Index j) { return {{"h", h}, {"j", j}}; }

// potential ---------------------------------------------------------------

CommandResult potential_command(const RunConfig& c) {
  auto pair = c.pair();
  const int m = c.dump_points;
  std::vector<ExtendedReal> xs(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) xs[static_cast<std::size_t>(i)] = ExtendedReal(-c.dump_extent + 2.0 * c.dump_extent * i / (m - 1));
  auto phi_minus = tunneling_action_table(pair.minus, xs);
  auto phi_plus = tunneling_action_table(pair.plus, xs);

  CsvTable table{{"x", "V_minus", "V_plus", "phi_minus", "phi_plus"}, {}};
  for (std::size_t i = 0; i < xs.size(); ++i)
    table.rows.push_back({fmt(xs[i].to_double()), fmt(pair.minus(xs[i])), fmt(pair.plus(xs[i])), fmt(phi_minus[i]),
                          fmt(phi_plus[i])});
  if (c.wants("csv")) write_csv(c, "potential", "potential", table);

  Checks checks;
  auto iso = check_non_isometric(pair.minus, pair.plus, 1000);
  json detail{{"max_direct_diff", iso.max_direct_diff}, {"max_reflected_diff", iso.max_reflected_diff}};
  if (degenerate(c))
    checks.not_applicable("non_isometric", degenerate_reason(c));
  else
    checks.expect(iso.non_isometric(), "non_isometric", detail);
  return finish(c, "potential", {{"isometry", detail}, {"points", m}, {"extent", c.dump_extent}}, checks);
}

// spectrum ----------------------------------------------------------------

CommandResult spectrum_command(const RunConfig& c) {
  auto pair = c.pair();
  PotentialSpec v = c.spectrum_potential == "plus"    ? pair.plus
                    : c.spectrum_potential == "minus" ? pair.minus
                                                      : PotentialSpec();
  const double h = c.spectrum_h;
  GridSpec grid = grid_for(c, {v}, h, c.j_max);
  Spectrum s;
  try {
    s = solve_spectrum(v, h, c.j_max, grid, c.solver());
  } catch (const SolverFailure&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw SolverFailure(h, c.j_max, e.what());
  }

  CsvTable table{{"j", "E", "err"}, {}};
  json entries = json::array();
  for (const auto& e : s.entries) {
    table.rows.push_back({std::to_string(e.j), fmt(e.eigenvalue), fmt(e.error_estimate)});
    entries.push_back({{"j", e.j}, {"E", e.eigenvalue.to_double()}, {"err", e.error_estimate.to_double()}});
  }
  if (c.wants("csv")) write_csv(c, "spectrum", "spectrum", table);

  Checks checks;
  checks.pass("strictly_increasing");
  if (c.spectrum_potential == "harmonic") {
    double worst = 0.0;
    for (const auto& e : s.entries) {
      ExtendedReal exact = h * (2.0 * static_cast<double>(e.j) + 1.0);
      worst = std::max(worst, (abs(e.eigenvalue - exact) / exact).to_double());
    }
    checks.expect(worst <= 1e-10, "harmonic_oracle", {{"max_rel_err", worst}, {"tolerance", 1e-10}});
  }
  return finish(c, "spectrum",
                {{"h", h}, {"potential", c.spectrum_potential}, {"half_width", grid.half_width()}, {"n", c.n},
                 {"entries", entries}},
                checks);
}

// sweep -------------------------------------------------------------------

CsvTable sweep_table(const std::vector<SweepRecord>& records) {
  CsvTable t{{"h", "j", "half_width", "E_plus", "E_minus", "gap", "gap_error", "err_plus", "err_minus", "harmonic_ref",
              "usable"},
             {}};
  for (const auto& r : records)
    t.rows.push_back({fmt(r.h), std::to_string(r.j), fmt(r.half_width), fmt(r.e_plus), fmt(r.e_minus), fmt(r.gap),
                      fmt(r.gap_error), fmt(r.err_plus), fmt(r.err_minus), fmt(r.harmonic_ref),
                      r.usable() ? "1" : "0"});
  return t;
}

std::vector<SweepRecord> records_for(const std::vector<SweepRecord>& records, Eigen::Index j) {
  std::vector<SweepRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out), [&](const auto& r) { return r.j == j; });
  return out;
}

std::vector<Eigen::Index> indices_in(const std::vector<SweepRecord>& records) {
  std::vector<Eigen::Index> js;
  for (const auto& r : records)
    if (std::find(js.begin(), js.end(), r.j) == js.end()) js.push_back(r.j);
  std::sort(js.begin(), js.end());
  return js;
}

CommandResult sweep_command(const RunConfig& c, unsigned jobs, std::vector<SweepRecord>* keep) {
  auto records = sweep(c.pair(), c.h_grid(), c.j_max, sweep_options(c, jobs));
  if (c.wants("csv")) write_csv(c, "sweep", "sweep", sweep_table(records));

  Checks checks;
  json per_j = json::array();
  std::vector<AgreementSeries> agreement;
  const bool enough_h = c.h_grid().size() >= 4;
  if (!degenerate(c) && enough_h) agreement = superpoly_agreement(records);

  for (Eigen::Index j : indices_in(records)) {
    auto rows = records_for(records, j);
    json gaps = json::array();
    json bad = json::array();
    json noisy = json::array();
    for (const auto& r : rows) {
      gaps.push_back({{"h", r.h}, {"gap", r.gap.to_double()}, {"gap_error", r.gap_error.to_double()},
                      {"usable", r.usable()}});
      if (!(r.usable() && r.gap > 0.0)) bad.push_back(h_j(r.h, j));
      if (r.usable()) noisy.push_back(h_j(r.h, j));
    }
    // Onset: largest h from which every smaller h has a positive usable gap.
    json onset = nullptr;
    for (auto it = rows.rbegin(); it != rows.rend() && it->usable() && it->gap > 0.0; ++it) onset = it->h;

    const std::string suffix = "_j" + std::to_string(j);
    if (degenerate(c)) {
      checks.not_applicable("gap_positivity" + suffix, degenerate_reason(c));
      checks.expect(noisy.empty(), "gap_under_noise_floor" + suffix, {{"above_floor", noisy}});
    } else {
      checks.expect(bad.empty(), "gap_positivity" + suffix, {{"violations", bad}, {"onset_h", onset}});
    }

    json orders = json::array();
    if (!degenerate(c) && !enough_h) {
      checks.not_applicable("local_order_increasing" + suffix, "fewer than 4 h values");
    } else if (!degenerate(c)) {
      const auto& series = *std::find_if(agreement.begin(), agreement.end(), [&](const auto& s) { return s.j == j; });
      for (const auto& o : series.gap) orders.push_back({{"h_hi", o.h_hi}, {"h_lo", o.h_lo}, {"order", o.order}});
      double last = series.gap.empty() ? 0.0 : series.gap.back().order;
      checks.expect(series.gap_order_increasing() && last > 6.0, "local_order_increasing" + suffix,
                    {{"orders", orders}, {"final_order", last}, {"skipped_h", series.skipped_h}});
    }
    per_j.push_back({{"j", j}, {"gaps", gaps}, {"onset_h", onset}, {"local_orders", orders}});
  }
  if (keep) *keep = std::move(records);
  return finish(c, "sweep", {{"h_grid", c.h_grid()}, {"per_j", per_j}}, checks);
}

// fit ---------------------------------------------------------------------

std::vector<SweepRecord> load_sweep(const std::string& path, std::string& hash) {
  std::vector<SweepRecord> out;
  for (const auto& row : read_csv(path, &hash)) {
    std::map<std::string, std::string> f(row.begin(), row.end());
    auto need = [&](const char* key) -> const std::string& {
      auto it = f.find(key);
      if (it == f.end()) throw std::invalid_argument(path + ": missing column " + key);
      return it->second;
    };
    SweepRecord r;
    r.h = std::stod(need("h"));
    r.j = std::stol(need("j"));
    r.half_width = std::stod(need("half_width"));
    r.e_plus = ExtendedReal::parse(need("E_plus"));
    r.e_minus = ExtendedReal::parse(need("E_minus"));
    r.gap = ExtendedReal::parse(need("gap"));
    r.gap_error = ExtendedReal::parse(need("gap_error"));
    r.err_plus = ExtendedReal::parse(need("err_plus"));
    r.err_minus = ExtendedReal::parse(need("err_minus"));
    r.harmonic_ref = ExtendedReal::parse(need("harmonic_ref"));
    out.push_back(r);
  }
  if (out.empty()) throw std::invalid_argument(path + ": no sweep rows");
  return out;
}

CommandResult fit_command(const RunConfig& c, const std::vector<SweepRecord>& records, const std::string& source) {
  auto bracket = action_bracket(c.pair());
  json bracket_json{{"c_lo", bracket.c_lo},
                    {"c_hi", bracket.c_hi},
                    {"minus_through_beta", bracket.minus_through_beta},
                    {"plus_alpha_only", bracket.plus_alpha_only},
                    {"low_factor", c.bracket_low},
                    {"high_factor", c.bracket_high}};
  Checks checks;
  CsvTable table{{"j", "slope", "intercept", "r_squared", "h_min", "h_max", "points", "c_lo", "c_hi", "in_bracket",
                  "status"},
                 {}};
  json fits = json::array();
  json failures = json::array();

  Plot plot;
  plot.title = "log gap against 1/h";
  plot.x_label = "1/h";
  plot.y_label = "log(E- - E+)";
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};
  std::optional<std::pair<double, double>> anchor;  // (1/h, log gap) for the bracket lines
  double inv_h_min = INFINITY, inv_h_max = -INFINITY;

  for (Eigen::Index j : indices_in(records)) {
    auto rows = records_for(records, j);
    const std::string name = "rate_fit_j" + std::to_string(j);
    const char* color = colors[static_cast<std::size_t>(j) % 6];
    PlotSeries data{"j=" + std::to_string(j), {}, {}, color, false, true};
    for (const auto& r : rows) {
      inv_h_min = std::min(inv_h_min, 1.0 / r.h);
      inv_h_max = std::max(inv_h_max, 1.0 / r.h);
      if (r.gap > 0.0) {
        data.x.push_back(1.0 / r.h);
        data.y.push_back(std::log(r.gap.to_double()));
      }
    }
    if (!anchor && !data.x.empty()) anchor = std::pair{data.x.front(), data.y.front()};
    plot.series.push_back(data);
    try {
      RateFit fit = fit_rate(rows, bracket);
      bool in = fit.in_bracket(c.bracket_low, c.bracket_high);
      bool r2 = fit.r_squared >= c.fit_r_squared;
      json detail{{"j", j},           {"slope", fit.slope},   {"intercept", fit.intercept},
                  {"r_squared", fit.r_squared}, {"h_min", fit.h_min}, {"h_max", fit.h_max},
                  {"points", fit.points}, {"in_bracket", in}, {"r_squared_min", c.fit_r_squared}};
      checks.expect(in && r2, name, detail);
      fits.push_back(detail);
      table.rows.push_back({std::to_string(j), fmt(fit.slope), fmt(fit.intercept), fmt(fit.r_squared), fmt(fit.h_min),
                            fmt(fit.h_max), std::to_string(fit.points), fmt(bracket.c_lo), fmt(bracket.c_hi),
                            in ? "1" : "0", in && r2 ? "pass" : "fail"});
      PlotSeries line{"fit j=" + std::to_string(j), {1.0 / fit.h_max, 1.0 / fit.h_min}, {}, color, true, false};
      for (double x : line.x) line.y.push_back(fit.intercept - fit.slope * x);
      plot.series.push_back(line);
    } catch (const FitRefused& e) {
      json failure{{"h", e.h}, {"j", e.j}, {"reason", e.what()}};
      failures.push_back(failure);
      checks.fail(name, failure);
      table.rows.push_back({std::to_string(j), "", "", "", "", "", std::to_string(rows.size()), fmt(bracket.c_lo),
                            fmt(bracket.c_hi), "0", "refused"});
    } catch (const std::invalid_argument& e) {
      checks.fail(name, {{"j", j}, {"reason", e.what()}});
      table.rows.push_back({std::to_string(j), "", "", "", "", "", std::to_string(rows.size()), fmt(bracket.c_lo),
                            fmt(bracket.c_hi), "0", "refused"});
    }
  }
  if (anchor) {
    for (auto [label, rate] : {std::pair{"slope -c_lo", bracket.c_lo}, std::pair{"slope -c_hi", bracket.c_hi}}) {
      PlotSeries s{label, {inv_h_min, inv_h_max}, {}, "#7f7f7f", true, false};
      for (double x : s.x) s.y.push_back(anchor->second - rate * (x - anchor->first));
      plot.series.push_back(s);
    }
  }
  if (c.wants("csv")) write_csv(c, "fit", "fit", table);
  if (c.wants("svg")) write_svg(c, "fit", plot);
  json payload{{"source", source}, {"bracket", bracket_json}, {"fits", fits}};
  if (!failures.empty()) payload["refused"] = failures;
  return finish(c, "fit", payload, checks);
}

// hadamard ----------------------------------------------------------------

CommandResult hadamard_command(const RunConfig& c, unsigned jobs) {
  Checks checks;
  CsvTable table{{"orientation", "j", "fd_derivative", "quadrature_derivative", "rel_err", "direct", "integrated",
                  "ft_rel_err"},
                 {}};
  json rows = json::array();
  const double h = c.hadamard_h;
  if (c.beta.amplitude == 0.0) {
    checks.not_applicable("hadamard", "beta amplitude is 0: the family is constant");
    return finish(c, "hadamard", {{"rows", rows}}, checks);
  }
  for (Orientation o : {Orientation::Plus, Orientation::Minus}) {
    VariationFamily fam{BumpSpec(c.alpha.lo, c.alpha.hi, c.alpha.amplitude),
                        BumpSpec(c.beta.lo, c.beta.hi, c.beta.amplitude), o};
    const std::string orient = o == Orientation::Plus ? "plus" : "minus";
    for (Eigen::Index j = 0; j <= c.hadamard_j_max; ++j) {
      GridSpec grid = grid_for(c, {fam.at(0.0), fam.at(1.0)}, h, j);
      HadamardReport hr;
      FundamentalTheoremReport ft;
      try {
        hr = hadamard_check(fam, h, j, c.hadamard_t, c.hadamard_dt, grid, c.solver());
        ft = fundamental_theorem_check(fam, h, j, c.s_nodes, grid, c.solver(), jobs);
      } catch (const SolverFailure&) {
        throw;
      } catch (const std::runtime_error& e) {
        throw SolverFailure(h, j, e.what());
      }
      const std::string suffix = "_" + orient + "_j" + std::to_string(j);
      checks.expect(hr.rel_err <= c.hadamard_tol, "hadamard" + suffix,
                    {{"rel_err", hr.rel_err}, {"tolerance", c.hadamard_tol}});
      checks.expect(ft.rel_err <= c.fundamental_tol, "fundamental_theorem" + suffix,
                    {{"rel_err", ft.rel_err}, {"tolerance", c.fundamental_tol}, {"s_nodes", c.s_nodes}});
      table.rows.push_back({orient, std::to_string(j), fmt(hr.fd_derivative), fmt(hr.quadrature_derivative),
                            fmt(hr.rel_err), fmt(ft.direct), fmt(ft.integrated), fmt(ft.rel_err)});
      rows.push_back({{"orientation", orient},
                      {"j", j},
                      {"fd_derivative", hr.fd_derivative.to_double()},
                      {"quadrature_derivative", hr.quadrature_derivative.to_double()},
                      {"rel_err", hr.rel_err},
                      {"direct", ft.direct.to_double()},
                      {"integrated", ft.integrated.to_double()},
                      {"ft_rel_err", ft.rel_err}});
    }
  }
  if (c.wants("csv")) write_csv(c, "hadamard", "hadamard", table);
  return finish(c, "hadamard", {{"h", h}, {"t", c.hadamard_t}, {"dt", c.hadamard_dt}, {"rows", rows}}, checks);
}

// rescale -----------------------------------------------------------------

CommandResult rescale_command(const RunConfig& c) {
  PotentialSpec v = c.rescale_bumps ? c.pair().plus : PotentialSpec();
  Checks checks;
  CsvTable table{{"j", "h", "l2_diff", "linf_diff"}, {}};
  json out = json::array();
  for (Eigen::Index j = 0; j <= c.rescale_j_max; ++j) {
    std::vector<RescalingRow> rows;
    try {
      rows = rescaling_convergence(v, j, c.rescale_h, c.rescale_lo, c.rescale_hi, sweep_options(c, 1));
    } catch (const SolverFailure&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw SolverFailure(c.rescale_h.front(), j, e.what());
    }
    json series = json::array();
    for (const auto& r : rows) {
      table.rows.push_back({std::to_string(j), fmt(r.h), fmt(r.l2_diff), fmt(r.linf_diff)});
      series.push_back({{"h", r.h}, {"l2_diff", r.l2_diff}, {"linf_diff", r.linf_diff}});
    }
    const std::string suffix = "_j" + std::to_string(j);
    bool harmonic = !c.rescale_bumps || (c.alpha.amplitude == 0.0 && c.beta.amplitude == 0.0);
    if (harmonic) {
      double worst = 0.0;
      for (const auto& r : rows) worst = std::max({worst, r.l2_diff, r.linf_diff});
      checks.expect(worst <= c.harmonic_tol, "rescaled_matches_hermite" + suffix,
                    {{"max_diff", worst}, {"tolerance", c.harmonic_tol}});
    } else {
      json violations = json::array();
      for (std::size_t k = 1; k < rows.size(); ++k)
        if (!(rows[k].l2_diff < rows[k - 1].l2_diff) || !(rows[k].linf_diff < rows[k - 1].linf_diff))
          violations.push_back(h_j(rows[k].h, j));
      checks.expect(violations.empty(), "rescaled_difference_decreasing" + suffix, {{"violations", violations}});
    }
    out.push_back({{"j", j}, {"rows", series}});
  }
  if (c.wants("csv")) write_csv(c, "rescale", "rescale", table);
  return finish(c, "rescale",
                {{"potential", c.rescale_bumps ? "plus" : "harmonic"},
                 {"interval", {c.rescale_lo, c.rescale_hi}},
                 {"series", out}},
                checks);
}

// agmon -------------------------------------------------------------------

struct AgmonCell {
  std::string potential;
  double h = 0.0;
  Eigen::Index j = 0;
  std::optional<EnvelopeRow> envelope;
  std::string window_error;
  BoundaryValues boundary;
  double barrier_min_margin = INFINITY;
  int barrier_checks = 0;
  bool barrier_holds = true;
};

CommandResult agmon_command(const RunConfig& c, unsigned jobs) {
  auto pair = c.pair();
  auto hs = c.h_grid();
  AgmonWindow window(c.window_r, c.window_R, c.delta);
  std::vector<AgmonCell> cells;
  for (const char* pot : {"plus", "minus"})
    for (double h : hs)
      for (Eigen::Index j = 0; j <= c.j_max; ++j) cells.push_back({pot, h, j, {}, {}, {}, INFINITY, 0, true});

  std::map<double, GridSpec> grids;
  for (double h : hs) grids.emplace(h, grid_for(c, {pair.plus, pair.minus}, h, c.j_max));

  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    AgmonCell& cell = cells[i];
    const PotentialSpec& v = cell.potential == "plus" ? pair.plus : pair.minus;
    const GridSpec& grid = grids.at(cell.h);
    EigenfunctionSamples psi;
    try {
      psi = eigenfunction_extrapolated(v, cell.h, cell.j, grid, c.solver());
    } catch (const std::runtime_error& e) {
      throw SolverFailure(cell.h, cell.j, e.what());
    }
    try {
      cell.envelope = envelope_constants(psi, v, cell.h, window);
    } catch (const std::invalid_argument& e) {
      cell.window_error = e.what();
    }
    cell.boundary = boundary_value_scaled(psi, psi.eigenvalue, cell.h);
    double x1 = turning_point(psi.eigenvalue).to_double();
    for (double side : {1.0, -1.0}) {
      for (double x2 = c.window_r; x2 <= c.window_R + 1e-12; x2 += 0.5) {
        if (!(x2 > x1) || !(x2 * (1.0 + c.barrier_eps) < grid.half_width())) continue;
        auto b = barrier_comparison_check(psi, v, psi.eigenvalue, cell.h, x1, x2, c.barrier_eps, side);
        cell.barrier_min_margin = std::min(cell.barrier_min_margin, b.margin.to_double());
        cell.barrier_holds = cell.barrier_holds && b.holds;
        ++cell.barrier_checks;
      }
    }
  });

  CsvTable table{{"potential", "h", "j", "C_req", "D_req", "boundary_left", "boundary_right", "barrier_min_margin",
                  "barrier_checks"},
                 {}};
  for (const auto& cell : cells)
    table.rows.push_back({cell.potential, fmt(cell.h), std::to_string(cell.j),
                          cell.envelope ? fmt(cell.envelope->c_req) : "", cell.envelope ? fmt(cell.envelope->d_req) : "",
                          fmt(cell.boundary.left), fmt(cell.boundary.right),
                          cell.barrier_checks ? fmt(cell.barrier_min_margin) : "",
                          std::to_string(cell.barrier_checks)});
  if (c.wants("csv")) write_csv(c, "agmon", "agmon", table);

  Checks checks;
  json summary = json::array();
  for (const char* pot : {"plus", "minus"}) {
    for (Eigen::Index j = 0; j <= c.j_max; ++j) {
      std::vector<const AgmonCell*> mine;
      for (const auto& cell : cells)
        if (cell.potential == pot && cell.j == j) mine.push_back(&cell);
      const std::string suffix = std::string("_") + pot + "_j" + std::to_string(j);

      EnvelopeReport report;
      report.window = window;
      report.j = j;
      json window_errors = json::array();
      for (const auto* cell : mine) {
        if (cell->envelope)
          report.rows.push_back(*cell->envelope);
        else
          window_errors.push_back({{"h", cell->h}, {"j", j}, {"reason", cell->window_error}});
      }
      if (!window_errors.empty()) {
        checks.fail("envelope_bounded" + suffix, {{"window_errors", window_errors}});
      } else {
        checks.expect(report.bounded(c.envelope_factor), "envelope_bounded" + suffix,
                      {{"reference_C", report.reference().c_req.to_double()},
                       {"reference_D", report.reference().d_req.to_double()},
                       {"max_C", report.max_c().to_double()},
                       {"min_D", report.min_d().to_double()},
                       {"factor", c.envelope_factor}});
      }

      const AgmonCell* ref = *std::max_element(mine.begin(), mine.end(), [](auto a, auto b) { return a->h < b->h; });
      json collapsed = json::array();
      for (const auto* cell : mine)
        if (!(cell->boundary.left >= 0.5 * ref->boundary.left) || !(cell->boundary.right >= 0.5 * ref->boundary.right))
          collapsed.push_back(h_j(cell->h, j));
      checks.expect(collapsed.empty(), "boundary_no_collapse" + suffix,
                    {{"reference_left", ref->boundary.left.to_double()},
                     {"reference_right", ref->boundary.right.to_double()},
                     {"violations", collapsed}});

      json broken = json::array();
      int count = 0;
      for (const auto* cell : mine) {
        count += cell->barrier_checks;
        if (!cell->barrier_holds) broken.push_back(h_j(cell->h, j));
      }
      checks.expect(broken.empty() && count > 0, "barrier_holds" + suffix,
                    {{"configurations", count}, {"violations", broken}});
    }
  }
  for (const auto& cell : cells)
    summary.push_back({{"potential", cell.potential},
                       {"h", cell.h},
                       {"j", cell.j},
                       {"C_req", cell.envelope ? json(cell.envelope->c_req.to_double()) : json(nullptr)},
                       {"D_req", cell.envelope ? json(cell.envelope->d_req.to_double()) : json(nullptr)},
                       {"boundary_left", cell.boundary.left.to_double()},
                       {"boundary_right", cell.boundary.right.to_double()},
                       {"barrier_min_margin", cell.barrier_checks ? json(cell.barrier_min_margin) : json(nullptr)}});
  return finish(c, "agmon",
                {{"window", {{"r", c.window_r}, {"R", c.window_R}, {"delta", c.delta}}}, {"cells", summary}}, checks);
}

// hermite -----------------------------------------------------------------

CommandResult hermite_command(const RunConfig& c, unsigned jobs) {
  const int count = c.hermite_j_max - 1;
  struct Row {
    ExtendedReal max_root, tight, loose;
    double diff = 0.0;
  };
  std::vector<Row> rows(static_cast<std::size_t>(count));
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    int j = static_cast<int>(i) + 2;
    auto comp = companion_roots(j);
    auto bis = bisection_roots(j);
    Row& r = rows[i];
    r.max_root = ExtendedReal(0.0);
    for (const auto& x : comp) r.max_root = max(r.max_root, abs(x));
    r.tight = root_bound(j);
    r.loose = loose_root_bound(j);
    r.diff = bis.size() == comp.size() ? 0.0 : INFINITY;
    for (std::size_t k = 0; k < comp.size() && k < bis.size(); ++k)
      r.diff = std::max(r.diff, abs(comp[k] - bis[k]).to_double());
  });

  // The j = 2 root meets the tight bound exactly; allow for its last bits.
  constexpr double kSlack = 1e-26;
  Checks checks;
  CsvTable table{{"j", "max_root", "tight_bound", "loose_bound", "bisection_max_diff"}, {}};
  json chain_bad = json::array(), agree_bad = json::array(), out = json::array();
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int j = static_cast<int>(i) + 2;
    const Row& r = rows[i];
    table.rows.push_back({std::to_string(j), fmt(r.max_root), fmt(r.tight), fmt(r.loose), fmt(r.diff)});
    out.push_back({{"j", j},
                   {"max_root", r.max_root.to_double()},
                   {"tight_bound", r.tight.to_double()},
                   {"loose_bound", r.loose.to_double()},
                   {"bisection_max_diff", r.diff}});
    if (!(r.max_root <= r.tight + kSlack) || !(r.tight <= r.loose)) chain_bad.push_back(j);
    if (!(r.diff <= c.root_agreement)) agree_bad.push_back(j);
    worst = std::max(worst, r.diff);
  }
  if (c.wants("csv")) write_csv(c, "hermite", "hermite", table);
  checks.expect(chain_bad.empty(), "root_bound_chain", {{"violations", chain_bad}});
  checks.expect(agree_bad.empty(), "companion_matches_bisection",
                {{"max_diff", worst}, {"tolerance", c.root_agreement}, {"violations", agree_bad}});
  return finish(c, "hermite", {{"rows", out}}, checks);
}

CommandResult solver_failure(const RunConfig& c, const std::string& name, json failure) {
  CommandResult r;
  r.name = name;
  r.report = json_header(c, name);
  r.report["status"] = "solver failure";
  r.report["failure"] = std::move(failure);
  r.report["checks"] = json::array();
  r.exit_code = kSolverFailure;
  if (c.wants("json")) write_json(c, name, r.report);
  return r;
}

CommandResult guarded(const RunConfig& c, const std::string& name, const std::function<CommandResult()>& body) {
  try {
    return body();
  } catch (const SolverFailure& e) {
    return solver_failure(c, name, {{"h", e.h}, {"j", e.j}, {"reason", e.what()}});
  } catch (const std::runtime_error& e) {
    return solver_failure(c, name, {{"h", nullptr}, {"j", nullptr}, {"reason", e.what()}});
  }
}

CommandResult all_command(const RunConfig& c, const RunContext& ctx) {
  std::vector<CommandResult> results;
  std::vector<SweepRecord> records;
  results.push_back(guarded(c, "potential", [&] { return potential_command(c); }));
  results.push_back(guarded(c, "hermite", [&] { return hermite_command(c, ctx.jobs); }));
  results.push_back(guarded(c, "spectrum", [&] { return spectrum_command(c); }));
  results.push_back(guarded(c, "sweep", [&] { return sweep_command(c, ctx.jobs, &records); }));
  if (records.empty())
    results.push_back(solver_failure(c, "fit", {{"h", nullptr}, {"j", nullptr}, {"reason", "no sweep records"}}));
  else
    results.push_back(guarded(c, "fit", [&] { return fit_command(c, records, "sweep"); }));
  results.push_back(guarded(c, "hadamard", [&] { return hadamard_command(c, ctx.jobs); }));
  results.push_back(guarded(c, "rescale", [&] { return rescale_command(c); }));
  results.push_back(guarded(c, "agmon", [&] { return agmon_command(c, ctx.jobs); }));

  CommandResult r;
  r.name = "all";
  r.report = json_header(c, "all");
  json modules = json::object();
  for (const auto& m : results) {
    json failed = json::array();
    for (const auto& check : m.report["checks"])
      if (check["status"] == "fail") failed.push_back(check["name"]);
    json entry{{"status", m.report["status"]}, {"exit_code", m.exit_code}, {"failed_checks", failed}};
    if (m.report.contains("failure")) entry["failure"] = m.report["failure"];
    modules[m.name] = entry;
    r.exit_code = std::max(r.exit_code, m.exit_code);
  }
  r.report["status"] = r.exit_code == kPass ? "pass" : r.exit_code == kSolverFailure ? "solver failure" : "fail";
  r.report["modules"] = modules;
  // The summary is always written, whatever the formats.
  write_json(c, "summary", r.report);
  return r;
}

}  // namespace

CommandResult run(const std::string& subcommand, const RunConfig& c, const RunContext& ctx) {
  if (subcommand == "all") return all_command(c, ctx);
  return guarded(c, subcommand, [&]() -> CommandResult {
    if (subcommand == "potential") return potential_command(c);
    if (subcommand == "spectrum") return spectrum_command(c);
    if (subcommand == "sweep") return sweep_command(c, ctx.jobs, nullptr);
    if (subcommand == "fit") {
      if (ctx.fit_input.empty())
        return fit_command(c, sweep(c.pair(), c.h_grid(), c.j_max, sweep_options(c, ctx.jobs)), "sweep");
      std::string hash = "unknown";
      auto records = load_sweep(ctx.fit_input, hash);
      return fit_command(c, records, "sweep csv, config_hash " + hash);
    }
    if (subcommand == "hadamard") return hadamard_command(c, ctx.jobs);
    if (subcommand == "rescale") return rescale_command(c);
    if (subcommand == "agmon") return agmon_command(c, ctx.jobs);
    if (subcommand == "hermite") return hermite_command(c, ctx.jobs);
    throw std::invalid_argument("unknown subcommand " + subcommand);
  });
}

json failure_report(const CommandResult& r) {
  json out{{"schema_version", r.report.value("schema_version", kSchemaVersion)},
           {"subcommand", r.name},
           {"config_hash", r.report.value("config_hash", "")},
           {"status", r.report.value("status", "")},
           {"exit_code", r.exit_code}};
  if (r.report.contains("failure")) out["failure"] = r.report["failure"];
  json failed = json::array();
  if (r.report.contains("checks"))
    for (const auto& check : r.report["checks"])
      if (check["status"] == "fail") failed.push_back(check);
  if (r.report.contains("modules"))
    for (auto it = r.report["modules"].begin(); it != r.report["modules"].end(); ++it)
      if (it.value()["exit_code"] != 0) failed.push_back({{"name", it.key()}, {"detail", it.value()}});
  out["failed_checks"] = failed;
  return out;
}

}  // namespace isolab::cli
