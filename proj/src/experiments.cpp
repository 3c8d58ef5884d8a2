#include "isolab/experiments.hpp"

#include "isolab/hermite.hpp"
#include "isolab/quadrature.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace isolab {

namespace {

std::string tag(double h, Eigen::Index j, const std::string& what) {
  std::ostringstream os;
  os << "(h=" << h << ", j=" << j << "): " << what;
  return os.str();
}

}  // namespace

SolverFailure::SolverFailure(double h_, Eigen::Index j_, const std::string& what)
    : std::runtime_error(tag(h_, j_, what)), h(h_), j(j_) {}

FitRefused::FitRefused(double h_, Eigen::Index j_, const std::string& what)
    : std::runtime_error(tag(h_, j_, what)), h(h_), j(j_) {}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

std::vector<double> log_spaced_descending(double hi, double lo, std::size_t count) {
  if (!(hi > lo && lo > 0.0) || count < 2) throw std::invalid_argument("log spacing needs hi > lo > 0 and two points");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = hi * std::pow(lo / hi, static_cast<double>(k) / static_cast<double>(count - 1));
  out.back() = lo;
  return out;
}

SweepRecord make_record(double h, Eigen::Index j, double half_width, const LevelEigenvalues& plus,
                        const LevelEigenvalues& minus) {
  SweepRecord r;
  r.h = h;
  r.j = j;
  r.half_width = half_width;
  auto ep = extrapolate(plus);
  auto em = extrapolate(minus);
  r.e_plus = ep.value;
  r.e_minus = em.value;
  r.err_plus = ep.error_estimate;
  r.err_minus = em.error_estimate;
  std::array<ExtendedReal, 3> gaps;
  for (std::size_t k = 0; k < 3; ++k) gaps[k] = minus.values[k] - plus.values[k];
  auto g = richardson(gaps);
  r.gap = g.value;
  r.gap_error = abs(g.last_correction) + 2.0 * (plus.roundoff + minus.roundoff);
  r.harmonic_ref = ExtendedReal(h) * (2.0 * static_cast<double>(j) + 1.0);
  return r;
}

std::vector<SweepRecord> sweep(const PotentialPair& pair, const std::vector<double>& h_grid, Eigen::Index j_max,
                               const SweepOptions& options) {
  if (h_grid.empty()) throw std::invalid_argument("sweep: empty h grid");
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    if (!(h_grid[k] > 0.0)) throw std::invalid_argument("sweep: h values must be positive");
    if (k > 0 && !(h_grid[k] < h_grid[k - 1])) throw std::invalid_argument("sweep: h grid must be strictly descending");
  }
  if (j_max < 0 || j_max > kMaxSweepIndex) throw std::invalid_argument("sweep: j_max must lie in [0, 5]");

  const std::size_t nj = static_cast<std::size_t>(j_max + 1);
  const std::size_t cells = h_grid.size() * nj;
  // Task 2c is the plus potential of cell c, 2c + 1 the minus one.
  std::vector<LevelEigenvalues> levels(2 * cells);
  std::vector<GridSpec> grids(h_grid.size());
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    double h = h_grid[k];
    try {
      if (options.half_width) {
        grids[k] = GridSpec(*options.half_width, options.n);
      } else {
        // The wider of the two domains needed by the highest level.
        auto a = choose_domain(pair.plus, h, j_max, options.truncation_target, options.n);
        auto b = choose_domain(pair.minus, h, j_max, options.truncation_target, options.n);
        grids[k] = a.half_width() >= b.half_width() ? a : b;
      }
    } catch (const std::exception& e) {
      throw SolverFailure(h, j_max, e.what());
    }
  }
  parallel_for(2 * cells, options.jobs, [&](std::size_t task) {
    std::size_t cell = task / 2;
    std::size_t k = cell / nj;
    auto j = static_cast<Eigen::Index>(cell % nj);
    const PotentialSpec& v = task % 2 == 0 ? pair.plus : pair.minus;
    try {
      levels[task] = solve_levels(v, h_grid[k], j, grids[k], options.solver);
    } catch (const std::exception& e) {
      throw SolverFailure(h_grid[k], j, e.what());
    }
  });
  std::vector<SweepRecord> out;
  out.reserve(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t k = cell / nj;
    auto j = static_cast<Eigen::Index>(cell % nj);
    out.push_back(make_record(h_grid[k], j, grids[k].half_width(), levels[2 * cell], levels[2 * cell + 1]));
  }
  return out;
}

std::vector<LocalOrder> local_orders(const std::vector<double>& h, const std::vector<ExtendedReal>& values,
                                     const std::vector<ExtendedReal>& errors) {
  if (h.size() != values.size() || h.size() != errors.size())
    throw std::invalid_argument("local_orders: mismatched lengths");
  auto usable = [&](std::size_t k) { return abs(values[k]) > kNoiseFactor * errors[k] && values[k] != 0.0; };
  std::vector<LocalOrder> out;
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    if (!usable(k) || !usable(k + 1)) continue;
    double ratio = (log(abs(values[k])) - log(abs(values[k + 1]))).to_double();
    out.push_back({h[k], h[k + 1], ratio / std::log(h[k] / h[k + 1])});
  }
  return out;
}

bool AgreementSeries::gap_order_increasing() const {
  if (gap.size() < 2) return false;
  for (std::size_t k = 1; k < gap.size(); ++k)
    if (!(gap[k].order > gap[k - 1].order)) return false;
  return true;
}

std::vector<AgreementSeries> superpoly_agreement(const std::vector<SweepRecord>& records) {
  std::vector<Eigen::Index> js;
  for (const auto& r : records)
    if (std::find(js.begin(), js.end(), r.j) == js.end()) js.push_back(r.j);
  std::sort(js.begin(), js.end());
  std::vector<AgreementSeries> out;
  for (auto j : js) {
    std::vector<SweepRecord> rows;
    for (const auto& r : records)
      if (r.j == j) rows.push_back(r);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
    if (rows.size() < 4) throw std::invalid_argument("superpoly_agreement needs at least 4 h values");
    std::vector<double> h;
    std::vector<ExtendedReal> gap, gap_err, dp, dp_err, dm, dm_err;
    AgreementSeries s;
    s.j = j;
    for (const auto& r : rows) {
      h.push_back(r.h);
      gap.push_back(r.gap);
      gap_err.push_back(r.gap_error);
      dp.push_back(r.e_plus - r.harmonic_ref);
      dp_err.push_back(r.err_plus);
      dm.push_back(r.e_minus - r.harmonic_ref);
      dm_err.push_back(r.err_minus);
      if (!r.usable()) s.skipped_h.push_back(r.h);
    }
    s.gap = local_orders(h, gap, gap_err);
    s.plus_vs_harmonic = local_orders(h, dp, dp_err);
    s.minus_vs_harmonic = local_orders(h, dm, dm_err);
    out.push_back(std::move(s));
  }
  return out;
}

ActionBracket action_bracket(const PotentialPair& pair) {
  ActionBracket b;
  const double lo = pair.beta.support_lo;
  const double hi = pair.beta.support_hi;
  b.c_lo = 2.0 * tunneling_action(pair.minus, ExtendedReal(-lo)).to_double();
  b.c_hi = 2.0 * tunneling_action(pair.plus, ExtendedReal(hi)).to_double();
  b.minus_through_beta = 2.0 * tunneling_action(pair.minus, ExtendedReal(-hi)).to_double();
  PotentialSpec alpha_only({{pair.alpha, Orientation::Plus}});
  b.plus_alpha_only = 2.0 * tunneling_action(alpha_only, ExtendedReal(hi)).to_double();
  return b;
}

RateFit fit_rate(const std::vector<SweepRecord>& records, const ActionBracket& bracket) {
  if (records.size() < 5) throw std::invalid_argument("fit_rate needs at least 5 points");
  const Eigen::Index j = records.front().j;
  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixX2d a(n, 2);
  Eigen::VectorXd b(n);
  RateFit fit;
  fit.j = j;
  fit.h_min = records.front().h;
  fit.h_max = records.front().h;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    if (r.j != j) throw std::invalid_argument("fit_rate: records mix several j");
    if (!(r.gap > 0.0)) throw FitRefused(r.h, r.j, "gap is not positive (" + to_string(r.gap, 6) + ")");
    if (!r.usable()) throw FitRefused(r.h, r.j, "gap is under the noise floor");
    a(i, 0) = 1.0;
    a(i, 1) = -1.0 / r.h;
    b(i) = log(r.gap).to_double();
    fit.h_min = std::min(fit.h_min, r.h);
    fit.h_max = std::max(fit.h_max, r.h);
  }
  Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  fit.intercept = coef(0);
  fit.slope = coef(1);
  double ss_tot = (b.array() - b.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - (a * coef - b).squaredNorm() / ss_tot : 1.0;
  fit.points = records.size();
  fit.bracket = bracket;
  return fit;
}

PotentialSpec VariationFamily::at(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("variation parameter must be nonnegative");
  return PotentialSpec(
      {{alpha, Orientation::Plus}, {BumpSpec(beta.support_lo, beta.support_hi, t * beta.amplitude), orientation}});
}

ExtendedReal hadamard_integral(const VariationFamily& fam, const EigenfunctionSamples& psi) {
  PlacedBump b{fam.beta, fam.orientation};
  ExtendedReal sum(0.0);
  for (Eigen::Index i = 0; i < psi.values.size(); ++i) {
    ExtendedReal w = b(psi.x(i));
    if (w == 0.0) continue;
    sum += w * square(psi.values(i));
  }
  return sum * psi.grid.spacing<ExtendedReal>();
}

namespace {

double relative_error(const ExtendedReal& a, const ExtendedReal& b) {
  if (a == b) return 0.0;
  return (abs(a - b) / max(abs(a), abs(b))).to_double();
}

}  // namespace

HadamardReport hadamard_check(const VariationFamily& fam, double h, Eigen::Index j, double t, double dt,
                              const GridSpec& grid, const SolverOptions& options) {
  if (!(dt > 0.0) || !(t - dt > 0.0) || !(t + dt < 1.0))
    throw std::invalid_argument("hadamard_check needs 0 < t - dt and t + dt < 1");
  HadamardReport r;
  try {
    auto up = solve_extrapolated(fam.at(t + dt), h, j, grid, options);
    auto down = solve_extrapolated(fam.at(t - dt), h, j, grid, options);
    r.fd_derivative = (up.value - down.value) / (2.0 * dt);
    auto psi = eigenfunction_extrapolated(fam.at(t), h, j, grid, options);
    r.quadrature_derivative = hadamard_integral(fam, psi);
  } catch (const std::exception& e) {
    throw SolverFailure(h, j, e.what());
  }
  r.rel_err = relative_error(r.fd_derivative, r.quadrature_derivative);
  return r;
}

namespace {

template <int Points>
std::pair<std::vector<ExtendedReal>, std::vector<ExtendedReal>> unit_interval_rule() {
  const auto& rule = gauss_legendre<ExtendedReal, Points>();
  std::vector<ExtendedReal> nodes, weights;
  for (int i = 0; i < Points; ++i) {
    nodes.push_back(0.5 * (rule.nodes(i) + 1.0));
    weights.push_back(0.5 * rule.weights(i));
  }
  return {nodes, weights};
}

}  // namespace

FundamentalTheoremReport fundamental_theorem_check(const VariationFamily& fam, double h, Eigen::Index j,
                                                   int n_steps, const GridSpec& grid, const SolverOptions& options,
                                                   unsigned jobs) {
  std::pair<std::vector<ExtendedReal>, std::vector<ExtendedReal>> rule;
  switch (n_steps) {
    case 8: rule = unit_interval_rule<8>(); break;
    case 16: rule = unit_interval_rule<16>(); break;
    case 32: rule = unit_interval_rule<32>(); break;
    default: throw std::invalid_argument("fundamental_theorem_check supports 8, 16 or 32 nodes");
  }
  const auto& [nodes, weights] = rule;
  std::vector<ExtendedReal> derivative(nodes.size());
  std::array<ExtendedReal, 2> ends;
  // Tasks 0..n-1 are quadrature nodes; n and n+1 the endpoint eigenvalues.
  try {
    parallel_for(nodes.size() + 2, jobs, [&](std::size_t task) {
      if (task < nodes.size()) {
        auto psi = eigenfunction_extrapolated(fam.at(nodes[task].to_double()), h, j, grid, options);
        derivative[task] = hadamard_integral(fam, psi);
      } else {
        double t = task == nodes.size() ? 0.0 : 1.0;
        ends[task - nodes.size()] = solve_extrapolated(fam.at(t), h, j, grid, options).value;
      }
    });
  } catch (const std::exception& e) {
    throw SolverFailure(h, j, e.what());
  }
  FundamentalTheoremReport r;
  r.direct = ends[1] - ends[0];
  r.integrated = ExtendedReal(0.0);
  for (std::size_t k = 0; k < nodes.size(); ++k) r.integrated += weights[k] * derivative[k];
  r.rel_err = relative_error(r.direct, r.integrated);
  return r;
}

RescalingRow rescaled_difference(const EigenfunctionSamples& psi, Eigen::Index j, double h, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("rescaling interval needs lo < hi");
  const double root_h = std::sqrt(h);
  if (lo * root_h <= -psi.grid.half_width() || hi * root_h >= psi.grid.half_width())
    throw std::invalid_argument("rescaling interval exceeds the grid");
  const ExtendedReal scale = sqrt(sqrt(ExtendedReal(h)));
  const ExtendedReal dy = psi.grid.spacing<ExtendedReal>() / sqrt(ExtendedReal(h));
  std::vector<ExtendedReal> rescaled, kappa;
  for (Eigen::Index i = 0; i < psi.values.size(); ++i) {
    ExtendedReal y = psi.x(i) / sqrt(ExtendedReal(h));
    if (y < lo || y > hi) continue;
    rescaled.push_back(scale * psi.values(i));
    kappa.push_back(hermite_function(static_cast<int>(j), y));
  }
  if (rescaled.size() < 2) throw std::invalid_argument("rescaling interval holds fewer than two samples");
  ExtendedReal inner(0.0);
  for (std::size_t k = 0; k < rescaled.size(); ++k) inner += rescaled[k] * kappa[k];
  const double sign = inner < 0.0 ? -1.0 : 1.0;
  ExtendedReal l2(0.0);
  ExtendedReal linf(0.0);
  for (std::size_t k = 0; k < rescaled.size(); ++k) {
    ExtendedReal d = sign * rescaled[k] - kappa[k];
    double w = (k == 0 || k + 1 == rescaled.size()) ? 0.5 : 1.0;
    l2 += w * square(d);
    linf = max(linf, abs(d));
  }
  return {h, sqrt(l2 * dy).to_double(), linf.to_double()};
}

std::vector<RescalingRow> rescaling_convergence(const PotentialSpec& v, Eigen::Index j,
                                                const std::vector<double>& h_grid, double lo, double hi,
                                                const SweepOptions& options) {
  std::vector<RescalingRow> rows(h_grid.size());
  parallel_for(h_grid.size(), options.jobs, [&](std::size_t k) {
    double h = h_grid[k];
    try {
      GridSpec grid = options.half_width ? GridSpec(*options.half_width, options.n)
                                         : choose_domain(v, h, j, options.truncation_target, options.n);
      auto psi = eigenfunction_extrapolated(v, h, j, grid, options.solver);
      rows[k] = rescaled_difference(psi, j, h, lo, hi);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverFailure(h, j, e.what());
    }
  });
  return rows;
}

}  // namespace isolab
