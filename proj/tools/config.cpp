#include "config.hpp"

#include "isolab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

namespace isolab::cli {

using nlohmann::json;

std::vector<double> RunConfig::h_grid() const {
  if (!h_values.empty()) return h_values;
  return log_spaced_descending(h_hi, h_lo, static_cast<std::size_t>(h_count));
}

PotentialPair RunConfig::pair() const {
  return make_pair(BumpSpec(alpha.lo, alpha.hi, alpha.amplitude), BumpSpec(beta.lo, beta.hi, beta.amplitude));
}

SolverOptions RunConfig::solver() const {
  SolverOptions s;
  s.eigen_tol = eigen_tol;
  s.residual_tol = residual_tol;
  return s;
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

namespace {

json bump_json(const BumpConfig& b) { return {{"lo", b.lo}, {"hi", b.hi}, {"amplitude", b.amplitude}}; }

std::string dotted(const json::json_pointer& p) {
  std::string s = p.to_string();
  std::replace(s.begin(), s.end(), '/', '.');
  return s.empty() ? s : s.substr(1);
}

bool same_kind(const json& want, const json& got) {
  if (want.is_number()) return got.is_number();
  if (want.is_null()) return got.is_null() || got.is_number();  // optional number
  return want.type() == got.type();
}

// Copies `patch` into `base` key by key, refusing unknown keys and changes of
// kind so typos in a config file are reported instead of ignored.
void overlay(json& base, const json& patch, const json::json_pointer& at, std::vector<std::string>& errors) {
  if (!patch.is_object()) {
    errors.push_back((at.empty() ? std::string("config") : dotted(at)) + ": expected an object");
    return;
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    auto path = at / it.key();
    if (!base.contains(it.key())) {
      errors.push_back(dotted(path) + ": unknown key");
      continue;
    }
    json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), path, errors);
    } else if (!same_kind(slot, it.value())) {
      errors.push_back(dotted(path) + ": expected " + std::string(slot.is_null() ? "number or null" : slot.type_name()) +
                       ", got " + it.value().type_name());
    } else {
      slot = it.value();
    }
  }
}

template <class T>
void read(const json& j, const char* pointer, T& out, std::vector<std::string>& errors) {
  json::json_pointer p(pointer);
  try {
    out = j.at(p).get<T>();
  } catch (const json::exception&) {
    errors.push_back(dotted(p) + ": wrong element type");
  }
}

void read_bump(const json& j, const char* base, BumpConfig& b, std::vector<std::string>& errors) {
  std::string s(base);
  read(j, (s + "/lo").c_str(), b.lo, errors);
  read(j, (s + "/hi").c_str(), b.hi, errors);
  read(j, (s + "/amplitude").c_str(), b.amplitude, errors);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

json to_json(const RunConfig& c) {
  json j = reproducible_json(c);
  j["output"]["dir"] = c.output_dir;
  return j;
}

json reproducible_json(const RunConfig& c) {
  json j;
  j["pair"] = {{"alpha", bump_json(c.alpha)}, {"beta", bump_json(c.beta)}};
  j["h_grid"] = {{"hi", c.h_hi}, {"lo", c.h_lo}, {"count", c.h_count}, {"values", c.h_values}};
  j["j_max"] = c.j_max;
  j["grid"] = {{"n", c.n},
               {"half_width", c.half_width ? json(*c.half_width) : json(nullptr)},
               {"truncation_target", c.truncation_target}};
  j["agmon"] = {{"delta", c.delta}, {"r", c.window_r}, {"R", c.window_R}, {"barrier_eps", c.barrier_eps}};
  j["tolerances"] = {{"eigen", c.eigen_tol},
                     {"residual", c.residual_tol},
                     {"hadamard", c.hadamard_tol},
                     {"fundamental", c.fundamental_tol},
                     {"fit_r_squared", c.fit_r_squared},
                     {"bracket_low", c.bracket_low},
                     {"bracket_high", c.bracket_high},
                     {"root_agreement", c.root_agreement},
                     {"envelope_factor", c.envelope_factor},
                     {"harmonic", c.harmonic_tol}};
  j["spectrum"] = {{"h", c.spectrum_h}, {"potential", c.spectrum_potential}};
  j["hadamard"] = {{"h", c.hadamard_h},
                   {"t", c.hadamard_t},
                   {"dt", c.hadamard_dt},
                   {"j_max", c.hadamard_j_max},
                   {"s_nodes", c.s_nodes}};
  j["rescale"] = {{"h_values", c.rescale_h},
                  {"j_max", c.rescale_j_max},
                  {"lo", c.rescale_lo},
                  {"hi", c.rescale_hi},
                  {"bumps", c.rescale_bumps}};
  j["hermite"] = {{"j_max", c.hermite_j_max}};
  j["dump"] = {{"extent", c.dump_extent}, {"points", c.dump_points}};
  j["output"] = {{"formats", c.formats}};
  j["seed"] = c.seed;
  return j;
}

void merge_json(RunConfig& c, const json& patch, std::vector<std::string>& errors) {
  json merged = to_json(c);
  std::size_t before = errors.size();
  overlay(merged, patch, json::json_pointer(), errors);
  if (errors.size() != before) return;

  read_bump(merged, "/pair/alpha", c.alpha, errors);
  read_bump(merged, "/pair/beta", c.beta, errors);
  read(merged, "/h_grid/hi", c.h_hi, errors);
  read(merged, "/h_grid/lo", c.h_lo, errors);
  read(merged, "/h_grid/count", c.h_count, errors);
  read(merged, "/h_grid/values", c.h_values, errors);
  read(merged, "/j_max", c.j_max, errors);
  read(merged, "/grid/n", c.n, errors);
  const json& hw = merged["grid"]["half_width"];
  c.half_width = hw.is_null() ? std::nullopt : std::optional<double>(hw.get<double>());
  read(merged, "/grid/truncation_target", c.truncation_target, errors);
  read(merged, "/agmon/delta", c.delta, errors);
  read(merged, "/agmon/r", c.window_r, errors);
  read(merged, "/agmon/R", c.window_R, errors);
  read(merged, "/agmon/barrier_eps", c.barrier_eps, errors);
  read(merged, "/tolerances/eigen", c.eigen_tol, errors);
  read(merged, "/tolerances/residual", c.residual_tol, errors);
  read(merged, "/tolerances/hadamard", c.hadamard_tol, errors);
  read(merged, "/tolerances/fundamental", c.fundamental_tol, errors);
  read(merged, "/tolerances/fit_r_squared", c.fit_r_squared, errors);
  read(merged, "/tolerances/bracket_low", c.bracket_low, errors);
  read(merged, "/tolerances/bracket_high", c.bracket_high, errors);
  read(merged, "/tolerances/root_agreement", c.root_agreement, errors);
  read(merged, "/tolerances/envelope_factor", c.envelope_factor, errors);
  read(merged, "/tolerances/harmonic", c.harmonic_tol, errors);
  read(merged, "/spectrum/h", c.spectrum_h, errors);
  read(merged, "/spectrum/potential", c.spectrum_potential, errors);
  read(merged, "/hadamard/h", c.hadamard_h, errors);
  read(merged, "/hadamard/t", c.hadamard_t, errors);
  read(merged, "/hadamard/dt", c.hadamard_dt, errors);
  read(merged, "/hadamard/j_max", c.hadamard_j_max, errors);
  read(merged, "/hadamard/s_nodes", c.s_nodes, errors);
  read(merged, "/rescale/h_values", c.rescale_h, errors);
  read(merged, "/rescale/j_max", c.rescale_j_max, errors);
  read(merged, "/rescale/lo", c.rescale_lo, errors);
  read(merged, "/rescale/hi", c.rescale_hi, errors);
  read(merged, "/rescale/bumps", c.rescale_bumps, errors);
  read(merged, "/hermite/j_max", c.hermite_j_max, errors);
  read(merged, "/dump/extent", c.dump_extent, errors);
  read(merged, "/dump/points", c.dump_points, errors);
  read(merged, "/output/dir", c.output_dir, errors);
  read(merged, "/output/formats", c.formats, errors);
  read(merged, "/seed", c.seed, errors);
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> errors;
  auto need = [&](bool ok, const std::string& path, const std::string& message) {
    if (!ok) errors.push_back(path + ": " + message);
  };
  auto finite_positive = [](double x) { return std::isfinite(x) && x > 0.0; };

  for (auto [name, b, lo, hi] : {std::tuple{"alpha", c.alpha, 1.0, 2.0}, std::tuple{"beta", c.beta, 3.0, 4.0}}) {
    std::string base = std::string("pair.") + name;
    need(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo < b.hi, base + ".lo", "support must satisfy lo < hi");
    need(b.lo > lo && b.hi < hi, base,
         "support must lie inside (" + std::to_string(static_cast<int>(lo)) + ", " +
             std::to_string(static_cast<int>(hi)) + ")");
    need(std::isfinite(b.amplitude) && b.amplitude >= 0.0, base + ".amplitude", "must be finite and nonnegative");
  }

  if (c.h_values.empty()) {
    need(finite_positive(c.h_lo), "h_grid.lo", "must be positive");
    need(std::isfinite(c.h_hi) && c.h_hi > c.h_lo, "h_grid.hi", "must exceed h_grid.lo");
    need(c.h_count >= 2, "h_grid.count", "must be at least 2");
  } else {
    for (std::size_t i = 0; i < c.h_values.size(); ++i) {
      std::string path = "h_grid.values[" + std::to_string(i) + "]";
      need(finite_positive(c.h_values[i]), path, "must be positive");
      if (i > 0) need(c.h_values[i] < c.h_values[i - 1], path, "values must be strictly decreasing");
    }
  }
  need(c.j_max >= 0 && c.j_max <= kMaxSweepIndex, "j_max", "must lie in [0, 5]");
  need(c.n >= 1, "grid.n", "must be at least 1");
  if (c.half_width) need(finite_positive(*c.half_width), "grid.half_width", "must be positive or null");
  need(finite_positive(c.truncation_target), "grid.truncation_target", "must be positive");

  need(c.delta > 0.0 && c.delta < 1.0, "agmon.delta", "must lie in (0, 1)");
  need(finite_positive(c.window_r), "agmon.r", "must be positive");
  need(std::isfinite(c.window_R) && c.window_R > c.window_r, "agmon.R", "must exceed agmon.r");
  need(finite_positive(c.barrier_eps), "agmon.barrier_eps", "must be positive");

  for (auto [name, value] : {std::pair{"eigen", c.eigen_tol}, std::pair{"residual", c.residual_tol},
                             std::pair{"hadamard", c.hadamard_tol}, std::pair{"fundamental", c.fundamental_tol},
                             std::pair{"root_agreement", c.root_agreement}, std::pair{"harmonic", c.harmonic_tol}})
    need(finite_positive(value), std::string("tolerances.") + name, "must be positive");
  need(c.fit_r_squared > 0.0 && c.fit_r_squared <= 1.0, "tolerances.fit_r_squared", "must lie in (0, 1]");
  need(finite_positive(c.bracket_low) && c.bracket_low <= 1.0, "tolerances.bracket_low", "must lie in (0, 1]");
  need(std::isfinite(c.bracket_high) && c.bracket_high >= 1.0, "tolerances.bracket_high", "must be at least 1");
  need(std::isfinite(c.envelope_factor) && c.envelope_factor >= 1.0, "tolerances.envelope_factor",
       "must be at least 1");

  need(finite_positive(c.spectrum_h), "spectrum.h", "must be positive");
  need(c.spectrum_potential == "plus" || c.spectrum_potential == "minus" || c.spectrum_potential == "harmonic",
       "spectrum.potential", "must be plus, minus or harmonic");

  need(finite_positive(c.hadamard_h), "hadamard.h", "must be positive");
  need(std::isfinite(c.hadamard_t), "hadamard.t", "must be finite");
  need(finite_positive(c.hadamard_dt), "hadamard.dt", "must be positive");
  need(c.hadamard_j_max >= 0 && c.hadamard_j_max <= kMaxSweepIndex, "hadamard.j_max", "must lie in [0, 5]");
  need(c.s_nodes == 8 || c.s_nodes == 16 || c.s_nodes == 32, "hadamard.s_nodes", "must be 8, 16 or 32");

  need(!c.rescale_h.empty(), "rescale.h_values", "must not be empty");
  for (std::size_t i = 0; i < c.rescale_h.size(); ++i)
    need(finite_positive(c.rescale_h[i]), "rescale.h_values[" + std::to_string(i) + "]", "must be positive");
  need(c.rescale_j_max >= 0 && c.rescale_j_max <= kMaxSweepIndex, "rescale.j_max", "must lie in [0, 5]");
  need(std::isfinite(c.rescale_lo) && std::isfinite(c.rescale_hi) && c.rescale_lo < c.rescale_hi, "rescale.lo",
       "interval must satisfy lo < hi");

  need(c.hermite_j_max >= 2 && c.hermite_j_max <= kMaxHermiteRootOrder, "hermite.j_max",
       "must lie in [2, " + std::to_string(kMaxHermiteRootOrder) + "]");

  need(finite_positive(c.dump_extent), "dump.extent", "must be positive");
  need(c.dump_points >= 2, "dump.points", "must be at least 2");

  need(!c.output_dir.empty(), "output.dir", "must not be empty");
  for (std::size_t i = 0; i < c.formats.size(); ++i) {
    const auto& f = c.formats[i];
    need(f == "csv" || f == "json" || f == "svg", "output.formats[" + std::to_string(i) + "]",
         "must be csv, json or svg");
  }
  return errors;
}

std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(reproducible_json(c).dump())));
  return buf;
}

}  // namespace isolab::cli
