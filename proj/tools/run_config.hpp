#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nongauss/distribution.hpp"

namespace nongauss::cli {

using json = nlohmann::ordered_json;

/// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DistributionConfig {
  std::string family = "uniform";
  json params = json::object();
  bool standardize = true;
};

struct SnrGridConfig {
  double min = 1e-3;
  double max = 1e2;
  int points = 40;
  bool include_zero = true;
};

struct RunConfig {
  DistributionConfig distribution;
  std::optional<double> grid_half_width;
  std::optional<std::size_t> grid_points;
  SnrGridConfig snr;
  std::vector<double> q_list{1.0, 4.0, 16.0, 64.0};
  int n_max = 64;
  int per_octave = 1;
  double tail_fraction = 0.5;
  double taylor_q0 = 0.125;
  int taylor_levels = 6;
  std::size_t mc_samples = 1'000'000;
  std::size_t mc_bins = 2048;
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json"};
  std::uint64_t seed = 12345;

  bool wants(const std::string& fmt) const {
    return std::find(formats.begin(), formats.end(), fmt) != formats.end();
  }
};

namespace detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad type for '") + key + "' in " + where);
  }
}

inline double param(const json& params, const char* key, double fallback) {
  return get<double>(params, key, fallback, "distribution.params");
}

}  // namespace detail

inline const std::set<std::string>& family_names() {
  static const std::set<std::string> names{"gaussian",    "uniform",    "laplace",
                                           "exponential", "rademacher", "mixture"};
  return names;
}

/// Builds the source law; parameters missing from the config take the
/// family's unit defaults.
inline SourceDistribution make_distribution(const DistributionConfig& c) {
  const Standardize mode = c.standardize ? Standardize::yes : Standardize::no;
  const json& p = c.params;
  auto allow = [&](std::set<std::string> keys) {
    detail::reject_unknown(p, keys, "distribution.params");
  };
  try {
    if (c.family == "gaussian") {
      allow({"mean", "variance"});
      return SourceDistribution::gaussian(detail::param(p, "mean", 0.0),
                                          detail::param(p, "variance", 1.0), mode);
    }
    if (c.family == "uniform") {
      allow({"lower", "upper"});
      return SourceDistribution::uniform(detail::param(p, "lower", -std::sqrt(3.0)),
                                         detail::param(p, "upper", std::sqrt(3.0)), mode);
    }
    if (c.family == "laplace") {
      allow({"location", "scale"});
      return SourceDistribution::laplace(detail::param(p, "location", 0.0),
                                         detail::param(p, "scale", std::sqrt(0.5)), mode);
    }
    if (c.family == "exponential") {
      allow({"rate", "shift"});
      return SourceDistribution::exponential(detail::param(p, "rate", 1.0),
                                             detail::param(p, "shift", 0.0), mode);
    }
    if (c.family == "rademacher") {
      allow({"center", "half_gap"});
      return SourceDistribution::rademacher(detail::param(p, "center", 0.0),
                                            detail::param(p, "half_gap", 1.0), mode);
    }
    if (c.family == "mixture") {
      allow({"components"});
      if (!p.contains("components")) return SourceDistribution::default_mixture();
      std::vector<MixtureComponent> comps;
      for (const auto& item : p.at("components")) {
        detail::reject_unknown(item, {"weight", "mean", "variance"}, "mixture component");
        comps.push_back({detail::get<double>(item, "weight", 1.0, "mixture component"),
                         detail::get<double>(item, "mean", 0.0, "mixture component"),
                         detail::get<double>(item, "variance", 1.0, "mixture component")});
      }
      return SourceDistribution::mixture(comps, mode);
    }
  } catch (const Error& e) {
    throw ConfigError(std::string("distribution: ") + e.what());
  }
  throw ConfigError("unknown distribution family '" + c.family + "'");
}

inline RunConfig parse_config(const json& j) {
  using detail::get;
  detail::reject_unknown(j,
                         {"distribution", "grid", "snr", "Q", "n_max", "per_octave",
                          "tail_fraction", "taylor", "monte_carlo", "output", "seed"},
                         "config");
  RunConfig c;
  if (j.contains("distribution")) {
    const json& d = j.at("distribution");
    detail::reject_unknown(d, {"family", "params", "standardize"}, "distribution");
    c.distribution.family = get<std::string>(d, "family", c.distribution.family, "distribution");
    if (d.contains("params")) c.distribution.params = d.at("params");
    c.distribution.standardize = get<bool>(d, "standardize", true, "distribution");
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::reject_unknown(g, {"half_width", "points"}, "grid");
    if (g.contains("half_width")) c.grid_half_width = get<double>(g, "half_width", 0.0, "grid");
    if (g.contains("points")) {
      const auto n = get<long long>(g, "points", 0, "grid");
      if (n <= 0) throw ConfigError("grid.points must be positive");
      c.grid_points = static_cast<std::size_t>(n);
    }
  }
  if (j.contains("snr")) {
    const json& s = j.at("snr");
    detail::reject_unknown(s, {"min", "max", "points", "include_zero"}, "snr");
    c.snr.min = get<double>(s, "min", c.snr.min, "snr");
    c.snr.max = get<double>(s, "max", c.snr.max, "snr");
    c.snr.points = get<int>(s, "points", c.snr.points, "snr");
    c.snr.include_zero = get<bool>(s, "include_zero", c.snr.include_zero, "snr");
  }
  c.q_list = get<std::vector<double>>(j, "Q", c.q_list, "config");
  c.n_max = get<int>(j, "n_max", c.n_max, "config");
  c.per_octave = get<int>(j, "per_octave", c.per_octave, "config");
  c.tail_fraction = get<double>(j, "tail_fraction", c.tail_fraction, "config");
  if (j.contains("taylor")) {
    const json& t = j.at("taylor");
    detail::reject_unknown(t, {"q0", "levels"}, "taylor");
    c.taylor_q0 = get<double>(t, "q0", c.taylor_q0, "taylor");
    c.taylor_levels = get<int>(t, "levels", c.taylor_levels, "taylor");
  }
  if (j.contains("monte_carlo")) {
    const json& m = j.at("monte_carlo");
    detail::reject_unknown(m, {"samples", "bins"}, "monte_carlo");
    c.mc_samples = get<std::size_t>(m, "samples", c.mc_samples, "monte_carlo");
    c.mc_bins = get<std::size_t>(m, "bins", c.mc_bins, "monte_carlo");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    detail::reject_unknown(o, {"dir", "formats"}, "output");
    c.out_dir = get<std::string>(o, "dir", c.out_dir, "output");
    c.formats = get<std::vector<std::string>>(o, "formats", c.formats, "output");
  }
  c.seed = get<std::uint64_t>(j, "seed", c.seed, "config");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  try {
    return parse_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

/// Checks every numeric field against the preconditions it feeds.
inline void validate(const RunConfig& c) {
  if (!family_names().contains(c.distribution.family)) {
    throw ConfigError("unknown distribution family '" + c.distribution.family + "'");
  }
  if (c.grid_half_width && !(*c.grid_half_width > 0.0 && std::isfinite(*c.grid_half_width))) {
    throw ConfigError("grid half width must be positive");
  }
  if (c.grid_points) {
    const std::size_t n = *c.grid_points;
    if (n < 256 || (n & (n - 1)) != 0) {
      throw ConfigError("grid points must be a power of two >= 256");
    }
  }
  if (!(c.snr.min > 0.0) || !(c.snr.max > c.snr.min) || !std::isfinite(c.snr.max) ||
      c.snr.points < 2) {
    throw ConfigError("snr grid needs 0 < min < max and at least two points");
  }
  if (c.q_list.empty()) throw ConfigError("Q list is empty");
  for (double q : c.q_list) {
    if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("every Q must be positive and finite");
  }
  if (c.n_max < 1 || c.n_max > 4096) throw ConfigError("n_max must lie in [1, 4096]");
  if (c.per_octave < 1 || c.per_octave > 16) throw ConfigError("per_octave must lie in [1, 16]");
  if (!(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0)) {
    throw ConfigError("tail_fraction must lie in (0, 1]");
  }
  if (!(c.taylor_q0 > 0.0) || c.taylor_levels < 3 || c.taylor_levels > 30) {
    throw ConfigError("taylor needs q0 > 0 and 3..30 levels");
  }
  if (c.mc_samples < 2 || c.mc_bins < 2) throw ConfigError("monte_carlo needs samples, bins >= 2");
  if (c.out_dir.empty()) throw ConfigError("output dir is empty");
  if (c.formats.empty()) throw ConfigError("no output format selected");
  for (const auto& f : c.formats) {
    if (f != "csv" && f != "json") throw ConfigError("unknown output format '" + f + "'");
  }
  make_distribution(c.distribution);
}

inline json to_json(const RunConfig& c) {
  json j;
  j["distribution"] = {{"family", c.distribution.family},
                       {"params", c.distribution.params},
                       {"standardize", c.distribution.standardize}};
  json grid = json::object();
  if (c.grid_half_width) grid["half_width"] = *c.grid_half_width;
  if (c.grid_points) grid["points"] = *c.grid_points;
  j["grid"] = grid;
  j["snr"] = {{"min", c.snr.min},
              {"max", c.snr.max},
              {"points", c.snr.points},
              {"include_zero", c.snr.include_zero}};
  j["Q"] = c.q_list;
  j["n_max"] = c.n_max;
  j["per_octave"] = c.per_octave;
  j["tail_fraction"] = c.tail_fraction;
  j["taylor"] = {{"q0", c.taylor_q0}, {"levels", c.taylor_levels}};
  j["monte_carlo"] = {{"samples", c.mc_samples}, {"bins", c.mc_bins}};
  j["output"] = {{"dir", c.out_dir}, {"formats", c.formats}};
  j["seed"] = c.seed;
  return j;
}

}  // namespace nongauss::cli
