// Command-line front end: sum | channel | theorem1 | capacity.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "nongauss/nongauss.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace nongauss;
using nongauss::cli::ConfigError;
using nongauss::cli::json;
using nongauss::cli::RunConfig;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kInternal = 4 };

// Raised after outputs are written when some density lost more than the
// degradation threshold to clipping.
struct Degraded {};

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
  return std::string(buf, r.ptr);
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { row(header); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

class Outputs {
 public:
  explicit Outputs(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.out_dir) {}

  void csv(const std::string& name, const Csv& table) {
    if (cfg_.wants("csv")) pending_.emplace_back(dir_ / (name + ".csv"), table.text());
  }
  void json_doc(const std::string& name, const json& doc) {
    if (cfg_.wants("json")) pending_.emplace_back(dir_ / (name + ".json"), doc.dump(2) + "\n");
  }
  void flush() {
    fs::create_directories(dir_);
    for (const auto& [path, text] : pending_) {
      write_atomic(path, text);
      std::cout << path.string() << '\n';
    }
  }

 private:
  const RunConfig& cfg_;
  fs::path dir_;
  std::vector<std::pair<fs::path, std::string>> pending_;
};

GridSpec grid_for(const RunConfig& cfg, const SourceDistribution& law) {
  const std::size_t n = cfg.grid_points.value_or(GridSpec::kDefaultPoints);
  if (cfg.grid_half_width) return GridSpec(*cfg.grid_half_width, n);
  return default_grid(law, n);
}

json header(const std::string& command, const RunConfig& cfg, const SourceDistribution& law,
            const GridSpec& grid) {
  json h;
  h["command"] = command;
  h["law"] = law.name();
  h["seed"] = cfg.seed;
  h["grid"] = {{"half_width", grid.half_width()}, {"points", grid.points()}};
  h["config"] = cli::to_json(cfg);
  return h;
}

void require_sum_law(const SourceDistribution& law) {
  if (!law.has_density()) {
    throw ConfigError(law.name() + " has no density; sums need a continuous law");
  }
  if (std::abs(law.mean()) > 1e-12 || std::abs(law.variance() - 1.0) > 1e-12) {
    throw ConfigError("sums need a standardized law");
  }
}

std::vector<double> snr_grid(const RunConfig& cfg) {
  std::vector<double> q;
  if (cfg.snr.include_zero) q.push_back(0.0);
  const double a = std::log10(cfg.snr.min);
  const double b = std::log10(cfg.snr.max);
  for (int k = 0; k < cfg.snr.points; ++k) {
    q.push_back(std::pow(10.0, a + (b - a) * k / (cfg.snr.points - 1)));
  }
  for (double v : cfg.q_list) q.push_back(v);
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  return q;
}

json check_json(const IdentityCheck& c) {
  return {{"lhs", c.lhs},
          {"rhs", c.rhs},
          {"residual", c.residual},
          {"tolerance", c.tolerance},
          {"verdict", c.passed ? "PASS" : "FAIL"}};
}

json taylor_json(const TaylorEstimate& t) {
  json ladder = json::array();
  for (const auto& [q, v] : t.ladder) ladder.push_back({q, v});
  return {{"method", to_string(t.method)},
          {"value", t.value},
          {"uncertainty", t.uncertainty},
          {"noise_floor", t.noise_floor},
          {"points_used", t.points_used},
          {"ladder", ladder}};
}

json rate_json(const std::optional<RateFit>& r) {
  if (!r) return nullptr;
  return {{"slope", r->slope},
          {"stderr", r->stderr_slope},
          {"points", r->points},
          {"n_first", r->n_first},
          {"n_last", r->n_last}};
}

int cmd_sum(const RunConfig& cfg) {
  const auto law = cli::make_distribution(cfg.distribution);
  require_sum_law(law);
  const auto grid = grid_for(cfg, law);
  const auto seq = sum_divergence_sequence(law, cfg.n_max, grid, cfg.per_octave);
  const auto mono = monotonicity_check(seq.divergence);

  Outputs out(cfg);
  Csv table({"n", "D_nats", "noise_flag"});
  for (const auto& [n, d] : seq.divergence) {
    table.row({std::to_string(n), fmt(d), d < kNoiseFloor ? "1" : "0"});
  }
  out.csv("sum_" + law.name(), table);
  json doc = header("sum", cfg, law, grid);
  doc["monotonicity"] = {{"verdict", to_string(mono.verdict)},
                         {"worst_increase", mono.worst_increase},
                         {"worst_n", mono.worst_n},
                         {"slack", kChainSlack}};
  doc["max_clipped_mass"] = seq.max_clipped_mass;
  out.json_doc("sum_" + law.name() + "_verdict", doc);
  out.flush();
  if (seq.degraded()) throw Degraded{};
  return kOk;
}

int cmd_channel(const RunConfig& cfg) {
  const auto law = cli::make_distribution(cfg.distribution);
  const auto grid = grid_for(cfg, law);
  const auto q = snr_grid(cfg);
  const auto curve = divergence_curve(law, q, grid);

  Outputs out(cfg);
  Csv table({"q", "mmse_x", "mmse_gaussian", "D"});
  for (std::size_t i = 0; i < q.size(); ++i) {
    table.row({fmt(q[i]), fmt(curve.mmse_x[i]), fmt(curve.mmse_gaussian[i]),
               fmt(curve.divergence[i])});
  }
  out.csv("channel_" + law.name(), table);

  json doc = header("channel", cfg, law, grid);
  json checks = json::array();
  for (double big_q : cfg.q_list) {
    const SnrValue s(big_q);
    checks.push_back({{"Q", big_q},
                      {"immse", check_json(immse_identity_check(law, s, default_fd_step(big_q),
                                                                grid))},
                      {"cmmse", check_json(cmmse_identity_check(law, s, grid))}});
  }
  doc["identities"] = checks;
  const auto mc = monte_carlo_channel_divergence(law, 1.0, cfg.mc_samples, cfg.mc_bins, cfg.seed);
  doc["monte_carlo"] = {{"q", 1.0},
                        {"samples", mc.samples},
                        {"bins", mc.bins},
                        {"divergence", mc.divergence},
                        {"grid_divergence", channel_divergence(law, SnrValue(1.0), grid).value}};
  out.json_doc("channel_" + law.name() + "_identities", doc);
  out.flush();
  return kOk;
}

json theorem1_json(const Theorem1Report& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"n", r.n},
                    {"D_sum", r.d_sum},
                    {"D_channel", r.d_channel},
                    {"scaled_lhs", r.scaled_lhs},
                    {"delta", r.delta},
                    {"delta_n_over_Q2", r.delta_scaled},
                    {"bound", r.bound},
                    {"dpi", to_string(r.dpi)},
                    {"bound_verdict", to_string(r.bound_verdict)}});
  }
  json j;
  j["Q"] = rep.q;
  j["rows"] = rows;
  j["d2_estimate"] = taylor_json(rep.d2);
  j["d2_cross_check"] = taylor_json(rep.d2_check);
  j["taylor_agree"] = rep.taylor_agree;
  j["rate_fit"] = rate_json(rep.rate);
  j["empirical_N"] = rep.empirical_n ? json(*rep.empirical_n) : json(nullptr);
  j["verdicts"] = {{"monotonicity", to_string(rep.monotonicity.verdict)},
                   {"dpi", to_string(rep.dpi)},
                   {"delta_bracket", to_string(rep.delta_bracket)},
                   {"chain", to_string(rep.chain)},
                   {"bound", to_string(rep.bound)},
                   {"rate", to_string(rep.rate_verdict)}};
  j["max_clipped_mass"] = rep.max_clipped_mass;
  return j;
}

int cmd_theorem1(const RunConfig& cfg) {
  const auto law = cli::make_distribution(cfg.distribution);
  require_sum_law(law);
  const auto grid = grid_for(cfg, law);
  Theorem1Options opt;
  opt.n_max = cfg.n_max;
  opt.per_octave = cfg.per_octave;
  opt.tail_fraction = cfg.tail_fraction;
  opt.taylor_q0 = cfg.taylor_q0;
  opt.taylor_levels = cfg.taylor_levels;

  Outputs out(cfg);
  json doc = header("theorem1", cfg, law, grid);
  json reports = json::array();
  bool degraded = false;
  for (double big_q : cfg.q_list) {
    const auto rep = run_theorem1(law, SnrValue(big_q), grid, opt);
    degraded = degraded || rep.degraded();
    Csv table({"n", "D_sum", "D_channel", "scaled_lhs", "delta", "bound", "verdict"});
    for (const auto& r : rep.rows) {
      table.row({std::to_string(r.n), fmt(r.d_sum), fmt(r.d_channel), fmt(r.scaled_lhs),
                 fmt(r.delta), fmt(r.bound), std::string(to_string(r.bound_verdict))});
    }
    out.csv("theorem1_" + law.name() + "_Q" + fmt(big_q), table);
    reports.push_back(theorem1_json(rep));
  }
  doc["reports"] = reports;
  const int sweep_n = std::min(4, cfg.n_max);
  const auto sweep = q_monotonicity_check(law, cfg.q_list, sweep_n, grid);
  doc["q_sweep"] = {{"n", sweep_n},
                    {"Q", sweep.q},
                    {"delta", sweep.delta},
                    {"verdict", to_string(sweep.verdict)}};
  out.json_doc("theorem1_" + law.name(), doc);
  out.flush();
  if (degraded) throw Degraded{};
  return kOk;
}

int cmd_capacity(const RunConfig& cfg) {
  const auto law = cli::make_distribution(cfg.distribution);
  require_sum_law(law);
  const auto grid = grid_for(cfg, law);
  const auto gap = capacity_gap_report(law, cfg.n_max, grid, cfg.tail_fraction, cfg.per_octave);

  Outputs out(cfg);
  Csv table({"n", "capacity_excess_nats"});
  for (const auto& [n, d] : gap.excess) table.row({std::to_string(n), fmt(d)});
  out.csv("capacity_" + law.name(), table);
  json doc = header("capacity", cfg, law, grid);
  doc["rate_fit"] = rate_json(gap.rate);
  out.json_doc("capacity_" + law.name(), doc);
  out.flush();
  if (gap.degraded) throw Degraded{};
  return kOk;
}

struct Overrides {
  std::string config;
  std::string dist;
  int n_max = 0;
  std::vector<double> q;
  std::size_t grid_n = 0;
  double grid_l = 0.0;
  bool has_grid_l = false;
  std::string out;
  std::vector<std::string> format;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON run configuration");
  sub->add_option("--dist", o.dist, "source family (default parameters)");
  sub->add_option("--n-max", o.n_max, "largest number of summands");
  sub->add_option("--Q", o.q, "SNR values, comma separated")->delimiter(',');
  sub->add_option("--grid-n", o.grid_n, "grid points (power of two)");
  sub->add_option("--grid-l", o.grid_l, "grid half width")->each([&](const std::string&) {
    o.has_grid_l = true;
  });
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--format", o.format, "csv, json or both")->delimiter(',');
  sub->add_option("--seed", o.seed, "Monte-Carlo seed")->each([&](const std::string&) {
    o.has_seed = true;
  });
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : cli::load_config(o.config);
  if (!o.dist.empty()) {
    cfg.distribution.family = o.dist;
    cfg.distribution.params = json::object();
  }
  if (o.n_max != 0) cfg.n_max = o.n_max;
  if (!o.q.empty()) cfg.q_list = o.q;
  if (o.grid_n != 0) cfg.grid_points = o.grid_n;
  if (o.has_grid_l) cfg.grid_half_width = o.grid_l;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.format.empty()) cfg.formats = o.format;
  if (o.has_seed) cfg.seed = o.seed;
  cli::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Gaussianness of normalized sums and Gaussian-channel outputs"};
  app.require_subcommand(1);
  Overrides o;
  auto* sum = app.add_subcommand("sum", "D(S_n) sequence and monotonicity verdict");
  auto* channel = app.add_subcommand("channel", "MMSE curve, D(q) and identity residuals");
  auto* theorem1 = app.add_subcommand("theorem1", "full chain report for each Q");
  auto* capacity = app.add_subcommand("capacity", "capacity excess of aggregated interference");
  for (auto* s : {sum, channel, theorem1, capacity}) add_common(s, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    const RunConfig cfg = resolve(o);
    if (sum->parsed()) return cmd_sum(cfg);
    if (channel->parsed()) return cmd_channel(cfg);
    if (theorem1->parsed()) return cmd_theorem1(cfg);
    return cmd_capacity(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const Degraded&) {
    std::cerr << "numerical degradation: clipped mass above threshold\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
    if (e.code() == ErrorCode::GridTooNarrow) return kNumerical;
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::NoDensity) return kConfig;
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
