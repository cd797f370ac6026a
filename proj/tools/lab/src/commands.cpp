#include "lab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <stdexcept>
#include <system_error>

#include "lab/csv.hpp"
#include "lab/svg.hpp"
#include "scorelab/langevin.hpp"
#include "scorelab/remedies.hpp"
#include "scorelab/scorematch.hpp"
#include "scorelab/stein.hpp"
#include "scorelab/svgd.hpp"

namespace fs = std::filesystem;
using namespace scorelab;

namespace lab {

OutputDir::OutputDir(fs::path dir) : dir_(std::move(dir)) {
  if (!fs::exists(dir_)) {
    fs::create_directories(dir_);
    created_ = true;
  } else if (!fs::is_directory(dir_)) {
    throw std::runtime_error(dir_.string() + ": not a directory");
  }
}

OutputDir::~OutputDir() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& f : files_) fs::remove(f, ec);
  if (created_) fs::remove_all(dir_, ec);
}

fs::path OutputDir::reserve(const std::string& name) {
  files_.push_back(dir_ / name);
  return files_.back();
}

fs::path OutputDir::write(const std::string& name, const std::string& content) {
  const fs::path p = reserve(name);
  std::FILE* f = std::fopen(p.string().c_str(), "wb");
  if (!f) throw std::runtime_error(p.string() + ": cannot write");
  const bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size();
  if (std::fclose(f) != 0 || !ok) throw std::runtime_error(p.string() + ": write failed");
  return p;
}

namespace {

using Grid = std::vector<std::pair<double, double>>;

struct TwoComponentTarget {
  double mu1, mu2, sigma;
  GaussianMixture1D with(double pi1) const { return GaussianMixture1D::two_component(pi1, mu1, mu2, sigma); }
};

TwoComponentTarget read_target(const Config& cfg, std::vector<double> default_means) {
  const auto means = cfg.get_reals("means", std::move(default_means));
  if (means.size() != 2) cfg.fail("means", "expected two component means");
  if (!(means[0] < means[1])) cfg.fail("means", "means must be increasing");
  const double sigma = cfg.get_real("sigma", 1.0);
  if (!(sigma > 0.0)) cfg.fail("sigma", "must be positive");
  return {means[0], means[1], sigma};
}

std::vector<double> read_pis(const Config& cfg, const std::string& key, std::vector<double> fallback) {
  auto pis = cfg.get_reals(key, std::move(fallback));
  if (pis.empty()) cfg.fail(key, "must not be empty");
  for (double p : pis) {
    if (!(p > 0.0 && p < 1.0)) cfg.fail(key, "proportions must lie in (0, 1)");
  }
  return pis;
}

std::uint64_t read_seed(const Config& cfg) {
  if (!cfg.has("seed")) throw ConfigError(cfg.source() + ": missing required field 'seed' (randomized command)");
  return cfg.get_count("seed");
}

std::size_t read_positive(const Config& cfg, const std::string& key, std::size_t fallback) {
  const auto v = cfg.get_count(key, fallback);
  if (v == 0) cfg.fail(key, "must be positive");
  return static_cast<std::size_t>(v);
}

std::size_t read_nodes(const Config& cfg) {
  const auto nodes = cfg.get_count("nodes", QuadratureSpec::kDefaultNodes);
  if (nodes < 16) cfg.fail("nodes", "must be at least 16");
  return static_cast<std::size_t>(nodes);
}

void log_cell(const std::string& command, std::size_t index, std::size_t total, const std::string& what) {
  std::cerr << command << ": cell " << index + 1 << "/" << total << " " << what << "\n";
}

Series density_curve(const GaussianMixture1D& m, const QuadratureSpec& w) {
  Series s{"target density", {}, {}, false};
  for (std::size_t i = 0; i < w.nodes; i += 8) {
    s.x.push_back(w.node(i));
    s.y.push_back(m.pdf(w.node(i)));
  }
  return s;
}

void render(OutputDir& out, const fs::path& csv, const std::string& svg_name, const PlotSpec& spec) {
  render_svg(csv, spec, out.reserve(svg_name));
}

// ---------------------------------------------------------------------------

void score_plot(const Config& cfg, OutputDir& out) {
  const auto target = read_target(cfg, {-4.0, 4.0});
  const auto pis = read_pis(cfg, "pis", {0.1, 0.5, 0.9});
  const double x_min = cfg.get_real("x_min", -8.0), x_max = cfg.get_real("x_max", 8.0);
  if (!(x_min < x_max)) cfg.fail("x_max", "must exceed x_min");
  const std::size_t points = read_positive(cfg, "points", 801);
  if (points < 2) cfg.fail("points", "need at least 2 points");
  const double witness_pi = read_pis(cfg, "witness_pi", {0.5}).at(0);
  const std::size_t nodes = read_nodes(cfg);
  cfg.check_all_used();

  Table curves({"x", "pi1", "pdf", "score"});
  for (double pi1 : pis) {
    const auto m = target.with(pi1);
    for (std::size_t i = 0; i < points; ++i) {
      const double x = i + 1 == points ? x_max : x_min + (x_max - x_min) * static_cast<double>(i) / (points - 1);
      curves.add_row({cell(x), cell(pi1), cell(m.pdf(x)), cell(m.score(x))});
    }
  }
  const auto curves_csv = out.write("score_plot.csv", curves.to_csv());
  render(out, curves_csv, "score_plot.svg", {PlotKind::score_plot, "Mixture densities and scores", std::nullopt, {}});

  const auto q = GaussianMixture1D::gaussian(target.mu1, target.sigma);
  const auto p = target.with(witness_pi);
  const auto window = default_window(q, p, nodes);
  const auto fw = witness_weighted(q, p, window);
  const auto fu = witness_unweighted(q, p, window);
  const auto fw_n = fw.normalized(), fu_n = fu.normalized();
  Table witness({"x", "f_weighted", "f_unweighted", "q_pdf", "p_score", "q_score"});
  for (std::size_t i = 0; i < fw.grid.size(); ++i) {
    const double x = fw.grid[i];
    if (x < x_min || x > x_max) continue;
    witness.add_row({cell(x), cell(fw_n[i]), cell(fu_n[i]), cell(q.pdf(x)), cell(p.score(x)), cell(q.score(x))});
  }
  const auto witness_csv = out.write("witness.csv", witness.to_csv());
  render(out, witness_csv, "witness.svg", {PlotKind::witness, "Stein witness functions", std::nullopt, {}});
}

void fisher_sweep(const Config& cfg, OutputDir& out) {
  const auto seps = cfg.get_reals("separations", {4.0, 6.0, 8.0, 10.0});
  const auto pairs = cfg.get_real_pairs("pi_pairs", {{0.5, 0.9}, {0.1, 0.5}, {0.1, 0.9}});
  const double sigma = cfg.get_real("sigma", 1.0);
  const std::size_t nodes = read_nodes(cfg);
  cfg.check_all_used();

  std::vector<SweepRow> rows;
  try {
    rows = blindness_sweep(seps, pairs, sigma, nodes);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source() + ": " + e.what());
  }
  Table t({"separation", "pi", "pi_prime", "j_pp_prime", "j_q_p", "method", "nodes"});
  for (const auto& r : rows) {
    t.add_row({cell(r.separation), cell(r.pi), cell(r.pi_prime), cell(r.j_pp_prime.value()), cell(r.j_q_p.value()),
               to_string(r.j_pp_prime.method()), cell(r.j_pp_prime.resolution())});
  }
  const auto csv = out.write("sweep.csv", t.to_csv());
  render(out, csv, "sweep.svg", {PlotKind::sweep, "Fisher divergence against separation", std::nullopt, {}});
}

void stein_sweep(const Config& cfg, OutputDir& out) {
  const auto seps = cfg.get_reals("separations", {4.0, 6.0, 8.0, 10.0});
  const auto pis = read_pis(cfg, "pis", {0.5});
  const double sigma = cfg.get_real("sigma", 1.0);
  if (!(sigma > 0.0)) cfg.fail("sigma", "must be positive");
  const std::size_t nodes = read_nodes(cfg);
  for (std::size_t i = 0; i < seps.size(); ++i) {
    if (!(seps[i] > 0.0) || (i > 0 && !(seps[i] > seps[i - 1]))) {
      cfg.fail("separations", "must be positive and increasing");
    }
  }
  cfg.check_all_used();

  struct Cell {
    double s, pi;
    FunctionClass fc;
    double value = 0.0;
  };
  std::vector<Cell> cells;
  for (double s : seps) {
    for (double pi : pis) {
      for (auto fc : {FunctionClass::L2_q_weighted, FunctionClass::L2_unweighted}) cells.push_back({s, pi, fc});
    }
  }
  parallel_for(cells.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto& c = cells[i];
      const auto q = GaussianMixture1D::gaussian(-c.s / 2, sigma);
      const auto p = GaussianMixture1D::two_component(c.pi, -c.s / 2, c.s / 2, sigma);
      c.value = stein_discrepancy(q, p, c.fc, default_window(q, p, nodes)).value();
    }
  });
  Table t({"separation", "pi", "function_class", "discrepancy", "nodes"});
  for (const auto& c : cells) t.add_row({cell(c.s), cell(c.pi), to_string(c.fc), cell(c.value), cell(nodes)});
  const auto csv = out.write("stein_sweep.csv", t.to_csv());
  render(out, csv, "stein_sweep.svg", {PlotKind::stein_sweep, "Stein discrepancy against separation", std::nullopt, {}});
}

void ksd_run(const Config& cfg, OutputDir& out) {
  const auto seed = read_seed(cfg);
  const std::size_t n = read_positive(cfg, "samples", 10000);
  const double h = cfg.get_real("bandwidth", 1.0);
  if (!(h > 0.0)) cfg.fail("bandwidth", "must be positive");
  const auto data = cfg.get_mixture("data");
  const auto names = cfg.keys_in_section("models");
  if (names.empty()) throw ConfigError(cfg.source() + ": need at least one entry in [models]");
  std::vector<GaussianMixture1D> models;
  for (const auto& name : names) models.push_back(cfg.get_mixture("models." + name));
  cfg.check_all_used();

  auto rng = make_stream(seed, 0);
  const auto xs = sample(data, n, rng);
  std::vector<std::optional<DivergenceEstimate>> est(models.size());
  parallel_for(models.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) est[i] = ksd_vstat(xs, models[i], KernelSpec(h));
  });
  Table t({"model", "samples", "bandwidth", "ksd", "std_error"});
  for (std::size_t i = 0; i < models.size(); ++i) {
    t.add_row({names[i], cell(n), cell(h), cell(est[i]->value()), cell(est[i]->std_error().value_or(0.0))});
    log_cell("ksd-run", i, models.size(), names[i] + " ksd=" + cell(est[i]->value()));
  }
  out.write("ksd.csv", t.to_csv());
}

void svgd_run_cmd(const Config& cfg, OutputDir& out) {
  const auto seed = read_seed(cfg);
  const auto target = read_target(cfg, {-4.0, 4.0});
  const auto pis = read_pis(cfg, "pis", {0.5, 0.1});
  const auto inits = cfg.get_real_pairs("inits", {{-4.0, 1.0}, {0.0, 3.0}, {4.0, 3.0}});
  if (inits.empty()) cfg.fail("inits", "must not be empty");
  for (const auto& [mu0, s0] : inits) {
    if (!(s0 > 0.0)) cfg.fail("inits", "sigma0 must be positive");
  }
  const std::size_t n = read_positive(cfg, "particles", 200);
  SvgdConfig sc;
  const double h = cfg.get_real("bandwidth", 1.0);
  if (!(h > 0.0)) cfg.fail("bandwidth", "must be positive");
  sc.kernel = KernelSpec(h);
  sc.step_size = cfg.get_real("step_size", 0.1);
  sc.iterations = read_positive(cfg, "iterations", 2000);
  sc.median_heuristic = cfg.get_bool("median_heuristic", false);
  sc.snapshot_every = cfg.get_count("snapshot_every", 0);
  sc.beta_schedule = cfg.get_reals("beta_schedule", {});
  sc.rescale_step_by_beta = cfg.get_bool("rescale_step_by_beta", true);
  sc.anneal_noise_std = cfg.get_real("anneal_noise_std", 0.0);
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source() + ": " + e.what());
  }
  const double threshold = cfg.get_real("threshold", 0.5 * (target.mu1 + target.mu2));
  cfg.check_all_used();

  struct Cell {
    double pi1, mu0, sigma0;
    SvgdResult result;
  };
  std::vector<Cell> cells;
  for (double pi1 : pis) {
    for (const auto& [mu0, s0] : inits) cells.push_back({pi1, mu0, s0, {}});
  }
  parallel_for(cells.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      auto rng = make_stream(seed, c);
      const auto init = gaussian_ensemble(n, cells[c].mu0, cells[c].sigma0, rng);
      cells[c].result = svgd_run(init, target.with(cells[c].pi1), sc, rng);
    }
  });

  Table summary({"seed", "mu0", "sigma0", "pi1", "final_mode_fraction"});
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cl = cells[c];
    Table run({"iteration", "particle_id", "position"});
    for (const auto& snap : cl.result.snapshots) {
      for (std::size_t i = 0; i < snap.size(); ++i) run.add_row({cell(snap.iteration), cell(i), cell(snap.positions[i])});
    }
    const std::string stem = "svgd_run_" + std::to_string(c);
    const auto csv = out.write(stem + ".csv", run.to_csv());
    const auto w = target.with(cl.pi1).default_window();
    char title[128];
    std::snprintf(title, sizeof title, "SVGD mu0=%s sigma0=%s pi1=%s", cell(cl.mu0).c_str(), cell(cl.sigma0).c_str(),
                  cell(cl.pi1).c_str());
    render(out, csv, "svgd_hist_" + std::to_string(c) + ".svg",
           {PlotKind::particles, title, std::make_pair(w.lower, w.upper), {density_curve(target.with(cl.pi1), w)}});
    const double f = mode_fraction(cl.result.final_ensemble, threshold);
    summary.add_row({cell(static_cast<std::size_t>(seed)), cell(cl.mu0), cell(cl.sigma0), cell(cl.pi1), cell(f)});
    log_cell("svgd-run", c, cells.size(), std::string(title + 5) + " mode_fraction=" + cell(f));
  }
  out.write("svgd_summary.csv", summary.to_csv());
}

void langevin_run_cmd(const Config& cfg, OutputDir& out) {
  const auto seed = read_seed(cfg);
  const auto target = read_target(cfg, {-4.0, 4.0});
  const auto pis = read_pis(cfg, "pis", {0.1, 0.3, 0.5});
  const std::size_t n = read_positive(cfg, "particles", 5000);
  const std::size_t steps = read_positive(cfg, "steps_per_level", 200);
  const double base_step = cfg.get_real("base_step", 0.01);
  std::optional<NoiseSchedule> sched;
  try {
    if (cfg.has("sigmas")) {
      sched.emplace(cfg.get_reals("sigmas", {}), steps, base_step);
    } else {
      sched.emplace(NoiseSchedule::geometric(cfg.get_real("sigma_max", 8.0), cfg.get_real("sigma_min", 0.5),
                                             read_positive(cfg, "levels", 8), steps, base_step));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source() + ": " + e.what());
  }
  LangevinOptions opts;
  opts.record_every = cfg.get_count("record_every", 50);
  opts.threshold = cfg.get_real("threshold", 0.5 * (target.mu1 + target.mu2));
  std::optional<double> init_at;
  if (cfg.has("init")) {
    const std::string s = cfg.get_string("init");
    if (s != "spread") {
      const auto v = parse_real(s);
      if (!v) cfg.fail("init", "expected 'spread' or a position, got '" + s + "'");
      init_at = *v;
    }
  }
  cfg.check_all_used();
  if (init_at) opts.init = std::vector<double>(n, *init_at);

  std::vector<LangevinResult> results(pis.size());
  parallel_for(pis.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      results[c] = annealed_langevin_run(n, target.with(pis[c]), *sched, make_stream(seed, c), opts);
    }
  });

  Table cells({"cell", "pi1", "final_mode_fraction"});
  for (std::size_t c = 0; c < pis.size(); ++c) {
    Table trace({"level", "sigma_j", "step", "mode_fraction"});
    for (const auto& tp : results[c].trace) {
      trace.add_row({cell(tp.level), cell(tp.sigma), cell(tp.step), cell(tp.mode_fraction)});
    }
    Table fin({"particle_id", "position"});
    for (std::size_t i = 0; i < n; ++i) fin.add_row({cell(i), cell(results[c].ensemble.positions[i])});
    const std::string id = std::to_string(c);
    const auto trace_csv = out.write("langevin_summary_" + id + ".csv", trace.to_csv());
    const auto final_csv = out.write("langevin_final_" + id + ".csv", fin.to_csv());
    const auto w = target.with(pis[c]).default_window();
    const std::string title = "Langevin pi1=" + cell(pis[c]);
    render(out, final_csv, "langevin_hist_" + id + ".svg",
           {PlotKind::particles, title, std::make_pair(w.lower, w.upper), {density_curve(target.with(pis[c]), w)}});
    render(out, trace_csv, "langevin_trace_" + id + ".svg", {PlotKind::langevin_trace, title, std::nullopt, {}});
    const double f = mode_fraction(results[c].ensemble, opts.threshold);
    cells.add_row({cell(c), cell(pis[c]), cell(f)});
    log_cell("langevin-run", c, pis.size(), "pi1=" + cell(pis[c]) + " mode_fraction=" + cell(f));
  }
  out.write("langevin_cells.csv", cells.to_csv());
}

void remedies_run(const Config& cfg, OutputDir& out) {
  const auto seed = read_seed(cfg);
  const std::size_t n = read_positive(cfg, "samples", 2000);
  CmlConfig cml;
  if (cfg.get_string("pairs", "10000") == "all") {
    cml.pair_subsample.reset();
  } else {
    cml.pair_subsample = read_positive(cfg, "pairs", 10000);
  }
  const auto lambdas = cfg.get_reals("lambda_ml", {1.0});
  if (lambdas.empty()) cfg.fail("lambda_ml", "must not be empty");
  for (double l : lambdas) {
    if (!(l >= 0.0)) cfg.fail("lambda_ml", "must be nonnegative");
  }
  const std::string p_ml = cfg.get_string("p_ml", "kde");
  if (p_ml != "kde" && p_ml != "true") cfg.fail("p_ml", "expected 'kde' or 'true'");
  BandwidthRule rule = BandwidthRule::silverman();
  if (cfg.has("bandwidth") && cfg.get_string("bandwidth") != "silverman") {
    const double h = cfg.get_real("bandwidth");
    if (!(h > 0.0)) cfg.fail("bandwidth", "must be positive");
    rule = BandwidthRule::fixed(h);
  }
  struct Scenario {
    std::string name;
    GaussianMixture1D data, model;
    std::vector<std::string> cells;
  };
  std::vector<Scenario> scenarios;
  std::vector<std::string> seen;
  for (const auto& key : cfg.keys_in_section("scenario")) {
    const auto dot = key.rfind('.');
    const std::string name = dot == std::string::npos ? key : key.substr(0, dot);
    if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
    seen.push_back(name);
    const std::string base = "scenario." + name;
    scenarios.push_back({name, cfg.get_mixture(base + ".data"), cfg.get_mixture(base + ".model"), {}});
  }
  if (scenarios.empty()) {
    scenarios.push_back({"swap", GaussianMixture1D::two_component(0.9, -5.0, 5.0, 1.0),
                         GaussianMixture1D::two_component(0.1, -5.0, 5.0, 1.0), {}});
    scenarios.push_back({"spurious", GaussianMixture1D::gaussian(-4.0, 1.0),
                         GaussianMixture1D::two_component(0.5, -4.0, 4.0, 1.0), {}});
  }
  cfg.check_all_used();

  struct Result {
    double fisher = 0.0, m1 = 0.0, m2 = 0.0;
    std::vector<double> losses;
  };
  std::vector<Result> results(scenarios.size());
  parallel_for(scenarios.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const auto& sc = scenarios[c];
      auto rng = make_stream(seed, c);
      const auto xs = sample(sc.data, n, rng);
      LogDensityFn ref;
      std::optional<KdeModel> kde;
      if (p_ml == "true") {
        ref = [&sc](double x) { return sc.data.log_pdf(x); };
      } else {
        kde.emplace(kde_fit(xs, rule));
        ref = [&kde](double x) { return kde_log_pdf(*kde, x); };
      }
      const auto pairs = sample_pairs(n, cml.pair_subsample, rng);
      for (double l : lambdas) results[c].losses.push_back(cml_loss_pairs(sc.model, ref, xs, pairs, l));
      const auto window = default_window(sc.model, sc.data);
      results[c].fisher = fisher_divergence(sc.data, sc.model, window).value();
      const std::vector<unsigned> orders{1, 2};
      const auto d = moment_discrepancy(sc.model, xs, orders, window);
      results[c].m1 = d[0];
      results[c].m2 = d[1];
    }
  });

  Table t({"scenario", "fisher_divergence", "cml_loss", "moment_diff_1", "moment_diff_2", "lambda_ml"});
  for (std::size_t c = 0; c < scenarios.size(); ++c) {
    const auto& r = results[c];
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      t.add_row({scenarios[c].name, cell(r.fisher), cell(r.losses[l]), cell(r.m1), cell(r.m2), cell(lambdas[l])});
    }
    log_cell("remedies-run", c, scenarios.size(),
             scenarios[c].name + " fisher=" + cell(r.fisher) + " cml=" + cell(r.losses.front()));
  }
  out.write("remedy_report.csv", t.to_csv());
}

using CommandFn = std::function<void(const Config&, OutputDir&)>;

const std::map<std::string, CommandFn>& registry() {
  static const std::map<std::string, CommandFn> r{
      {"score-plot", score_plot},     {"fisher-sweep", fisher_sweep},       {"stein-sweep", stein_sweep},
      {"ksd-run", ksd_run},           {"svgd-run", svgd_run_cmd},           {"langevin-run", langevin_run_cmd},
      {"remedies-run", remedies_run},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"score-plot", "fisher-sweep", "stein-sweep", "ksd-run",
                                              "svgd-run",   "langevin-run", "remedies-run"};
  return names;
}

void run_command(const std::string& command, const Config& cfg, OutputDir& out) {
  const auto it = registry().find(command);
  if (it == registry().end()) throw ConfigError("unknown command '" + command + "'");
  if (cfg.has("command") && cfg.get_string("command") != command) {
    cfg.fail("command", "config is for '" + cfg.get_string("command") + "', not '" + command + "'");
  }
  it->second(cfg, out);
}

}  // namespace lab
