#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "lab/commands.hpp"
#include "lab/config.hpp"
#include "lab/csv.hpp"
#include "lab/svg.hpp"
#include "scorelab/numerics.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lab_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

std::map<std::string, std::string> run_in_process(const std::string& command, const std::string& config,
                                                  unsigned threads, const std::string& tag) {
  const auto cfg = lab::Config::parse(config, tag + ".conf");
  const auto dir = scratch(tag);
  scorelab::set_max_threads(threads);
  {
    lab::OutputDir out(dir);
    lab::run_command(command, cfg, out);
    out.commit();
  }
  scorelab::set_max_threads(1);
  auto t = tree(dir);
  fs::remove_all(dir);
  return t;
}

int run_lab(const std::string& args, std::string* err = nullptr) {
  const auto err_file = scratch("stderr.txt");
  const std::string cmd = std::string(LAB_BINARY) + " " + args + " 2> " + err_file.string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  if (err) *err = slurp(err_file);
  fs::remove(err_file);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = scratch(name + ".conf");
  std::ofstream(p) << text;
  return p;
}

std::string header(const std::string& csv) { return csv.substr(0, csv.find('\n')); }

const std::map<std::string, std::string> kSmall{
    {"score-plot", "points = 101\nnodes = 1025\n"},
    {"fisher-sweep", "separations = 4, 10\nnodes = 1025\n"},
    {"stein-sweep", "separations = 4, 8\nnodes = 1025\n"},
    {"ksd-run",
     "seed = 3\nsamples = 300\ndata = weights=1; means=-5; stds=1\n[models]\na = weights=0.1,0.9; means=-5,5; stds=1,1\n"
     "b = weights=1; means=5; stds=1\n"},
    {"svgd-run", "seed = 4\nparticles = 40\niterations = 60\nsnapshot_every = 20\n"},
    {"langevin-run", "seed = 5\nparticles = 200\nlevels = 3\nsteps_per_level = 20\nrecord_every = 10\n"},
    {"remedies-run", "seed = 6\nsamples = 200\npairs = 500\nlambda_ml = 1, 2\n"},
};

}  // namespace

TEST_CASE("config grammar") {
  const auto cfg = lab::Config::parse(
      "# top\nseed = 42\nname = a b  # trailing\n\n[target]\nmeans = -4, 4\nmix = weights=1; means=0; stds=2\n", "t.conf");
  CHECK(cfg.get_count("seed") == 42);
  CHECK(cfg.get_string("name") == "a b");
  CHECK(cfg.get_reals("target.means", {}) == std::vector<double>{-4.0, 4.0});
  CHECK(cfg.get_mixture("target.mix").stds()[0] == 2.0);
  CHECK(cfg.get_real("missing", 1.5) == 1.5);
  CHECK_NOTHROW(cfg.check_all_used());
  CHECK(cfg.keys_in_section("target") == std::vector<std::string>{"means", "mix"});
}

TEST_CASE("config diagnostics carry line and field") {
  auto message = [](const std::string& text, auto&& use) {
    try {
      const auto cfg = lab::Config::parse(text, "c.conf");
      use(cfg);
    } catch (const lab::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("a = 1\na = 2\n", [](auto&) {}) == "c.conf:2: duplicate field 'a'");
  CHECK(message("just text\n", [](auto&) {}) == "c.conf:1: expected 'key = value'");
  CHECK(message("[bad\n", [](auto&) {}) == "c.conf:1: unterminated section header");
  CHECK(message("x = 1\n", [](const lab::Config& c) { c.get_real("y"); }) == "c.conf: missing required field 'y'");
  CHECK(message("\nseed = abc\n", [](const lab::Config& c) { c.get_count("seed"); }) ==
        "c.conf:2: field 'seed': expected a nonnegative integer, got 'abc'");
  CHECK(message("xs = 1, z\n", [](const lab::Config& c) { c.get_reals("xs", {}); }) ==
        "c.conf:1: field 'xs': bad number 'z' in list");
  CHECK(message("a = 1\n\nb = 2\n", [](const lab::Config& c) {
          c.get_real("a");
          c.check_all_used();
        }) == "c.conf:3: unknown field 'b'");
  const auto mix = message("m = weights=0.5; means=0,1; stds=1,1\n", [](const lab::Config& c) { c.get_mixture("m"); });
  CHECK(mix.find("c.conf:1: field 'm'") == 0);
}

TEST_CASE("csv tables") {
  lab::Table t({"a", "b"});
  t.add_row({lab::cell(0.1), lab::cell(std::size_t{3})});
  CHECK(t.to_csv() == "a,b\n0.1,3\n");
  const auto back = lab::parse_csv(t.to_csv(), "mem");
  CHECK(back.real(0, 0) == 0.1);
  CHECK_THROWS_WITH(back.column("c"), "missing column 'c'");
  CHECK_THROWS(t.add_row({"1"}));
  CHECK_THROWS(lab::parse_csv("a,b\n1\n", "mem"));
}

TEST_CASE("svg rendering") {
  SUBCASE("empty data gives axes only") {
    const auto t = lab::parse_csv("x,pi1,pdf,score\n", "mem");
    const auto svg = lab::render_figure(lab::figure_from_table(t, {lab::PlotKind::score_plot, "", std::nullopt, {}}));
    CHECK(svg.find("class=\"axes\"") != std::string::npos);
    CHECK(svg.find("<polyline") == std::string::npos);
    const auto hist = lab::parse_csv("iteration,particle_id,position\n", "mem");
    const auto hsvg = lab::render_figure(lab::figure_from_table(hist, {lab::PlotKind::particles, "", std::nullopt, {}}));
    CHECK(hsvg.find("class=\"axes\"") != std::string::npos);
  }
  SUBCASE("dual axes for density and score") {
    const auto t = lab::parse_csv("x,pi1,pdf,score\n-1,0.5,0.2,1\n0,0.5,0.3,0\n1,0.5,0.2,-1\n", "mem");
    const auto svg = lab::render_figure(lab::figure_from_table(t, {lab::PlotKind::score_plot, "", std::nullopt, {}}));
    CHECK(svg.find("class=\"y-label\"") != std::string::npos);
    CHECK(svg.find(">density</text>") != std::string::npos);
    CHECK(svg.find("class=\"y2-label\"") != std::string::npos);
    CHECK(svg.find(">score</text>") != std::string::npos);
    CHECK(svg == lab::render_figure(lab::figure_from_table(t, {lab::PlotKind::score_plot, "", std::nullopt, {}})));
  }
  SUBCASE("histogram bins are 0.2 wide") {
    const auto t = lab::parse_csv("particle_id,position\n0,0.05\n1,0.1\n2,0.3\n3,0.9\n", "mem");
    lab::Figure f = lab::figure_from_table(t, {lab::PlotKind::particles, "", std::make_pair(-1.0, 1.0), {}});
    CHECK(f.bin_width == 0.2);
    const auto svg = lab::render_figure(f);
    // 2.0 wide window on a 610 px plot: each bar is 61 px.
    CHECK(svg.find("width=\"61.00\"") != std::string::npos);
  }
  SUBCASE("schema mismatch names the missing column") {
    const auto t = lab::parse_csv("x,f_weighted,q_pdf\n0,1,2\n", "mem");
    CHECK_THROWS_WITH(lab::figure_from_table(t, {lab::PlotKind::witness, "", std::nullopt, {}}),
                      "missing column 'f_unweighted'");
  }
  SUBCASE("schema detection") {
    CHECK(lab::detect_plot(lab::parse_csv("particle_id,position\n", "m")) == lab::PlotKind::particles);
    CHECK_FALSE(lab::detect_plot(lab::parse_csv("foo\n", "m")).has_value());
  }
}

TEST_CASE("every command emits its documented schemas") {
  const std::map<std::string, std::string> expected{
      {"sweep.csv", "separation,pi,pi_prime,j_pp_prime,j_q_p,method,nodes"},
      {"witness.csv", "x,f_weighted,f_unweighted,q_pdf,p_score,q_score"},
      {"svgd_run_0.csv", "iteration,particle_id,position"},
      {"svgd_summary.csv", "seed,mu0,sigma0,pi1,final_mode_fraction"},
      {"langevin_summary_0.csv", "level,sigma_j,step,mode_fraction"},
      {"langevin_final_0.csv", "particle_id,position"},
      {"remedy_report.csv", "scenario,fisher_divergence,cml_loss,moment_diff_1,moment_diff_2,lambda_ml"},
  };
  std::map<std::string, std::string> seen;
  for (const auto& [command, config] : kSmall) {
    for (const auto& [name, content] : run_in_process(command, config, 1, "schema")) seen[name] = content;
  }
  for (const auto& [name, head] : expected) {
    REQUIRE(seen.count(name));
    CHECK(header(seen[name]) == head);
  }
  CHECK(seen.count("score_plot.svg"));
  CHECK(seen.count("svgd_hist_5.svg"));
  // Six cells: two proportions by three initialisations.
  const auto summary = lab::parse_csv(seen["svgd_summary.csv"], "summary");
  CHECK(summary.size() == 6);
}

TEST_CASE("outputs are byte-identical across reruns and thread counts") {
  for (const auto& [command, config] : kSmall) {
    CAPTURE(command);
    const auto a = run_in_process(command, config, 1, "det_a");
    const auto b = run_in_process(command, config, 1, "det_b");
    const auto c = run_in_process(command, config, 4, "det_c");
    CHECK(a == b);
    CHECK(a == c);
  }
}

TEST_CASE("score-plot curves coincide away from the midpoint") {
  const auto files = run_in_process("score-plot", "pis = 0.1, 0.5, 0.9\npoints = 801\n", 1, "coincide");
  const auto t = lab::parse_csv(files.at("score_plot.csv"), "score_plot.csv");
  std::map<std::string, std::vector<double>> by_x;
  for (std::size_t r = 0; r < t.size(); ++r) by_x[t.rows()[r][0]].push_back(t.real(r, 3));
  double worst = 0.0;
  for (const auto& [x, scores] : by_x) {
    if (std::abs(std::stod(x)) <= 3.0) continue;
    for (double a : scores) {
      for (double b : scores) worst = std::max(worst, std::abs(a - b));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("lab binary exit codes and cleanup") {
  std::string err;
  SUBCASE("success") {
    const auto cfg = write_config("ok", "command = fisher-sweep\nseparations = 4, 6\nnodes = 257\n");
    const auto out = scratch("ok_out");
    CHECK(run_lab("fisher-sweep --config " + cfg.string() + " --out " + out.string() + " --threads 2") == 0);
    CHECK(fs::exists(out / "sweep.csv"));
    CHECK(fs::exists(out / "sweep.svg"));
    const auto svg = out / "again.svg";
    CHECK(run_lab("render --csv " + (out / "sweep.csv").string() + " --svg " + svg.string() +
                  " --title 'Fisher divergence against separation'") == 0);
    CHECK(slurp(svg) == slurp(out / "sweep.svg"));
    fs::remove_all(out);
    fs::remove(cfg);
  }
  SUBCASE("invalid config reports line and field") {
    const auto cfg = write_config("bad", "separations = 4, x\n");
    const auto out = scratch("bad_out");
    CHECK(run_lab("fisher-sweep --config " + cfg.string() + " --out " + out.string(), &err) == 2);
    CHECK(err.find(":1: field 'separations'") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
    fs::remove(cfg);
  }
  SUBCASE("randomized commands need a seed") {
    const auto cfg = write_config("noseed", "particles = 10\n");
    const auto out = scratch("noseed_out");
    CHECK(run_lab("svgd-run --config " + cfg.string() + " --out " + out.string(), &err) == 2);
    CHECK(err.find("'seed'") != std::string::npos);
    fs::remove(cfg);
  }
  SUBCASE("runtime failure removes partial outputs") {
    // Cells run before any file is written, so the divergent one leaves nothing behind.
    const auto cfg =
        write_config("diverge", "seed = 1\nparticles = 5\niterations = 50\nstep_size = 1e9\nsigma = 0.001\n");
    const auto out = scratch("diverge_out");
    CHECK(run_lab("svgd-run --config " + cfg.string() + " --out " + out.string(), &err) == 1);
    CHECK(err.find("non-finite") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
    fs::remove(cfg);
  }
  SUBCASE("failure inside an existing directory removes only new files") {
    const auto out = scratch("existing_out");
    fs::create_directories(out);
    std::ofstream(out / "keep.txt") << "keep";
    const auto cfg = write_config("diverge2", "seed = 1\nparticles = 5\niterations = 50\nstep_size = 1e9\nsigma = 0.001\n");
    CHECK(run_lab("svgd-run --config " + cfg.string() + " --out " + out.string()) == 1);
    CHECK(fs::exists(out / "keep.txt"));
    CHECK(std::distance(fs::directory_iterator(out), fs::directory_iterator{}) == 1);
    fs::remove_all(out);
    fs::remove(cfg);
  }
  SUBCASE("render rejects schema mismatches") {
    const auto csv = scratch("odd.csv");
    std::ofstream(csv) << "x,pdf\n0,1\n";
    CHECK(run_lab("render --csv " + csv.string() + " --svg " + scratch("odd.svg").string() + " --plot score-plot",
                  &err) == 1);
    CHECK(err.find("missing column 'pi1'") != std::string::npos);
    fs::remove(csv);
  }
}
