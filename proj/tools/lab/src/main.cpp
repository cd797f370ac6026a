#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lab/commands.hpp"
#include "lab/svg.hpp"
#include "scorelab/numerics.hpp"

int main(int argc, char** argv) {
  CLI::App app{"lab: score-based diagnostics on 1-D Gaussian mixtures"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  unsigned threads = 1;
  for (const auto& name : lab::command_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  }

  std::string csv_path, svg_path, plot_name, window, title;
  auto* render = app.add_subcommand("render", "render a CSV produced by lab as SVG");
  render->add_option("--csv", csv_path, "input CSV")->required();
  render->add_option("--svg", svg_path, "output SVG")->required();
  render->add_option("--plot", plot_name, "plot kind; detected from the header if omitted");
  render->add_option("--window", window, "histogram range lo,hi");
  render->add_option("--title", title, "figure title");

  CLI11_PARSE(app, argc, argv);
  const CLI::App* chosen = app.get_subcommands().front();

  if (chosen == render) {
    try {
      const lab::Table t = lab::read_csv(csv_path);
      std::optional<lab::PlotKind> kind;
      if (plot_name.empty()) {
        kind = lab::detect_plot(t);
        if (!kind) throw std::invalid_argument(csv_path + ": unrecognised CSV schema; pass --plot");
      } else {
        kind = lab::plot_kind_from_name(plot_name);
        if (!kind) throw std::invalid_argument("unknown plot kind '" + plot_name + "'");
      }
      lab::PlotSpec spec{*kind, title, std::nullopt, {}};
      if (!window.empty()) {
        const auto comma = window.find(',');
        const auto lo = lab::parse_real(window.substr(0, comma));
        const auto hi = comma == std::string::npos ? std::nullopt : lab::parse_real(window.substr(comma + 1));
        if (!lo || !hi || !(*lo < *hi)) throw std::invalid_argument("--window: expected lo,hi with lo < hi");
        spec.window = std::make_pair(*lo, *hi);
      }
      const std::string svg = lab::render_figure(lab::figure_from_table(t, spec));
      lab::OutputDir out(std::filesystem::path(svg_path).parent_path().empty()
                             ? std::filesystem::path(".")
                             : std::filesystem::path(svg_path).parent_path());
      out.write(std::filesystem::path(svg_path).filename().string(), svg);
      out.commit();
    } catch (const std::exception& e) {
      std::cerr << "lab render: " << e.what() << "\n";
      return 1;
    }
    return 0;
  }

  const std::string command = chosen->get_name();
  try {
    const auto cfg = lab::Config::load(config_path);
    scorelab::set_max_threads(threads);
    lab::OutputDir out(out_dir);
    lab::run_command(command, cfg, out);
    out.commit();
  } catch (const lab::ConfigError& e) {
    std::cerr << "lab " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "lab " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
