#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lab/csv.hpp"

namespace lab {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool right_axis = false;
};

struct Histogram {
  std::string label;
  std::vector<double> values;
};

/// A single plot on a fixed 720x440 canvas.  Histograms are drawn as
/// densities with `bin_width` bins starting at the window's lower edge.
struct Figure {
  std::string title, x_label, y_label, y2_label;
  std::vector<Series> lines;
  std::vector<Histogram> histograms;
  double bin_width = 0.2;
  std::optional<std::pair<double, double>> window;
  bool log_y = false;
};

std::string render_figure(const Figure& fig);

enum class PlotKind { score_plot, witness, sweep, stein_sweep, particles, langevin_trace };

struct PlotSpec {
  PlotKind kind;
  std::string title;
  std::optional<std::pair<double, double>> window;  // histogram range
  std::vector<Series> overlays;                      // drawn before the table's own series
};

/// Required columns for each kind, in CSV order.
const std::vector<std::string>& plot_columns(PlotKind kind);
std::optional<PlotKind> plot_kind_from_name(const std::string& name);
/// Kind whose column set matches the header exactly.
std::optional<PlotKind> detect_plot(const Table& t);

/// Throws `missing column '...'` when the table lacks a required column.
Figure figure_from_table(const Table& t, const PlotSpec& spec);

void render_svg(const std::filesystem::path& csv_path, const PlotSpec& spec, const std::filesystem::path& svg_path);

}  // namespace lab
