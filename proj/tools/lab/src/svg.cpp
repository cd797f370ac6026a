#include "lab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace lab {

namespace {

constexpr double kWidth = 720, kHeight = 440, kTop = 40, kBottom = 60, kLeft = 80;
constexpr double kLogFloor = 1e-30;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v + 0.0);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0, step = 0.2;
};

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

Axis nice_axis(double lo, double hi, bool integer_steps = false) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || lo > hi) return {};
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5 * std::max(1.0, std::abs(lo));
    hi += 0.5 * std::max(1.0, std::abs(hi));
  }
  double step = nice_step(hi - lo, 5);
  if (integer_steps) step = std::max(1.0, std::round(step));
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

std::string tick_label(double v, double step, bool log) {
  if (std::abs(v) < step * 1e-9) v = 0.0;
  char buf[32];
  if (log) {
    std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(v)));
  } else {
    const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v + 0.0);
  }
  return buf;
}

// Multiples of the step inside [lo, hi].
std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  const double first = std::ceil(a.lo / a.step - 1e-9);
  const double last = std::floor(a.hi / a.step + 1e-9);
  for (double k = first; k <= last; k += 1.0) out.push_back(k * a.step);
  return out;
}

struct Bins {
  double lo, width;
  std::vector<double> density;
};

Bins bin(const Histogram& h, double lo, double width, std::size_t count) {
  Bins b{lo, width, std::vector<double>(count, 0.0)};
  if (h.values.empty()) return b;
  for (double v : h.values) {
    const double k = std::floor((v - lo) / width);
    if (k >= 0 && k < static_cast<double>(count)) b.density[static_cast<std::size_t>(k)] += 1.0;
  }
  for (double& d : b.density) d /= static_cast<double>(h.values.size()) * width;
  return b;
}

}  // namespace

std::string render_figure(const Figure& fig) {
  const bool dual = std::any_of(fig.lines.begin(), fig.lines.end(), [](const Series& s) { return s.right_axis; });
  const double right = dual ? 80 : 30;
  const double pw = kWidth - kLeft - right, ph = kHeight - kTop - kBottom;
  const auto ty = [&](double y) { return fig.log_y ? std::log10(std::max(y, kLogFloor)) : y; };

  // Ranges.
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY, y2lo = INFINITY, y2hi = -INFINITY;
  for (const auto& s : fig.lines) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      double& lo = s.right_axis ? y2lo : ylo;
      double& hi = s.right_axis ? y2hi : yhi;
      lo = std::min(lo, ty(s.y[i]));
      hi = std::max(hi, ty(s.y[i]));
    }
  }
  std::vector<Bins> bins;
  const bool any_hist_values =
      std::any_of(fig.histograms.begin(), fig.histograms.end(), [](const Histogram& h) { return !h.values.empty(); });
  if (!fig.histograms.empty()) {
    double lo, hi;
    if (fig.window) {
      std::tie(lo, hi) = *fig.window;
    } else {
      lo = INFINITY;
      hi = -INFINITY;
      for (const auto& h : fig.histograms) {
        for (double v : h.values) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      if (!any_hist_values) lo = -1.0, hi = 1.0;
      lo = std::floor(lo / fig.bin_width) * fig.bin_width;
      hi = std::max(lo + fig.bin_width, std::ceil(hi / fig.bin_width) * fig.bin_width);
    }
    const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / fig.bin_width - 1e-9));
    xlo = std::min(xlo, lo);
    xhi = std::max(xhi, lo + fig.bin_width * static_cast<double>(count));
    ylo = std::min(ylo, 0.0);
    for (const auto& h : fig.histograms) {
      bins.push_back(bin(h, lo, fig.bin_width, count));
      const double top = *std::max_element(bins.back().density.begin(), bins.back().density.end());
      yhi = std::max(yhi, top);
    }
  }
  if (!(xlo <= xhi)) xlo = 0.0, xhi = 1.0;
  if (!(ylo <= yhi)) ylo = 0.0, yhi = 1.0;
  if (!(y2lo <= y2hi)) y2lo = 0.0, y2hi = 1.0;

  const Axis xa = fig.histograms.empty() ? nice_axis(xlo, xhi) : Axis{xlo, xhi, nice_step(xhi - xlo, 8)};
  const Axis ya = nice_axis(ylo, yhi, fig.log_y);
  const Axis y2a = nice_axis(y2lo, y2hi, fig.log_y);
  const auto px = [&](double x) { return kLeft + (x - xa.lo) / (xa.hi - xa.lo) * pw; };
  const auto py = [&](double y, const Axis& a) { return kTop + ph - (y - a.lo) / (a.hi - a.lo) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"440\" viewBox=\"0 0 720 440\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"720\" height=\"440\" fill=\"white\"/>\n";
  if (!fig.title.empty()) {
    o += "<text x=\"360.00\" y=\"24.00\" text-anchor=\"middle\" font-size=\"14\">" + escape(fig.title) + "</text>\n";
  }

  // Histogram bars under the lines.
  for (std::size_t h = 0; h < bins.size(); ++h) {
    const char* color = kColors[(fig.lines.size() + h) % std::size(kColors)];
    o += "<g class=\"histogram\" fill=\"" + std::string(color) + "\" fill-opacity=\"0.45\" stroke=\"none\">\n";
    for (std::size_t k = 0; k < bins[h].density.size(); ++k) {
      const double d = bins[h].density[k];
      if (d <= 0.0) continue;
      const double x0 = px(bins[h].lo + bins[h].width * static_cast<double>(k));
      const double x1 = px(bins[h].lo + bins[h].width * static_cast<double>(k + 1));
      const double y0 = py(d, ya);
      o += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
           num(kTop + ph - y0) + "\"/>\n";
    }
    o += "</g>\n";
  }

  // Axes frame and ticks.
  o += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  o += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) + "\"/>\n";
  for (double t : ticks(xa)) {
    o += "<line x1=\"" + num(px(t)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(px(t)) + "\" y2=\"" +
         num(kTop + ph + 5) + "\"/>\n";
  }
  for (double t : ticks(ya)) {
    o += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(py(t, ya)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
         num(py(t, ya)) + "\"/>\n";
  }
  if (dual) {
    for (double t : ticks(y2a)) {
      o += "<line x1=\"" + num(kLeft + pw) + "\" y1=\"" + num(py(t, y2a)) + "\" x2=\"" + num(kLeft + pw + 5) +
           "\" y2=\"" + num(py(t, y2a)) + "\"/>\n";
    }
  }
  o += "</g>\n";

  o += "<g class=\"tick-labels\" fill=\"black\">\n";
  for (double t : ticks(xa)) {
    o += "<text x=\"" + num(px(t)) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         tick_label(t, xa.step, false) + "</text>\n";
  }
  for (double t : ticks(ya)) {
    o += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py(t, ya) + 4) + "\" text-anchor=\"end\">" +
         tick_label(t, ya.step, fig.log_y) + "</text>\n";
  }
  if (dual) {
    for (double t : ticks(y2a)) {
      o += "<text x=\"" + num(kLeft + pw + 8) + "\" y=\"" + num(py(t, y2a) + 4) + "\" text-anchor=\"start\">" +
           tick_label(t, y2a.step, fig.log_y) + "</text>\n";
    }
  }
  o += "</g>\n";

  o += "<text class=\"x-label\" x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 18) +
       "\" text-anchor=\"middle\">" + escape(fig.x_label) + "</text>\n";
  o += "<text class=\"y-label\" x=\"20.00\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20.00 " +
       num(kTop + ph / 2) + ")\">" + escape(fig.y_label) + "</text>\n";
  if (dual) {
    const double x = kWidth - 16;
    o += "<text class=\"y2-label\" x=\"" + num(x) + "\" y=\"" + num(kTop + ph / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(90 " + num(x) + " " + num(kTop + ph / 2) + ")\">" +
         escape(fig.y2_label) + "</text>\n";
  }

  // Lines, clipped to the plot area.
  o += "<clipPath id=\"plot\"><rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
       "\" height=\"" + num(ph) + "\"/></clipPath>\n";
  std::size_t color_index = 0;
  std::vector<std::pair<std::string, std::string>> legend;
  for (const auto& s : fig.lines) {
    const char* color = kColors[color_index++ % std::size(kColors)];
    const Axis& a = s.right_axis ? y2a : ya;
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) {
        o += "<polyline clip-path=\"url(#plot)\" fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\"" + (s.right_axis ? " stroke-dasharray=\"6 3\"" : "") + " points=\"" + pts +
             "\"/>\n";
        pts.clear();
      }
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      if (!pts.empty()) pts.push_back(' ');
      pts += num(px(s.x[i])) + "," + num(py(ty(s.y[i]), a));
    }
    flush();
    if (!s.label.empty()) legend.emplace_back(s.label + (s.right_axis ? " (right)" : ""), color);
  }
  for (std::size_t h = 0; h < fig.histograms.size(); ++h) {
    if (!fig.histograms[h].label.empty()) {
      legend.emplace_back(fig.histograms[h].label, kColors[(fig.lines.size() + h) % std::size(kColors)]);
    }
  }
  if (!legend.empty()) {
    o += "<g class=\"legend\">\n";
    for (std::size_t i = 0; i < legend.size(); ++i) {
      const double y = kTop + 14 + 16 * static_cast<double>(i);
      const double x = kLeft + pw - 170;
      o += "<rect x=\"" + num(x) + "\" y=\"" + num(y - 9) + "\" width=\"12\" height=\"10\" fill=\"" +
           legend[i].second + "\"/>\n";
      o += "<text x=\"" + num(x + 18) + "\" y=\"" + num(y) + "\">" + escape(legend[i].first) + "</text>\n";
    }
    o += "</g>\n";
  }
  o += "</svg>\n";
  return o;
}

const std::vector<std::string>& plot_columns(PlotKind kind) {
  static const std::map<PlotKind, std::vector<std::string>> cols{
      {PlotKind::score_plot, {"x", "pi1", "pdf", "score"}},
      {PlotKind::witness, {"x", "f_weighted", "f_unweighted", "q_pdf", "p_score", "q_score"}},
      {PlotKind::sweep, {"separation", "pi", "pi_prime", "j_pp_prime", "j_q_p", "method", "nodes"}},
      {PlotKind::stein_sweep, {"separation", "pi", "function_class", "discrepancy", "nodes"}},
      {PlotKind::particles, {"iteration", "particle_id", "position"}},
      {PlotKind::langevin_trace, {"level", "sigma_j", "step", "mode_fraction"}},
  };
  return cols.at(kind);
}

std::optional<PlotKind> plot_kind_from_name(const std::string& name) {
  static const std::map<std::string, PlotKind> names{
      {"score-plot", PlotKind::score_plot}, {"witness", PlotKind::witness},
      {"sweep", PlotKind::sweep},           {"stein-sweep", PlotKind::stein_sweep},
      {"particles", PlotKind::particles},   {"langevin-trace", PlotKind::langevin_trace},
  };
  const auto it = names.find(name);
  if (it == names.end()) return std::nullopt;
  return it->second;
}

std::optional<PlotKind> detect_plot(const Table& t) {
  for (auto kind : {PlotKind::score_plot, PlotKind::witness, PlotKind::sweep, PlotKind::stein_sweep,
                    PlotKind::particles, PlotKind::langevin_trace}) {
    if (t.columns() == plot_columns(kind)) return kind;
  }
  // Final-position files carry no iteration column.
  if (t.columns() == std::vector<std::string>{"particle_id", "position"}) return PlotKind::particles;
  return std::nullopt;
}

namespace {

// Rows grouped by the text of `key_cols`, groups in first-appearance order.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_rows(const Table& t,
                                                                         const std::vector<std::size_t>& key_cols,
                                                                         const std::vector<std::string>& names) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  for (std::size_t r = 0; r < t.size(); ++r) {
    std::string key;
    for (std::size_t i = 0; i < key_cols.size(); ++i) {
      if (i) key += ", ";
      key += names[i] + "=" + t.rows()[r][key_cols[i]];
    }
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.emplace_back(key, std::vector<std::size_t>{});
      it = groups.end() - 1;
    }
    it->second.push_back(r);
  }
  return groups;
}

Series series_of(const Table& t, const std::vector<std::size_t>& rows, std::size_t xc, std::size_t yc,
                 std::string label, bool right = false) {
  Series s{std::move(label), {}, {}, right};
  for (std::size_t r : rows) {
    s.x.push_back(t.real(r, xc));
    s.y.push_back(t.real(r, yc));
  }
  return s;
}

}  // namespace

Figure figure_from_table(const Table& t, const PlotSpec& spec) {
  std::vector<std::size_t> c;
  for (const auto& name : plot_columns(spec.kind)) {
    if (spec.kind == PlotKind::particles && name != "position") continue;
    c.push_back(t.column(name));
  }
  Figure f;
  f.title = spec.title;
  f.window = spec.window;
  f.lines = spec.overlays;
  switch (spec.kind) {
    case PlotKind::score_plot: {
      f.x_label = "x";
      f.y_label = "density";
      f.y2_label = "score";
      const auto groups = group_rows(t, {c[1]}, {"pi1"});
      for (const auto& [key, rows] : groups) f.lines.push_back(series_of(t, rows, c[0], c[2], "pdf " + key));
      for (const auto& [key, rows] : groups) f.lines.push_back(series_of(t, rows, c[0], c[3], "score " + key, true));
      break;
    }
    case PlotKind::witness: {
      std::vector<std::size_t> all(t.size());
      for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
      f.x_label = "x";
      f.y_label = "density of q";
      f.y2_label = "normalised witness";
      f.lines.push_back(series_of(t, all, c[0], c[3], "q pdf"));
      f.lines.push_back(series_of(t, all, c[0], c[1], "f weighted", true));
      f.lines.push_back(series_of(t, all, c[0], c[2], "f unweighted", true));
      break;
    }
    case PlotKind::sweep: {
      f.x_label = "separation";
      f.y_label = "Fisher divergence";
      f.log_y = true;
      const auto groups = group_rows(t, {c[1], c[2]}, {"pi", "pi'"});
      for (const auto& [key, rows] : groups) f.lines.push_back(series_of(t, rows, c[0], c[3], "J(p||p') " + key));
      for (const auto& [key, rows] : groups) f.lines.push_back(series_of(t, rows, c[0], c[4], "J(p1||p) " + key));
      break;
    }
    case PlotKind::stein_sweep: {
      f.x_label = "separation";
      f.y_label = "Stein discrepancy";
      f.log_y = true;
      for (const auto& [key, rows] : group_rows(t, {c[1], c[2]}, {"pi", "class"})) {
        f.lines.push_back(series_of(t, rows, c[0], c[3], key));
      }
      break;
    }
    case PlotKind::particles: {
      f.x_label = "position";
      f.y_label = "density";
      if (t.has_column("iteration")) {
        // Initial and final snapshots, as in an initial/final histogram pair.
        const std::size_t ic = t.column("iteration");
        const auto groups = group_rows(t, {ic}, {"iteration"});
        std::vector<std::size_t> pick;
        if (!groups.empty()) pick.push_back(0);
        if (groups.size() > 1) pick.push_back(groups.size() - 1);
        for (std::size_t g : pick) {
          Histogram h{groups[g].first, {}};
          for (std::size_t r : groups[g].second) h.values.push_back(t.real(r, c[0]));
          f.histograms.push_back(std::move(h));
        }
        if (groups.empty()) f.histograms.push_back({});
      } else {
        Histogram h{"final", {}};
        for (std::size_t r = 0; r < t.size(); ++r) h.values.push_back(t.real(r, c[0]));
        f.histograms.push_back(std::move(h));
      }
      break;
    }
    case PlotKind::langevin_trace: {
      f.x_label = "checkpoint";
      f.y_label = "mode fraction";
      Series s{"mode fraction", {}, {}, false};
      for (std::size_t r = 0; r < t.size(); ++r) {
        s.x.push_back(static_cast<double>(r + 1));
        s.y.push_back(t.real(r, c[3]));
      }
      f.lines.push_back(std::move(s));
      break;
    }
  }
  return f;
}

void render_svg(const std::filesystem::path& csv_path, const PlotSpec& spec, const std::filesystem::path& svg_path) {
  const Table t = read_csv(csv_path);
  const std::string svg = render_figure(figure_from_table(t, spec));
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error(svg_path.string() + ": cannot write");
  out << svg;
  if (!out) throw std::runtime_error(svg_path.string() + ": write failed");
}

}  // namespace lab
