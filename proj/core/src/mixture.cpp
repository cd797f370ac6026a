#include "scorelab/mixture.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace scorelab {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("GaussianMixture1D: " + what);
}

}  // namespace

GaussianMixture1D::GaussianMixture1D(std::vector<double> weights, std::vector<double> means,
                                     std::vector<double> stds, double log_offset)
    : weights_(std::move(weights)), means_(std::move(means)), stds_(std::move(stds)), log_offset_(log_offset) {
  require(!weights_.empty(), "need at least one component");
  require(weights_.size() == means_.size() && means_.size() == stds_.size(),
          "weights, means and stds must have the same length");
  require(std::isfinite(log_offset_), "log_offset must be finite");
  double total = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    require(weights_[k] > 0.0 && weights_[k] <= 1.0, "weights must lie in (0, 1]");
    require(std::isfinite(means_[k]), "means must be finite");
    require(std::isfinite(stds_[k]) && stds_[k] > 0.0, "stds must be positive");
    total += weights_[k];
  }
  require(std::abs(total - 1.0) <= 1e-12, "weights must sum to 1");

  log_coef_.resize(size());
  inv_var_.resize(size());
  for (std::size_t k = 0; k < size(); ++k) {
    log_coef_[k] = std::log(weights_[k]) - std::log(stds_[k]) - kLogSqrt2Pi;
    inv_var_[k] = 1.0 / (stds_[k] * stds_[k]);
  }
}

GaussianMixture1D GaussianMixture1D::gaussian(double mean, double std_dev) {
  return GaussianMixture1D({1.0}, {mean}, {std_dev});
}

GaussianMixture1D GaussianMixture1D::two_component(double pi1, double mu1, double mu2, double sigma) {
  return GaussianMixture1D({pi1, 1.0 - pi1}, {mu1, mu2}, {sigma, sigma});
}

GaussianMixture1D GaussianMixture1D::with_log_offset(double offset) const {
  return GaussianMixture1D(weights_, means_, stds_, offset);
}

GaussianMixture1D GaussianMixture1D::component(std::size_t k) const {
  if (k >= size()) throw std::out_of_range("GaussianMixture1D::component: index out of range");
  return gaussian(means_[k], stds_[k]);
}

double GaussianMixture1D::log_term(std::size_t k, double x) const {
  const double d = x - means_[k];
  return log_coef_[k] - 0.5 * d * d * inv_var_[k];
}

double GaussianMixture1D::log_pdf(double x) const {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) top = std::max(top, log_term(k, x));
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (std::size_t k = 0; k < size(); ++k) acc += std::exp(log_term(k, x) - top);
  return top + std::log(acc);
}

double GaussianMixture1D::pdf(double x) const { return std::exp(log_pdf(x)); }

double GaussianMixture1D::log_unnorm(double x) const { return log_pdf(x) + log_offset_; }

double GaussianMixture1D::log_ratio(double x, double y) const { return log_pdf(x) - log_pdf(y); }

void GaussianMixture1D::responsibilities(double x, std::span<double> out) const {
  if (out.size() != size()) throw std::invalid_argument("responsibilities: output size mismatch");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) {
    out[k] = log_term(k, x);
    top = std::max(top, out[k]);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    out[k] = std::exp(out[k] - top);
    total += out[k];
  }
  for (double& r : out) r /= total;
}

double GaussianMixture1D::score(double x) const {
  if (size() == 1) return -(x - means_[0]) * inv_var_[0];
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) top = std::max(top, log_term(k, x));
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    const double r = std::exp(log_term(k, x) - top);
    total += r;
    weighted += r * (-(x - means_[k]) * inv_var_[k]);
  }
  return weighted / total;
}

double GaussianMixture1D::score_derivative(double x) const {
  if (size() == 1) return -inv_var_[0];
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) top = std::max(top, log_term(k, x));
  double total = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    const double r = std::exp(log_term(k, x) - top);
    const double a = -(x - means_[k]) * inv_var_[k];
    total += r;
    first += r * a;
    second += r * (a * a - inv_var_[k]);
  }
  const double s = first / total;
  return second / total - s * s;
}

double GaussianMixture1D::pdf_derivative(double x) const { return pdf(x) * score(x); }

double GaussianMixture1D::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < size(); ++k) m += weights_[k] * means_[k];
  return m;
}

double GaussianMixture1D::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    const double d = means_[k] - m;
    v += weights_[k] * (stds_[k] * stds_[k] + d * d);
  }
  return v;
}

double GaussianMixture1D::min_mean() const { return *std::min_element(means_.begin(), means_.end()); }
double GaussianMixture1D::max_mean() const { return *std::max_element(means_.begin(), means_.end()); }
double GaussianMixture1D::max_std() const { return *std::max_element(stds_.begin(), stds_.end()); }

double GaussianMixture1D::mass_outside(double lo, double hi) const {
  double mass = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    const double scale = stds_[k] * std::numbers::sqrt2;
    const double below = 0.5 * std::erfc((means_[k] - lo) / scale);
    const double above = 0.5 * std::erfc((hi - means_[k]) / scale);
    mass += weights_[k] * (below + above);
  }
  return mass;
}

QuadratureSpec GaussianMixture1D::default_window(std::size_t nodes) const {
  const double pad = QuadratureSpec::kDefaultWindowSigmas * max_std();
  return QuadratureSpec(min_mean() - pad, max_mean() + pad, nodes);
}

QuadratureSpec default_window(const GaussianMixture1D& a, const GaussianMixture1D& b, std::size_t nodes) {
  return a.default_window(nodes).merged(b.default_window(nodes));
}

TwoComponentView::TwoComponentView(GaussianMixture1D base) : base_(std::move(base)) {
  if (base_.size() != 2) throw std::invalid_argument("TwoComponentView: mixture must have exactly two components");
  const double s0 = base_.stds()[0];
  const double s1 = base_.stds()[1];
  if (std::abs(s0 - s1) > 1e-12 * std::max(s0, s1)) {
    throw std::invalid_argument("TwoComponentView: components must share one std");
  }
  if (!(base_.means()[0] < base_.means()[1])) throw std::invalid_argument("TwoComponentView: require mu1 < mu2");
}

double score_limit(const TwoComponentView& view, double x) {
  const double mid = view.midpoint();
  if (x == mid) throw std::domain_error("score_limit: limit undefined at midpoint");
  const double var = view.sigma() * view.sigma();
  return x < mid ? -(x - view.mu1()) / var : -(x - view.mu2()) / var;
}

GaussianMixture1D smooth(const GaussianMixture1D& m, double noise_std) {
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
    throw std::invalid_argument("smooth: noise_std must be positive");
  }
  std::vector<double> stds(m.stds().begin(), m.stds().end());
  for (double& s : stds) s = std::sqrt(s * s + noise_std * noise_std);
  return GaussianMixture1D({m.weights().begin(), m.weights().end()}, {m.means().begin(), m.means().end()},
                           std::move(stds), m.log_offset());
}

double temper_score(const GaussianMixture1D& m, double beta, double x) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("temper_score: beta must lie in (0, 1]");
  return beta * m.score(x);
}

std::vector<double> sample(const GaussianMixture1D& m, std::size_t n, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("sample: n must be positive");
  std::vector<double> cumulative(m.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    acc += m.weights()[k];
    cumulative[k] = acc;
  }
  std::vector<double> out(n);
  for (double& x : out) {
    std::size_t k = 0;
    if (m.size() > 1) {
      const double u = rng.uniform() * acc;
      while (k + 1 < m.size() && u >= cumulative[k]) ++k;
    }
    x = m.means()[k] + m.stds()[k] * rng.normal();
  }
  return out;
}

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string join(std::span<const double> xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_real(xs[i]);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view token, std::string_view field) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw std::invalid_argument("mixture record: bad number '" + std::string(token) + "' in field " +
                                std::string(field));
  }
  return v;
}

std::vector<double> parse_list(std::string_view value, std::string_view field) {
  std::vector<double> out;
  while (true) {
    const auto comma = value.find(',');
    out.push_back(parse_real(value.substr(0, comma), field));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

std::string to_record(const GaussianMixture1D& m) {
  return "weights=" + join(m.weights()) + "; means=" + join(m.means()) + "; stds=" + join(m.stds()) +
         "; log_offset=" + format_real(m.log_offset());
}

GaussianMixture1D parse_mixture_record(std::string_view record) {
  std::vector<double> weights, means, stds;
  double offset = 0.0;
  bool have_w = false, have_m = false, have_s = false;
  while (!trim(record).empty()) {
    const auto semi = record.find(';');
    const std::string_view item = trim(record.substr(0, semi));
    record = semi == std::string_view::npos ? std::string_view{} : record.substr(semi + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("mixture record: expected key=value, got '" + std::string(item) + "'");
    }
    const std::string_view key = trim(item.substr(0, eq));
    const std::string_view value = item.substr(eq + 1);
    if (key == "weights") {
      weights = parse_list(value, key);
      have_w = true;
    } else if (key == "means") {
      means = parse_list(value, key);
      have_m = true;
    } else if (key == "stds") {
      stds = parse_list(value, key);
      have_s = true;
    } else if (key == "log_offset") {
      offset = parse_real(value, key);
    } else {
      throw std::invalid_argument("mixture record: unknown field '" + std::string(key) + "'");
    }
  }
  if (!have_w) throw std::invalid_argument("mixture record: missing field weights");
  if (!have_m) throw std::invalid_argument("mixture record: missing field means");
  if (!have_s) throw std::invalid_argument("mixture record: missing field stds");
  return GaussianMixture1D(std::move(weights), std::move(means), std::move(stds), offset);
}

}  // namespace scorelab
