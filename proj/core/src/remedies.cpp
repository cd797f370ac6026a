#include "scorelab/remedies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace scorelab {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}

BandwidthRule BandwidthRule::fixed(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("BandwidthRule::fixed: h must be positive");
  return BandwidthRule(Kind::fixed, h);
}

KdeModel::KdeModel(std::vector<double> centers, double bandwidth)
    : centers_(std::move(centers)), bandwidth_(bandwidth) {
  if (centers_.empty()) throw std::invalid_argument("KdeModel: centers must be nonempty");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
    throw std::invalid_argument("KdeModel: bandwidth must be positive");
  }
}

KdeModel kde_fit(std::span<const double> samples, BandwidthRule rule) {
  if (samples.size() < 2) throw std::invalid_argument("kde_fit: need at least 2 samples");
  double h = rule.value();
  if (rule.kind() == BandwidthRule::Kind::silverman) {
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    h = 1.06 * sd * std::pow(n, -0.2);
    if (!(h > 0.0)) throw std::invalid_argument("kde_fit: silverman bandwidth is zero (constant samples)");
  }
  return KdeModel({samples.begin(), samples.end()}, h);
}

double kde_log_pdf(const KdeModel& m, double x) {
  const double h = m.bandwidth();
  const double inv_h = 1.0 / h;
  double top = -std::numeric_limits<double>::infinity();
  for (double c : m.centers()) {
    const double z = (x - c) * inv_h;
    top = std::max(top, -0.5 * z * z);
  }
  double acc = 0.0;
  for (double c : m.centers()) {
    const double z = (x - c) * inv_h;
    acc += std::exp(-0.5 * z * z - top);
  }
  return top + std::log(acc / static_cast<double>(m.centers().size())) - std::log(h) - kLogSqrt2Pi;
}

void CmlConfig::validate() const {
  if (!(lambda_ml >= 0.0)) throw std::invalid_argument("CmlConfig: lambda_ml must be nonnegative");
  if (pair_subsample && *pair_subsample == 0) throw std::invalid_argument("CmlConfig: pair_subsample must be positive");
}

std::vector<IndexPair> sample_pairs(std::size_t n, const std::optional<std::size_t>& subsample, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("sample_pairs: need at least 2 samples");
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1);
  auto decode = [n](std::uint64_t t) {
    const std::size_t i = static_cast<std::size_t>(t / (n - 1));
    const std::size_t r = static_cast<std::size_t>(t % (n - 1));
    return IndexPair{i, r < i ? r : r + 1};
  };

  std::vector<std::uint64_t> picked;
  if (!subsample || *subsample >= total) {
    picked.resize(total);
    for (std::uint64_t t = 0; t < total; ++t) picked[t] = t;
  } else {
    // Floyd's algorithm: m distinct values from [0, total).
    const std::uint64_t m = *subsample;
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(m * 2);
    for (std::uint64_t j = total - m; j < total; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    picked.assign(chosen.begin(), chosen.end());
    std::sort(picked.begin(), picked.end());
  }
  std::vector<IndexPair> pairs(picked.size());
  for (std::size_t k = 0; k < picked.size(); ++k) pairs[k] = decode(picked[k]);
  return pairs;
}

double cml_loss_pairs(const GaussianMixture1D& model, const LogDensityFn& log_pml, std::span<const double> samples,
                      std::span<const IndexPair> pairs, double lambda_ml) {
  if (samples.size() < 2) throw std::invalid_argument("cml_loss: need at least 2 samples");
  if (!(lambda_ml >= 0.0)) throw std::invalid_argument("cml_loss: lambda_ml must be nonnegative");

  // Each sample's reference and model log densities are needed once.
  std::vector<double> ref(samples.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> mod(samples.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::uint8_t> needed(samples.size(), 0);
  for (const auto& [i, j] : pairs) {
    if (i >= samples.size() || j >= samples.size() || i == j) {
      throw std::invalid_argument("cml_loss: invalid pair index");
    }
    needed[i] = needed[j] = 1;
  }
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (needed[i]) todo.push_back(i);
  }
  parallel_for(todo.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t i = todo[t];
      ref[i] = log_pml(samples[i]);
      mod[i] = model.log_pdf(samples[i]);
    }
  });

  double sum = 0.0;
  for (const auto& [i, j] : pairs) {
    const double d = (ref[i] - ref[j]) - (mod[i] - mod[j]);
    sum += d * d;
  }
  if (!std::isfinite(sum)) throw NumericalError("cml_loss: non-finite log density");
  return lambda_ml * sum;
}

double cml_loss(const GaussianMixture1D& model, const LogDensityFn& log_pml, std::span<const double> samples,
                const CmlConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (samples.size() < 2) throw std::invalid_argument("cml_loss: need at least 2 samples");
  const auto pairs = sample_pairs(samples.size(), cfg.pair_subsample, rng);
  return cml_loss_pairs(model, log_pml, samples, pairs, cfg.lambda_ml);
}

double cml_loss(const GaussianMixture1D& model, const KdeModel& ml, std::span<const double> samples,
                const CmlConfig& cfg, RngStream& rng) {
  return cml_loss(model, [&ml](double x) { return kde_log_pdf(ml, x); }, samples, cfg, rng);
}

namespace {

double int_pow(double x, unsigned r) {
  double out = 1.0;
  for (unsigned i = 0; i < r; ++i) out *= x;
  return out;
}

void check_orders(std::span<const unsigned> orders) {
  if (orders.empty()) throw std::invalid_argument("moments: orders must be nonempty");
  for (unsigned r : orders) {
    if (r == 0) throw std::invalid_argument("moments: orders must be positive");
  }
}

}  // namespace

std::vector<double> model_moments(const GaussianMixture1D& model, std::span<const unsigned> orders,
                                  const QuadratureSpec& spec) {
  check_orders(orders);
  const auto xs = spec.grid();
  std::vector<double> dens(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) dens[i] = model.pdf(xs[i]);
  std::vector<double> out;
  std::vector<double> integrand(xs.size());
  for (unsigned r : orders) {
    for (std::size_t i = 0; i < xs.size(); ++i) integrand[i] = int_pow(xs[i], r) * dens[i];
    out.push_back(quad_integrate_values(integrand, spec));
  }
  return out;
}

std::vector<double> sample_moments(std::span<const double> samples, std::span<const unsigned> orders) {
  check_orders(orders);
  if (samples.empty()) throw std::invalid_argument("sample_moments: empty samples");
  std::vector<double> out;
  for (unsigned r : orders) {
    double acc = 0.0;
    for (double x : samples) acc += int_pow(x, r);
    out.push_back(acc / static_cast<double>(samples.size()));
  }
  return out;
}

std::vector<double> moment_discrepancy(const GaussianMixture1D& model, std::span<const double> samples,
                                       std::span<const unsigned> orders, const QuadratureSpec& spec) {
  auto m = model_moments(model, orders, spec);
  const auto s = sample_moments(samples, orders);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] -= s[i];
  return m;
}

void check_implicit_model(const ImplicitModel& m, RngStream& rng, std::size_t points, double tol) {
  if (!m.transform || !m.transform_dphi) throw std::invalid_argument("ImplicitModel: transform functions required");
  for (std::size_t k = 0; k < points; ++k) {
    const double z = rng.normal();
    const double analytic = m.transform_dphi(z, m.phi);
    const double numeric = finite_diff([&](double phi) { return m.transform(z, phi); }, m.phi, 1e-5);
    if (!(std::abs(analytic - numeric) <= tol * (1.0 + std::abs(numeric)))) {
      throw std::invalid_argument("ImplicitModel: transform_dphi disagrees with finite difference at z = " +
                                  std::to_string(z));
    }
  }
}

EntropyGradEstimate entropy_grad_estimate(const ImplicitModel& m, const RealFn& score_fn, std::size_t n_samples,
                                          RngStream& rng) {
  if (n_samples < 2) throw std::invalid_argument("entropy_grad_estimate: need at least 2 samples");
  RngStream check_stream = rng.split(0);
  check_implicit_model(m, check_stream);
  std::vector<double> terms(n_samples);
  for (double& t : terms) {
    const double z = rng.normal();
    t = score_fn(m.transform(z, m.phi)) * m.transform_dphi(z, m.phi);
  }
  const auto est = mean_with_error(terms);
  if (!std::isfinite(est.mean)) throw NumericalError("entropy_grad_estimate: non-finite estimate");
  return {est.mean, -est.mean, est.std_error, n_samples};
}

}  // namespace scorelab
