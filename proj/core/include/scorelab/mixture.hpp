#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorelab/numerics.hpp"

namespace scorelab {

/// Immutable 1-D Gaussian mixture sum_k w_k N(x; mu_k, sigma_k^2).
///
/// `log_offset` is an additive constant on the log density; it turns the
/// object into an unnormalised model without touching anything that depends
/// only on the score.  All density evaluations go through log-sum-exp, so the
/// far tails (exponents in the hundreds) stay finite in log space.
class GaussianMixture1D {
 public:
  GaussianMixture1D(std::vector<double> weights, std::vector<double> means, std::vector<double> stds,
                    double log_offset = 0.0);

  static GaussianMixture1D gaussian(double mean, double std_dev);
  /// pi1 N(mu1, sigma^2) + (1 - pi1) N(mu2, sigma^2).
  static GaussianMixture1D two_component(double pi1, double mu1, double mu2, double sigma);

  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> means() const { return means_; }
  std::span<const double> stds() const { return stds_; }
  double log_offset() const { return log_offset_; }

  GaussianMixture1D with_log_offset(double offset) const;
  /// Component k as a single normalised Gaussian.
  GaussianMixture1D component(std::size_t k) const;

  double log_pdf(double x) const;
  double pdf(double x) const;
  /// log_pdf(x) + log_offset.
  double log_unnorm(double x) const;
  /// log p(x) - log p(y); the normaliser and log_offset cancel exactly.
  double log_ratio(double x, double y) const;

  /// d/dx log p(x) as the responsibility-weighted component scores.
  double score(double x) const;
  /// d/dx score(x) = sum_k r_k (a_k^2 - 1/sigma_k^2) - score(x)^2, a_k the component score.
  double score_derivative(double x) const;
  /// d/dx pdf(x) = pdf(x) * score(x).
  double pdf_derivative(double x) const;
  /// Posterior component probabilities at x; `out` must have size() entries.
  void responsibilities(double x, std::span<double> out) const;

  double mean() const;
  double variance() const;
  double min_mean() const;
  double max_mean() const;
  double max_std() const;

  /// Probability mass outside [lo, hi].
  double mass_outside(double lo, double hi) const;

  /// [min mu - 12 max sigma, max mu + 12 max sigma] on `nodes` points.
  QuadratureSpec default_window(std::size_t nodes = QuadratureSpec::kDefaultNodes) const;

  bool operator==(const GaussianMixture1D&) const = default;

 private:
  double log_term(std::size_t k, double x) const;

  std::vector<double> weights_;
  std::vector<double> means_;
  std::vector<double> stds_;
  double log_offset_;
  std::vector<double> log_coef_;  // log w_k - log sigma_k - log sqrt(2 pi)
  std::vector<double> inv_var_;
};

/// Default window covering every component of both mixtures.
QuadratureSpec default_window(const GaussianMixture1D& a, const GaussianMixture1D& b,
                              std::size_t nodes = QuadratureSpec::kDefaultNodes);

/// Validated two-component, equal-std projection with mu1 < mu2.
class TwoComponentView {
 public:
  explicit TwoComponentView(GaussianMixture1D base);

  const GaussianMixture1D& base() const { return base_; }
  double mu1() const { return base_.means()[0]; }
  double mu2() const { return base_.means()[1]; }
  double sigma() const { return base_.stds()[0]; }
  /// (mu1 - mu2) / sigma^2; always negative.
  double separation() const { return (mu1() - mu2()) / (sigma() * sigma()); }
  double midpoint() const { return 0.5 * (mu1() + mu2()); }

 private:
  GaussianMixture1D base_;
};

/// Weight-free score limit as the components separate: the score of the
/// nearer component on each side of the midpoint.  Throws at the midpoint.
double score_limit(const TwoComponentView& view, double x);

/// Convolution with N(0, noise_std^2): stds become sqrt(sigma_k^2 + noise_std^2).
GaussianMixture1D smooth(const GaussianMixture1D& m, double noise_std);

/// Score of p^beta with log p^beta = beta * log_unnorm + const.  0 < beta <= 1.
double temper_score(const GaussianMixture1D& m, double beta, double x);

std::vector<double> sample(const GaussianMixture1D& m, std::size_t n, RngStream& rng);

/// `weights=...; means=...; stds=...; log_offset=...` with comma-separated decimals.
std::string to_record(const GaussianMixture1D& m);
GaussianMixture1D parse_mixture_record(std::string_view record);

/// Shortest round-trip decimal for `v`.
std::string format_real(double v);

}  // namespace scorelab
