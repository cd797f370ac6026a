#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "scorelab/mixture.hpp"
#include "scorelab/numerics.hpp"

namespace scorelab {

// ---------------------------------------------------------------------------
// Kernel density reference model

class BandwidthRule {
 public:
  enum class Kind { silverman, fixed };

  static BandwidthRule silverman() { return BandwidthRule(Kind::silverman, 0.0); }
  static BandwidthRule fixed(double h);

  Kind kind() const { return kind_; }
  double value() const { return h_; }

 private:
  BandwidthRule(Kind kind, double h) : kind_(kind), h_(h) {}
  Kind kind_;
  double h_;
};

/// Equal-weight Gaussian KDE over the stored centers.
class KdeModel {
 public:
  KdeModel(std::vector<double> centers, double bandwidth);

  const std::vector<double>& centers() const { return centers_; }
  double bandwidth() const { return bandwidth_; }

 private:
  std::vector<double> centers_;
  double bandwidth_;
};

/// Silverman: h = 1.06 * sd * N^(-1/5), sd the (N - 1)-normalised sample std.
KdeModel kde_fit(std::span<const double> samples, BandwidthRule rule);

/// log((1/N) sum_i N(x; c_i, h^2)) via log-sum-exp.
double kde_log_pdf(const KdeModel& m, double x);

// ---------------------------------------------------------------------------
// Pairwise log-density-ratio loss

struct CmlConfig {
  double lambda_ml = 1.0;
  /// Number of ordered pairs drawn without replacement; nullopt uses all i != j.
  std::optional<std::size_t> pair_subsample = 10000;

  void validate() const;
};

using LogDensityFn = std::function<double(double)>;
using IndexPair = std::pair<std::size_t, std::size_t>;

/// Ordered pairs (i, j), i != j, over n samples, sorted ascending.
std::vector<IndexPair> sample_pairs(std::size_t n, const std::optional<std::size_t>& subsample, RngStream& rng);

/// lambda * sum over `pairs` of (log pml(x_i)/pml(x_j) - log p~(x_i)/p~(x_j))^2.
///
/// The model ratio uses GaussianMixture1D::log_ratio, in which log_offset
/// cancels exactly, so the loss is bit-identical for any offset.
double cml_loss_pairs(const GaussianMixture1D& model, const LogDensityFn& log_pml, std::span<const double> samples,
                      std::span<const IndexPair> pairs, double lambda_ml);

double cml_loss(const GaussianMixture1D& model, const LogDensityFn& log_pml, std::span<const double> samples,
                const CmlConfig& cfg, RngStream& rng);
double cml_loss(const GaussianMixture1D& model, const KdeModel& ml, std::span<const double> samples,
                const CmlConfig& cfg, RngStream& rng);

// ---------------------------------------------------------------------------
// Moment checks

/// E_p[x^r] by quadrature for each order r.
std::vector<double> model_moments(const GaussianMixture1D& model, std::span<const unsigned> orders,
                                  const QuadratureSpec& spec);
std::vector<double> sample_moments(std::span<const double> samples, std::span<const unsigned> orders);

/// model_moments - sample_moments, order by order.
std::vector<double> moment_discrepancy(const GaussianMixture1D& model, std::span<const double> samples,
                                       std::span<const unsigned> orders, const QuadratureSpec& spec);

// ---------------------------------------------------------------------------
// Entropy gradient of an implicit (pushforward) model x = f(z; phi), z ~ N(0, 1)

enum class BaseLaw { standard_normal };

struct ImplicitModel {
  std::function<double(double z, double phi)> transform;
  std::function<double(double z, double phi)> transform_dphi;
  BaseLaw base_law = BaseLaw::standard_normal;
  double phi = 1.0;
};

/// Compares transform_dphi against a central difference in phi at a few base
/// draws; throws std::invalid_argument on mismatch.
void check_implicit_model(const ImplicitModel& m, RngStream& rng, std::size_t points = 8, double tol = 1e-5);

struct EntropyGradEstimate {
  double raw;        // mean of score(f(z)) * df/dphi(z)
  double negated;    // -raw; the analytic dH/dphi for the scale family
  double std_error;
  std::size_t samples;
};

/// Monte-Carlo mean of score_fn(f(z; phi)) * df/dphi(z; phi).
///
/// For x = phi z the raw value converges to -1/phi while dH/dphi = +1/phi,
/// so `negated` is the entropy gradient under the usual sign convention.
EntropyGradEstimate entropy_grad_estimate(const ImplicitModel& m, const RealFn& score_fn, std::size_t n_samples,
                                          RngStream& rng);

}  // namespace scorelab
