#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scorelab/mixture.hpp"
#include "scorelab/numerics.hpp"

namespace scorelab {

enum class EstimateMethod { quadrature, monte_carlo };

std::string to_string(EstimateMethod method);

/// A divergence value plus how it was obtained.  std_error is present only for
/// Monte-Carlo estimates.  Values within rounding of zero are clamped to 0.
class DivergenceEstimate {
 public:
  static DivergenceEstimate from_quadrature(double value, std::size_t nodes);
  static DivergenceEstimate from_monte_carlo(double value, std::size_t samples, double std_error);

  double value() const { return value_; }
  EstimateMethod method() const { return method_; }
  std::size_t resolution() const { return resolution_; }
  std::optional<double> std_error() const { return std_error_; }

 private:
  DivergenceEstimate(double value, EstimateMethod method, std::size_t resolution, std::optional<double> se);

  double value_;
  EstimateMethod method_;
  std::size_t resolution_;
  std::optional<double> std_error_;
};

/// Largest q mass allowed outside the quadrature window.
inline constexpr double kMaxMassOutsideWindow = 1e-6;

/// J(q || p) = int q (s_q - s_p)^2 dx by quadrature on `spec`.
DivergenceEstimate fisher_divergence(const GaussianMixture1D& q, const GaussianMixture1D& p,
                                     const QuadratureSpec& spec);
/// Same on the default window covering every component of q and p.
DivergenceEstimate fisher_divergence(const GaussianMixture1D& q, const GaussianMixture1D& p);

/// Sample mean of (s_q - s_p)^2 over draws from q.
DivergenceEstimate fisher_divergence_mc(std::span<const double> q_samples, const GaussianMixture1D& q,
                                        const GaussianMixture1D& p);

/// Hyvarinen objective: mean of 0.5 s_p(x)^2 + s_p'(x) over data.  Equals
/// 0.5 J(q||p) - 0.5 E_q[s_q^2] in expectation.
double sm_objective_empirical(std::span<const double> samples, const GaussianMixture1D& p);

/// E_q[s_q^2] by quadrature, the model-free constant in the identity above.
double score_second_moment(const GaussianMixture1D& q, const QuadratureSpec& spec);

struct SweepRow {
  double separation;
  double pi;
  double pi_prime;
  DivergenceEstimate j_pp_prime;  // J(p || p') with p' differing only in pi1
  DivergenceEstimate j_q_p;       // J(p1 || p), the isolated-component case
};

/// For every separation s and (pi, pi') pair: mixtures at mu = (-s/2, s/2)
/// with common `sigma`.  Rows are ordered by separation, then pair.
std::vector<SweepRow> blindness_sweep(std::span<const double> separations,
                                      std::span<const std::pair<double, double>> pi_pairs, double sigma,
                                      std::size_t nodes = QuadratureSpec::kDefaultNodes);

}  // namespace scorelab
