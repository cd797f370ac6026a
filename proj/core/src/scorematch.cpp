#include "scorelab/scorematch.hpp"

#include <cmath>
#include <stdexcept>

namespace scorelab {

std::string to_string(EstimateMethod method) {
  return method == EstimateMethod::quadrature ? "quadrature" : "monte_carlo";
}

namespace {

double clamp_rounding(double value) {
  if (!std::isfinite(value)) throw NumericalError("divergence estimate is not finite");
  if (value < 0.0) {
    if (value < -1e-12) throw NumericalError("divergence estimate is negative beyond rounding");
    return 0.0;
  }
  return value;
}

}  // namespace

DivergenceEstimate::DivergenceEstimate(double value, EstimateMethod method, std::size_t resolution,
                                       std::optional<double> se)
    : value_(clamp_rounding(value)), method_(method), resolution_(resolution), std_error_(se) {}

DivergenceEstimate DivergenceEstimate::from_quadrature(double value, std::size_t nodes) {
  return DivergenceEstimate(value, EstimateMethod::quadrature, nodes, std::nullopt);
}

DivergenceEstimate DivergenceEstimate::from_monte_carlo(double value, std::size_t samples, double std_error) {
  if (!(std_error >= 0.0)) throw std::invalid_argument("DivergenceEstimate: std_error must be nonnegative");
  return DivergenceEstimate(value, EstimateMethod::monte_carlo, samples, std_error);
}

DivergenceEstimate fisher_divergence(const GaussianMixture1D& q, const GaussianMixture1D& p,
                                     const QuadratureSpec& spec) {
  const double outside = q.mass_outside(spec.lower, spec.upper);
  if (outside > kMaxMassOutsideWindow) {
    throw std::invalid_argument("fisher_divergence: window too narrow, q mass outside = " + std::to_string(outside));
  }
  const double j = quad_integrate(
      [&](double x) {
        const double d = q.score(x) - p.score(x);
        return q.pdf(x) * d * d;
      },
      spec);
  return DivergenceEstimate::from_quadrature(j, spec.nodes);
}

DivergenceEstimate fisher_divergence(const GaussianMixture1D& q, const GaussianMixture1D& p) {
  return fisher_divergence(q, p, default_window(q, p));
}

DivergenceEstimate fisher_divergence_mc(std::span<const double> q_samples, const GaussianMixture1D& q,
                                        const GaussianMixture1D& p) {
  if (q_samples.empty()) throw std::invalid_argument("fisher_divergence_mc: empty sample set");
  std::vector<double> terms(q_samples.size());
  for (std::size_t i = 0; i < q_samples.size(); ++i) {
    const double d = q.score(q_samples[i]) - p.score(q_samples[i]);
    terms[i] = d * d;
  }
  const auto est = mean_with_error(terms);
  return DivergenceEstimate::from_monte_carlo(est.mean, q_samples.size(), est.std_error);
}

double sm_objective_empirical(std::span<const double> samples, const GaussianMixture1D& p) {
  if (samples.empty()) throw std::invalid_argument("sm_objective_empirical: empty samples");
  double acc = 0.0;
  for (double x : samples) {
    const double s = p.score(x);
    acc += 0.5 * s * s + p.score_derivative(x);
  }
  return acc / static_cast<double>(samples.size());
}

double score_second_moment(const GaussianMixture1D& q, const QuadratureSpec& spec) {
  return quad_integrate(
      [&](double x) {
        const double s = q.score(x);
        return q.pdf(x) * s * s;
      },
      spec);
}

std::vector<SweepRow> blindness_sweep(std::span<const double> separations,
                                      std::span<const std::pair<double, double>> pi_pairs, double sigma,
                                      std::size_t nodes) {
  if (!(sigma > 0.0)) throw std::invalid_argument("blindness_sweep: sigma must be positive");
  for (std::size_t i = 0; i < separations.size(); ++i) {
    if (!(separations[i] > 0.0)) throw std::invalid_argument("blindness_sweep: separations must be positive");
    if (i > 0 && !(separations[i] > separations[i - 1])) {
      throw std::invalid_argument("blindness_sweep: separations must be increasing");
    }
  }
  for (const auto& [pi, pi_prime] : pi_pairs) {
    if (!(pi > 0.0 && pi < 1.0) || !(pi_prime > 0.0 && pi_prime < 1.0)) {
      throw std::invalid_argument("blindness_sweep: mixing proportions must lie in (0, 1)");
    }
  }

  std::vector<SweepRow> rows;
  rows.reserve(separations.size() * pi_pairs.size());
  for (double s : separations) {
    const double mu1 = -0.5 * s;
    const double mu2 = 0.5 * s;
    const auto q = GaussianMixture1D::gaussian(mu1, sigma);
    for (const auto& [pi, pi_prime] : pi_pairs) {
      const auto p = GaussianMixture1D::two_component(pi, mu1, mu2, sigma);
      const auto p_prime = GaussianMixture1D::two_component(pi_prime, mu1, mu2, sigma);
      const auto window = default_window(p, p_prime, nodes);
      rows.push_back(SweepRow{s, pi, pi_prime, fisher_divergence(p, p_prime, window), fisher_divergence(q, p, window)});
    }
  }
  return rows;
}

}  // namespace scorelab
