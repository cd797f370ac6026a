#include "scorelab/stein.hpp"

#include <algorithm>
#include <stdexcept>

namespace scorelab {

KernelSpec::KernelSpec(double bandwidth) : bandwidth_(bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("KernelSpec: bandwidth must be positive");
  }
  inv_h2_ = 1.0 / (bandwidth * bandwidth);
}

std::string to_string(FunctionClass fc) {
  return fc == FunctionClass::L2_q_weighted ? "L2_q_weighted" : "L2_unweighted";
}

std::vector<double> WitnessTable::normalized() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * norm_constant;
  return out;
}

namespace {

void finalize(WitnessTable& table, double squared_norm) {
  if (!(squared_norm > 0.0)) {
    table.zero_discrepancy = true;
    table.norm_constant = 1.0;
    return;
  }
  table.norm_constant = 1.0 / std::sqrt(squared_norm);
}

}  // namespace

WitnessTable witness_weighted(const GaussianMixture1D& q, const GaussianMixture1D& p, const QuadratureSpec& spec) {
  WitnessTable t;
  t.spec = spec;
  t.grid = spec.grid();
  t.function_class = FunctionClass::L2_q_weighted;
  t.values.resize(t.grid.size());
  std::vector<double> weighted(t.grid.size());
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const double x = t.grid[i];
    t.values[i] = p.score(x) - q.score(x);
    weighted[i] = q.pdf(x) * t.values[i] * t.values[i];
  }
  finalize(t, quad_integrate_values(weighted, spec));
  return t;
}

WitnessTable witness_unweighted(const GaussianMixture1D& q, const GaussianMixture1D& p,
                                const QuadratureSpec& spec) {
  WitnessTable t;
  t.spec = spec;
  t.grid = spec.grid();
  t.function_class = FunctionClass::L2_unweighted;
  t.values.resize(t.grid.size());
  std::vector<double> squared(t.grid.size());
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const double x = t.grid[i];
    t.values[i] = q.pdf(x) * p.score(x) - q.pdf_derivative(x);
    squared[i] = t.values[i] * t.values[i];
  }
  finalize(t, quad_integrate_values(squared, spec));
  return t;
}

DivergenceEstimate stein_discrepancy(const GaussianMixture1D& q, const GaussianMixture1D& p, FunctionClass fc,
                                     const QuadratureSpec& spec) {
  const WitnessTable t =
      fc == FunctionClass::L2_q_weighted ? witness_weighted(q, p, spec) : witness_unweighted(q, p, spec);
  if (t.zero_discrepancy) return DivergenceEstimate::from_quadrature(0.0, spec.nodes);
  // E_q[(s_p - s_q) f] with f the unit-norm witness
  std::vector<double> integrand(t.grid.size());
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const double x = t.grid[i];
    integrand[i] = q.pdf(x) * (p.score(x) - q.score(x)) * t.values[i] * t.norm_constant;
  }
  return DivergenceEstimate::from_quadrature(quad_integrate_values(integrand, spec), spec.nodes);
}

DivergenceEstimate stein_discrepancy(const GaussianMixture1D& q, const GaussianMixture1D& p, FunctionClass fc) {
  return stein_discrepancy(q, p, fc, default_window(q, p));
}

double stein_kernel(double x, double y, double score_x, double score_y, const KernelSpec& k) {
  const double d = x - y;
  const double ih2 = k.inv_h2();
  const double kv = std::exp(-0.5 * d * d * ih2);
  const double dk_dy = d * ih2 * kv;
  const double dk_dx = -dk_dy;
  const double dk_dxdy = (ih2 - d * d * ih2 * ih2) * kv;
  return score_x * score_y * kv + score_x * dk_dy + score_y * dk_dx + dk_dxdy;
}

DivergenceEstimate ksd_vstat(std::span<const double> samples, const GaussianMixture1D& p, const KernelSpec& k) {
  if (samples.empty()) throw std::invalid_argument("ksd_vstat: empty samples");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = p.score(xs[i]);

  std::vector<double> row_means(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += stein_kernel(xs[i], xs[j], scores[i], scores[j], k);
      row_means[i] = acc / static_cast<double>(n);
    }
  });
  const auto est = mean_with_error(row_means);
  double value = est.mean;
  if (value < 0.0 && value > -1e-12) value = 0.0;
  return DivergenceEstimate::from_monte_carlo(value, n, 2.0 * est.std_error);
}

}  // namespace scorelab
