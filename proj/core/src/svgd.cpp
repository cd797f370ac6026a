#include "scorelab/svgd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scorelab {

void ParticleEnsemble::check_finite() const {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!std::isfinite(positions[i])) {
      throw NumericalError("non-finite position at iteration " + std::to_string(iteration) + ", particle " +
                           std::to_string(i));
    }
  }
}

ParticleEnsemble gaussian_ensemble(std::size_t n, double mu0, double sigma0, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("gaussian_ensemble: n must be positive");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("gaussian_ensemble: sigma0 must be positive");
  ParticleEnsemble e;
  e.positions.resize(n);
  for (double& x : e.positions) x = mu0 + sigma0 * rng.normal();
  return e;
}

void SvgdConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("SvgdConfig: step_size must be positive");
  if (iterations == 0) throw std::invalid_argument("SvgdConfig: iterations must be positive");
  if (!(anneal_noise_std >= 0.0)) throw std::invalid_argument("SvgdConfig: anneal_noise_std must be nonnegative");
  if (!beta_schedule.empty()) {
    for (std::size_t i = 0; i < beta_schedule.size(); ++i) {
      const double b = beta_schedule[i];
      if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("SvgdConfig: beta values must lie in (0, 1]");
      if (i > 0 && b < beta_schedule[i - 1]) {
        throw std::invalid_argument("SvgdConfig: beta_schedule must be non-decreasing");
      }
    }
    if (beta_schedule.back() != 1.0) throw std::invalid_argument("SvgdConfig: beta_schedule must end at 1");
    if (beta_schedule.size() > iterations) {
      throw std::invalid_argument("SvgdConfig: more beta blocks than iterations");
    }
  }
}

std::vector<double> svgd_direction(std::span<const double> positions, std::span<const double> scores,
                                   const KernelSpec& k) {
  const std::size_t n = positions.size();
  if (n == 0) throw std::invalid_argument("svgd_direction: empty ensemble");
  if (scores.size() != n) throw std::invalid_argument("svgd_direction: score count mismatch");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
  std::vector<double> src_x(n), src_s(n);
  for (std::size_t i = 0; i < n; ++i) {
    src_x[i] = positions[order[i]];
    src_s[i] = scores[order[i]];
  }

  const double inv_h2 = k.inv_h2();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const double xt = positions[t];
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = xt - src_x[j];
        const double kv = std::exp(-0.5 * d * d * inv_h2);
        acc += src_s[j] * kv + d * inv_h2 * kv;
      }
      out[t] = acc * inv_n;
    }
  });
  return out;
}

std::vector<double> svgd_direction(const ParticleEnsemble& e, const GaussianMixture1D& p, const KernelSpec& k) {
  std::vector<double> scores(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) scores[i] = p.score(e.positions[i]);
  return svgd_direction(e.positions, scores, k);
}

double median_bandwidth(std::span<const double> positions) {
  const std::size_t n = positions.size();
  if (n < 2) return 1.0;
  std::vector<double> sq;
  sq.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = positions[i] - positions[j];
      sq.push_back(d * d);
    }
  }
  const auto mid = sq.begin() + static_cast<std::ptrdiff_t>(sq.size() / 2);
  std::nth_element(sq.begin(), mid, sq.end());
  const double h2 = 0.5 * *mid / std::log(static_cast<double>(n) + 1.0);
  return h2 > 1e-12 ? std::sqrt(h2) : 1.0;
}

SvgdResult svgd_run(const ParticleEnsemble& init, const GaussianMixture1D& p, const SvgdConfig& cfg,
                    RngStream& rng) {
  cfg.validate();
  if (init.size() == 0) throw std::invalid_argument("svgd_run: empty ensemble");
  init.check_finite();

  SvgdResult result;
  ParticleEnsemble e = init;
  result.snapshots.push_back(e);

  const std::size_t blocks = cfg.beta_schedule.empty() ? 1 : cfg.beta_schedule.size();
  const std::size_t block_len = (cfg.iterations + blocks - 1) / blocks;
  std::vector<double> scores(e.size());

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    double beta = 1.0;
    if (!cfg.beta_schedule.empty()) beta = cfg.beta_schedule[std::min(it / block_len, blocks - 1)];
    const double eps = (beta < 1.0 && cfg.rescale_step_by_beta) ? cfg.step_size / beta : cfg.step_size;

    for (std::size_t i = 0; i < e.size(); ++i) {
      scores[i] = beta == 1.0 ? p.score(e.positions[i]) : temper_score(p, beta, e.positions[i]);
    }
    const KernelSpec kernel = cfg.median_heuristic ? KernelSpec(median_bandwidth(e.positions)) : cfg.kernel;
    const auto phi = svgd_direction(e.positions, scores, kernel);
    for (std::size_t i = 0; i < e.size(); ++i) e.positions[i] = e.positions[i] + eps * phi[i];
    if (beta < 1.0 && cfg.anneal_noise_std > 0.0) {
      for (double& x : e.positions) x += cfg.anneal_noise_std * rng.normal();
    }
    e.iteration = it + 1;
    e.check_finite();
    if (cfg.snapshot_every > 0 && e.iteration % cfg.snapshot_every == 0 && e.iteration != cfg.iterations) {
      result.snapshots.push_back(e);
    }
  }
  result.snapshots.push_back(e);
  result.final_ensemble = std::move(e);
  return result;
}

double mode_fraction(std::span<const double> positions, double threshold) {
  if (positions.empty()) throw std::invalid_argument("mode_fraction: empty ensemble");
  std::size_t below = 0;
  for (double x : positions) below += (x <= threshold) ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(positions.size());
}

double mode_fraction(const ParticleEnsemble& e, double threshold) { return mode_fraction(e.positions, threshold); }

}  // namespace scorelab
