#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scorelab/mixture.hpp"
#include "scorelab/numerics.hpp"
#include "scorelab/stein.hpp"

namespace scorelab {

/// Particle positions plus the iteration that produced them.
struct ParticleEnsemble {
  std::vector<double> positions;
  std::size_t iteration = 0;

  std::size_t size() const { return positions.size(); }
  /// Throws NumericalError naming the first non-finite particle.
  void check_finite() const;
};

/// N i.i.d. draws from N(mu0, sigma0^2).
ParticleEnsemble gaussian_ensemble(std::size_t n, double mu0, double sigma0, RngStream& rng);

struct SvgdConfig {
  KernelSpec kernel{1.0};
  double step_size = 0.1;
  std::size_t iterations = 2000;
  /// Re-select the bandwidth every iteration from the median pairwise distance.
  bool median_heuristic = false;
  /// Keep every `snapshot_every`-th iteration (0 keeps only initial and final).
  std::size_t snapshot_every = 0;

  // Experimental tempered mode.  Iterations are split into equal blocks, one
  // per beta; block l follows beta_l * score(p, x).
  std::vector<double> beta_schedule;
  bool rescale_step_by_beta = true;  // eps_l = eps / beta_l
  double anneal_noise_std = 0.0;     // N(0, std^2) jitter per step while beta < 1

  void validate() const;
};

/// phi(x') = (1/N) sum_n [s_n k(x', x_n) + d/dx_n k(x', x_n)] for every particle x'.
///
/// Sources are summed in sorted-position order, which makes the result
/// permutation-equivariant bit for bit.
std::vector<double> svgd_direction(std::span<const double> positions, std::span<const double> scores,
                                   const KernelSpec& k);
std::vector<double> svgd_direction(const ParticleEnsemble& e, const GaussianMixture1D& p, const KernelSpec& k);

/// sqrt(median(d^2) / (2 log(N + 1))); falls back to 1 for degenerate ensembles.
double median_bandwidth(std::span<const double> positions);

struct SvgdResult {
  ParticleEnsemble final_ensemble;
  std::vector<ParticleEnsemble> snapshots;  // initial first, final last
};

SvgdResult svgd_run(const ParticleEnsemble& init, const GaussianMixture1D& p, const SvgdConfig& cfg,
                    RngStream& rng);

/// Fraction of positions at or below `threshold`.
double mode_fraction(std::span<const double> positions, double threshold);
double mode_fraction(const ParticleEnsemble& e, double threshold);

}  // namespace scorelab
