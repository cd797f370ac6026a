#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "scorelab/mixture.hpp"
#include "scorelab/numerics.hpp"
#include "scorelab/svgd.hpp"

namespace scorelab {

/// Noise levels in annealing order (largest first) plus the per-level budget.
///
/// The step at level j is base_step * sigma_j^2 / sigma_min^2, so base_step
/// is the step used at the final, smallest level.
class NoiseSchedule {
 public:
  NoiseSchedule(std::vector<double> sigmas, std::size_t steps_per_level, double base_step);

  /// `levels` geometrically spaced values from sigma_max down to sigma_min.
  static NoiseSchedule geometric(double sigma_max, double sigma_min, std::size_t levels,
                                 std::size_t steps_per_level, double base_step);

  const std::vector<double>& sigmas() const { return sigmas_; }
  std::size_t levels() const { return sigmas_.size(); }
  std::size_t steps_per_level() const { return steps_per_level_; }
  double base_step() const { return base_step_; }
  double step_size(std::size_t level) const;

 private:
  std::vector<double> sigmas_;
  std::size_t steps_per_level_;
  double base_step_;
};

/// Unadjusted Langevin update x + (eps/2) s + sqrt(eps) eta, eta ~ N(0, 1).
double langevin_step(double x, double score_value, double eps, RngStream& rng);

/// Exact score of the target convolved with N(0, sigma_j^2).
double noisy_score(const GaussianMixture1D& target, double sigma_j, double x);

struct LangevinTracePoint {
  std::size_t level;
  double sigma;
  std::size_t step;  // steps completed within the level, 1-based
  double mode_fraction;
};

struct LangevinOptions {
  /// Starting positions; default draws target.mean() + sigma_max * eta per particle.
  std::optional<std::vector<double>> init;
  /// Mode-fraction threshold; NaN means the midpoint of the extreme component means.
  double threshold = std::numeric_limits<double>::quiet_NaN();
  /// Record the mode fraction every this many steps and at the end of each level.
  std::size_t record_every = 0;
};

struct LangevinResult {
  ParticleEnsemble ensemble;
  std::vector<LangevinTracePoint> trace;
};

/// Runs each level's Langevin chain for every particle.  Particle i draws
/// from rng.split(i), so the output does not depend on the thread count.
LangevinResult annealed_langevin_run(std::size_t n_particles, const GaussianMixture1D& target,
                                     const NoiseSchedule& sched, const RngStream& rng,
                                     const LangevinOptions& options);
ParticleEnsemble annealed_langevin_run(std::size_t n_particles, const GaussianMixture1D& target,
                                       const NoiseSchedule& sched, const RngStream& rng);

/// Midpoint between the smallest and largest component means.
double mixture_midpoint(const GaussianMixture1D& m);

}  // namespace scorelab
