#include "scorelab/langevin.hpp"

#include <cmath>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>

namespace scorelab {

NoiseSchedule::NoiseSchedule(std::vector<double> sigmas, std::size_t steps_per_level, double base_step)
    : sigmas_(std::move(sigmas)), steps_per_level_(steps_per_level), base_step_(base_step) {
  if (sigmas_.empty()) throw std::invalid_argument("NoiseSchedule: need at least one level");
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > 0.0) || !std::isfinite(sigmas_[i])) {
      throw std::invalid_argument("NoiseSchedule: sigmas must be positive");
    }
    if (i > 0 && !(sigmas_[i] < sigmas_[i - 1])) {
      throw std::invalid_argument("NoiseSchedule: sigmas must be strictly decreasing");
    }
  }
  if (steps_per_level_ == 0) throw std::invalid_argument("NoiseSchedule: steps_per_level must be positive");
  if (!(base_step_ > 0.0)) throw std::invalid_argument("NoiseSchedule: base_step must be positive");
}

NoiseSchedule NoiseSchedule::geometric(double sigma_max, double sigma_min, std::size_t levels,
                                       std::size_t steps_per_level, double base_step) {
  if (levels == 0) throw std::invalid_argument("NoiseSchedule::geometric: levels must be positive");
  if (!(sigma_max > 0.0 && sigma_min > 0.0)) {
    throw std::invalid_argument("NoiseSchedule::geometric: sigmas must be positive");
  }
  if (levels == 1) return NoiseSchedule({sigma_min}, steps_per_level, base_step);
  std::vector<double> sigmas(levels);
  const double ratio = std::log(sigma_min / sigma_max) / static_cast<double>(levels - 1);
  for (std::size_t j = 0; j < levels; ++j) sigmas[j] = sigma_max * std::exp(ratio * static_cast<double>(j));
  sigmas.front() = sigma_max;
  sigmas.back() = sigma_min;
  return NoiseSchedule(std::move(sigmas), steps_per_level, base_step);
}

double NoiseSchedule::step_size(std::size_t level) const {
  const double smallest = sigmas_.back();
  const double s = sigmas_.at(level);
  return base_step_ * (s * s) / (smallest * smallest);
}

double langevin_step(double x, double score_value, double eps, RngStream& rng) {
  if (!(eps > 0.0)) throw std::invalid_argument("langevin_step: eps must be positive");
  return x + 0.5 * eps * score_value + std::sqrt(eps) * rng.normal();
}

double noisy_score(const GaussianMixture1D& target, double sigma_j, double x) {
  return smooth(target, sigma_j).score(x);
}

double mixture_midpoint(const GaussianMixture1D& m) { return 0.5 * (m.min_mean() + m.max_mean()); }

LangevinResult annealed_langevin_run(std::size_t n_particles, const GaussianMixture1D& target,
                                     const NoiseSchedule& sched, const RngStream& rng,
                                     const LangevinOptions& options) {
  if (n_particles == 0) throw std::invalid_argument("annealed_langevin_run: n_particles must be positive");
  if (options.init && options.init->size() != n_particles) {
    throw std::invalid_argument("annealed_langevin_run: init size does not match n_particles");
  }
  const double threshold = std::isnan(options.threshold) ? mixture_midpoint(target) : options.threshold;

  std::vector<GaussianMixture1D> levels;
  std::vector<double> steps;
  levels.reserve(sched.levels());
  for (std::size_t j = 0; j < sched.levels(); ++j) {
    levels.push_back(smooth(target, sched.sigmas()[j]));
    steps.push_back(sched.step_size(j));
  }

  // Checkpoint (level, step) pairs where the mode fraction is recorded.
  const std::size_t per_level = sched.steps_per_level();
  std::vector<LangevinTracePoint> trace;
  std::vector<std::size_t> checkpoint_of_step(per_level + 1, SIZE_MAX);
  {
    std::size_t c = 0;
    for (std::size_t s = 1; s <= per_level; ++s) {
      if ((options.record_every > 0 && s % options.record_every == 0) || s == per_level) checkpoint_of_step[s] = c++;
    }
    for (std::size_t j = 0; j < sched.levels(); ++j) {
      for (std::size_t s = 1; s <= per_level; ++s) {
        if (checkpoint_of_step[s] != SIZE_MAX) trace.push_back({j, sched.sigmas()[j], s, 0.0});
      }
    }
  }
  const std::size_t checkpoints_per_level = trace.size() / sched.levels();
  std::vector<std::uint8_t> below(trace.size() * n_particles, 0);

  std::vector<double> positions(n_particles);
  const double init_scale = sched.sigmas().front();
  const double init_center = target.mean();

  parallel_for(n_particles, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream stream = rng.split(i);
      double x = options.init ? (*options.init)[i] : init_center + init_scale * stream.normal();
      for (std::size_t j = 0; j < levels.size(); ++j) {
        const GaussianMixture1D& level = levels[j];
        const double eps = steps[j];
        for (std::size_t s = 1; s <= per_level; ++s) {
          x = langevin_step(x, level.score(x), eps, stream);
          if (!std::isfinite(x)) {
            throw NumericalError("annealed_langevin_run: non-finite particle " + std::to_string(i) + " at level " +
                                 std::to_string(j) + ", step " + std::to_string(s));
          }
          const std::size_t c = checkpoint_of_step[s];
          if (c != SIZE_MAX) below[(j * checkpoints_per_level + c) * n_particles + i] = x <= threshold ? 1 : 0;
        }
      }
      positions[i] = x;
    }
  });

  for (std::size_t c = 0; c < trace.size(); ++c) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_particles; ++i) count += below[c * n_particles + i];
    trace[c].mode_fraction = static_cast<double>(count) / static_cast<double>(n_particles);
  }

  LangevinResult result;
  result.ensemble.positions = std::move(positions);
  result.ensemble.iteration = sched.levels() * per_level;
  result.trace = std::move(trace);
  return result;
}

ParticleEnsemble annealed_langevin_run(std::size_t n_particles, const GaussianMixture1D& target,
                                       const NoiseSchedule& sched, const RngStream& rng) {
  return annealed_langevin_run(n_particles, target, sched, rng, LangevinOptions{}).ensemble;
}

}  // namespace scorelab
