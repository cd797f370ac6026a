#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "scorelab/langevin.hpp"

using namespace scorelab;

namespace {

NoiseSchedule default_schedule() { return NoiseSchedule::geometric(8.0, 0.5, 8, 200, 0.01); }

std::pair<double, double> mean_var(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, ss / v.size()};
}

}  // namespace

TEST_CASE("NoiseSchedule validation and step sizes") {
  CHECK_THROWS(NoiseSchedule({1.0, 1.0}, 10, 0.1));
  CHECK_THROWS(NoiseSchedule({1.0, 2.0}, 10, 0.1));
  CHECK_THROWS(NoiseSchedule({1.0, -0.5}, 10, 0.1));
  CHECK_THROWS(NoiseSchedule({}, 10, 0.1));
  CHECK_THROWS(NoiseSchedule({1.0}, 0, 0.1));
  CHECK_THROWS(NoiseSchedule({1.0}, 10, 0.0));
  const auto s = default_schedule();
  REQUIRE(s.levels() == 8);
  CHECK(s.sigmas().front() == 8.0);
  CHECK(s.sigmas().back() == 0.5);
  CHECK(s.sigmas()[1] / s.sigmas()[0] == doctest::Approx(s.sigmas()[7] / s.sigmas()[6]));
  CHECK(s.step_size(7) == 0.01);
  CHECK(s.step_size(0) == doctest::Approx(0.01 * 256.0));
}

TEST_CASE("langevin_step") {
  auto a = make_stream(70, 0), b = make_stream(70, 0);
  CHECK(langevin_step(0.0, 0.0, 0.1, a) == langevin_step(0.0, 0.0, 0.1, b));
  auto c = make_stream(70, 1), d = make_stream(70, 1);
  CHECK(langevin_step(1.0, 2.0, 0.04, c) == 1.0 + 0.04 + 0.2 * d.normal());
  CHECK_THROWS_AS(langevin_step(0.0, 0.0, 0.0, a), std::invalid_argument);
}

TEST_CASE("unadjusted Langevin is nearly stationary for N(0, 1)") {
  const auto target = GaussianMixture1D::gaussian(0.0, 1.0);
  // A single tiny level leaves smooth() essentially the identity.
  const NoiseSchedule sched({1e-8}, 5000, 0.01);
  const auto e = annealed_langevin_run(10000, target, sched, make_stream(71, 0));
  const auto [m, v] = mean_var(e.positions);
  CHECK(std::abs(m) < 0.05);
  CHECK(std::abs(v - 1.0) < 0.05);
}

TEST_CASE("noisy_score examples") {
  const auto m = GaussianMixture1D::two_component(0.3, -5.0, 4.0, 1.0);
  const double heavy = noisy_score(m, 100.0, 0.0);
  const double merged = -(0.0 - m.mean()) / (100.0 * 100.0);
  CHECK(std::abs(heavy - merged) < 0.05 * std::abs(merged));
  for (double x = -8.0; x <= 8.0; x += 0.25) CHECK(std::abs(noisy_score(m, 0.01, x) - m.score(x)) < 1e-3);
  const auto sym = GaussianMixture1D::two_component(0.5, -3.0, 3.0, 1.0);
  CHECK(std::abs(noisy_score(sym, 2.0, 0.0)) < 1e-15);
}

TEST_CASE("noisy_score matches finite differences of the smoothed log density") {
  const auto m = GaussianMixture1D::two_component(0.2, -4.0, 4.0, 1.0);
  for (double sj : {0.5, 2.0, 8.0}) {
    // Reference smoothed mixture built directly from the component variances.
    const GaussianMixture1D ref({0.2, 0.8}, {-4.0, 4.0}, {std::sqrt(1.0 + sj * sj), std::sqrt(1.0 + sj * sj)});
    const auto r = oracle::of(ref);
    for (double x = -8.0; x <= 8.0; x += 0.5) {
      const double fd = finite_diff([&](double t) { return std::log(oracle::pdf(r, t)); }, x);
      CHECK(std::abs(noisy_score(m, sj, x) - fd) < 1e-6);
    }
  }
}

TEST_CASE("annealed Langevin is deterministic and thread-count independent") {
  const auto target = GaussianMixture1D::two_component(0.3, -4.0, 4.0, 1.0);
  const auto sched = NoiseSchedule::geometric(8.0, 0.5, 4, 50, 0.01);
  set_max_threads(1);
  const auto a = annealed_langevin_run(500, target, sched, make_stream(72, 0));
  const auto b = annealed_langevin_run(500, target, sched, make_stream(72, 0));
  set_max_threads(4);
  const auto c = annealed_langevin_run(500, target, sched, make_stream(72, 0));
  set_max_threads(1);
  CHECK(a.positions == b.positions);
  CHECK(a.positions == c.positions);
  const auto d = annealed_langevin_run(500, target, sched, make_stream(72, 1));
  CHECK(a.positions != d.positions);
}

TEST_CASE("annealed Langevin recovers the mixing proportion") {
  for (double pi1 : {0.1, 0.3, 0.5}) {
    const auto target = GaussianMixture1D::two_component(pi1, -4.0, 4.0, 1.0);
    const auto e = annealed_langevin_run(5000, target, default_schedule(), make_stream(73, 0));
    CHECK(std::abs(mode_fraction(e, 0.0) - pi1) < 0.05);
  }
}

TEST_CASE("plain Langevin from the left mode does not cross") {
  const auto target = GaussianMixture1D::two_component(0.1, -4.0, 4.0, 1.0);
  const NoiseSchedule sched({0.01}, 1600, 0.01);
  LangevinOptions opts;
  opts.init = std::vector<double>(5000, -4.0);
  const auto res = annealed_langevin_run(5000, target, sched, make_stream(74, 0), opts);
  CHECK(mode_fraction(res.ensemble, 0.0) > 0.99);
}

TEST_CASE("annealed Langevin on a single Gaussian") {
  const auto target = GaussianMixture1D::gaussian(2.0, 1.5);
  const auto e = annealed_langevin_run(5000, target, NoiseSchedule::geometric(4.0, 0.1, 4, 500, 0.01),
                                       make_stream(75, 0));
  const auto [m, v] = mean_var(e.positions);
  const double var = 1.5 * 1.5 + 0.01;
  CHECK(std::abs(m - 2.0) < 4.0 * std::sqrt(var / 5000.0) + 0.02);
  CHECK(std::abs(v - var) < 0.1 * var);
}

TEST_CASE("trace records checkpoints per level") {
  const auto target = GaussianMixture1D::two_component(0.5, -4.0, 4.0, 1.0);
  const auto sched = NoiseSchedule::geometric(4.0, 1.0, 3, 10, 0.01);
  LangevinOptions opts;
  opts.record_every = 4;
  const auto res = annealed_langevin_run(20, target, sched, make_stream(76, 0), opts);
  REQUIRE(res.trace.size() == 9);
  CHECK(res.trace[0].step == 4);
  CHECK(res.trace[2].step == 10);
  CHECK(res.trace[3].level == 1);
  CHECK(res.trace[8].sigma == 1.0);
  CHECK(res.trace.back().mode_fraction == mode_fraction(res.ensemble, 0.0));
  CHECK(mixture_midpoint(target) == 0.0);
}

TEST_CASE("divergent chains report particle, level and step") {
  const auto target = GaussianMixture1D::gaussian(0.0, 1e-3);
  const NoiseSchedule sched({1e-6}, 100, 100.0);
  try {
    annealed_langevin_run(3, target, sched, make_stream(77, 0));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("level") != std::string::npos);
    CHECK(msg.find("step") != std::string::npos);
  }
}
