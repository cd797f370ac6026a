#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "scorelab/numerics.hpp"

using namespace scorelab;

TEST_CASE("quad_integrate: constant, odd and normal-density integrands") {
  CHECK(quad_integrate([](double) { return 1.0; }, QuadratureSpec(0.0, 1.0, 64)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(quad_integrate([](double x) { return x; }, QuadratureSpec(-1.0, 1.0, 64))) < 1e-15);

  const double exact = std::erf(10.0 / std::numbers::sqrt2);
  const double got = quad_integrate([](double x) { return oracle::normal_pdf(x, 0.0, 1.0); },
                                    QuadratureSpec(-10.0, 10.0, 2048));
  CHECK(std::abs(got - exact) < 1e-10);
}

TEST_CASE("quad_integrate: cubics are exact for odd and even node counts") {
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (std::size_t nodes : {16u, 17u, 64u, 65u, 101u, 4097u}) {
    for (int trial = 0; trial < 10; ++trial) {
      const double a = coef(eng), b = coef(eng), c = coef(eng), d = coef(eng);
      double lo = coef(eng), hi = coef(eng);
      if (lo > hi) std::swap(lo, hi);
      if (hi - lo < 0.1) hi = lo + 0.1;
      auto cubic = [&](double x) { return ((a * x + b) * x + c) * x + d; };
      auto prim = [&](double x) { return ((a / 4 * x + b / 3) * x + c / 2) * x * x + d * x; };
      const double exact = prim(hi) - prim(lo);
      const double got = quad_integrate(cubic, QuadratureSpec(lo, hi, nodes));
      CHECK(std::abs(got - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("quad_integrate: non-finite integrand names the node") {
  const QuadratureSpec spec(-1.0, 1.0, 17);
  try {
    quad_integrate([](double x) { return x > 0.5 ? NAN : 1.0; }, spec);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("node 13") != std::string::npos);
  }
}

TEST_CASE("QuadratureSpec validation") {
  CHECK_THROWS_AS(QuadratureSpec(1.0, 1.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(QuadratureSpec(0.0, 1.0, 15), std::invalid_argument);
  const QuadratureSpec s(-2.0, 3.0, 101);
  CHECK(s.node(0) == -2.0);
  CHECK(s.node(100) == 3.0);
  const auto m = s.merged(QuadratureSpec(-5.0, 1.0, 33));
  CHECK(m.lower == -5.0);
  CHECK(m.upper == 3.0);
  CHECK(m.nodes == 101);
}

TEST_CASE("finite_diff examples") {
  CHECK(std::abs(finite_diff([](double x) { return x * x; }, 3.0, 1e-4) - 6.0) < 1e-7);
  CHECK(finite_diff([](double) { return 2.5; }, -7.0) == 0.0);
  const double got = finite_diff([](double x) { return std::log(oracle::normal_pdf(x, 0.0, 1.0)); }, 1.0, 1e-4);
  CHECK(std::abs(got + 1.0) < 1e-7);
  CHECK_THROWS_AS(finite_diff([](double x) { return x; }, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(finite_diff([](double x) { return std::log(x); }, 0.0), NumericalError);
}

TEST_CASE("finite_diff of affine functions recovers the slope") {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(eng), b = u(eng), x = u(eng);
    CHECK(std::abs(finite_diff([&](double t) { return a * t + b; }, x) - a) < 1e-9);
  }
}

TEST_CASE("RngStream determinism and independence") {
  auto a = make_stream(42, 0), b = make_stream(42, 0), c = make_stream(42, 1);
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    any_diff = any_diff || (x != c.normal());
  }
  CHECK(any_diff);

  auto s1 = make_stream(3, 9).split(5), s2 = make_stream(3, 9).split(5), s3 = make_stream(3, 9).split(6);
  CHECK(s1.stream_id() == s2.stream_id());
  CHECK(s1.stream_id() != s3.stream_id());
  CHECK(s1.uniform() == s2.uniform());
}

TEST_CASE("RngStream normal draws are centred") {
  auto rng = make_stream(2024, 0);
  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) sum += rng.normal();
  CHECK(std::abs(sum / n) < 0.005);
}

TEST_CASE("RngStream::below stays in range") {
  auto rng = make_stream(1, 1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK_THROWS(rng.below(0));
}

TEST_CASE("mean_with_error and log_sum_exp") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto e = mean_with_error(v);
  CHECK(e.mean == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  const std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("parallel_for covers every index once and rethrows worker errors") {
  for (unsigned threads : {1u, 3u, 8u}) {
    set_max_threads(threads);
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1001);
    CHECK(*std::min_element(hits.begin(), hits.end()) == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t, std::size_t) { throw std::runtime_error("boom"); }),
                    std::runtime_error);
  }
  set_max_threads(1);
}
