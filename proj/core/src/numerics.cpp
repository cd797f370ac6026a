#include "scorelab/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace scorelab {

QuadratureSpec::QuadratureSpec(double lo, double hi, std::size_t n) : lower(lo), upper(hi), nodes(n) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw std::invalid_argument("QuadratureSpec: require finite lower < upper");
  }
  if (n < kMinNodes) {
    throw std::invalid_argument("QuadratureSpec: nodes must be >= " + std::to_string(kMinNodes));
  }
}

double QuadratureSpec::node(std::size_t i) const {
  if (i + 1 == nodes) return upper;
  return lower + static_cast<double>(i) * step();
}

std::vector<double> QuadratureSpec::grid() const {
  std::vector<double> xs(nodes);
  for (std::size_t i = 0; i < nodes; ++i) xs[i] = node(i);
  return xs;
}

QuadratureSpec QuadratureSpec::merged(const QuadratureSpec& other) const {
  return QuadratureSpec(std::min(lower, other.lower), std::max(upper, other.upper),
                        std::max(nodes, other.nodes));
}

double quad_integrate_values(std::span<const double> values, const QuadratureSpec& spec) {
  if (values.size() != spec.nodes) {
    throw std::invalid_argument("quad_integrate_values: value count does not match spec.nodes");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericalError("quad_integrate: non-finite integrand at node " + std::to_string(i) +
                           " (x = " + std::to_string(spec.node(i)) + ")");
    }
  }
  const double h = spec.step();
  const std::size_t panels = spec.nodes - 1;
  const std::size_t simpson_panels = (panels % 2 == 0) ? panels : panels - 3;

  double sum = 0.0;
  if (simpson_panels > 0) {
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i < simpson_panels; ++i) {
      if (i % 2 == 1) {
        odd += values[i];
      } else {
        even += values[i];
      }
    }
    sum = h / 3.0 * (values[0] + 4.0 * odd + 2.0 * even + values[simpson_panels]);
  }
  if (simpson_panels != panels) {
    const std::size_t k = simpson_panels;
    sum += 3.0 * h / 8.0 * (values[k] + 3.0 * values[k + 1] + 3.0 * values[k + 2] + values[k + 3]);
  }
  return sum;
}

double quad_integrate(const RealFn& f, const QuadratureSpec& spec) {
  std::vector<double> values(spec.nodes);
  for (std::size_t i = 0; i < spec.nodes; ++i) values[i] = f(spec.node(i));
  return quad_integrate_values(values, spec);
}

double finite_diff(const RealFn& f, double x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff: h must be positive");
  const double hi = f(x + h);
  const double lo = f(x - h);
  if (!std::isfinite(hi) || !std::isfinite(lo)) {
    throw NumericalError("finite_diff: non-finite evaluation near x = " + std::to_string(x));
  }
  return (hi - lo) / (2.0 * h);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                    0x5c0e1abu};
  return std::mt19937_64(seq);
}

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(seeded_engine(seed, stream_id)) {}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(seed_, mix64(stream_id_ ^ mix64(index + 1)));
}

RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id) { return RngStream(seed, stream_id); }

MeanWithError mean_with_error(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_with_error: empty input");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

namespace {
std::atomic<unsigned> g_max_threads{1};
}

void set_max_threads(unsigned n) { g_max_threads.store(n == 0 ? 1 : n); }

unsigned max_threads() { return g_max_threads.load(); }

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t threads = std::min<std::size_t>(max_threads(), count);
  if (threads <= 1) {
    if (count > 0) body(0, count);
    return;
  }
  const std::size_t block = (count + threads - 1) / threads;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * block;
    const std::size_t end = std::min(count, begin + block);
    if (begin >= end) break;
    workers.emplace_back([&, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  workers.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace scorelab
