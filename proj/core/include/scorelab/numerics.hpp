#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scorelab {

/// Raised when a computation produces a NaN/Inf where finite values are required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using RealFn = std::function<double(double)>;

/// Closed interval [lower, upper] sampled on `nodes` equispaced points.
struct QuadratureSpec {
  double lower = -1.0;
  double upper = 1.0;
  std::size_t nodes = 4097;

  static constexpr std::size_t kMinNodes = 16;
  static constexpr std::size_t kDefaultNodes = 4097;
  static constexpr double kDefaultWindowSigmas = 12.0;

  QuadratureSpec() = default;
  QuadratureSpec(double lo, double hi, std::size_t n);

  double step() const { return (upper - lower) / static_cast<double>(nodes - 1); }
  double node(std::size_t i) const;
  std::vector<double> grid() const;

  /// Spec covering [min_lo, max_hi] widened to the union of both ranges.
  QuadratureSpec merged(const QuadratureSpec& other) const;
};

/// Composite Simpson over the grid of `spec`.  An odd number of panels is
/// closed with a 3/8 rule on the last three, so cubics stay exact for any
/// node count.
double quad_integrate(const RealFn& f, const QuadratureSpec& spec);

/// Same rule applied to values already tabulated on `spec.grid()`.
double quad_integrate_values(std::span<const double> values, const QuadratureSpec& spec);

/// Central difference (f(x+h) - f(x-h)) / 2h.
double finite_diff(const RealFn& f, double x, double h = 1e-4);

/// Reproducible random stream keyed by (seed, stream_id).
///
/// The engine state is derived from both keys through std::seed_seq, so any
/// experiment cell can own a stream without coordinating with its siblings.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double normal();
  double uniform();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Child stream with a deterministic id derived from this stream's id and `index`.
  RngStream split(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id);

/// Sample mean and standard error (sample std / sqrt(N)).
struct MeanWithError {
  double mean = 0.0;
  double std_error = 0.0;
};
MeanWithError mean_with_error(std::span<const double> values);

double log_sum_exp(std::span<const double> values);

// Thread fan-out used by the particle and kernel loops.  Work is split into
// contiguous index blocks and every index is processed exactly as it would be
// serially, so results never depend on the thread count.
void set_max_threads(unsigned n);
unsigned max_threads();
void parallel_for(std::size_t count, const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace scorelab
