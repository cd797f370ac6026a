#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "scorelab/mixture.hpp"
#include "scorelab/numerics.hpp"
#include "scorelab/scorematch.hpp"

namespace scorelab {

/// Gaussian RBF kernel k(x, y) = exp(-(x - y)^2 / (2 h^2)).
class KernelSpec {
 public:
  explicit KernelSpec(double bandwidth = 1.0);

  double bandwidth() const { return bandwidth_; }
  double operator()(double x, double y) const {
    const double d = x - y;
    return std::exp(-0.5 * d * d * inv_h2_);
  }
  /// d/dy k(x, y) = (x - y) / h^2 k(x, y).
  double grad_second(double x, double y) const { return (x - y) * inv_h2_ * (*this)(x, y); }
  double inv_h2() const { return inv_h2_; }

 private:
  double bandwidth_;
  double inv_h2_;
};

enum class FunctionClass { L2_q_weighted, L2_unweighted };

std::string to_string(FunctionClass fc);

/// Optimal Stein witness tabulated on a quadrature grid.
///
/// `values` holds f before normalisation; values[i] * norm_constant is the
/// unit-norm witness (in L2(q) or L2 depending on the class).  When the Stein
/// residual vanishes identically the table is flagged and norm_constant is 1.
struct WitnessTable {
  QuadratureSpec spec;
  std::vector<double> grid;
  std::vector<double> values;
  double norm_constant = 1.0;
  FunctionClass function_class = FunctionClass::L2_q_weighted;
  bool zero_discrepancy = false;

  std::vector<double> normalized() const;
};

/// f proportional to s_p - s_q, normalised so that int q f^2 = 1.
WitnessTable witness_weighted(const GaussianMixture1D& q, const GaussianMixture1D& p, const QuadratureSpec& spec);

/// f proportional to q s_p - q', normalised so that int f^2 = 1.
WitnessTable witness_unweighted(const GaussianMixture1D& q, const GaussianMixture1D& p,
                                const QuadratureSpec& spec);

/// sup over the unit ball of `fc` of E_q[(s_p - s_q) f], evaluated at the
/// closed-form witness.  For L2_q_weighted this equals sqrt(J(q||p)).
DivergenceEstimate stein_discrepancy(const GaussianMixture1D& q, const GaussianMixture1D& p, FunctionClass fc,
                                     const QuadratureSpec& spec);
DivergenceEstimate stein_discrepancy(const GaussianMixture1D& q, const GaussianMixture1D& p, FunctionClass fc);

/// Stein kernel u_p(x, y) for the Gaussian RBF kernel.
double stein_kernel(double x, double y, double score_x, double score_y, const KernelSpec& k);

/// Kernel Stein discrepancy V-statistic (1/N^2) sum_ij u_p(x_i, x_j).
///
/// Samples are sorted before summation so the result is bit-identical under
/// any permutation of the input.  std_error is the asymptotic
/// 2 sd(row means) / sqrt(N).
DivergenceEstimate ksd_vstat(std::span<const double> samples, const GaussianMixture1D& p, const KernelSpec& k);

}  // namespace scorelab
