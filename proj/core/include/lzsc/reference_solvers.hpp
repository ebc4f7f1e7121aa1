#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "lzsc/conv.hpp"
#include "lzsc/tensor.hpp"

namespace lzsc {

/// n x m dictionary; column j is atom j.
struct DenseDictionary {
  Eigen::MatrixXd atoms;

  std::size_t signal_size() const { return static_cast<std::size_t>(atoms.rows()); }
  std::size_t atom_count() const { return static_cast<std::size_t>(atoms.cols()); }
};

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> objective_trace;  // iterations + 1 entries, starting at z = 0
  std::vector<std::size_t> final_support;
};

struct DenseSolution {
  Eigen::VectorXd z;
  double objective = 0.0;
};

struct IterativeSolution {
  Eigen::VectorXd z;
  SolveReport report;
};

/// 0.5 * ||x - D z||^2 + lambda * ||z||_0
double l0_objective(const Eigen::VectorXd& x, const DenseDictionary& d, const Eigen::VectorXd& z, double lambda);

std::vector<std::size_t> support_of(const Eigen::VectorXd& z);

inline constexpr std::size_t kExhaustiveMaxAtoms = 20;
inline constexpr std::size_t kExhaustiveMaxSupport = 4;

/// Global minimiser of the l0 objective by enumerating every support of size
/// <= max_support and solving least squares on each.
DenseSolution exhaustive_l0(const Eigen::VectorXd& x, const DenseDictionary& d, double lambda,
                            std::size_t max_support);

/// Normalised iterative hard thresholding, z <- H_theta(z - mu D^T (D z - x))
/// from z = 0. The reported objective uses lambda = theta^2 / (2 mu), the
/// penalty whose proximal map at step mu is H_theta.
IterativeSolution nihta_dense(const Eigen::VectorXd& x, const DenseDictionary& d, double theta, double mu,
                              std::size_t iterations);

inline double nihta_lambda(double theta, double mu) { return theta * theta / (2.0 * mu); }

/// Largest squared singular value of D.
double spectral_norm_squared(const DenseDictionary& d);

/// Convolutional ISTA: z <- S_theta(z - W_u(W_d(z) - I)) from z = 0. The step
/// size is folded into W_u.
Tensor ista_conv(const Tensor& image, const ConvKernel& w_d, const ConvKernel& w_u, double theta,
                 std::size_t iterations);

/// Convolutional NIHTA: as ista_conv with hard thresholding.
Tensor nihta_conv(const Tensor& image, const ConvKernel& w_d, const ConvKernel& w_u, double theta,
                  std::size_t iterations);

/// Magnitude at or below which a code entry counts as zero in the l0 term.
inline constexpr double kL0ZeroTolerance = 1e-4;

/// 0.5 * ||I - D(z)||^2 + lambda * #{|z| > zero_tolerance}
double conv_l0_objective(const Tensor& image, const ConvKernel& dictionary, const Tensor& z, double lambda,
                         double zero_tolerance = kL0ZeroTolerance);

}  // namespace lzsc
