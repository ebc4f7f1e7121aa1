#include "lzsc/reference_solvers.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "lzsc/error.hpp"
#include "lzsc/thresholding.hpp"

namespace lzsc {

double l0_objective(const Eigen::VectorXd& x, const DenseDictionary& d, const Eigen::VectorXd& z, double lambda) {
  const Eigen::VectorXd r = x - d.atoms * z;
  const auto nnz = static_cast<double>((z.array() != 0.0).count());
  return 0.5 * r.squaredNorm() + lambda * nnz;
}

std::vector<std::size_t> support_of(const Eigen::VectorXd& z) {
  std::vector<std::size_t> s;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z[i] != 0.0) s.push_back(static_cast<std::size_t>(i));
  return s;
}

DenseSolution exhaustive_l0(const Eigen::VectorXd& x, const DenseDictionary& d, double lambda,
                            std::size_t max_support) {
  const std::size_t m = d.atom_count();
  if (m > kExhaustiveMaxAtoms || max_support > kExhaustiveMaxSupport) {
    throw ContractViolation("exhaustive_l0: problem too large for enumeration (m=" + std::to_string(m) +
                            ", max_support=" + std::to_string(max_support) + "; limits m<=" +
                            std::to_string(kExhaustiveMaxAtoms) + ", support<=" +
                            std::to_string(kExhaustiveMaxSupport) + ")");
  }
  require(static_cast<std::size_t>(x.size()) == d.signal_size(), "exhaustive_l0: signal/dictionary size mismatch");

  DenseSolution best{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)), l0_objective(x, d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)), lambda)};
  std::vector<std::size_t> support;

  const std::function<void(std::size_t)> visit = [&](std::size_t start) {
    if (!support.empty()) {
      Eigen::MatrixXd sub(d.atoms.rows(), static_cast<Eigen::Index>(support.size()));
      for (std::size_t j = 0; j < support.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = d.atoms.col(static_cast<Eigen::Index>(support[j]));
      const Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(x);
      Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < support.size(); ++j) z[static_cast<Eigen::Index>(support[j])] = coef[static_cast<Eigen::Index>(j)];
      const double obj = l0_objective(x, d, z, lambda);
      if (obj < best.objective) best = {std::move(z), obj};
    }
    if (support.size() == max_support) return;
    for (std::size_t j = start; j < m; ++j) {
      support.push_back(j);
      visit(j + 1);
      support.pop_back();
    }
  };
  visit(0);
  return best;
}

IterativeSolution nihta_dense(const Eigen::VectorXd& x, const DenseDictionary& d, double theta, double mu,
                              std::size_t iterations) {
  require(mu > 0.0, "nihta_dense: step size must be positive");
  require(theta >= 0.0, "nihta_dense: theta must be non-negative");
  require(static_cast<std::size_t>(x.size()) == d.signal_size(), "nihta_dense: signal/dictionary size mismatch");
  const double lambda = nihta_lambda(theta, mu);
  IterativeSolution out{Eigen::VectorXd::Zero(d.atoms.cols()), {}};
  out.report.objective_trace.push_back(l0_objective(x, d, out.z, lambda));
  for (std::size_t k = 0; k < iterations; ++k) {
    Eigen::VectorXd step = out.z - mu * (d.atoms.transpose() * (d.atoms * out.z - x));
    for (Eigen::Index i = 0; i < step.size(); ++i) step[i] = hard_threshold(step[i], theta);
    out.z = std::move(step);
    out.report.objective_trace.push_back(l0_objective(x, d, out.z, lambda));
  }
  out.report.iterations = iterations;
  out.report.final_support = support_of(out.z);
  return out;
}

double spectral_norm_squared(const DenseDictionary& d) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.atoms);
  const double s = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  return s * s;
}

namespace {

template <class Threshold>
Tensor conv_iterate(const Tensor& image, const ConvKernel& w_d, const ConvKernel& w_u, std::size_t iterations,
                    const char* who, Threshold&& threshold) {
  require(w_d.out_channels() == image.channels() && w_u.in_channels() == image.channels(),
          std::string(who) + ": image channels do not match W_d output / W_u input");
  require(w_d.in_channels() == w_u.out_channels(), std::string(who) + ": W_d and W_u disagree on feature channels");
  Tensor z(image.height(), image.width(), w_d.in_channels());
  for (std::size_t k = 0; k < iterations; ++k) {
    Tensor residual = conv2d_same(z, w_d);
    residual -= image;
    z -= conv2d_same(residual, w_u);
    for (double& v : z.values()) v = threshold(v);
  }
  return z;
}

}  // namespace

Tensor ista_conv(const Tensor& image, const ConvKernel& w_d, const ConvKernel& w_u, double theta,
                 std::size_t iterations) {
  require(theta >= 0.0, "ista_conv: theta must be non-negative");
  return conv_iterate(image, w_d, w_u, iterations, "ista_conv", [theta](double v) { return soft_threshold(v, theta); });
}

Tensor nihta_conv(const Tensor& image, const ConvKernel& w_d, const ConvKernel& w_u, double theta,
                  std::size_t iterations) {
  require(theta >= 0.0, "nihta_conv: theta must be non-negative");
  return conv_iterate(image, w_d, w_u, iterations, "nihta_conv", [theta](double v) { return hard_threshold(v, theta); });
}

double conv_l0_objective(const Tensor& image, const ConvKernel& dictionary, const Tensor& z, double lambda,
                         double zero_tolerance) {
  Tensor kept = z;
  std::size_t nnz = 0;
  for (double& v : kept.values()) {
    if (std::abs(v) <= zero_tolerance) {
      v = 0.0;
    } else {
      ++nnz;
    }
  }
  Tensor r = conv2d_same(kept, dictionary);
  r -= image;
  return 0.5 * dot(r, r) + lambda * static_cast<double>(nnz);
}

}  // namespace lzsc
