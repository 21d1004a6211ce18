#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "slcgc/error.hpp"
#include "slcgc/superpixel.hpp"

namespace slcgc::graph {

/// Low-pass filter H = I - k * L applied t times.
/// 0 < k <= 1/2 keeps p(lambda) = 1 - k*lambda nonnegative and nonincreasing
/// on [0, 2].
struct FilterConfig {
  double k = 0.5;
  int layers = 2;

  void validate() const;
};

/// Which adjacency feeds the normalized Laplacian.
enum class LaplacianSource { kSelfLoop, kRaw };

/// A_hat = I + A. Throws if A is not symmetric.
SparseMatrix self_loop(const SparseMatrix& adjacency);

/// I - D^{-1/2} A D^{-1/2} with D the row sums of `adjacency`. Throws on a
/// zero-degree node.
SparseMatrix sym_norm_laplacian(const SparseMatrix& adjacency);

/// Combinatorial Laplacian D - A.
SparseMatrix combinatorial_laplacian(const SparseMatrix& adjacency);

/// X_t = (I - k L)^t X as t successive sparse products.
Eigen::MatrixXd low_pass_filter(const Eigen::MatrixXd& features, const SparseMatrix& laplacian,
                                const FilterConfig& cfg);

/// x^T L x / x^T x. Throws on the zero vector.
double rayleigh(const SparseMatrix& laplacian, const Eigen::VectorXd& signal);

/// Multi-channel form trace(X^T L X) / trace(X^T X).
double rayleigh(const SparseMatrix& laplacian, const Eigen::MatrixXd& signal);

}  // namespace slcgc::graph
