#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "slcgc/hsi_io.hpp"

namespace slcgc {

/// Pixel scores after spectral dimensionality reduction.
struct ReducedImage {
  std::size_t height = 0;
  std::size_t width = 0;
  /// (height*width) x r, one row per pixel in row-major order.
  Eigen::MatrixXd values;
  /// b x r projection; columns are the component directions.
  Eigen::MatrixXd projection;
  /// Per-component variance of the scores (for PCA: the top-r eigenvalues,
  /// non-increasing). For LDA: the generalized eigenvalues.
  Eigen::VectorXd component_variance;
  /// Set when the within-class scatter was near-singular and got a ridge.
  bool regularized = false;

  std::size_t components() const { return static_cast<std::size_t>(values.cols()); }
};

namespace preprocess {

/// Per-band min-max scaling to [0,1]. Constant bands become all zeros.
HsiCube normalize_bands(const HsiCube& cube);

/// The cube as a (pixels x bands) matrix view.
Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> pixel_matrix(
    const HsiCube& cube);

/// Principal-component projection onto the top-r eigenvectors of the pixel
/// covariance. Each eigenvector's largest-magnitude entry is made positive.
ReducedImage reduce_unsupervised(const HsiCube& cube, std::size_t r);

/// Fisher LDA fit on labeled pixels (gt != 0) and applied to every pixel.
/// Requires at least two classes and r <= C-1. A near-singular within-class
/// scatter gets 1e-6 * trace/dim added to its diagonal.
ReducedImage reduce_supervised(const HsiCube& cube, const GroundTruth& gt, std::size_t r);

}  // namespace preprocess
}  // namespace slcgc
