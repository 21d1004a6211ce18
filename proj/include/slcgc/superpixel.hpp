#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "slcgc/hsi_io.hpp"
#include "slcgc/preprocess.hpp"

namespace slcgc {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Superpixel assignment: every pixel belongs to exactly one non-empty,
/// 4-connected segment in [0, count).
struct Segmentation {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> assignment;
  std::size_t count = 0;

  std::size_t pixels() const { return height * width; }
  /// Pixel count n_i of every segment.
  std::vector<std::size_t> sizes() const;
};

namespace superpixel {

struct SlicParams {
  std::size_t n_segments = 0;
  double compactness = 0.1;
  int iterations = 10;
  bool enforce_connectivity = true;
};

/// Default superpixel count: ceil(pixels / 100).
std::size_t default_segment_count(std::size_t pixels);

/// SLIC over the reduced image. Centers start on a regular grid with spacing
/// s = sqrt(HW / n_segments); each pixel is assigned within a 2s x 2s window by
/// sqrt(d_feat^2 + (d_xy / s)^2 * m^2). Ties go to the lower center index.
/// Connectivity enforcement relabels orphan components into an adjacent
/// segment, so the final count may differ from n_segments.
Segmentation slic(const ReducedImage& img, const SlicParams& params);

/// Validates and compacts an arbitrary label map into a Segmentation.
/// Labels are renumbered in order of first appearance. Connectivity is not
/// enforced.
Segmentation from_labels(std::size_t height, std::size_t width, std::span<const int> labels);

/// Every pixel is its own segment (pixel-level graph).
Segmentation per_pixel(std::size_t height, std::size_t width);

/// Splits segments into 4-connected components (the segment count may grow).
Segmentation split_disconnected(const Segmentation& seg);

/// 0/1 symmetric adjacency with zero diagonal: segments i != j are adjacent
/// iff some pair of their pixels are 4-neighbors.
SparseMatrix build_adjacency(const Segmentation& seg);

/// Pixel-to-segment membership Q (pixels x N), entries 0/1.
SparseMatrix correlation_matrix(const Segmentation& seg);

/// Q with each column divided by its sum.
SparseMatrix normalized_correlation(const Segmentation& seg);

/// Node features V = Q_hat^T * Flatten(cube): row i is the mean spectrum of
/// segment i. Result is N x bands.
Eigen::MatrixXd project(const HsiCube& cube, const Segmentation& seg);

/// Every pixel receives its segment's label.
ClusterMap backproject(std::span<const int> node_labels, const Segmentation& seg);

}  // namespace superpixel
}  // namespace slcgc
