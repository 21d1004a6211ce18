#include "slcgc/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <Eigen/Eigenvalues>

namespace slcgc::preprocess {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Flip each column so its largest-magnitude entry is positive (first one wins
// on ties).
void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0) vectors.col(c) *= -1.0;
  }
}

}  // namespace

Eigen::Map<const RowMatrix> pixel_matrix(const HsiCube& cube) {
  return {cube.values.data(), static_cast<Eigen::Index>(cube.pixels()), static_cast<Eigen::Index>(cube.bands)};
}

HsiCube normalize_bands(const HsiCube& cube) {
  HsiCube out = cube;
  const std::size_t n = cube.pixels();
  for (std::size_t b = 0; b < cube.bands; ++b) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t p = 0; p < n; ++p) {
      lo = std::min(lo, cube.values[p * cube.bands + b]);
      hi = std::max(hi, cube.values[p * cube.bands + b]);
    }
    const double range = hi - lo;
    for (std::size_t p = 0; p < n; ++p) {
      double& v = out.values[p * cube.bands + b];
      v = range > 0 ? (v - lo) / range : 0.0;
    }
  }
  return out;
}

ReducedImage reduce_unsupervised(const HsiCube& cube, std::size_t r) {
  if (r == 0) throw Error("reduce_unsupervised: r must be at least 1");
  if (r > cube.bands)
    throw Error("reduce_unsupervised: r = " + std::to_string(r) + " exceeds band count " + std::to_string(cube.bands));
  const auto x = pixel_matrix(cube);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(x.rows());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("reduce_unsupervised: covariance eigensolve failed");

  const auto k = static_cast<Eigen::Index>(r);
  // Eigen returns ascending eigenvalues; take the top k in reverse.
  Eigen::MatrixXd proj = eig.eigenvectors().rightCols(k).rowwise().reverse();
  fix_signs(proj);

  ReducedImage out;
  out.height = cube.height;
  out.width = cube.width;
  out.projection = std::move(proj);
  out.component_variance = eig.eigenvalues().tail(k).reverse().cwiseMax(0.0);
  out.values = centered * out.projection;
  return out;
}

ReducedImage reduce_supervised(const HsiCube& cube, const GroundTruth& gt, std::size_t r) {
  if (gt.height != cube.height || gt.width != cube.width)
    throw Error("reduce_supervised: ground truth dimensions do not match the cube");
  if (r == 0) throw Error("reduce_supervised: r must be at least 1");

  const auto x = pixel_matrix(cube);
  const Eigen::Index b = x.cols();

  std::map<int, std::pair<Eigen::VectorXd, std::size_t>> classes;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(b);
  std::size_t labeled = 0;
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    const int c = gt.labels[p];
    if (c == 0) continue;
    auto [it, fresh] = classes.try_emplace(c, Eigen::VectorXd::Zero(b), 0);
    it->second.first += x.row(static_cast<Eigen::Index>(p)).transpose();
    ++it->second.second;
    total += x.row(static_cast<Eigen::Index>(p)).transpose();
    ++labeled;
  }
  if (classes.size() < 2) throw Error("reduce_supervised: LDA needs at least 2 labeled classes");
  if (r > classes.size() - 1)
    throw Error("reduce_supervised: r = " + std::to_string(r) + " exceeds C-1 = " + std::to_string(classes.size() - 1));

  const Eigen::VectorXd mean = total / static_cast<double>(labeled);
  for (auto& [c, acc] : classes) acc.first /= static_cast<double>(acc.second);

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(b, b);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(b, b);
  for (std::size_t p = 0; p < gt.pixels(); ++p) {
    const int c = gt.labels[p];
    if (c == 0) continue;
    const Eigen::VectorXd d = x.row(static_cast<Eigen::Index>(p)).transpose() - classes[c].first;
    sw.noalias() += d * d.transpose();
  }
  for (const auto& [c, acc] : classes) {
    const Eigen::VectorXd d = acc.first - mean;
    sb.noalias() += static_cast<double>(acc.second) * d * d.transpose();
  }

  const double sw_trace = sw.trace();
  if (sb.trace() <= 1e-12 * std::max(sw_trace, 1.0))
    throw Error("reduce_supervised: between-class scatter vanishes (class means coincide)");

  ReducedImage out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sw_eig(sw, Eigen::EigenvaluesOnly);
  const double max_ev = sw_eig.eigenvalues().maxCoeff();
  if (max_ev <= 0 || sw_eig.eigenvalues().minCoeff() < 1e-10 * max_ev) {
    const double ridge = sw_trace > 0 ? 1e-6 * sw_trace / static_cast<double>(b) : 1e-6;
    sw.diagonal().array() += ridge;
    out.regularized = true;
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> geig(sb, sw);
  if (geig.info() != Eigen::Success) throw Error("reduce_supervised: generalized eigensolve failed");

  const auto k = static_cast<Eigen::Index>(r);
  Eigen::MatrixXd proj = geig.eigenvectors().rightCols(k).rowwise().reverse();
  for (Eigen::Index c = 0; c < k; ++c) proj.col(c).normalize();
  fix_signs(proj);

  out.height = cube.height;
  out.width = cube.width;
  out.projection = std::move(proj);
  out.component_variance = geig.eigenvalues().tail(k).reverse();
  out.values = (x.rowwise() - mean.transpose()) * out.projection;
  return out;
}

}  // namespace slcgc::preprocess
