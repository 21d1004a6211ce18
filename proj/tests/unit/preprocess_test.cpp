#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "slcgc/preprocess.hpp"

using namespace slcgc;

namespace {

HsiCube cube_from_rows(const std::vector<std::vector<double>>& pixels, std::size_t width) {
  const std::size_t bands = pixels.front().size();
  HsiCube cube(pixels.size() / width, width, bands);
  for (std::size_t p = 0; p < pixels.size(); ++p)
    for (std::size_t b = 0; b < bands; ++b) cube.values[p * bands + b] = pixels[p][b];
  return cube;
}

HsiCube random_cube(std::size_t h, std::size_t w, std::size_t b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  HsiCube cube(h, w, b);
  for (double& v : cube.values) v = n(rng);
  return cube;
}

double total_variance(const HsiCube& cube) {
  const auto x = preprocess::pixel_matrix(cube);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  return centered.squaredNorm() / static_cast<double>(x.rows());
}

}  // namespace

TEST(NormalizeBands, MinMaxPerBand) {
  const HsiCube cube = cube_from_rows({{2, 7, -1}, {4, 7, 3}, {3, 7, 1}}, 3);
  const HsiCube out = preprocess::normalize_bands(cube);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out.at(0, 1, 0), 1.0);
  EXPECT_DOUBLE_EQ(out.at(0, 2, 0), 0.5);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(out.at(0, c, 1), 0.0);  // constant band
  EXPECT_DOUBLE_EQ(out.at(0, 2, 2), 0.5);
}

TEST(NormalizeBands, Idempotent) {
  const HsiCube once = preprocess::normalize_bands(random_cube(4, 5, 3, 1));
  const HsiCube twice = preprocess::normalize_bands(once);
  for (std::size_t i = 0; i < once.values.size(); ++i) EXPECT_NEAR(once.values[i], twice.values[i], 1e-15);
}

TEST(ReduceUnsupervised, CollinearBandsHaveOneComponent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> px;
  for (int i = 0; i < 50; ++i) {
    const double v = u(rng);
    px.push_back({v, 2 * v});
  }
  const HsiCube cube = cube_from_rows(px, 10);
  const ReducedImage r = preprocess::reduce_unsupervised(cube, 2);
  const double total = r.component_variance.sum();
  EXPECT_GE(r.component_variance(0) / total, 1.0 - 1e-9);
  // Direction (1,2)/sqrt(5), sign fixed so the largest entry is positive.
  EXPECT_NEAR(r.projection(0, 0), 1.0 / std::sqrt(5.0), 1e-9);
  EXPECT_NEAR(r.projection(1, 0), 2.0 / std::sqrt(5.0), 1e-9);
}

TEST(ReduceUnsupervised, FullRankPreservesVariance) {
  const HsiCube cube = random_cube(6, 7, 5, 11);
  const ReducedImage r = preprocess::reduce_unsupervised(cube, 5);
  const double before = total_variance(cube);
  const double after = r.values.squaredNorm() / static_cast<double>(r.values.rows());
  EXPECT_NEAR(after / before, 1.0, 1e-9);
  EXPECT_NEAR(r.component_variance.sum() / before, 1.0, 1e-9);
}

TEST(ReduceUnsupervised, IsotropicDataExplainsAboutOneOverBands) {
  const std::size_t bands = 8;
  const HsiCube cube = random_cube(100, 100, bands, 5);
  const ReducedImage r = preprocess::reduce_unsupervised(cube, 1);
  const double fraction = r.component_variance(0) / total_variance(cube);
  // Top eigenvalue of a 10^4-sample isotropic covariance exceeds 1/b only by
  // the sampling spread, roughly 2*sqrt(b/n).
  EXPECT_GE(fraction, 1.0 / bands);
  EXPECT_LE(fraction, 1.0 / bands + 0.03);
}

TEST(ReduceUnsupervised, OrthonormalProjectionAndSortedVariance) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const HsiCube cube = random_cube(5, 6, 7, seed);
    const ReducedImage r = preprocess::reduce_unsupervised(cube, 4);
    const Eigen::MatrixXd gram = r.projection.transpose() * r.projection;
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-9);
    for (Eigen::Index i = 1; i < 4; ++i) EXPECT_GE(r.component_variance(i - 1), r.component_variance(i));
    for (Eigen::Index c = 0; c < 4; ++c) {
      Eigen::Index arg = 0;
      r.projection.col(c).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(r.projection(arg, c), 0.0);
    }
  }
}

TEST(ReduceUnsupervised, Deterministic) {
  const HsiCube cube = random_cube(5, 5, 4, 9);
  const ReducedImage a = preprocess::reduce_unsupervised(cube, 2);
  const ReducedImage b = preprocess::reduce_unsupervised(cube, 2);
  EXPECT_EQ(a.values, b.values);
}

TEST(ReduceUnsupervised, RejectsBadComponentCount) {
  const HsiCube cube = random_cube(2, 2, 3, 1);
  EXPECT_THROW(preprocess::reduce_unsupervised(cube, 4), Error);
  EXPECT_THROW(preprocess::reduce_unsupervised(cube, 0), Error);
}

TEST(ReduceSupervised, TwoClassAxisAlignment) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t w = 20, h = 10, b = 4;
  HsiCube cube(h, w, b);
  GroundTruth gt{h, w, std::vector<std::uint16_t>(h * w)};
  for (std::size_t p = 0; p < h * w; ++p) {
    const int cls = p < h * w / 2 ? 1 : 2;
    gt.labels[p] = static_cast<std::uint16_t>(cls);
    for (std::size_t k = 0; k < b; ++k) cube.values[p * b + k] = n(rng) + (k == 0 ? 8.0 * cls : 0.0);
  }
  const ReducedImage r = preprocess::reduce_supervised(cube, gt, 1);
  const Eigen::VectorXd axis = r.projection.col(0);
  EXPECT_GE(std::abs(axis(0)) / axis.norm(), 0.99);
}

TEST(ReduceSupervised, ComponentBoundAndDegenerateCases) {
  const HsiCube cube = random_cube(4, 4, 3, 2);
  GroundTruth gt{4, 4, std::vector<std::uint16_t>(16, 1)};
  EXPECT_THROW(preprocess::reduce_supervised(cube, gt, 1), Error);  // one class
  for (std::size_t p = 8; p < 16; ++p) gt.labels[p] = 2;
  EXPECT_THROW(preprocess::reduce_supervised(cube, gt, 2), Error);  // r > C-1

  // Identical class means: every class holds the same two spectra.
  HsiCube same(2, 2, 2);
  same.values = {0, 1, 1, 0, 0, 1, 1, 0};
  GroundTruth two{2, 2, {1, 1, 2, 2}};
  EXPECT_THROW(preprocess::reduce_supervised(same, two, 1), Error);
}

TEST(ReduceSupervised, SingularWithinClassScatterIsRegularized) {
  // Band 2 is constant, so the within-class scatter is singular.
  HsiCube cube(2, 4, 2);
  GroundTruth gt{2, 4, {1, 1, 1, 1, 2, 2, 2, 2}};
  const double band0[] = {0.0, 0.1, 0.2, 0.1, 1.0, 1.1, 0.9, 1.0};
  for (std::size_t p = 0; p < 8; ++p) {
    cube.values[p * 2] = band0[p];
    cube.values[p * 2 + 1] = 0.5;
  }
  const ReducedImage r = preprocess::reduce_supervised(cube, gt, 1);
  EXPECT_TRUE(r.regularized);
  EXPECT_TRUE(r.values.allFinite());
  EXPECT_GE(std::abs(r.projection(0, 0)), 0.99);
}
