#include "slcgc/graph_filter.hpp"

#include <cmath>
#include <string>

namespace slcgc::graph {
namespace {

Eigen::VectorXd degrees(const SparseMatrix& adjacency) {
  Eigen::VectorXd deg = Eigen::VectorXd::Zero(adjacency.rows());
  for (Eigen::Index row = 0; row < adjacency.outerSize(); ++row)
    for (SparseMatrix::InnerIterator it(adjacency, row); it; ++it) deg(row) += it.value();
  return deg;
}

void require_square(const SparseMatrix& m, const char* what) {
  if (m.rows() != m.cols()) throw Error(std::string(what) + ": matrix is not square");
}

}  // namespace

void FilterConfig::validate() const {
  if (!(k > 0 && k <= 0.5)) throw Error("filter coefficient k must lie in (0, 1/2], got " + std::to_string(k));
  if (layers < 0) throw Error("filter layer count must be non-negative");
}

SparseMatrix self_loop(const SparseMatrix& adjacency) {
  require_square(adjacency, "self_loop");
  const SparseMatrix transposed = adjacency.transpose();
  if ((adjacency - transposed).norm() != 0.0) throw Error("self_loop: adjacency is not symmetric");
  if (adjacency.diagonal().cwiseAbs().sum() != 0.0) throw Error("self_loop: adjacency has a nonzero diagonal");
  SparseMatrix eye(adjacency.rows(), adjacency.cols());
  eye.setIdentity();
  SparseMatrix out = adjacency + eye;
  out.makeCompressed();
  return out;
}

SparseMatrix sym_norm_laplacian(const SparseMatrix& adjacency) {
  require_square(adjacency, "sym_norm_laplacian");
  const Eigen::VectorXd deg = degrees(adjacency);
  Eigen::VectorXd inv_sqrt(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    if (!(deg(i) > 0)) throw Error("sym_norm_laplacian: node " + std::to_string(i) + " has zero degree");
    inv_sqrt(i) = 1.0 / std::sqrt(deg(i));
  }
  SparseMatrix normalized = inv_sqrt.asDiagonal() * adjacency * inv_sqrt.asDiagonal();
  SparseMatrix eye(adjacency.rows(), adjacency.cols());
  eye.setIdentity();
  SparseMatrix out = eye - normalized;
  out.makeCompressed();
  return out;
}

SparseMatrix combinatorial_laplacian(const SparseMatrix& adjacency) {
  require_square(adjacency, "combinatorial_laplacian");
  const Eigen::VectorXd deg = degrees(adjacency);
  SparseMatrix d(adjacency.rows(), adjacency.cols());
  d.reserve(Eigen::VectorXi::Constant(adjacency.rows(), 1));
  for (Eigen::Index i = 0; i < deg.size(); ++i) d.insert(i, i) = deg(i);
  SparseMatrix out = d - adjacency;
  out.makeCompressed();
  return out;
}

Eigen::MatrixXd low_pass_filter(const Eigen::MatrixXd& features, const SparseMatrix& laplacian,
                                const FilterConfig& cfg) {
  cfg.validate();
  if (laplacian.rows() != features.rows() || laplacian.cols() != features.rows())
    throw Error("low_pass_filter: Laplacian is " + std::to_string(laplacian.rows()) + "x" +
                std::to_string(laplacian.cols()) + " but features have " + std::to_string(features.rows()) +
                " rows");
  Eigen::MatrixXd x = features;
  for (int layer = 0; layer < cfg.layers; ++layer) {
    Eigen::MatrixXd lx = laplacian * x;
    x -= cfg.k * lx;
  }
  return x;
}

double rayleigh(const SparseMatrix& laplacian, const Eigen::VectorXd& signal) {
  const double energy = signal.squaredNorm();
  if (energy == 0.0) throw Error("rayleigh: zero signal");
  return signal.dot(laplacian * signal) / energy;
}

double rayleigh(const SparseMatrix& laplacian, const Eigen::MatrixXd& signal) {
  const double energy = signal.squaredNorm();
  if (energy == 0.0) throw Error("rayleigh: zero signal");
  return (signal.array() * (laplacian * signal).array()).sum() / energy;
}

}  // namespace slcgc::graph
