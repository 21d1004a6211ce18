#include "slcgc/contrastive.hpp"

#include <cmath>
#include <string>

namespace slcgc::contrastive {
namespace {

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

template <typename Derived>
void fill_uniform(Eigen::MatrixBase<Derived>& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  // Column-major fill; Eigen's storage order.
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
}

double sparse_cross_term(const SparseMatrix& a, const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2) {
  double acc = 0.0;
  for (Eigen::Index row = 0; row < a.outerSize(); ++row)
    for (SparseMatrix::InnerIterator it(a, row); it; ++it) acc += it.value() * z1.row(row).dot(z2.row(it.col()));
  return acc;
}

}  // namespace

BranchParams BranchParams::zeros_like(const BranchParams& other) {
  return {Eigen::MatrixXd::Zero(other.w1.rows(), other.w1.cols()), Eigen::VectorXd::Zero(other.b1.size()),
          Eigen::MatrixXd::Zero(other.w2.rows(), other.w2.cols()), Eigen::VectorXd::Zero(other.b2.size())};
}

bool BranchParams::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

MlpBranch MlpBranch::init(Eigen::Index in_dim, Eigen::Index hidden_dim, Eigen::Index out_dim, Activation act,
                          Rng& rng) {
  if (in_dim < 1 || hidden_dim < 1 || out_dim < 1) throw Error("MlpBranch::init: dimensions must be positive");
  MlpBranch b;
  b.activation = act;
  b.params.w1.resize(in_dim, hidden_dim);
  b.params.b1.resize(hidden_dim);
  b.params.w2.resize(hidden_dim, out_dim);
  b.params.b2.resize(out_dim);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  fill_uniform(b.params.w1, bound1, rng);
  fill_uniform(b.params.b1, bound1, rng);
  fill_uniform(b.params.w2, bound2, rng);
  fill_uniform(b.params.b2, bound2, rng);
  return b;
}

ForwardTrace forward(const MlpBranch& branch, const Eigen::MatrixXd& x) {
  const auto& p = branch.params;
  if (x.cols() != p.w1.rows())
    throw Error("encode: input has " + std::to_string(x.cols()) + " columns, branch expects " +
                std::to_string(p.w1.rows()));
  ForwardTrace t;
  t.pre_hidden = (x * p.w1).rowwise() + p.b1.transpose();
  t.hidden = branch.activation == Activation::kRelu ? Eigen::MatrixXd(t.pre_hidden.cwiseMax(0.0)) : t.pre_hidden;
  t.raw = (t.hidden * p.w2).rowwise() + p.b2.transpose();
  t.row_norms = t.raw.rowwise().norm().cwiseMax(kNormEpsilon);
  t.normalized = t.row_norms.cwiseInverse().asDiagonal() * t.raw;
  return t;
}

Eigen::MatrixXd encode(const MlpBranch& branch, const Eigen::MatrixXd& x) { return forward(branch, x).normalized; }

Eigen::MatrixXd l2_normalize_rows(const Eigen::MatrixXd& z) {
  const Eigen::VectorXd norms = z.rowwise().norm().cwiseMax(kNormEpsilon);
  return norms.cwiseInverse().asDiagonal() * z;
}

Eigen::MatrixXd sample_noise(Eigen::Index rows, Eigen::Index cols, double sigma, Rng& rng) {
  if (sigma < 0) throw Error("noise sigma must be non-negative");
  Eigen::MatrixXd n(rows, cols);
  std::normal_distribution<double> dist(0.0, sigma);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) n(i, j) = dist(rng);
  return n;
}

Eigen::MatrixXd inject_noise(const Eigen::MatrixXd& z, double sigma, Rng& rng) {
  if (sigma < 0) throw Error("noise sigma must be non-negative");
  if (sigma == 0.0) return z;
  return z + sample_noise(z.rows(), z.cols(), sigma, rng);
}

Eigen::MatrixXd similarity(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2) {
  require_same_shape(z1, z2, "similarity");
  return z1 * z2.transpose();
}

double loss(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a_hat) {
  require_same_shape(s, a_hat, "loss");
  const auto n = static_cast<double>(s.rows());
  return (s - a_hat).squaredNorm() / (n * n);
}

double structural_loss(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2, const SparseMatrix& a_hat) {
  require_same_shape(z1, z2, "structural_loss");
  if (a_hat.rows() != z1.rows() || a_hat.cols() != z1.rows()) throw Error("structural_loss: A_hat size mismatch");
  const auto n = static_cast<double>(z1.rows());
  const Eigen::MatrixXd g1 = z1.transpose() * z1;
  const Eigen::MatrixXd g2 = z2.transpose() * z2;
  const double s_sq = (g1.array() * g2.array()).sum();
  const double a_sq = a_hat.squaredNorm();
  return (s_sq - 2.0 * sparse_cross_term(a_hat, z1, z2) + a_sq) / (n * n);
}

Eigen::MatrixXd fuse(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2) {
  require_same_shape(z1, z2, "fuse");
  return 0.5 * (z1 + z2);
}

BranchParams backward(const MlpBranch& branch, const Eigen::MatrixXd& x, const ForwardTrace& trace,
                      const Eigen::MatrixXd& d_normalized) {
  // Row normalization z = r / max(||r||, eps):
  //   ||r|| > eps:  dr = (dz - z (z . dz)) / ||r||
  //   otherwise:    dr = dz / eps
  Eigen::MatrixXd d_raw(d_normalized.rows(), d_normalized.cols());
  for (Eigen::Index i = 0; i < d_raw.rows(); ++i) {
    const double norm = trace.row_norms(i);
    if (trace.raw.row(i).norm() > kNormEpsilon) {
      const double proj = trace.normalized.row(i).dot(d_normalized.row(i));
      d_raw.row(i) = (d_normalized.row(i) - proj * trace.normalized.row(i)) / norm;
    } else {
      d_raw.row(i) = d_normalized.row(i) / norm;
    }
  }

  const auto& p = branch.params;
  BranchParams g;
  g.w2 = trace.hidden.transpose() * d_raw;
  g.b2 = d_raw.colwise().sum().transpose();
  Eigen::MatrixXd d_pre = d_raw * p.w2.transpose();
  if (branch.activation == Activation::kRelu) d_pre.array() *= (trace.pre_hidden.array() > 0.0).cast<double>();
  g.w1 = x.transpose() * d_pre;
  g.b1 = d_pre.colwise().sum().transpose();
  return g;
}

Gradients loss_and_gradients(const Eigen::MatrixXd& x, const MlpBranch& branch1, const MlpBranch& branch2,
                             const SparseMatrix& a_hat, const Eigen::MatrixXd& noise) {
  const ForwardTrace t1 = forward(branch1, x);
  const ForwardTrace t2 = forward(branch2, x);
  require_same_shape(t1.normalized, t2.normalized, "loss_and_gradients");
  if (a_hat.rows() != x.rows() || a_hat.cols() != x.rows())
    throw Error("loss_and_gradients: A_hat is not N x N for N = " + std::to_string(x.rows()));

  Eigen::MatrixXd z1 = t1.normalized;
  if (noise.size() != 0) {
    require_same_shape(z1, noise, "loss_and_gradients(noise)");
    z1 += noise;
  }
  const Eigen::MatrixXd& z2 = t2.normalized;
  const auto n = static_cast<double>(x.rows());
  const double scale = 2.0 / (n * n);

  Gradients out;
  // dL/dS = scale (S - A_hat); dL/dZ1 = dL/dS Z2; dL/dZ2 = dL/dS^T Z1.
  // Forming S costs N^2 d, the Gram route N d^2. S is only formed for graphs
  // small enough that the quadratic term stays well below the per-node MLP
  // cost, so an iteration scales linearly in N.
  if (4 * z1.rows() <= z1.cols()) {
    Eigen::MatrixXd residual = z1 * z2.transpose();
    residual -= a_hat;
    out.loss = residual.squaredNorm() / (n * n);
    out.d_z1 = scale * (residual * z2);
    out.d_z2 = scale * (residual.transpose() * z1);
  } else {
    const Eigen::MatrixXd g1 = z1.transpose() * z1;
    const Eigen::MatrixXd g2 = z2.transpose() * z2;
    out.loss = ((g1.array() * g2.array()).sum() - 2.0 * sparse_cross_term(a_hat, z1, z2) + a_hat.squaredNorm()) /
               (n * n);
    const SparseMatrix a_hat_t = a_hat.transpose();
    out.d_z1 = scale * (z1 * g2 - Eigen::MatrixXd(a_hat * z2));
    out.d_z2 = scale * (z2 * g1 - Eigen::MatrixXd(a_hat_t * z1));
  }
  out.branch1 = backward(branch1, x, t1, out.d_z1);
  out.branch2 = backward(branch2, x, t2, out.d_z2);
  return out;
}

void adam_update(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::Ref<const Eigen::MatrixXd>& grad,
                 Eigen::Ref<Eigen::MatrixXd> m, Eigen::Ref<Eigen::MatrixXd> v, long step, double lr,
                 const AdamConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
}

EncoderState::EncoderState(MlpBranch b1, MlpBranch b2)
    : branch1(std::move(b1)),
      branch2(std::move(b2)),
      m1(BranchParams::zeros_like(branch1.params)),
      v1(BranchParams::zeros_like(branch1.params)),
      m2(BranchParams::zeros_like(branch2.params)),
      v2(BranchParams::zeros_like(branch2.params)) {}

void adam_step(EncoderState& state, const BranchParams& grad1, const BranchParams& grad2, double lr,
               const AdamConfig& cfg) {
  ++state.step;
  auto update = [&](BranchParams& p, const BranchParams& g, BranchParams& m, BranchParams& v) {
    adam_update(p.w1, g.w1, m.w1, v.w1, state.step, lr, cfg);
    adam_update(p.b1, g.b1, m.b1, v.b1, state.step, lr, cfg);
    adam_update(p.w2, g.w2, m.w2, v.w2, state.step, lr, cfg);
    adam_update(p.b2, g.b2, m.b2, v.b2, state.step, lr, cfg);
  };
  update(state.branch1.params, grad1, state.m1, state.v1);
  update(state.branch2.params, grad2, state.m2, state.v2);
}

void TrainConfig::validate() const {
  if (iterations < 1) throw Error("training needs at least one iteration");
  if (!(lr > 0)) throw Error("learning rate must be positive");
  if (!(sigma >= 0)) throw Error("noise sigma must be non-negative");
  if (hidden_dim < 1 || output_dim < 1) throw Error("encoder dimensions must be positive");
}

TrainResult train(const Eigen::MatrixXd& x_t, const SparseMatrix& a_hat, const TrainConfig& cfg) {
  cfg.validate();
  if (a_hat.rows() != x_t.rows() || a_hat.cols() != x_t.rows())
    throw Error("train: A_hat is " + std::to_string(a_hat.rows()) + "x" + std::to_string(a_hat.cols()) +
                " but there are " + std::to_string(x_t.rows()) + " nodes");
  Rng rng(cfg.seed);
  const double sigma = cfg.no_noise ? 0.0 : cfg.sigma;
  TrainResult result;

  if (cfg.identity_encoder) {
    Eigen::MatrixXd z = l2_normalize_rows(x_t);
    Eigen::MatrixXd z1 = cfg.noisy_inference ? inject_noise(z, sigma, rng) : z;
    result.loss_history.push_back(structural_loss(z1, z, a_hat));
    result.final_loss = structural_loss(z, z, a_hat);
    result.embeddings = {z1, z, fuse(z1, z)};
    return result;
  }

  MlpBranch b1 = MlpBranch::init(x_t.cols(), cfg.hidden_dim, cfg.output_dim, cfg.activation, rng);
  MlpBranch b2 = MlpBranch::init(x_t.cols(), cfg.hidden_dim, cfg.output_dim, cfg.activation, rng);
  EncoderState state(std::move(b1), std::move(b2));

  result.loss_history.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    Eigen::MatrixXd noise;
    if (sigma > 0) noise = sample_noise(x_t.rows(), cfg.output_dim, sigma, rng);
    Gradients g = loss_and_gradients(x_t, state.branch1, state.branch2, a_hat, noise);
    if (!std::isfinite(g.loss))
      throw Error("training diverged: non-finite loss at iteration " + std::to_string(it + 1));
    result.loss_history.push_back(g.loss);
    adam_step(state, g.branch1, g.branch2, cfg.lr);
    if (!state.branch1.params.all_finite() || !state.branch2.params.all_finite())
      throw Error("training diverged: non-finite parameters after iteration " + std::to_string(it + 1));
  }

  Eigen::MatrixXd z1 = encode(state.branch1, x_t);
  Eigen::MatrixXd z2 = encode(state.branch2, x_t);
  result.final_loss = structural_loss(z1, z2, a_hat);
  if (cfg.noisy_inference) z1 = inject_noise(z1, sigma, rng);
  result.embeddings = {z1, z2, fuse(z1, z2)};
  return result;
}

}  // namespace slcgc::contrastive
