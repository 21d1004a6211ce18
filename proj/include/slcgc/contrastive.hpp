#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "slcgc/error.hpp"
#include "slcgc/superpixel.hpp"

namespace slcgc::contrastive {

using Rng = std::mt19937_64;

enum class Activation { kRelu, kNone };

/// Weights of one two-layer MLP: raw = act(X W1 + b1) W2 + b2.
/// The same shape is reused for gradients and Adam moments.
struct BranchParams {
  Eigen::MatrixXd w1;  // d x d1
  Eigen::VectorXd b1;  // d1
  Eigen::MatrixXd w2;  // d1 x d2
  Eigen::VectorXd b2;  // d2

  static BranchParams zeros_like(const BranchParams& other);
  bool all_finite() const;
};

struct MlpBranch {
  BranchParams params;
  Activation activation = Activation::kRelu;

  /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static MlpBranch init(Eigen::Index in_dim, Eigen::Index hidden_dim, Eigen::Index out_dim, Activation act, Rng& rng);

  Eigen::Index in_dim() const { return params.w1.rows(); }
  Eigen::Index out_dim() const { return params.w2.cols(); }
};

/// Lower bound on the row norm used by the l2 normalization; zero rows stay
/// zero.
inline constexpr double kNormEpsilon = 1e-12;

/// Forward intermediates kept for the backward pass.
struct ForwardTrace {
  Eigen::MatrixXd pre_hidden;  // X W1 + b1
  Eigen::MatrixXd hidden;      // act(pre_hidden)
  Eigen::MatrixXd raw;         // hidden W2 + b2
  Eigen::VectorXd row_norms;   // max(||raw_i||, eps)
  Eigen::MatrixXd normalized;  // raw_i / row_norms_i
};

ForwardTrace forward(const MlpBranch& branch, const Eigen::MatrixXd& x);

/// Row-normalized embedding of `x` through one branch.
Eigen::MatrixXd encode(const MlpBranch& branch, const Eigen::MatrixXd& x);

/// Rows divided by max(||row||, kNormEpsilon).
Eigen::MatrixXd l2_normalize_rows(const Eigen::MatrixXd& z);

/// Gaussian matrix with entries ~ Normal(0, sigma^2), drawn in row-major order.
Eigen::MatrixXd sample_noise(Eigen::Index rows, Eigen::Index cols, double sigma, Rng& rng);

/// z + noise. sigma == 0 returns z unchanged and draws nothing.
Eigen::MatrixXd inject_noise(const Eigen::MatrixXd& z, double sigma, Rng& rng);

/// S = Z1 Z2^T.
Eigen::MatrixXd similarity(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2);

/// (1/N^2) sum_ij (S_ij - A_hat_ij)^2 on a dense S.
double loss(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a_hat);

/// Same value as loss(similarity(z1, z2), a_hat) without forming S:
/// sum S^2 = <Z1^T Z1, Z2^T Z2> and the cross term only touches nonzeros of
/// A_hat, so the cost is O(N d^2 + nnz(A_hat) d).
double structural_loss(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2, const SparseMatrix& a_hat);

/// Z = (Z1 + Z2) / 2.
Eigen::MatrixXd fuse(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2);

struct Gradients {
  double loss = 0.0;
  BranchParams branch1;
  BranchParams branch2;
  /// dL/dZ1 and dL/dZ2 at the (noisy) normalized embeddings.
  Eigen::MatrixXd d_z1;
  Eigen::MatrixXd d_z2;
};

/// Loss and exact gradients of the cross-view loss with respect to both
/// branches. `noise`, when non-empty, is added to branch 1's normalized output
/// (identity Jacobian).
Gradients loss_and_gradients(const Eigen::MatrixXd& x, const MlpBranch& branch1, const MlpBranch& branch2,
                             const SparseMatrix& a_hat, const Eigen::MatrixXd& noise = {});

/// Backpropagates dL/dZ through the row normalization and both affine layers.
BranchParams backward(const MlpBranch& branch, const Eigen::MatrixXd& x, const ForwardTrace& trace,
                      const Eigen::MatrixXd& d_normalized);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of `param` in place. `step` is 1-based.
void adam_update(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::Ref<const Eigen::MatrixXd>& grad,
                 Eigen::Ref<Eigen::MatrixXd> m, Eigen::Ref<Eigen::MatrixXd> v, long step, double lr,
                 const AdamConfig& cfg = {});

/// Two non-shared branches and their Adam moments.
struct EncoderState {
  MlpBranch branch1;
  MlpBranch branch2;
  BranchParams m1, v1, m2, v2;
  long step = 0;

  EncoderState(MlpBranch b1, MlpBranch b2);
};

void adam_step(EncoderState& state, const BranchParams& grad1, const BranchParams& grad2, double lr,
               const AdamConfig& cfg = {});

struct TrainConfig {
  int iterations = 400;  // T
  double lr = 1e-3;
  double sigma = 0.01;
  std::uint64_t seed = 0;
  Eigen::Index hidden_dim = 500;  // d1
  Eigen::Index output_dim = 500;  // d2
  Activation activation = Activation::kRelu;
  bool no_noise = false;
  /// Skip the MLPs: both views are the row-normalized input.
  bool identity_encoder = false;
  /// Add a fresh noise sample to the final branch-1 embedding as well.
  bool noisy_inference = false;

  void validate() const;
};

struct Embeddings {
  Eigen::MatrixXd z1;
  Eigen::MatrixXd z2;
  Eigen::MatrixXd fused;
};

struct TrainResult {
  Embeddings embeddings;
  /// Training loss per iteration (with that iteration's noise).
  std::vector<double> loss_history;
  /// Noise-free loss of the final parameters.
  double final_loss = 0.0;
};

/// Adam training of both branches against A_hat, then noise-free inference.
/// Throws when the loss becomes non-finite.
TrainResult train(const Eigen::MatrixXd& x_t, const SparseMatrix& a_hat, const TrainConfig& cfg);

}  // namespace slcgc::contrastive
