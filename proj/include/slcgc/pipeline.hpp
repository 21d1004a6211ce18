#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "slcgc/cluster_metrics.hpp"
#include "slcgc/contrastive.hpp"
#include "slcgc/graph_filter.hpp"
#include "slcgc/hsi_io.hpp"
#include "slcgc/superpixel.hpp"

namespace slcgc::pipeline {

enum class Reducer { kPca, kLda };

/// Stage toggles for ablation runs. `true` means the stage is
/// switched off.
struct Ablations {
  bool ghr = false;    // no superpixels: every pixel is a node
  bool lgd = false;    // no low-pass filtering (t = 0)
  bool gscl = false;   // no contrastive training: cluster X_t directly
  bool noise = false;  // sigma = 0

  /// Parses "ghr,lgd,gscl,noise" (any subset, empty allowed).
  static Ablations parse(const std::string& list);
  std::string to_string() const;
};

/// Node count above which the pixel-level graph needs `force`.
inline constexpr std::size_t kLargeGraphNodes = 100000;

struct RunConfig {
  // Training (defaults from the preset parameter table).
  int epochs = 400;
  double lr = 1e-3;
  int filter_layers = 2;
  double filter_k = 0.5;
  double noise_sigma = 0.01;
  int hidden_dim = 500;
  int output_dim = 500;
  contrastive::Activation activation = contrastive::Activation::kRelu;
  bool noisy_inference = false;

  // Homogeneous regions.
  std::size_t n_superpixels = 0;  // 0: ceil(pixels / 100)
  double compactness = 0.1;
  int slic_iterations = 10;
  std::size_t reduce_components = 3;
  Reducer reducer = Reducer::kPca;
  graph::LaplacianSource laplacian = graph::LaplacianSource::kSelfLoop;

  // Clustering.
  int clusters = 0;  // 0: number of ground-truth classes
  int restarts = 10;
  int kmeans_iterations = 300;

  std::uint64_t seed = 0;
  Ablations ablate;
  bool force = false;

  nlohmann::ordered_json to_json() const;
  /// Overlays the keys present in `j` onto `base`; unknown keys are an error.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
  static RunConfig from_json(const nlohmann::json& j);
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunResult {
  RunConfig effective;  // after ablations and defaults are resolved
  Segmentation segmentation;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  Eigen::MatrixXd filtered;  // X_t
  std::optional<contrastive::TrainResult> training;
  cluster::KmeansResult kmeans;
  ClusterMap cluster_map;
  std::optional<cluster::MetricsReport> metrics;
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;

  nlohmann::ordered_json manifest() const;
};

/// normalize -> reduce -> slic -> adjacency/project -> filter -> train ->
/// kmeans -> backproject -> metrics. Errors are rethrown prefixed with the
/// stage name. `gt` may be null when `cfg.clusters` is set and LDA is off.
RunResult run(const HsiCube& cube, const GroundTruth* gt, const RunConfig& cfg);

/// Loss history as "iteration,loss" CSV with a header line.
std::string loss_csv(const std::vector<double>& history);

}  // namespace slcgc::pipeline

namespace slcgc::synthetic {

struct FixtureParams {
  std::size_t height = 30;
  std::size_t width = 30;
  std::size_t bands = 10;
  /// Offset that lifts each class spectrum on its own third of the bands.
  double separation = 0.25;
  /// Per-band Gaussian noise std.
  double noise_std = 0.05;
  std::uint64_t seed = 0;
};

struct Fixture {
  HsiCube cube;
  GroundTruth gt;
};

/// Three spatial regions: the left half, and the top and bottom of the right
/// half.
/// Each class spectrum sits `separation` above a shared base on bands
/// b % 3 == class - 1. I.i.d. Gaussian noise is added per band.
Fixture three_regions(const FixtureParams& params);

}  // namespace slcgc::synthetic
