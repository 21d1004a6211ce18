#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "slcgc/hsi_io.hpp"

namespace slcgc::cluster {

struct KmeansParams {
  int clusters = 2;  // m
  int restarts = 10;
  int max_iterations = 300;
  std::uint64_t seed = 0;
};

struct KmeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // m x d
  double inertia = 0.0;
  /// Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;
};

/// k-means++ seeding and Lloyd iterations, best of `restarts` by
/// (inertia, restart index). Restart r is seeded from (seed, r). An empty
/// cluster takes the point farthest from its current centroid.
KmeansResult kmeans(const Eigen::MatrixXd& points, const KmeansParams& params);

/// Rows are classes, columns clusters.
using Contingency = std::vector<std::vector<long>>;

/// Maximum-weight injective matching of clusters to classes.
/// mapping[cluster] = class row, or -1 when the cluster is unmatched.
struct Assignment {
  std::vector<int> cluster_to_class;
  long matched = 0;
};

/// Optimal assignment on the zero-padded square cost matrix (Hungarian method).
Assignment hungarian_map(const Contingency& confusion);

struct MetricsReport {
  double oa = 0.0;
  double kappa = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  double purity = 0.0;
  std::vector<double> pa;  // per class, indexed by class - 1
  Contingency confusion;   // C x m
  std::vector<int> mapping;
  long evaluated = 0;

  nlohmann::ordered_json to_json() const;
};

/// Scores labels against classes on pixels with gt != 0 and a non-ignored
/// prediction. Class labels are 1..C, cluster labels 0..m-1.
MetricsReport compute_metrics(const std::vector<int>& classes, const std::vector<int>& clusters);

MetricsReport compute_metrics(const ClusterMap& pred, const GroundTruth& gt);

/// Building blocks, exposed for testing.
double cohen_kappa(const Contingency& confusion, const std::vector<int>& mapping);
double normalized_mutual_information(const Contingency& confusion);
double adjusted_rand_index(const Contingency& confusion);
double purity(const Contingency& confusion);

}  // namespace slcgc::cluster
