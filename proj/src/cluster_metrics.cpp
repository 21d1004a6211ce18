#include "slcgc/cluster_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace slcgc::cluster {
namespace {

using Rng = std::mt19937_64;

Rng restart_rng(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  return Rng(seq);
}

// Nearest centroid per point (lowest index on ties); returns the inertia.
double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids, std::vector<int>& labels,
              Eigen::VectorXd& dist2) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
      const double d = (points.row(i) - centroids.row(k)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(k);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    dist2(i) = best;
    inertia += best;
  }
  return inertia;
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& points, int m, Rng& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(m, points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centroids.row(0) = points.row(pick(rng));
  Eigen::VectorXd d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < m; ++k) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2(i);
        if (target < 0 && d2(i) > 0) {
          chosen = i;
          break;
        }
      }
      // Round-off can exhaust the loop; fall back to the last eligible point.
      if (d2(chosen) == 0)
        for (chosen = n - 1; d2(chosen) == 0; --chosen) {
        }
    } else {
      chosen = pick(rng);
    }
    centroids.row(k) = points.row(chosen);
    d2 = d2.cwiseMin((points.rowwise() - centroids.row(k)).rowwise().squaredNorm());
  }
  return centroids;
}

// Recomputes centroids as cluster means. An empty cluster steals the point
// farthest from its centroid among clusters with more than one member.
void update_centroids(const Eigen::MatrixXd& points, std::vector<int>& labels, const Eigen::VectorXd& dist2,
                      Eigen::MatrixXd& centroids) {
  const int m = static_cast<int>(centroids.rows());
  std::vector<long> counts(static_cast<std::size_t>(m), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  Eigen::VectorXd d = dist2;
  for (int k = 0; k < m; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0) continue;
    Eigen::Index far = -1;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] < 2) continue;
      if (far < 0 || d(i) > d(far)) far = i;
    }
    if (far < 0) break;
    --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
    labels[static_cast<std::size_t>(far)] = k;
    counts[static_cast<std::size_t>(k)] = 1;
    d(far) = 0.0;
  }
  centroids.setZero();
  for (Eigen::Index i = 0; i < points.rows(); ++i) centroids.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
  for (int k = 0; k < m; ++k)
    if (counts[static_cast<std::size_t>(k)] > 0) centroids.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
}

double entropy(const std::vector<long>& counts, double n) {
  double h = 0.0;
  for (long c : counts)
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
  return h;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

struct Margins {
  std::vector<long> rows, cols;
  long total = 0;
};

Margins margins(const Contingency& confusion) {
  Margins mg;
  mg.rows.assign(confusion.size(), 0);
  mg.cols.assign(confusion.empty() ? 0 : confusion.front().size(), 0);
  for (std::size_t c = 0; c < confusion.size(); ++c)
    for (std::size_t k = 0; k < confusion[c].size(); ++k) {
      mg.rows[c] += confusion[c][k];
      mg.cols[k] += confusion[c][k];
      mg.total += confusion[c][k];
    }
  return mg;
}

}  // namespace

KmeansResult kmeans(const Eigen::MatrixXd& points, const KmeansParams& params) {
  const Eigen::Index n = points.rows();
  if (params.clusters < 1) throw Error("kmeans: need at least one cluster");
  if (params.clusters > n)
    throw Error("kmeans: m = " + std::to_string(params.clusters) + " exceeds point count " + std::to_string(n));
  if (params.restarts < 1) throw Error("kmeans: restarts must be at least 1");
  if (!points.allFinite()) throw Error("kmeans: non-finite input");

  KmeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < params.restarts; ++r) {
    Rng rng = restart_rng(params.seed, r);
    Eigen::MatrixXd centroids = plus_plus_seeds(points, params.clusters, rng);
    std::vector<int> labels(static_cast<std::size_t>(n));
    Eigen::VectorXd dist2(n);
    KmeansResult run;
    run.inertia = assign(points, centroids, labels, dist2);
    run.inertia_trace.push_back(run.inertia);
    for (int it = 0; it < params.max_iterations; ++it) {
      std::vector<int> before = labels;
      update_centroids(points, labels, dist2, centroids);
      run.inertia = assign(points, centroids, labels, dist2);
      run.inertia_trace.push_back(run.inertia);
      if (labels == before) break;
    }
    run.labels = std::move(labels);
    run.centroids = std::move(centroids);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

Assignment hungarian_map(const Contingency& confusion) {
  const std::size_t classes = confusion.size();
  const std::size_t clusters = classes == 0 ? 0 : confusion.front().size();
  const std::size_t n = std::max(classes, clusters);
  Assignment out;
  out.cluster_to_class.assign(clusters, -1);
  if (n == 0) return out;

  long top = 0;
  for (const auto& row : confusion) {
    if (row.size() != clusters) throw Error("hungarian_map: ragged contingency table");
    for (long v : row) top = std::max(top, v);
  }
  // Minimize top - count on the zero-padded square matrix (1-based arrays).
  auto cost = [&](std::size_t i, std::size_t j) -> long long {
    const long v = (i <= classes && j <= clusters) ? confusion[i - 1][j - 1] : 0;
    return static_cast<long long>(top) - v;
  };
  constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      long long delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= clusters; ++j) {
    const std::size_t i = p[j];
    if (i >= 1 && i <= classes) {
      out.cluster_to_class[j - 1] = static_cast<int>(i - 1);
      out.matched += confusion[i - 1][j - 1];
    }
  }
  return out;
}

double cohen_kappa(const Contingency& confusion, const std::vector<int>& mapping) {
  const Margins mg = margins(confusion);
  if (mg.total == 0) throw Error("cohen_kappa: empty contingency table");
  const auto n = static_cast<double>(mg.total);
  std::vector<long> predicted(confusion.size(), 0);
  long agree = 0;
  for (std::size_t k = 0; k < mapping.size(); ++k) {
    if (mapping[k] < 0) continue;
    predicted[static_cast<std::size_t>(mapping[k])] += mg.cols[k];
    agree += confusion[static_cast<std::size_t>(mapping[k])][k];
  }
  const double po = static_cast<double>(agree) / n;
  double pe = 0.0;
  for (std::size_t c = 0; c < confusion.size(); ++c)
    pe += static_cast<double>(mg.rows[c]) * static_cast<double>(predicted[c]);
  pe /= n * n;
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

double normalized_mutual_information(const Contingency& confusion) {
  const Margins mg = margins(confusion);
  if (mg.total == 0) throw Error("normalized_mutual_information: empty contingency table");
  const auto n = static_cast<double>(mg.total);
  const double hu = entropy(mg.rows, n);
  const double hv = entropy(mg.cols, n);
  if (hu == 0.0 && hv == 0.0) return 1.0;
  double mi = 0.0;
  for (std::size_t c = 0; c < confusion.size(); ++c)
    for (std::size_t k = 0; k < confusion[c].size(); ++k) {
      const long nij = confusion[c][k];
      if (nij == 0) continue;
      const double pij = static_cast<double>(nij) / n;
      mi += pij * std::log(pij * n * n / (static_cast<double>(mg.rows[c]) * static_cast<double>(mg.cols[k])));
    }
  return std::clamp(mi / (0.5 * (hu + hv)), 0.0, 1.0);
}

double adjusted_rand_index(const Contingency& confusion) {
  const Margins mg = margins(confusion);
  double index = 0.0;
  for (const auto& row : confusion)
    for (long v : row) index += choose2(static_cast<double>(v));
  double sum_rows = 0.0;
  double sum_cols = 0.0;
  for (long v : mg.rows) sum_rows += choose2(static_cast<double>(v));
  for (long v : mg.cols) sum_cols += choose2(static_cast<double>(v));
  const double pairs = choose2(static_cast<double>(mg.total));
  const double expected = pairs > 0 ? sum_rows * sum_cols / pairs : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  // Both partitions trivial and identical (all-in-one or all singletons).
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double purity(const Contingency& confusion) {
  const Margins mg = margins(confusion);
  if (mg.total == 0) throw Error("purity: empty contingency table");
  long sum = 0;
  for (std::size_t k = 0; k < mg.cols.size(); ++k) {
    long best = 0;
    for (const auto& row : confusion) best = std::max(best, row[k]);
    sum += best;
  }
  return static_cast<double>(sum) / static_cast<double>(mg.total);
}

MetricsReport compute_metrics(const std::vector<int>& classes, const std::vector<int>& clusters) {
  if (classes.size() != clusters.size())
    throw Error("compute_metrics: " + std::to_string(classes.size()) + " class labels vs " +
                std::to_string(clusters.size()) + " cluster labels");
  int n_classes = 0;
  int n_clusters = 0;
  long evaluated = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] <= 0 || clusters[i] < 0) continue;
    n_classes = std::max(n_classes, classes[i]);
    n_clusters = std::max(n_clusters, clusters[i] + 1);
    ++evaluated;
  }
  if (evaluated == 0) throw Error("compute_metrics: no labeled pixels to evaluate");

  MetricsReport r;
  r.evaluated = evaluated;
  r.confusion.assign(static_cast<std::size_t>(n_classes), std::vector<long>(static_cast<std::size_t>(n_clusters), 0));
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] <= 0 || clusters[i] < 0) continue;
    ++r.confusion[static_cast<std::size_t>(classes[i] - 1)][static_cast<std::size_t>(clusters[i])];
  }

  const Assignment a = hungarian_map(r.confusion);
  r.mapping = a.cluster_to_class;
  const auto n = static_cast<double>(evaluated);
  r.oa = static_cast<double>(a.matched) / n;

  const Margins mg = margins(r.confusion);
  r.pa.assign(static_cast<std::size_t>(n_classes), std::numeric_limits<double>::quiet_NaN());
  std::vector<long> hits(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t k = 0; k < r.mapping.size(); ++k)
    if (r.mapping[k] >= 0) hits[static_cast<std::size_t>(r.mapping[k])] += r.confusion[static_cast<std::size_t>(r.mapping[k])][k];
  for (std::size_t c = 0; c < r.pa.size(); ++c)
    if (mg.rows[c] > 0) r.pa[c] = static_cast<double>(hits[c]) / static_cast<double>(mg.rows[c]);

  r.kappa = cohen_kappa(r.confusion, r.mapping);
  r.nmi = normalized_mutual_information(r.confusion);
  r.ari = adjusted_rand_index(r.confusion);
  r.purity = purity(r.confusion);
  return r;
}

MetricsReport compute_metrics(const ClusterMap& pred, const GroundTruth& gt) {
  if (pred.height != gt.height || pred.width != gt.width)
    throw Error("compute_metrics: prediction is " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                " but ground truth is " + std::to_string(gt.height) + "x" + std::to_string(gt.width));
  return compute_metrics(std::vector<int>(gt.labels.begin(), gt.labels.end()), pred.labels);
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["oa"] = oa;
  j["kappa"] = kappa;
  j["nmi"] = nmi;
  j["ari"] = ari;
  j["purity"] = purity;
  auto pa_json = nlohmann::ordered_json::array();
  for (double v : pa) pa_json.push_back(std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v));
  j["pa"] = std::move(pa_json);
  j["evaluated_pixels"] = evaluated;
  // Cluster id -> 1-based class label, 0 when unmatched.
  auto map_json = nlohmann::ordered_json::array();
  for (int c : mapping) map_json.push_back(c + 1);
  j["mapping"] = std::move(map_json);
  j["confusion"] = confusion;
  return j;
}

}  // namespace slcgc::cluster
