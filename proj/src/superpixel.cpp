#include "slcgc/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>

namespace slcgc {

std::vector<std::size_t> Segmentation::sizes() const {
  std::vector<std::size_t> n(count, 0);
  for (int a : assignment) ++n[static_cast<std::size_t>(a)];
  return n;
}

namespace superpixel {
namespace {

constexpr int kDr[4] = {0, -1, 0, 1};
constexpr int kDc[4] = {-1, 0, 1, 0};

// Gives every 4-connected component its own label, numbered in raster order
// of first pixel. Returns the component count.
std::size_t relabel_components(std::size_t height, std::size_t width, std::vector<int>& labels) {
  const auto h = static_cast<int>(height);
  const auto w = static_cast<int>(width);
  std::vector<int> fresh(labels.size(), -1);
  std::deque<int> queue;
  int next = 0;
  for (int start = 0; start < h * w; ++start) {
    if (fresh[static_cast<std::size_t>(start)] >= 0) continue;
    const int old = labels[static_cast<std::size_t>(start)];
    queue.assign(1, start);
    fresh[static_cast<std::size_t>(start)] = next;
    while (!queue.empty()) {
      const int p = queue.front();
      queue.pop_front();
      for (int k = 0; k < 4; ++k) {
        const int r = p / w + kDr[k];
        const int c = p % w + kDc[k];
        if (r < 0 || r >= h || c < 0 || c >= w) continue;
        const auto q = static_cast<std::size_t>(r * w + c);
        if (fresh[q] < 0 && labels[q] == old) {
          fresh[q] = next;
          queue.push_back(static_cast<int>(q));
        }
      }
    }
    ++next;
  }
  labels = std::move(fresh);
  return static_cast<std::size_t>(next);
}

// Connectivity enforcement for SLIC output. Each label keeps its largest
// 4-connected component; every other component, and any kept component below
// min_size, is an orphan. Orphans repeatedly merge into the adjacent settled
// segment whose mean feature is nearest (lowest id on ties) until none remain.
std::size_t enforce_connectivity(std::size_t height, std::size_t width, const Eigen::MatrixXd& features,
                                 std::vector<int>& labels, std::size_t min_size) {
  std::vector<int> comp = labels;
  const std::size_t n_comp = relabel_components(height, width, comp);
  const Eigen::Index dim = features.cols();

  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_comp), dim);
  std::vector<std::size_t> size(n_comp, 0);
  for (std::size_t p = 0; p < comp.size(); ++p) {
    const auto c = static_cast<std::size_t>(comp[p]);
    sums.row(static_cast<Eigen::Index>(c)) += features.row(static_cast<Eigen::Index>(p));
    ++size[c];
  }

  std::vector<std::set<int>> neighbours(n_comp);
  auto link = [&](int a, int b) {
    if (a == b) return;
    neighbours[static_cast<std::size_t>(a)].insert(b);
    neighbours[static_cast<std::size_t>(b)].insert(a);
  };
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c) {
      if (c + 1 < width) link(comp[r * width + c], comp[r * width + c + 1]);
      if (r + 1 < height) link(comp[r * width + c], comp[(r + 1) * width + c]);
    }

  // Smallest undersized component first; it joins the adjacent component
  // with the nearest mean feature (lowest id on ties).
  std::vector<int> parent(n_comp);
  std::iota(parent.begin(), parent.end(), 0);
  using Entry = std::pair<std::size_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t c = 0; c < n_comp; ++c)
    if (size[c] < min_size) queue.emplace(size[c], static_cast<int>(c));
  while (!queue.empty()) {
    const auto [sz, id] = queue.top();
    queue.pop();
    const auto c = static_cast<std::size_t>(id);
    if (parent[c] != id || size[c] != sz || neighbours[c].empty()) continue;
    const Eigen::RowVectorXd mean = sums.row(id) / static_cast<double>(size[c]);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int nb : neighbours[c]) {
      const double d = (sums.row(nb) / static_cast<double>(size[static_cast<std::size_t>(nb)]) - mean).squaredNorm();
      if (d < best_d || (d == best_d && nb < best)) {
        best_d = d;
        best = nb;
      }
    }
    const auto t = static_cast<std::size_t>(best);
    parent[c] = best;
    sums.row(best) += sums.row(id);
    size[t] += size[c];
    neighbours[t].erase(id);
    for (int nb : neighbours[c]) {
      if (nb == best) continue;
      auto& other = neighbours[static_cast<std::size_t>(nb)];
      other.erase(id);
      other.insert(best);
      neighbours[t].insert(nb);
    }
    neighbours[c].clear();
    if (size[t] < min_size) queue.emplace(size[t], best);
  }

  auto root = [&](int c) {
    while (parent[static_cast<std::size_t>(c)] != c) c = parent[static_cast<std::size_t>(c)];
    return c;
  };
  std::vector<int> id(n_comp, -1);
  int next = 0;
  for (std::size_t p = 0; p < comp.size(); ++p) {
    const auto r = static_cast<std::size_t>(root(comp[p]));
    if (id[r] < 0) id[r] = next++;
    labels[p] = id[r];
  }
  return static_cast<std::size_t>(next);
}

void check_segmentation(const Segmentation& seg) {
  if (seg.assignment.size() != seg.pixels())
    throw Error("segmentation size " + std::to_string(seg.assignment.size()) + " does not match " +
                std::to_string(seg.height) + "x" + std::to_string(seg.width));
}

}  // namespace

std::size_t default_segment_count(std::size_t pixels) { return std::max<std::size_t>(1, (pixels + 99) / 100); }

Segmentation slic(const ReducedImage& img, const SlicParams& params) {
  const std::size_t n_pixels = img.height * img.width;
  if (static_cast<std::size_t>(img.values.rows()) != n_pixels)
    throw Error("slic: reduced image rows do not match its dimensions");
  if (params.n_segments == 0) throw Error("slic: n_segments must be at least 1");
  if (params.n_segments > n_pixels)
    throw Error("slic: n_segments = " + std::to_string(params.n_segments) + " exceeds pixel count " +
                std::to_string(n_pixels));
  if (!(params.compactness > 0)) throw Error("slic: compactness must be positive");

  const auto h = static_cast<int>(img.height);
  const auto w = static_cast<int>(img.width);
  const auto n_req = static_cast<double>(params.n_segments);
  const double s = std::sqrt(static_cast<double>(n_pixels) / n_req);

  // Grid with roughly square cells and ny * nx close to n_segments.
  const int ny = std::clamp(static_cast<int>(std::lround(std::sqrt(n_req * h / w))), 1, h);
  const int nx = std::clamp(static_cast<int>(std::lround(n_req / ny)), 1, w);
  const double step_y = static_cast<double>(h) / ny;
  const double step_x = static_cast<double>(w) / nx;
  const int n_centers = nx * ny;
  const Eigen::Index dim = img.values.cols();

  Eigen::MatrixXd feat(n_centers, dim);
  Eigen::VectorXd cy(n_centers), cx(n_centers);
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      const int k = i * nx + j;
      // Cell centers in pixel-index coordinates, the frame the update uses.
      cy(k) = (i + 0.5) * step_y - 0.5;
      cx(k) = (j + 0.5) * step_x - 0.5;
      const int py = std::clamp(static_cast<int>(std::lround(cy(k))), 0, h - 1);
      const int px = std::clamp(static_cast<int>(std::lround(cx(k))), 0, w - 1);
      feat.row(k) = img.values.row(py * w + px);
    }
  }

  const double spatial_weight = (params.compactness / s) * (params.compactness / s);
  const double radius_y = std::max(s, step_y);
  const double radius_x = std::max(s, step_x);

  std::vector<int> labels(n_pixels, -1);
  std::vector<double> dist(n_pixels);
  auto distance2 = [&](int k, int r, int c) {
    const double dy = r - cy(k);
    const double dx = c - cx(k);
    return (img.values.row(r * w + c) - feat.row(k)).squaredNorm() + (dy * dy + dx * dx) * spatial_weight;
  };

  for (int iter = 0; iter < std::max(1, params.iterations); ++iter) {
    std::fill(labels.begin(), labels.end(), -1);
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    for (int k = 0; k < n_centers; ++k) {
      const int r_lo = std::max(0, static_cast<int>(std::floor(cy(k) - radius_y)));
      const int r_hi = std::min(h - 1, static_cast<int>(std::ceil(cy(k) + radius_y)));
      const int c_lo = std::max(0, static_cast<int>(std::floor(cx(k) - radius_x)));
      const int c_hi = std::min(w - 1, static_cast<int>(std::ceil(cx(k) + radius_x)));
      for (int r = r_lo; r <= r_hi; ++r) {
        for (int c = c_lo; c <= c_hi; ++c) {
          const double d = distance2(k, r, c);
          const auto p = static_cast<std::size_t>(r * w + c);
          if (d < dist[p]) {
            dist[p] = d;
            labels[p] = k;
          }
        }
      }
    }
    // Pixels outside every window fall back to a global search.
    for (std::size_t p = 0; p < n_pixels; ++p) {
      if (labels[p] >= 0) continue;
      const int r = static_cast<int>(p) / w;
      const int c = static_cast<int>(p) % w;
      for (int k = 0; k < n_centers; ++k) {
        const double d = distance2(k, r, c);
        if (d < dist[p]) {
          dist[p] = d;
          labels[p] = k;
        }
      }
    }

    Eigen::MatrixXd sum_feat = Eigen::MatrixXd::Zero(n_centers, dim);
    Eigen::VectorXd sum_y = Eigen::VectorXd::Zero(n_centers);
    Eigen::VectorXd sum_x = Eigen::VectorXd::Zero(n_centers);
    std::vector<std::size_t> members(static_cast<std::size_t>(n_centers), 0);
    for (std::size_t p = 0; p < n_pixels; ++p) {
      const int k = labels[p];
      sum_feat.row(k) += img.values.row(static_cast<Eigen::Index>(p));
      sum_y(k) += static_cast<double>(p / img.width);
      sum_x(k) += static_cast<double>(p % img.width);
      ++members[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < n_centers; ++k) {
      const auto n = static_cast<double>(members[static_cast<std::size_t>(k)]);
      if (n == 0) continue;
      feat.row(k) = sum_feat.row(k) / n;
      cy(k) = sum_y(k) / n;
      cx(k) = sum_x(k) / n;
    }
  }

  Segmentation seg{img.height, img.width, std::move(labels), 0};
  if (params.enforce_connectivity) {
    const std::size_t min_size = std::max<std::size_t>(1, n_pixels / static_cast<std::size_t>(n_centers) / 4);
    seg.count = enforce_connectivity(seg.height, seg.width, img.values, seg.assignment, min_size);
  } else {
    seg = from_labels(seg.height, seg.width, seg.assignment);
  }
  return seg;
}

Segmentation from_labels(std::size_t height, std::size_t width, std::span<const int> labels) {
  if (labels.size() != height * width)
    throw Error("from_labels: " + std::to_string(labels.size()) + " labels for a " + std::to_string(height) + "x" +
                std::to_string(width) + " image");
  Segmentation seg{height, width, std::vector<int>(labels.size()), 0};
  std::unordered_map<int, int> ids;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    auto [it, fresh] = ids.try_emplace(labels[p], static_cast<int>(ids.size()));
    seg.assignment[p] = it->second;
  }
  seg.count = ids.size();
  return seg;
}

Segmentation per_pixel(std::size_t height, std::size_t width) {
  Segmentation seg{height, width, std::vector<int>(height * width), height * width};
  for (std::size_t p = 0; p < seg.assignment.size(); ++p) seg.assignment[p] = static_cast<int>(p);
  return seg;
}

Segmentation split_disconnected(const Segmentation& seg) {
  check_segmentation(seg);
  Segmentation out = seg;
  out.count = relabel_components(out.height, out.width, out.assignment);
  return out;
}

SparseMatrix build_adjacency(const Segmentation& seg) {
  check_segmentation(seg);
  std::vector<std::pair<int, int>> pairs;
  const std::size_t w = seg.width;
  for (std::size_t r = 0; r < seg.height; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const int a = seg.assignment[r * w + c];
      if (c + 1 < w && seg.assignment[r * w + c + 1] != a) pairs.emplace_back(a, seg.assignment[r * w + c + 1]);
      if (r + 1 < seg.height && seg.assignment[(r + 1) * w + c] != a)
        pairs.emplace_back(a, seg.assignment[(r + 1) * w + c]);
    }
  }
  for (auto& [a, b] : pairs)
    if (a > b) std::swap(a, b);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * pairs.size());
  for (const auto& [a, b] : pairs) {
    triplets.emplace_back(a, b, 1.0);
    triplets.emplace_back(b, a, 1.0);
  }
  const auto n = static_cast<Eigen::Index>(seg.count);
  SparseMatrix adj(n, n);
  adj.setFromTriplets(triplets.begin(), triplets.end());
  return adj;
}

SparseMatrix correlation_matrix(const Segmentation& seg) {
  check_segmentation(seg);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(seg.pixels());
  for (std::size_t p = 0; p < seg.pixels(); ++p)
    triplets.emplace_back(static_cast<Eigen::Index>(p), seg.assignment[p], 1.0);
  SparseMatrix q(static_cast<Eigen::Index>(seg.pixels()), static_cast<Eigen::Index>(seg.count));
  q.setFromTriplets(triplets.begin(), triplets.end());
  return q;
}

SparseMatrix normalized_correlation(const Segmentation& seg) {
  SparseMatrix q = correlation_matrix(seg);
  const auto sizes = seg.sizes();
  for (Eigen::Index row = 0; row < q.outerSize(); ++row)
    for (SparseMatrix::InnerIterator it(q, row); it; ++it)
      it.valueRef() /= static_cast<double>(sizes[static_cast<std::size_t>(it.col())]);
  return q;
}

Eigen::MatrixXd project(const HsiCube& cube, const Segmentation& seg) {
  if (cube.height != seg.height || cube.width != seg.width)
    throw Error("project: cube and segmentation dimensions differ");
  const SparseMatrix q_hat = normalized_correlation(seg);
  return q_hat.transpose() * preprocess::pixel_matrix(cube);
}

ClusterMap backproject(std::span<const int> node_labels, const Segmentation& seg) {
  check_segmentation(seg);
  if (node_labels.size() != seg.count)
    throw Error("backproject: " + std::to_string(node_labels.size()) + " labels for " + std::to_string(seg.count) +
                " segments");
  ClusterMap map{seg.height, seg.width, std::vector<int>(seg.pixels())};
  for (std::size_t p = 0; p < seg.pixels(); ++p) map.labels[p] = node_labels[static_cast<std::size_t>(seg.assignment[p])];
  return map;
}

}  // namespace superpixel
}  // namespace slcgc
