#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slcgc/error.hpp"

namespace slcgc {

/// Dense h x w x b spectral image. Values are row-major and pixel-interleaved:
/// all bands of pixel (0,0), then pixel (0,1), ...
struct HsiCube {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 0;
  std::vector<double> values;

  HsiCube() = default;
  HsiCube(std::size_t h, std::size_t w, std::size_t b)
      : height(h), width(w), bands(b), values(h * w * b, 0.0) {}

  std::size_t pixels() const { return height * width; }

  double& at(std::size_t row, std::size_t col, std::size_t band) {
    return values[(row * width + col) * bands + band];
  }
  double at(std::size_t row, std::size_t col, std::size_t band) const {
    return values[(row * width + col) * bands + band];
  }
};

/// Per-pixel class labels; 0 is unlabeled, 1..C are classes.
struct GroundTruth {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint16_t> labels;

  std::size_t pixels() const { return height * width; }
  /// Number of classes C, taken as the largest label present.
  int num_classes() const;
};

/// Per-pixel cluster ids in [0, m), or kIgnored for pixels excluded from
/// evaluation.
struct ClusterMap {
  static constexpr int kIgnored = -1;
  /// On-disk value of kIgnored; also the exclusive upper bound on labels.
  static constexpr int kStoredIgnored = 65535;

  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> labels;

  std::size_t pixels() const { return height * width; }
  /// One past the largest non-ignored label (0 when every pixel is ignored).
  int num_clusters() const;

  friend bool operator==(const ClusterMap&, const ClusterMap&) = default;
};

namespace io {

/// Path of the raw payload that belongs to a JSON header (`x.json` -> `x.raw`).
std::filesystem::path payload_path(const std::filesystem::path& header);

// Cubes: JSON sidecar {"height","width","bands","dtype":"f32le","order":"bip"}
// plus a raw little-endian float32 payload of exactly H*W*B*4 bytes.
HsiCube load_cube(const std::filesystem::path& header);
void save_cube(const HsiCube& cube, const std::filesystem::path& header);

// Ground truth: same sidecar with "dtype":"u16le","bands":1 and an H*W*2 byte
// payload.
GroundTruth load_ground_truth(const std::filesystem::path& header);
void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& header);

// Cluster maps: binary PGM (P5) with maxval 65535; kIgnored is stored as 65535.
void save_cluster_map(const ClusterMap& map, const std::filesystem::path& path);
ClusterMap load_cluster_map(const std::filesystem::path& path);

/// Fixed-palette 8-bit RGB rendering of a cluster map (binary PPM, P6).
/// Ignored pixels are black.
void save_cluster_map_color(const ClusterMap& map, const std::filesystem::path& path);

}  // namespace io
}  // namespace slcgc
