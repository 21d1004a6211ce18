#include "slcgc/hsi_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

namespace slcgc {

int GroundTruth::num_classes() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end());
}

int ClusterMap::num_clusters() const {
  int top = -1;
  for (int l : labels) top = std::max(top, l);
  return top + 1;
}

namespace io {
namespace {

using nlohmann::json;

struct Header {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t bands = 0;
  std::string dtype;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open payload " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

Header read_header(const std::filesystem::path& path, const std::string& expected_dtype) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error("ill-formed header " + path.string() + ": " + e.what());
  }
  Header h;
  try {
    h.height = j.at("height").get<std::size_t>();
    h.width = j.at("width").get<std::size_t>();
    h.bands = j.at("bands").get<std::size_t>();
    h.dtype = j.at("dtype").get<std::string>();
    if (j.contains("order") && j["order"].get<std::string>() != "bip")
      throw Error("unsupported order '" + j["order"].get<std::string>() + "' in " + path.string());
  } catch (const json::exception& e) {
    throw Error("ill-formed header " + path.string() + ": " + e.what());
  }
  if (h.dtype != expected_dtype)
    throw Error("header " + path.string() + " has dtype '" + h.dtype + "', expected '" + expected_dtype + "'");
  if (h.height == 0 || h.width == 0 || h.bands == 0)
    throw Error("header " + path.string() + " declares an empty image");
  return h;
}

void write_header(const std::filesystem::path& path, std::size_t height, std::size_t width,
                  std::size_t bands, const char* dtype) {
  json j = {{"height", height}, {"width", width}, {"bands", bands}, {"dtype", dtype}, {"order", "bip"}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

std::uint32_t read_u32le(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

void check_size(std::size_t got, std::size_t want, const std::filesystem::path& path) {
  if (got != want) {
    throw Error("size mismatch: " + path.string() + " holds " + std::to_string(got) +
                " bytes, header implies " + std::to_string(want));
  }
}

// Fixed 16-colour palette; cluster ids beyond it cycle.
constexpr std::array<std::array<unsigned char, 3>, 16> kPalette{{
    {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},
    {145, 30, 180},  {70, 240, 240},  {240, 50, 230}, {210, 245, 60}, {250, 190, 212},
    {0, 128, 128},   {220, 190, 255}, {170, 110, 40}, {255, 250, 200}, {128, 0, 0},
    {170, 255, 195},
}};

}  // namespace

std::filesystem::path payload_path(const std::filesystem::path& header) {
  auto p = header;
  p.replace_extension(".raw");
  return p;
}

HsiCube load_cube(const std::filesystem::path& header) {
  const Header h = read_header(header, "f32le");
  const auto raw = payload_path(header);
  const auto bytes = read_bytes(raw);
  HsiCube cube(h.height, h.width, h.bands);
  check_size(bytes.size(), cube.values.size() * 4, raw);
  for (std::size_t i = 0; i < cube.values.size(); ++i) {
    const float f = std::bit_cast<float>(read_u32le(bytes.data() + 4 * i));
    if (!std::isfinite(f)) throw Error("non-finite value at index " + std::to_string(i) + " in " + raw.string());
    cube.values[i] = f;
  }
  return cube;
}

void save_cube(const HsiCube& cube, const std::filesystem::path& header) {
  if (cube.values.size() != cube.height * cube.width * cube.bands)
    throw Error("cube value count does not match its dimensions");
  std::vector<unsigned char> bytes(cube.values.size() * 4);
  for (std::size_t i = 0; i < cube.values.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(cube.values[i]));
    for (int k = 0; k < 4; ++k) bytes[4 * i + k] = static_cast<unsigned char>(u >> (8 * k));
  }
  write_header(header, cube.height, cube.width, cube.bands, "f32le");
  write_bytes(payload_path(header), bytes);
}

GroundTruth load_ground_truth(const std::filesystem::path& header) {
  const Header h = read_header(header, "u16le");
  if (h.bands != 1) throw Error("ground truth header " + header.string() + " must declare bands = 1");
  const auto raw = payload_path(header);
  const auto bytes = read_bytes(raw);
  GroundTruth gt{h.height, h.width, std::vector<std::uint16_t>(h.height * h.width)};
  check_size(bytes.size(), gt.labels.size() * 2, raw);
  for (std::size_t i = 0; i < gt.labels.size(); ++i)
    gt.labels[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  if (gt.num_classes() == 0) throw Error("ground truth " + header.string() + " has no labeled pixels");
  return gt;
}

void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& header) {
  if (gt.labels.size() != gt.height * gt.width)
    throw Error("ground truth label count does not match its dimensions");
  std::vector<unsigned char> bytes(gt.labels.size() * 2);
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    bytes[2 * i] = static_cast<unsigned char>(gt.labels[i] & 0xff);
    bytes[2 * i + 1] = static_cast<unsigned char>(gt.labels[i] >> 8);
  }
  write_header(header, gt.height, gt.width, 1, "u16le");
  write_bytes(payload_path(header), bytes);
}

void save_cluster_map(const ClusterMap& map, const std::filesystem::path& path) {
  if (map.labels.size() != map.height * map.width)
    throw Error("cluster map label count does not match its dimensions");
  std::string head = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n65535\n";
  std::vector<unsigned char> bytes(head.begin(), head.end());
  bytes.reserve(head.size() + 2 * map.labels.size());
  for (int l : map.labels) {
    if (l != ClusterMap::kIgnored && (l < 0 || l >= ClusterMap::kStoredIgnored))
      throw Error("cluster label " + std::to_string(l) + " cannot be stored in a 16-bit PGM");
    const int v = l == ClusterMap::kIgnored ? ClusterMap::kStoredIgnored : l;
    // PGM samples are big-endian.
    bytes.push_back(static_cast<unsigned char>(v >> 8));
    bytes.push_back(static_cast<unsigned char>(v & 0xff));
  }
  write_bytes(path, bytes);
}

ClusterMap load_cluster_map(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  std::size_t pos = 0;
  // Reads one whitespace-delimited header token, skipping '#' comments.
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  if (token() != "P5") throw Error(path.string() + " is not a binary PGM (P5)");
  ClusterMap map;
  int maxval = 0;
  try {
    map.width = std::stoul(token());
    map.height = std::stoul(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw Error("ill-formed PGM header in " + path.string());
  }
  ++pos;  // single whitespace byte before the raster
  const std::size_t sample = maxval > 255 ? 2 : 1;
  check_size(bytes.size() - std::min(pos, bytes.size()), map.width * map.height * sample, path);
  map.labels.resize(map.width * map.height);
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    int v = sample == 2 ? (bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1] : bytes[pos + i];
    map.labels[i] = v == ClusterMap::kStoredIgnored ? ClusterMap::kIgnored : v;
  }
  return map;
}

void save_cluster_map_color(const ClusterMap& map, const std::filesystem::path& path) {
  std::string head = "P6\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
  std::vector<unsigned char> bytes(head.begin(), head.end());
  for (int l : map.labels) {
    if (l == ClusterMap::kIgnored) {
      bytes.insert(bytes.end(), {0, 0, 0});
    } else {
      const auto& c = kPalette[static_cast<std::size_t>(l) % kPalette.size()];
      bytes.insert(bytes.end(), c.begin(), c.end());
    }
  }
  write_bytes(path, bytes);
}

}  // namespace io
}  // namespace slcgc
