#include "slcgc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "slcgc/preprocess.hpp"

namespace slcgc::pipeline {
namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
auto timed_stage(RunResult& result, const char* name, F&& body) {
  const auto start = Clock::now();
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      result.timings.push_back({name, std::chrono::duration<double>(Clock::now() - start).count()});
    } else {
      auto value = body();
      result.timings.push_back({name, std::chrono::duration<double>(Clock::now() - start).count()});
      return value;
    }
  } catch (const std::exception& e) {
    throw Error(std::string("stage ") + name + ": " + e.what());
  }
}

const char* to_string(Reducer r) { return r == Reducer::kPca ? "pca" : "lda"; }
const char* to_string(graph::LaplacianSource s) { return s == graph::LaplacianSource::kSelfLoop ? "selfloop" : "raw"; }
const char* to_string(contrastive::Activation a) { return a == contrastive::Activation::kRelu ? "relu" : "none"; }

Reducer parse_reducer(const std::string& s) {
  if (s == "pca") return Reducer::kPca;
  if (s == "lda") return Reducer::kLda;
  throw Error("unknown reducer '" + s + "' (expected pca or lda)");
}

graph::LaplacianSource parse_laplacian(const std::string& s) {
  if (s == "selfloop") return graph::LaplacianSource::kSelfLoop;
  if (s == "raw") return graph::LaplacianSource::kRaw;
  throw Error("unknown laplacian '" + s + "' (expected selfloop or raw)");
}

contrastive::Activation parse_activation(const std::string& s) {
  if (s == "relu") return contrastive::Activation::kRelu;
  if (s == "none") return contrastive::Activation::kNone;
  throw Error("unknown activation '" + s + "' (expected relu or none)");
}

}  // namespace

Ablations Ablations::parse(const std::string& list) {
  Ablations a;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "ghr") a.ghr = true;
    else if (item == "lgd") a.lgd = true;
    else if (item == "gscl") a.gscl = true;
    else if (item == "noise") a.noise = true;
    else throw Error("unknown ablation '" + item + "' (expected ghr, lgd, gscl or noise)");
  }
  return a;
}

std::string Ablations::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(ghr, "ghr");
  add(lgd, "lgd");
  add(gscl, "gscl");
  add(noise, "noise");
  return out;
}

nlohmann::ordered_json RunConfig::to_json() const {
  return {
      {"epochs", epochs},
      {"lr", lr},
      {"filter_layers", filter_layers},
      {"filter_k", filter_k},
      {"noise_sigma", noise_sigma},
      {"hidden_dim", hidden_dim},
      {"output_dim", output_dim},
      {"activation", pipeline::to_string(activation)},
      {"noisy_inference", noisy_inference},
      {"n_superpixels", n_superpixels},
      {"compactness", compactness},
      {"slic_iterations", slic_iterations},
      {"reduce_components", reduce_components},
      {"reduce", pipeline::to_string(reducer)},
      {"laplacian", pipeline::to_string(laplacian)},
      {"clusters", clusters},
      {"restarts", restarts},
      {"kmeans_iterations", kmeans_iterations},
      {"seed", seed},
      {"ablate", ablate.to_string()},
      {"force", force},
  };
}

RunConfig RunConfig::from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw Error("run config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "filter_layers") c.filter_layers = value.get<int>();
      else if (key == "filter_k") c.filter_k = value.get<double>();
      else if (key == "noise_sigma") c.noise_sigma = value.get<double>();
      else if (key == "hidden_dim") c.hidden_dim = value.get<int>();
      else if (key == "output_dim") c.output_dim = value.get<int>();
      else if (key == "activation") c.activation = parse_activation(value.get<std::string>());
      else if (key == "noisy_inference") c.noisy_inference = value.get<bool>();
      else if (key == "n_superpixels") c.n_superpixels = value.get<std::size_t>();
      else if (key == "compactness") c.compactness = value.get<double>();
      else if (key == "slic_iterations") c.slic_iterations = value.get<int>();
      else if (key == "reduce_components") c.reduce_components = value.get<std::size_t>();
      else if (key == "reduce") c.reducer = parse_reducer(value.get<std::string>());
      else if (key == "laplacian") c.laplacian = parse_laplacian(value.get<std::string>());
      else if (key == "clusters") c.clusters = value.get<int>();
      else if (key == "restarts") c.restarts = value.get<int>();
      else if (key == "kmeans_iterations") c.kmeans_iterations = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "ablate") c.ablate = Ablations::parse(value.get<std::string>());
      else if (key == "force") c.force = value.get<bool>();
      else throw Error("unknown run config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("ill-typed run config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) { return from_json(j, RunConfig{}); }

nlohmann::ordered_json RunResult::manifest() const {
  nlohmann::ordered_json m;
  m["config"] = effective.to_json();
  m["seed"] = effective.seed;
  m["nodes"] = nodes;
  m["edges"] = edges;
  if (training) {
    m["initial_loss"] = training->loss_history.front();
    m["last_training_loss"] = training->loss_history.back();
    m["final_loss"] = training->final_loss;
  }
  m["kmeans_inertia"] = kmeans.inertia;
  auto t = nlohmann::ordered_json::array();
  double total = 0.0;
  for (const auto& s : timings) {
    t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    total += s.seconds;
  }
  m["timings"] = std::move(t);
  m["total_seconds"] = total;
  m["warnings"] = warnings;
  return m;
}

RunResult run(const HsiCube& cube, const GroundTruth* gt, const RunConfig& cfg) {
  RunResult result;
  RunConfig eff = cfg;
  if (eff.ablate.lgd) eff.filter_layers = 0;
  if (eff.ablate.noise) eff.noise_sigma = 0.0;
  if (cube.values.size() != cube.pixels() * cube.bands || cube.pixels() == 0)
    throw Error("stage input: cube is empty or inconsistent");
  if (gt && (gt->height != cube.height || gt->width != cube.width))
    throw Error("stage input: ground truth is " + std::to_string(gt->height) + "x" + std::to_string(gt->width) +
                " but the cube is " + std::to_string(cube.height) + "x" + std::to_string(cube.width));
  if (eff.clusters <= 0) {
    if (!gt) throw Error("stage input: cluster count not given and no ground truth to infer it from");
    eff.clusters = gt->num_classes();
  }
  if (eff.n_superpixels == 0) eff.n_superpixels = superpixel::default_segment_count(cube.pixels());

  const HsiCube normalized = timed_stage(result, "normalize", [&] { return preprocess::normalize_bands(cube); });

  if (eff.ablate.ghr) {
    if (cube.pixels() > kLargeGraphNodes && !eff.force)
      throw Error("stage segment: pixel-level graph has " + std::to_string(cube.pixels()) +
                  " nodes; pass --force to run it anyway");
    if (cube.pixels() > kLargeGraphNodes)
      result.warnings.push_back("pixel-level graph with " + std::to_string(cube.pixels()) + " nodes");
    result.segmentation = superpixel::per_pixel(cube.height, cube.width);
  } else {
    const ReducedImage reduced = timed_stage(result, "reduce", [&] {
      if (eff.reducer == Reducer::kLda) {
        if (!gt) throw Error("LDA reduction needs ground truth");
        const std::size_t r = std::min<std::size_t>(eff.reduce_components, static_cast<std::size_t>(gt->num_classes() - 1));
        return preprocess::reduce_supervised(normalized, *gt, std::max<std::size_t>(r, 1));
      }
      return preprocess::reduce_unsupervised(normalized, std::min(eff.reduce_components, cube.bands));
    });
    result.segmentation = timed_stage(result, "slic", [&] {
      superpixel::SlicParams p;
      p.n_segments = eff.n_superpixels;
      p.compactness = eff.compactness;
      p.iterations = eff.slic_iterations;
      return superpixel::slic(reduced, p);
    });
  }
  result.nodes = result.segmentation.count;

  SparseMatrix adjacency;
  Eigen::MatrixXd features;
  timed_stage(result, "graph", [&] {
    adjacency = superpixel::build_adjacency(result.segmentation);
    features = superpixel::project(normalized, result.segmentation);
  });
  result.edges = static_cast<std::size_t>(adjacency.nonZeros() / 2);

  const SparseMatrix a_hat = graph::self_loop(adjacency);
  result.filtered = timed_stage(result, "filter", [&] {
    graph::FilterConfig fc{eff.filter_k, eff.filter_layers};
    fc.validate();
    if (fc.layers == 0) return features;
    const SparseMatrix lap = graph::sym_norm_laplacian(
        eff.laplacian == graph::LaplacianSource::kSelfLoop ? a_hat : adjacency);
    return graph::low_pass_filter(features, lap, fc);
  });

  Eigen::MatrixXd embedding;
  if (eff.ablate.gscl) {
    embedding = result.filtered;
  } else {
    result.training = timed_stage(result, "train", [&] {
      contrastive::TrainConfig tc;
      tc.iterations = eff.epochs;
      tc.lr = eff.lr;
      tc.sigma = eff.noise_sigma;
      tc.seed = eff.seed;
      tc.hidden_dim = eff.hidden_dim;
      tc.output_dim = eff.output_dim;
      tc.activation = eff.activation;
      tc.noisy_inference = eff.noisy_inference;
      return contrastive::train(result.filtered, a_hat, tc);
    });
    embedding = result.training->embeddings.fused;
  }

  result.kmeans = timed_stage(result, "kmeans", [&] {
    cluster::KmeansParams kp;
    kp.clusters = eff.clusters;
    kp.restarts = eff.restarts;
    kp.max_iterations = eff.kmeans_iterations;
    kp.seed = eff.seed;
    return cluster::kmeans(embedding, kp);
  });

  result.cluster_map = timed_stage(result, "backproject",
                                   [&] { return superpixel::backproject(result.kmeans.labels, result.segmentation); });

  if (gt) {
    result.metrics = timed_stage(result, "metrics", [&] { return cluster::compute_metrics(result.cluster_map, *gt); });
  }
  result.effective = eff;
  return result;
}

std::string loss_csv(const std::vector<double>& history) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) out << (i + 1) << ',' << history[i] << '\n';
  return out.str();
}

}  // namespace slcgc::pipeline

namespace slcgc::synthetic {

Fixture three_regions(const FixtureParams& p) {
  if (p.height < 2 || p.width < 3 || p.bands < 3) throw Error("three_regions: image too small");
  Fixture f{HsiCube(p.height, p.width, p.bands), GroundTruth{p.height, p.width, {}}};
  f.gt.labels.resize(p.height * p.width);

  // Class c spectrum: smooth base, raised by `separation` on bands b with
  // b % 3 == c. No class spectrum is a mixture of the other two.
  std::vector<std::vector<double>> spectra(3, std::vector<double>(p.bands));
  for (std::size_t b = 0; b < p.bands; ++b) {
    const double base = 0.5 + 0.15 * std::sin(2.0 * M_PI * static_cast<double>(b) / static_cast<double>(p.bands));
    for (std::size_t c = 0; c < 3; ++c) spectra[c][b] = base + (b % 3 == c ? p.separation : 0.0);
  }

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, p.noise_std);
  const std::size_t split_col = p.width / 2;
  const std::size_t split_row = p.height / 2;
  for (std::size_t r = 0; r < p.height; ++r) {
    for (std::size_t c = 0; c < p.width; ++c) {
      const int cls = c < split_col ? 1 : (r < split_row ? 2 : 3);
      f.gt.labels[r * p.width + c] = static_cast<std::uint16_t>(cls);
      for (std::size_t b = 0; b < p.bands; ++b)
        f.cube.at(r, c, b) = spectra[static_cast<std::size_t>(cls - 1)][b] + (p.noise_std > 0 ? noise(rng) : 0.0);
    }
  }
  return f;
}

}  // namespace slcgc::synthetic
