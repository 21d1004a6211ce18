// slcgc: self-supervised hyperspectral clustering from the command line.
//
//   slcgc run   --cube c.json [--gt g.json] --out dir [hyperparameters...]
//   slcgc eval  --pred p.pgm --gt g.json [--out metrics.json]
//   slcgc synth --out dir [--seed S ...]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "slcgc/cluster_metrics.hpp"
#include "slcgc/hsi_io.hpp"
#include "slcgc/pipeline.hpp"

namespace fs = std::filesystem;
using namespace slcgc;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("ill-formed config " + path.string() + ": " + e.what());
  }
}

// Values bound to CLI flags; applied on top of the config file only when the
// flag was given.
struct RunFlags {
  std::string cube, gt, out, config;
  int epochs = 0, filter_layers = 0, hidden_dim = 0, output_dim = 0, clusters = 0, restarts = 0;
  int slic_iterations = 0, kmeans_iterations = 0;
  double lr = 0, filter_k = 0, sigma = 0, compactness = 0;
  std::size_t n_superpixels = 0, reduce_components = 0;
  std::uint64_t seed = 0;
  std::string ablate, reduce, laplacian, activation;
  bool force = false, noisy_inference = false, color = false;
};

int cmd_run(const RunFlags& f, CLI::App& sub) {
  pipeline::RunConfig cfg;
  if (!f.config.empty()) cfg = pipeline::RunConfig::from_json(read_json(f.config));

  nlohmann::json overrides = nlohmann::json::object();
  auto given = [&](const char* flag) { return sub.count(flag) > 0; };
  if (given("--epochs")) overrides["epochs"] = f.epochs;
  if (given("--lr")) overrides["lr"] = f.lr;
  if (given("--filter-layers")) overrides["filter_layers"] = f.filter_layers;
  if (given("--filter-k")) overrides["filter_k"] = f.filter_k;
  if (given("--noise-sigma")) overrides["noise_sigma"] = f.sigma;
  if (given("--hidden-dim")) {
    overrides["hidden_dim"] = f.hidden_dim;
    overrides["output_dim"] = f.hidden_dim;
  }
  if (given("--output-dim")) overrides["output_dim"] = f.output_dim;
  if (given("--activation")) overrides["activation"] = f.activation;
  if (given("--noisy-inference")) overrides["noisy_inference"] = f.noisy_inference;
  if (given("--n-superpixels")) overrides["n_superpixels"] = f.n_superpixels;
  if (given("--compactness")) overrides["compactness"] = f.compactness;
  if (given("--slic-iterations")) overrides["slic_iterations"] = f.slic_iterations;
  if (given("--reduce-components")) overrides["reduce_components"] = f.reduce_components;
  if (given("--reduce")) overrides["reduce"] = f.reduce;
  if (given("--laplacian")) overrides["laplacian"] = f.laplacian;
  if (given("--clusters")) overrides["clusters"] = f.clusters;
  if (given("--restarts")) overrides["restarts"] = f.restarts;
  if (given("--kmeans-iterations")) overrides["kmeans_iterations"] = f.kmeans_iterations;
  if (given("--seed")) overrides["seed"] = f.seed;
  if (given("--ablate")) overrides["ablate"] = f.ablate;
  if (given("--force")) overrides["force"] = f.force;
  cfg = pipeline::RunConfig::from_json(overrides, cfg);

  const HsiCube cube = io::load_cube(f.cube);
  std::optional<GroundTruth> gt;
  if (!f.gt.empty()) gt = io::load_ground_truth(f.gt);

  const fs::path out(f.out);
  fs::create_directories(out);

  const pipeline::RunResult result = pipeline::run(cube, gt ? &*gt : nullptr, cfg);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

  io::save_cluster_map(result.cluster_map, out / "clusters.pgm");
  if (f.color) io::save_cluster_map_color(result.cluster_map, out / "clusters_color.ppm");
  if (result.training) write_text(out / "loss.csv", pipeline::loss_csv(result.training->loss_history));
  if (result.metrics) write_text(out / "metrics.json", result.metrics->to_json().dump(2) + "\n");

  auto manifest = result.manifest();
  manifest["inputs"] = {{"cube", fs::absolute(f.cube).string()},
                        {"gt", f.gt.empty() ? std::string() : fs::absolute(f.gt).string()}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "nodes " << result.nodes << ", edges " << result.edges << '\n';
  if (result.metrics) {
    const auto& m = *result.metrics;
    std::cout << "OA " << m.oa << "  kappa " << m.kappa << "  NMI " << m.nmi << "  ARI " << m.ari << "  purity "
              << m.purity << '\n';
  }
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path, const std::string& out_path) {
  const ClusterMap pred = io::load_cluster_map(pred_path);
  const GroundTruth gt = io::load_ground_truth(gt_path);
  const std::string text = cluster::compute_metrics(pred, gt).to_json().dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superpixel graph contrastive clustering of hyperspectral cubes"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run the full clustering pipeline on a cube");
  run->add_option("--cube", rf.cube, "Cube header (.json)")->required()->check(CLI::ExistingFile);
  run->add_option("--gt", rf.gt, "Ground-truth header (.json)")->check(CLI::ExistingFile);
  run->add_option("--out", rf.out, "Output directory")->required();
  run->add_option("--config", rf.config, "JSON run config; flags override it")->check(CLI::ExistingFile);
  run->add_option("--epochs", rf.epochs, "Training iterations T (400)");
  run->add_option("--lr", rf.lr, "Adam learning rate (1e-3)");
  run->add_option("--filter-layers", rf.filter_layers, "Low-pass filter layers t (2)");
  run->add_option("--filter-k", rf.filter_k, "Filter coefficient k in (0, 0.5] (0.5)");
  run->add_option("--noise-sigma", rf.sigma, "Gaussian noise std (0.01)");
  run->add_option("--hidden-dim", rf.hidden_dim, "MLP hidden and output width (500)");
  run->add_option("--output-dim", rf.output_dim, "MLP output width, overrides --hidden-dim");
  run->add_option("--activation", rf.activation, "relu|none (relu)");
  run->add_flag("--noisy-inference", rf.noisy_inference, "Keep the noise on the final branch-1 embedding");
  run->add_option("--n-superpixels", rf.n_superpixels, "Requested superpixel count (ceil(HW/100))");
  run->add_option("--compactness", rf.compactness, "SLIC compactness (0.1)");
  run->add_option("--slic-iterations", rf.slic_iterations, "SLIC iterations (10)");
  run->add_option("--reduce-components", rf.reduce_components, "Components fed to SLIC (3)");
  run->add_option("--clusters", rf.clusters, "Cluster count m (ground-truth class count)");
  run->add_option("--restarts", rf.restarts, "k-means restarts (10)");
  run->add_option("--kmeans-iterations", rf.kmeans_iterations, "Lloyd iteration cap (300)");
  run->add_option("--seed", rf.seed, "RNG seed (0)");
  run->add_option("--ablate", rf.ablate, "Comma list of stages to switch off: ghr,lgd,gscl,noise");
  run->add_option("--reduce", rf.reduce, "pca|lda (pca)");
  run->add_option("--laplacian", rf.laplacian, "selfloop|raw (selfloop)");
  run->add_flag("--force", rf.force, "Allow pixel-level graphs above 1e5 nodes");
  run->add_flag("--color", rf.color, "Also write clusters_color.ppm");

  std::string pred, eval_gt, eval_out;
  auto* eval = app.add_subcommand("eval", "Score an existing cluster map against ground truth");
  eval->add_option("--pred", pred, "Cluster map (.pgm)")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", eval_gt, "Ground-truth header (.json)")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "Write metrics JSON here instead of stdout");

  synthetic::FixtureParams sp;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write the three-region synthetic cube and ground truth");
  synth->add_option("--out", synth_out, "Output directory (writes cube.json/raw, gt.json/raw)")->required();
  synth->add_option("--height", sp.height, "Rows (30)");
  synth->add_option("--width", sp.width, "Columns (30)");
  synth->add_option("--bands", sp.bands, "Bands (10)");
  synth->add_option("--separation", sp.separation, "Per-band class separation (0.25)");
  synth->add_option("--noise", sp.noise_std, "Per-band noise std (0.05)");
  synth->add_option("--seed", sp.seed, "RNG seed (0)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(rf, *run);
    if (eval->parsed()) return cmd_eval(pred, eval_gt, eval_out);
    if (synth->parsed()) {
      const fs::path out(synth_out);
      fs::create_directories(out);
      const auto f = synthetic::three_regions(sp);
      io::save_cube(f.cube, out / "cube.json");
      io::save_ground_truth(f.gt, out / "gt.json");
      std::cout << "wrote " << (out / "cube.json").string() << " and " << (out / "gt.json").string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
