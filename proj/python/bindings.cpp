// Python bindings. Cubes cross the boundary as (height, width, bands) float64
// arrays, label maps as (height, width) int arrays.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "slcgc/cluster_metrics.hpp"
#include "slcgc/graph_filter.hpp"
#include "slcgc/hsi_io.hpp"
#include "slcgc/pipeline.hpp"
#include "slcgc/preprocess.hpp"
#include "slcgc/superpixel.hpp"

namespace py = pybind11;
using namespace slcgc;

namespace {

using CubeArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

HsiCube to_cube(const CubeArray& a) {
  if (a.ndim() != 3) throw Error("cube must be a (height, width, bands) array");
  HsiCube cube(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
               static_cast<std::size_t>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), cube.values.begin());
  return cube;
}

CubeArray from_cube(const HsiCube& cube) {
  CubeArray out({cube.height, cube.width, cube.bands});
  std::copy(cube.values.begin(), cube.values.end(), out.mutable_data());
  return out;
}

template <typename T>
py::array_t<int> image_of(const std::vector<T>& v, std::size_t h, std::size_t w) {
  py::array_t<int> out({h, w});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<int> flat_labels(const LabelArray& a, std::size_t* h, std::size_t* w) {
  if (a.ndim() != 2) throw Error("label map must be a (height, width) array");
  *h = static_cast<std::size_t>(a.shape(0));
  *w = static_cast<std::size_t>(a.shape(1));
  return {a.data(), a.data() + a.size()};
}

GroundTruth to_ground_truth(const LabelArray& a) {
  GroundTruth gt;
  const auto flat = flat_labels(a, &gt.height, &gt.width);
  gt.labels.reserve(flat.size());
  for (int v : flat) {
    if (v < 0 || v > 65535) throw Error("ground-truth labels must fit in 16 bits");
    gt.labels.push_back(static_cast<std::uint16_t>(v));
  }
  return gt;
}

Segmentation to_segmentation(const LabelArray& a) {
  std::size_t h = 0, w = 0;
  const auto flat = flat_labels(a, &h, &w);
  return superpixel::from_labels(h, w, flat);
}

py::object json_to_py(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict metrics_dict(const cluster::MetricsReport& m) { return json_to_py(m.to_json()); }

}  // namespace

PYBIND11_MODULE(_slcgc, m) {
  m.doc() = "Superpixel graph contrastive clustering for hyperspectral images";
  py::register_exception<Error>(m, "SlcgcError", PyExc_ValueError);

  // I/O.
  m.def("load_cube", [](const std::filesystem::path& p) { return from_cube(io::load_cube(p)); }, py::arg("header"));
  m.def("save_cube", [](const CubeArray& a, const std::filesystem::path& p) { io::save_cube(to_cube(a), p); },
        py::arg("cube"), py::arg("header"));
  m.def(
      "load_ground_truth",
      [](const std::filesystem::path& p) {
        const GroundTruth gt = io::load_ground_truth(p);
        return image_of(gt.labels, gt.height, gt.width);
      },
      py::arg("header"));
  m.def("save_ground_truth",
        [](const LabelArray& a, const std::filesystem::path& p) { io::save_ground_truth(to_ground_truth(a), p); },
        py::arg("labels"), py::arg("header"));
  m.def(
      "load_cluster_map",
      [](const std::filesystem::path& p) {
        const ClusterMap map = io::load_cluster_map(p);
        return image_of(map.labels, map.height, map.width);
      },
      py::arg("path"), "Cluster ids per pixel; ignored pixels read back as -1.");
  m.def(
      "save_cluster_map",
      [](const LabelArray& a, const std::filesystem::path& p) {
        ClusterMap map;
        map.labels = flat_labels(a, &map.height, &map.width);
        io::save_cluster_map(map, p);
      },
      py::arg("labels"), py::arg("path"));

  // Stages.
  m.def("normalize_bands", [](const CubeArray& a) { return from_cube(preprocess::normalize_bands(to_cube(a))); },
        py::arg("cube"));
  m.def(
      "reduce_pca",
      [](const CubeArray& a, std::size_t r) {
        const ReducedImage img = preprocess::reduce_unsupervised(to_cube(a), r);
        return py::make_tuple(img.values, img.projection, img.component_variance);
      },
      py::arg("cube"), py::arg("components") = 3,
      "Returns (scores[pixels, r], projection[bands, r], component_variance[r]).");
  m.def(
      "slic",
      [](const CubeArray& a, std::size_t n_segments, double compactness, int iterations, std::size_t components) {
        const HsiCube cube = to_cube(a);
        const ReducedImage img =
            preprocess::reduce_unsupervised(preprocess::normalize_bands(cube), std::min(components, cube.bands));
        superpixel::SlicParams p;
        p.n_segments = n_segments;
        p.compactness = compactness;
        p.iterations = iterations;
        const Segmentation seg = superpixel::slic(img, p);
        return image_of(seg.assignment, seg.height, seg.width);
      },
      py::arg("cube"), py::arg("n_segments"), py::arg("compactness") = 0.1, py::arg("iterations") = 10,
      py::arg("components") = 3, "Superpixel label map of a cube (normalized and reduced internally).");
  m.def(
      "adjacency",
      [](const LabelArray& labels) { return Eigen::MatrixXd(superpixel::build_adjacency(to_segmentation(labels))); },
      py::arg("segments"), "Dense 0/1 segment adjacency (4-connectivity). Labels are compacted first.");
  m.def(
      "project",
      [](const CubeArray& a, const LabelArray& labels) {
        return superpixel::project(to_cube(a), to_segmentation(labels));
      },
      py::arg("cube"), py::arg("segments"), "Mean spectrum per segment.");
  m.def(
      "low_pass_filter",
      [](const Eigen::MatrixXd& features, const Eigen::MatrixXd& adjacency, double k, int layers) {
        const SparseMatrix a = adjacency.sparseView();
        graph::FilterConfig cfg{k, layers};
        cfg.validate();
        return graph::low_pass_filter(features, graph::sym_norm_laplacian(graph::self_loop(a)), cfg);
      },
      py::arg("features"), py::arg("adjacency"), py::arg("k") = 0.5, py::arg("layers") = 2);
  m.def(
      "kmeans",
      [](const Eigen::MatrixXd& points, int clusters, int restarts, std::uint64_t seed) {
        cluster::KmeansParams p;
        p.clusters = clusters;
        p.restarts = restarts;
        p.seed = seed;
        const cluster::KmeansResult r = cluster::kmeans(points, p);
        return py::make_tuple(r.labels, r.centroids, r.inertia);
      },
      py::arg("points"), py::arg("clusters"), py::arg("restarts") = 10, py::arg("seed") = 0,
      "Returns (labels, centroids, inertia).");
  m.def(
      "compute_metrics",
      [](const std::vector<int>& classes, const std::vector<int>& clusters) {
        return metrics_dict(cluster::compute_metrics(classes, clusters));
      },
      py::arg("classes"), py::arg("clusters"),
      "Classes are 1..C (0 = unlabeled), clusters 0..m-1 (-1 = ignored).");

  // Whole pipeline.
  m.def(
      "run",
      [](const CubeArray& a, std::optional<LabelArray> gt_array, const py::dict& config) {
        const HsiCube cube = to_cube(a);
        std::optional<GroundTruth> gt;
        if (gt_array) gt = to_ground_truth(*gt_array);
        const std::string text = py::module_::import("json").attr("dumps")(config).cast<std::string>();
        const pipeline::RunConfig cfg = pipeline::RunConfig::from_json(nlohmann::json::parse(text));
        pipeline::RunResult r;
        {
          py::gil_scoped_release release;
          r = pipeline::run(cube, gt ? &*gt : nullptr, cfg);
        }
        py::dict out;
        out["clusters"] = image_of(r.cluster_map.labels, r.cluster_map.height, r.cluster_map.width);
        out["segments"] = image_of(r.segmentation.assignment, r.segmentation.height, r.segmentation.width);
        out["embedding"] = r.training ? r.training->embeddings.fused : r.filtered;
        out["loss_history"] = r.training ? r.training->loss_history : std::vector<double>{};
        out["metrics"] = r.metrics ? py::object(metrics_dict(*r.metrics)) : py::object(py::none());
        out["manifest"] = json_to_py(r.manifest());
        return out;
      },
      py::arg("cube"), py::arg("ground_truth") = py::none(), py::arg("config") = py::dict(),
      "Runs the full pipeline. `config` takes the same keys as the CLI's JSON run config.");

  m.def(
      "three_regions",
      [](std::size_t height, std::size_t width, std::size_t bands, double separation, double noise_std,
         std::uint64_t seed) {
        synthetic::FixtureParams p{height, width, bands, separation, noise_std, seed};
        const synthetic::Fixture f = synthetic::three_regions(p);
        return py::make_tuple(from_cube(f.cube), image_of(f.gt.labels, f.gt.height, f.gt.width));
      },
      py::arg("height") = 30, py::arg("width") = 30, py::arg("bands") = 10, py::arg("separation") = 0.25,
      py::arg("noise_std") = 0.05, py::arg("seed") = 0, "Synthetic three-class cube and its ground truth.");
}
