"""Superpixel graph contrastive clustering for hyperspectral images."""

from ._slcgc import (
    SlcgcError,
    adjacency,
    compute_metrics,
    kmeans,
    load_cluster_map,
    load_cube,
    load_ground_truth,
    low_pass_filter,
    normalize_bands,
    project,
    reduce_pca,
    run,
    save_cluster_map,
    save_cube,
    save_ground_truth,
    slic,
    three_regions,
)

__all__ = [
    "SlcgcError",
    "adjacency",
    "compute_metrics",
    "kmeans",
    "load_cluster_map",
    "load_cube",
    "load_ground_truth",
    "low_pass_filter",
    "normalize_bands",
    "project",
    "reduce_pca",
    "run",
    "save_cluster_map",
    "save_cube",
    "save_ground_truth",
    "slic",
    "three_regions",
]
