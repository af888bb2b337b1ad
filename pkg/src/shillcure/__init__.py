"""Shill-bidding feature extraction, CURE clustering and cluster labeling."""

from shillcure.cure import CureCluster, CureParams, cure_cluster
from shillcure.errors import (
    ConsistencyError,
    DataError,
    DomainError,
    EmptyDatasetError,
    ParseError,
    SchemaError,
    ShillCureError,
)
from shillcure.features import FEATURES, SBInstance, compute_instances
from shillcure.ingestion import BidRecord, CleanDataset, convert_duration, parse_bids_csv, preprocess
from shillcure.kmeans import Assignment, kmeans
from shillcure.labeling import LabeledDataset, decision_line, label_cluster, label_dataset
from shillcure.partitioning import Subset, SubsetStats, compute_stats, partition_by_duration
from shillcure.silhouette import KSweepResult, optimal_k, silhouette_score
from shillcure.sweep import SweepGrid, sweep_params
from shillcure.synthetic import SyntheticConfig, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BidRecord",
    "CleanDataset",
    "ConsistencyError",
    "CureCluster",
    "CureParams",
    "DataError",
    "DomainError",
    "EmptyDatasetError",
    "FEATURES",
    "KSweepResult",
    "LabeledDataset",
    "ParseError",
    "SBInstance",
    "SchemaError",
    "ShillCureError",
    "Subset",
    "SubsetStats",
    "SweepGrid",
    "SyntheticConfig",
    "compute_instances",
    "compute_stats",
    "convert_duration",
    "cure_cluster",
    "decision_line",
    "generate_synthetic",
    "kmeans",
    "label_cluster",
    "label_dataset",
    "optimal_k",
    "parse_bids_csv",
    "partition_by_duration",
    "preprocess",
    "silhouette_score",
    "sweep_params",
]
