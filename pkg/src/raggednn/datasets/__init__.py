"""Dataset records, file formats, featurization and batching."""

from .base import DatasetSource
from .batching import batch_graphs, representation_report, split_dataset, split_node_labels
from .citation_source import CitationSource, load_citation_dataset
from .featurize import expand_distances
from .jsonl_source import JsonlSource, dump_jsonl_dataset, load_jsonl_dataset
from .records import GraphRecord, infer_dataset_spec, records_to_batch, select_targets, unbatch
from .registry import SourceRegistry
from .synthetic import random_labeled_graphs, random_molecule_records, stochastic_block_record

__all__ = [
    "CitationSource",
    "DatasetSource",
    "GraphRecord",
    "JsonlSource",
    "SourceRegistry",
    "batch_graphs",
    "dump_jsonl_dataset",
    "expand_distances",
    "infer_dataset_spec",
    "load_citation_dataset",
    "load_jsonl_dataset",
    "random_labeled_graphs",
    "random_molecule_records",
    "records_to_batch",
    "representation_report",
    "select_targets",
    "split_dataset",
    "split_node_labels",
    "stochastic_block_record",
    "unbatch",
]
