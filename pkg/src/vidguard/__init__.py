"""Pipeline for detecting inappropriate toddler-targeted videos and
auditing a platform's recommendation graph."""

__version__ = "0.1.0"

from .core import (
    EXCLUDED,
    AnnotationRecord,
    Availability,
    BinaryLabel,
    Dataset,
    Edge,
    GroundTruthEntry,
    Label,
    VideoRecord,
    collapse_label,
    merge_datasets,
    validate_record,
)

__all__ = [
    "__version__",
    "EXCLUDED",
    "AnnotationRecord",
    "Availability",
    "BinaryLabel",
    "Dataset",
    "Edge",
    "GroundTruthEntry",
    "Label",
    "VideoRecord",
    "collapse_label",
    "merge_datasets",
    "validate_record",
]
