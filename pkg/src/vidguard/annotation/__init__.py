from .agreement import DegenerateAgreementError, fleiss_kappa, rating_matrix
from .store import (
    LABEL_DEFINITIONS,
    AnnotationStore,
    InsufficientRatersError,
    TaskPayload,
    UnknownAnnotatorError,
    aggregate,
)

__all__ = [
    "DegenerateAgreementError",
    "fleiss_kappa",
    "rating_matrix",
    "LABEL_DEFINITIONS",
    "AnnotationStore",
    "InsufficientRatersError",
    "TaskPayload",
    "UnknownAnnotatorError",
    "aggregate",
]
