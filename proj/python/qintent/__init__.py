"""Query intent labeling and models (C++ core)."""

from ._qintent import (
    Labeler,
    QintentError,
    accuracy_threshold,
    build_gold,
    checkpoint_hash,
    count_params,
    cross_entropy,
    distance,
    entropy,
    fingerprint,
    multi_modal_accuracy,
    parameter_layout,
    softmax,
    tokenize,
)

__all__ = [
    "Labeler",
    "QintentError",
    "accuracy_threshold",
    "build_gold",
    "checkpoint_hash",
    "count_params",
    "cross_entropy",
    "distance",
    "entropy",
    "fingerprint",
    "multi_modal_accuracy",
    "parameter_layout",
    "softmax",
    "tokenize",
]
