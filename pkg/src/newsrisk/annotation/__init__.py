"""Annotation workflow: file-backed store plus the HTTP service."""

from .store import (
    AnnotationRecord,
    AnnotationStore,
    Assignment,
    GoldRecord,
    ServiceSample,
)

__all__ = [
    "AnnotationRecord",
    "AnnotationStore",
    "Assignment",
    "GoldRecord",
    "ServiceSample",
]
