"""Candidate extraction and base-sample curation."""

from .curate import curate, evaluate_candidate
from .extract import extract_candidates, load_candidates
from .javadoc import parse_javadoc
from .models import ArtifactBundle, CurationVerdict
from .rules import (
    check_javadoc_rules,
    classify_triviality,
    count_executable_lines,
)
from .signature import SignatureInfo, parse_signature

__all__ = [
    "ArtifactBundle",
    "CurationVerdict",
    "SignatureInfo",
    "check_javadoc_rules",
    "classify_triviality",
    "count_executable_lines",
    "curate",
    "evaluate_candidate",
    "extract_candidates",
    "load_candidates",
    "parse_javadoc",
    "parse_signature",
]
