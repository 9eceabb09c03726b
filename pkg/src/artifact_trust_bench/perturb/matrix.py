"""Condition assignment and assembly of the seven aligned variant datasets."""

import hashlib
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..archive import read_models, write_records
from ..corpus.models import ArtifactBundle
from ..errors import IncompleteMatrixError
from ..types import (
    ALL_VARIANTS,
    MUTATION_VARIANTS,
    SEVERITIES,
    STRATEGIES,
    Variant,
)
from .models import MutationCondition, PerturbationRecord
from .removal import build_removal_records

logger = logging.getLogger(__name__)

VariantMatrix = Dict[Variant, List[PerturbationRecord]]


def _shuffle_key(seed: int, family: Variant, sample_id: str) -> str:
    return hashlib.sha256(f"{seed}:{family.value}:{sample_id}".encode()).hexdigest()


def assign_conditions(
    sample_ids: Sequence[str], seed: int
) -> Dict[str, Dict[Variant, MutationCondition]]:
    """Seeded, balanced severity (and contradiction strategy) per sample and family.

    Within a family, samples are ordered by a seeded hash and dealt round-robin
    over the tiers. Contradiction strategies rotate one step per round, so every
    run of three consecutive samples covers all three strategies and the
    strategy x severity cells stay within one of each other.
    """
    assignments: Dict[str, Dict[Variant, MutationCondition]] = {sid: {} for sid in sample_ids}
    for family in MUTATION_VARIANTS:
        order = sorted(sample_ids, key=lambda sid: _shuffle_key(seed, family, sid))
        for i, sample_id in enumerate(order):
            strategy = None
            if family is Variant.CONTRADICTION:
                strategy = STRATEGIES[(i % 3 + i // 3) % 3]
            assignments[sample_id][family] = MutationCondition(
                variant=family, severity=SEVERITIES[i % 3], strategy=strategy
            )
    return assignments


def severity_histogram(records: Iterable[PerturbationRecord]) -> Dict[Tuple[str, str], int]:
    counts: Dict[Tuple[str, str], int] = {}
    for record in records:
        if record.severity is not None:
            key = (record.variant.value, record.severity.value)
            counts[key] = counts.get(key, 0) + 1
    return counts


def assemble_variant_matrix(
    accepted: Sequence[ArtifactBundle], mutation_records: Iterable[PerturbationRecord]
) -> VariantMatrix:
    """Build the seven aligned datasets, ordered like ``accepted``.

    BASE and removal variants are derived from the bundles; every mutation
    family must be supplied for every sample.
    """
    by_key: Dict[Tuple[str, Variant], PerturbationRecord] = {}
    for bundle in accepted:
        by_key[(bundle.sample_id, Variant.BASE)] = PerturbationRecord.base(bundle)
        for record in build_removal_records(bundle):
            by_key[(bundle.sample_id, record.variant)] = record

    known = {b.sample_id for b in accepted}
    stray = 0
    for record in mutation_records:
        if record.sample_id not in known:
            stray += 1
            continue
        by_key[(record.sample_id, record.variant)] = record
    if stray:
        logger.warning(f"Ignored {stray} mutation records for samples outside the accepted set")

    missing = [
        (b.sample_id, v.value)
        for b in accepted
        for v in ALL_VARIANTS
        if (b.sample_id, v) not in by_key
    ]
    if missing:
        raise IncompleteMatrixError(missing)

    matrix: VariantMatrix = {v: [by_key[(b.sample_id, v)] for b in accepted] for v in ALL_VARIANTS}
    logger.info(
        f"Assembled variant matrix: {len(accepted)} samples x {len(ALL_VARIANTS)} variants "
        f"= {len(accepted) * len(ALL_VARIANTS)} inputs"
    )
    return matrix


def variant_path(directory: Path, variant: Variant) -> Path:
    return Path(directory) / f"{variant.value}.jsonl"


def write_matrix(directory: Path, matrix: VariantMatrix) -> Dict[str, int]:
    return {v.value: write_records(variant_path(directory, v), recs) for v, recs in matrix.items()}


def load_matrix(directory: Path, variants: Optional[Sequence[Variant]] = None) -> VariantMatrix:
    chosen = list(variants) if variants else list(ALL_VARIANTS)
    return {v: read_models(variant_path(directory, v), PerturbationRecord) for v in chosen}
