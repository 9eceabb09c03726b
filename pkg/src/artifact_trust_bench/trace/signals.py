"""Conflict signals derived from a validated trace."""

from typing import Dict

from pydantic import BaseModel, ConfigDict, computed_field

from ..types import CONFLICT_SIGNALS, Artifact, Signal, Verdict
from .schema import TracePayload

_PAIR = frozenset({Artifact.JAVADOC, Artifact.MUT})


class SignalVector(BaseModel):
    """Which conflict signals fired, plus the text each fired signal came with."""

    model_config = ConfigDict(frozen=True)

    pca_fires: bool
    ic_fires: bool
    ir_fires: bool
    signal_texts: Dict[Signal, str]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def union_fires(self) -> bool:
        return self.pca_fires or self.ic_fires or self.ir_fires

    @computed_field  # type: ignore[prop-decorator]
    @property
    def majority_fires(self) -> bool:
        return sum((self.pca_fires, self.ic_fires, self.ir_fires)) >= 2

    def fires(self, signal: Signal) -> bool:
        return {
            Signal.PCA: self.pca_fires,
            Signal.IC: self.ic_fires,
            Signal.IR: self.ir_fires,
            Signal.UNION: self.union_fires,
            Signal.MAJORITY: self.majority_fires,
        }[signal]

    def text(self, signal: Signal) -> str:
        return self.signal_texts.get(signal, "")

    def combined_text(self) -> str:
        """Fired signal texts joined in PCA, IC, IR order."""
        fired = [self.text(s) for s in CONFLICT_SIGNALS if self.fires(s)]
        return " ".join(t for t in fired if t)


def derive_signals(trace: TracePayload) -> SignalVector:
    consistency = trace.consistency

    pair = consistency.pairwise.javadoc_mut
    pca = pair.verdict is Verdict.CONTRADICTORY

    ic_descriptions = [
        c.description for c in consistency.identified_conflicts if _PAIR <= set(c.artifacts)
    ]
    ic = bool(ic_descriptions)

    report = consistency.inconsistency
    ir = report.has_inconsistency and _PAIR <= set(report.affected_artifacts)

    texts = {
        Signal.PCA: pair.explanation.strip() if pca else "",
        Signal.IC: " ".join(d.strip() for d in ic_descriptions) if ic else "",
        Signal.IR: report.description.strip() if ir else "",
    }
    return SignalVector(pca_fires=pca, ic_fires=ic, ir_fires=ir, signal_texts=texts)
