from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class EstimateReport:
    """Both sides of one inequality check plus every constituent norm.

    ``constant`` is LHS/RHS, or None when the right side vanishes (the
    ratio is then not applicable; both sides are still reported).
    """

    experiment: str
    N: int
    lhs: float
    rhs: float
    norms: dict[str, float] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    p: float | None = None

    @property
    def constant(self) -> float | None:
        if self.rhs > 0:
            return self.lhs / self.rhs
        return None

    def as_dict(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment,
            "N": self.N,
            "p": self.p,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "norms": dict(self.norms),
            "config": dict(self.config),
        }
