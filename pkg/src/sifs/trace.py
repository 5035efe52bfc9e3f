from __future__ import annotations

import math
from dataclasses import dataclass, field

TOLERANCE_MET = "tolerance_met"
MAX_ITER = "max_iter"
STALLED = "stalled"


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    distance: float
    ratio: float  # nan on the first step or after a zero distance
    cardinality: int


@dataclass
class ConvergenceTrace:
    """Per-iteration record of successive distances and the stopping status."""

    steps: list = field(default_factory=list)
    stop_reason: str | None = None

    def record(self, distance, cardinality):
        prev = self.steps[-1].distance if self.steps else None
        ratio = distance / prev if prev else math.nan
        self.steps.append(TraceStep(len(self.steps) + 1, float(distance), ratio, int(cardinality)))
        return ratio

    @property
    def converged(self):
        return self.stop_reason == TOLERANCE_MET

    @property
    def n_iter(self):
        return len(self.steps)

    @property
    def distances(self):
        return [s.distance for s in self.steps]

    @property
    def ratios(self):
        return [s.ratio for s in self.steps]

    def tail_ratios(self, k=5, floor=0.0):
        """Ratios among the last ``k`` steps whose two distances both exceed ``floor``.

        Distances at the scale of the quantization grid are dominated by
        rounding, so their ratios say nothing about the contraction factor.
        """
        out = []
        for prev, cur in zip(self.steps, self.steps[1:]):
            if prev.distance > floor and cur.distance > floor:
                out.append((cur.iteration, cur.ratio))
        last = self.steps[-k].iteration if len(self.steps) >= k else 1
        return [r for it, r in out if it >= last]

    def is_monotone(self, slack=0.0):
        d = self.distances[1:]
        return all(b <= a + slack for a, b in zip(d, d[1:]))

    def to_dict(self):
        return {
            "stop_reason": self.stop_reason,
            "steps": [
                {
                    "iter": s.iteration,
                    "h_succ": s.distance,
                    "ratio": None if math.isnan(s.ratio) else s.ratio,
                    "cardinality": s.cardinality,
                }
                for s in self.steps
            ],
        }
