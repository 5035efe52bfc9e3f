"""Suzuki and Banach contraction conditions over finite point samples.

A map T is a Suzuki contraction with factor m when, for every pair (a, b),

    Q(m) d(a, Ta) <= d(a, b)   implies   d(Ta, Tb) <= m d(a, b),

where Q is the non-increasing threshold :func:`q_of`. Dropping the premise
gives the Banach condition. Every check here is exhaustive over the ordered
pairs of the supplied sample, so verdicts certify the sample, not the
underlying continuum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .maps import MapError
from .metric import MetricError
from .trace import MAX_ITER, TOLERANCE_MET, ConvergenceTrace

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
INV_SQRT2 = 1.0 / math.sqrt(2.0)
SLACK = 1e-12

# minimal-m search: coarse grid then bisection
M_GRID_STEP = 1e-3
M_BISECT_TOL = 1e-9
M_TOP = 1.0 - 1e-9

_CHUNK = 4_000_000


def q_of(m):
    """Suzuki threshold Q(m) on [0, 1).

    1 on [0, (sqrt5-1)/2], (1-m)/m**2 up to 1/sqrt2, then 1/(1+m).
    """
    m = float(m)
    if not (0.0 <= m < 1.0) or math.isnan(m):
        raise ValueError(f"m must lie in [0, 1), got {m}")
    if m <= GOLDEN:
        return 1.0
    if m <= INV_SQRT2:
        return (1.0 - m) / (m * m)
    return 1.0 / (1.0 + m)


def q_values(m):
    m = np.asarray(m, dtype=float)
    out = np.ones_like(m)
    mid = (m > GOLDEN) & (m <= INV_SQRT2)
    out[mid] = (1.0 - m[mid]) / (m[mid] * m[mid])
    hi = m > INV_SQRT2
    out[hi] = 1.0 / (1.0 + m[hi])
    return out


@dataclass
class CheckResult:
    kind: str
    m: float
    passed: bool
    pairs_checked: int
    witness: tuple | None = None
    witness_points: tuple | None = None
    witness_ratio: float | None = None
    premise_vacuous_count: int | None = None
    premise_active: np.ndarray | None = field(default=None, repr=False)

    def __bool__(self):
        return self.passed

    def to_dict(self):
        out = {
            "kind": self.kind,
            "m": self.m,
            "passed": self.passed,
            "pairs_checked": self.pairs_checked,
            "witness": None,
        }
        if self.witness is not None:
            out["witness"] = {
                "indices": list(self.witness),
                "a": self.witness_points[0],
                "b": self.witness_points[1],
                "ratio": self.witness_ratio,
            }
        if self.premise_vacuous_count is not None:
            out["premise_vacuous_count"] = self.premise_vacuous_count
        return out


@dataclass
class PairData:
    """Distances needed by both conditions, for ordered pairs with a != b.

    ``self_gap[p]`` is d(a, Ta), ``gap[p]`` is d(a, b) and ``image_gap[p]`` is
    d(Ta, Tb). The same layout serves the lifted check on compact sets.
    """

    first: np.ndarray
    second: np.ndarray
    self_gap: np.ndarray
    gap: np.ndarray
    image_gap: np.ndarray
    n: int

    @property
    def count(self):
        return len(self.gap)

    def pair_index(self, p):
        return int(self.first[p]), int(self.second[p])


def pair_data(space, tmap, domain):
    P = space.as_points(domain)
    if len(P) == 0:
        raise ValueError("sample domain is empty")
    TP = _apply(space, tmap, P)
    D = space.pairwise(P, P)
    DT = space.pairwise(TP, TP)
    self_gap = space.rowwise(P, TP)
    # skip the diagonal and repeated sample points
    ii, jj = np.nonzero(D > 0)
    return PairData(ii, jj, self_gap[ii], D[ii, jj], DT[ii, jj], len(P))


def _apply(space, tmap, P):
    TP = tmap.apply(space, P)
    return space.as_points(TP)


def _violations(data, m, threshold=None):
    """Boolean (premise_active, violated) arrays at a single m."""
    q = q_of(m) if threshold is None else float(threshold)
    active = q * data.self_gap <= data.gap + SLACK
    broken = data.image_gap > m * data.gap + SLACK
    return active, active & broken


def _result_from(kind, data, m, active, bad, P, space, worst=False):
    result = CheckResult(kind, float(m), not bool(bad.any()), data.count)
    if kind == "suzuki":
        result.premise_vacuous_count = int(data.count - active.sum())
        result.premise_active = active
    if not result.passed:
        if worst:
            ratio = np.where(bad, data.image_gap / data.gap, -np.inf)
            p = int(np.argmax(ratio))
        else:
            p = int(np.argmax(bad))
        i, j = data.pair_index(p)
        result.witness = (i, j)
        result.witness_points = (space.describe_point(P[i]), space.describe_point(P[j]))
        result.witness_ratio = float(data.image_gap[p] / data.gap[p])
    return result


def _check_m(m):
    m = float(m)
    if not 0.0 <= m < 1.0:
        raise ValueError(f"m must lie in [0, 1), got {m}")
    return m


def check_suzuki(space, tmap, domain, m, threshold=None):
    """Check the Suzuki implication over all ordered pairs of ``domain``.

    On failure the witness is the violating pair with the smallest
    (row-major) pair index. ``threshold`` replaces Q(m) in the premise.
    """
    m = _check_m(m)
    P = space.as_points(domain)
    data = pair_data(space, tmap, P)
    active, bad = _violations(data, m, threshold)
    return _result_from("suzuki", data, m, active, bad, P, space)


def check_banach(space, tmap, domain, m):
    """Check d(Ta, Tb) <= m d(a, b) for all pairs; witness is the worst ratio."""
    m = _check_m(m)
    P = space.as_points(domain)
    data = pair_data(space, tmap, P)
    bad = data.image_gap > m * data.gap + SLACK
    return _result_from("banach", data, m, None, bad, P, space, worst=True)


def failing_m(data, m_values, suzuki=True):
    """Vectorised pass/fail over many m values; True where the check fails."""
    m_values = np.asarray(m_values, dtype=float)
    fails = np.zeros(m_values.shape, dtype=bool)
    # pairs whose images coincide can never break the conclusion
    keep = data.image_gap > SLACK
    x, y, z = data.self_gap[keep], data.gap[keep], data.image_gap[keep]
    if len(z) == 0:
        return fails
    q = q_values(m_values)
    step = max(1, _CHUNK // max(1, len(m_values)))
    for s in range(0, len(z), step):
        xs, ys, zs = x[s:s + step], y[s:s + step], z[s:s + step]
        broken = zs[None, :] > m_values[:, None] * ys[None, :] + SLACK
        if suzuki:
            broken &= q[:, None] * xs[None, :] <= ys[None, :] + SLACK
        fails |= broken.any(axis=1)
    return fails


@dataclass
class MSearch:
    minimal_m: float | None
    non_monotone: bool


def minimal_m(fails_at):
    """Smallest passing m: scan a 1e-3 grid, then bisect to 1e-9.

    ``fails_at`` maps an array of m values to a boolean array. A pass
    followed by a later failure on the grid is reported as non-monotone.
    """
    grid = np.append(np.arange(0, 1000) * M_GRID_STEP, M_TOP)
    fails = np.asarray(fails_at(grid), dtype=bool)
    passing = np.flatnonzero(~fails)
    if len(passing) == 0:
        return MSearch(None, False)
    k = int(passing[0])
    non_monotone = bool(fails[k:].any())
    if k == 0:
        return MSearch(0.0, non_monotone)
    lo, hi = float(grid[k - 1]), float(grid[k])
    while hi - lo > M_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if fails_at(np.array([mid]))[0]:
            lo = mid
        else:
            hi = mid
    return MSearch(hi, non_monotone)


@dataclass
class ClassificationReport:
    verdict: str
    minimal_m_banach: float | None
    minimal_m_suzuki: float | None
    banach_witness: dict | None
    suzuki_witness: dict | None
    pairs_checked: int
    premise_vacuous_count: int
    sampling: str = "explicit"
    sample_size: int = 0
    suzuki_non_monotone: bool = False

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "minimal_m_banach": self.minimal_m_banach,
            "minimal_m_suzuki": self.minimal_m_suzuki,
            "banach_witness": self.banach_witness,
            "suzuki_witness": self.suzuki_witness,
            "pairs_checked": self.pairs_checked,
            "premise_vacuous_count": self.premise_vacuous_count,
            "sampling": self.sampling,
            "sample_size": self.sample_size,
            "suzuki_non_monotone": self.suzuki_non_monotone,
        }


def classify(space, tmap, domain, sampling="explicit"):
    """Classify a map as ``banach``, ``suzuki_only`` or ``neither`` on a sample."""
    P = space.as_points(domain)
    data = pair_data(space, tmap, P)
    banach = minimal_m(lambda ms: failing_m(data, ms, suzuki=False))
    suzuki = minimal_m(lambda ms: failing_m(data, ms, suzuki=True))

    banach_witness = None
    if banach.minimal_m is None:
        res = check_banach(space, tmap, P, M_TOP)
        banach_witness = res.to_dict()["witness"]
    suzuki_witness = None
    probe_m = suzuki.minimal_m if suzuki.minimal_m is not None else M_TOP
    res = check_suzuki(space, tmap, P, probe_m)
    if not res.passed:
        suzuki_witness = res.to_dict()["witness"]

    if banach.minimal_m is not None:
        verdict = "banach"
    elif suzuki.minimal_m is not None:
        verdict = "suzuki_only"
    else:
        verdict = "neither"
    return ClassificationReport(
        verdict=verdict,
        minimal_m_banach=banach.minimal_m,
        minimal_m_suzuki=suzuki.minimal_m,
        banach_witness=banach_witness,
        suzuki_witness=suzuki_witness,
        pairs_checked=data.count,
        premise_vacuous_count=res.premise_vacuous_count,
        sampling=sampling,
        sample_size=len(P),
        suzuki_non_monotone=suzuki.non_monotone,
    )


def fixed_point_iterate(space, tmap, start, tol=1e-9, max_iter=1000):
    """Picard iteration a <- T(a) until d(a_t, a_t+1) < tol.

    Returns the last iterate and its :class:`ConvergenceTrace`. Running out
    of iterations is reported through ``trace.stop_reason``, not raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    a = space.as_points([start] if space.is_finite else start)
    if len(a) != 1:
        raise ValueError("start must be a single point")
    trace = ConvergenceTrace()
    for _ in range(int(max_iter)):
        try:
            b = space.as_points(tmap.apply(space, a))
        except MetricError as exc:
            raise MapError(f"map output escapes the space: {exc}") from exc
        step = float(space.rowwise(a, b)[0])
        trace.record(step, 1)
        a = b
        if step < tol:
            trace.stop_reason = TOLERANCE_MET
            break
    else:
        trace.stop_reason = MAX_ITER
    point = int(a[0]) if space.is_finite else a[0]
    return point, trace
