"""Suzuki iterated function systems and their attractors.

The Hutchinson operator sends a compact set A to the union of its images
under every map of the system. Iterating it from any seed converges in the
Hausdorff metric to the attractor F = T1(F) u ... u Tn(F).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import hyperspace as hs
from .hyperspace import CompactSet
from .maps import ContractionMap
from .suzuki import CheckResult, PairData, check_suzuki, failing_m, minimal_m, pair_data, q_of, SLACK
from .trace import MAX_ITER, STALLED, TOLERANCE_MET, ConvergenceTrace
from .sampling import grid_sample

log = logging.getLogger(__name__)

STALL_STEPS = 5
# ratios are only trusted when distances clear the grid by this factor
PROBE_FLOOR = 10.0
FACTOR_MARGIN = 0.01


class SIFSError(ValueError):
    """A system that is not a valid Suzuki IFS."""


class DomainEscapeError(SIFSError):
    def __init__(self, map_index, point):
        self.map_index = map_index
        self.point = point
        super().__init__(f"map {map_index} sends the set outside the domain (image point {point})")


@dataclass
class SIFS:
    space: object
    maps: list
    factors: list
    factor_sources: list
    resolution: float | None = None
    sample_size: int = 0

    @property
    def combined_factor(self):
        return max(self.factors)

    @classmethod
    def build(cls, space, maps, resolution=None, sample=None):
        """Validate the maps and fix a contractivity factor for each.

        Factors come from ``declared_m``, else the exact operator norm of an
        affine map, else the minimal Suzuki factor found on ``sample``.
        Every map must pass the Suzuki check at its factor on the sample.
        """
        maps = [m if isinstance(m, ContractionMap) else ContractionMap.from_dict(m) for m in maps]
        if not maps:
            raise SIFSError("a SIFS needs at least one map")
        if sample is None:
            sample = np.arange(space.size) if space.is_finite else grid_sample(space, 64)
        sample = space.as_points(sample)
        if not space.is_finite:
            if resolution is None or not resolution > 0:
                raise SIFSError("continuous systems need a positive resolution")
            resolution = float(resolution)
        factors, sources = [], []
        for i, tmap in enumerate(maps):
            if not tmap.is_continuous_on(space):
                raise SIFSError(f"map {i} is not declared continuous; its set image may not be compact")
            exact = tmap.lipschitz_bound(space)
            if tmap.declared_m is not None:
                if exact is not None and tmap.declared_m < exact - SLACK:
                    raise SIFSError(
                        f"map {i}: declared factor {tmap.declared_m} is below its operator norm {exact:.6g}"
                    )
                factor, source = tmap.declared_m, "declared"
            elif exact is not None:
                factor, source = exact, "operator_norm"
            else:
                found = minimal_m(lambda ms, d=pair_data(space, tmap, sample): failing_m(d, ms))
                factor, source = found.minimal_m, "estimated"
            if factor is None or factor >= 1.0:
                raise SIFSError(f"map {i} is not a Suzuki contraction on the sample")
            res = check_suzuki(space, tmap, sample, factor)
            if not res.passed:
                raise SIFSError(f"map {i} fails the Suzuki check at m={factor:.6g}, witness {res.witness_points}")
            factors.append(float(factor))
            sources.append(source)
        return cls(space, maps, factors, sources, resolution, len(sample))

    def make_set(self, points):
        if isinstance(points, CompactSet):
            return points
        if self.space.is_finite:
            return CompactSet.from_indices(self.space, points)
        return CompactSet.from_points(self.space, points, self.resolution)

    def to_dict(self):
        return {
            "space": self.space.to_dict(),
            "maps": [m.to_dict() for m in self.maps],
            "factors": self.factors,
            "factor_sources": self.factor_sources,
            "combined_factor": self.combined_factor,
            "resolution": self.resolution,
        }


def hutchinson_apply(sifs, A):
    """T(A) = T1(A) u ... u Tn(A), quantized at the system resolution."""
    space = sifs.space
    A = sifs.make_set(A)
    images = []
    for i, tmap in enumerate(sifs.maps):
        img = hs.image(space, tmap, A)
        if space.bounds is not None:
            lo, hi = space.bounds
            P = img.points
            slack = img.resolution
            out = np.any((P < lo - slack) | (P > hi + slack), axis=1)
            if np.any(out):
                raise DomainEscapeError(i, P[np.argmax(out)].tolist())
        images.append(img)
    return hs.union(images)


@dataclass
class AttractorCertificate:
    self_referential_residual: float
    tolerance: float
    start_independence_residual: float | None
    estimated_factor: float | None
    combined_factor: float
    q_threshold: float
    converged: bool
    monotone: bool
    seed_residuals: list = field(default_factory=list)

    @property
    def passed(self):
        ok = self.converged and self.self_referential_residual < self.tolerance
        return ok

    def to_dict(self):
        return {
            "self_referential_residual": self.self_referential_residual,
            "tolerance": self.tolerance,
            "start_independence_residual": self.start_independence_residual,
            "estimated_factor": self.estimated_factor,
            "combined_factor": self.combined_factor,
            "q_threshold": self.q_threshold,
            "converged": self.converged,
            "monotone": self.monotone,
            "seed_residuals": self.seed_residuals,
            "passed": self.passed,
        }


def _q_for(m):
    return q_of(min(m, 1.0 - 1e-12))


def iterate_attractor(sifs, A0, tol, max_iter=100):
    """Iterate the Hutchinson operator from ``A0`` until h(A_t, A_t+1) < tol.

    Returns ``(F, trace, certificate)``. Exhausting ``max_iter`` or stalling
    (ratio >= 1 for five consecutive steps) ends the loop with the current
    iterate and the matching ``stop_reason``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if sifs.resolution is not None and tol < 2 * sifs.resolution:
        raise ValueError(f"tol={tol:g} is below twice the grid resolution {sifs.resolution:g}")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    space = sifs.space
    A = sifs.make_set(A0)
    trace = ConvergenceTrace()
    floor = PROBE_FLOOR * (sifs.resolution or 0.0)
    stall = 0
    for _ in range(int(max_iter)):
        B = hutchinson_apply(sifs, A)
        h = hs.fast_hausdorff(space, A, B)
        ratio = trace.record(h, len(B))
        A = B
        if h < tol:
            trace.stop_reason = TOLERANCE_MET
            break
        stall = stall + 1 if (not math.isnan(ratio) and ratio >= 1.0) else 0
        if stall >= STALL_STEPS:
            trace.stop_reason = STALLED
            break
    else:
        trace.stop_reason = MAX_ITER

    monotone = trace.is_monotone(slack=2 * (sifs.resolution or 0.0))
    if not monotone:
        log.info("successive Hausdorff distances increased after the first step")
    probe_ratios = trace.tail_ratios(k=len(trace.steps), floor=floor)
    residual = hs.fast_hausdorff(space, A, hutchinson_apply(sifs, A))
    cert = AttractorCertificate(
        self_referential_residual=residual,
        tolerance=float(tol),
        start_independence_residual=None,
        estimated_factor=max(probe_ratios) if probe_ratios else None,
        combined_factor=sifs.combined_factor,
        q_threshold=_q_for(sifs.combined_factor),
        converged=trace.converged,
        monotone=monotone,
        seed_residuals=[residual],
    )
    return A, trace, cert


@dataclass
class AttractorRun:
    attractor: CompactSet
    traces: list
    attractors: list
    certificate: AttractorCertificate

    @property
    def trace(self):
        return self.traces[0]


def attract(sifs, seeds, tol, max_iter=100):
    """Run :func:`iterate_attractor` from every seed and certify agreement.

    The reported attractor and trace belong to the first seed; the
    certificate carries the worst residual and the largest pairwise
    Hausdorff distance between the per-seed attractors.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    results = [iterate_attractor(sifs, s, tol, max_iter) for s in seeds]
    attractors = [r[0] for r in results]
    spread = 0.0
    for i in range(len(attractors)):
        for j in range(i + 1, len(attractors)):
            spread = max(spread, hs.fast_hausdorff(sifs.space, attractors[i], attractors[j]))
    certs = [r[2] for r in results]
    estimates = [c.estimated_factor for c in certs if c.estimated_factor is not None]
    cert = AttractorCertificate(
        self_referential_residual=max(c.self_referential_residual for c in certs),
        tolerance=float(tol),
        start_independence_residual=spread if len(seeds) > 1 else None,
        estimated_factor=max(estimates) if estimates else None,
        combined_factor=sifs.combined_factor,
        q_threshold=_q_for(sifs.combined_factor),
        converged=all(c.converged for c in certs),
        monotone=all(c.monotone for c in certs),
        seed_residuals=[c.self_referential_residual for c in certs],
    )
    return AttractorRun(attractors[0], [r[1] for r in results], attractors, cert)


def _operator(target, space):
    """Resolve a SIFS or a single map into (space, set-map, factor)."""
    if isinstance(target, SIFS):
        return target.space, (lambda A: hutchinson_apply(target, A)), target.combined_factor
    if space is None:
        raise ValueError("a space is required when probing a single map")
    factor = target.declared_m
    if factor is None:
        factor = target.lipschitz_bound(space)
    return space, (lambda A: hs.image(space, target, A)), factor


@dataclass
class FactorEstimate:
    max_ratio: float | None
    pairs: list
    flagged: list

    def to_dict(self):
        return {"max_ratio": self.max_ratio, "pairs": self.pairs, "flagged": self.flagged}


def estimate_hyperspace_factor(target, probes, space=None):
    """Empirical max of h(TA, TB) / h(A, B) over probe pairs.

    Pairs with h(A, B) at most ten grid cells apart are skipped. A pair is
    flagged when its ratio exceeds the combined factor by more than 0.01 or
    reaches 1.
    """
    space, op, factor = _operator(target, space)
    rows, flagged = [], []
    best = None
    for k, (A, B) in enumerate(probes):
        h_ab = hs.fast_hausdorff(space, A, B)
        floor = PROBE_FLOOR * (A.resolution or 0.0)
        if h_ab <= floor:
            rows.append({"pair": k, "h_ab": h_ab, "skipped": "h(A,B) below probe threshold"})
            continue
        h_img = hs.fast_hausdorff(space, op(A), op(B))
        ratio = h_img / h_ab
        bad = ratio >= 1.0 or (factor is not None and ratio > factor + FACTOR_MARGIN)
        rows.append({"pair": k, "h_ab": h_ab, "h_image": h_img, "ratio": ratio, "flagged": bad})
        if bad:
            flagged.append(k)
        best = ratio if best is None else max(best, ratio)
    return FactorEstimate(best, rows, flagged)


def hyperspace_pair_data(target, probes, space=None):
    """Lifted pair quantities h(A, TA), h(A, B), h(TA, TB) for each probe."""
    space, op, _ = _operator(target, space)
    if isinstance(target, ContractionMap) and not target.is_continuous_on(space):
        raise SIFSError("the set lift needs a continuous map")
    cache = {}

    def lifted(S):
        key = id(S)
        if key not in cache:
            cache[key] = (S, op(S))
        return cache[key][1]

    first, second, self_gap, gap, image_gap = [], [], [], [], []
    for k, (A, B) in enumerate(probes):
        h_ab = hs.fast_hausdorff(space, A, B)
        if h_ab == 0.0:
            continue
        TA, TB = lifted(A), lifted(B)
        first.append(k)
        second.append(k)
        self_gap.append(hs.fast_hausdorff(space, A, TA))
        gap.append(h_ab)
        image_gap.append(hs.fast_hausdorff(space, TA, TB))
    return PairData(
        np.asarray(first, dtype=np.int64),
        np.asarray(second, dtype=np.int64),
        np.asarray(self_gap, dtype=float),
        np.asarray(gap, dtype=float),
        np.asarray(image_gap, dtype=float),
        len(probes),
    )


def check_suzuki_hyperspace(target, probes, m, space=None, data=None):
    """Lifted Suzuki implication on ordered probe pairs of compact sets.

    Q(m) h(A, TA) <= h(A, B) must imply h(TA, TB) <= m h(A, B), with the
    base-space m in both places. Witness indices refer to ``probes``.
    """
    m = float(m)
    if not 0.0 <= m < 1.0:
        raise ValueError(f"m must lie in [0, 1), got {m}")
    probes = list(probes)
    if data is None:
        data = hyperspace_pair_data(target, probes, space)
    active = q_of(m) * data.self_gap <= data.gap + SLACK
    bad = active & (data.image_gap > m * data.gap + SLACK)
    result = CheckResult("suzuki_hyperspace", m, not bool(bad.any()), data.count)
    result.premise_vacuous_count = int(data.count - active.sum())
    result.premise_active = active
    if not result.passed:
        p = int(np.argmax(bad))
        k = int(data.first[p])
        space = target.space if isinstance(target, SIFS) else space
        result.witness = (k,)
        result.witness_points = tuple(
            [space.describe_point(x) for x in S.points] for S in probes[k]
        )
        result.witness_ratio = float(data.image_gap[p] / data.gap[p])
    return result


def minimal_hyperspace_m(target, probes, space=None):
    """Smallest m passing the lifted check, by the same grid + bisection search."""
    data = hyperspace_pair_data(target, list(probes), space)
    return minimal_m(lambda ms: failing_m(data, ms)), data


def all_nonempty_subsets(space):
    """Every nonempty subset of a finite space, in binary-counting order."""
    if not space.is_finite:
        raise ValueError("subsets can only be enumerated for finite spaces")
    n = space.size
    if n > 16:
        raise ValueError("refusing to enumerate subsets of more than 16 points")
    out = []
    for mask in range(1, 2**n):
        idx = [i for i in range(n) if mask >> i & 1]
        out.append(CompactSet.from_indices(space, idx))
    return out
