"""Finite, grid-quantized compact sets and the Hausdorff metric.

Continuous-space sets store integer grid keys; coordinates are ``key * eps``
with keys from round-half-to-even snapping, so two points are equal exactly
when their keys are. Finite-space sets store sorted point indices.
"""
from __future__ import annotations

import io
import itertools
import math

import numpy as np

from .metric import MetricError

_CHUNK = 2_000_000
# below this many candidate pairs the bucket grid is not worth building
BRUTE_PAIRS = 1 << 16
_KEY_LIMIT = 2**62


class HyperspaceError(ValueError):
    """Incompatible compact sets or malformed set data."""


class CompactSet:
    """A nonempty finite set of points standing in for an element of C(S).

    Build with :meth:`from_points` (continuous, quantized to ``resolution``)
    or :meth:`from_indices` (finite spaces).
    """

    __slots__ = ("keys", "resolution", "indices", "_points")

    def __init__(self, keys=None, resolution=None, indices=None):
        self.keys = keys
        self.resolution = resolution
        self.indices = indices
        self._points = None
        if len(self) == 0:
            raise HyperspaceError("compact sets must be nonempty")

    @classmethod
    def from_points(cls, space, X, resolution):
        if space.is_finite:
            return cls.from_indices(space, X)
        eps = float(resolution)
        if not eps > 0 or not math.isfinite(eps):
            raise HyperspaceError(f"resolution must be positive, got {resolution}")
        P = space.as_points(X)
        return cls(quantize(P, eps), eps)

    @classmethod
    def from_keys(cls, keys, resolution):
        keys = np.asarray(keys, dtype=np.int64)
        return cls(np.unique(keys, axis=0), float(resolution))

    @classmethod
    def from_indices(cls, space, idx):
        return cls(indices=np.unique(space.as_points(idx)))

    @property
    def is_finite(self):
        return self.indices is not None

    @property
    def dimension(self):
        return None if self.is_finite else self.keys.shape[1]

    @property
    def points(self):
        """Stored points: coordinates ``(n, d)`` or indices ``(n,)``."""
        if self.is_finite:
            return self.indices
        if self._points is None:
            self._points = self.keys * self.resolution
        return self._points

    def __len__(self):
        return len(self.indices) if self.is_finite else len(self.keys)

    def __eq__(self, other):
        if not isinstance(other, CompactSet) or self.is_finite != other.is_finite:
            return NotImplemented
        if self.is_finite:
            return np.array_equal(self.indices, other.indices)
        return self.resolution == other.resolution and np.array_equal(self.keys, other.keys)

    __hash__ = None

    def __repr__(self):
        if self.is_finite:
            return f"CompactSet(indices={self.indices.tolist()})"
        return f"CompactSet(n={len(self)}, dim={self.dimension}, resolution={self.resolution:g})"

    def bounding_box(self):
        P = self.points
        return P.min(axis=0), P.max(axis=0)


def quantize(P, eps):
    """Snap coordinates to multiples of ``eps`` (half-to-even) and dedupe."""
    scaled = np.rint(np.asarray(P, dtype=float) / eps)
    if scaled.size and np.abs(scaled).max() >= _KEY_LIMIT:
        raise HyperspaceError("coordinates too large for the quantization grid")
    return np.unique(scaled.astype(np.int64), axis=0)


def default_resolution(points, fraction=1e-3):
    """``fraction`` of the bounding-box diagonal of ``points`` (1.0 if degenerate)."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    diag = float(np.linalg.norm(P.max(axis=0) - P.min(axis=0)))
    return fraction * (diag if diag > 0 else 1.0)


def _check_pair(space, A, B):
    for S in (A, B):
        if not isinstance(S, CompactSet):
            raise HyperspaceError(f"expected CompactSet, got {type(S).__name__}")
        if S.is_finite != space.is_finite:
            raise HyperspaceError("space mismatch: finite and continuous sets mixed")
        if S.is_finite:
            if S.indices.max() >= space.size:
                raise HyperspaceError("space mismatch: index outside the finite space")
        elif S.dimension != space.dimension:
            raise HyperspaceError(
                f"space mismatch: set of dimension {S.dimension} in a {space.dimension}-d space"
            )


def _nearest_brute(space, PA, PB):
    out = np.empty(len(PA))
    step = max(1, _CHUNK // max(1, len(PB)))
    for s in range(0, len(PA), step):
        out[s:s + step] = space.pairwise(PA[s:s + step], PB).min(axis=1)
    return out


def directed_distance(space, A, B):
    """D(A, B) = max over a in A of min over b in B of d(a, b)."""
    _check_pair(space, A, B)
    return float(_nearest_brute(space, A.points, B.points).max())


def hausdorff(space, A, B):
    """Hausdorff distance h(A, B) = max(D(A, B), D(B, A)), by brute force."""
    return max(directed_distance(space, A, B), directed_distance(space, B, A))


def hausdorff_accelerated(space, A, B):
    """Same value as :func:`hausdorff`, using a uniform bucket grid.

    Only the candidate set is pruned; every distance that reaches the
    min/max goes through the same arithmetic as the brute-force path, so the
    result is bit-identical.
    """
    _check_pair(space, A, B)
    if space.is_finite:
        raise HyperspaceError("accelerated Hausdorff needs a continuous space")
    if space.dimension > 3:
        raise HyperspaceError("accelerated Hausdorff supports dimension <= 3")
    if A.resolution != B.resolution:
        return hausdorff(space, A, B)
    return max(
        float(nearest_distances(space, A, B).max()),
        float(nearest_distances(space, B, A).max()),
    )


def directed_distance_accelerated(space, A, B):
    _check_pair(space, A, B)
    return float(nearest_distances(space, A, B).max())


def nearest_distances(space, A, B):
    """For each point of A, the distance to its nearest neighbour in B."""
    PA, PB = A.points, B.points
    if len(PA) * len(PB) <= BRUTE_PAIRS or A.resolution != B.resolution:
        return _nearest_brute(space, PA, PB)
    KA, KB = A.keys, B.keys
    d = KA.shape[1]
    origin = np.minimum(KA.min(axis=0), KB.min(axis=0))
    span = int((np.maximum(KA.max(axis=0), KB.max(axis=0)) - origin).max())
    # aim for about one point of B per cell
    cell = max(1, math.ceil((span + 1) / max(1.0, len(PB) ** (1.0 / d))))
    best = np.full(len(PA), np.inf)
    remaining = np.arange(len(PA))
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64)
    while len(remaining):
        if cell > span:
            best[remaining] = _nearest_brute(space, PA[remaining], PB)
            break
        cur = _block_search(space, PA[remaining], KA[remaining] - origin, PB, KB - origin, cell, offsets)
        # anything outside the 3^d block is more than cell * eps away
        done = cur <= cell * A.resolution
        best[remaining[done]] = cur[done]
        remaining = remaining[~done]
        cell *= 4
    return best


def _block_search(space, PA, KA, PB, KB, cell, offsets):
    CA = KA // cell + 1
    CB = KB // cell + 1
    shape = np.maximum(CA.max(axis=0), CB.max(axis=0)) + 2
    lin_b = np.ravel_multi_index(CB.T, shape)
    order = np.argsort(lin_b, kind="stable")
    uniq, start, count = np.unique(lin_b[order], return_index=True, return_counts=True)
    cur = np.full(len(PA), np.inf)
    for off in offsets:
        lin_a = np.ravel_multi_index((CA + off).T, shape)
        pos = np.minimum(np.searchsorted(uniq, lin_a), len(uniq) - 1)
        hit = uniq[pos] == lin_a
        cnt = np.where(hit, count[pos], 0)
        total = int(cnt.sum())
        if total == 0:
            continue
        first = np.cumsum(cnt) - cnt
        a_rep = np.repeat(np.arange(len(PA)), cnt)
        b_pos = np.arange(total) - np.repeat(first, cnt) + np.repeat(start[pos], cnt)
        dist = space.rowwise(PA[a_rep], PB[order[b_pos]])
        nz = cnt > 0
        cur[nz] = np.minimum(cur[nz], np.minimum.reduceat(dist, first[nz]))
    return cur


def fast_hausdorff(space, A, B):
    """Pick the accelerated path when it applies."""
    if not space.is_finite and space.dimension <= 3:
        return hausdorff_accelerated(space, A, B)
    return hausdorff(space, A, B)


def union(sets):
    """Quantized, deduplicated union of compact sets from one space."""
    sets = list(sets)
    if not sets:
        raise HyperspaceError("union needs at least one set")
    head = sets[0]
    if head.is_finite:
        if not all(S.is_finite for S in sets):
            raise HyperspaceError("cannot mix finite and continuous sets")
        return CompactSet(indices=np.unique(np.concatenate([S.indices for S in sets])))
    for S in sets[1:]:
        if S.is_finite or S.dimension != head.dimension:
            raise HyperspaceError("cannot unite sets from different spaces")
        if S.resolution != head.resolution:
            raise HyperspaceError(
                f"cannot unite sets with resolutions {head.resolution:g} and {S.resolution:g}"
            )
    return CompactSet.from_keys(np.concatenate([S.keys for S in sets]), head.resolution)


def image(space, tmap, A):
    """T(A) for one map, quantized at A's resolution."""
    TP = tmap.apply(space, A.points)
    if A.is_finite:
        return CompactSet(indices=np.unique(space.as_points(TP)))
    return CompactSet(quantize(space.as_points(TP), A.resolution), A.resolution)


def to_csv(A):
    """Serialize a continuous compact set; 12 significant digits per coordinate."""
    if A.is_finite:
        raise HyperspaceError("CSV serialization is for continuous-space sets")
    buf = io.StringIO()
    buf.write(f"# resolution={A.resolution!r} dim={A.dimension}\n")
    for row in A.points:
        buf.write(",".join(f"{v:.12g}" for v in row) + "\n")
    return buf.getvalue()


def from_csv(text, space=None):
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise HyperspaceError("line 1: missing '# resolution=<eps> dim=<d>' header")
    meta = {}
    for token in lines[0].lstrip("#").split():
        key, _, value = token.partition("=")
        meta[key] = value
    try:
        eps = float(meta["resolution"])
        dim = int(meta["dim"])
    except (KeyError, ValueError) as exc:
        raise HyperspaceError(f"line 1: malformed header {lines[0]!r}") from exc
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            row = [float(v) for v in line.split(",")]
        except ValueError as exc:
            raise HyperspaceError(f"line {lineno}: cannot parse {line!r}") from exc
        if len(row) != dim:
            raise HyperspaceError(f"line {lineno}: expected {dim} coordinates, got {len(row)}")
        rows.append(row)
    if not rows:
        raise HyperspaceError("set file has no points")
    P = np.array(rows, dtype=float)
    if not np.all(np.isfinite(P)):
        raise HyperspaceError("set file contains non-finite coordinates")
    if space is not None and space.dimension != dim:
        raise MetricError(f"set of dimension {dim} does not fit a {space.dimension}-d space")
    return CompactSet(quantize(P, eps), eps)
