"""Metric spaces and distance evaluation.

Continuous spaces hold points as ``(n, d)`` float arrays; finite spaces hold
points as integer indices into an explicit distance table.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

CONTINUOUS_KINDS = ("euclidean", "taxicab", "chebyshev")
KINDS = CONTINUOUS_KINDS + ("finite_table",)

# absolute tolerance for triangle-inequality checks on user tables
TRIANGLE_TOL = 1e-12


class MetricError(ValueError):
    """Invalid metric space definition or point outside a space."""


@dataclass(frozen=True)
class MetricViolation:
    axiom: str
    indices: tuple
    amount: float

    def to_dict(self):
        return {"axiom": self.axiom, "indices": list(self.indices), "amount": self.amount}


def validate_metric(table, tol=TRIANGLE_TOL):
    """Check the metric axioms on a square distance table.

    Returns a list of :class:`MetricViolation`; an empty list means the table
    is a valid finite metric. Triangle violations up to ``tol`` are ignored.
    """
    D = np.asarray(table, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise MetricError(f"distance table must be square, got shape {D.shape}")
    n = D.shape[0]
    report = []
    if not np.all(np.isfinite(D)):
        for i, j in zip(*np.nonzero(~np.isfinite(D))):
            report.append(MetricViolation("finite", (int(i), int(j)), float("nan")))
        return report
    for i in range(n):
        if D[i, i] != 0.0:
            report.append(MetricViolation("zero_diagonal", (i, i), float(D[i, i])))
    for i, j in zip(*np.nonzero(D < 0)):
        report.append(MetricViolation("nonnegative", (int(i), int(j)), float(D[i, j])))
    for i, j in zip(*np.nonzero(D != D.T)):
        if i < j:
            report.append(MetricViolation("symmetry", (int(i), int(j)), float(abs(D[i, j] - D[j, i]))))
    off = ~np.eye(n, dtype=bool)
    for i, j in zip(*np.nonzero(off & (D == 0))):
        if i < j:
            report.append(MetricViolation("positive_off_diagonal", (int(i), int(j)), 0.0))
    # d(i,k) <= d(i,j) + d(j,k) for every triple, middle index j
    for j in range(n):
        excess = D - (D[:, j][:, None] + D[j, :][None, :])
        for i, k in zip(*np.nonzero(excess > tol)):
            report.append(MetricViolation("triangle", (int(i), j, int(k)), float(excess[i, k])))
    return report


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """A metric space of one of four kinds.

    ``bounds`` is an optional ``(lo, hi)`` box used for sampling and for
    detecting map images that escape the working domain.
    """

    kind: str
    dimension: int = 1
    table: np.ndarray | None = None
    labels: np.ndarray | None = None
    bounds: tuple | None = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MetricError(f"unknown metric kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "finite_table":
            if self.table is None:
                raise MetricError("finite_table space requires a distance table")
            table = np.array(self.table, dtype=float)
            violations = validate_metric(table)
            if violations:
                v = violations[0]
                raise MetricError(
                    f"distance table violates {v.axiom} at indices {v.indices} (by {v.amount:g})"
                )
            table.setflags(write=False)
            object.__setattr__(self, "table", table)
            if self.labels is not None:
                labels = np.array(self.labels, dtype=float)
                if labels.ndim == 1:
                    labels = labels[:, None]
                if labels.shape[0] != table.shape[0]:
                    raise MetricError("labels must have one row per table entry")
                labels.setflags(write=False)
                object.__setattr__(self, "labels", labels)
                object.__setattr__(self, "dimension", labels.shape[1])
        else:
            if int(self.dimension) < 1:
                raise MetricError("dimension must be a positive integer")
            object.__setattr__(self, "dimension", int(self.dimension))
        if self.bounds is not None:
            lo, hi = (np.array(b, dtype=float).reshape(-1) for b in self.bounds)
            if self.is_finite:
                raise MetricError("bounds only apply to continuous spaces")
            if lo.shape != (self.dimension,) or hi.shape != (self.dimension,) or np.any(lo > hi):
                raise MetricError("bounds must be [lo, hi] with one entry per dimension and lo <= hi")
            lo.setflags(write=False)
            hi.setflags(write=False)
            object.__setattr__(self, "bounds", (lo, hi))

    @property
    def is_finite(self):
        return self.kind == "finite_table"

    @property
    def size(self):
        if not self.is_finite:
            raise MetricError("continuous spaces have no finite size")
        return self.table.shape[0]

    def same_as(self, other):
        if self.kind != other.kind or self.dimension != other.dimension:
            return False
        if self.is_finite:
            return self.table.shape == other.table.shape and bool(np.all(self.table == other.table))
        return True

    # -- point handling -------------------------------------------------

    def as_points(self, X):
        """Validate and normalise a batch of points.

        Continuous: returns an ``(n, d)`` float array. Finite: returns an
        ``(n,)`` int array of indices.
        """
        if self.is_finite:
            idx = np.asarray(X).reshape(-1)
            if idx.size and not np.issubdtype(idx.dtype, np.integer):
                as_float = idx.astype(float)
                if not np.all(as_float == np.round(as_float)):
                    raise MetricError("finite-space points must be integer indices")
            idx = idx.astype(np.int64)
            if idx.size and (idx.min() < 0 or idx.max() >= self.size):
                bad = int(idx[(idx < 0) | (idx >= self.size)][0])
                raise MetricError(f"index {bad} out of range for a {self.size}-point space")
            return idx
        P = np.asarray(X, dtype=float)
        if P.ndim == 1 and self.dimension == 1:
            P = P[:, None]
        elif P.ndim == 1:
            P = P[None, :]
        if P.ndim != 2 or P.shape[1] != self.dimension:
            raise MetricError(
                f"dimension mismatch: expected points of dimension {self.dimension}, got shape {P.shape}"
            )
        if not np.all(np.isfinite(P)):
            raise MetricError("points must have finite coordinates")
        return P

    def coordinates(self, X):
        """Coordinate view of points; finite spaces need labels."""
        if not self.is_finite:
            return self.as_points(X)
        if self.labels is None:
            raise MetricError("finite space has no coordinate labels")
        return self.labels[self.as_points(X)]

    def index_of(self, coords, atol=1e-9):
        """Map coordinate rows back to label indices (finite spaces only)."""
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None] if self.dimension == 1 else coords[None, :]
        diff = np.abs(coords[:, None, :] - self.labels[None, :, :]).max(axis=2)
        hit = diff <= atol
        found = hit.any(axis=1)
        if not np.all(found):
            bad = coords[np.argmin(found)]
            raise MetricError(f"point {bad.tolist()} is not an element of the finite space")
        return np.argmax(hit, axis=1).astype(np.int64)

    def describe_point(self, p):
        if self.is_finite:
            if self.labels is not None:
                return [_clean(v) for v in self.labels[int(p)]]
            return int(p)
        return [_clean(v) for v in np.asarray(p, dtype=float).reshape(-1)]

    # -- distances ------------------------------------------------------

    def rowwise(self, X, Y):
        """Distances between aligned rows ``X[i]`` and ``Y[i]``."""
        if self.is_finite:
            return self.table[np.asarray(X, dtype=np.int64), np.asarray(Y, dtype=np.int64)]
        return _coord_distance(self.kind, np.asarray(X, dtype=float), np.asarray(Y, dtype=float))

    def pairwise(self, X, Y):
        """Full ``len(X) x len(Y)`` distance matrix."""
        if self.is_finite:
            return self.table[np.ix_(np.asarray(X, dtype=np.int64), np.asarray(Y, dtype=np.int64))]
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        return _coord_distance(self.kind, X[:, None, :], Y[None, :, :])

    def to_dict(self):
        if self.is_finite:
            out = {"kind": self.kind, "table": self.table.tolist()}
            if self.labels is not None:
                out["labels"] = self.labels.tolist()
            return out
        out = {"kind": self.kind, "dimension": self.dimension}
        if self.bounds is not None:
            out["bounds"] = [self.bounds[0].tolist(), self.bounds[1].tolist()]
        return out

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict) or "kind" not in doc:
            raise MetricError("space document must be an object with a 'kind' field")
        kind = doc["kind"]
        if kind == "finite_table":
            return cls(kind, table=doc.get("table"), labels=doc.get("labels"))
        return cls(kind, dimension=doc.get("dimension", 1), bounds=doc.get("bounds"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _coord_distance(kind, X, Y):
    # Dimension-by-dimension accumulation; the brute-force and bucket-grid
    # Hausdorff paths both go through here so their results are bit-identical.
    d = X.shape[-1]
    diff = X[..., 0] - Y[..., 0]
    if kind == "euclidean":
        acc = diff * diff
        for j in range(1, d):
            diff = X[..., j] - Y[..., j]
            acc = acc + diff * diff
        return np.sqrt(acc)
    acc = np.abs(diff)
    for j in range(1, d):
        term = np.abs(X[..., j] - Y[..., j])
        acc = acc + term if kind == "taxicab" else np.maximum(acc, term)
    return acc


def operator_norm(matrix, kind):
    """Norm of a linear map induced by the metric kind (l2, l1 or l-inf)."""
    M = np.atleast_2d(np.asarray(matrix, dtype=float))
    if kind == "euclidean":
        return float(np.linalg.norm(M, 2))
    if kind == "taxicab":
        return float(np.abs(M).sum(axis=0).max())
    if kind == "chebyshev":
        return float(np.abs(M).sum(axis=1).max())
    raise MetricError(f"no operator norm for metric kind {kind!r}")


def distance(space, a, b):
    """d(a, b) for two single points of ``space``."""
    A = space.as_points([a] if space.is_finite else a)
    B = space.as_points([b] if space.is_finite else b)
    if len(A) != 1 or len(B) != 1:
        raise MetricError("distance() takes single points")
    return float(space.rowwise(A, B)[0])


def _clean(v):
    v = float(v)
    return int(v) if v.is_integer() and abs(v) < 2**53 else v
