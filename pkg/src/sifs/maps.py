"""Self-maps of a metric space: affine, explicit table and piecewise rules.

Piecewise rules use a small expression language over the coordinates
``x1 .. xd``: numeric literals, ``+ - * / %``, parentheses, comparisons
(``< <= > >= == !=``) and ``and`` / ``or`` in guards. Branches are tried in
order and the first guard that holds selects the image.
"""
from __future__ import annotations

import ast
import operator

import numpy as np

from .metric import MetricError, operator_norm


class MapError(ValueError):
    """Malformed map definition, or a map output that leaves its space."""


class ContractionMap:
    """Base class for self-maps. ``declared_m`` is an optional factor in [0, 1)."""

    type_name = "abstract"

    def __init__(self, declared_m=None, continuous=None):
        if declared_m is not None:
            declared_m = float(declared_m)
            if not 0.0 <= declared_m < 1.0:
                raise MapError(f"declared contractivity factor must lie in [0, 1), got {declared_m}")
        self.declared_m = declared_m
        self._continuous = continuous

    @property
    def continuous(self):
        return bool(self._continuous)

    def is_continuous_on(self, space):
        # every map on a finite (discrete) metric space is continuous
        return space.is_finite or self.continuous

    def apply(self, space, X):
        raise NotImplementedError

    def lipschitz_bound(self, space):
        """Exact Lipschitz constant when the rule admits one, else None."""
        return None

    def _base_dict(self):
        out = {"type": self.type_name}
        if self.declared_m is not None:
            out["declared_m"] = self.declared_m
        if self._continuous is not None:
            out["continuous"] = self._continuous
        return out

    @staticmethod
    def from_dict(doc):
        if not isinstance(doc, dict) or "type" not in doc:
            raise MapError("map document must be an object with a 'type' field")
        kind = doc["type"]
        extra = {"declared_m": doc.get("declared_m"), "continuous": doc.get("continuous")}
        if kind == "affine":
            return AffineMap(doc["matrix"], doc.get("offset"), **extra)
        if kind == "table":
            return TableMap(doc["images"], **extra)
        if kind == "piecewise":
            return PiecewiseMap(doc["branches"], **extra)
        raise MapError(f"unknown map type {kind!r}")


class AffineMap(ContractionMap):
    """x -> M x + c on a continuous space."""

    type_name = "affine"

    def __init__(self, matrix, offset=None, declared_m=None, continuous=True):
        super().__init__(declared_m, True if continuous is None else continuous)
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        if M.shape[0] != M.shape[1]:
            raise MapError(f"affine matrix must be square, got shape {M.shape}")
        c = np.zeros(M.shape[0]) if offset is None else np.asarray(offset, dtype=float).reshape(-1)
        if c.shape != (M.shape[0],):
            raise MapError("affine offset length must match the matrix size")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(c))):
            raise MapError("affine coefficients must be finite")
        self.matrix = M
        self.offset = c

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def apply(self, space, X):
        if space.is_finite:
            raise MapError("affine maps act on continuous spaces only")
        P = space.as_points(X)
        if P.shape[1] != self.dimension:
            raise MapError(f"affine map of dimension {self.dimension} applied in dimension {P.shape[1]}")
        return P @ self.matrix.T + self.offset

    def lipschitz_bound(self, space):
        return operator_norm(self.matrix, space.kind)

    def to_dict(self):
        out = self._base_dict()
        out.update(matrix=self.matrix.tolist(), offset=self.offset.tolist())
        return out


class TableMap(ContractionMap):
    """Index -> index rule on a finite space."""

    type_name = "table"

    def __init__(self, images, declared_m=None, continuous=None):
        super().__init__(declared_m, continuous)
        img = np.asarray(images)
        if img.ndim != 1 or (img.size and not np.all(img == np.round(img))):
            raise MapError("table images must be a flat list of integer indices")
        self.images = img.astype(np.int64)

    def apply(self, space, X):
        if not space.is_finite:
            raise MapError("table maps act on finite spaces only")
        if len(self.images) != space.size:
            raise MapError(f"table map has {len(self.images)} entries for a {space.size}-point space")
        bad = (self.images < 0) | (self.images >= space.size)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise MapError(f"table map sends index {i} to {int(self.images[i])}, outside the space")
        return self.images[space.as_points(X)]

    def to_dict(self):
        out = self._base_dict()
        out["images"] = self.images.tolist()
        return out


class PiecewiseMap(ContractionMap):
    """Guarded coordinate rules.

    On a finite space with coordinate labels the rule acts on the labels and
    each image is looked up among them.
    """

    type_name = "piecewise"

    def __init__(self, branches, declared_m=None, continuous=None):
        super().__init__(declared_m, continuous)
        if not branches:
            raise MapError("piecewise map needs at least one branch")
        self.branches = []
        dims = set()
        for k, br in enumerate(branches):
            try:
                guard_src = br.get("guard", "1 == 1")
                image_src = [str(e) for e in br["image"]]
            except (AttributeError, KeyError, TypeError) as exc:
                raise MapError(f"branch {k}: expected {{'guard': ..., 'image': [...]}}") from exc
            guard = compile_expression(guard_src, boolean=True)
            image = [compile_expression(e) for e in image_src]
            dims.add(len(image))
            self.branches.append((guard_src, image_src, guard, image))
        if len(dims) != 1:
            raise MapError("all branches must produce images of the same dimension")
        self.dimension = dims.pop()

    def _evaluate(self, C):
        n, d = C.shape
        if d != self.dimension:
            raise MapError(f"piecewise map of dimension {self.dimension} applied in dimension {d}")
        env = {f"x{j + 1}": C[:, j] for j in range(d)}
        out = np.full((n, d), np.nan)
        todo = np.ones(n, dtype=bool)
        for _, _, guard, image in self.branches:
            hit = todo & np.broadcast_to(guard(env), (n,))
            if np.any(hit):
                for j, expr in enumerate(image):
                    out[hit, j] = np.broadcast_to(expr(env), (n,))[hit]
                todo &= ~hit
        if np.any(todo):
            bad = C[np.argmax(todo)]
            raise MapError(f"no branch guard matches point {bad.tolist()}")
        if not np.all(np.isfinite(out)):
            raise MapError("piecewise rule produced a non-finite coordinate")
        return out

    def apply(self, space, X):
        if space.is_finite:
            if space.labels is None:
                raise MapError("piecewise maps on finite spaces need coordinate labels")
            try:
                return space.index_of(self._evaluate(space.coordinates(X)))
            except MetricError as exc:
                raise MapError(f"map output outside space: {exc}") from exc
        return self._evaluate(space.as_points(X))

    def to_dict(self):
        out = self._base_dict()
        out["branches"] = [{"guard": g, "image": img} for g, img, _, _ in self.branches]
        return out


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Mod: np.mod,
}
_CMPOPS = {
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
}


def compile_expression(src, boolean=False):
    """Compile a guard or coordinate expression into ``f(env) -> array``."""
    try:
        tree = ast.parse(src, mode="eval").body
    except SyntaxError as exc:
        raise MapError(f"cannot parse expression {src!r}: {exc.msg}") from exc
    fn = _build(tree, src)
    if boolean != _is_boolean(tree):
        want = "a condition" if boolean else "a numeric expression"
        raise MapError(f"expression {src!r} is not {want}")
    return fn


def _is_boolean(node):
    return isinstance(node, (ast.Compare, ast.BoolOp))


def _build(node, src):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        value = float(node.value)
        return lambda env: value
    if isinstance(node, ast.Name):
        name = node.id
        if not (name.startswith("x") and name[1:].isdigit() and int(name[1:]) >= 1):
            raise MapError(f"unknown variable {name!r} in {src!r}; use x1, x2, ...")

        def lookup(env):
            if name not in env:
                raise MapError(f"variable {name!r} exceeds the space dimension")
            return env[name]

        return lookup
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _build(node.operand, src)
        if isinstance(node.op, ast.USub):
            return lambda env: -inner(env)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _build(node.left, src), _build(node.right, src)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.Compare):
        parts = [_build(node.left, src)] + [_build(c, src) for c in node.comparators]
        ops = []
        for op in node.ops:
            if type(op) not in _CMPOPS:
                raise MapError(f"unsupported comparison in {src!r}")
            ops.append(_CMPOPS[type(op)])

        def compare(env):
            vals = [p(env) for p in parts]
            result = True
            for op, a, b in zip(ops, vals, vals[1:]):
                result = np.logical_and(result, op(a, b))
            return result

        return compare
    if isinstance(node, ast.BoolOp):
        terms = [_build(v, src) for v in node.values]
        combine = np.logical_and if isinstance(node.op, ast.And) else np.logical_or

        def boolop(env):
            result = terms[0](env)
            for t in terms[1:]:
                result = combine(result, t(env))
            return result

        return boolop
    raise MapError(f"unsupported syntax in expression {src!r}")
