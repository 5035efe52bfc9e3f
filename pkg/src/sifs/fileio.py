"""File formats: JSON documents, trace CSV, binary PGM, atomic writes."""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .engine import SIFS
from .hyperspace import HyperspaceError, default_resolution, from_csv
from .maps import ContractionMap
from .metric import MetricSpace
from .sampling import box, parse_sample


class InputError(ValueError):
    """Unreadable or malformed input file."""


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def dumps(doc):
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_atomic(path, data):
    """Write text or bytes via a temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_space(doc):
    return MetricSpace.from_dict(doc)


def load_map(doc):
    return ContractionMap.from_dict(doc)


def trace_csv(trace):
    lines = ["iter,h_succ,ratio,cardinality"]
    for s in trace.steps:
        ratio = "nan" if math.isnan(s.ratio) else repr(s.ratio)
        lines.append(f"{s.iteration},{s.distance!r},{ratio},{s.cardinality}")
    return "\n".join(lines) + "\n"


def load_config(doc, resolution=None):
    """Build ``(sifs, seeds, tolerance, max_iter)`` from a SIFS config document."""
    if not isinstance(doc, dict):
        raise InputError("config must be a JSON object")
    for key in ("space", "maps"):
        if key not in doc:
            raise InputError(f"config is missing {key!r}")
    space = load_space(doc["space"])
    maps = [load_map(m) for m in doc["maps"]]
    raw_seeds = doc.get("seeds")
    if not raw_seeds:
        raw_seeds = [list(range(space.size))] if space.is_finite else [np.vstack(box(space)).tolist()]
    if resolution is None:
        resolution = doc.get("resolution")
    if resolution is None and not space.is_finite:
        pts = np.vstack(box(space)) if space.bounds is not None else np.vstack(
            [space.as_points(s) for s in raw_seeds]
        )
        resolution = default_resolution(pts)
    sample = None
    if "sample" in doc:
        sample, _ = parse_sample(space, doc["sample"], seed=int(doc.get("seed", 0)))
    sifs = SIFS.build(space, maps, resolution=resolution, sample=sample)
    seeds = [sifs.make_set(s) for s in raw_seeds]
    tol = float(doc.get("tolerance", 2 * (sifs.resolution or 0.0) or 1e-9))
    max_iter = int(doc.get("max_iter", 100))
    return sifs, seeds, tol, max_iter


def render_pgm(points, width=800, height=800):
    """Rasterize points to binary PGM (P5): 255 on a 0 background.

    The viewport is the points' bounding box mapped linearly onto the
    image; y grows upwards. 1-D sets are drawn on the middle row.
    """
    if width < 1 or height < 1:
        raise ValueError("image size must be positive")
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    img = np.zeros((height, width), dtype=np.uint8)
    if len(P):
        cols = _axis_pixels(P[:, 0], width)
        if P.shape[1] >= 2:
            rows = (height - 1) - _axis_pixels(P[:, 1], height)
        else:
            rows = np.full(len(P), height // 2)
        img[rows, cols] = 255
    return f"P5\n{width} {height}\n255\n".encode("ascii") + img.tobytes()


def _axis_pixels(v, n):
    lo, hi = v.min(), v.max()
    if hi <= lo:
        return np.full(len(v), n // 2, dtype=np.int64)
    return np.clip(np.rint((v - lo) / (hi - lo) * (n - 1)).astype(np.int64), 0, n - 1)


def read_pgm(data):
    """Parse a P5 image written by :func:`render_pgm` into a uint8 array."""
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise InputError("not a binary PGM (P5) image")
    w, h = (int(v) for v in parts[1].split())
    if int(parts[2]) != 255:
        raise InputError("only maxval 255 is supported")
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def read_set(path, space=None):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return from_csv(text, space)
    except HyperspaceError as exc:
        raise InputError(f"{path}: {exc}") from exc
