"""Bundled reference fixtures and the self-test that runs them."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import engine
from . import hyperspace as hs
from .fileio import InputError, dumps, load_config, load_map, load_space, render_pgm, trace_csv, write_atomic
from .sampling import parse_sample
from .suzuki import classify, fixed_point_iterate

RATIO_BAND = 0.05
M_TOL = 1e-6


class FixtureError(InputError):
    def __init__(self, path, reason):
        self.path = Path(path)
        super().__init__(f"{self.path.name}: {reason}")


def fixture_dir():
    return Path(str(resources.files("sifs") / "fixtures"))


def fixture_paths(directory=None):
    directory = Path(directory) if directory is not None else fixture_dir()
    return sorted(directory.glob("*.json"))


def suite_hash(directory=None):
    """Short SHA-256 over the fixture files (names and bytes)."""
    digest = hashlib.sha256()
    for p in fixture_paths(directory):
        digest.update(p.name.encode())
        digest.update(p.read_bytes())
    return digest.hexdigest()[:12]


def load_fixture(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise FixtureError(path, f"unreadable ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise FixtureError(path, f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or doc.get("kind") not in ("classify", "attract") or "name" not in doc:
        raise FixtureError(path, "expected an object with 'name' and kind 'classify' or 'attract'")
    return doc


def four_n_sample(unit_grid=101, n_max=25):
    """Grid on [0, 1] plus the points 4n and 4n+1 for n = 1 .. n_max."""
    ns = np.arange(1, n_max + 1, dtype=float)
    pts = np.concatenate([np.linspace(0.0, 1.0, unit_grid), 4 * ns, 4 * ns + 1])
    return pts[:, None]


def resolve_sample(space, spec, seed=0):
    if isinstance(spec, dict):
        return four_n_sample(int(spec.get("unit_grid", 101)), int(spec.get("n_max", 25))), (
            f"unit_grid:{spec.get('unit_grid', 101)}+4n:{spec.get('n_max', 25)}"
        )
    return parse_sample(space, spec, seed=seed)


def cantor_endpoints(depth):
    """Endpoints of the 2**depth intervals of the depth-level middle-thirds construction."""
    intervals = [(Fraction(0), Fraction(1))]
    for _ in range(depth):
        intervals = [
            piece
            for a, b in intervals
            for piece in ((a, a + (b - a) / 3), (b - (b - a) / 3, b))
        ]
    return np.array(sorted({float(x) for iv in intervals for x in iv}))[:, None]


@dataclass
class FixtureResult:
    name: str
    passed: bool
    checks: list = field(default_factory=list)
    report: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        failed = [c for c, ok in self.checks if not ok]
        detail = ", ".join(failed) if failed else ", ".join(c for c, _ in self.checks)
        return f"{status} {self.name}: {detail}"


def _close(a, b, tol):
    return a is not None and b is not None and abs(a - b) <= tol


def run_classify_fixture(doc, out_dir=None):
    space = load_space(doc["space"])
    tmap = load_map(doc["map"])
    sample, scheme = resolve_sample(space, doc.get("sample"))
    expect = doc.get("expect", {})
    report = classify(space, tmap, sample, sampling=scheme)
    checks = []
    if "verdict" in expect:
        checks.append((f"verdict={report.verdict}", report.verdict == expect["verdict"]))
    if "banach_witness_ratio" in expect:
        ratio = (report.banach_witness or {}).get("ratio")
        checks.append((f"banach_ratio={ratio}", _close(ratio, expect["banach_witness_ratio"], 1e-12)))
    for key in ("minimal_m_banach", "minimal_m_suzuki"):
        if key in expect:
            got = getattr(report, key)
            checks.append((f"{key}={got:.9g}" if got is not None else f"{key}=None", _close(got, expect[key], M_TOL)))

    limits = []
    for start in sample:
        point, trace = fixed_point_iterate(space, tmap, start, tol=1e-12, max_iter=10_000)
        limits.append((space.describe_point(point), trace.converged))
    common = all(ok for _, ok in limits) and all(
        np.allclose(lim, limits[0][0], atol=1e-9, rtol=0) for lim, _ in limits
    )
    checks.append((f"unique_fixed_point={limits[0][0]}", common))
    if "fixed_point" in expect:
        checks.append(("fixed_point_matches", bool(np.allclose(limits[0][0], expect["fixed_point"], atol=1e-9, rtol=0))))

    out = {"name": doc["name"], "classification": report.to_dict(), "fixed_point": limits[0][0]}
    if space.is_finite and space.size <= 8:
        subsets = engine.all_nonempty_subsets(space)
        probes = [(A, B) for A in subsets for B in subsets]
        search, data = engine.minimal_hyperspace_m(tmap, probes, space=space)
        at = search.minimal_m if search.minimal_m is not None else 1 - 1e-9
        lifted = engine.check_suzuki_hyperspace(tmap, probes, at, space=space, data=data)
        out["hyperspace_lift"] = {
            "pairs": len(probes),
            "minimal_m": search.minimal_m,
            "check": lifted.to_dict(),
        }
    result = FixtureResult(doc["name"], all(ok for _, ok in checks), checks, out)
    if out_dir is not None:
        write_atomic(Path(out_dir) / f"{doc['name']}_report.json", dumps(out))
    return result


def run_attract_fixture(doc, out_dir=None):
    sifs, seeds, tol, max_iter = load_config(doc)
    expect = doc.get("expect", {})
    run = engine.attract(sifs, seeds, tol, max_iter)
    cert = run.certificate
    eps = sifs.resolution
    checks = [
        ("converged", cert.converged),
        (f"residual={cert.self_referential_residual:.3g}<tol", cert.self_referential_residual < tol),
    ]
    spread = cert.start_independence_residual or 0.0
    checks.append((f"seed_spread={spread:.3g}", spread <= 2 * tol + 2 * eps))
    if "factor" in expect:
        ratios = [r for tr in run.traces for r in tr.tail_ratios(5, engine.PROBE_FLOOR * eps)]
        ok = bool(ratios) and all(abs(r - expect["factor"]) <= RATIO_BAND for r in ratios)
        checks.append((f"tail_ratios~{expect['factor']:.4g}", ok))
    if doc["name"] == "cantor":
        depth = math.ceil(math.log(1.0 / eps, 3))
        ref = hs.CompactSet.from_points(sifs.space, cantor_endpoints(depth), 1e-12)
        gap = max(hs.hausdorff(sifs.space, F, ref) for F in run.attractors)
        checks.append((f"analytic_depth{depth}_gap={gap:.3g}", gap <= 2 * eps))
    out = {
        "name": doc["name"],
        "system": sifs.to_dict(),
        "certificate": cert.to_dict(),
        "traces": [tr.to_dict() for tr in run.traces],
    }
    if out_dir is not None:
        d = Path(out_dir)
        name = doc["name"]
        write_atomic(d / f"{name}_report.json", dumps(out))
        write_atomic(d / f"{name}_attractor.csv", hs.to_csv(run.attractor))
        write_atomic(d / f"{name}_trace.csv", trace_csv(run.trace))
        write_atomic(d / f"{name}_cert.json", dumps(cert.to_dict()))
        write_atomic(d / f"{name}.pgm", render_pgm(run.attractor.points, 256, 256))
    return FixtureResult(doc["name"], all(ok for _, ok in checks), checks, out)


def selftest(name_filter=None, out_dir=None, directory=None):
    """Run every bundled fixture (optionally only those whose name contains ``name_filter``)."""
    results = []
    for path in fixture_paths(directory):
        doc = load_fixture(path)
        if name_filter and name_filter not in doc["name"]:
            continue
        try:
            if doc["kind"] == "classify":
                results.append(run_classify_fixture(doc, out_dir))
            else:
                results.append(run_attract_fixture(doc, out_dir))
        except (KeyError, TypeError, ValueError) as exc:
            raise FixtureError(path, f"malformed fixture ({exc})") from exc
    return results
