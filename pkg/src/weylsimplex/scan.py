"""Grid sweeps over the two- and three-parameter simplex families.

A scan evaluates, point by point, whichever of the checks in :data:`CHECKS`
the :class:`GridSpec` asks for and returns one :class:`ScanRecord` per grid
point in row-major order (``alpha`` outermost, ``gamma`` innermost). Points
may be evaluated in worker processes; the result does not depend on that.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .criteria import NPT_TOL, all_cut_verdicts, min_pt_eigenvalue, pair_cut
from .distill import ProtocolConfig, classify_distillability
from .linalg import PSD_TOL, DensityMatrix, DomainError, SystemShape
from .simplex import (
    COEFF_TOL,
    FAMILIES,
    FamilyParams,
    SimplexPoint,
    combination_matrix,
    family_coefficients,
    vertex_norm,
)
from .witness import OptimizerConfig, WitnessCoefficients, dense_witness_value, detect, witness_value

CHECKS = ("positivity", "ppt_pair_cut", "ppt_all_cuts", "witness", "distill")
DEFAULT_RANGE = (-0.6, 1.1, 201)
DEFAULT_BUDGET_SECONDS = 4 * 3600.0

COLUMNS = (
    "family",
    "d",
    "n",
    "alpha",
    "beta",
    "gamma",
    "in_state_space",
    "min_eig_state",
    "ppt_pair_min_eig",
    "ppt_pair_verdict",
    "ppt_worst_cut",
    "ppt_worst_min_eig",
    "witness_detected",
    "witness_margin",
    "distill_verdict",
    "distill_final_fidelity",
    "distill_iterations",
)


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise DomainError(f"an axis needs at least 2 steps, got {self.steps}")
        if not self.hi > self.lo:
            raise DomainError(f"axis range must be increasing, got ({self.lo}, {self.hi})")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)

    @property
    def cell(self) -> float:
        return (self.hi - self.lo) / (self.steps - 1)


@dataclass(frozen=True)
class GridSpec:
    """What to scan. ``gamma=None`` fixes ``gamma = 0`` (a planar slice)."""

    family: str
    d: int
    n: int
    alpha: Axis = Axis(*DEFAULT_RANGE)
    beta: Axis = Axis(*DEFAULT_RANGE)
    gamma: Axis | None = None
    checks: tuple[str, ...] = ("positivity", "ppt_pair_cut")
    seed: int = 0
    witness: OptimizerConfig = OptimizerConfig(rel_gap=1.0)
    distill: ProtocolConfig = ProtocolConfig()
    budget_seconds: float = DEFAULT_BUDGET_SECONDS

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "line" and self.d != 3:
            raise DomainError(f"the line family requires d = 3, got d = {self.d}")
        if self.family == "two_vertex" and self.gamma is not None:
            raise DomainError("the two_vertex family has no gamma axis")
        if self.d < 2 or self.n < 1:
            raise DomainError(f"need d >= 2 and n >= 1, got d = {self.d}, n = {self.n}")
        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            raise DomainError(f"unknown checks {bad}; expected a subset of {CHECKS}")
        object.__setattr__(self, "checks", tuple(c for c in CHECKS if c in self.checks))

    @property
    def axes(self) -> tuple[Axis, ...]:
        return (self.alpha, self.beta) + ((self.gamma,) if self.gamma is not None else ())

    @property
    def size(self) -> int:
        return math.prod(a.steps for a in self.axes)


@dataclass(frozen=True, eq=False)
class ScanRecord:
    family: str
    d: int
    n: int
    alpha: float
    beta: float
    gamma: float
    in_state_space: bool
    min_eig_state: float | None = None
    ppt_pair_min_eig: float | None = None
    ppt_pair_verdict: str | None = None
    ppt_worst_cut: str | None = None
    ppt_worst_min_eig: float | None = None
    witness_detected: bool | None = None
    witness_margin: float | None = None
    distill_verdict: str | None = None
    distill_final_fidelity: float | None = None
    distill_iterations: int | None = None
    coefficients: tuple[float, ...] = ()
    cuts: tuple[tuple[str, float, str], ...] = ()
    kappa: tuple[float, ...] | None = None

    def row(self) -> dict:
        return {c: getattr(self, c) for c in COLUMNS}

    def verdicts(self) -> tuple:
        return (self.in_state_space, self.ppt_pair_verdict, self.witness_detected)


# rough single-core seconds per point, used only for the budget check
def _unit_costs(spec: GridSpec) -> dict[str, float]:
    D = spec.d ** (2 * spec.n)
    eig = 2e-5 + 3e-9 * D**3
    ncuts = 2 ** (2 * spec.n - 1) - 1
    dense_distill = spec.n > 1 or spec.distill.placement != "per_party" or spec.distill.path == "dense"
    step = 2e-3 * (spec.d ** (4 * spec.n) / 256) ** 2 if dense_distill else 3e-5
    return {
        "positivity": eig,
        "ppt_pair_cut": eig,
        "ppt_all_cuts": ncuts * eig,
        "witness": 0.05 * spec.d**2 / 9,
        "distill": spec.d * spec.distill.max_iterations * step,
    }


def estimate_cost(spec: GridSpec) -> float:
    unit = _unit_costs(spec)
    return spec.size * (1e-5 + sum(unit[c] for c in spec.checks))


def point_seed(spec: GridSpec, index: tuple[int, ...]) -> int:
    return int(np.random.SeedSequence([spec.seed, *index]).generate_state(1)[0])


def evaluate_point(spec: GridSpec, index: tuple[int, ...]) -> ScanRecord:
    vals = [ax.values[i] for ax, i in zip(spec.axes, index)]
    alpha, beta = float(vals[0]), float(vals[1])
    gamma = float(vals[2]) if len(vals) > 2 else 0.0
    d, n = spec.d, spec.n
    c = family_coefficients(FamilyParams(d, n, alpha, beta, gamma), spec.family)
    base = dict(family=spec.family, d=d, n=n, alpha=alpha, beta=beta, gamma=gamma,
                coefficients=tuple(float(x) for x in c.ravel()))
    checks = spec.checks
    need_dense = any(ch in checks for ch in ("positivity", "ppt_pair_cut", "ppt_all_cuts"))
    rho = combination_matrix(d, n, c) if need_dense else None
    out: dict = {}
    if "positivity" in checks:
        lo = float(np.linalg.eigvalsh(rho)[0])
        out["min_eig_state"] = lo
        inside = lo >= -PSD_TOL
    else:
        inside = bool(c.min() >= -COEFF_TOL)
    if not inside:
        return ScanRecord(in_state_space=False, **base, **out)
    shape = SystemShape.pairs(d, n)
    if "ppt_pair_cut" in checks:
        lo = min_pt_eigenvalue(rho, shape, pair_cut(n).side_two)
        out["ppt_pair_min_eig"] = lo
        out["ppt_pair_verdict"] = "NPT" if lo < -NPT_TOL else "PPT"
    if "ppt_all_cuts" in checks:
        verdicts = all_cut_verdicts(DensityMatrix(rho, shape, check=False))
        worst = min(verdicts, key=lambda v: v.min_pt_eigenvalue)
        out["ppt_worst_cut"] = worst.label
        out["ppt_worst_min_eig"] = worst.min_pt_eigenvalue
        out["cuts"] = tuple((v.label, v.min_pt_eigenvalue, v.verdict) for v in verdicts)
    if c.min() < 0:
        # dense positivity admits rounding-level negative coefficients
        c = np.clip(c, 0.0, None)
        c = c / c.sum()
    p = SimplexPoint(d, n, c)
    if "witness" in checks:
        det = detect(p, replace(spec.witness, seed=point_seed(spec, index)))
        out["witness_detected"] = det.detected
        out["witness_margin"] = det.margin
        if det.kappa is not None:
            out["kappa"] = tuple(float(x) for x in det.kappa.kappa.ravel())
    if "distill" in checks:
        v = classify_distillability(p, spec.distill)
        out["distill_verdict"] = v.verdict
        out["distill_final_fidelity"] = v.final_fidelity
        out["distill_iterations"] = v.iterations
    return ScanRecord(in_state_space=True, **base, **out)


def grid_indices(spec: GridSpec) -> list[tuple[int, ...]]:
    return [tuple(int(i) for i in ix) for ix in np.ndindex(*(a.steps for a in spec.axes))]


def _evaluate_block(spec: GridSpec, block: list[tuple[int, ...]]) -> list[ScanRecord]:
    return [evaluate_point(spec, ix) for ix in block]


def default_jobs() -> int:
    env = os.environ.get("WEYLSIMPLEX_JOBS")
    if env:
        try:
            jobs = int(env)
        except ValueError as exc:
            raise DomainError(f"WEYLSIMPLEX_JOBS must be an integer, got {env!r}") from exc
        if jobs < 1:
            raise DomainError("WEYLSIMPLEX_JOBS must be positive")
        return jobs
    return os.cpu_count() or 1


def run_scan(spec: GridSpec, jobs: int | None = 1) -> list[ScanRecord]:
    """Evaluate every grid point; ``jobs=None`` uses :func:`default_jobs`."""
    cost = estimate_cost(spec)
    if cost > spec.budget_seconds:
        raise DomainError(
            f"estimated cost {cost:.0f} s for {spec.size} points exceeds the work budget "
            f"{spec.budget_seconds:.0f} s"
        )
    jobs = default_jobs() if jobs is None else jobs
    if jobs < 1:
        raise DomainError("jobs must be positive")
    idx = grid_indices(spec)
    if jobs == 1 or len(idx) < 2:
        return _evaluate_block(spec, idx)
    nblocks = min(len(idx), 8 * jobs)
    blocks = [idx[i::nblocks] for i in range(nblocks)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        done = list(pool.map(_evaluate_block, [spec] * nblocks, blocks))
    records: list[ScanRecord | None] = [None] * len(idx)
    for b, recs in enumerate(done):
        records[b::nblocks] = recs
    return records  # type: ignore[return-value]


@dataclass(frozen=True, eq=False)
class GeometryReport:
    points: int
    mismatches: list[tuple[tuple[float, float, float], tuple, tuple]]
    spot_checks: list[tuple[tuple[float, float, float], float, float]] = field(default_factory=list)

    @property
    def agrees(self) -> bool:
        return not self.mismatches


def compare_geometry(spec_a: GridSpec, spec_b: GridSpec, jobs: int | None = 1, spot: int = 5) -> GeometryReport:
    """Scan two specs that differ only in ``n`` and list points whose verdicts differ.

    With ``witness`` among the checks, up to ``spot`` detected points are
    re-evaluated against the dense witness operator for both ``n``.
    """
    if replace(spec_a, n=spec_b.n) != spec_b:
        raise DomainError("compare_geometry needs specs that are identical except for n")
    ra, rb = run_scan(spec_a, jobs), run_scan(spec_b, jobs)
    mism = [
        ((a.alpha, a.beta, a.gamma), a.verdicts(), b.verdicts())
        for a, b in zip(ra, rb)
        if a.verdicts() != b.verdicts()
    ]
    checks = []
    if "witness" in spec_a.checks:
        hits = [r for r in ra if r.witness_detected]
        for r in hits[:: max(1, len(hits) // spot)][:spot]:
            kap = WitnessCoefficients(spec_a.d, np.array(r.kappa).reshape(spec_a.d, spec_a.d))
            c = np.array(r.coefficients).reshape(spec_a.d, spec_a.d)
            vals = []
            for nn in (spec_a.n, spec_b.n):
                p = SimplexPoint(spec_a.d, nn, c)
                dense = dense_witness_value(kap, p)
                if abs(dense - witness_value(kap, p)) > 1e-9:
                    mism.append(((r.alpha, r.beta, r.gamma), ("dense", nn), (dense, witness_value(kap, p))))
                vals.append(dense / vertex_norm(spec_a.d, nn))
            checks.append(((r.alpha, r.beta, r.gamma), vals[0], vals[1]))
            if (vals[0] < 0) != (vals[1] < 0):
                mism.append(((r.alpha, r.beta, r.gamma), ("sign", vals[0]), ("sign", vals[1])))
    return GeometryReport(len(ra), mism, checks)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def export(records: list[ScanRecord], fmt: str, path: str) -> None:
    """Write ``records`` as CSV (fixed columns) or a JSON array of objects."""
    if fmt not in ("csv", "json"):
        raise DomainError(f"format must be csv or json, got {fmt!r}")
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "csv":
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(COLUMNS)
                for r in records:
                    w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
            else:
                json.dump([r.row() for r in records], fh, indent=1)
                fh.write("\n")
    except OSError as exc:
        raise DomainError(f"cannot write output file {path!r}: {exc.strerror}") from exc


_INT = {"d", "n", "distill_iterations"}
_BOOL = {"in_state_space", "witness_detected"}
_STR = {"family", "ppt_pair_verdict", "ppt_worst_cut", "distill_verdict"}


def _parse(col: str, text: str):
    if text == "":
        return None
    if col in _INT:
        return int(text)
    if col in _BOOL:
        return text == "true"
    if col in _STR:
        return text
    return float(text)


def load(path: str) -> list[dict]:
    """Read an exported file back into plain dicts keyed by column name."""
    with open(path, newline="") as fh:
        if path.endswith(".json"):
            return json.load(fh)
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise DomainError(f"{path!r} does not start with the scan CSV header")
    return [{c: _parse(c, t) for c, t in zip(COLUMNS, row)} for row in rows[1:]]


# figure presets; runtimes in the README were measured single-core
def figure_spec(which: str) -> GridSpec:
    if which == "1a":
        return GridSpec("two_vertex", 2, 1, checks=("positivity", "ppt_pair_cut"))
    if which == "1b":
        return GridSpec("two_vertex", 3, 1, checks=("positivity", "ppt_pair_cut", "witness"))
    if which == "1c":
        return GridSpec("two_vertex", 4, 1, checks=("positivity", "ppt_pair_cut"))
    if which == "2":
        ax = Axis(-0.25, 1.0, 21)
        return GridSpec("line", 3, 1, ax, ax, ax, checks=("positivity", "ppt_pair_cut", "distill"))
    raise DomainError(f"unknown figure {which!r}; expected 1a, 1b, 1c or 2")


FIGURES = ("1a", "1b", "1c", "2")

__all__ = [
    "CHECKS",
    "COLUMNS",
    "FIGURES",
    "Axis",
    "GeometryReport",
    "GridSpec",
    "ScanRecord",
    "compare_geometry",
    "default_jobs",
    "estimate_cost",
    "evaluate_point",
    "export",
    "figure_spec",
    "load",
    "run_scan",
]
