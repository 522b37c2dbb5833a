"""Two-copy recurrence distillation of simplex states.

Each party holds a source dit (copy one) and a target dit (copy two), applies
the local gate ``U_m`` to that pair, projects the target onto ``|m>`` and
discards it. With ``U_m`` the swap ``|i,i> <-> |i,m>`` (``i != m``) the
post-selection keeps exactly the terms in which target and source agree, so a
round filters shift errors (the ``l`` label) while phase errors (``k``) add up.
The ``"alternating"`` schedule conjugates every second round by the local
Fourier transform, which swaps the two roles and lets the iteration reach a
vertex. ``"computational"`` repeats the plain round.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .criteria import fidelity_all_vertices
from .linalg import DensityMatrix, DomainError, Factor, SystemShape, kron, permute_array
from .simplex import SimplexPoint, combination_matrix, project_to_simplex, vertex_norm
from .weyl import _bell_projector

SCHEDULES = ("alternating", "computational")
PLACEMENTS = ("per_party", "per_pair")
PATHS = ("auto", "dense", "coefficient")
MAX_TWO_COPY_DIM = 256
ABORT_PROBABILITY = 1e-14


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol knobs. ``m=None`` means ``d - 1``.

    ``placement`` selects where gates act: one per party (both sides of every
    pair) or one per pair on side A only.
    """

    m: int | None = None
    max_iterations: int = 50
    fidelity_target: float = 0.99
    convergence_tol: float = 1e-10
    schedule: str = "alternating"
    placement: str = "per_party"
    path: str = "auto"

    def __post_init__(self):
        if self.schedule not in SCHEDULES:
            raise DomainError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if self.placement not in PLACEMENTS:
            raise DomainError(f"placement must be one of {PLACEMENTS}, got {self.placement!r}")
        if self.path not in PATHS:
            raise DomainError(f"path must be one of {PATHS}, got {self.path!r}")
        if self.max_iterations < 0:
            raise DomainError("max_iterations must be non-negative")

    def target_index(self, d: int) -> int:
        m = d - 1 if self.m is None else self.m
        if not 0 <= m < d:
            raise DomainError(f"target index m={m} outside [0, {d})")
        return m


def u_m_gate(d: int, m: int) -> np.ndarray:
    """Swap ``|i,i> <-> |i,m>`` for every ``i != m`` on (source, target); identity elsewhere."""
    if not 0 <= m < d:
        raise DomainError(f"target index m={m} outside [0, {d})")
    perm = np.arange(d * d)
    for i in range(d):
        if i != m:
            a, b = i * d + i, i * d + m
            perm[a], perm[b] = b, a
    u = np.zeros((d * d, d * d))
    u[perm, np.arange(d * d)] = 1.0
    assert np.allclose(u @ u.T, np.eye(d * d))
    return u


def gate_parties(shape: SystemShape, placement: str) -> list[int]:
    """Indices of the (canonically ordered) parties that apply ``U_m``."""
    if placement == "per_party":
        return list(range(len(shape)))
    return [i for i, f in enumerate(shape.factors) if f.side == "A"]


def _kraus(d: int, m: int, gated: bool) -> np.ndarray:
    """``(1 x <m|) U_m`` (or without the gate) as a ``d x d**2`` map on (source, target)."""
    proj = np.kron(np.eye(d), np.eye(d)[m][None, :])
    return proj @ u_m_gate(d, m) if gated else proj


@lru_cache(maxsize=64)
def _protocol_map(d: int, n: int, m: int, placement: str) -> np.ndarray:
    shape = SystemShape.pairs(d, n)
    gated = set(gate_parties(shape, placement))
    return kron(*[_kraus(d, m, j in gated) for j in range(2 * n)])


def fourier(d: int) -> np.ndarray:
    w = np.exp(2j * np.pi / d)
    return np.array([[w ** (s * t) for t in range(d)] for s in range(d)]) / np.sqrt(d)


@lru_cache(maxsize=16)
def _fourier_local(d: int, n: int) -> np.ndarray:
    f = fourier(d)
    return kron(*([np.kron(f, f.conj())] * n))


@lru_cache(maxsize=16)
def fourier_relabel(d: int) -> np.ndarray:
    """Index map ``s`` with ``(F x F*) P_{k,l} (F x F*)^dagger = P_{s[k,l]}``, flattened."""
    r = np.kron(fourier(d), fourier(d).conj())
    images = {}
    for k in range(d):
        for l in range(d):
            images[(k, l)] = r @ _bell_projector(k, l, d) @ r.conj().T
    out = np.empty(d * d, dtype=int)
    for (k, l), img in images.items():
        hits = [a * d + b for a in range(d) for b in range(d) if np.allclose(img, _bell_projector(a, b, d), atol=1e-10)]
        if len(hits) != 1:
            raise RuntimeError("local Fourier transform does not permute Bell projectors")
        out[k * d + l] = hits[0]
    return out


def _canonical_order(shape: SystemShape) -> list[int]:
    key = {(f.pair, f.side): i for i, f in enumerate(shape.factors)}
    n = len(shape) // 2
    try:
        return [key[(p, s)] for p in range(n) for s in ("A", "B")]
    except KeyError as exc:
        raise DomainError(f"state factors {shape.labels} are not n complete A,B pairs") from exc


@dataclass(frozen=True, eq=False)
class StepOutcome:
    post_state: DensityMatrix
    success_probability: float
    simplex_residual: float


def _check_d(d: int):
    if d not in (2, 3):
        raise DomainError(f"distillation is supported for d = 3 (and d = 2), got d = {d}")


def _dense_round(m2: np.ndarray, d: int, n: int, m: int, placement: str, fourier_round: bool):
    """One round on a canonically ordered matrix; returns (unnormalized output, probability)."""
    if fourier_round:
        r = _fourier_local(d, n)
        m2 = r @ m2 @ r.conj().T
    two = np.kron(m2, m2)
    nf = 2 * n
    dims = (d,) * (2 * nf)
    # copy one first, then copy two; interleave to (src_j, tgt_j) per party
    perm = [x for j in range(nf) for x in (j, nf + j)]
    two = permute_array(two, dims, perm)
    k = _protocol_map(d, n, m, placement)
    out = k @ two @ k.conj().T
    if fourier_round:
        r = _fourier_local(d, n)
        out = r.conj().T @ out @ r
    return out, float(np.real(np.trace(out)))


def protocol_step(rho: DensityMatrix, cfg: ProtocolConfig = ProtocolConfig(), fourier_round: bool = False) -> StepOutcome:
    """Run steps one to four once on a dense state (any factor order)."""
    nf = len(rho.shape)
    if nf % 2:
        raise DomainError("a distillation input needs 2n parties")
    n = nf // 2
    d = rho.shape.factors[0].dim
    _check_d(d)
    if d ** (2 * nf) > MAX_TWO_COPY_DIM:
        raise DomainError(
            f"two-copy dimension {d ** (2 * nf)} exceeds the dense limit {MAX_TWO_COPY_DIM}"
        )
    m = cfg.target_index(d)
    order = _canonical_order(rho.shape)
    canon = permute_array(rho.matrix, rho.shape.dims, order)
    out, prob = _dense_round(canon, d, n, m, cfg.placement, fourier_round)
    if prob <= ABORT_PROBABILITY:
        raise DomainError("protocol aborts: projection annihilates state")
    out = out / prob
    out = (out + out.conj().T) / 2
    inverse = list(np.argsort(order))
    restored = permute_array(out, (d,) * nf, inverse)
    post = DensityMatrix(restored, rho.shape)
    resid = project_to_simplex(DensityMatrix(out, SystemShape.pairs(d, n), check=False), d, n).residual
    return StepOutcome(post, prob, resid)


def coefficient_step(c: np.ndarray, fourier_round: bool = False) -> tuple[np.ndarray, float]:
    """Single-pair round in coefficient space: ``c'[K,l] ~ sum_k c[k,l] c[K-k,l]``.

    The success probability is ``sum_l (sum_k c[k,l])**2 / d``.
    """
    d = c.shape[0]
    flat = np.asarray(c, dtype=float).ravel()
    if fourier_round:
        s = fourier_relabel(d)
        moved = np.empty_like(flat)
        moved[s] = flat
        flat = moved
    out = kernels.convolve_phase(np.ascontiguousarray(flat.reshape(d, d))).ravel()
    total = float(out.sum())
    if fourier_round:
        out = out[fourier_relabel(d)]
    return out.reshape(d, d), total / d


@dataclass(frozen=True, eq=False)
class DistillationTrace:
    fidelities: list[float]
    success_probabilities: list[float]
    residuals: list[float]
    best_vertices: list[tuple[int, int]]
    final: np.ndarray
    iterations: int
    reason: str
    path: str = field(default="dense")

    @property
    def final_fidelity(self) -> float:
        return self.fidelities[-1]

    @property
    def reached_target(self) -> bool:
        return self.reason == "target"


def _use_coefficients(n: int, cfg: ProtocolConfig) -> bool:
    if cfg.path == "coefficient":
        if n != 1 or cfg.placement != "per_party":
            raise DomainError("the coefficient path is verified for n = 1 with per-party gates only")
        return True
    if cfg.path == "dense":
        return False
    return n == 1 and cfg.placement == "per_party"


def iterate(p: SimplexPoint, cfg: ProtocolConfig = ProtocolConfig()) -> DistillationTrace:
    """Repeat the round until the best vertex fidelity reaches the target or the state is stationary."""
    d, n = p.d, p.n
    _check_d(d)
    cfg.target_index(d)
    coeff = _use_coefficients(n, cfg)
    c = np.array(p.c, dtype=float)
    rho = None if coeff else combination_matrix(d, n, c)
    shape = SystemShape.pairs(d, n)

    def fid(cur_c, cur_rho):
        if coeff:
            f = cur_c
        else:
            f = fidelity_all_vertices(DensityMatrix(cur_rho, shape, check=False), d, n)
        j = int(np.argmax(f))
        return float(f.ravel()[j]), (j // d, j % d)

    f0, v0 = fid(c, rho)
    fids, probs, resids, verts = [f0], [], [], [v0]
    reason = "target" if f0 >= cfg.fidelity_target else "max_iterations"
    it = 0
    while reason != "target" and it < cfg.max_iterations:
        it += 1
        frnd = cfg.schedule == "alternating" and it % 2 == 0
        if coeff:
            new_c, prob = coefficient_step(c, frnd)
            if prob <= ABORT_PROBABILITY:
                raise DomainError("protocol aborts: projection annihilates state")
            new_c = new_c / new_c.sum()
            change = float(np.linalg.norm(new_c - c)) * np.sqrt(vertex_norm(d, n))
            c = new_c
            probs.append(prob)
            resids.append(0.0)
        else:
            out = protocol_step(DensityMatrix(rho, shape, check=False), cfg, frnd)
            new_rho = out.post_state.matrix
            change = float(np.linalg.norm(new_rho - rho))
            rho = new_rho
            probs.append(out.success_probability)
            resids.append(out.simplex_residual)
        f, v = fid(c, rho)
        fids.append(f)
        verts.append(v)
        if f >= cfg.fidelity_target:
            reason = "target"
        elif change < cfg.convergence_tol:
            reason = "stationary"
            break
    if coeff:
        final = c
    else:
        final = project_to_simplex(DensityMatrix(rho, shape, check=False), d, n).coefficients
    return DistillationTrace(fids, probs, resids, verts, final, it, reason, "coefficient" if coeff else "dense")


@dataclass(frozen=True)
class DistillVerdict:
    verdict: str
    final_fidelity: float
    iterations: int
    m: int
    vertex: tuple[int, int]


def classify_distillability(p: SimplexPoint, cfg: ProtocolConfig = ProtocolConfig()) -> DistillVerdict:
    """``converges_to_vertex`` if some target index ``m`` drives the state to any vertex."""
    best = None
    for m in range(p.d):
        tr = iterate(p, ProtocolConfig(m, cfg.max_iterations, cfg.fidelity_target, cfg.convergence_tol,
                                       cfg.schedule, cfg.placement, cfg.path))
        cand = DistillVerdict(
            "converges_to_vertex" if tr.reached_target else "stalls",
            tr.final_fidelity, tr.iterations, m, tr.best_vertices[-1],
        )
        if best is None or _better(cand, best):
            best = cand
    return best


def _better(a: DistillVerdict, b: DistillVerdict) -> bool:
    ra, rb = a.verdict == "converges_to_vertex", b.verdict == "converges_to_vertex"
    if ra != rb:
        return ra
    if ra:
        return a.iterations < b.iterations
    return a.final_fidelity > b.final_fidelity + 1e-15


__all__ = [
    "DistillVerdict",
    "DistillationTrace",
    "Factor",
    "ProtocolConfig",
    "StepOutcome",
    "classify_distillability",
    "coefficient_step",
    "fourier_relabel",
    "gate_parties",
    "iterate",
    "protocol_step",
    "u_m_gate",
]
