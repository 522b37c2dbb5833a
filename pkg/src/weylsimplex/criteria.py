"""Positivity and partial-transpose verdicts across bipartitions of the 2n parties."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .linalg import (
    PSD_TOL,
    DensityMatrix,
    DomainError,
    SystemShape,
    hermitian_spectrum,
    partial_transpose,
    state_violation,
)
from .simplex import vertex_norm, vertex_stack
from .weyl import WeylIndex

NPT_TOL = 1e-9
MAX_PARTIES = 8


@dataclass(frozen=True)
class StateCheck:
    valid: bool
    problem: str | None = None
    min_eigenvalue: float | None = None


def is_state(m) -> StateCheck:
    """Check Hermiticity, unit trace and positivity; report the first failure."""
    m = np.asarray(m.matrix if isinstance(m, DensityMatrix) else m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"is_state needs a square matrix, got shape {m.shape}")
    lo = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
    problem = state_violation(m)
    return StateCheck(problem is None, problem, lo)


@dataclass(frozen=True)
class Bipartition:
    """Cut of the factors into ``side_one`` (always holds factor 0) and ``side_two``."""

    side_one: tuple[int, ...]
    side_two: tuple[int, ...]

    @classmethod
    def from_side(cls, side_one, nfactors: int) -> "Bipartition":
        one = tuple(sorted(set(side_one)))
        two = tuple(i for i in range(nfactors) if i not in one)
        if not one or not two:
            raise DomainError("both sides of a bipartition must be non-empty")
        if any(i < 0 or i >= nfactors for i in one):
            raise DomainError(f"party indices {one} out of range for {nfactors} parties")
        if 0 not in one:
            one, two = two, one
        return cls(one, two)

    def label(self, shape: SystemShape) -> str:
        labels = shape.labels
        return "".join(labels[i] for i in self.side_one) + "|" + "".join(labels[i] for i in self.side_two)

    def respects_pairs(self, shape: SystemShape) -> bool:
        """True when no A,B pair is split by the cut."""
        pair_of = [f.pair for f in shape.factors]
        ones = {pair_of[i] for i in self.side_one}
        twos = {pair_of[i] for i in self.side_two}
        return not (ones & twos)


def pair_cut(n: int) -> Bipartition:
    """Side B of the last pair against every other party (A|B for a single pair).

    For simplex states this cut has the single-pair partial-transpose spectrum
    scaled by ``1/d**2``, so its verdict does not depend on ``n``.
    """
    return Bipartition.from_side(range(2 * n - 1), 2 * n)


@dataclass(frozen=True)
class CutVerdict:
    bipartition: Bipartition
    min_pt_eigenvalue: float
    verdict: str
    label: str = ""
    respects_pairs: bool = False

    @property
    def is_npt(self) -> bool:
        return self.verdict == "NPT"


def _verdict(lo: float) -> str:
    return "NPT" if lo < -NPT_TOL else "PPT"


def min_pt_eigenvalue(m: np.ndarray, shape: SystemShape, transposed) -> float:
    pt = partial_transpose(m, transposed, shape=shape)
    return float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])


def ppt_verdict(rho: DensityMatrix, cut: Bipartition) -> CutVerdict:
    if set(cut.side_one) | set(cut.side_two) != set(range(len(rho.shape))):
        raise DomainError("bipartition does not cover the state's parties")
    lo = min_pt_eigenvalue(rho.matrix, rho.shape, cut.side_two)
    return CutVerdict(cut, lo, _verdict(lo), cut.label(rho.shape), cut.respects_pairs(rho.shape))


def all_bipartitions(nfactors: int) -> list[Bipartition]:
    """The ``2**(N-1) - 1`` distinct cuts, ordered lexicographically by ``side_one``."""
    if nfactors > MAX_PARTIES:
        raise DomainError(f"{nfactors} parties exceed the enumeration bound {MAX_PARTIES}")
    rest = range(1, nfactors)
    cuts = []
    for r in range(0, nfactors - 1):
        for extra in combinations(rest, r):
            cuts.append(Bipartition.from_side((0,) + extra, nfactors))
    return sorted(cuts, key=lambda c: c.side_one)


def all_cut_verdicts(rho: DensityMatrix) -> list[CutVerdict]:
    return [ppt_verdict(rho, cut) for cut in all_bipartitions(len(rho.shape))]


def fidelity_to_vertex(rho: DensityMatrix, idx: WeylIndex) -> float:
    """``Tr(rho rho_v) / Tr(rho_v^2)``: 1 on the vertex itself, ``1/d**2`` on white noise."""
    d = idx.d
    n = len(rho.shape) // 2
    if rho.shape.dims != (d,) * (2 * n):
        raise DomainError(f"state shape {rho.shape.dims} does not match dimension {d}")
    v = vertex_stack(d, n)[idx.k, idx.l]
    return float(np.real(np.vdot(v, rho.matrix))) / vertex_norm(d, n)


def fidelity_all_vertices(rho: DensityMatrix, d: int, n: int) -> np.ndarray:
    stack = vertex_stack(d, n)
    return np.real(np.einsum("klij,ij->kl", stack.conj(), rho.matrix)) / vertex_norm(d, n)


def min_state_eigenvalue(rho) -> float:
    return float(hermitian_spectrum(rho)[0])


__all__ = [
    "NPT_TOL",
    "PSD_TOL",
    "Bipartition",
    "CutVerdict",
    "StateCheck",
    "all_bipartitions",
    "all_cut_verdicts",
    "fidelity_all_vertices",
    "fidelity_to_vertex",
    "is_state",
    "min_pt_eigenvalue",
    "min_state_eigenvalue",
    "pair_cut",
    "ppt_verdict",
]
