"""Vertex states of the n-pair magic simplex and the parametrized families built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .linalg import MAX_DIM, DensityMatrix, DomainError, SystemShape, kron_power
from .weyl import WeylIndex, _bell_projector

COEFF_TOL = 1e-12
SUM_TOL = 1e-10
FAMILIES = ("two_vertex", "line")
STACK_BYTES = 2**30


class OutsideStateSpace(DomainError):
    """Raised when family parameters induce a negative simplex coefficient."""

    def __init__(self, index: tuple[int, int], value: float):
        self.index = index
        self.value = value
        super().__init__(
            f"outside state space (positivity violated): c{index} = {value:.6g} < 0"
        )


def vertex_norm(d: int, n: int) -> float:
    """``Tr(rho_v^2)`` of any vertex state: 1 for a single pair, ``1/d**2`` otherwise."""
    return 1.0 if n == 1 else 1.0 / d**2


@lru_cache(maxsize=16)
def vertex_stack(d: int, n: int) -> np.ndarray:
    """All vertex matrices, shape ``(d, d, D, D)`` with ``D = d**(2n)``, indexed ``[k, l]``."""
    if n < 1:
        raise DomainError(f"pair count must be >= 1, got {n}")
    D = d ** (2 * n)
    if D > MAX_DIM or 16 * d**2 * D**2 > STACK_BYTES:
        raise DomainError(f"d={d}, n={n} gives dimension {D}; the {d * d} dense vertex matrices exceed the memory limit")
    out = np.zeros((d, d, D, D), dtype=complex)
    if n == 1:
        for k in range(d):
            for l in range(d):
                out[k, l] = _bell_projector(k, l, d)
    else:
        heads = {(i, j): kron_power(_bell_projector(i, j, d), n - 1) for i in range(d) for j in range(d)}
        for k in range(d):
            for l in range(d):
                acc = np.zeros((D, D), dtype=complex)
                for i in range(d):
                    for j in range(d):
                        acc += np.kron(heads[i, j], _bell_projector((i + k) % d, (j + l) % d, d))
                out[k, l] = acc / d**2
    out.flags.writeable = False
    return out


def vertex_state(d: int, n: int, idx: WeylIndex) -> DensityMatrix:
    """Vertex ``(k, l)``: the Weyl-conjugated generalized Smolin state of ``n`` pairs.

    For ``n == 1`` this is the Bell projector ``P_{k,l}``. For ``n >= 2`` the
    Weyl operator acts on side B of the last pair.
    """
    if idx.d != d:
        raise DomainError(f"index dimension {idx.d} != {d}")
    return DensityMatrix(vertex_stack(d, n)[idx.k, idx.l], SystemShape.pairs(d, n))


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """Probability grid ``c[k, l]`` over the ``d**2`` vertex states of ``n`` pairs."""

    d: int
    n: int
    c: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        c = np.array(self.c, dtype=float, copy=True)
        if c.size != self.d * self.d:
            raise DomainError(f"need {self.d * self.d} coefficients for d = {self.d}, got {c.size}")
        c = c.reshape(self.d, self.d)
        c.flags.writeable = False
        object.__setattr__(self, "c", c)
        if self.n < 1:
            raise DomainError(f"pair count must be >= 1, got {self.n}")
        if self.check:
            k, l = np.unravel_index(int(np.argmin(c)), c.shape)
            if c[k, l] < -COEFF_TOL:
                raise OutsideStateSpace((int(k), int(l)), float(c[k, l]))
            if abs(c.sum() - 1.0) > SUM_TOL:
                raise DomainError(f"coefficients sum to {c.sum():.12g}, not 1")

    @classmethod
    def indicator(cls, d: int, n: int, k: int, l: int) -> "SimplexPoint":
        c = np.zeros((d, d))
        c[k % d, l % d] = 1.0
        return cls(d, n, c)

    @classmethod
    def uniform(cls, d: int, n: int) -> "SimplexPoint":
        return cls(d, n, np.full((d, d), 1.0 / d**2))

    def with_n(self, n: int) -> "SimplexPoint":
        return SimplexPoint(self.d, n, self.c, check=self.check)


def combination_matrix(d: int, n: int, c: np.ndarray) -> np.ndarray:
    """Dense ``sum c[k,l] rho_v[k,l]`` without any validity checks."""
    return np.tensordot(np.asarray(c, dtype=float).reshape(d, d), vertex_stack(d, n), axes=([0, 1], [0, 1]))


def simplex_state(p: SimplexPoint) -> DensityMatrix:
    return DensityMatrix(combination_matrix(p.d, p.n, p.c), SystemShape.pairs(p.d, p.n), check=False)


@dataclass(frozen=True)
class FamilyParams:
    d: int
    n: int
    alpha: float
    beta: float
    gamma: float = 0.0


def family_coefficients(fp: FamilyParams, family: str) -> np.ndarray:
    """Effective ``c[k, l]`` of a family point, without the positivity check."""
    d = fp.d
    if family == "two_vertex":
        c = np.full((d, d), (1.0 - fp.alpha - fp.beta) / d**2)
        c[0, 0] += fp.alpha
        c[0, 1] += fp.beta
    elif family == "line":
        if d != 3:
            raise DomainError(f"the line family is defined for d = 3 only, got d = {d}")
        c = np.full((3, 3), (1.0 - fp.alpha - fp.beta - fp.gamma) / 9.0)
        c[0, 0] += fp.alpha
        c[0, 1] += fp.beta
        c[0, 2] += fp.gamma
    else:
        raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return c


def to_simplex_point(fp: FamilyParams, family: str) -> SimplexPoint:
    """Mix vertex ``(0,0)``, ``(0,1)`` [and ``(0,2)``] with the maximally mixed state.

    The identity term is read as the uniform simplex point, i.e. trace-normalized
    for every ``n``. Negative parameters are allowed while all coefficients stay
    non-negative.
    """
    return SimplexPoint(fp.d, fp.n, family_coefficients(fp, family))


def mixedness(rho: DensityMatrix) -> float:
    """Normalized linear entropy ``D/(D-1) (1 - Tr rho^2)`` with ``D`` the full dimension."""
    m = rho.matrix
    D = m.shape[0]
    purity = float(np.real(np.vdot(m.conj().T, m)))
    return D / (D - 1) * (1.0 - purity)


@dataclass(frozen=True, eq=False)
class SimplexProjection:
    coefficients: np.ndarray
    residual: float
    d: int
    n: int

    def to_point(self) -> SimplexPoint:
        return SimplexPoint(self.d, self.n, self.coefficients)


def project_to_simplex(rho: DensityMatrix, d: int, n: int) -> SimplexProjection:
    """Least-squares coefficients over the mutually orthogonal vertex states plus residual norm."""
    if rho.shape.dims != (d,) * (2 * n):
        raise DomainError(f"state shape {rho.shape.dims} does not match d={d}, n={n}")
    stack = vertex_stack(d, n)
    m = rho.matrix
    # Tr(rho V) with V Hermitian
    c = np.real(np.einsum("klij,ji->kl", stack, m)) / vertex_norm(d, n)
    recon = combination_matrix(d, n, c)
    resid = float(np.linalg.norm(m - recon))
    return SimplexProjection(c, resid, d, n)
