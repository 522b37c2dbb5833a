"""Dense multipartite matrix substrate.

Every operator lives in a dense ``numpy`` array. Tensor-structure bookkeeping
is carried by :class:`SystemShape`: an ordered tuple of :class:`Factor`
descriptors, factor 0 being the slowest-varying index of the row-major layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
MAX_DIM = 2**13


class DomainError(ValueError):
    """A precondition on the physical input was violated."""


@dataclass(frozen=True)
class Factor:
    """One tensor factor: a qudit held by side ``A`` or ``B`` of pair ``pair``."""

    dim: int
    pair: int
    side: str
    copy: str = "source"

    def __post_init__(self):
        if self.dim < 2:
            raise DomainError(f"factor dimension must be >= 2, got {self.dim}")
        if self.side not in ("A", "B"):
            raise DomainError(f"side must be 'A' or 'B', got {self.side!r}")
        if self.copy not in ("source", "target"):
            raise DomainError(f"copy must be 'source' or 'target', got {self.copy!r}")

    @property
    def label(self) -> str:
        tag = f"{self.side}{self.pair}"
        return tag if self.copy == "source" else tag + "'"


@dataclass(frozen=True)
class SystemShape:
    factors: tuple[Factor, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise DomainError("a shape needs at least one factor")

    @classmethod
    def pairs(cls, d: int, n: int, copy: str = "source") -> "SystemShape":
        """Layout A0, B0, A1, B1, ... of ``n`` qudit pairs."""
        return cls(tuple(Factor(d, p, s, copy) for p in range(n) for s in ("A", "B")))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    def __len__(self) -> int:
        return len(self.factors)

    def subset(self, idx: Sequence[int]) -> "SystemShape":
        return SystemShape(tuple(self.factors[i] for i in idx))

    def permuted(self, perm: Sequence[int]) -> "SystemShape":
        return SystemShape(tuple(self.factors[i] for i in perm))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix with a subsystem layout.

    The stored array is made read-only so instances can be shared freely.
    Pass ``check=False`` only for intermediate objects whose invariants are
    enforced by the caller.
    """

    matrix: np.ndarray
    shape: SystemShape
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"density matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.shape.total_dim:
            raise DomainError(
                f"matrix dimension {m.shape[0]} does not match factor product {self.shape.total_dim}"
            )
        if m.shape[0] > MAX_DIM:
            raise DomainError(f"dimension {m.shape[0]} exceeds dense limit {MAX_DIM}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if self.check:
            problem = state_violation(m)
            if problem is not None:
                raise DomainError(f"not a density matrix: {problem}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def state_violation(m: np.ndarray) -> str | None:
    """Name the first failed density-matrix check, or ``None`` if ``m`` is a state."""
    herm = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if herm > HERMITIAN_TOL:
        return f"hermiticity violated by {herm:.3e}"
    tr = np.trace(m)
    if abs(tr - 1) > TRACE_TOL:
        return f"trace {tr.real:.12g} differs from 1 by {abs(tr - 1):.3e}"
    lo = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
    if lo < -PSD_TOL:
        return f"negative eigenvalue {lo:.6g}"
    return None


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor slowest."""
    if not mats:
        raise ValueError("kron needs at least one matrix")
    return reduce(np.kron, mats)


def kron_power(m: np.ndarray, n: int) -> np.ndarray:
    return kron(*([m] * n))


def _as_array(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)


def _check_indices(idx: Iterable[int], nfac: int) -> list[int]:
    out = sorted(set(int(i) for i in idx))
    if any(i < 0 or i >= nfac for i in out):
        raise DomainError(f"factor indices {out} out of range for {nfac} factors")
    return out


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every factor not listed in ``keep`` (kept factors stay in order)."""
    keep = _check_indices(keep, len(rho.shape))
    if not keep:
        raise DomainError("cannot trace out all subsystems")
    dims = rho.shape.dims
    nf = len(dims)
    if len(keep) == nf:
        return rho
    gone = [i for i in range(nf) if i not in keep]
    t = rho.matrix.reshape(dims + dims)
    # row axes 0..nf-1, column axes nf..2nf-1
    letters = [chr(ord("a") + i) for i in range(2 * nf)]
    for i in gone:
        letters[nf + i] = letters[i]
    out = [letters[i] for i in keep] + [letters[nf + i] for i in keep]
    red = np.einsum("".join(letters) + "->" + "".join(out), t)
    kd = int(np.prod([dims[i] for i in keep]))
    return DensityMatrix(red.reshape(kd, kd), rho.shape.subset(keep), check=False)


def partial_transpose(rho, transposed: Iterable[int], shape: SystemShape | None = None) -> np.ndarray:
    """Transpose the indices of the factors in ``transposed``.

    ``rho`` may be a :class:`DensityMatrix` or a raw array with an explicit ``shape``.
    """
    if shape is None:
        shape = rho.shape
    m = _as_array(rho)
    dims = shape.dims
    nf = len(dims)
    sel = _check_indices(transposed, nf)
    if not sel:
        raise DomainError("empty partial transposition is the identity")
    if len(sel) == nf:
        raise DomainError("transposing every factor is the global transpose, not a partial one")
    axes = list(range(2 * nf))
    for i in sel:
        axes[i], axes[nf + i] = axes[nf + i], axes[i]
    return m.reshape(dims + dims).transpose(axes).reshape(m.shape)


def hermitian_spectrum(m) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix."""
    m = _as_array(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"spectrum needs a square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m - m.conj().T)))
    if dev > HERMITIAN_TOL:
        raise DomainError(f"matrix is not Hermitian (deviation {dev:.3e})")
    return np.linalg.eigvalsh(m)


def permute_array(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new factor ``i`` is old factor ``perm[i]``."""
    nf = len(dims)
    t = m.reshape(tuple(dims) * 2)
    axes = list(perm) + [nf + p for p in perm]
    return t.transpose(axes).reshape(m.shape)


def permute_subsystems(rho: DensityMatrix, perm: Sequence[int]) -> DensityMatrix:
    perm = [int(p) for p in perm]
    nf = len(rho.shape)
    if sorted(perm) != list(range(nf)):
        raise DomainError(f"{perm} is not a permutation of {nf} factors")
    out = permute_array(rho.matrix, rho.shape.dims, perm)
    return DensityMatrix(out, rho.shape.permuted(perm), check=False)
