"""Weyl operators and generalized Bell projectors for a pair of qudits."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import DensityMatrix, DomainError, SystemShape


@dataclass(frozen=True)
class WeylIndex:
    """Label ``(k, l)`` of a Weyl operator; both entries are reduced mod ``d``."""

    k: int
    l: int
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"dimension must be >= 2, got {self.d}")
        object.__setattr__(self, "k", int(self.k) % self.d)
        object.__setattr__(self, "l", int(self.l) % self.d)

    def __add__(self, other: "WeylIndex") -> "WeylIndex":
        if other.d != self.d:
            raise DomainError("cannot add Weyl indices of different dimension")
        return WeylIndex(self.k + other.k, self.l + other.l, self.d)

    @property
    def flat(self) -> int:
        return self.k * self.d + self.l


def all_indices(d: int) -> list[WeylIndex]:
    """All ``d**2`` indices in row-major ``(k, l)`` order."""
    return [WeylIndex(k, l, d) for k in range(d) for l in range(d)]


@lru_cache(maxsize=None)
def _weyl(k: int, l: int, d: int) -> np.ndarray:
    w = np.exp(2j * np.pi / d)
    m = np.zeros((d, d), dtype=complex)
    for s in range(d):
        m[(s - l) % d, s] = w ** ((k * (s - l)) % d)
    m.flags.writeable = False
    return m


def weyl_operator(idx: WeylIndex) -> np.ndarray:
    """``W_{k,l}|s> = w^{k(s-l)} |s-l>`` with ``w = exp(2 pi i / d)``."""
    return _weyl(idx.k, idx.l, idx.d)


def weyl_table(d: int) -> np.ndarray:
    """Stack of all Weyl operators, shape ``(d, d, d, d)`` indexed ``[k, l]``."""
    return np.array([[_weyl(k, l, d) for l in range(d)] for k in range(d)])


def bell_state(d: int) -> np.ndarray:
    """Normalized maximally entangled vector ``sum_i |ii> / sqrt(d)``."""
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0
    return v / np.sqrt(d)


@lru_cache(maxsize=None)
def _bell_projector(k: int, l: int, d: int) -> np.ndarray:
    v = np.kron(np.eye(d), _weyl(k, l, d)) @ bell_state(d)
    p = np.outer(v, v.conj())
    p.flags.writeable = False
    return p


def bell_projector_matrix(idx: WeylIndex) -> np.ndarray:
    return _bell_projector(idx.k, idx.l, idx.d)


def bell_projector(idx: WeylIndex) -> DensityMatrix:
    """``P_{k,l} = (1 x W_{k,l}) P_{0,0} (1 x W_{k,l})^dagger`` on one A,B pair."""
    return DensityMatrix(_bell_projector(idx.k, idx.l, idx.d), SystemShape.pairs(idx.d, 1))
