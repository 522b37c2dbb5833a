"""Witnesses of the form ``K_n = sum kappa[k,l] rho_v[k,l]`` inside the n-pair simplex.

Validity of ``K_n`` reduces to positivity of the ``d x d`` matrix
``M_phi = sum kappa[k,l] W_{k,l} |phi><phi| W_{k,l}^dagger`` for every unit
``phi``, which is independent of ``n``. Everything in the coefficient path here
therefore depends on ``(d, kappa, c)`` only; ``n`` enters through the overall
scale ``Tr(rho_v^2)`` of :func:`witness_value` and the dense cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog, minimize

from . import kernels
from .linalg import PSD_TOL, DomainError, SystemShape, partial_transpose
from .simplex import SimplexPoint, combination_matrix, vertex_norm, vertex_stack

PHI_NORM_TOL = 1e-10


@dataclass(frozen=True)
class OptimizerConfig:
    """Tolerances and budgets for the witness searches.

    ``n_starts`` counts all starting vectors of the inner minimization; the
    ``2 d`` structured seeds (basis vectors and uniform-modulus Fourier
    vectors) are always included and the rest are random. ``seed`` drives the
    random starts, ``pool_seed`` the fixed product-state pool of the LP.
    """

    n_starts: int = 64
    seed: int = 0
    local: str = "alternating"
    step_tol: float = 1e-12
    max_local_iter: int = 500
    screen_iter: int = 25
    polish: int = 8
    validity_tol: float = 1e-8
    detect_tol: float = 1e-8
    optimality_tol: float = 1e-8
    max_rounds: int = 60
    pool_random: int = 2000
    cuts_per_round: int = 16
    rel_gap: float = 0.05
    certify_starts: int = 1024
    pool_seed: int = 0

    def __post_init__(self):
        if self.local not in ("alternating", "nelder-mead"):
            raise DomainError(f"unknown local method {self.local!r}")
        if self.n_starts < 1:
            raise DomainError("n_starts must be positive")


@dataclass(frozen=True, eq=False)
class WitnessCoefficients:
    """Real grid ``kappa[k, l]`` rescaled so that ``max |kappa| = 1``."""

    d: int
    kappa: np.ndarray

    def __post_init__(self):
        k = np.array(self.kappa, dtype=float, copy=True).reshape(self.d, self.d)
        scale = float(np.max(np.abs(k)))
        if scale == 0.0:
            raise DomainError("witness coefficients cannot all vanish")
        k = k / scale
        k.flags.writeable = False
        object.__setattr__(self, "kappa", k)

    @classmethod
    def indicator(cls, d: int, k: int, l: int, sign: float = 1.0) -> "WitnessCoefficients":
        kap = np.zeros((d, d))
        kap[k % d, l % d] = sign
        return cls(d, kap)

    @classmethod
    def uniform(cls, d: int) -> "WitnessCoefficients":
        return cls(d, np.ones((d, d)))


@dataclass(frozen=True, eq=False)
class ValidityReport:
    min_over_phi: float
    argmin_phi: np.ndarray
    argmin_eta: np.ndarray
    n_starts: int
    converged: bool
    tol: float = 1e-8

    @property
    def valid(self) -> bool:
        return self.min_over_phi >= -self.tol


def _as_kappa(kappa) -> np.ndarray:
    if isinstance(kappa, WitnessCoefficients):
        return np.ascontiguousarray(kappa.kappa)
    return np.ascontiguousarray(kappa, dtype=float)


def m_phi(kappa: WitnessCoefficients, phi: np.ndarray) -> np.ndarray:
    phi = np.ascontiguousarray(phi, dtype=complex)
    if abs(np.linalg.norm(phi) - 1.0) > PHI_NORM_TOL:
        raise DomainError(f"phi must be a unit vector, got norm {np.linalg.norm(phi):.12g}")
    return kernels.mphi(_as_kappa(kappa), phi)


def structured_starts(d: int) -> np.ndarray:
    basis = np.eye(d, dtype=complex)
    fourier = np.exp(2j * np.pi * np.outer(np.arange(d), np.arange(d)) / d) / np.sqrt(d)
    return np.vstack([basis, fourier])


def starting_vectors(d: int, opt: OptimizerConfig, rng: np.random.Generator) -> np.ndarray:
    """Structured seeds followed by random unit vectors from 2d real normals."""
    seeds = structured_starts(d)
    extra = max(opt.n_starts - len(seeds), 0)
    x = rng.standard_normal((extra, 2 * d))
    rand = x[:, :d] + 1j * x[:, d:]
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    return np.vstack([seeds, rand])[: max(opt.n_starts, 1)]


def _local_minima(kappa, starts, opt: OptimizerConfig):
    """Per-start ``(values, phis, etas, converged)`` of ``lambda_min(M_phi)``."""
    kappa = np.ascontiguousarray(kappa, dtype=float)
    if opt.local == "alternating":
        if len(starts) <= opt.polish:
            vals, phis, etas, its = kernels.alternating_descent(
                kappa, starts, opt.step_tol, opt.max_local_iter
            )
            return vals, phis, etas, its < opt.max_local_iter
        # screen every start briefly, then run the most promising to convergence
        vals, phis, etas, its = kernels.alternating_descent(kappa, starts, opt.step_tol, opt.screen_iter)
        done = its < opt.screen_iter
        top = np.argsort(vals)[: opt.polish]
        top = top[~done[top]]
        if len(top):
            v2, p2, e2, i2 = kernels.alternating_descent(
                kappa, np.ascontiguousarray(phis[top]), opt.step_tol, opt.max_local_iter
            )
            vals[top], phis[top], etas[top] = v2, p2, e2
            done[top] = i2 < opt.max_local_iter
        return vals, phis, etas, done
    d = kappa.shape[0]
    vals, phis, etas, conv = [], [], [], []
    for s in starts:
        res = minimize(
            lambda x: kernels.mphi_min_eig(kappa, x),
            np.concatenate([s.real, s.imag]),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": opt.step_tol, "maxiter": 400 * d, "maxfev": 800 * d},
        )
        phi = res.x[:d] + 1j * res.x[d:]
        phi /= np.linalg.norm(phi)
        w, v = np.linalg.eigh(kernels.mphi(kappa, phi))
        vals.append(w[0])
        phis.append(phi)
        etas.append(v[:, 0])
        conv.append(bool(res.success))
    return np.array(vals), np.array(phis), np.array(etas), np.array(conv)


def _validity_full(kap: np.ndarray, opt: OptimizerConfig, extra_starts=None):
    d = kap.shape[0]
    rng = np.random.default_rng(opt.seed)
    starts = starting_vectors(d, opt, rng)
    if extra_starts is not None and len(extra_starts):
        starts = np.vstack([starts, np.asarray(extra_starts, dtype=complex)])
    vals, phis, etas, conv = _local_minima(kap, starts, opt)
    j = int(np.argmin(vals))
    rep = ValidityReport(float(vals[j]), phis[j], etas[j], len(starts), bool(conv[j]), opt.validity_tol)
    return rep, vals, phis, etas


def validity(
    kappa: WitnessCoefficients,
    opt: OptimizerConfig = OptimizerConfig(),
    extra_starts: np.ndarray | None = None,
) -> ValidityReport:
    """Minimize the least eigenvalue of ``M_phi`` over unit ``phi`` by multi-start local descent."""
    return _validity_full(_as_kappa(kappa), opt, extra_starts)[0]


def optimality(kappa: WitnessCoefficients, report: ValidityReport, tol: float = 1e-8) -> bool:
    """Tangency test: ``det M_phi`` vanishes at the minimizing ``phi``."""
    m = m_phi(kappa, report.argmin_phi)
    return abs(float(np.real(np.linalg.det(m)))) <= tol


def witness_value(kappa: WitnessCoefficients, p: SimplexPoint) -> float:
    """``Tr(K_n rho) = Tr(rho_v^2) * sum kappa c`` by vertex orthogonality."""
    if kappa.d != p.d:
        raise DomainError(f"witness dimension {kappa.d} != state dimension {p.d}")
    return float(np.sum(kappa.kappa * p.c)) * vertex_norm(p.d, p.n)


def witness_operator(kappa: WitnessCoefficients, n: int) -> np.ndarray:
    return combination_matrix(kappa.d, n, kappa.kappa)


def dense_witness_value(kappa: WitnessCoefficients, p: SimplexPoint) -> float:
    """``Tr(K_n rho)`` from the dense matrices; cross-check for :func:`witness_value`."""
    if kappa.d != p.d:
        raise DomainError(f"witness dimension {kappa.d} != state dimension {p.d}")
    k = witness_operator(kappa, p.n)
    rho = combination_matrix(p.d, p.n, p.c)
    return float(np.real(np.vdot(k.conj().T, rho)))


def product_coefficients(eta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """``q[k,l] = |<eta|W_{k,l}|phi>|**2``; a product state maps to ``q / d`` in coefficient space."""
    return kernels.product_overlaps(
        np.ascontiguousarray(eta, dtype=complex), np.ascontiguousarray(phi, dtype=complex)
    )


@lru_cache(maxsize=32)
def _base_pool(d: int, n_random: int, seed: int) -> np.ndarray:
    """Deterministic starting set of product-state constraints for the witness LP."""
    rng = np.random.default_rng([seed, d, 7919])
    seeds = structured_starts(d)
    rows = []
    for eta in seeds:
        for phi in seeds:
            rows.append(product_coefficients(eta, phi).ravel())
    x = rng.standard_normal((n_random, 4 * d))
    eta = x[:, :d] + 1j * x[:, d : 2 * d]
    phi = x[:, 2 * d : 3 * d] + 1j * x[:, 3 * d :]
    eta /= np.linalg.norm(eta, axis=1, keepdims=True)
    phi /= np.linalg.norm(phi, axis=1, keepdims=True)
    for e, f in zip(eta, phi):
        rows.append(product_coefficients(e, f).ravel())
    pool = np.array(rows)
    pool.flags.writeable = False
    return pool


@dataclass(frozen=True, eq=False)
class Detection:
    """Outcome of :func:`detect`.

    ``margin`` is ``-sum(kappa * c)`` for the returned canonical ``kappa``;
    positive means the state is witnessed as entangled.
    """

    detected: bool
    margin: float
    kappa: WitnessCoefficients | None
    report: ValidityReport | None
    rounds: int
    lp_bound: float = field(default=0.0)


def _lp(c: np.ndarray, pool: np.ndarray):
    m = c.size
    return linprog(
        c,
        A_ub=-pool,
        b_ub=np.zeros(len(pool)),
        bounds=[(-1.0, 1.0)] * m,
        method="highs",
    )


def pt_seed(d: int, c: np.ndarray) -> np.ndarray | None:
    """Bell-diagonal part of the partial-transpose witness of the single-pair state ``c``.

    For an NPT state with negative partial-transpose eigenvector ``v`` the operator
    ``(|v><v|)^{T_B}`` is non-negative on products; dephasing it in the Bell basis
    keeps that property and keeps its value on simplex states. Returns ``None``
    for PPT input.
    """
    rho = combination_matrix(d, 1, c)
    pt = partial_transpose(rho, [1], shape=SystemShape.pairs(d, 1))
    w, v = np.linalg.eigh((pt + pt.conj().T) / 2)
    if w[0] >= -PSD_TOL:
        return None
    proj = np.outer(v[:, 0], v[:, 0].conj())
    wit = partial_transpose(proj, [1], shape=SystemShape.pairs(d, 1))
    return np.real(np.einsum("klij,ji->kl", vertex_stack(d, 1), wit))


def _certify(kap: np.ndarray, opt: OptimizerConfig):
    """Re-check a candidate with many fresh starts, shifting it back to validity if needed."""
    d = kap.shape[0]
    strong = replace(opt, n_starts=opt.certify_starts, seed=opt.seed + 1)
    rep, vals, phis, etas = _validity_full(kap, strong)
    if rep.min_over_phi < -opt.validity_tol:
        return None, rep, vals, phis, etas
    return kap, rep, vals, phis, etas


def _cut_rows(vals, phis, etas, opt: OptimizerConfig):
    order = np.argsort(vals)
    rows = [
        product_coefficients(etas[j], phis[j]).ravel()
        for j in order[: opt.cuts_per_round]
        if vals[j] < -opt.validity_tol
    ]
    return rows, phis[order[: opt.cuts_per_round]]


def detect(p: SimplexPoint, opt: OptimizerConfig = OptimizerConfig()) -> Detection:
    """Search for a valid ``kappa`` with ``sum kappa c < 0`` by cutting planes.

    The linear program minimizes ``sum kappa c`` over ``|kappa| <= 1`` subject
    to non-negativity on a finite pool of product states; if its optimum is
    non-negative no witness of this form detects ``c``. Otherwise the candidate
    is checked with :func:`validity`, shifted by ``eps / d`` in every coefficient
    (``-eps`` being its minimum over ``phi``; the uniform kappa has
    ``M_phi = d * 1``) and re-checked with ``certify_starts`` fresh starts.
    Violating product states found on the way join the pool. NPT states are
    tried first with the dephased partial-transpose witness.
    """
    d = p.d
    c = np.asarray(p.c, dtype=float).ravel()
    pool = np.array(_base_pool(d, opt.pool_random, opt.pool_seed))
    best_val, best_kap, best_rep = 0.0, None, None
    lp_bound = None
    warm = None
    seed = pt_seed(d, p.c)
    rounds = 0
    for rounds in range(1, opt.max_rounds + 1):
        if seed is not None:
            kap, seed = seed, None
        else:
            res = _lp(c, pool)
            if res.status != 0:
                raise RuntimeError(f"witness LP failed: {res.message}")
            lp_bound = float(res.fun)
            if lp_bound >= -opt.detect_tol:
                break
            kap = res.x.reshape(d, d)
        rep, vals, phis, etas = _validity_full(kap, opt, warm)
        rows, warm = _cut_rows(vals, phis, etas, opt)
        fixed = kap + max(0.0, -rep.min_over_phi) / d
        value = float(fixed.ravel() @ c) / float(np.max(np.abs(fixed)))
        if value < min(best_val, -opt.detect_tol):
            ok, crep, cvals, cphis, cetas = _certify(fixed, opt)
            if ok is not None:
                best_val, best_kap, best_rep = value, ok, crep
            else:
                more, _ = _cut_rows(cvals, cphis, cetas, opt)
                rows.extend(more)
        if best_kap is not None:
            if opt.rel_gap >= 1.0:
                break
            if lp_bound is not None and best_val - lp_bound <= opt.rel_gap * abs(lp_bound):
                break
        if rows:
            pool = np.vstack([pool, rows])
        elif lp_bound is not None:
            # valid LP optimum that failed only through the shift: nothing left to learn
            break
    if best_kap is None:
        return Detection(False, 0.0, None, None, rounds, lp_bound if lp_bound is not None else 0.0)
    kappa = WitnessCoefficients(d, best_kap)
    margin = -float(np.sum(kappa.kappa * p.c))
    return Detection(True, margin, kappa, best_rep, rounds, lp_bound if lp_bound is not None else -margin)
