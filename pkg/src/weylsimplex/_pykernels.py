"""Pure-numpy reference kernels. Same signatures as the compiled ``_ckernels``."""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _shift_phases(d: int):
    r = np.arange(d)
    phase = np.exp(2j * np.pi * np.outer(np.arange(d), r) / d)  # [k, r] = w^{k r}
    shift = (r[None, :] + r[:, None]) % d  # [l, r] = (r + l) mod d
    return phase, shift


_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _tables(d: int):
    t = _CACHE.get(d)
    if t is None:
        t = _CACHE[d] = _shift_phases(d)
    return t


def weyl_images(phi: np.ndarray) -> np.ndarray:
    """``[k, l, :] = W_{k,l} phi`` where ``(W_{k,l} phi)[r] = w^{k r} phi[r + l]``."""
    d = phi.shape[0]
    phase, shift = _tables(d)
    return phase[:, None, :] * phi[shift][None, :, :]


def mphi(kappa: np.ndarray, phi: np.ndarray) -> np.ndarray:
    v = weyl_images(np.asarray(phi, dtype=complex))
    return np.einsum("kl,kli,klj->ij", kappa, v, v.conj())


def _dual(kappa: np.ndarray, eta: np.ndarray) -> np.ndarray:
    # sum kappa W^dag |eta><eta| W; (W^dag eta)[s] = w^{-k(s-l)} eta[s-l]
    d = eta.shape[0]
    phase, shift = _tables(d)
    s = np.arange(d)
    u = np.empty((d, d, d), dtype=complex)
    for l in range(d):
        src = (s - l) % d
        u[:, l, :] = phase[:, src].conj() * eta[src][None, :]
    return np.einsum("kl,kli,klj->ij", kappa, u, u.conj())


def mphi_min_eig(kappa: np.ndarray, x: np.ndarray) -> float:
    d = kappa.shape[0]
    phi = x[:d] + 1j * x[d:]
    nrm = np.linalg.norm(phi)
    if nrm == 0.0:
        return float("inf")
    return float(np.linalg.eigvalsh(mphi(kappa, phi / nrm))[0])


def alternating_descent(kappa, starts, tol=1e-12, max_iter=500):
    """Alternate exact minimizations over ``eta`` and ``phi`` of ``<eta|M_phi|eta>``.

    Returns per-start ``(values, phis, etas, iterations)``; each value is the
    least eigenvalue of ``M_phi`` at the returned ``phi``.
    """
    kappa = np.ascontiguousarray(kappa, dtype=float)
    starts = np.asarray(starts, dtype=complex)
    S, d = starts.shape
    values = np.empty(S)
    phis = np.empty((S, d), dtype=complex)
    etas = np.empty((S, d), dtype=complex)
    iters = np.empty(S, dtype=np.int64)
    for j in range(S):
        phi = starts[j] / np.linalg.norm(starts[j])
        w, v = np.linalg.eigh(mphi(kappa, phi))
        lam, eta = w[0], v[:, 0]
        it = 0
        while it < max_iter:
            it += 1
            w2, v2 = np.linalg.eigh(_dual(kappa, eta))
            phi = v2[:, 0]
            w, v = np.linalg.eigh(mphi(kappa, phi))
            new, eta = w[0], v[:, 0]
            if lam - new < tol:
                lam = min(lam, new)
                break
            lam = new
        values[j] = lam
        phis[j] = phi
        etas[j] = eta
        iters[j] = it
    return values, phis, etas, iters


def product_overlaps(eta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """``q[k, l] = |<eta|W_{k,l}|phi>|**2``."""
    v = weyl_images(np.asarray(phi, dtype=complex))
    return np.abs(np.einsum("i,kli->kl", np.asarray(eta).conj(), v)) ** 2


def convolve_phase(c: np.ndarray) -> np.ndarray:
    """``out[K, l] = sum_k c[k, l] c[K - k, l]`` (unnormalized)."""
    d = c.shape[0]
    out = np.zeros_like(c, dtype=float)
    for k in range(d):
        out += c[k][None, :] * np.roll(c, k, axis=0)
    return out
