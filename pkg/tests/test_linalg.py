import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from weylsimplex.linalg import (
    DensityMatrix,
    DomainError,
    Factor,
    SystemShape,
    hermitian_spectrum,
    kron,
    kron_power,
    partial_trace,
    partial_transpose,
    permute_subsystems,
)
from weylsimplex.weyl import WeylIndex, bell_projector, weyl_operator


def qubits(n):
    return SystemShape(tuple(Factor(2, i // 2, "AB"[i % 2]) for i in range(n)))


def test_kron_identities():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(np.diag([1, -1]), np.eye(2)), np.diag([1, 1, -1, -1]))


def test_kron_cyclic_shift_on_00():
    x = np.roll(np.eye(2), 1, axis=0)
    e00 = np.zeros(4)
    e00[0] = 1
    out = kron(x, x) @ e00
    assert np.array_equal(out, [0, 0, 0, 1])


def test_kron_power_associative():
    a = np.arange(4.0).reshape(2, 2)
    assert np.allclose(kron_power(a, 3), np.kron(a, np.kron(a, a)))
    with pytest.raises(ValueError):
        kron()


def test_partial_trace_bell_qubit():
    p = bell_projector(WeylIndex(0, 0, 2))
    assert np.allclose(partial_trace(p, [0]).matrix, np.eye(2) / 2, atol=1e-12)
    assert partial_trace(p, [0, 1]) is p


def test_partial_trace_empty_keep():
    with pytest.raises(DomainError, match="cannot trace out all subsystems"):
        partial_trace(bell_projector(WeylIndex(0, 0, 2)), [])


def test_partial_trace_composes(rng):
    shape = SystemShape((Factor(2, 0, "A"), Factor(3, 0, "B"), Factor(2, 1, "A")))
    rho = DensityMatrix(random_state(rng, 12), shape)
    step = partial_trace(partial_trace(rho, [0, 2]), [1])
    once = partial_trace(rho, [2])
    assert np.allclose(step.matrix, once.matrix, atol=1e-12)
    assert abs(np.trace(once.matrix) - 1) < 1e-10


def test_partial_transpose_bell_spectrum():
    p = bell_projector(WeylIndex(0, 0, 2))
    ev = np.linalg.eigvalsh(partial_transpose(p, [1]))
    assert np.allclose(ev, [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_partial_transpose_identity_and_products(rng):
    shape = qubits(2)
    assert np.allclose(partial_transpose(np.eye(4) / 4, [0], shape=shape), np.eye(4) / 4)
    s, t = random_state(rng, 2), random_state(rng, 2)
    assert np.allclose(partial_transpose(np.kron(s, t), [0], shape=shape), np.kron(s.T, t))


def test_partial_transpose_degenerate_sets():
    p = bell_projector(WeylIndex(0, 0, 2))
    with pytest.raises(DomainError):
        partial_transpose(p, [])
    with pytest.raises(DomainError):
        partial_transpose(p, [0, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sets(st.integers(0, 2), min_size=1, max_size=2))
def test_partial_transpose_involution_and_trace(seed, subset):
    rng = np.random.default_rng(seed)
    shape = SystemShape((Factor(2, 0, "A"), Factor(3, 0, "B"), Factor(2, 1, "A")))
    rho = random_state(rng, 12)
    pt = partial_transpose(rho, subset, shape=shape)
    assert abs(np.trace(pt) - 1) < 1e-12
    assert np.allclose(pt, pt.conj().T)
    assert np.allclose(partial_transpose(pt, subset, shape=shape), rho)


def test_hermitian_spectrum_examples():
    assert np.allclose(hermitian_spectrum(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    p = bell_projector(WeylIndex(0, 0, 3))
    assert np.allclose(hermitian_spectrum(p), [0] * 8 + [1], atol=1e-12)
    ev = hermitian_spectrum(partial_transpose(p, [1]))
    assert np.allclose(ev, [-1 / 3] * 3 + [1 / 3] * 6, atol=1e-12)


def test_hermitian_spectrum_rejects_non_hermitian():
    with pytest.raises(DomainError, match="not Hermitian"):
        hermitian_spectrum(np.array([[0, 1], [0, 0]], dtype=complex))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2), st.integers(0, 2))
def test_spectrum_invariant_under_weyl_conjugation(seed, k, l):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, 3)
    w = weyl_operator(WeylIndex(k, l, 3))
    ev = hermitian_spectrum(rho)
    assert np.allclose(hermitian_spectrum(w @ rho @ w.conj().T), ev, atol=1e-12)
    assert abs(ev.sum() - 1) < 1e-8


def test_permute_subsystems_examples():
    p = bell_projector(WeylIndex(0, 0, 2))
    assert np.allclose(permute_subsystems(p, [1, 0]).matrix, p.matrix)
    assert np.array_equal(permute_subsystems(p, [0, 1]).matrix, p.matrix)
    e01 = np.zeros((4, 4))
    e01[1, 1] = 1
    e10 = np.zeros((4, 4))
    e10[2, 2] = 1
    out = permute_subsystems(DensityMatrix(e01, qubits(2)), [1, 0])
    assert np.array_equal(out.matrix, e10)
    assert out.shape.labels == ("B0", "A0")


def test_permute_subsystems_rejects_non_bijection():
    with pytest.raises(DomainError, match="not a permutation"):
        permute_subsystems(bell_projector(WeylIndex(0, 0, 2)), [0, 0])


def test_density_matrix_invariants():
    shape = qubits(2)
    with pytest.raises(DomainError, match="trace"):
        DensityMatrix(np.eye(4), shape)
    with pytest.raises(DomainError, match="hermiticity"):
        DensityMatrix(np.eye(4) / 4 + np.triu(np.ones((4, 4)), 1) * 1e-3, shape)
    with pytest.raises(DomainError, match="negative eigenvalue"):
        DensityMatrix(np.diag([0.6, 0.6, -0.2, 0.0]), shape)
    with pytest.raises(DomainError, match="does not match"):
        DensityMatrix(np.eye(2) / 2, shape)
    rho = DensityMatrix(np.eye(4) / 4, shape)
    assert not rho.matrix.flags.writeable


def test_factor_validation_and_labels():
    with pytest.raises(DomainError):
        Factor(1, 0, "A")
    with pytest.raises(DomainError):
        Factor(2, 0, "C")
    assert Factor(3, 1, "B", "target").label == "B1'"
    assert SystemShape.pairs(3, 2).labels == ("A0", "B0", "A1", "B1")
    assert SystemShape.pairs(3, 2).total_dim == 81
