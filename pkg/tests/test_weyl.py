import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylsimplex.linalg import DomainError
from weylsimplex.weyl import (
    WeylIndex,
    all_indices,
    bell_projector,
    bell_state,
    weyl_operator,
    weyl_table,
)

DIMS = (2, 3, 4, 5)


def test_weyl_examples():
    assert np.allclose(weyl_operator(WeylIndex(0, 0, 3)), np.eye(3))
    assert np.allclose(weyl_operator(WeylIndex(1, 0, 2)), np.diag([1, -1]))
    flip = weyl_operator(WeylIndex(0, 1, 2))
    assert np.allclose(flip, [[0, 1], [1, 0]])


def test_weyl_entries_follow_definition():
    d = 5
    w = np.exp(2j * np.pi / d)
    for idx in all_indices(d):
        m = weyl_operator(idx)
        for s in range(d):
            col = np.zeros(d)
            col[(s - idx.l) % d] = 1
            assert np.allclose(m[:, s], w ** (idx.k * (s - idx.l)) * col)


def test_index_reduction():
    i = WeylIndex(-1, 7, 3)
    assert (i.k, i.l) == (2, 1)
    assert (i + WeylIndex(2, 2, 3)) == WeylIndex(1, 0, 3)
    with pytest.raises(DomainError):
        WeylIndex(0, 0, 3) + WeylIndex(0, 0, 2)
    with pytest.raises(DomainError):
        WeylIndex(0, 0, 1)


@pytest.mark.parametrize("d", DIMS)
def test_unitarity_and_trace_orthogonality(d):
    t = weyl_table(d).reshape(d * d, d, d)
    for w in t:
        assert np.allclose(w @ w.conj().T, np.eye(d), atol=1e-10)
    gram = np.array([[np.trace(a.conj().T @ b) for b in t] for a in t])
    assert np.allclose(gram, d * np.eye(d * d), atol=1e-10)


@pytest.mark.parametrize("d", DIMS)
def test_composition_up_to_phase(d):
    for a in all_indices(d):
        for b in all_indices(d):
            prod = weyl_operator(a) @ weyl_operator(b)
            ref = weyl_operator(a + b)
            z = np.trace(ref.conj().T @ prod) / d
            assert abs(abs(z) - 1) < 1e-10
            assert np.allclose(prod, z * ref, atol=1e-10)


@pytest.mark.parametrize("d", DIMS)
def test_bell_state_norm(d):
    v = bell_state(d)
    assert abs(np.vdot(v, v) - 1) < 1e-12
    assert np.allclose(v[:: d + 1], 1 / np.sqrt(d))


def test_bell_projector_examples():
    p = bell_projector(WeylIndex(0, 0, 2)).matrix
    ref = np.zeros((4, 4))
    ref[np.ix_([0, 3], [0, 3])] = 0.5
    assert np.allclose(p, ref)
    a = bell_projector(WeylIndex(0, 0, 3)).matrix
    b = bell_projector(WeylIndex(1, 2, 3)).matrix
    assert abs(np.trace(a @ b)) < 1e-12


@pytest.mark.parametrize("d", DIMS)
def test_projectors_orthonormal_and_resolve_identity(d):
    ps = [bell_projector(i).matrix for i in all_indices(d)]
    assert np.allclose(sum(ps), np.eye(d * d), atol=1e-10)
    for i, a in enumerate(ps):
        assert np.allclose(a @ a, a, atol=1e-12)
        assert abs(np.trace(a) - 1) < 1e-12
        for b in ps[i + 1 :]:
            assert abs(np.trace(a @ b)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(DIMS), st.integers(0, 2**32 - 1))
def test_twirl_identity(d, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    x = g + g.conj().T
    t = weyl_table(d).reshape(d * d, d, d)
    tw = sum(w @ x @ w.conj().T for w in t) / d**2
    assert np.allclose(tw, np.trace(x) / d * np.eye(d), atol=1e-10)


def test_conjugation_permutes_projectors():
    d = 3
    for a in all_indices(d):
        w = np.kron(np.eye(d), weyl_operator(a))
        for b in all_indices(d):
            img = w @ bell_projector(b).matrix @ w.conj().T
            assert np.allclose(img, bell_projector(a + b).matrix, atol=1e-12)
