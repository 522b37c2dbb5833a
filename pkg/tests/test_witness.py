import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylsimplex.criteria import pair_cut, ppt_verdict
from weylsimplex.linalg import DomainError
from weylsimplex.simplex import FamilyParams, SimplexPoint, simplex_state, to_simplex_point, vertex_norm
from weylsimplex.weyl import _bell_projector
from weylsimplex.witness import (
    OptimizerConfig,
    WitnessCoefficients,
    dense_witness_value,
    detect,
    m_phi,
    optimality,
    pt_seed,
    validity,
    witness_operator,
    witness_value,
)


def unit(rng, d):
    x = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return x / np.linalg.norm(x)


@pytest.mark.parametrize("d", [2, 3])
def test_m_phi_uniform_is_twirl(d):
    rng = np.random.default_rng(0)
    phi = unit(rng, d)
    assert np.allclose(m_phi(WitnessCoefficients.uniform(d), phi), d * np.eye(d), atol=1e-12)
    m = m_phi(WitnessCoefficients.indicator(d, 0, 0), phi)
    assert np.allclose(m, np.outer(phi, phi.conj()), atol=1e-12)
    assert abs(np.linalg.det(m)) < 1e-12


def test_m_phi_two_term_example():
    kap = WitnessCoefficients(2, np.array([[1.0, -1.0], [0.0, 0.0]]))
    m = m_phi(kap, np.array([1.0, 0.0]))
    assert np.allclose(np.linalg.eigvalsh(m), [-1, 1])


def test_m_phi_rejects_unnormalized():
    with pytest.raises(DomainError, match="unit vector"):
        m_phi(WitnessCoefficients.uniform(2), np.array([1.0, 1.0]))


def test_coefficients_normalize_and_reject_zero():
    k = WitnessCoefficients(2, np.array([[2.0, -4.0], [1.0, 0.0]]))
    assert np.max(np.abs(k.kappa)) == 1.0 and k.kappa[0, 1] == -1.0
    with pytest.raises(DomainError):
        WitnessCoefficients(3, np.zeros((3, 3)))


@pytest.mark.parametrize("local", ["alternating", "nelder-mead"])
def test_validity_examples(local):
    opt = OptimizerConfig(local=local, n_starts=16)
    for d in (2, 3):
        rep = validity(WitnessCoefficients.uniform(d), opt)
        assert abs(rep.min_over_phi - d) < 1e-8 and rep.valid
        rep = validity(WitnessCoefficients.indicator(d, 0, 0), opt)
        assert abs(rep.min_over_phi) < 1e-8 and rep.valid
        assert optimality(WitnessCoefficients.indicator(d, 0, 0), rep)
    rep = validity(WitnessCoefficients.indicator(2, 0, 0, sign=-1.0), opt)
    assert abs(rep.min_over_phi + 1) < 1e-8 and not rep.valid


def test_uniform_not_optimal():
    kap = WitnessCoefficients.uniform(3)
    rep = validity(kap)
    assert not optimality(kap, rep)
    assert abs(np.linalg.det(m_phi(kap, rep.argmin_phi)) - 27) < 1e-8


def test_report_bounds_every_probe():
    rng = np.random.default_rng(4)
    kap = WitnessCoefficients(3, rng.uniform(-0.3, 1.0, (3, 3)))
    rep = validity(kap)
    for _ in range(300):
        lo = np.linalg.eigvalsh(m_phi(kap, unit(rng, 3)))[0]
        assert rep.min_over_phi <= lo + 1e-10


def test_nelder_mead_agrees_with_alternating():
    rng = np.random.default_rng(8)
    kap = WitnessCoefficients(3, rng.uniform(-0.5, 1.0, (3, 3)))
    a = validity(kap, OptimizerConfig(local="alternating")).min_over_phi
    b = validity(kap, OptimizerConfig(local="nelder-mead", n_starts=32)).min_over_phi
    assert abs(a - b) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_validity_scale_invariant(seed, s):
    rng = np.random.default_rng(seed)
    k = rng.uniform(-0.4, 1.0, (2, 2))
    a = validity(WitnessCoefficients(2, k))
    b = validity(WitnessCoefficients(2, s * k))
    assert a.valid == b.valid
    assert abs(a.min_over_phi - b.min_over_phi) < 1e-9


def test_witness_value_examples():
    for d, n in [(2, 1), (3, 2)]:
        p = SimplexPoint(d, n, np.random.default_rng(1).dirichlet(np.ones(d * d)).reshape(d, d))
        assert abs(witness_value(WitnessCoefficients.uniform(d), p) - vertex_norm(d, n)) < 1e-12
    assert witness_value(WitnessCoefficients.indicator(3, 0, 0), SimplexPoint.indicator(3, 1, 0, 1)) == 0
    with pytest.raises(DomainError):
        witness_value(WitnessCoefficients.uniform(2), SimplexPoint.uniform(3, 1))


def test_coefficient_value_matches_dense_d3_n2():
    rng = np.random.default_rng(2)
    for _ in range(10):
        kap = WitnessCoefficients(3, rng.uniform(-1, 1, (3, 3)))
        p = SimplexPoint(3, 2, rng.dirichlet(np.ones(9)).reshape(3, 3))
        assert abs(witness_value(kap, p) - dense_witness_value(kap, p)) < 1e-9


def test_bilinearity():
    rng = np.random.default_rng(3)
    k1, k2 = rng.uniform(-1, 1, (2, 3, 3))
    p = SimplexPoint(3, 1, rng.dirichlet(np.ones(9)).reshape(3, 3))
    w = lambda k: float(np.sum(k * p.c))
    a, b = 0.3, 1.7
    lhs = w(a * k1 + b * k2)
    assert abs(lhs - (a * w(k1) + b * w(k2))) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_n_independence_dense(d):
    rng = np.random.default_rng(10 + d)
    for _ in range(100):
        kap = WitnessCoefficients(d, rng.uniform(-1, 1, (d, d)))
        c = rng.dirichlet(np.ones(d * d)).reshape(d, d)
        v1 = dense_witness_value(kap, SimplexPoint(d, 1, c))
        v2 = dense_witness_value(kap, SimplexPoint(d, 2, c))
        assert abs(v1 - float(np.sum(kap.kappa * c))) < 1e-9
        assert abs(v2 - v1 / d**2) < 1e-9
        assert (v1 < 0) == (v2 < 0)


def test_detect_vertex_and_uniform():
    det = detect(SimplexPoint.indicator(2, 1, 0, 0))
    assert det.detected and det.margin > 0.4
    assert det.report.valid
    assert not detect(SimplexPoint.uniform(3, 1)).detected
    assert pt_seed(3, SimplexPoint.uniform(3, 1).c) is None


def soundness(kappa: WitnessCoefficients, rng, count=1000):
    k1 = witness_operator(kappa, 1)
    d = kappa.d
    worst = np.inf
    for _ in range(count):
        v = np.kron(unit(rng, d), unit(rng, d))
        worst = min(worst, float(np.real(v.conj() @ k1 @ v)))
    return worst


def test_detect_bound_entangled_point_d3():
    p = to_simplex_point(FamilyParams(3, 1, 0.23, -0.09), "two_vertex")
    assert ppt_verdict(simplex_state(p), pair_cut(1)).verdict == "PPT"
    det = detect(p)
    assert det.detected
    assert det.margin > 1e-3
    assert witness_value(det.kappa, p) < -1e-8
    assert det.report.min_over_phi >= -1e-8
    assert det.lp_bound <= -det.margin + 1e-12
    assert soundness(det.kappa, np.random.default_rng(0)) >= -1e-7


def test_detect_mirror_point_and_n_free():
    p = to_simplex_point(FamilyParams(3, 2, -0.09, 0.23), "two_vertex")
    det = detect(p)
    assert det.detected
    assert dense_witness_value(det.kappa, p) < 0


def test_detect_is_reproducible():
    p = to_simplex_point(FamilyParams(3, 1, 0.23, -0.09), "two_vertex")
    a, b = detect(p, OptimizerConfig(rel_gap=1.0)), detect(p, OptimizerConfig(rel_gap=1.0))
    assert a.margin == b.margin and np.array_equal(a.kappa.kappa, b.kappa.kappa)


def test_pt_seed_is_valid_and_detects():
    p = to_simplex_point(FamilyParams(3, 1, 0.5, 0.0), "two_vertex")
    k = WitnessCoefficients(3, pt_seed(3, p.c))
    assert validity(k).valid
    assert witness_value(k, p) < 0
    # dephasing keeps the value on Bell-diagonal states equal to the full PT witness value
    assert np.isclose(np.real(np.trace(witness_operator(k, 1) @ simplex_state(p).matrix)), witness_value(k, p))


def test_separable_family_points_not_detected():
    for a, b in [(0.05, 0.05), (0.1, -0.05), (0.0, 0.2)]:
        assert not detect(to_simplex_point(FamilyParams(3, 1, a, b), "two_vertex")).detected


def test_bell_projector_is_witness_on_products():
    rng = np.random.default_rng(5)
    assert soundness(WitnessCoefficients.indicator(3, 1, 2), rng, 200) >= -1e-12
    assert np.allclose(witness_operator(WitnessCoefficients.indicator(3, 1, 2), 1), _bell_projector(1, 2, 3))
