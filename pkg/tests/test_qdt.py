import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import utility_attraction_oracle
from qdice import compose
from qdice.errors import CalibrationError, InvalidMeasureError, WeakResolutionError
from qdice.measurement import computational_measure, measure_from_basis, outcome_probabilities
from qdice.qdt import (
    ProspectMeasure,
    apply_prior,
    calibrate_emotions,
    decompose,
    decoy_effect,
    luce_utility,
    prospect_operators,
    prospect_probabilities,
    sample_emotions,
    weak_resolution_residual,
)
from qdice.rand import random_density, random_unitary
from qdice.states import DensityOperator, density, product_state

# witness for sum_n P(pi_n) != I after calibration
WITNESS_SEED = 5


def sa_state(rho_s, rho_a):
    return product_state([DensityOperator(rho_s, compose([("S", len(rho_s))])),
                          DensityOperator(rho_a, compose([("A", len(rho_a))]))])


def test_single_basis_emotion_is_product_projector():
    z = computational_measure(3)
    pm = ProspectMeasure.from_amplitudes([[1, 0]] * 3, z)
    for n, op in enumerate(prospect_operators(pm)):
        assert np.array_equal(op, np.kron(np.diag([1, 0]), z[n].matrix))


def test_unit_norm_operator_is_idempotent():
    b = np.array([[0.6, 0.8j], [1 / np.sqrt(2), -1 / np.sqrt(2)]])
    ops = prospect_operators(ProspectMeasure.from_amplitudes(b, computational_measure(2)))
    for op in ops:
        assert np.allclose(op @ op, op, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_operator_family_relations(seed):
    rng = np.random.default_rng([31, seed])
    b = sample_emotions(3, 4, rng.integers(1 << 30))
    basis = list(random_unitary(4, rng).T)
    pm = ProspectMeasure.from_amplitudes(b, measure_from_basis(basis))
    ops = prospect_operators(pm)
    norms = [np.vdot(x, x).real for x in b]
    for m, om in enumerate(ops):
        assert np.allclose(om, om.conj().T)
        assert np.min(np.linalg.eigvalsh(om)) >= -1e-10
        assert np.linalg.matrix_rank(om, tol=1e-9) == 1
        assert abs(np.trace(om) - norms[m]) <= 1e-10
        for n, on in enumerate(ops):
            target = norms[n] * on if m == n else np.zeros_like(on)
            assert np.max(np.abs(om @ on - target)) <= 1e-10
    # <pi_m|pi_n> = delta_mn <z_n|z_n>
    states = [np.kron(b[n], basis[n]) for n in range(4)]
    gram = np.array([[np.vdot(u, v) for v in states] for u in states])
    assert np.max(np.abs(gram - np.diag(norms))) <= 1e-10


def test_zero_emotion_rejected():
    with pytest.raises(InvalidMeasureError):
        ProspectMeasure.from_amplitudes([[0, 0], [1, 0]], computational_measure(2))


def test_single_basis_probabilities_factorize():
    rho_s = random_density(2, 4)
    rho_a = random_density(3, 5)
    rho = sa_state(rho_s, rho_a)
    a = measure_from_basis(list(random_unitary(3, 6).T))
    pm = ProspectMeasure.from_amplitudes([[1, 0]] * 3, a)
    p = prospect_probabilities(rho, pm, check=False)
    pa = outcome_probabilities(DensityOperator(rho_a, compose([("A", 3)])), a)
    assert np.allclose(p, rho_s[0, 0].real * pa, atol=1e-12)


def test_pure_utility_limit():
    rho_a = random_density(3, 8)
    rho = sa_state(np.diag([1.0, 0.0]), rho_a)
    a = computational_measure(3)
    pm = ProspectMeasure.from_amplitudes([[0.6, 0.8]] * 3, a)
    # p = 0.36 p(A_n), rescale so the family resolves unity
    pm = calibrate_emotions(rho, pm, mode="common")
    d = decompose(rho, pm)
    assert np.allclose(d.p, np.real(np.diag(rho_a)), atol=1e-12)
    assert np.allclose(d.q, 0, atol=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_decompose_matches_summation_oracles(seed):
    rng = np.random.default_rng([41, seed])
    ds, da = 3, 2
    rho = density(random_density(ds * da, rng), compose([("S", ds), ("A", da)]))
    basis = list(random_unitary(da, rng).T)
    raw = ProspectMeasure.from_amplitudes(sample_emotions(ds, da, int(rng.integers(1 << 30))),
                                          measure_from_basis(basis))
    pm = calibrate_emotions(rho, raw, mode="common")
    d = decompose(rho, pm)
    f, q = utility_attraction_oracle(rho.matrix, pm.amplitudes, basis)
    assert np.max(np.abs(f.imag)) <= 1e-12 and np.max(np.abs(q.imag)) <= 1e-12
    assert np.max(np.abs(d.p - (f.real + q.real))) <= 1e-12
    assert np.max(np.abs(d.f - f.real)) <= 1e-12


def test_diagonal_subject_has_no_attraction():
    rho = sa_state(np.diag([0.3, 0.7]), random_density(2, 2))
    pm = ProspectMeasure.from_amplitudes(sample_emotions(2, 2, 9), computational_measure(2))
    pm = calibrate_emotions(rho, pm, mode="common")
    d = decompose(rho, pm)
    assert np.allclose(d.q, 0, atol=1e-15)
    assert np.allclose(d.p, d.f)


def test_subject_dim_one():
    rho = density(random_density(3, 1), compose([("S", 1), ("A", 3)]))
    pm = ProspectMeasure.from_amplitudes([[1], [1j], [-1]], computational_measure(3))
    d = decompose(rho, pm)
    assert np.array_equal(d.q, np.zeros(3))
    assert np.allclose(d.f, d.p)
    assert d.normalized


def test_weak_resolution_rejected_with_residual():
    rho = sa_state(np.eye(2) / 2, np.eye(2) / 2)
    pm = ProspectMeasure.from_amplitudes([[2, 0], [2, 0]], computational_measure(2))
    with pytest.raises(WeakResolutionError) as info:
        prospect_probabilities(rho, pm)
    assert info.value.residual == pytest.approx(1.0)
    assert weak_resolution_residual(rho, pm) == pytest.approx(1.0)


def balanced_instance(seed, ds=2, da=2):
    rng = np.random.default_rng([51, seed])
    rho = density(random_density(ds * da, rng), compose([("S", ds), ("A", da)]))
    basis = measure_from_basis(list(random_unitary(da, rng).T))
    raw = ProspectMeasure.from_amplitudes(sample_emotions(ds, da, int(rng.integers(1 << 30))), basis)
    return rho, calibrate_emotions(rho, raw, mode="balanced")


def test_balanced_calibration_normalizes():
    done = 0
    for seed in range(40):
        try:
            rho, pm = balanced_instance(seed, 3, 3)
        except CalibrationError:
            continue
        d = decompose(rho, pm)
        assert d.normalized
        done += 1
    assert done >= 10


def test_balanced_calibration_fails_when_signs_agree():
    # |+> subject, both prospects (1, 1): positive attraction everywhere
    plus = np.full((2, 2), 0.5)
    rho = sa_state(plus, np.eye(2) / 2)
    pm = ProspectMeasure.from_amplitudes([[1, 1], [1, 1]], computational_measure(2))
    with pytest.raises(CalibrationError):
        calibrate_emotions(rho, pm, mode="balanced")


def test_weak_resolution_holds_while_strong_fails():
    rho, pm = balanced_instance(WITNESS_SEED)
    total = sum(prospect_operators(pm))
    assert abs(np.trace(rho.matrix @ total).real - 1) <= 1e-10
    assert np.max(np.abs(total - np.eye(4))) > 0.1


@pytest.mark.parametrize("attrs,expected", [((1, 1), (0.5, 0.5)), ((2, 3), (0.4, 0.6)), ((5, 0), (1, 0))])
def test_luce_utility(attrs, expected):
    f = luce_utility(attrs)
    assert np.allclose(f, expected, atol=1e-15)
    assert f.sum() == pytest.approx(1, abs=1e-15)


def test_luce_rejects_zero_and_negative():
    with pytest.raises(ValueError):
        luce_utility([0, 0])
    with pytest.raises(ValueError):
        luce_utility([1, -1])


@given(st.lists(st.floats(0, 100), min_size=1, max_size=8).filter(lambda a: sum(a) > 1e-3))
def test_luce_proportional(attrs):
    f = luce_utility(attrs)
    assert abs(f.sum() - 1) <= 1e-12
    a = np.asarray(attrs)
    assert np.allclose(f * a.sum(), a)


def test_apply_prior_examples():
    assert np.allclose(apply_prior([0.4, 0.6], [1, -1]), [0.65, 0.35], atol=1e-15)
    assert np.array_equal(apply_prior([0.5, 0.5], [0, 0]), [0.5, 0.5])
    assert np.array_equal(apply_prior([0.1, 0.9], [-1, 1]), [0.0, 1.0])


def test_apply_prior_unbalanced_signs():
    p = apply_prior([0.4, 0.3, 0.3], [1, -1, -1])
    assert abs(p.sum() - 1) <= 1e-12
    assert p[0] > 0.4 and p[1] < 0.3 and p[2] < 0.3
    # oracle: mean of (+.25, -.25, -.25) is -1/12
    assert np.allclose(p, [0.4 + 0.25 + 1 / 12, 0.3 - 0.25 + 1 / 12, 0.3 - 0.25 + 1 / 12])


def test_apply_prior_rejects_bad_input():
    with pytest.raises(ValueError):
        apply_prior([1.0], [1])
    with pytest.raises(ValueError):
        apply_prior([0.5, 0.6], [1, -1])


def test_decoy_effect():
    rep = decoy_effect()
    assert np.allclose(rep.p, [0.65, 0.35], atol=1e-12)
    assert np.allclose(rep.deviation, [0.04, 0.04], atol=1e-12)


def test_sample_emotions_deterministic():
    assert np.array_equal(sample_emotions(3, 4, 17), sample_emotions(3, 4, 17))
    assert not np.array_equal(sample_emotions(3, 4, 17), sample_emotions(3, 4, 18))


def test_sample_emotions_dim_one_calibrated():
    rho = density(random_density(2, 0), compose([("S", 1), ("A", 2)]))
    b = sample_emotions(1, 2, 3, rho=rho, alternative_basis=computational_measure(2))
    raw = sample_emotions(1, 2, 3)
    # one common factor: |b_n| / |raw_n| is the same for both alternatives
    ratio = np.abs(b[:, 0]) / np.abs(raw[:, 0])
    assert ratio[0] == pytest.approx(ratio[1])
    pm = ProspectMeasure.from_amplitudes(b, computational_measure(2))
    assert abs(weak_resolution_residual(rho, pm)) <= 1e-10


def test_sample_emotions_second_moment():
    b = sample_emotions(4, 10_000, 2026)
    m = np.mean(np.abs(b) ** 2, axis=0)
    assert np.all(np.abs(m - 1) <= 0.05)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_common_calibration_resolves_unity(seed):
    rng = np.random.default_rng(seed)
    rho = density(random_density(6, rng), compose([("S", 2), ("A", 3)]))
    b = sample_emotions(2, 3, seed, rho=rho, alternative_basis=computational_measure(3))
    pm = ProspectMeasure.from_amplitudes(b, computational_measure(3))
    assert abs(weak_resolution_residual(rho, pm)) <= 1e-10
    p = prospect_probabilities(rho, pm)
    assert np.all(p >= -1e-10) and np.all(p <= 1 + 1e-10)
