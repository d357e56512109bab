import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memkernel.pauli_channel import (
    HADAMARD4,
    apply_map,
    cptp_check,
    eigenvalues_from_probabilities,
    probabilities_from_eigenvalues,
    trace_distance,
)


def test_hadamard_involution_exact():
    assert np.array_equal(HADAMARD4 @ HADAMARD4, 4 * np.eye(4, dtype=int))
    assert np.all(HADAMARD4[0] == 1)
    assert np.all(HADAMARD4[:, 0] == 1)


class TestProbabilitiesFromEigenvalues:
    def test_identity_channel(self):
        assert np.allclose(probabilities_from_eigenvalues([1, 1, 1, 1]),
                           [1, 0, 0, 0])

    def test_pure_z_conjugation(self):
        # hand multiply: rows of H against (1,-1,-1,1) give (0,0,0,4)/4
        assert np.allclose(probabilities_from_eigenvalues([1, -1, -1, 1]),
                           [0, 0, 0, 1], atol=1e-15)

    def test_completely_depolarizing(self):
        assert np.allclose(probabilities_from_eigenvalues([1, 0, 0, 0]),
                           [0.25, 0.25, 0.25, 0.25])

    def test_rejects_bad_lambda0(self):
        with pytest.raises(ValueError):
            probabilities_from_eigenvalues([0.9, 1, 1, 1])

    def test_trajectory_shape(self):
        lam = np.ones((4, 5))
        lam[3] = np.linspace(1, 0, 5)
        p = probabilities_from_eigenvalues(lam)
        assert p.shape == (4, 5)
        assert np.allclose(p.sum(axis=0), 1.0)


class TestEigenvaluesFromProbabilities:
    def test_identity(self):
        assert np.allclose(eigenvalues_from_probabilities([1, 0, 0, 0]),
                           [1, 1, 1, 1])

    def test_half_z_mixture(self):
        # direct signed sums of H rows against (1/2, 0, 0, 1/2)
        assert np.allclose(eigenvalues_from_probabilities([0.5, 0, 0, 0.5]),
                           [1, 0, 0, 1])

    def test_uniform(self):
        assert np.allclose(eigenvalues_from_probabilities([0.25] * 4),
                           [1, 0, 0, 0])

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            eigenvalues_from_probabilities([0.5, 0.5, 0.5, 0.5])


def test_round_trip_1000_random():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        p = rng.dirichlet(np.ones(4))
        back = probabilities_from_eigenvalues(eigenvalues_from_probabilities(p))
        assert np.max(np.abs(back - p)) <= 1e-14


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda w: sum(w) > 0))
def test_round_trip_property(weights):
    p = np.array(weights) / sum(weights)
    back = probabilities_from_eigenvalues(eigenvalues_from_probabilities(p))
    assert np.max(np.abs(back - p)) <= 1e-14


class TestCptpCheck:
    def test_identity_boundary(self):
        v = cptp_check([1, 1, 1, 1])
        assert v.passed
        assert v.margins["sum"] == pytest.approx(4.0)
        for k in (1, 2, 3):
            assert v.margins[f"pair{k}"] == pytest.approx(0.0)

    def test_pairwise_violation(self):
        v = cptp_check([1, 0.9, 0.9, 0.5])
        assert not v.passed
        assert v.margins["pair3"] == pytest.approx(-0.3)

    def test_boundary_unitary(self):
        v = cptp_check([1, -1, -1, 1])
        assert v.passed
        assert v.margins["sum"] == pytest.approx(0.0)

    def test_pass_implies_contraction_and_positivity(self):
        rng = np.random.default_rng(3)
        seen = 0
        for _ in range(500):
            lam = np.concatenate([[1.0], rng.uniform(-1.3, 1.3, 3)])
            v = cptp_check(lam)
            if not v.passed:
                continue
            seen += 1
            assert np.max(np.abs(lam)) <= 1 + 1e-10
            assert np.min(probabilities_from_eigenvalues(lam)) >= -1e-10
        assert seen > 50


class TestBlochAction:
    def test_identity(self):
        assert np.allclose(apply_map([1, 1, 1, 1], [0.3, 0.4, 0.5]),
                           [0.3, 0.4, 0.5])

    def test_depolarizing(self):
        assert np.allclose(apply_map([1, 0, 0, 0], [0.7, -0.2, 0.1]), 0.0)

    def test_componentwise(self):
        assert np.allclose(apply_map([1, 0.5, 0.5, 1], [1, 0, 0]), [0.5, 0, 0])


class TestTraceDistance:
    def test_identity_is_norm(self):
        assert trace_distance([1, 1, 1, 1], [1, 0, 0]) == pytest.approx(1.0)
        rng = np.random.default_rng(11)
        for _ in range(50):
            v = rng.normal(size=3)
            assert trace_distance([1, 1, 1, 1], v) == pytest.approx(np.linalg.norm(v))

    def test_depolarized_pair(self):
        assert trace_distance([1, 0, 0, 0], [0.6, 0.8, 0]) == pytest.approx(0.0)

    def test_partial_contraction(self):
        # sqrt(0.09 + 0.16)
        assert trace_distance([1, 0.5, 0.5, 1], [0.6, 0.8, 0]) == pytest.approx(0.5)
