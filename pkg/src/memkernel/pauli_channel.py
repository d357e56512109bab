"""Exact algebra of qubit Pauli-diagonal (random unitary) channels.

A Pauli-diagonal map acts on the Pauli basis as sigma_alpha -> lambda_alpha
sigma_alpha with lambda_0 = 1.  Its mixing probabilities follow from the
4x4 Hadamard matrix, p = (1/4) H lambda, and H H = 4 I inverts the
relation.  Complete positivity is equivalent to all four probabilities
being nonnegative, which in eigenvalue form reads

    1 + l1 + l2 + l3 >= 0     and     l_i + l_j <= 1 + l_k  (three pairings).

All operations are pure functions on plain arrays; they are safe to map
over time grids in parallel.
"""

from __future__ import annotations

import numpy as np

from . import config
from .verdicts import Verdict

__all__ = [
    "HADAMARD4",
    "probabilities_from_eigenvalues",
    "eigenvalues_from_probabilities",
    "cptp_check",
    "apply_map",
    "trace_distance",
]

HADAMARD4 = np.array([
    [1, 1, 1, 1],
    [1, 1, -1, -1],
    [1, -1, 1, -1],
    [1, -1, -1, 1],
], dtype=int)


def _as_four_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape[0] != 4:
        raise ValueError(f"{name} must have leading dimension 4, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def probabilities_from_eigenvalues(lambdas) -> np.ndarray:
    """Mixing probabilities p = (1/4) H lambda of a Pauli-diagonal map.

    Accepts a 4-vector or a (4, n) trajectory.  Requires lambda_0 == 1
    (trace preservation in this class).
    """

    lam = _as_four_vector(lambdas, "eigenvalue vector")
    if not np.all(np.abs(lam[0] - 1.0) <= 1e-12):
        raise ValueError("lambda_0 must equal 1 (malformed eigenvalue vector)")
    return (HADAMARD4 @ lam) / 4.0


def eigenvalues_from_probabilities(probs) -> np.ndarray:
    """Inverse of probabilities_from_eigenvalues, lambda = H p."""
    p = _as_four_vector(probs, "probability vector")
    if not np.all(np.abs(p.sum(axis=0) - 1.0) <= 1e-12):
        raise ValueError("probabilities must sum to 1")
    return HADAMARD4 @ p


def cptp_check(lambdas, tol: float | None = None) -> Verdict:
    """Complete-positivity test of a Pauli-diagonal map.

    Margins are the four quantities 4*p_alpha: the eigenvalue sum
    1 + l1 + l2 + l3 and the three pairwise margins 1 + l_k - l_i - l_j.
    Passes when all are >= -tol.
    """

    lam = _as_four_vector(lambdas, "eigenvalue vector")
    if lam.ndim != 1:
        raise ValueError("cptp_check expects a single eigenvalue 4-vector")
    if abs(lam[0] - 1.0) > 1e-12:
        raise ValueError("lambda_0 must equal 1")
    if tol is None:
        tol = config.POSITIVITY_TOL
    margins = {
        "sum": 1.0 + lam[1] + lam[2] + lam[3],
        "pair1": 1.0 + lam[1] - lam[2] - lam[3],
        "pair2": 1.0 + lam[2] - lam[1] - lam[3],
        "pair3": 1.0 + lam[3] - lam[1] - lam[2],
    }
    return Verdict(passed=all(m >= -tol for m in margins.values()), margins=margins)


def apply_map(lambdas, bloch) -> np.ndarray:
    """Image of a Bloch vector, componentwise v_k -> lambda_k v_k."""
    lam = _as_four_vector(lambdas, "eigenvalue vector")
    v = np.asarray(bloch, dtype=float)
    if v.shape[0] != 3:
        raise ValueError("Bloch vector must have 3 components")
    return lam[1:] * v


def trace_distance(lambdas, bloch_diff) -> float:
    """Distinguishability of an evolved state pair.

    `bloch_diff` is the Bloch difference vector of the traceless part of
    rho_1 - rho_2; the map sends it to (lambda_k v_k) and the returned
    value is sqrt(sum_k (lambda_k v_k)^2), half the trace norm of the
    image.
    """

    return float(np.linalg.norm(apply_map(lambdas, bloch_diff)))
