"""Chain operators, weights and decoherence matrices.

The chain operator of a history is built incrementally in time order: it
starts as the first projector (no propagator in front of it) and each
later step left-multiplies the propagator from the previous step's time
followed by the step's projector.  Weights and decoherence entries are
state-weighted inner products of chain operators against the family's
initial state.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .dynamics import EvolutionProvider
from .linalg import DEFAULT_TOL, adjoint, as_operator, hs_inner, max_abs
from .structure import BranchingFamily, HistorySequence

__all__ = [
    "chain_operator",
    "weight",
    "evolved_state",
    "weight_table",
    "decoherence_matrix",
    "family_decoherence_matrix",
    "is_consistent",
    "is_weakly_consistent",
    "is_dynamically_impossible",
]


def chain_operator(seq: HistorySequence, evolution: EvolutionProvider) -> np.ndarray:
    """Chain operator of ``seq`` under the given dynamics.

    For steps ``(t_1, P_1), ..., (t_n, P_n)`` the result is

        P_n U(t_{n-1}, t_n) ... P_2 U(t_1, t_2) P_1

    with ``U(a, b)`` the propagator from ``a`` to ``b``.  The empty
    sequence yields the identity.
    """
    d = evolution.dim
    if len(seq) == 0:
        return np.eye(d, dtype=complex)
    if seq.dim != d:
        raise ValueError(
            f"sequence dimension {seq.dim} does not match evolution dimension {d}")
    steps = seq.steps
    k = np.array(steps[0][1], dtype=complex)
    for (t_prev, _), (t_cur, p_cur) in zip(steps, steps[1:]):
        k = p_cur @ evolution.propagator(t_prev, t_cur) @ k
    return k


def weight(seq: HistorySequence, evolution: EvolutionProvider, rho,
           tol: float = DEFAULT_TOL) -> float:
    """Weight Tr[rho K^dag K] of one history.

    The value is real and nonnegative up to roundoff; tiny negative
    values (above ``-tol``) are clamped to zero, anything worse is an
    error, as is a non-negligible imaginary part.
    """
    k = chain_operator(seq, evolution)
    value = hs_inner(rho, k, k)
    if abs(value.imag) > tol:
        raise ValueError(f"weight has imaginary part {value.imag}")
    w = value.real
    if w < -tol:
        raise ValueError(f"weight {w} is negative beyond -tol")
    return 0.0 if w < 0.0 else float(w)


def evolved_state(seq: HistorySequence, evolution: EvolutionProvider, rho) -> np.ndarray:
    """Unnormalized state K rho K^dag conditioned on the history.

    Its trace equals the history's weight.
    """
    k = chain_operator(seq, evolution)
    return k @ as_operator(rho) @ adjoint(k)


def weight_table(family: BranchingFamily, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Weights of every history of a valid family, in depth-first leaf order."""
    family.ensure_valid(tol)
    return np.array([
        weight(h, family.evolution, family.initial_state, tol)
        for h in family.histories(tol)
    ])


def decoherence_matrix(seqs: Sequence[HistorySequence],
                       evolution: EvolutionProvider, rho) -> np.ndarray:
    """Matrix of pairwise inner products Tr[rho K_a^dag K_b].

    The diagonal holds the weights; the matrix is Hermitian up to
    roundoff.
    """
    ks = [chain_operator(s, evolution) for s in seqs]
    n = len(ks)
    d = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            d[a, b] = hs_inner(rho, ks[a], ks[b])
    return d


def family_decoherence_matrix(family: BranchingFamily,
                              tol: float = DEFAULT_TOL) -> np.ndarray:
    """Decoherence matrix of a valid family's histories in leaf order."""
    family.ensure_valid(tol)
    return decoherence_matrix(family.histories(tol), family.evolution,
                              family.initial_state)


def _offdiag(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {d.shape}")
    return d - np.diag(np.diag(d))


def is_consistent(d, tol: float = DEFAULT_TOL) -> bool:
    """Medium consistency: every off-diagonal entry vanishes within ``tol``."""
    return max_abs(_offdiag(np.asarray(d, dtype=complex))) <= tol


def is_weakly_consistent(d, tol: float = DEFAULT_TOL) -> bool:
    """Weak consistency: off-diagonal entries have vanishing real part.

    Strictly weaker than medium consistency, so anything passing
    :func:`is_consistent` passes here too.
    """
    return max_abs(_offdiag(np.asarray(d, dtype=complex)).real) <= tol


def is_dynamically_impossible(seq: HistorySequence,
                              evolution: EvolutionProvider,
                              tol: float = DEFAULT_TOL) -> bool:
    """True iff the dynamics alone annihilates the chain operator.

    Every step projector must be nonzero; a vanishing chain operator is
    then attributable to the propagators, not to a trivially empty
    question.  Sequences containing a zero projector return False.
    """
    if len(seq) == 0:
        return False
    if any(max_abs(p) <= tol for p in seq.projectors):
        return False
    return max_abs(chain_operator(seq, evolution)) <= tol
