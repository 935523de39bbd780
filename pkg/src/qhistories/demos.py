"""Built-in example families used by the command line and the test suite.

All demos use hard-coded bases with exact dyadic entries (the Hadamard
pair is entered as 0.5-valued matrices rather than via normalized kets),
so their weights are exact floating-point numbers.
"""

from __future__ import annotations

import numpy as np

from .structure import BranchingFamily, new_family

__all__ = [
    "fig2_family",
    "branch_no_prod_family",
    "isham_reversed_family",
    "P0",
    "P1",
    "P_PLUS",
    "P_MINUS",
]

# Computational and Hadamard one-qubit projectors.
P0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
P1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
P_PLUS = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
P_MINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)


def fig2_family() -> BranchingFamily:
    """A qutrit family whose two branches use different times and questions.

    The root (t=0) splits into a rank-1 and a rank-2 alternative; the
    first branch is refined by the full computational decomposition at
    t=1.0, the second by a coarser two-outcome one at t=1.5.  Five
    histories in total, maximally mixed initial state, trivial dynamics.
    """
    d = np.diag
    fam = new_family(3, 0.0)
    fam = fam.extend(0, [d([1.0, 0.0, 0.0]), d([0.0, 1.0, 1.0])], [1.0, 1.5])
    first, second = (m.id for m in fam.leaves())
    fam = fam.extend(first,
                     [d([1.0, 0.0, 0.0]), d([0.0, 1.0, 0.0]), d([0.0, 0.0, 1.0])],
                     [2.0, 2.0, 2.0])
    fam = fam.extend(second, [d([1.0, 1.0, 0.0]), d([0.0, 0.0, 1.0])], [2.5, 2.5])
    return fam


def branch_no_prod_family() -> BranchingFamily:
    """A branching family that no product construction can reproduce.

    After |0> the second question stays computational; after |1> it is
    asked in the Hadamard basis.  The family validates, but the second
    step depends on the branch, so ``is_product_shaped`` is False.
    """
    fam = new_family(2, 0.0)
    fam = fam.extend(0, [P0, P1], [1.0, 1.0])
    first, second = (m.id for m in fam.leaves())
    fam = fam.extend(first, [P0, P1], [2.0, 2.0])
    fam = fam.extend(second, [P_PLUS, P_MINUS], [2.0, 2.0])
    return fam


def isham_reversed_family() -> BranchingFamily:
    """The inhomogeneity example run backwards in time, as a branching family.

    Reversing each history of :func:`~qhistories.hpo.isham_histories`
    turns the first-step projectors into {|1><1|, |0><0|}, a genuine
    decomposition, so the reversed set is a branching family.  Against
    the pure state |0><0| its weights sum to one, with only the reversed
    phi-then-phi history contributing.
    """
    rho = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    fam = new_family(2, 0.0, rho)
    fam = fam.extend(0, [P1, P0], [1.0, 1.0])
    psi_branch, phi_branch = (m.id for m in fam.leaves())
    fam = fam.extend(psi_branch, [P_PLUS, P_MINUS], [2.0, 2.0])
    fam = fam.extend(phi_branch, [P0, P1], [2.0, 2.0])
    return fam
