"""Independent reference implementations used only to check the package.

These deliberately take a different computational route than the library:
the transport distance is solved as an explicit linear program over the
coupling matrix, and gradients come from central finite differences of the
objective value.
"""

import numpy as np
from scipy.optimize import linprog


def w1_linear_program(samples0, samples1) -> float:
    """Exact 1D optimal transport cost by solving the coupling LP.

    Variables are the n*m entries of the coupling; marginals are uniform.
    One redundant marginal constraint is dropped to keep the system
    full-rank for the solver.
    """
    a = np.asarray(samples0, dtype=float).ravel()
    b = np.asarray(samples1, dtype=float).ravel()
    n, m = a.size, b.size
    cost = np.abs(a[:, None] - b[None, :]).ravel()

    row_sums = np.kron(np.eye(n), np.ones((1, m)))
    col_sums = np.tile(np.eye(m), (1, n))[: m - 1]
    a_eq = np.vstack([row_sums, col_sums]) if m > 1 else row_sums
    b_eq = np.concatenate([np.full(n, 1.0 / n), np.full(m - 1, 1.0 / m)])
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.success, res.message
    return float(res.fun)


def w1_assignment(samples0, samples1) -> float:
    """Brute-force min-cost matching for equal-size sample sets (n <= 6)."""
    from itertools import permutations

    a = np.asarray(samples0, dtype=float).ravel()
    b = np.asarray(samples1, dtype=float).ravel()
    assert a.size == b.size <= 6
    best = min(np.abs(a - b[list(p)]).sum() for p in permutations(range(b.size)))
    return float(best / a.size)


def fd_theta_gradient(objective, theta, h=1e-5) -> np.ndarray:
    """Central finite differences of objective(theta)."""
    grad = np.zeros_like(theta)
    for m in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[m] += h
        down[m] -= h
        grad[m] = (objective(up) - objective(down)) / (2 * h)
    return grad


def fd_adjacency_gradient(objective, adj, h=1e-5) -> np.ndarray:
    """Central finite differences under symmetric (i, j)/(j, i) perturbation.

    Entry (i, j) of the result is the derivative when both mirrored entries
    move together, matching the symmetric-pair convention of the analytic
    gradient. Diagonal entries are left at zero.
    """
    n = adj.shape[0]
    grad = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            up, down = adj.copy(), adj.copy()
            up[i, j] += h
            up[j, i] += h
            down[i, j] -= h
            down[j, i] -= h
            grad[i, j] = grad[j, i] = (objective(up) - objective(down)) / (2 * h)
    return grad
