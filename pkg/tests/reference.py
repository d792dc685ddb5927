"""Brute-force references used as oracles by the test suite.

Nothing here imports the package's integrator: the velocity is recomputed
from scratch and time-stepped with forward Euler at a fixed small step.
"""

import itertools

import numpy as np
from numba import njit


def velocity(u):
    n = len(u)
    v = np.zeros_like(u)
    for i in range(n):
        for j in range(n):
            if i != j:
                w = u[j] - u[i]
                v[i] += w / np.sqrt(w @ w)
    return v


def min_distance(u):
    return min(np.linalg.norm(u[i] - u[j]) for i, j in itertools.combinations(range(len(u)), 2))


@njit(cache=True)
def _euler(u, h, guard):
    n, d = u.shape
    t = 0.0
    v = np.zeros_like(u)
    while True:
        v[:] = 0.0
        closest = np.inf
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                s = 0.0
                for k in range(d):
                    s += (u[j, k] - u[i, k]) ** 2
                r = np.sqrt(s)
                closest = min(closest, r)
                for k in range(d):
                    v[i, k] += (u[j, k] - u[i, k]) / r
        if closest <= guard:
            return t, u
        u += h * v
        t += h


def euler_to_collision(x, rel_step=1e-6):
    """Fixed-step Euler run until the next step could cross the diagonal.

    Returns ``(t_stop, u_stop)``. The step is ``rel_step * delta(x)``; the
    run stops once some pair is within ``4 (n - 1)`` steps' worth of travel.
    """
    u = np.array(x, dtype=float)
    h = rel_step * min_distance(u)
    return _euler(u, h, 4 * (len(u) - 1) * h)


def minimax_matching(X, Y):
    """Smallest achievable ``max_i |x_i - y_pi(i)|`` over all bijections."""
    n = len(X)
    best = np.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, max(np.linalg.norm(X[i] - Y[perm[i]]) for i in range(n)))
    return best


def hausdorff_loops(A, B):
    """Hausdorff distance by explicit double loops."""
    def directed(P, Q):
        return max(min(np.linalg.norm(p - q) for q in Q) for p in P)
    return max(directed(A, B), directed(B, A))
