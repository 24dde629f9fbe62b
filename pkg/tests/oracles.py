"""Independent reference computations used by the tests.

None of these go through the Picard iteration or the sampled checks.
"""

import numpy as np


def linear_fredholm_solution(k1, k2, c, h, a, b, n):
    """Direct solve of x = int (K1+K2)(s) c x(s) ds + h on a trapezoid grid.

    ``k1``, ``k2`` are constants, ``c`` is the slope of f + g. Builds the
    quadrature from scratch rather than from the package.
    """
    t = np.linspace(a, b, n)
    step = (b - a) / (n - 1)
    w = np.full(n, step)
    w[0] = w[-1] = step / 2
    A = (k1 + k2) * c * np.tile(w, (n, 1))
    return np.linalg.solve(np.eye(n) - A, h(t))


def linear_pair_fixed_point(a, b):
    """Coupled fixed point of F(x,y) = a x - b y: solve (I - M) z = 0 for T = M."""
    M = np.array([[a, -b], [-b, a]])
    rho = max(abs(np.linalg.eigvals(M)))
    z = np.linalg.solve(np.eye(2) - M, np.zeros(2))
    return z, rho


def brute_force_example_rhs_gap(x, y, u, v):
    """rhs - lhs of the summed (phi = id, psi = t/4) condition for (x - 2y)/4, by hand algebra.

    With p = x - u >= 0, q = v - y >= 0 both sides equal 3(p + q)/8.
    """
    p, q = x - u, v - y
    lhs = (abs((p + 2 * q) / 4) + abs((-q - 2 * p) / 4)) / 2
    rhs = (p + q) / 2 - (p + q) / 8
    return rhs - lhs
