"""Independent reference computations used only by the tests."""

import math

import numpy as np


def kahan_taylor_expm(a, terms=60):
    """exp(a) by a plain Taylor series with compensated (Kahan) summation."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    total = np.eye(n, dtype=complex)
    comp = np.zeros((n, n), dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, terms + 1):
        term = term @ a / k
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def brute_partial_trace(rho, keep_first):
    """Partial trace over one qubit of a two-qubit density, by explicit loops."""
    out = np.zeros((2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            for s in range(2):
                if keep_first:
                    out[a, b] += rho[2 * a + s, 2 * b + s]
                else:
                    out[a, b] += rho[2 * s + a, 2 * s + b]
    return out


def entropy_of_weights(weights):
    return -math.fsum(w * math.log2(w) for w in weights if w > 0)


def spectral_distance(a, b):
    """Largest distance under the best one-to-one pairing (brute force over permutations)."""
    from itertools import permutations

    a = np.asarray(a)
    b = np.asarray(b)
    return min(np.max(np.abs(a - b[list(p)])) for p in permutations(range(len(b))))
