"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np


def brute_count(gram2, n: int, p: int, k: int) -> int:
    """#{v mod p^k : v^T (2Y) v / 2 = n mod p^k} by full enumeration."""
    q = p**k
    G = np.array(gram2, dtype=np.int64)
    m = len(G)
    grid = np.array(list(itertools.product(range(q), repeat=m)), dtype=np.int64)
    twice = np.einsum("ij,jk,ik->i", grid, G, grid)
    return int(np.count_nonzero((twice // 2 - n) % q == 0))


def rational_inverse(gram2):
    m = len(gram2)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(m)] for i, row in enumerate(gram2)]
    for c in range(m):
        piv = next(r for r in range(c, m) if a[r][c])
        a[c], a[piv] = a[piv], a[c]
        a[c] = [x / a[c][c] for x in a[c]]
        for r in range(m):
            if r != c and a[r][c]:
                a[r] = [x - a[r][c] * y for x, y in zip(a[r], a[c])]
    return [row[m:] for row in a]


def brute_level(gram2) -> int:
    inv = rational_inverse(gram2)
    m = len(inv)
    N = 1
    while True:
        ok = all((N * inv[i][j]).denominator == 1 for i in range(m) for j in range(m))
        if ok and all((N * inv[i][i]).numerator % 2 == 0 for i in range(m)):
            return N
        N += 1


def eigen_signature(gram2) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(np.array(gram2, dtype=float))
    return int(np.sum(ev > 0)), int(np.sum(ev < 0))


def theta(z: complex, terms: int = 50) -> complex:
    return sum(cmath.exp(2j * math.pi * n * n * z) for n in range(-terms, terms + 1))


def legendre_by_euler(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def gauss_sum_direct(values, r: int, n: int) -> complex:
    return sum(values[k] * cmath.exp(2j * math.pi * k * n / r) for k in range(1, r))


def whittaker(kappa: float, mu: float, y: float, dps: int = 40) -> float:
    """``W_{kappa,mu}(y)`` at high precision.

    For ``a = mu - kappa + 1/2 > 0`` by adaptive quadrature of
    ``y^kappa e^(-y/2) / Gamma(a) int_0^oo e^-u u^(a-1) (1 + u/y)^c du`` with
    ``c = mu + kappa - 1/2``; otherwise from Kummer's ``U`` function.
    """
    with mpmath.workdps(dps):
        a = mpmath.mpf(mu) - kappa + mpmath.mpf(1) / 2
        c = mpmath.mpf(mu) + kappa - mpmath.mpf(1) / 2
        y = mpmath.mpf(y)
        if a <= 0:
            return float(mpmath.exp(-y / 2) * y ** (mu + mpmath.mpf(1) / 2) * mpmath.hyperu(a, 1 + 2 * mu, y))
        integral = mpmath.quad(lambda u: mpmath.exp(-u) * u ** (a - 1) * (1 + u / y) ** c, [0, 1, 10, 50, mpmath.inf])
        return float(y**kappa * mpmath.exp(-y / 2) / mpmath.gamma(a) * integral)


def upper_gamma(s: complex, x: float, dps: int = 30) -> complex:
    with mpmath.workdps(dps):
        s = mpmath.mpc(s)
        return complex(mpmath.quad(lambda t: t ** (s - 1) * mpmath.exp(-t), [x, x + 10, x + 60, mpmath.inf]))


def lower_gamma(s: complex, x: float, dps: int = 30) -> complex:
    """``gamma(s, x) = x^s e^-x sum_k x^k / (s (s+1) ... (s+k))``."""
    with mpmath.workdps(dps):
        s, x = mpmath.mpc(s), mpmath.mpf(x)
        term = 1 / s
        total = term
        k = 0
        while abs(term) > mpmath.mpf(10) ** (-dps) * abs(total):
            k += 1
            term *= x / (s + k)
            total += term
        return complex(x**s * mpmath.exp(-x) * total)


def dft_direct(table: np.ndarray, M: int, L: int) -> np.ndarray:
    """Transform of a table over (Z/ML)^m, one output entry at a time."""
    m = table.ndim
    side = M * L
    out = np.zeros_like(table, dtype=complex)
    points = list(itertools.product(range(side), repeat=m))
    for w in points:
        total = 0j
        for u in points:
            total += table[u] * cmath.exp(-2j * math.pi * sum(a * b for a, b in zip(u, w)) / side)
        out[w] = total / L**m
    return out


def sum_of_squares_counts(m: int, n_max: int) -> list[int]:
    """``r_m(n)`` for ``n = 0..n_max`` from the coefficients of ``theta^m``."""
    base = [0] * (n_max + 1)
    k = 0
    while k * k <= n_max:
        base[k * k] += 1 if k == 0 else 2
        k += 1
    out = [1] + [0] * n_max
    for _ in range(m):
        out = [sum(out[i] * base[n - i] for i in range(n + 1)) for n in range(n_max + 1)]
    return out
