"""Reference implementations kept independent of the production evaluators.

Nothing here uses the cumulative series of :mod:`adelheat.heat`; each function
recomputes its quantity from first principles, so agreement is evidence.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import ResourceError, UsageError
from .filtration import Filtration

MAX_RESIDUE_BITS = 24


def sphere_character_integral(f: Filtration, n: int, m: int) -> Fraction:
    """``int_{S_n} chi(x xi) d xi`` for ``||x|| = e^{psi(m)}``, by the ball difference ``B_n - B_{n-1}``."""

    def ball(k):
        # int_{B_k} chi(x xi) d xi = e^{psi(k)} if ||x|| e^{psi(k)} <= 1, else 0
        return f.psi_value(k) if k + m <= 0 else Fraction(0)

    return ball(n) - ball(n - 1)


def sphere_decomposition_kernel(f: Filtration, alpha: float, m: int, t: float, n_lo: int = -200) -> float:
    """``Z(m, t) = sum_n exp(-t e^{alpha psi(n)}) int_{S_n} chi(x xi) d xi``.

    Terms with ``n > 1 - m`` vanish; terms below ``n_lo`` are below double
    precision for the windows used in tests.
    """
    total = 0.0
    for n in range(n_lo, 2 - m):
        e = math.exp(-t * math.exp(min(alpha * f.log_psi(n), 700.0)))
        if e == 0.0:
            break
        total += e * float(sphere_character_integral(f, n, m))
    return total


def shell_sum_cdf(f: Filtration, alpha: float, k: int, t: float, m_lo: int = -60, n_lo: int = -200) -> float:
    """``P(m_lo <= norm index of X_t <= k)`` as a sum of oracle shell masses."""
    total = 0.0
    for m in range(m_lo, k + 1):
        mu = float(f.psi_value(m) - f.psi_value(m - 1))
        total += mu * sphere_decomposition_kernel(f, alpha, m, t, n_lo)
    return total


def padic_bruteforce_kernel(p: int, alpha: float, m: int, t: float, a: int = 1,
                            gamma_lo: int = -60, gamma_hi: int | None = None) -> float:
    """Heat kernel on Q_p at ``x = a p^{-m}`` (``a`` a unit) by explicit character sums.

    ``Z(x, t) = sum_gamma exp(-t p^{alpha gamma}) int_{||xi|| = p^gamma} chi(x xi) d xi``.
    Each sphere integral is the average of ``cos(2 pi a j / p^{m+gamma})`` over
    units ``j`` modulo ``p^D``, times the sphere measure.
    """
    if a % p == 0:
        raise UsageError(f"a={a} must be a unit")
    if gamma_hi is None:
        # exp(-t p^{alpha gamma}) < 1e-300 beyond this
        gamma_hi = math.ceil(math.log(700 / t) / (alpha * math.log(p))) + 1
    total = 0.0
    for gamma in range(gamma_lo, gamma_hi + 1):
        weight = math.exp(-t * p ** (alpha * gamma))
        if weight == 0.0:
            break
        e = m + gamma
        depth = max(1, e)
        if depth > MAX_RESIDUE_BITS * math.log(2) / math.log(p):
            raise ResourceError(f"residue enumeration mod {p}^{depth} too large")
        j = np.arange(p**depth)
        j = j[j % p != 0]
        if e <= 0:
            phase = np.zeros(j.size)
        else:
            mod = p**e
            phase = ((a * j) % mod) / mod
        cell = float(p) ** (gamma - depth)  # Haar measure of one residue class inside the sphere
        total += weight * cell * float(np.sum(np.cos(2 * math.pi * phase)))
    return total


def dft_fourier(coeffs: np.ndarray, scale: float) -> np.ndarray:
    """``scale * sum_a phi[a] exp(2 pi i a b / N)`` by an explicit O(N^2) sum."""
    n = len(coeffs)
    a = np.arange(n)
    out = np.empty(n, dtype=complex)
    for b in range(n):
        out[b] = np.sum(coeffs * np.exp(2j * np.pi * ((a * b) % n) / n))
    return scale * out
