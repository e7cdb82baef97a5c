"""Bruhat-Schwartz spaces ``D_k^l(A_f)``, character integrals and the Fourier transform.

``D_k^l`` consists of functions supported in ``B_k`` and constant on cosets of
``B_l``.  The quotient ``B_k / B_l`` is cyclic of order
``N = e^{psi(k)} / e^{psi(l)}``; the coset of ``c = A e^{psi(-k)}`` is indexed by
the integer ``A in [0, N)``.  In these coordinates ``chi(xi c) = exp(2 pi i A B / N)``
for ``xi = B e^{psi(l)}``, so the transform is a length-``N`` DFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .adele import FiniteAdele
from .errors import PrecisionError, UsageError
from .filtration import Filtration

MATRIX_CAP = 4096


def chain_index(f: Filtration, value) -> int:
    """Index ``n`` with ``e^{psi(n)} == value``; raises for non-chain values."""
    value = Fraction(value)
    if value <= 0:
        raise UsageError(f"{value} is not a chain value")
    guess = math.log(value.numerator) - math.log(value.denominator)
    lo, hi = f.window
    n = int(np.searchsorted(f.log_psi(np.arange(lo, hi + 1)), guess - 1e-9)) + lo
    for cand in (n - 1, n, n + 1):
        if lo <= cand <= hi and f.psi_value(cand) == value:
            return cand
    raise UsageError(f"{value} is not a chain value e^psi(n) of {f.name}")


def char_integral_ball(f: Filtration, n: int, xi_norm) -> Fraction:
    """``int_{B_n} chi(-xi x) dx`` given ``||xi||`` (a chain value or 0)."""
    if xi_norm == 0 or chain_index(f, xi_norm) <= -n:
        return f.psi_value(n)
    return Fraction(0)


def char_integral_sphere(f: Filtration, n: int, xi_norm) -> Fraction:
    """``int_{S_n} chi(-xi x) dx`` given ``||xi||`` (a chain value or 0)."""
    if xi_norm == 0:
        return f.psi_value(n) - f.psi_value(n - 1)
    j = chain_index(f, xi_norm)
    if j <= -n:
        return f.psi_value(n) - f.psi_value(n - 1)
    if j == 1 - n:
        return -f.psi_value(n - 1)
    return Fraction(0)


def eigenfunction_eval(f: Filtration, n: int, x: FiniteAdele | int) -> Fraction:
    """``F^{-1}(1_{S_n})(x)``; ``x`` may be an adele or its norm index.

    The value is real, so it is returned exactly.
    """
    if isinstance(x, FiniteAdele):
        xn = x.norm()
    else:
        xn = f.psi_value(x)
    return char_integral_sphere(f, n, xn)


def eigenvalue(f: Filtration, n: int, alpha: float) -> float:
    """Eigenvalue ``e^{alpha psi(n)}`` of ``D^alpha`` on ``F^{-1}(1_{S_n})``."""
    return math.exp(alpha * f.log_psi(n))


@dataclass
class TestFunction:
    """An element of ``D_k^l``: ``coeffs[A]`` is the value on ``A e^{psi(-k)} + B_l``."""

    __test__ = False  # not a pytest class

    filtration: Filtration
    k: int
    l: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.l > self.k:
            raise UsageError(f"constancy index l={self.l} exceeds support index k={self.k}")
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.dim,):
            raise UsageError(f"expected {self.dim} coefficients for D_{self.k}^{self.l}, got {self.coeffs.shape}")

    @property
    def dim(self) -> int:
        return space_dimension(self.filtration, self.k, self.l)

    @classmethod
    def zeros(cls, f, k, l):
        return cls(f, k, l, np.zeros(space_dimension(f, k, l), complex))

    @classmethod
    def ball_indicator(cls, f, k, l, n) -> "TestFunction":
        """``1_{B_n}`` viewed in ``D_k^l`` (needs ``l <= n <= k``)."""
        if not l <= n <= k:
            raise UsageError(f"B_{n} is not representable in D_{k}^{l}")
        tf = cls.zeros(f, k, l)
        tf.coeffs[rep_norm_indices(f, k, l) <= n] = 1
        return tf

    def rep(self, a: int) -> FiniteAdele:
        """Canonical coset representative with digits at positions ``-k .. -l-1``."""
        f = self.filtration
        return FiniteAdele.from_rational(f, a * f.psi_value(-self.k), truncation=-self.l)

    def index_of(self, x: FiniteAdele) -> int | None:
        """Coset index of ``x`` in ``B_k / B_l``, or None if ``x`` lies outside ``B_k``."""
        if x.truncation < -self.l:
            raise PrecisionError(f"x known only to position {x.truncation}, need {-self.l}")
        if not x.is_zero and -x.gamma > self.k:
            return None
        a = 0
        for p in range(-self.l - 1, -self.k - 1, -1):
            a = a * self.filtration.radix(p) + x.digit(p)
        return a

    def __call__(self, x: FiniteAdele) -> complex:
        a = self.index_of(x)
        return 0j if a is None else complex(self.coeffs[a])

    def inner(self, other: "TestFunction") -> complex:
        """L^2 inner product ``int phi conj(psi) dx``."""
        _match(self, other)
        return float(self.filtration.psi_value(self.l)) * complex(np.vdot(other.coeffs, self.coeffs))

    def negate(self) -> "TestFunction":
        """``x -> phi(-x)``."""
        idx = (-np.arange(self.dim)) % self.dim
        return TestFunction(self.filtration, self.k, self.l, self.coeffs[idx])

    def radialize(self) -> "TestFunction":
        """Average over each sphere (and over ``B_l`` itself)."""
        shells = rep_norm_indices(self.filtration, self.k, self.l)
        out = np.empty_like(self.coeffs)
        for s in np.unique(shells):
            sel = shells == s
            out[sel] = self.coeffs[sel].mean()
        return TestFunction(self.filtration, self.k, self.l, out)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "coeffs": [
                {"rep": self.rep(a).to_text(), "re": float(c.real), "im": float(c.imag)}
                for a, c in enumerate(self.coeffs)
            ],
        }

    @classmethod
    def from_json(cls, f: Filtration, obj: dict) -> "TestFunction":
        try:
            k, l = int(obj["k"]), int(obj["l"])
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"test function JSON needs integer 'k' and 'l': {exc}") from None
        tf = cls.zeros(f, k, l)
        for entry in obj.get("coeffs", []):
            x = FiniteAdele.from_text(f, entry["rep"])
            a = tf.index_of(x)
            if a is None:
                raise UsageError(f"representative {entry['rep']} lies outside B_{k}")
            tf.coeffs[a] = complex(entry.get("re", 0.0), entry.get("im", 0.0))
        return tf


def _match(a: TestFunction, b: TestFunction):
    if a.filtration != b.filtration or (a.k, a.l) != (b.k, b.l):
        raise UsageError("test functions live in different spaces")


def space_dimension(f: Filtration, k: int, l: int) -> int:
    return f.quotient(k, l)


def rep_norm_indices(f: Filtration, k: int, l: int) -> np.ndarray:
    """Norm index of each coset representative; ``l`` for the coset ``B_l`` itself.

    The representative of index ``A`` has order ``-k + j`` where ``j`` counts the
    low zero digits of ``A`` in the radices of positions ``-k, -k+1, ...``.
    """
    n = space_dimension(f, k, l)
    a = np.arange(n)
    zeros = np.zeros(n, dtype=np.int64)
    weight = 1
    for j in range(1, k - l):
        weight *= f.radix(-k + j - 1)
        zeros[(a % weight) == 0] = j
    out = k - zeros
    out[0] = l
    return out


def fourier(tf: TestFunction) -> TestFunction:
    """``F phi(xi) = int phi(x) chi(xi x) dx``, mapping ``D_k^l`` onto ``D_{-l}^{-k}``."""
    n = tf.dim
    scale = float(tf.filtration.psi_value(tf.l))
    return TestFunction(tf.filtration, -tf.l, -tf.k, scale * n * np.fft.ifft(tf.coeffs))


def inverse_fourier(tf: TestFunction) -> TestFunction:
    """``F^{-1} g(x) = int g(xi) chi(-x xi) d xi``."""
    scale = float(tf.filtration.psi_value(tf.l))
    return TestFunction(tf.filtration, -tf.l, -tf.k, scale * np.fft.fft(tf.coeffs))


def fourier_matrix(f: Filtration, k: int, l: int, cap: int = MATRIX_CAP) -> np.ndarray:
    """Dense matrix of :func:`fourier` on ``D_k^l`` (rows: ``xi`` cosets)."""
    n = space_dimension(f, k, l)
    if n > cap:
        raise UsageError(f"dimension {n} exceeds the matrix cap {cap}")
    a = np.arange(n, dtype=object)
    phase = np.array((np.outer(a, a) % n).astype(np.int64), dtype=float) / n
    return float(f.psi_value(l)) * np.exp(2j * np.pi * phase)


def apply_symbol(tf: TestFunction, alpha: float) -> TestFunction:
    """``D^alpha phi`` for test functions whose transform vanishes on ``B_{-k}``.

    The symbol ``||xi||^alpha`` is not locally constant at 0, so other inputs
    have no image in the Bruhat-Schwartz space and are rejected.
    """
    g = fourier(tf)
    if abs(g.coeffs[0]) > 1e-12 * max(1.0, np.abs(g.coeffs).max()):
        raise UsageError("D^alpha phi is not a test function: F phi does not vanish near 0")
    shells = rep_norm_indices(tf.filtration, g.k, g.l)
    sym = np.exp(alpha * tf.filtration.log_psi(shells))
    sym[0] = 0.0
    return inverse_fourier(TestFunction(tf.filtration, g.k, g.l, g.coeffs * sym))


@dataclass
class RadialProfile:
    """``sum_n c_n 1_{S_n}`` on the Fourier side, finitely supported."""

    filtration: Filtration
    coeffs: dict  # n -> complex

    def __call__(self, xi) -> complex:
        m = xi.norm_index() if isinstance(xi, FiniteAdele) else int(xi)
        return complex(self.coeffs.get(m, 0))

    def multiply(self, fn) -> "RadialProfile":
        return RadialProfile(self.filtration, {n: c * fn(n) for n, c in self.coeffs.items()})

    def apply_operator(self, alpha: float) -> "RadialProfile":
        """Multiplier action of ``D^alpha``: ``c_n -> e^{alpha psi(n)} c_n``."""
        return self.multiply(lambda n: eigenvalue(self.filtration, n, alpha))

    def apply_semigroup(self, alpha: float, t: float) -> "RadialProfile":
        """``c_n -> exp(-t e^{alpha psi(n)}) c_n``."""
        return self.multiply(lambda n: math.exp(-t * eigenvalue(self.filtration, n, alpha)))

    def inverse_fourier_eval(self, m: int) -> complex:
        """``F^{-1}(profile)`` at any point of norm ``e^{psi(m)}``."""
        return sum(
            (c * float(char_integral_sphere(self.filtration, n, self.filtration.psi_value(m)))
             for n, c in self.coeffs.items()),
            0j,
        )

    def support_top(self) -> int:
        """Norm index above which ``F^{-1}(profile)`` vanishes."""
        return max(1 - n for n in self.coeffs)
