"""Finite adeles as truncated mixed-radix digit expansions.

A :class:`FiniteAdele` with order ``gamma``, digits ``x_gamma, ..., x_{T-1}`` and
truncation ``T`` stands for the coset ``sum_l x_l e^{psi(l)} + B_{-T}``.  The
digit at position ``l`` ranges over ``0 .. e^{Lambda(l+1)} - 1``.

Arithmetic is done on the integer ``N = x / e^{psi(base)}`` modulo
``e^{psi(T)} / e^{psi(base)}``, which is exactly mixed-radix addition with carry.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PrecisionError, ResourceError, UsageError
from .filtration import Filtration

DEFAULT_DEPTH = 24

INF = math.inf


def _same_filtration(x, y):
    if x.filtration != y.filtration:
        raise UsageError(f"filtration mismatch: {x.filtration} vs {y.filtration}")


@dataclass(frozen=True, eq=True)
class FiniteAdele:
    filtration: Filtration
    gamma: float  # int, or math.inf for the zero coset
    digits: tuple
    truncation: int

    def __post_init__(self):
        f = self.filtration
        if self.gamma == INF:
            if self.digits:
                raise UsageError("zero adele carries no digits")
            return
        g = int(self.gamma)
        if g + len(self.digits) != self.truncation:
            raise UsageError(
                f"digits cover positions {g}..{g + len(self.digits) - 1} but truncation is {self.truncation}"
            )
        if not self.digits or self.digits[0] == 0:
            raise UsageError("leading digit must be nonzero")
        for i, d in enumerate(self.digits):
            r = f.radix(g + i)
            if not 0 <= d < r:
                raise UsageError(f"digit {d} at position {g + i} outside range 0..{r - 1}")

    # construction ---------------------------------------------------------

    @classmethod
    def zero(cls, filtration: Filtration, truncation: int = DEFAULT_DEPTH) -> "FiniteAdele":
        return cls(filtration, INF, (), int(truncation))

    @classmethod
    def from_digits(cls, filtration, start: int, digits, truncation: int | None = None) -> "FiniteAdele":
        """Digits listed from position ``start`` upward; leading zeros are stripped."""
        digits = [int(d) for d in digits]
        if truncation is None:
            truncation = start + len(digits)
        if truncation < start + len(digits):
            digits = digits[: max(truncation - start, 0)]
        digits = digits + [0] * (truncation - start - len(digits))
        for i, d in enumerate(digits):
            r = filtration.radix(start + i)
            if not 0 <= d < r:
                raise UsageError(f"digit {d} at position {start + i} outside range 0..{r - 1}")
        k = next((i for i, d in enumerate(digits) if d), None)
        if k is None:
            return cls.zero(filtration, truncation)
        return cls(filtration, start + k, tuple(digits[k:]), int(truncation))

    @classmethod
    def from_rational(cls, filtration: Filtration, q, truncation: int | None = None) -> "FiniteAdele":
        """Embed a rational whose denominator divides some chain value.

        Negative rationals get the radix-complement expansion, cut at the
        truncation.  The default truncation keeps nonnegative rationals exact
        and gives at least ``DEFAULT_DEPTH`` digits.
        """
        q = Fraction(q)
        n = filtration.denominator_index(q.denominator)
        if n is None:
            raise UsageError(
                f"denominator {q.denominator} divides no chain value of {filtration.name} "
                f"within window {filtration.window}"
            )
        base = -n
        if truncation is None:
            fit = 0
            while abs(q) >= filtration.psi_value(fit):
                fit += 1
            truncation = max(fit, base + DEFAULT_DEPTH)
        if q == 0 or truncation <= base:
            return cls.zero(filtration, truncation)
        scaled = q / filtration.psi_value(base)
        assert scaled.denominator == 1
        return _from_scaled(filtration, scaled.numerator, base, truncation)

    # basic accessors ------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.gamma == INF

    def order(self):
        """Adelic order: ``gamma`` for nonzero x, ``inf`` for zero."""
        return self.gamma

    def norm_index(self):
        """``m`` with ``||x|| = e^{psi(m)}``; ``-inf`` for zero."""
        return -self.gamma

    def norm(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return self.filtration.psi_value(-int(self.gamma))

    def digit(self, position: int) -> int:
        if position >= self.truncation:
            raise PrecisionError(f"digit {position} lies beyond truncation {self.truncation}")
        if self.is_zero or position < self.gamma:
            return 0
        return self.digits[position - int(self.gamma)]

    def rational(self) -> Fraction:
        """The exact rational representative ``sum_l x_l e^{psi(l)}`` of the coset."""
        if self.is_zero:
            return Fraction(0)
        base = int(self.gamma)
        return self.filtration.psi_value(base) * self._scaled(base)

    def _scaled(self, base: int) -> int:
        if self.is_zero:
            return 0
        if base > self.gamma:
            raise UsageError(f"base {base} above order {self.gamma}")
        n = 0
        for p in range(self.truncation - 1, base - 1, -1):
            n = n * self.filtration.radix(p) + self.digit(p)
        return n

    # ring operations ------------------------------------------------------

    def __add__(self, other: "FiniteAdele") -> "FiniteAdele":
        _same_filtration(self, other)
        t = min(self.truncation, other.truncation)
        base = min(self.gamma, other.gamma, t)
        base = int(base)
        if base >= t:
            return FiniteAdele.zero(self.filtration, t)
        return _from_scaled(self.filtration, self._scaled_at(base) + other._scaled_at(base), base, t)

    def __neg__(self) -> "FiniteAdele":
        if self.is_zero:
            return self
        base = int(self.gamma)
        return _from_scaled(self.filtration, -self._scaled(base), base, self.truncation)

    def __sub__(self, other):
        return self + (-other)

    def _scaled_at(self, base: int) -> int:
        # contributions beyond the common truncation vanish modulo the result modulus
        return 0 if self.is_zero else self._scaled(base)

    def __mul__(self, other: "FiniteAdele") -> "FiniteAdele":
        """Product, truncated to the digit window the operands justify."""
        _same_filtration(self, other)
        f = self.filtration
        gx = self.truncation if self.is_zero else int(self.gamma)
        gy = other.truncation if other.is_zero else int(other.gamma)
        tx, ty = self.truncation, other.truncation
        # error ideal: x*B_{-ty} + y*B_{-tx} + B_{-tx}*B_{-ty}
        t = min(
            f.order_of_rational(f.psi_value(gx) * f.psi_value(ty)),
            f.order_of_rational(f.psi_value(gy) * f.psi_value(tx)),
            f.order_of_rational(f.psi_value(tx) * f.psi_value(ty)),
        )
        t = int(t)
        return FiniteAdele.from_rational(f, self.rational() * other.rational(), truncation=t)

    # analysis -------------------------------------------------------------

    def fractional_part(self) -> Fraction:
        """``{x} = sum_{k=gamma}^{-1} x_k e^{psi(k)}``, zero when ``gamma >= 0``."""
        if self.is_zero or self.gamma >= 0:
            if self.truncation < 0:
                raise PrecisionError(f"fractional part undetermined: truncation {self.truncation} < 0")
            return Fraction(0)
        if self.truncation < 0:
            raise PrecisionError(f"fractional part undetermined: truncation {self.truncation} < 0")
        f = self.filtration
        return sum((self.digit(k) * f.psi_value(k) for k in range(int(self.gamma), 0)), Fraction(0))

    # text and json ----------------------------------------------------------

    def to_text(self) -> str:
        g = "inf" if self.is_zero else str(int(self.gamma))
        return f"{g}:[{','.join(map(str, self.digits))}]@{self.truncation}"

    @classmethod
    def from_text(cls, filtration: Filtration, text: str) -> "FiniteAdele":
        m = re.fullmatch(r"\s*(-?\d+|inf):\[([\d,\s]*)\]@(-?\d+)\s*", text)
        if not m:
            raise UsageError(f"cannot parse adele text {text!r}; expected 'gamma:[d0,d1,...]@T'")
        g, body, t = m.groups()
        digits = [int(s) for s in body.split(",") if s.strip()]
        if g == "inf":
            if any(digits):
                raise UsageError("zero adele cannot carry nonzero digits")
            return cls.zero(filtration, int(t))
        x = cls(filtration, int(g), tuple(digits), int(t))
        return x

    def to_json(self) -> dict:
        return {
            "filtration": self.filtration.to_config(),
            "gamma": None if self.is_zero else int(self.gamma),
            "digits": list(self.digits),
            "truncation": self.truncation,
        }

    @classmethod
    def from_json(cls, obj: dict, filtration: Filtration | None = None) -> "FiniteAdele":
        f = filtration or Filtration.from_config(obj["filtration"])
        if obj.get("gamma") is None:
            return cls.zero(f, obj["truncation"])
        return cls(f, int(obj["gamma"]), tuple(obj["digits"]), int(obj["truncation"]))

    def __repr__(self):
        return f"FiniteAdele({self.filtration.name}, {self.to_text()})"


def _from_scaled(f: Filtration, n: int, base: int, truncation: int) -> FiniteAdele:
    digits = []
    for p in range(base, truncation):
        n, d = divmod(n, f.radix(p))
        digits.append(d)
    return FiniteAdele.from_digits(f, base, digits, truncation)


def order(x: FiniteAdele):
    return x.order()


def norm(x: FiniteAdele) -> Fraction:
    return x.norm()


def add(x: FiniteAdele, y: FiniteAdele) -> FiniteAdele:
    return x + y


def fractional_part(x: FiniteAdele) -> Fraction:
    return x.fractional_part()


def character(xi: FiniteAdele, x: FiniteAdele) -> complex:
    """``chi_xi(x) = exp(2 pi i {xi x})``.

    Raises :class:`PrecisionError` when the truncations of ``xi`` and ``x`` do
    not determine ``xi x`` modulo the unit ball.
    """
    prod = xi * x
    if prod.truncation < 0:
        raise PrecisionError(
            f"product known only modulo B_{-prod.truncation}; its fractional part is undetermined"
        )
    frac = prod.fractional_part()
    return cmath.exp(2j * math.pi * frac)


# balls, spheres, Haar measure ---------------------------------------------------


@dataclass(frozen=True)
class Ball:
    """Closed ball ``center + B_n`` of radius ``e^{psi(n)}``."""

    center: FiniteAdele
    radius_index: int

    def contains(self, x: FiniteAdele) -> bool:
        return _within(x - self.center, self.radius_index)

    def measure(self) -> Fraction:
        return self.center.filtration.psi_value(self.radius_index)


@dataclass(frozen=True)
class Sphere:
    """``center + S_n`` where ``S_n = B_n minus B_{n-1}``."""

    center: FiniteAdele
    radius_index: int

    def contains(self, x: FiniteAdele) -> bool:
        d = x - self.center
        return _within(d, self.radius_index) and not _within(d, self.radius_index - 1)

    def measure(self) -> Fraction:
        f = self.center.filtration
        return f.psi_value(self.radius_index) - f.psi_value(self.radius_index - 1)


def _within(d: FiniteAdele, n: int) -> bool:
    if not d.is_zero:
        return -d.gamma <= n
    if -d.truncation <= n:
        return True
    raise PrecisionError(f"difference known only modulo B_{-d.truncation}; cannot decide membership in B_{n}")


def haar_measure(region) -> Fraction:
    return region.measure()


def ball_measure(f: Filtration, n: int) -> Fraction:
    return f.psi_value(n)


def sphere_measure(f: Filtration, n: int) -> Fraction:
    return f.psi_value(n) - f.psi_value(n - 1)


# sampling ---------------------------------------------------------------------


def sample_uniform_sphere(f: Filtration, n: int, trunc: int, rng: np.random.Generator) -> FiniteAdele:
    """Haar-uniform draw from ``S_n``, digits resolved up to position ``trunc``."""
    gamma = -n
    if trunc <= gamma:
        raise UsageError(f"truncation {trunc} must exceed -n = {gamma}")
    digits = [1 + int(rng.integers(f.radix(gamma) - 1))]
    digits += [int(rng.integers(f.radix(p))) for p in range(gamma + 1, trunc)]
    return FiniteAdele(f, gamma, tuple(digits), trunc)


@dataclass
class AdeleBatch:
    """Many finite adeles on a shared position frame ``[start, truncation)``.

    ``digits[i, j]`` is the digit of row ``i`` at position ``start + j``.  All
    rows share one truncation, so every row is exact modulo ``B_{-truncation}``.
    """

    filtration: Filtration
    start: int
    truncation: int
    digits: np.ndarray

    def __post_init__(self):
        self.digits = np.asarray(self.digits, dtype=np.int64)
        if self.digits.ndim != 2 or self.digits.shape[1] != self.truncation - self.start:
            raise UsageError("digit matrix does not match the position frame")

    def __len__(self):
        return self.digits.shape[0]

    def radices(self) -> np.ndarray:
        return np.array([self.filtration.radix(p) for p in range(self.start, self.truncation)], dtype=np.int64)

    def gamma(self) -> np.ndarray:
        """Order per row as float (``inf`` for rows that are zero in the frame)."""
        nz = self.digits != 0
        first = np.argmax(nz, axis=1).astype(float)
        first[~nz.any(axis=1)] = np.inf
        return first + self.start

    def norm_index(self) -> np.ndarray:
        return -self.gamma()

    def __add__(self, other: "AdeleBatch") -> "AdeleBatch":
        if self.filtration != other.filtration:
            raise UsageError("filtration mismatch")
        if (self.start, self.truncation) != (other.start, other.truncation):
            raise UsageError("position frames differ")
        total = self.digits + other.digits
        radices = self.radices()
        out = np.empty_like(total)
        carry = np.zeros(total.shape[0], dtype=np.int64)
        for j in range(total.shape[1]):
            s = total[:, j] + carry
            carry, out[:, j] = np.divmod(s, radices[j])
        return AdeleBatch(self.filtration, self.start, self.truncation, out)

    def row(self, i: int) -> FiniteAdele:
        return FiniteAdele.from_digits(self.filtration, self.start, self.digits[i].tolist(), self.truncation)

    @classmethod
    def from_adele(cls, x: FiniteAdele, size: int, start: int, truncation: int) -> "AdeleBatch":
        if x.truncation < truncation:
            raise PrecisionError(f"adele truncation {x.truncation} below frame truncation {truncation}")
        if not x.is_zero and x.gamma < start:
            raise UsageError(f"adele order {x.gamma} below frame start {start}")
        row = [x.digit(p) for p in range(start, truncation)]
        return cls(x.filtration, start, truncation, np.tile(np.array(row, dtype=np.int64), (size, 1)))


def sample_sphere_batch(
    f: Filtration, shells: np.ndarray, start: int, truncation: int, rng: np.random.Generator
) -> AdeleBatch:
    """Vectorised :func:`sample_uniform_sphere` for an array of shell indices."""
    shells = np.asarray(shells, dtype=np.int64)
    gam = -shells
    if shells.size and (gam.min() < start or gam.max() >= truncation):
        raise ResourceError(f"shell orders {gam.min()}..{gam.max()} do not fit frame [{start}, {truncation})")
    width = truncation - start
    digits = np.zeros((shells.size, width), dtype=np.int64)
    for j in range(width):
        p = start + j
        r = f.radix(p)
        if r > np.iinfo(np.int64).max:
            raise ResourceError(f"radix at position {p} too large for vectorised sampling")
        col = rng.integers(0, r, size=shells.size)
        lead = gam == p
        col[lead] = 1 + rng.integers(0, r - 1, size=int(lead.sum()))
        col[gam > p] = 0
        digits[:, j] = col
    return AdeleBatch(f, start, truncation, digits)
