"""Division chains ``1 = e^{psi(0)} | e^{psi(1)} | ...`` defining the ultrametric on A_f.

The chain is stored exactly as Python integers.  Values at negative indices are
the reciprocals ``e^{psi(-n)} = 1 / e^{psi(n)}`` and are returned as
:class:`fractions.Fraction`.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ResourceError, UsageError

log = logging.getLogger(__name__)

DEFAULT_WINDOW = (-256, 256)


@dataclass(frozen=True)
class CofinalityReport:
    bound: int
    first_index: dict  # m -> least n with m | e^{psi(n)}
    uncovered: tuple

    @property
    def ok(self) -> bool:
        return not self.uncovered


class Filtration:
    """A strictly increasing chain of naturals, each dividing the next.

    ``ratio_rule(n)`` gives the integer ratio ``e^{Lambda(n)} = e^{psi(n)}/e^{psi(n-1)}``
    for ``n >= 1``.  All chain values needed by the window ``[n_min, n_max]`` are
    computed at construction, so instances are immutable and safe to share
    between threads.
    """

    def __init__(
        self,
        ratio_rule: Callable[[int], int],
        name: str = "custom",
        window: tuple[int, int] = DEFAULT_WINDOW,
        config: dict | None = None,
    ):
        n_min, n_max = int(window[0]), int(window[1])
        if not n_min < 0 < n_max:
            raise UsageError(f"window must satisfy n_min < 0 < n_max, got {window}")
        self.name = name
        self.window = (n_min, n_max)
        self._config = config or {"type": "custom"}
        # ratios at indices <= 0 reuse positive ones: e^{Lambda(n)} = e^{Lambda(1-n)}
        width = max(n_max, 1 - n_min) + 1
        chain = [1]
        ratios = [0]
        for n in range(1, width + 1):
            r = int(ratio_rule(n))
            if r < 2:
                raise UsageError(f"ratio e^Lambda({n}) = {r} must be an integer >= 2")
            ratios.append(r)
            chain.append(chain[-1] * r)
        self._chain = tuple(chain)
        self._ratios = tuple(ratios)
        self._log_chain = np.array([math.log(v) for v in chain])

    # construction ---------------------------------------------------------

    @classmethod
    def factorial(cls, window=DEFAULT_WINDOW) -> "Filtration":
        """``e^{psi(n)} = (n+1)!``."""
        return cls(lambda n: n + 1, "factorial", window, {"type": "factorial"})

    @classmethod
    def prime_power(cls, p: int, window=DEFAULT_WINDOW) -> "Filtration":
        if p < 2:
            raise UsageError(f"prime_power needs p >= 2, got {p}")
        return cls(lambda n: p, f"prime_power({p})", window, {"type": "prime_power", "p": p})

    @classmethod
    def lcm(cls, window=DEFAULT_WINDOW) -> "Filtration":
        """The chain ``lcm(1..m)`` with repeated values skipped."""
        need = max(window[1], 1 - window[0]) + 1
        ratios = []
        value, m = 1, 1
        while len(ratios) < need:
            m += 1
            new = math.lcm(value, m)
            if new != value:
                ratios.append(new // value)
                value = new
        return cls(lambda n: ratios[n - 1], "lcm", window, {"type": "lcm"})

    @classmethod
    def custom(cls, ratios: Sequence[int], extend: str = "periodic", window=None) -> "Filtration":
        ratios = [int(r) for r in ratios]
        if not ratios:
            raise UsageError("custom filtration needs at least one ratio")
        if extend not in ("periodic", "reject"):
            raise UsageError(f"extend must be 'periodic' or 'reject', got {extend!r}")
        if window is None:
            window = DEFAULT_WINDOW if extend == "periodic" else (-(len(ratios) - 1), len(ratios) - 1)
        need = max(window[1], 1 - window[0]) + 1
        if extend == "reject" and need > len(ratios):
            raise UsageError(
                f"window {tuple(window)} needs {need} ratios but only {len(ratios)} given "
                "(use extend='periodic' or a smaller window)"
            )
        config = {"type": "custom", "ratios": ratios, "extend": extend}
        return cls(lambda n: ratios[(n - 1) % len(ratios)], "custom", window, config)

    @classmethod
    def from_config(cls, cfg: dict | str) -> "Filtration":
        """Build from the JSON config object, or from a bare family name.

        Accepted names: ``factorial``, ``lcm``, ``prime_power(p)``.
        """
        if isinstance(cfg, str):
            m = re.fullmatch(r"\s*prime_power\((\d+)\)\s*", cfg)
            if m:
                cfg = {"type": "prime_power", "p": int(m.group(1))}
            else:
                cfg = {"type": cfg.strip()}
        if not isinstance(cfg, dict) or "type" not in cfg:
            raise UsageError(f"filtration config must be an object with a 'type', got {cfg!r}")
        kind = cfg["type"]
        window = tuple(cfg["window"]) if "window" in cfg else None
        if window is not None and len(window) != 2:
            raise UsageError(f"window must be [n_min, n_max], got {cfg['window']}")
        kw = {"window": window} if window is not None else {}
        if kind == "factorial":
            return cls.factorial(**kw)
        if kind == "lcm":
            return cls.lcm(**kw)
        if kind == "prime_power":
            if "p" not in cfg:
                raise UsageError("prime_power filtration needs 'p'")
            return cls.prime_power(int(cfg["p"]), **kw)
        if kind == "custom":
            if "ratios" not in cfg:
                raise UsageError("custom filtration needs 'ratios'")
            return cls.custom(cfg["ratios"], cfg.get("extend", "periodic"), **kw)
        raise UsageError(f"unknown filtration type {kind!r}")

    def to_config(self) -> dict:
        return {**self._config, "window": list(self.window)}

    def __repr__(self):
        return f"Filtration({self.name}, window={self.window})"

    def __eq__(self, other):
        return isinstance(other, Filtration) and (
            self is other or (self.to_config() == other.to_config())
        )

    def __hash__(self):
        return hash((self.name, self.window))

    # chain values ---------------------------------------------------------

    def _check(self, n: int):
        if not self.window[0] <= n <= self.window[1]:
            raise ResourceError(f"index {n} outside filtration window {self.window}")

    def psi_value(self, n: int) -> Fraction:
        """``e^{psi(n)}`` as an exact rational."""
        n = int(n)
        self._check(n)
        return Fraction(self._chain[n]) if n >= 0 else Fraction(1, self._chain[-n])

    def chain_int(self, n: int) -> int:
        """``e^{psi(n)}`` for ``n >= 0`` as an int."""
        if n < 0:
            raise UsageError(f"chain_int needs n >= 0, got {n}")
        self._check(n)
        return self._chain[n]

    def log_psi(self, n):
        """``psi(n) = log e^{psi(n)}`` in double precision; accepts arrays."""
        n = np.asarray(n)
        if n.size and (n.min() < self.window[0] or n.max() > self.window[1]):
            bad = n[(n < self.window[0]) | (n > self.window[1])].flat[0]
            raise ResourceError(f"index {int(bad)} outside filtration window {self.window}")
        out = np.sign(n) * self._log_chain[np.abs(n)]
        return float(out) if out.ndim == 0 else out

    def ratio(self, n: int) -> int:
        """``e^{Lambda(n)}`` for any integer n (``e^{Lambda(n)} = e^{Lambda(1-n)}`` for n <= 0)."""
        n = int(n)
        k = n if n >= 1 else 1 - n
        if k >= len(self._ratios):
            raise ResourceError(f"ratio index {n} outside filtration window {self.window}")
        return self._ratios[k]

    def radix(self, position: int) -> int:
        """Number of admissible digits at a position: ``e^{Lambda(position+1)}``."""
        return self.ratio(position + 1)

    def quotient(self, a: int, b: int) -> int:
        """``e^{psi(a)} / e^{psi(b)}`` for ``a >= b``, an integer."""
        if a < b:
            raise UsageError(f"quotient needs a >= b, got {a} < {b}")
        q = self.psi_value(a) / self.psi_value(b)
        assert q.denominator == 1
        return q.numerator

    # number theory --------------------------------------------------------

    def order_of_rational(self, q: Fraction) -> float:
        """Largest n with ``q in e^{psi(n)} Z``; ``inf`` for zero."""
        q = Fraction(q)
        if q == 0:
            return math.inf
        if q.denominator > 1:
            k = self.denominator_index(q.denominator)
            if k is None:
                raise ResourceError(
                    f"denominator of {q} divides no chain value within window {self.window}"
                )
            return -k
        a = abs(q.numerator)
        n = 0
        while n < self.window[1] and a % self._chain[n + 1] == 0:
            n += 1
        return n

    def denominator_index(self, b: int) -> int | None:
        """Least ``n >= 0`` in the window with ``b | e^{psi(n)}``, else None."""
        for n in range(0, self.window[1] + 1):
            if self._chain[n] % b == 0:
                return n
        return None

    def validate_cofinality(self, bound: int) -> CofinalityReport:
        if bound < 1:
            raise UsageError(f"bound must be >= 1, got {bound}")
        first = {}
        uncovered = []
        for m in range(1, bound + 1):
            idx = self.denominator_index(m)
            if idx is None:
                uncovered.append(m)
            else:
                first[m] = idx
        if uncovered:
            log.warning("%s: %d of 1..%d not covered within window", self.name, len(uncovered), bound)
        return CofinalityReport(bound, first, tuple(uncovered))
