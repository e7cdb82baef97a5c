"""Exact sampling from ``Z(., t)`` and simulation of the jump process on A_f.

A draw is made in two stages: the shell index ``m`` by inverse CDF over the
shell masses, then a Haar-uniform point of ``S_m``.  Processes are built from
independent increments, so path simulation is repeated batch addition.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adele import DEFAULT_DEPTH, AdeleBatch, FiniteAdele, sample_sphere_batch
from .errors import PrecisionError, UsageError
from .heat import HeatKernelFin

DEFAULT_CHUNK = 100_000


def make_rng(seed) -> np.random.Generator:
    """Generator from an int seed, a SeedSequence or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_streams(seed, n: int) -> list[np.random.Generator]:
    """``n`` independent streams derived from one root seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(n)]


@dataclass(frozen=True)
class FiniteAdeleSampler:
    """Law of ``X_t`` started at 0, restricted to a certified shell window.

    Shells outside ``[m_lo, m_hi]`` carry total mass below ``tolerance``; draws
    are taken from the law conditioned on the window, which is what rejecting
    out-of-window draws would produce.
    """

    kernel: HeatKernelFin
    t: float
    tolerance: float = 1e-12
    depth: int = DEFAULT_DEPTH
    shells: np.ndarray = field(init=False, repr=False)
    masses: np.ndarray = field(init=False, repr=False)
    cdf: np.ndarray = field(init=False, repr=False)
    lower_tail: float = field(init=False)
    upper_tail: float = field(init=False)

    def __post_init__(self):
        if self.depth < 1:
            raise UsageError(f"depth must be >= 1, got {self.depth}")
        shells, masses, lo, hi = self.kernel.shell_masses(self.t, self.tolerance)
        cdf = np.cumsum(masses)
        cdf /= cdf[-1]
        set_ = object.__setattr__
        set_(self, "shells", shells)
        set_(self, "masses", masses)
        set_(self, "cdf", cdf)
        set_(self, "lower_tail", lo)
        set_(self, "upper_tail", hi)

    @property
    def filtration(self):
        return self.kernel.filtration

    @property
    def frame(self) -> tuple[int, int]:
        """Digit positions ``[start, truncation)`` that hold every draw to ``depth`` digits."""
        return -int(self.shells[-1]), -int(self.shells[0]) + self.depth

    def window_mass(self) -> float:
        return float(np.sum(self.masses))

    def sample_shells(self, n: int, rng) -> np.ndarray:
        u = make_rng(rng).random(n)
        idx = np.searchsorted(self.cdf, u, side="right")
        return self.shells[np.minimum(idx, len(self.shells) - 1)]

    def sample_batch(self, n: int, rng, frame: tuple[int, int] | None = None) -> AdeleBatch:
        rng = make_rng(rng)
        start, trunc = self.frame if frame is None else frame
        if trunc <= -int(self.shells[0]):
            raise PrecisionError(f"frame truncation {trunc} cannot resolve shell {int(self.shells[0])}")
        return sample_sphere_batch(self.filtration, self.sample_shells(n, rng), start, trunc, rng)

    def sample(self, rng) -> FiniteAdele:
        return self.sample_batch(1, rng).row(0)

    def shell_probabilities(self) -> np.ndarray:
        """Law of the shell index under the conditioned sampler."""
        return self.masses / np.sum(self.masses)


def sample_increment(sampler: FiniteAdeleSampler, rng) -> FiniteAdele:
    return sampler.sample(rng)


def shell_counts(sampler: FiniteAdeleSampler, n: int, seed, chunk: int = DEFAULT_CHUNK, workers: int = 1) -> np.ndarray:
    """Counts of sampled norm indices per shell of ``sampler.shells``.

    Norm indices are read off the sampled adeles.  Chunk ``i`` always uses the
    ``i``-th spawned stream, so counts do not depend on ``workers``.
    """
    sizes = [chunk] * (n // chunk) + ([n % chunk] if n % chunk else [])
    streams = spawn_streams(seed, len(sizes))
    lo = int(sampler.shells[0])

    def run(args):
        size, rng = args
        m = sampler.sample_batch(size, rng).norm_index()
        return np.bincount((m - lo).astype(np.int64), minlength=len(sampler.shells))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, zip(sizes, streams)))
    else:
        parts = [run(a) for a in zip(sizes, streams)]
    return np.sum(parts, axis=0)


# paths -------------------------------------------------------------------------


@dataclass
class PathEnsemble:
    """``n`` independent paths on a common time grid, one batch per time."""

    times: np.ndarray
    states: list  # AdeleBatch per time

    def norm_index(self) -> np.ndarray:
        """Array of shape ``(len(times), n)``; ``-inf`` marks the zero coset."""
        return np.stack([b.norm_index() for b in self.states])

    def path(self, i: int) -> "PathSample":
        return PathSample(self.times, [b.row(i) for b in self.states])


@dataclass
class PathSample:
    times: np.ndarray
    states: list  # FiniteAdele per time

    @property
    def norm_trace(self) -> np.ndarray:
        return np.array([-np.inf if x.is_zero else float(x.norm()) for x in self.states])

    def to_csv(self, prefix: int = 8, real=None) -> str:
        """CSV with columns ``t, norm_index, norm, gamma, digits_prefix`` (plus ``x_real`` if given)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["t", "norm_index", "norm", "gamma", "digits_prefix"]
        w.writerow(head + (["x_real"] if real is not None else []))
        for i, (t, x) in enumerate(zip(self.times, self.states)):
            if x.is_zero:
                row = [repr(float(t)), "-inf", "0", "inf", ""]
            else:
                row = [repr(float(t)), x.norm_index(), repr(float(x.norm())), int(x.gamma),
                       ".".join(str(d) for d in x.digits[:prefix])]
            if real is not None:
                row.append(repr(float(real[i])))
            w.writerow(row)
        return buf.getvalue()


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise UsageError("time grid must be a nonempty 1-d sequence")
    if times[0] < 0:
        raise UsageError(f"t_0 must be >= 0, got {times[0]}")
    if np.any(np.diff(times) <= 0):
        raise UsageError("time grid must be strictly increasing")
    return times


def simulate_paths(
    kernel: HeatKernelFin,
    times,
    n: int,
    rng,
    x0: FiniteAdele | None = None,
    tolerance: float = 1e-12,
    depth: int = DEFAULT_DEPTH,
) -> PathEnsemble:
    """``n`` paths with ``X_{t_0} = x0`` and independent increments ``Z(., t_{i+1} - t_i)``."""
    times = _check_times(times)
    rng = make_rng(rng)
    f = kernel.filtration
    samplers = [FiniteAdeleSampler(kernel, float(dt), tolerance, depth) for dt in np.diff(times)]
    frames = [s.frame for s in samplers]
    start = min([fr[0] for fr in frames], default=-depth)
    trunc = max([fr[1] for fr in frames], default=depth)
    if x0 is None:
        x0 = FiniteAdele.zero(f, trunc)
    if x0.filtration != f:
        raise UsageError("filtration mismatch between x0 and kernel")
    if not x0.is_zero:
        start = min(start, int(x0.gamma))
    trunc = min(trunc, x0.truncation)
    if samplers and trunc <= max(-int(s.shells[0]) for s in samplers):
        raise PrecisionError(f"x0 known only to position {x0.truncation}; increments need more digits")
    state = AdeleBatch.from_adele(x0, n, start, trunc)
    states = [state]
    for s in samplers:
        state = state + s.sample_batch(n, rng, (start, trunc))
        states.append(state)
    return PathEnsemble(times, states)


def simulate_path(kernel, times, rng, x0=None, tolerance=1e-12, depth=DEFAULT_DEPTH) -> PathSample:
    return simulate_paths(kernel, times, 1, rng, x0, tolerance, depth).path(0)


def shell_table(norm_index: np.ndarray, shells: np.ndarray) -> np.ndarray:
    """Counts of ``norm_index`` per entry of ``shells``; out-of-range values are dropped."""
    lo = int(shells[0])
    m = norm_index[np.isfinite(norm_index)].astype(np.int64) - lo
    m = m[(m >= 0) & (m < len(shells))]
    return np.bincount(m, minlength=len(shells))
