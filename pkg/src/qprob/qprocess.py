"""Sequential ("microscopic") trial and urn processes.

A path of ``n`` trials is encoded by its zero-run lengths
``a(0), ..., a(k)``: ``a(0)`` zeroes, a non-zero, ``a(1)`` zeroes, ... .
This module prices such patterns, gives the per-step conditional laws,
enumerates every pattern (the brute-force oracle for the closed-form pmfs)
and simulates paths with a counter-based generator.
"""

from __future__ import annotations

import dataclasses
import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Union

import numpy as np

from .errors import DomainError, ResourceError
from .qdist import (
    Bernoulli,
    Contagious,
    Hypergeom,
    Pmf,
    bernoulli_pmf,
    contagious_pmf,
    hypergeom_pmf,
)
from .qnum import Interval, bracket, qvalue, shifted_pow, shifted_pow_infinite

Family = Union[Bernoulli, Hypergeom, Contagious]

MAX_ENUMERATION_TRIALS = 16
_TWO64 = 1 << 64


@dataclass(frozen=True)
class PathPattern:
    """Zero-run lengths between successive non-zeroes.

    With ``terminal_infinite`` the final run is an infinite block of zeroes and
    the stored last entry must be 0.
    """

    runs: tuple[int, ...]
    terminal_infinite: bool = False

    def __post_init__(self):
        runs = tuple(int(a) for a in self.runs)
        if not runs:
            raise DomainError("a pattern needs at least one run")
        if any(a < 0 for a in runs):
            raise DomainError(f"run lengths must be >= 0, got {runs}")
        if self.terminal_infinite and runs[-1] != 0:
            raise DomainError("the infinite final run must be stored as 0")
        object.__setattr__(self, "runs", runs)

    @classmethod
    def from_steps(cls, steps) -> "PathPattern":
        """Build from a 0/1 sequence (1 marks a non-zero trial)."""
        runs = [0]
        for x in steps:
            if x:
                runs.append(0)
            else:
                runs[-1] += 1
        return cls(tuple(runs))

    @property
    def kappa(self) -> int:
        return len(self.runs) - 1

    @property
    def zeros(self) -> int:
        return sum(self.runs)

    @property
    def n(self) -> int:
        if self.terminal_infinite:
            raise DomainError("an infinite pattern has no finite length")
        return self.kappa + self.zeros

    def partial_sums(self) -> list[int]:
        return list(itertools.accumulate(self.runs))

    def steps(self) -> list[int]:
        out: list[int] = []
        for i, a in enumerate(self.runs):
            out.extend([0] * a)
            if i < self.kappa:
                out.append(1)
        return out


@dataclass(frozen=True)
class ProcessState:
    draws_so_far: int = 0
    nonzeros_so_far: int = 0
    zeros_so_far: int = 0

    def __post_init__(self):
        if min(self.draws_so_far, self.nonzeros_so_far, self.zeros_so_far) < 0:
            raise DomainError("state counts must be >= 0")
        if self.draws_so_far != self.nonzeros_so_far + self.zeros_so_far:
            raise DomainError("draws must equal nonzeros + zeros")

    def advance(self, nonzero: bool) -> "ProcessState":
        return ProcessState(
            self.draws_so_far + 1,
            self.nonzeros_so_far + bool(nonzero),
            self.zeros_so_far + (not nonzero),
        )


@dataclass(frozen=True)
class SampleReport:
    spec: Family
    n_samples: int
    counts: dict[int, int]
    empirical: dict[int, Fraction]
    tv_distance: Fraction
    seed: int


# ---------------------------------------------------------------------------
# conditionals and pattern prices
# ---------------------------------------------------------------------------


def step_conditionals(state: ProcessState, family: Family) -> tuple[Fraction, Fraction]:
    """``(P(next = 0), P(next != 0))`` given the history summarised by ``state``."""
    q = qvalue(family.q)
    i, z, g = state.nonzeros_so_far, state.zeros_so_far, state.draws_so_far
    if isinstance(family, Bernoulli):
        nz = q**z * family.p
        return 1 - nz, nz
    if isinstance(family, Hypergeom):
        m, u = family.m - i, family.u - z
        if m < 0 or u < 0 or m + u <= 0:
            raise DomainError(f"urn state {state} is infeasible for {family}")
        total = bracket(m + u, q)
        return q**m * bracket(u, q) / total, bracket(m, q) / total
    if isinstance(family, Contagious):
        m, u, s = family.m, family.u, family.s
        size = m + u + g * s
        marked, unmarked = m + i * s, u + z * s
        if size <= 0 or marked < 0 or unmarked < 0:
            raise DomainError(f"urn state {state} is infeasible for {family}")
        total = bracket(size, q)
        return q**marked * bracket(unmarked, q) / total, bracket(marked, q) / total
    raise TypeError(f"no sequential process for {type(family).__name__}")


def pattern_probability(pattern: PathPattern, family: Family, eps=Fraction(1, 10**15)) -> Union[Fraction, Interval]:
    """Closed-form probability of the event encoded by ``pattern``."""
    q = qvalue(family.q)
    k = pattern.kappa
    partial = pattern.partial_sums()
    if isinstance(family, Bernoulli):
        p = family.p
        weight = q ** sum(partial[:k]) * p**k
        if pattern.terminal_infinite:
            return weight * shifted_pow_infinite(p, q, eps)
        return shifted_pow(1, -p, pattern.zeros, q) * weight
    if pattern.terminal_infinite:
        raise DomainError("urn processes have no infinite patterns")
    n = pattern.n
    if isinstance(family, Hypergeom):
        m, u, s = family.m, family.u, -1
        if n > m + u:
            raise DomainError(f"pattern of length {n} exhausts an urn of {m + u} balls")
    elif isinstance(family, Contagious):
        m, u, s = family.m, family.u, family.s
        for g in range(n):
            if m + u + g * s <= 0:
                raise DomainError(f"urn empties before draw {g + 1}")
    else:
        raise TypeError(f"no sequential process for {type(family).__name__}")
    out = q ** sum((m + s * i) * a for i, a in enumerate(pattern.runs))
    for a in range(k):
        out *= bracket(m + a * s, q)
    for b in range(n - k):
        out *= bracket(u + b * s, q)
    for g in range(n):
        out /= bracket(m + u + g * s, q)
    return out


def chain_probability(pattern: PathPattern, family: Family) -> Fraction:
    """Product of :func:`step_conditionals` along the pattern's trials."""
    state = ProcessState()
    out = Fraction(1)
    for x in pattern.steps():
        p0, p1 = step_conditionals(state, family)
        out *= p1 if x else p0
        if out == 0:
            return out
        state = state.advance(x)
    return out


def enumerate_patterns(n: int, kappa: int) -> Iterator[PathPattern]:
    """Every composition of ``n - kappa`` zeroes into ``kappa + 1`` runs, once each."""
    if not 0 <= kappa <= n:
        raise DomainError(f"need 0 <= kappa <= n, got kappa={kappa}, n={n}")
    zeros = n - kappa
    # stars and bars: choose where the kappa bars sit among zeros + kappa slots
    for bars in itertools.combinations(range(zeros + kappa), kappa):
        runs = []
        prev = -1
        for b in bars:
            runs.append(b - prev - 1)
            prev = b
        runs.append(zeros + kappa - prev - 1)
        yield PathPattern(tuple(runs))


def aggregate(family: Family, n: Optional[int] = None) -> Pmf:
    """Exact pmf of the number of non-zeroes, by summing over all patterns."""
    n = family.n if n is None else n
    if n > MAX_ENUMERATION_TRIALS:
        raise ResourceError(
            f"enumeration over 2^{n} paths exceeds the guard n <= {MAX_ENUMERATION_TRIALS}"
        )
    q = qvalue(family.q)
    entries = {}
    for k in range(n + 1):
        entries[k] = sum(
            (pattern_probability(pat, family) for pat in enumerate_patterns(n, k)),
            Fraction(0),
        )
    return Pmf(entries, {k: bracket(k, q) for k in entries})


def analytic_pmf(family: Family) -> Pmf:
    if isinstance(family, Bernoulli):
        return bernoulli_pmf(family.n, family.p, family.q)
    if isinstance(family, Hypergeom):
        return hypergeom_pmf(family.m, family.u, family.n, family.q)
    if isinstance(family, Contagious):
        return contagious_pmf(family.m, family.u, family.s, family.n, family.q)
    raise TypeError(f"no sequential process for {type(family).__name__}")


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def path_words(seed: int, path_index: int, n: int) -> np.ndarray:
    """The ``n`` raw 64-bit words used by path ``path_index``.

    Path ``i`` owns stream positions ``i*n .. i*n + n - 1`` of the Philox
    stream keyed by ``seed``, so any path can be regenerated on its own.
    """
    start = path_index * n
    block, offset = divmod(start, 4)
    bitgen = np.random.Philox(key=seed, counter=block)
    return bitgen.random_raw(offset + n)[offset:]


def _all_words(seed: int, n_samples: int, n: int) -> np.ndarray:
    return np.random.Philox(key=seed).random_raw(n_samples * n).reshape(n_samples, n)


def _threshold(p_nonzero: Fraction) -> int:
    # nonzero iff the raw word is below floor(p * 2^64)
    return (p_nonzero.numerator << 64) // p_nonzero.denominator


def sample_paths(family: Family, n: Optional[int] = None, n_samples: int = 10_000, seed: int = 0) -> SampleReport:
    """Simulate ``n_samples`` independent paths and compare with the analytic pmf."""
    n = family.n if n is None else n
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    if not 0 <= seed < _TWO64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    if n != family.n:
        family = dataclasses.replace(family, n=n)
    family.validate()
    if isinstance(family, Bernoulli) and not family.q <= 1:
        raise DomainError("sampling requires the probability regime 0 < q <= 1")

    @lru_cache(maxsize=None)
    def threshold(i: int, z: int) -> int:
        _, p1 = step_conditionals(ProcessState(i + z, i, z), family)
        return _threshold(p1)

    words = _all_words(seed, n_samples, n) if n else np.zeros((n_samples, 0), np.uint64)
    counts: Counter = Counter()
    for row in words.tolist():
        i = z = 0
        for w in row:
            if w < threshold(i, z):
                i += 1
            else:
                z += 1
        counts[i] += 1
    pmf = analytic_pmf(family)
    empirical = {k: Fraction(counts.get(k, 0), n_samples) for k in range(n + 1)}
    tv = sum((abs(empirical[k] - pmf[k]) for k in range(n + 1)), Fraction(0)) / 2
    return SampleReport(
        family, n_samples, {k: counts.get(k, 0) for k in range(n + 1)}, empirical, tv, seed
    )
