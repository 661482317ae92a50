"""Exact q-calculus kernel.

Everything here works over :class:`fractions.Fraction`; floating point is
never used.  Quantities that are limits (infinite products, q-exponential
series) are returned as certified :class:`Interval` enclosures.

Notation used in the docstrings: ``[x]`` is the q-bracket
``(q**x - 1)/(q - 1)``, ``[k]!`` the q-factorial and ``(a + b)_q^n`` the
shifted power ``prod_{i<n} (a + q**i * b)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence, Union

from .errors import DomainError

Rational = Union[Fraction, int]


def rational(x) -> Fraction:
    """Coerce ``x`` to an exact Fraction.

    Strings like ``"3/8"``, ``"-2"`` or ``"1e-9"`` are parsed exactly.  Floats
    are read through their shortest decimal repr, so ``1e-12`` becomes
    ``1/10**12`` rather than the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {x!r} as a rational") from exc
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


# ---------------------------------------------------------------------------
# base q
# ---------------------------------------------------------------------------


class Regime(enum.Enum):
    SUB_UNIT = "SubUnit"
    UNIT = "Unit"
    SUPER_UNIT = "SuperUnit"


@dataclass(frozen=True)
class QBase:
    """A positive rational deformation parameter with its regime tag."""

    value: Fraction

    def __post_init__(self):
        v = rational(self.value)
        if v <= 0:
            raise DomainError(f"q must be positive, got {v}")
        object.__setattr__(self, "value", v)

    @property
    def regime(self) -> Regime:
        if self.value < 1:
            return Regime.SUB_UNIT
        if self.value == 1:
            return Regime.UNIT
        return Regime.SUPER_UNIT

    def inverse(self) -> "QBase":
        return QBase(1 / self.value)

    def __str__(self):
        return str(self.value)


QLike = Union[QBase, Fraction, int, str]


def qvalue(q: QLike) -> Fraction:
    """Return the rational value of ``q``, checking positivity."""
    if isinstance(q, QBase):
        return q.value
    v = rational(q)
    if v <= 0:
        raise DomainError(f"q must be positive, got {v}")
    return v


def regime(q: QLike) -> Regime:
    return QBase(qvalue(q)).regime


def require_sub_unit(q: QLike, what: str) -> Fraction:
    qv = qvalue(q)
    if qv >= 1:
        raise DomainError(f"{what} requires 0 < q < 1 (SubUnit regime), got q={qv}")
    return qv


# ---------------------------------------------------------------------------
# intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = rational(self.lo), rational(self.hi)
        if lo > hi:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "Interval":
        x = rational(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, other) -> bool:
        if isinstance(other, Interval):
            return self.lo <= other.lo and other.hi <= self.hi
        x = rational(other)
        return self.lo <= x <= self.hi

    __contains__ = contains

    def overlaps(self, other) -> bool:
        other = as_interval(other)
        return self.lo <= other.hi and other.lo <= self.hi

    def gap(self, other) -> Fraction:
        """Distance between the two intervals (0 when they overlap)."""
        other = as_interval(other)
        return max(Fraction(0), other.lo - self.hi, self.lo - other.hi)

    def distance_bound(self, other) -> Fraction:
        """Upper bound on ``|x - y|`` for any x in self, y in other."""
        other = as_interval(other)
        return max(self.hi - other.lo, other.hi - self.lo)

    def __add__(self, other):
        o = as_interval(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-as_interval(other))

    def __rsub__(self, other):
        return as_interval(other) - self

    def __mul__(self, other):
        o = as_interval(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise DomainError(f"cannot invert interval {self} containing 0")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * as_interval(other).reciprocal()

    def __rtruediv__(self, other):
        return as_interval(other) * self.reciprocal()

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        out = Interval.point(1)
        for _ in range(k):
            out = out * self
        return out

    def outward(self, grid: Fraction) -> "Interval":
        """Round outward to the dyadic grid ``2**-k`` not coarser than ``grid``."""
        if self.lo == self.hi and self.lo.denominator & (self.lo.denominator - 1) == 0:
            return self
        k = max(0, math.ceil(math.log2(1 / grid)) if grid < 1 else 0)
        while Fraction(1, 2**k) > grid:
            k += 1
        scale = 2**k
        lo = Fraction(math.floor(self.lo * scale), scale)
        hi = Fraction(math.ceil(self.hi * scale), scale)
        return Interval(lo, hi)

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


Number = Union[Fraction, Interval]


def as_interval(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval.point(x)


def certified_series(
    terms: Iterable[Fraction],
    ratio_bound: Callable[[int], Fraction],
    eps,
    max_terms: int = 200_000,
) -> Interval:
    """Enclose ``sum(terms)`` in an interval of width at most ``eps``.

    ``ratio_bound(k)`` must return a rational ``rho`` with
    ``|t[j+1] / t[j]| <= rho`` for every ``j >= k``.  Once ``rho < 1`` the tail
    after term ``k`` is bounded by ``|t[k]| / (1 - rho)``.
    """
    eps = rational(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    total = Fraction(0)
    for k, t in enumerate(terms):
        if k >= max_terms:
            break
        rho = ratio_bound(k)
        if rho < 1:
            bound = abs(t) / (1 - rho)
            if 2 * bound <= eps / 2:
                return Interval(total - bound, total + bound).outward(eps / 8)
        total += t
    raise DomainError(f"series did not reach width {eps} within {max_terms} terms")


# ---------------------------------------------------------------------------
# brackets, factorials, binomials
# ---------------------------------------------------------------------------


@lru_cache(maxsize=65536)
def _bracket(x: int, q: Fraction) -> Fraction:
    if q == 1:
        return Fraction(x)
    if x >= 0:
        return (q**x - 1) / (q - 1)
    return -(q**x) * _bracket(-x, q)


def bracket(x: int, q: QLike) -> Fraction:
    """q-analog of the integer ``x``; equals ``x`` itself at q = 1."""
    return _bracket(int(x), qvalue(q))


@lru_cache(maxsize=16384)
def _q_factorial(k: int, q: Fraction) -> Fraction:
    out = Fraction(1)
    for i in range(1, k + 1):
        out *= _bracket(i, q)
    return out


def q_factorial(k: int, q: QLike) -> Fraction:
    if k < 0:
        raise DomainError(f"q-factorial needs k >= 0, got {k}")
    return _q_factorial(int(k), qvalue(q))


@lru_cache(maxsize=65536)
def _q_binomial(x: int, k: int, q: Fraction) -> Fraction:
    if k < 0:
        return Fraction(0)
    if k == 0:
        return Fraction(1)
    if 0 <= x < k:
        return Fraction(0)
    num = Fraction(1)
    for i in range(k):
        num *= _bracket(x - i, q)
    return num / _q_factorial(k, q)


def q_binomial(x: int, k: int, q: QLike) -> Fraction:
    """Gaussian binomial ``[x][x-1]...[x-k+1] / [k]!`` for integer x and k.

    ``x`` may be negative.  Negative ``k`` gives 0.
    """
    return _q_binomial(int(x), int(k), qvalue(q))


def rebase_bracket(x: int, q: QLike) -> Fraction:
    """Bracket of ``x`` in the inverted base ``1/q``."""
    return bracket(x, 1 / qvalue(q))


# ---------------------------------------------------------------------------
# shifted powers and Euler's expansion
# ---------------------------------------------------------------------------


def shifted_pow(a, b, n: int, q: QLike):
    """``(a + b)_q^n = prod_{i<n} (a + q**i b)``; negative n inverts.

    For ``n = -beta`` the value is ``1 / prod_{i<beta} (a + q**(i-beta) b)``,
    which keeps the splitting law valid for every integer exponent.  ``a`` and
    ``b`` may also be :class:`PPoly` values (non-negative ``n`` only).
    ``(1 - p)_q^n`` is ``shifted_pow(1, -p, n, q)``.
    """
    qv = qvalue(q)
    if not isinstance(a, PPoly):
        a = rational(a)
    if not isinstance(b, PPoly):
        b = rational(b)
    if n >= 0:
        out = Fraction(1)
        qi = Fraction(1)
        for _ in range(n):
            out = out * (a + qi * b)
            qi *= qv
        return out
    beta = -n
    if isinstance(a, PPoly) or isinstance(b, PPoly):
        raise DomainError("negative shifted powers of polynomials are not polynomials")
    den = Fraction(1)
    for i in range(beta):
        factor = a + qv ** (i - beta) * b
        if factor == 0:
            raise DomainError(
                f"shifted power with exponent {n} has a zero factor at i={i}"
            )
        den *= factor
    return 1 / den


def euler_coefficients(m: int, q: QLike) -> list[Fraction]:
    """Coefficients ``c_j`` with ``(x + y)_q^m = sum_j c_j x^(m-j) y^j``."""
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    qv = qvalue(q)
    return [q_binomial(m, j, qv) * qv ** (j * (j - 1) // 2) for j in range(m + 1)]


def symmetric_pow(a, b, n: int, q: QLike) -> Fraction:
    """``sum_k [n choose k] a^k b^(n-k)``."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    qv = qvalue(q)
    a, b = rational(a), rational(b)
    return sum(
        (q_binomial(n, k, qv) * a**k * b ** (n - k) for k in range(n + 1)),
        Fraction(0),
    )


def shifted_pow_infinite(p, q: QLike, eps) -> Interval:
    """Certified enclosure of ``prod_{i>=0} (1 - p q^i)`` for 0 < q < 1.

    The product is truncated after N factors once the tail mass
    ``|p| q^N / (1 - q)`` is small.  For ``p >= 0`` the tail lies in
    ``[1 - t, 1]``; for ``p < 0`` it lies in ``[1, 1/(1 - t)]``.
    """
    qv = require_sub_unit(q, "infinite shifted power")
    p, eps = rational(p), rational(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    if p == 0:
        return Interval.point(1)
    partial = Fraction(1)
    qn = Fraction(1)
    half = Fraction(1, 2)
    while True:
        t = abs(p) * qn / (1 - qv)
        if t <= half:
            if p > 0:
                tail = Interval(1 - t, 1)
                width = abs(partial) * t
            else:
                tail = Interval(1, 1 / (1 - t))
                width = abs(partial) * t / (1 - t)
            if width <= eps / 2:
                return (partial * tail).outward(eps / 4)
        partial *= 1 - p * qn
        qn *= qv
        if partial == 0:
            return Interval.point(0)


# ---------------------------------------------------------------------------
# polynomials in p
# ---------------------------------------------------------------------------


class PPoly:
    """Univariate polynomial with Fraction coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def constant(cls, c) -> "PPoly":
        return cls((c,))

    @classmethod
    def monomial(cls, s: int, c=1) -> "PPoly":
        return cls([0] * s + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, s: int) -> Fraction:
        return self.coeffs[s] if 0 <= s < len(self.coeffs) else Fraction(0)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, PPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == PPoly.constant(other).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"PPoly({[str(c) for c in self.coeffs]})"

    @staticmethod
    def _lift(other) -> "PPoly":
        if isinstance(other, PPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return PPoly.constant(other)
        raise TypeError(f"cannot combine PPoly with {type(other).__name__}")

    def __add__(self, other):
        o = self._lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return PPoly(self.coefficient(i) + o.coefficient(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return PPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PPoly(c * other for c in self.coeffs)
        o = self._lift(other)
        if not self.coeffs or not o.coeffs:
            return PPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return PPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("negative powers of polynomials are not polynomials")
        out = PPoly.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x):
        if isinstance(x, Interval):
            acc = Interval.point(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        x = rational(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def scale_arg(self, c) -> "PPoly":
        """The polynomial ``p -> f(c p)``."""
        c = rational(c)
        return PPoly(a * c**s for s, a in enumerate(self.coeffs))


X = PPoly.monomial(1)


def q_derivative(f: PPoly, q: QLike) -> PPoly:
    """Apply ``(f(qp) - f(p)) / ((q - 1) p)`` via ``p^s -> [s] p^(s-1)``."""
    qv = qvalue(q)
    return PPoly(_bracket(s, qv) * c for s, c in enumerate(f.coeffs) if s >= 1)


def q_difference_quotient(f: PPoly, q: QLike) -> PPoly:
    """The q-derivative computed straight from its difference-quotient definition.

    Used as an independent check on :func:`q_derivative`.  At q = 1 this falls
    back to the ordinary derivative.
    """
    qv = qvalue(q)
    if qv == 1:
        return PPoly(s * c for s, c in enumerate(f.coeffs) if s >= 1)
    num = f.scale_arg(qv) - f
    # num has no constant term, so dividing by p is a coefficient shift
    assert num.coefficient(0) == 0
    return PPoly(c / (qv - 1) for c in num.coeffs[1:])


def jackson_integral(f: PPoly, upper, q: QLike) -> Fraction:
    """``int_0^upper f(x) d_q x`` using ``x^s -> upper^(s+1) / [s+1]``."""
    qv = qvalue(q)
    a = rational(upper)
    return sum(
        (c * a ** (s + 1) / _bracket(s + 1, qv) for s, c in enumerate(f.coeffs)),
        Fraction(0),
    )


def euler_operator_coefficients(m: int, q: QLike) -> list[Fraction]:
    """Coefficients c_1..c_m of ``(x D_q)^m = sum_k c_k x^k D_q^k``."""
    if m < 1:
        raise DomainError(f"operator expansion needs m >= 1, got {m}")
    qv = qvalue(q)
    out = []
    for k in range(1, m + 1):
        inner = sum(
            (
                q_binomial(k - 1, s, qv)
                * (-1) ** s
                * qv ** (s * (s - 1) // 2)
                * _bracket(k - s, qv) ** (m - 1)
                for s in range(k)
            ),
            Fraction(0),
        )
        out.append(inner / q_factorial(k - 1, qv))
    return out


def _exp_terms(mu: int, lam: Fraction, q: Fraction) -> Iterator[Fraction]:
    t = Fraction(1)
    k = 0
    while True:
        yield t
        t = t * lam * q ** (mu * k) / _bracket(k + 1, q)
        k += 1


def q_exponential(mu: int, lam, q: QLike, eps) -> Interval:
    """Enclosure of ``E_mu(lam) = sum_k lam^k q^(mu k(k-1)/2) / [k]!``."""
    qv = qvalue(q)
    lam = rational(lam)
    if lam == 0:
        return Interval.point(1)
    if qv < 1:
        if mu < 0:
            raise DomainError(f"E_{mu} diverges for q < 1")
        if mu == 0 and abs(lam) * (1 - qv) >= 1:
            raise DomainError(
                f"E_0({lam}) needs |lambda|(1-q) < 1 for q={qv}, got {abs(lam) * (1 - qv)}"
            )
    elif qv > 1:
        if mu > 1:
            raise DomainError(f"E_{mu} diverges for q > 1")
        if mu == 1 and abs(lam) * (qv - 1) / qv >= 1:
            raise DomainError(f"E_1({lam}) needs |lambda|(q-1)/q < 1 for q={qv}")

    def rho(k: int) -> Fraction:
        return abs(lam) * qv ** (mu * k) / _bracket(k + 1, qv)

    return certified_series(_exp_terms(mu, lam, qv), rho, eps)


def binom(n: int, k: int) -> int:
    """Classical binomial with the same conventions as :func:`q_binomial` at q = 1."""
    if k < 0:
        return 0
    if k == 0:
        return 1
    if 0 <= n < k:
        return 0
    if n >= 0:
        return math.comb(n, k)
    num = 1
    for i in range(k):
        num *= n - i
    return num // math.factorial(k)


def exact_sum(values: Sequence[Fraction]) -> Fraction:
    return sum(values, Fraction(0))
