"""q-deformed discrete distributions: pmfs, moments, tails and generating functions.

Outcomes are indexed by the integer ``k``; the random variable itself takes
the value ``[k]`` (the q-bracket), which is what all expectations use.
Finite-support families are exact.  Families with infinite support (or a
defect, i.e. mass sitting on an "infinite" event) return certified
:class:`~qprob.qnum.Interval` entries together with an explicit defect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Union

from .errors import DomainError, IdentityViolation
from .qnum import (
    X,
    Interval,
    PPoly,
    QLike,
    as_interval,
    binom,
    bracket,
    certified_series,
    jackson_integral,
    q_binomial,
    q_derivative,
    q_factorial,
    qvalue,
    rational,
    require_sub_unit,
    shifted_pow,
    shifted_pow_infinite,
)

Prob = Union[Fraction, Interval]

PROBABILITY = "probability"
IDENTITY = "identity"


# ---------------------------------------------------------------------------
# distribution specs
# ---------------------------------------------------------------------------


def _check_p(p: Fraction):
    if not 0 <= p <= 1:
        raise DomainError(f"probability p must satisfy 0 <= p <= 1, got {p}")


def _check_prob_q(q: Fraction, family: str):
    if not 0 < q <= 1:
        raise DomainError(
            f"{family} in probability mode requires 0 < q <= 1, got q={q}"
        )


def _check_nonneg(name: str, v: int):
    if v < 0:
        raise DomainError(f"{name} must be >= 0, got {v}")


@dataclass(frozen=True)
class Bernoulli:
    n: int
    p: Fraction
    q: Fraction

    def validate(self, mode: str = PROBABILITY):
        _check_nonneg("n", self.n)
        qvalue(self.q)
        if mode == PROBABILITY:
            _check_p(self.p)
            _check_prob_q(self.q, "q-Bernoulli")
        return self


@dataclass(frozen=True)
class BernoulliInfinite:
    p: Fraction
    q: Fraction

    def validate(self, mode: str = PROBABILITY):
        require_sub_unit(self.q, "q-Bernoulli with infinitely many trials")
        _check_p(self.p)
        return self


@dataclass(frozen=True)
class Geometric:
    p: Fraction
    q: Fraction
    rescaled: bool = False

    def validate(self, mode: str = PROBABILITY):
        require_sub_unit(self.q, "q-geometric")
        if not 0 < self.p < 1:
            raise DomainError(f"q-geometric needs 0 < p < 1, got {self.p}")
        return self


@dataclass(frozen=True)
class NegBinomial:
    r: int
    p: Fraction
    q: Fraction

    def validate(self, mode: str = PROBABILITY):
        require_sub_unit(self.q, "q-negative-binomial")
        if self.r < 1:
            raise DomainError(f"target count r must be >= 1, got {self.r}")
        if not 0 < self.p < 1:
            raise DomainError(f"q-negative-binomial needs 0 < p < 1, got {self.p}")
        return self


@dataclass(frozen=True)
class Poisson:
    lam: Fraction
    q: Fraction

    def validate(self, mode: str = PROBABILITY):
        qv = qvalue(self.q)
        if qv == 1:
            raise DomainError("q-Poisson needs q != 1 (SubUnit or SuperUnit regime)")
        if self.lam < 0:
            raise DomainError(f"lambda must be >= 0, got {self.lam}")
        if qv < 1 and self.lam * (1 - qv) >= 1:
            raise DomainError(
                f"SubUnit q-Poisson requires lambda(1-q) < 1, got {self.lam * (1 - qv)}"
            )
        if qv > 1 and self.lam >= qv:
            raise DomainError(
                f"SuperUnit q-Poisson requires 1 - lambda q^-j > 0 for all j >= 1, "
                f"i.e. lambda < q; got lambda={self.lam}, q={qv}"
            )
        return self


@dataclass(frozen=True)
class Hypergeom:
    m: int
    u: int
    n: int
    q: Fraction

    def validate(self, mode: str = PROBABILITY):
        _check_nonneg("m", self.m)
        _check_nonneg("u", self.u)
        _check_nonneg("n", self.n)
        qvalue(self.q)
        if self.n > self.m + self.u:
            raise DomainError(
                f"cannot draw n={self.n} balls from an urn of m+u={self.m + self.u}"
            )
        return self


def _first_nonpositive_is_zero(start: int, step: int, count: int) -> bool:
    for i in range(count):
        v = start + i * step
        if v == 0:
            return True
        if v < 0:
            return False
    return True


@dataclass(frozen=True)
class Contagious:
    m: int
    u: int
    s: int
    n: int
    q: Fraction

    def validate(self, mode: str = PROBABILITY):
        _check_nonneg("n", self.n)
        qvalue(self.q)
        if self.m < 0 or self.u < 0:
            raise DomainError("ball counts m, u must be >= 0")
        total = self.m + self.u
        for g in range(self.n):
            if total + g * self.s <= 0:
                raise DomainError(
                    f"urn size [m+u+gamma*s] must stay positive; fails at gamma={g}"
                )
        for name, start in (("m", self.m), ("u", self.u)):
            if not _first_nonpositive_is_zero(start, self.s, self.n):
                raise DomainError(
                    f"factors [{name}+alpha*s] must be positive until they hit 0"
                )
        return self


@dataclass(frozen=True)
class Uniform:
    M: int
    q: Fraction

    def validate(self, mode: str = PROBABILITY):
        _check_nonneg("M", self.M)
        qvalue(self.q)
        return self


DistSpec = Union[
    Bernoulli, BernoulliInfinite, Geometric, NegBinomial, Poisson, Hypergeom,
    Contagious, Uniform,
]


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


@dataclass
class Pmf:
    """Outcome index -> probability, plus the value ``[k]`` of each outcome.

    ``defect`` is the probability mass not carried by the listed entries:
    truncated tails and, for defective families, the mass of infinite events.
    """

    entries: dict[int, Prob]
    values: dict[int, Fraction]
    defect: Prob = Fraction(0)

    @property
    def exact(self) -> bool:
        return not isinstance(self.defect, Interval) and not any(
            isinstance(v, Interval) for v in self.entries.values()
        )

    def total(self) -> Prob:
        if self.exact:
            return sum(self.entries.values(), Fraction(0)) + self.defect
        acc = as_interval(self.defect)
        for v in self.entries.values():
            acc = acc + v
        return acc

    def expectation(self, f: Callable[[Fraction], Fraction]) -> Prob:
        if self.exact:
            return sum(
                (f(self.values[k]) * pr for k, pr in self.entries.items()),
                Fraction(0),
            )
        acc = Interval.point(0)
        for k, pr in self.entries.items():
            acc = acc + f(self.values[k]) * as_interval(pr)
        return acc

    def __getitem__(self, k: int) -> Prob:
        return self.entries.get(k, Fraction(0))


@dataclass(frozen=True)
class MomentReport:
    mean: Fraction
    second_moment: Fraction
    variance: Fraction = field(default=None)

    def __post_init__(self):
        var = self.second_moment - self.mean**2
        if self.variance is None:
            object.__setattr__(self, "variance", var)
        elif self.variance != var:
            raise IdentityViolation(
                f"variance {self.variance} != second moment - mean^2 = {var}"
            )

    @classmethod
    def from_pmf(cls, pmf: Pmf) -> "MomentReport":
        return cls(pmf.expectation(lambda x: x), pmf.expectation(lambda x: x * x))


def _values(keys, q) -> dict[int, Fraction]:
    return {k: bracket(k, q) for k in keys}


# ---------------------------------------------------------------------------
# q-Bernoulli
# ---------------------------------------------------------------------------


def bernoulli_pmf(n: int, p, q: QLike, mode: str = PROBABILITY) -> Pmf:
    """``P(k) = [n choose k] p^k (1 - p)_q^(n-k)`` for k = 0..n.

    ``mode="identity"`` skips the probability-regime checks so the formula can
    be evaluated at q > 1 or outside [0, 1] for limit and identity work.
    """
    p, qv = rational(p), qvalue(q)
    Bernoulli(n, p, qv).validate(mode)
    entries = {
        k: q_binomial(n, k, qv) * p**k * shifted_pow(1, -p, n - k, qv)
        for k in range(n + 1)
    }
    return Pmf(entries, _values(entries, qv))


def bernoulli_pmf_poly(n: int, q: QLike) -> dict[int, PPoly]:
    """The q-Bernoulli pmf entries as polynomials in p."""
    qv = qvalue(q)
    _check_nonneg("n", n)
    return {
        k: q_binomial(n, k, qv) * X**k * shifted_pow(1, -X, n - k, qv)
        for k in range(n + 1)
    }


def _tail_sum(terms, ratio_bound, eps) -> Interval:
    return certified_series(terms, ratio_bound, eps)


def _exp0_tail(lam: Fraction, q: Fraction, start: int, eps) -> Interval:
    """Enclosure of ``sum_{k >= start} lam^k / [k]!`` for 0 < q < 1, lam >= 0."""

    def terms():
        t = lam**start / q_factorial(start, q)
        k = start
        while True:
            yield t
            t = t * lam / bracket(k + 1, q)
            k += 1

    return _tail_sum(terms(), lambda j: lam / bracket(start + j + 1, q), eps)


def bernoulli_inf_pmf(p, q: QLike, kappa_max: int, eps) -> Pmf:
    """Limit of the q-Bernoulli law as n -> infinity (needs 0 < q < 1).

    ``P(k) = (p/(1-q))^k / [k]! * (1 - p)_q^inf``; entries above ``kappa_max``
    are folded into the defect, bounded through the exponential series tail.
    """
    p, eps = rational(p), rational(eps)
    BernoulliInfinite(p, qvalue(q)).validate()
    qv = qvalue(q)
    if p == 0:
        return Pmf({0: Interval.point(1)}, {0: Fraction(0)}, Fraction(0))
    lam = p / (1 - qv)
    inner = eps / (4 * (kappa_max + 2))
    prod = shifted_pow_infinite(p, qv, inner)
    entries = {k: lam**k / q_factorial(k, qv) * prod for k in range(kappa_max + 1)}
    tail = _exp0_tail(lam, qv, kappa_max + 1, inner)
    defect = Interval(max(Fraction(0), (tail * prod).lo), (tail * prod).hi)
    return Pmf(entries, _values(entries, qv), defect)


def bernoulli_moments(n: int, p, q: QLike, infinite: bool = False) -> MomentReport:
    """Closed-form mean, second moment and variance of the q-Bernoulli law.

    With ``infinite=True`` the n -> infinity limits are returned instead
    (``n`` is ignored and 0 < q < 1 is required).
    """
    p, qv = rational(p), qvalue(q)
    if infinite:
        require_sub_unit(qv, "infinite-trial moments")
        lam = p / (1 - qv)
        return MomentReport(lam, lam + qv * lam**2, p * (1 - p) / (1 - qv))
    bn = bracket(n, qv)
    mean = bn * p
    second = bn * p + qv * p**2 * bn * bracket(n - 1, qv)
    return MomentReport(mean, second, bn * p * (1 - p))


def bernoulli_zero_tail(n: int, p, q: QLike, kappa: int, method: str = "sum") -> Fraction:
    """Probability of at most ``kappa`` zeroes in ``n`` trials.

    ``method="sum"`` adds the pmf terms; ``method="integral"`` uses the
    Jackson-integral form ``[n][n-1 choose k] int_0^p x^(n-1-k)(1 - qx)_q^k``.
    """
    p, qv = rational(p), qvalue(q)
    if not 0 <= kappa < n:
        raise DomainError(f"need 0 <= kappa < n, got kappa={kappa}, n={n}")
    if method == "sum":
        return sum(
            (
                q_binomial(n, i, qv) * p ** (n - i) * shifted_pow(1, -p, i, qv)
                for i in range(kappa + 1)
            ),
            Fraction(0),
        )
    if method == "integral":
        integrand = X ** (n - 1 - kappa) * shifted_pow(1, -qv * X, kappa, qv)
        return (
            bracket(n, qv)
            * q_binomial(n - 1, kappa, qv)
            * jackson_integral(integrand, p, qv)
        )
    if method == "ratio":
        integrand = X ** (n - 1 - kappa) * shifted_pow(1, -qv * X, kappa, qv)
        return jackson_integral(integrand, p, qv) / jackson_integral(integrand, 1, qv)
    raise ValueError(f"unknown method {method!r}")


def bernoulli_nonzero_tail(n: int, p, q: QLike, ell: int, method: str = "sum") -> Fraction:
    """Probability of at most ``ell`` non-zeroes in ``n`` trials."""
    p, qv = rational(p), qvalue(q)
    if not 0 <= ell < n:
        raise DomainError(f"need 0 <= ell < n, got ell={ell}, n={n}")
    if method == "sum":
        return sum(
            (
                q_binomial(n, i, qv) * p**i * shifted_pow(1, -p, n - i, qv)
                for i in range(ell + 1)
            ),
            Fraction(0),
        )
    if method == "integral":
        integrand = X**ell * shifted_pow(1, -qv * X, n - 1 - ell, qv)
        return 1 - bracket(n, qv) * q_binomial(n - 1, ell, qv) * jackson_integral(
            integrand, p, qv
        )
    raise ValueError(f"unknown method {method!r}")


def bernoulli_nonzero_tail_infinite(p, q: QLike, ell: int, eps, method: str = "sum") -> Interval:
    """n -> infinity version of :func:`bernoulli_nonzero_tail`, as an interval.

    ``method="integral"`` integrates ``x^ell (1 - qx)_q^inf`` termwise, using
    the series ``(1 - y)_q^inf = sum_j (-y/(1-q))^j q^(j(j-1)/2) / [j]!``.
    """
    p, eps = rational(p), rational(eps)
    qv = require_sub_unit(q, "infinite-trial tail")
    if ell < 0:
        raise DomainError(f"ell must be >= 0, got {ell}")
    lam = p / (1 - qv)
    if method == "sum":
        head = sum((lam**i / q_factorial(i, qv) for i in range(ell + 1)), Fraction(0))
        prod = shifted_pow_infinite(p, qv, eps / (4 * max(Fraction(1), head)))
        return (head * prod).outward(eps / 8)
    if method != "integral":
        raise ValueError(f"unknown method {method!r}")
    scale = 1 / ((1 - qv) * q_factorial(ell, qv) * (1 - qv) ** ell)
    c = -qv / (1 - qv)

    # term j: c^j q^(j(j-1)/2) / [j]! * p^(ell+j+1) / [ell+j+1]
    def terms():
        t = p ** (ell + 1) / bracket(ell + 1, qv)
        j = 0
        while True:
            yield t
            t = (
                t * c * qv**j / bracket(j + 1, qv) * p
                * bracket(ell + j + 1, qv) / bracket(ell + j + 2, qv)
            )
            j += 1

    def rho(j):
        return abs(c) * qv**j * abs(p) / bracket(j + 1, qv)

    integral = certified_series(terms(), rho, eps / (4 * max(Fraction(1), abs(scale))))
    return (1 - scale * integral).outward(eps / 8)


def factorial_moment(n: int, p, q: QLike, r: int) -> Fraction:
    """``E prod_{i<r} q^-i (xi - [i])`` computed from the pmf."""
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    qv = qvalue(q)
    pmf = bernoulli_pmf(n, p, qv, mode=IDENTITY)

    def f(x):
        out = Fraction(1)
        for i in range(r):
            out *= qv ** (-i) * (x - bracket(i, qv))
        return out

    return pmf.expectation(f)


def factorial_moment_closed(n: int, p, q: QLike, r: int) -> Fraction:
    p, qv = rational(p), qvalue(q)
    out = p**r
    for i in range(r):
        out *= bracket(n - i, qv)
    return out


def raw_moment(n: int, q: QLike, r: int) -> PPoly:
    """``E xi^r`` as a polynomial in p, via ``m_{r+1} = ([n] p + p(1-p) D_q) m_r``."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    qv = qvalue(q)
    bn = bracket(n, qv)
    mom = PPoly.constant(1)
    weight = X - X * X
    for _ in range(r):
        mom = bn * X * mom + weight * q_derivative(mom, qv)
    return mom


def raw_moment_direct(n: int, q: QLike, r: int) -> PPoly:
    """``sum_k [k]^r P(k)`` with P(k) kept as polynomials in p."""
    qv = qvalue(q)
    return sum(
        (bracket(k, qv) ** r * poly for k, poly in bernoulli_pmf_poly(n, qv).items()),
        PPoly(),
    )


def _central_factor(x, mean, r: int, s: int, q: Fraction, symmetric: bool):
    if symmetric:
        return sum(
            (q_binomial(r, k, q) * x**k * (-mean) ** (r - k) for k in range(r + 1)),
            PPoly() if isinstance(mean, PPoly) else Fraction(0),
        )
    out = Fraction(1)
    for i in range(r):
        out = out * (x - q ** (s + i) * mean)
    return out


def central_moment(n: int, p, q: QLike, r: int, s: int = 0, symmetric: bool = False) -> Fraction:
    """q-central moment ``E prod_{i<r} (xi - q^(s+i) <xi>)``.

    ``symmetric=True`` instead uses ``E sum_k [r choose k] xi^k (-<xi>)^(r-k)``
    and ignores ``s``.
    """
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    p, qv = rational(p), qvalue(q)
    pmf = bernoulli_pmf(n, p, qv, mode=IDENTITY)
    mean = bracket(n, qv) * p
    return pmf.expectation(lambda x: _central_factor(x, mean, r, s, qv, symmetric))


def central_moment_poly(n: int, q: QLike, r: int, s: int = 0) -> PPoly:
    """:func:`central_moment` as a polynomial in p."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    qv = qvalue(q)
    mean = bracket(n, qv) * X
    out = PPoly()
    for k, poly in bernoulli_pmf_poly(n, qv).items():
        factor = PPoly.constant(1)
        for i in range(r):
            factor = factor * (bracket(k, qv) - qv ** (s + i) * mean)
        out = out + factor * poly
    return out


# ---------------------------------------------------------------------------
# q-geometric and q-negative-binomial
# ---------------------------------------------------------------------------


def _negbin_entry(j: int, r: int, p: Fraction, q: Fraction) -> Fraction:
    return shifted_pow(1, -p, j - r, q) * q ** (j - r) * p**r * q_binomial(j - 1, r - 1, q)


def _negbin_tail(J: int, r: int, p: Fraction, q: Fraction, eps) -> Interval:
    """Enclosure of ``sum_{j > J}`` of the q-negative-binomial entries."""

    def terms():
        j = J + 1
        while True:
            yield _negbin_entry(j, r, p, q)
            j += 1

    # entry ratio (1 - q^(j-r) p) q [j] / [j-r+1] is bounded by q [j] / [j-r+1],
    # which decreases in j for 0 < q < 1
    def rho(k):
        j = J + 1 + k
        return q * bracket(j, q) / bracket(j - r + 1, q)

    return certified_series(terms(), rho, eps)


def geometric_pmf(p, q: QLike, j_max: int, rescaled: bool = False, eps=Fraction(1, 10**15)) -> Pmf:
    """q-geometric waiting time ``P(j) = (1 - p)_q^(j-1) q^(j-1) p``, j >= 1.

    Unrescaled, the law is defective: the all-zero infinite event keeps mass
    ``(1 - p)_q^inf`` and that mass is part of ``defect``.  With
    ``rescaled=True`` every entry is divided by ``1 - (1 - p)_q^inf``.
    """
    p, eps = rational(p), rational(eps)
    spec = Geometric(p, qvalue(q), rescaled).validate()
    qv = spec.q
    if j_max < 1:
        raise DomainError(f"j_max must be >= 1, got {j_max}")
    entries: dict[int, Prob] = {j: _negbin_entry(j, 1, p, qv) for j in range(1, j_max + 1)}
    tail = _negbin_tail(j_max, 1, p, qv, eps / 4)
    zero_inf = shifted_pow_infinite(p, qv, eps / 4)
    if not rescaled:
        defect = tail + zero_inf
    else:
        norm = (1 - zero_inf).reciprocal()
        entries = {j: v * norm for j, v in entries.items()}
        defect = tail * norm
    defect = Interval(max(Fraction(0), defect.lo), defect.hi)
    return Pmf(entries, _values(entries, qv), defect)


def negbinomial_pmf(r: int, p, q: QLike, j_max: int, eps=Fraction(1, 10**15)) -> Pmf:
    """Trial index of the r-th non-zero: ``(1-p)_q^(j-r) q^(j-r) p^r [j-1 choose r-1]``.

    The defect collects the truncated tail and the mass of seeing fewer than
    ``r`` non-zeroes in infinitely many trials.
    """
    p, eps = rational(p), rational(eps)
    spec = NegBinomial(r, p, qvalue(q)).validate()
    qv = spec.q
    if j_max < r:
        raise DomainError(f"j_max={j_max} must be >= r={r}")
    entries: dict[int, Prob] = {
        j: _negbin_entry(j, r, p, qv) for j in range(r, j_max + 1)
    }
    tail = _negbin_tail(j_max, r, p, qv, eps / 4)
    lam = p / (1 - qv)
    zero_inf = shifted_pow_infinite(p, qv, eps / (4 * (r + 1) ** 2))
    few = sum((lam**ell / q_factorial(ell, qv) for ell in range(r)), Fraction(0))
    defect = tail + few * zero_inf
    defect = Interval(max(Fraction(0), defect.lo), defect.hi)
    return Pmf(entries, _values(entries, qv), defect)


def parties_probabilities(a: int, b: int, p, q: QLike, method: str = "waiting") -> tuple[Fraction, Fraction]:
    """Division of stakes: P1 = P(a non-zeroes before b zeroes), P2 = P(b zeroes first).

    ``method="count"`` computes P1 instead as the chance of at least ``a``
    non-zeroes among ``a+b-1`` trials.
    """
    if a < 1 or b < 1:
        raise DomainError(f"a and b must be >= 1, got a={a}, b={b}")
    p, qv = rational(p), qvalue(q)
    if method == "waiting":
        p1 = p**a * sum(
            (
                q_binomial(a + ell - 1, a - 1, qv) * shifted_pow(1, -p, ell, qv) * qv**ell
                for ell in range(b)
            ),
            Fraction(0),
        )
    elif method == "count":
        p1 = sum(
            (
                q_binomial(a + b - 1, a + s, qv) * p ** (a + s)
                * shifted_pow(1, -p, b - 1 - s, qv)
                for s in range(b)
            ),
            Fraction(0),
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    p2 = shifted_pow(1, -p, b, qv) * sum(
        (q_binomial(b + ell - 1, b - 1, qv) * p**ell for ell in range(a)), Fraction(0)
    )
    return p1, p2


# ---------------------------------------------------------------------------
# q-Poisson
# ---------------------------------------------------------------------------


def _superunit_poisson_terms(lam: Fraction, q: Fraction, shift: Fraction = Fraction(1)):
    # k-th term: q^-(k(k-1)/2) lam^k (1 - shift*lam)_q^-k / [k]!
    t = Fraction(1)
    k = 0
    while True:
        yield t
        t = t * q ** (-k) * lam / bracket(k + 1, q) / (1 - q ** (-(k + 1)) * shift * lam)
        k += 1


def _superunit_poisson_rho(lam: Fraction, q: Fraction, shift: Fraction = Fraction(1)):
    def rho(k):
        den = 1 - q ** (-(k + 1)) * shift * lam
        return q ** (-k) * abs(lam) / (bracket(k + 1, q) * min(Fraction(1), den))

    return rho


def _superunit_reciprocal(lam, q: QLike, eps, shifted: bool) -> Interval:
    lam, eps = rational(lam), rational(eps)
    qv = qvalue(q)
    if qv <= 1:
        raise DomainError(f"needs q > 1 (SuperUnit regime), got q={qv}")
    shift = qv - 1 if shifted else Fraction(1)
    if shift * lam >= qv:
        raise DomainError(f"needs {shift}*lambda < q, got lambda={lam}, q={qv}")
    series = certified_series(
        _superunit_poisson_terms(lam, qv, shift), _superunit_poisson_rho(lam, qv, shift), eps / 4
    )
    return series.reciprocal().outward(eps / 8)


def superunit_poisson_constant(lam, q: QLike, eps) -> Interval:
    """Normalizer ``C`` of the q > 1 Poisson law.

    ``C`` is the reciprocal of ``sum_k q^-(k(k-1)/2) lam^k (1 - lam)_q^-k / [k]!``.
    It coincides with ``lim_n (1 - lam/[n])_q^n`` only at q = 2; see
    :func:`superunit_limit_product` for the limit itself.
    """
    return _superunit_reciprocal(lam, q, eps, shifted=False)


def superunit_limit_product(lam, q: QLike, eps) -> Interval:
    """Enclosure of ``lim_n (1 - lam/[n])_q^n`` for q > 1.

    Since ``q^(n-k) lam/[n] -> (q-1) lam q^-k``, the limit is the reciprocal
    of ``sum_k q^-(k(k-1)/2) lam^k (1 - (q-1) lam)_q^-k / [k]!``.
    """
    return _superunit_reciprocal(lam, q, eps, shifted=True)


def poisson_pmf(lam, q: QLike, kappa_max: int, eps) -> Pmf:
    """q-Poisson pmf in either regime, entries as certified intervals.

    0 < q < 1: ``lam^k / [k]! * (1 - lam(1-q))_q^inf``.
    q > 1: ``q^-(k(k-1)/2) lam^k (1 - lam)_q^-k / [k]! * C`` with ``C`` from
    :func:`superunit_poisson_constant`.
    """
    lam, eps = rational(lam), rational(eps)
    spec = Poisson(lam, qvalue(q)).validate()
    qv = spec.q
    if lam == 0:
        return Pmf({0: Interval.point(1)}, {0: Fraction(0)}, Fraction(0))
    inner = eps / (4 * (kappa_max + 2))
    if qv < 1:
        prod = shifted_pow_infinite(lam * (1 - qv), qv, inner)
        coeffs = [lam**k / q_factorial(k, qv) for k in range(kappa_max + 1)]
        entries = {k: c * prod for k, c in enumerate(coeffs)}
        tail = _exp0_tail(lam, qv, kappa_max + 1, inner)
        defect = tail * prod
    else:
        gen = _superunit_poisson_terms(lam, qv)
        coeffs = [next(gen) for _ in range(kappa_max + 1)]
        # the series sum is head + tail; C is its reciprocal
        rho = _superunit_poisson_rho(lam, qv)
        tail = certified_series(gen, lambda j: rho(kappa_max + 1 + j), inner)
        series = sum(coeffs, Fraction(0)) + tail
        const = series.reciprocal()
        entries = {k: c * const for k, c in enumerate(coeffs)}
        defect = tail * const
    defect = Interval(max(Fraction(0), defect.lo), defect.hi)
    return Pmf(entries, _values(entries, qv), defect)


def poisson_moments(lam, q: QLike) -> MomentReport:
    lam = rational(lam)
    qv = require_sub_unit(q, "q-Poisson moments")
    if lam * (1 - qv) > 1:
        raise DomainError(f"q-Poisson moments need lambda(1-q) <= 1, got {lam * (1 - qv)}")
    var = lam * (1 - (1 - qv) * lam)
    return MomentReport(lam, var + lam**2, var)


def bernoulli_pgf(n: int, p, q: QLike, z, method: str = "pmf") -> Fraction:
    """``sum_k z^k P(k)``; ``method="closed"`` uses ``sum [n k] p^k (z - 1)_q^k``."""
    p, qv, z = rational(p), qvalue(q), rational(z)
    if method == "pmf":
        pmf = bernoulli_pmf(n, p, qv, mode=IDENTITY)
        return sum((z**k * v for k, v in pmf.entries.items()), Fraction(0))
    if method == "closed":
        return sum(
            (q_binomial(n, k, qv) * p**k * shifted_pow(z, -1, k, qv) for k in range(n + 1)),
            Fraction(0),
        )
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# q-hypergeometric and q-contagious
# ---------------------------------------------------------------------------


def hypergeom_pmf(m: int, u: int, n: int, q: QLike) -> Pmf:
    """``[m k][u n-k] q^((m-k)(n-k)) / [m+u n]``."""
    qv = qvalue(q)
    Hypergeom(m, u, n, qv).validate()
    den = q_binomial(m + u, n, qv)
    entries = {
        k: q_binomial(m, k, qv) * q_binomial(u, n - k, qv) * qv ** ((m - k) * (n - k)) / den
        for k in range(n + 1)
    }
    return Pmf(entries, _values(entries, qv))


def hypergeom_dual(m: int, u: int, n: int, q: QLike, kappa: int) -> Fraction:
    """Base-1/q hypergeometric probability at ``kappa``.

    The value is cross-checked against the base-q law with the two colours
    swapped at ``n - kappa``; a mismatch raises :class:`IdentityViolation`.
    """
    qv = qvalue(q)
    value = hypergeom_pmf(m, u, n, 1 / qv)[kappa]
    mirror = hypergeom_pmf(u, m, n, qv)[n - kappa]
    if value != mirror:
        raise IdentityViolation(
            f"colour-swap symmetry failed at m={m}, u={u}, n={n}, k={kappa}: "
            f"{value} != {mirror}"
        )
    return value


def contagious_weight(m: int, u: int, s: int, n: int, k: int, q: Fraction) -> Fraction:
    """Numerator of the q-contagious law at ``k`` (before dividing by the urn sizes)."""
    w = q_binomial(n, k, q ** (-s)) * q ** ((m + s * k) * (n - k))
    for a in range(k):
        w *= bracket(m + a * s, q)
    for b in range(n - k):
        w *= bracket(u + b * s, q)
    return w


def contagious_denominator(m: int, u: int, s: int, n: int, q: Fraction) -> Fraction:
    den = Fraction(1)
    for g in range(n):
        den *= bracket(m + u + g * s, q)
    return den


def contagious_pmf(m: int, u: int, s: int, n: int, q: QLike) -> Pmf:
    """Polya-type urn: each drawn ball goes back together with ``s`` copies."""
    qv = qvalue(q)
    Contagious(m, u, s, n, qv).validate()
    den = contagious_denominator(m, u, s, n, qv)
    entries = {k: contagious_weight(m, u, s, n, k, qv) / den for k in range(n + 1)}
    return Pmf(entries, _values(entries, qv))


def classical_contagious_pmf(m: int, u: int, s: int, n: int) -> dict[int, Fraction]:
    den = Fraction(1)
    for g in range(n):
        den *= m + u + g * s
    out = {}
    for k in range(n + 1):
        w = Fraction(binom(n, k))
        for a in range(k):
            w *= m + a * s
        for b in range(n - k):
            w *= u + b * s
        out[k] = w / den
    return out


# ---------------------------------------------------------------------------
# q-uniform and the range statistic
# ---------------------------------------------------------------------------


def uniform_pmf(M: int, q: QLike) -> Pmf:
    """``P(i) = q^i / [M+1]`` on values ``[i]``, i = 0..M."""
    qv = qvalue(q)
    Uniform(M, qv).validate()
    norm = bracket(M + 1, qv)
    entries = {i: qv**i / norm for i in range(M + 1)}
    return Pmf(entries, _values(entries, qv))


def uniform_moments(M: int, q: QLike) -> MomentReport:
    """Closed-form moments of the q-uniform law on values ``[i]``.

    The second moment is ``q[M](q[2][M] + 1) / ([2][3])``; see
    :func:`uniform_second_moment_printed` for the variant carrying an extra
    ``[M+1]`` factor, which disagrees with the pmf.
    """
    qv = qvalue(q)
    Uniform(M, qv).validate()
    bM, b2, b3 = bracket(M, qv), bracket(2, qv), bracket(3, qv)
    mean = qv * bM / b2
    second = qv * bM * (qv * b2 * bM + 1) / (b2 * b3)
    var = qv * bM * (qv**2 * bM + b2) / (b2**2 * b3)
    return MomentReport(mean, second, var)


def uniform_second_moment_printed(M: int, q: QLike) -> Fraction:
    """``q[M][M+1](q[2][M] + 1) / ([2][3])``, off by the factor ``[M+1]``."""
    qv = qvalue(q)
    bM, b2, b3 = bracket(M, qv), bracket(2, qv), bracket(3, qv)
    return qv * bM * bracket(M + 1, qv) * (qv * b2 * bM + 1) / (b2 * b3)


def range_pmf(M: int, n: int, q: QLike) -> Pmf:
    """Law of max - min over n independent q-uniform draws on {0..M}.

    Outcomes are the integer ranges ``l``; ``values`` carries ``l`` itself.
    """
    qv = qvalue(q)
    if M < 0 or n < 1:
        raise DomainError(f"range law needs M >= 0 and n >= 1, got M={M}, n={n}")
    qn = qv**n
    den = bracket(M + 1, qv) ** n
    entries = {0: bracket(M + 1, qn) / den}
    for ell in range(1, M + 1):
        entries[ell] = (
            bracket(M + 1 - ell, qn) / den
            * (
                bracket(ell + 1, qv) ** n
                - bracket(2, qn) * bracket(ell, qv) ** n
                + qn * bracket(ell - 1, qv) ** n
            )
        )
    return Pmf(entries, {ell: Fraction(ell) for ell in entries})


def range_pmf_alt_n2(M: int, q: QLike) -> Pmf:
    """A second q-deformation of the n = 2 range law."""
    qv = qvalue(q)
    if M < 0:
        raise DomainError(f"M must be >= 0, got {M}")
    bM1 = bracket(M + 1, qv)
    entries = {0: 1 / bM1}
    for ell in range(1, M + 1):
        entries[ell] = bracket(2, qv) / bM1 * (1 - bracket(ell, qv) / bM1) * qv ** (M + 1 - 2 * ell)
    return Pmf(entries, {ell: Fraction(ell) for ell in entries})


def classical_range_pmf(M: int, n: int) -> dict[int, Fraction]:
    out = {0: Fraction(1, (M + 1) ** (n - 1))}
    for ell in range(1, M + 1):
        out[ell] = Fraction(
            ((ell + 1) ** n - 2 * ell**n + (ell - 1) ** n) * (M + 1 - ell), (M + 1) ** n
        )
    return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def pmf_of(spec: DistSpec, kappa_max: int = 20, eps=Fraction(1, 10**12)) -> Pmf:
    """Evaluate the pmf described by ``spec``; truncation args apply to infinite laws."""
    if isinstance(spec, Bernoulli):
        return bernoulli_pmf(spec.n, spec.p, spec.q)
    if isinstance(spec, BernoulliInfinite):
        return bernoulli_inf_pmf(spec.p, spec.q, kappa_max, eps)
    if isinstance(spec, Geometric):
        return geometric_pmf(spec.p, spec.q, kappa_max, spec.rescaled, eps)
    if isinstance(spec, NegBinomial):
        return negbinomial_pmf(spec.r, spec.p, spec.q, max(kappa_max, spec.r), eps)
    if isinstance(spec, Poisson):
        return poisson_pmf(spec.lam, spec.q, kappa_max, eps)
    if isinstance(spec, Hypergeom):
        return hypergeom_pmf(spec.m, spec.u, spec.n, spec.q)
    if isinstance(spec, Contagious):
        return contagious_pmf(spec.m, spec.u, spec.s, spec.n, spec.q)
    if isinstance(spec, Uniform):
        return uniform_pmf(spec.M, spec.q)
    raise TypeError(f"unknown distribution spec {spec!r}")
