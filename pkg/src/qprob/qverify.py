"""Executable catalog of q-identities and limit statements.

Each catalog entry pairs a binding generator (driven by a :class:`GridSpec`)
with an evaluator returning both sides of the identity.  Exact entries demand
structural equality of Fractions or polynomials; interval entries demand that
the certified enclosures overlap and are no wider than the tolerance; limit
entries demand a strictly decreasing distance along a parameter sequence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Optional, Sequence

from .errors import DomainError
from .qdist import (
    IDENTITY,
    Contagious,
    bernoulli_inf_pmf,
    bernoulli_nonzero_tail,
    bernoulli_nonzero_tail_infinite,
    bernoulli_pmf,
    bernoulli_zero_tail,
    central_moment_poly,
    contagious_denominator,
    contagious_pmf,
    contagious_weight,
    factorial_moment,
    factorial_moment_closed,
    hypergeom_pmf,
    parties_probabilities,
    range_pmf,
    range_pmf_alt_n2,
    raw_moment,
    raw_moment_direct,
    superunit_limit_product,
    superunit_poisson_constant,
    uniform_pmf,
)
from .qnum import (
    X,
    Interval,
    PPoly,
    as_interval,
    bracket,
    certified_series,
    euler_coefficients,
    euler_operator_coefficients,
    q_binomial,
    q_derivative,
    q_exponential,
    q_factorial,
    rational,
    shifted_pow,
    shifted_pow_infinite,
)
from .qprocess import enumerate_patterns

EXACT = "exact"
INTERVAL = "interval"
MONOTONE = "monotone"

PASS = "pass"
FAIL = "fail"

F = Fraction


class UnknownIdentity(KeyError):
    pass


# ---------------------------------------------------------------------------
# grids and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Parameter ranges for catalog bindings.

    ``qs`` are the probability-regime bases (q <= 1), ``super_qs`` the extra
    bases used by identities that also hold for q > 1.
    """

    qs: tuple[Fraction, ...] = (F(1, 4), F(1, 2), F(3, 4), F(1))
    super_qs: tuple[Fraction, ...] = (F(2), F(3))
    ps: tuple[Fraction, ...] = (F(1, 5), F(1, 2), F(4, 5))
    vs: tuple[Fraction, ...] = (F(1, 5), F(1, 2), F(4, 5))
    max_int: int = 8

    def __post_init__(self):
        for name in ("qs", "super_qs", "ps", "vs"):
            vals = tuple(rational(v) for v in getattr(self, name))
            object.__setattr__(self, name, vals)
        if any(q <= 0 for q in self.qs + self.super_qs):
            raise DomainError("grid bases must be positive")
        if any(q > 1 for q in self.qs):
            raise DomainError("qs holds bases q <= 1; put larger ones in super_qs")
        if any(q <= 1 for q in self.super_qs):
            raise DomainError("super_qs must all exceed 1")
        if self.max_int < 0:
            raise DomainError("max_int must be >= 0")

    @property
    def all_qs(self) -> tuple[Fraction, ...]:
        return self.qs + self.super_qs

    @property
    def sub_qs(self) -> tuple[Fraction, ...]:
        return tuple(q for q in self.qs if q < 1)

    def ints(self, cap: Optional[int] = None, start: int = 0) -> range:
        top = self.max_int if cap is None else min(cap, self.max_int)
        return range(start, top + 1)

    def with_overrides(self, overrides: dict[str, Any]) -> "GridSpec":
        """Replace fields from ``{"q": "1/2,2", "max_int": "5", ...}``.

        Listing a base above 1 under ``q`` moves it to ``super_qs``.
        """
        changes: dict[str, Any] = {}
        for key, raw in overrides.items():
            vals = raw.split(",") if isinstance(raw, str) else list(raw)
            if key in ("max_int", "n", "int"):
                changes["max_int"] = int(vals[0])
            elif key in ("q", "qs"):
                qs = [rational(v) for v in vals]
                changes["qs"] = tuple(q for q in qs if q <= 1)
                changes["super_qs"] = tuple(q for q in qs if q > 1)
            elif key in ("p", "ps"):
                changes["ps"] = tuple(rational(v) for v in vals)
            elif key in ("v", "vs"):
                changes["vs"] = tuple(rational(v) for v in vals)
            else:
                raise DomainError(f"unknown grid key {key!r}")
        return replace(self, **changes)


def default_grid() -> GridSpec:
    return GridSpec()


@dataclass(frozen=True)
class LimitTable:
    name: str
    params: dict
    points: tuple[int, ...]
    distances: tuple[Interval, ...]

    @property
    def strictly_decreasing(self) -> bool:
        return all(b.hi < a.lo for a, b in zip(self.distances, self.distances[1:]))


@dataclass(frozen=True)
class Counterexample:
    binding: dict
    lhs: Any
    rhs: Any
    reason: str


@dataclass
class IdentityCheck:
    id: str
    statement: str
    mode: str
    tolerance: Optional[Fraction]
    grid: list[dict] = field(default_factory=list)
    outcome: str = PASS
    counterexample: Optional[Counterexample] = None
    failures: int = 0
    excluded: list[tuple[dict, str]] = field(default_factory=list)
    max_width: Optional[Fraction] = None
    tables: list[LimitTable] = field(default_factory=list)
    watchlist: bool = False

    def __post_init__(self):
        if self.mode == EXACT and self.tolerance is not None:
            raise ValueError("exact checks take no tolerance")

    @property
    def passed(self) -> bool:
        return self.outcome == PASS


@dataclass(frozen=True)
class Entry:
    id: str
    statement: str
    mode: str
    bindings: Callable[[GridSpec], Iterable[dict]]
    evaluate: Callable[..., Any]
    tolerance: Optional[Fraction] = None
    guard: Optional[Callable[[dict], Optional[str]]] = None
    watchlist: bool = False


CATALOG: dict[str, Entry] = {}


def _entry(id, statement, mode=EXACT, tolerance=None, guard=None, watchlist=False):
    def register(factory):
        bindings, evaluate = factory()
        CATALOG[id] = Entry(
            id, statement, mode, bindings, evaluate,
            None if tolerance is None else rational(tolerance), guard, watchlist,
        )
        return factory

    return register


def _product(**ranges) -> Iterator[dict]:
    keys = list(ranges)
    for combo in itertools.product(*(ranges[k] for k in keys)):
        yield dict(zip(keys, combo))


# ---------------------------------------------------------------------------
# small helpers shared by several entries
# ---------------------------------------------------------------------------


def _sum(values) -> Fraction:
    return sum(values, Fraction(0))


def _runs_weight(runs, q, coeff) -> Fraction:
    return q ** sum(coeff(i) * a for i, a in enumerate(runs))


def _geometric_tail_series(p, q, eps, r: int = 1) -> Interval:
    """``sum_s (1 - p)_q^s q^s [r-1+s choose s]`` for 0 < q < 1."""

    def terms():
        t, s = Fraction(1), 0
        while True:
            yield t
            t = t * (1 - q**s * p) * q * bracket(r + s, q) / bracket(s + 1, q)
            s += 1

    return certified_series(terms(), lambda k: q * bracket(r + k, q) / bracket(k + 1, q), eps)


def _apply_xd(f: PPoly, q) -> PPoly:
    return X * q_derivative(f, q)


def _range_brute_force(M: int, n: int, q) -> dict[int, Fraction]:
    top = bracket(M + 1, q)
    out: dict[int, Fraction] = {}
    for tup in itertools.product(range(M + 1), repeat=n):
        w = q ** sum(tup) / top**n
        ell = max(tup) - min(tup)
        out[ell] = out.get(ell, Fraction(0)) + w
    return {ell: out.get(ell, Fraction(0)) for ell in range(M + 1)}


# ---------------------------------------------------------------------------
# catalog: binomial section
# ---------------------------------------------------------------------------


@_entry("I2_7", "sum_k [n k] p^k (1-p)_q^(n-k) = 1")
def _i2_7():
    def bindings(g):
        return _product(q=g.all_qs, p=g.ps, n=g.ints())

    def evaluate(q, p, n):
        return _sum(bernoulli_pmf(n, p, q, mode=IDENTITY).entries.values()), Fraction(1)

    return bindings, evaluate


@_entry("I2_8", "sum_k [n k] p^k (1-v)_q^(n-k) = sum_k [n k] (p-v)_q^(n-k)")
def _i2_8():
    def bindings(g):
        return _product(q=g.all_qs, p=g.ps, v=g.vs, n=g.ints())

    def evaluate(q, p, v, n):
        lhs = _sum(q_binomial(n, k, q) * p**k * shifted_pow(1, -v, n - k, q) for k in range(n + 1))
        rhs = _sum(q_binomial(n, k, q) * shifted_pow(p, -v, n - k, q) for k in range(n + 1))
        return lhs, rhs

    return bindings, evaluate


@_entry("I2_10", "sum_k [n k] a^k (b+v)_q^(n-k) = sum_k [n k] b^k (a+v)_q^(n-k)")
def _i2_10():
    def bindings(g):
        return _product(
            q=g.all_qs, a=g.ps, b=(F(1, 3), F(2)), v=g.vs + (F(-1, 2),), n=g.ints(6)
        )

    def evaluate(q, a, b, v, n):
        lhs = _sum(q_binomial(n, k, q) * a**k * shifted_pow(b, v, n - k, q) for k in range(n + 1))
        rhs = _sum(q_binomial(n, k, q) * b**k * shifted_pow(a, v, n - k, q) for k in range(n + 1))
        return lhs, rhs

    return bindings, evaluate


@_entry("I2_11", "(x+y)_q^m = sum_j [m j] q^(j(j-1)/2) x^(m-j) y^j")
def _i2_11():
    def bindings(g):
        return _product(q=g.all_qs, x=g.ps, y=(F(-4, 5), F(-1, 5), F(1, 2)), m=g.ints())

    def evaluate(q, x, y, m):
        rhs = _sum(c * x ** (m - j) * y**j for j, c in enumerate(euler_coefficients(m, q)))
        return shifted_pow(x, y, m, q), rhs

    return bindings, evaluate


@_entry("I2_13", "(x D_q)^m f = sum_k c_k x^k D_q^k f on polynomials of degree <= m+3")
def _i2_13():
    def bindings(g):
        return _product(q=g.all_qs, m=g.ints(5, start=1))

    def evaluate(q, m):
        f = PPoly(range(1, m + 5))
        lhs = f
        for _ in range(m):
            lhs = _apply_xd(lhs, q)
        rhs = PPoly()
        deriv = f
        for k, c in enumerate(euler_operator_coefficients(m, q), start=1):
            deriv = q_derivative(deriv, q)
            rhs = rhs + c * X**k * deriv
        return lhs, rhs

    return bindings, evaluate


@_entry("I2_32", "sum over run patterns of prod_{i<k} q^(a(0)+...+a(i)) = [n k]")
def _i2_32():
    def bindings(g):
        for q in g.all_qs:
            for n in g.ints():
                for k in range(n + 1):
                    yield {"q": q, "n": n, "k": k}

    def evaluate(q, n, k):
        lhs = _sum(q ** sum(pat.partial_sums()[:k]) for pat in enumerate_patterns(n, k))
        return lhs, q_binomial(n, k, q)

    return bindings, evaluate


@_entry("I2_35", "sum_{|a|=N} q^(-sum_s s a(s)) = q^(-N k) [N+k k]")
def _i2_35():
    def bindings(g):
        return _product(q=g.all_qs, N=g.ints(7), k=g.ints(7))

    def evaluate(q, N, k):
        lhs = _sum(
            _runs_weight(pat.runs, q, lambda s: -s) for pat in enumerate_patterns(N + k, k)
        )
        return lhs, q ** (-N * k) * q_binomial(N + k, k, q)

    return bindings, evaluate


@_entry("I2_39", "[n+k k] + q^(n+1) [n+k k-1] = [n+1+k k]")
def _i2_39():
    def bindings(g):
        for q in g.all_qs:
            for total in range(13):
                for k in range(total + 1):
                    yield {"q": q, "n": total - k, "k": k}

    def evaluate(q, n, k):
        lhs = q_binomial(n + k, k, q) + q ** (n + 1) * q_binomial(n + k, k - 1, q)
        return lhs, q_binomial(n + 1 + k, k, q)

    return bindings, evaluate


@_entry(
    "I2_41",
    "P(at most k zeroes in n) = [n][n-1 k] int_0^p x^(n-1-k)(1-qx)_q^k d_qx"
    " = ratio of the integrals over [0,p] and [0,1]",
)
def _i2_41():
    def bindings(g):
        for q, p, n in itertools.product(g.all_qs, g.ps, g.ints(start=1)):
            for k in range(n):
                for form in ("integral", "ratio"):
                    yield {"q": q, "p": p, "n": n, "k": k, "form": form}

    def evaluate(q, p, n, k, form):
        return bernoulli_zero_tail(n, p, q, k), bernoulli_zero_tail(n, p, q, k, method=form)

    return bindings, evaluate


@_entry(
    "I2_42",
    "P(at most l non-zeroes in n) = 1 - [n][n-1 l] int_0^p x^l (1-qx)_q^(n-1-l) d_qx",
)
def _i2_42():
    def bindings(g):
        for q, p, n in itertools.product(g.all_qs, g.ps, g.ints(start=1)):
            for ell in range(n):
                yield {"q": q, "p": p, "n": n, "l": ell}

    def evaluate(q, p, n, l):
        return (
            bernoulli_nonzero_tail(n, p, q, l),
            bernoulli_nonzero_tail(n, p, q, l, method="integral"),
        )

    return bindings, evaluate


@_entry("I2_43", "D_q (1-p)_q^n = -[n] (1-qp)_q^(n-1), as polynomials in p")
def _i2_43():
    def bindings(g):
        return _product(q=g.all_qs, n=g.ints(start=1))

    def evaluate(q, n):
        lhs = q_derivative(shifted_pow(1, -X, n, q), q)
        rhs = -bracket(n, q) * shifted_pow(1, -q * X, n - 1, q)
        return lhs, rhs

    return bindings, evaluate


@_entry(
    "I2_44",
    "sum_{i<=l} (p/(1-q))^i/[i]! (1-p)_q^inf"
    " = 1 - 1/(1-q) int_0^p (x/(1-q))^l/[l]! (1-qx)_q^inf d_qx",
    mode=INTERVAL,
    tolerance=Fraction(1, 10**9),
    watchlist=True,
)
def _i2_44():
    def bindings(g):
        return _product(q=g.sub_qs, p=g.ps, l=range(5))

    def evaluate(q, p, l, eps):
        return (
            bernoulli_nonzero_tail_infinite(p, q, l, eps),
            bernoulli_nonzero_tail_infinite(p, q, l, eps, method="integral"),
        )

    return bindings, evaluate


@_entry("I2_46", "E prod_{i<r} q^-i (xi - [i]) = p^r prod_{i<r} [n-i]")
def _i2_46():
    def bindings(g):
        for q, p, n in itertools.product(g.all_qs, g.ps, g.ints()):
            for r in range(1, n + 2):
                yield {"q": q, "p": p, "n": n, "r": r}

    def evaluate(q, p, n, r):
        return factorial_moment(n, p, q, r), factorial_moment_closed(n, p, q, r)

    return bindings, evaluate


@_entry("I2_51", "m'_(r+1) = ([n] p + p(1-p) D_q) m'_r reproduces sum_k [k]^r P(k)")
def _i2_51():
    def bindings(g):
        return _product(q=g.all_qs, n=g.ints(6), r=range(5))

    def evaluate(q, n, r):
        return raw_moment(n, q, r), raw_moment_direct(n, q, r)

    return bindings, evaluate


def _central_recursion(q, n, r, s, inner_s, power):
    # mu_(r+1)(s) = p(1-p)(q^power [n][r] mu_(r-1)(inner_s; pq) + D_q mu_r(inner_s))
    lhs = central_moment_poly(n, q, r + 1, s)
    shifted = central_moment_poly(n, q, r - 1, inner_s).scale_arg(q)
    rhs = (X - X * X) * (
        q**power * bracket(n, q) * bracket(r, q) * shifted
        + q_derivative(central_moment_poly(n, q, r, inner_s), q)
    )
    return lhs, rhs


@_entry(
    "I2_57",
    "mu_(r+1)(0;p) = p(1-p)(q[n][r] mu_(r-1)(1;pq) + D_q mu_r(1;p))",
)
def _i2_57():
    def bindings(g):
        return _product(q=g.all_qs, n=g.ints(5), r=range(1, 4))

    def evaluate(q, n, r):
        return _central_recursion(q, n, r, 0, 1, 1)

    return bindings, evaluate


@_entry(
    "I2_58",
    "mu_(r+1)(-r;p) = p(1-p)(q^-r [n][r] mu_(r-1)(-r;pq) + D_q mu_r(-r;p))",
)
def _i2_58():
    def bindings(g):
        return _product(q=g.all_qs, n=g.ints(5), r=range(1, 4))

    def evaluate(q, n, r):
        return _central_recursion(q, n, r, -r, -r, -r)

    return bindings, evaluate


# ---------------------------------------------------------------------------
# catalog: geometric section
# ---------------------------------------------------------------------------


@_entry(
    "I3_3",
    "sum_{j>=1} p (1-p)_q^(j-1) q^(j-1) = 1 - (1-p)_q^inf",
    mode=INTERVAL,
    tolerance=Fraction(1, 10**12),
)
def _i3_3():
    def bindings(g):
        return _product(q=g.sub_qs, p=g.ps)

    def evaluate(q, p, eps):
        lhs = p * _geometric_tail_series(p, q, eps / (2 * p))
        return lhs.outward(eps / 8), 1 - shifted_pow_infinite(p, q, eps)

    return bindings, evaluate


@_entry(
    "I3_4",
    "sum_{s>=0} (1-p)_q^s q^s = (1 - (1-p)_q^inf) / p",
    mode=INTERVAL,
    tolerance=Fraction(1, 10**12),
)
def _i3_4():
    def bindings(g):
        return _product(q=g.sub_qs, p=g.ps)

    def evaluate(q, p, eps):
        rhs = (1 - shifted_pow_infinite(p, q, eps * p / 2)) / p
        return _geometric_tail_series(p, q, eps), rhs.outward(eps / 8)

    return bindings, evaluate


@_entry("I3_5", "sum_{s<=N} (1-x)_q^s q^s = (1 - (1-x)_q^(N+1)) / x")
def _i3_5():
    def bindings(g):
        return _product(q=g.all_qs, x=g.ps, N=g.ints())

    def evaluate(q, x, N):
        lhs = _sum(shifted_pow(1, -x, s, q) * q**s for s in range(N + 1))
        return lhs, (1 - shifted_pow(1, -x, N + 1, q)) / x

    return bindings, evaluate


@_entry(
    "I3_9",
    "sum_s (1-p)_q^s q^s [r-1+s s] = p^-r (1 - (1-p)_q^inf sum_{l<r} (p/(1-q))^l/[l]!)",
    mode=INTERVAL,
    tolerance=Fraction(1, 10**12),
)
def _i3_9():
    def bindings(g):
        return _product(q=g.sub_qs, p=g.ps, r=range(1, 5))

    def evaluate(q, p, r, eps):
        lam = p / (1 - q)
        few = _sum(lam**ell / q_factorial(ell, q) for ell in range(r))
        prod = shifted_pow_infinite(p, q, eps * p**r / (2 * few))
        rhs = (1 - prod * few) / p**r
        return _geometric_tail_series(p, q, eps, r), rhs.outward(eps / 8)

    return bindings, evaluate


@_entry(
    "I3_16",
    "p^a sum_{l<b} [a+l-1 a-1] (1-p)_q^l q^l + (1-p)_q^b sum_{l<a} [b+l-1 b-1] p^l = 1",
)
def _i3_16():
    def bindings(g):
        return _product(q=g.all_qs, p=g.ps, a=g.ints(6, start=1), b=g.ints(6, start=1))

    def evaluate(q, p, a, b):
        p1, p2 = parties_probabilities(a, b, p, q)
        return p1 + p2, Fraction(1)

    return bindings, evaluate


@_entry(
    "I3_18",
    "p^a sum_{l<b} [a+l-1 l] (1-p)_q^l q^l = sum_{s<b} [a+b-1 a+s] p^(a+s) (1-p)_q^(b-1-s)",
)
def _i3_18():
    def bindings(g):
        return _product(q=g.all_qs, p=g.ps, a=g.ints(6, start=1), b=g.ints(6, start=1))

    def evaluate(q, p, a, b):
        return (
            parties_probabilities(a, b, p, q)[0],
            parties_probabilities(a, b, p, q, method="count")[0],
        )

    return bindings, evaluate


# ---------------------------------------------------------------------------
# catalog: Poisson section
# ---------------------------------------------------------------------------

_LAMBDAS = (F(1, 5), F(1, 2), F(4, 5), F(1), F(2))


def _e0_guard(b) -> Optional[str]:
    if b["lam"] * (1 - b["q"]) >= 1:
        return "E_0 diverges: lambda(1-q) >= 1"
    return None


@_entry(
    "I4_6",
    "E_0(lambda) = 1 / (1 - lambda(1-q))_q^inf",
    mode=INTERVAL,
    tolerance=Fraction(1, 10**12),
    guard=_e0_guard,
)
def _i4_6():
    def bindings(g):
        return _product(q=g.sub_qs, lam=_LAMBDAS)

    def evaluate(q, lam, eps):
        lhs = q_exponential(0, lam, q, eps)
        prod = shifted_pow_infinite(lam * (1 - q), q, eps * Fraction(1, 4) / (1 + lhs.hi) ** 2)
        return lhs, prod.reciprocal().outward(eps / 8)

    return bindings, evaluate


@_entry(
    "I4_10",
    "E_0(lambda) E_1(-lambda) = 1",
    mode=INTERVAL,
    tolerance=Fraction(1, 10**12),
    guard=_e0_guard,
)
def _i4_10():
    def bindings(g):
        return _product(q=g.sub_qs, lam=_LAMBDAS)

    def evaluate(q, lam, eps):
        e0 = q_exponential(0, lam, q, Fraction(1, 4))
        inner = eps / (4 * (1 + e0.hi))
        e0 = q_exponential(0, lam, q, inner)
        e1 = q_exponential(1, -lam, q, inner)
        return (e0 * e1).outward(eps / 8), Fraction(1)

    return bindings, evaluate


def _x_guard(b) -> Optional[str]:
    q, x, alpha, beta = b["q"], b["x"], b["alpha"], b["beta"]
    lo, hi = min(0, alpha, alpha + beta, -beta), max(0, alpha, alpha + beta)
    for i in range(lo, hi):
        if 1 - q**i * x == 0:
            return f"zero factor 1 - q^{i} x"
    return None


@_entry(
    "I4_13",
    "(1-x)_q^(alpha+beta) = (1-x)_q^alpha (1-q^alpha x)_q^beta;"
    " (1-x)_q^-beta = 1/(1-q^-beta x)_q^beta",
    guard=_x_guard,
)
def _i4_13():
    def bindings(g):
        return _product(q=g.all_qs, x=g.ps, alpha=range(-3, 4), beta=range(-3, 4))

    def evaluate(q, x, alpha, beta):
        lhs = shifted_pow(1, -x, alpha + beta, q)
        rhs = shifted_pow(1, -x, alpha, q) * shifted_pow(1, -(q**alpha) * x, beta, q)
        if beta > 0:
            neg = shifted_pow(1, -x, -beta, q)
            pos = shifted_pow(1, -(q ** (-beta)) * x, beta, q)
            lhs, rhs = (lhs, neg), (rhs, 1 / pos)
        return lhs, rhs

    return bindings, evaluate


def _pgf_series(lam, z, q, eps) -> Interval:
    # sum_k lam^k / [k]! (z - 1)_q^k
    def terms():
        t, k = Fraction(1), 0
        while True:
            yield t
            t = t * lam * (z - q**k) / bracket(k + 1, q)
            k += 1

    return certified_series(terms(), lambda k: lam * (abs(z) + q**k) / bracket(k + 1, q), eps)


def _pgf_guard(b) -> Optional[str]:
    if b["lam"] * (1 - b["q"]) * max(1, abs(b["z"])) >= 1:
        return "series diverges: lambda(1-q) max(1,|z|) >= 1"
    return None


@_entry(
    "I4_15",
    "E_0(lambda z) / E_0(lambda) = sum_k lambda^k/[k]! (z-1)_q^k",
    mode=INTERVAL,
    tolerance=Fraction(1, 10**10),
    guard=_pgf_guard,
)
def _i4_15():
    def bindings(g):
        return _product(
            q=g.sub_qs, lam=(F(1, 5), F(1, 2), F(4, 5), F(1)),
            z=(F(0), F(1, 2), F(1), F(3, 2), F(2)),
        )

    def evaluate(q, lam, z, eps):
        den = q_exponential(0, lam, q, Fraction(1, 4))
        inner = eps / (8 * (1 + den.hi) ** 2)
        lhs = q_exponential(0, lam * z, q, inner) / q_exponential(0, lam, q, inner)
        return lhs.outward(eps / 8), _pgf_series(lam, z, q, eps)

    return bindings, evaluate


@_entry(
    "I4_16",
    "E_0(b) E_1(-a) = sum_k (b-a)_q^k / [k]!",
    mode=INTERVAL,
    tolerance=Fraction(1, 10**10),
)
def _i4_16():
    def bindings(g):
        return _product(q=g.sub_qs, a=g.ps, b=g.ps)

    def evaluate(q, a, b, eps):
        e0 = q_exponential(0, b, q, Fraction(1, 4))
        inner = eps / (8 * (1 + e0.hi))
        lhs = q_exponential(0, b, q, inner) * q_exponential(1, -a, q, inner)

        def terms():
            t, k = Fraction(1), 0
            while True:
                yield t
                t = t * (b - q**k * a) / bracket(k + 1, q)
                k += 1

        rhs = certified_series(terms(), lambda k: (abs(b) + q**k * abs(a)) / bracket(k + 1, q), eps)
        return lhs.outward(eps / 8), rhs

    return bindings, evaluate


# ---------------------------------------------------------------------------
# catalog: hypergeometric section
# ---------------------------------------------------------------------------


@_entry("I5_3", "sum_k [m k][u n-k] q^((m-k)(n-k)) = [m+u n]")
def _i5_3():
    def bindings(g):
        for q, m, u in itertools.product(g.all_qs, g.ints(6), g.ints(6)):
            for n in range(m + u + 2):
                yield {"q": q, "m": m, "u": u, "n": n}

    def evaluate(q, m, u, n):
        lhs = _sum(
            q_binomial(m, k, q) * q_binomial(u, n - k, q) * q ** ((m - k) * (n - k))
            for k in range(n + 1)
        )
        return lhs, q_binomial(m + u, n, q)

    return bindings, evaluate


@_entry(
    "I5_5",
    "(1-x)_q^m (1-q^m x)_q^u and sum_n (-x)^n q^(n(n-1)/2) sum_k [m k][u n-k] q^((m-k)(n-k))"
    " both expand to sum_n [m+u n] (-x)^n q^(n(n-1)/2)",
)
def _i5_5():
    def bindings(g):
        return _product(q=g.all_qs, m=g.ints(6), u=g.ints(6), form=("product", "middle"))

    def evaluate(q, m, u, form):
        rhs = PPoly(
            q_binomial(m + u, n, q) * (-1) ** n * q ** (n * (n - 1) // 2) for n in range(m + u + 1)
        )
        if form == "product":
            lhs = shifted_pow(1, -X, m, q) * shifted_pow(1, -(q**m) * X, u, q)
        else:
            lhs = PPoly(
                (-1) ** n * q ** (n * (n - 1) // 2)
                * _sum(
                    q_binomial(m, k, q) * q_binomial(u, n - k, q) * q ** ((m - k) * (n - k))
                    for k in range(n + 1)
                )
                for n in range(m + u + 1)
            )
        return lhs, rhs

    return bindings, evaluate


@_entry("I5_11", "sum_{|a|=n-k} q^(sum_s (m-s) a(s)) = q^((m-k)(n-k)) [n k]")
def _i5_11():
    def bindings(g):
        for q, m, n in itertools.product(g.all_qs, g.ints(6), g.ints(7)):
            for k in range(n + 1):
                yield {"q": q, "m": m, "n": n, "k": k}

    def evaluate(q, m, n, k):
        lhs = _sum(_runs_weight(p.runs, q, lambda s: m - s) for p in enumerate_patterns(n, k))
        return lhs, q ** ((m - k) * (n - k)) * q_binomial(n, k, q)

    return bindings, evaluate


@_entry(
    "I5_19",
    "[x]_(1/q) = q^(1-x) [x]_q; [k]!_(1/q) = q^-(k(k-1)/2) [k]!_q;"
    " [x k]_(1/q) = q^(k(k-x)) [x k]_q",
)
def _i5_19():
    def bindings(g):
        for q in g.all_qs:
            for x in range(-4, g.max_int + 1):
                yield {"q": q, "law": "bracket", "x": x, "k": 0}
            for k in g.ints():
                yield {"q": q, "law": "factorial", "x": 0, "k": k}
            for x, k in itertools.product(range(-4, g.max_int + 1), g.ints()):
                yield {"q": q, "law": "binomial", "x": x, "k": k}

    def evaluate(q, law, x, k):
        Q = 1 / q
        if law == "bracket":
            return bracket(x, Q), q ** (1 - x) * bracket(x, q)
        if law == "factorial":
            return q_factorial(k, Q), q ** (-(k * (k - 1) // 2)) * q_factorial(k, q)
        return q_binomial(x, k, Q), q ** (k * (k - x)) * q_binomial(x, k, q)

    return bindings, evaluate


@_entry(
    "I5_20",
    "base-1/q pmf (m,u) at k = q^((u-k')(n-k')) [u k'][m n-k'] / [N n] = base-q pmf (u,m) at k'=n-k",
)
def _i5_20():
    def bindings(g):
        for q, m, u in itertools.product(g.all_qs, g.ints(5), g.ints(5)):
            for n in range(m + u + 1):
                for k in range(n + 1):
                    for form in ("rebased", "swapped"):
                        yield {"q": q, "m": m, "u": u, "n": n, "k": k, "form": form}

    def evaluate(q, m, u, n, k, form):
        lhs = hypergeom_pmf(m, u, n, 1 / q)[k]
        kp = n - k
        if form == "swapped":
            return lhs, hypergeom_pmf(u, m, n, q)[kp]
        rhs = (
            q ** ((u - kp) * (n - kp)) * q_binomial(u, kp, q) * q_binomial(m, n - kp, q)
            / q_binomial(m + u, n, q)
        )
        return lhs, rhs

    return bindings, evaluate


# ---------------------------------------------------------------------------
# catalog: contagious section
# ---------------------------------------------------------------------------


def _contagious_guard(b) -> Optional[str]:
    try:
        Contagious(b["m"], b["u"], b["s"], b["n"], b["q"]).validate()
    except DomainError as exc:
        return str(exc)
    return None


@_entry(
    "I6_3",
    "sum_k [n k]_(q^-s) q^((m+sk)(n-k)) prod [m+as] prod [u+bs] = prod_{g<n} [m+u+gs]",
    guard=_contagious_guard,
)
def _i6_3():
    def bindings(g):
        return _product(
            q=g.all_qs, m=g.ints(4), u=g.ints(4), s=range(-2, 3), n=g.ints(5, start=1)
        )

    def evaluate(q, m, u, s, n):
        lhs = _sum(contagious_weight(m, u, s, n, k, q) for k in range(n + 1))
        return lhs, contagious_denominator(m, u, s, n, q)

    return bindings, evaluate


def _rebased_sides(M: int, U: int, n: int, Q) -> tuple[Fraction, Fraction]:
    lhs = Fraction(0)
    for k in range(n + 1):
        t = q_binomial(n, k, Q) * Q ** ((M - k) * (n - k))
        for a in range(k):
            t *= bracket(M - a, Q)
        for b in range(n - k):
            t *= bracket(U - b, Q)
        lhs += t
    rhs = Fraction(1)
    for c in range(n):
        rhs *= bracket(M + U - c, Q)
    return lhs, rhs


@_entry(
    "I6_5",
    "sum_k [n k]_Q Q^((M-k)(n-k)) prod_{a<k} [M-a]_Q prod_{b<n-k} [U-b]_Q"
    " = prod_{c<n} [M+U-c]_Q, Q = q^-s; with M=-m/s, U=-u/s times [-s]^n it is the"
    " contagious normalization in base q",
)
def _i6_5():
    def bindings(g):
        for q, s in itertools.product(g.all_qs, (-2, -1, 1, 2)):
            for M, U, n in itertools.product(range(-3, 6), range(-3, 6), g.ints(5)):
                yield {"q": q, "s": s, "M": M, "U": U, "n": n, "form": "rebased"}
            for m, u, n in itertools.product(g.ints(4), g.ints(4), g.ints(5)):
                if m % s == 0 and u % s == 0:
                    yield {"q": q, "s": s, "M": -m // s, "U": -u // s, "n": n, "form": "linked"}

    def evaluate(q, s, M, U, n, form):
        Q = q ** (-s)
        lhs, rhs = _rebased_sides(M, U, n, Q)
        if form == "rebased":
            return lhs, rhs
        m, u = -M * s, -U * s
        scale = bracket(-s, q) ** n
        direct = _sum(contagious_weight(m, u, s, n, k, q) for k in range(n + 1))
        den = Fraction(1)
        for c in range(n):
            den *= bracket(m + u + c * s, q)
        return (lhs * scale, rhs * scale), (direct, den)

    return bindings, evaluate


@_entry("I6_11", "sum_{|a|=n-k} q^(sum_i (m+si) a(i)) = q^((m+sk)(n-k)) [n k]_(q^-s)")
def _i6_11():
    def bindings(g):
        for q, m, s, n in itertools.product(g.all_qs, g.ints(4), range(-2, 3), g.ints(6)):
            for k in range(n + 1):
                yield {"q": q, "m": m, "s": s, "n": n, "k": k}

    def evaluate(q, m, s, n, k):
        lhs = _sum(_runs_weight(p.runs, q, lambda i: m + s * i) for p in enumerate_patterns(n, k))
        return lhs, q ** ((m + s * k) * (n - k)) * q_binomial(n, k, q ** (-s))

    return bindings, evaluate


# ---------------------------------------------------------------------------
# catalog: uniform and range section
# ---------------------------------------------------------------------------


@_entry(
    "I7_11",
    "range pmf sums to 1 and equals brute force over all (M+1)^n weighted outcomes",
)
def _i7_11():
    def bindings(g):
        return _product(q=g.all_qs, M=g.ints(4), n=g.ints(4, start=1), form=("sum", "brute"))

    def evaluate(q, M, n, form):
        pmf = range_pmf(M, n, q)
        if form == "sum":
            return pmf.total(), Fraction(1)
        return {ell: pmf[ell] for ell in range(M + 1)}, _range_brute_force(M, n, q)

    return bindings, evaluate


@_entry("I7_12", "P(r_1 > 0) = 0 for every q")
def _i7_12():
    def bindings(g):
        return _product(q=g.all_qs, M=g.ints())

    def evaluate(q, M):
        pmf = range_pmf(M, 1, q)
        return _sum(pmf[ell] for ell in range(1, M + 1)), Fraction(0)

    return bindings, evaluate


@_entry("I7_13", "the alternative two-draw range pmf sums to 1")
def _i7_13():
    def bindings(g):
        return _product(q=g.all_qs, M=g.ints())

    def evaluate(q, M):
        return range_pmf_alt_n2(M, q).total(), Fraction(1)

    return bindings, evaluate


def _normalization_cases(g: GridSpec) -> Iterator[dict]:
    for q in g.all_qs:
        for p, n in itertools.product(g.ps, g.ints()):
            yield {"family": "bernoulli", "q": q, "p": p, "n": n}
        for m, u in itertools.product(g.ints(6), g.ints(6)):
            for n in range(m + u + 1):
                yield {"family": "hypergeom", "q": q, "m": m, "u": u, "n": n}
        for m, u, s, n in itertools.product(g.ints(4), g.ints(4), range(-2, 3), g.ints(5, start=1)):
            yield {"family": "contagious", "q": q, "m": m, "u": u, "s": s, "n": n}
        for M in g.ints():
            yield {"family": "uniform", "q": q, "M": M}
            yield {"family": "range_alt", "q": q, "M": M}
        for M, n in itertools.product(g.ints(5), g.ints(5, start=1)):
            yield {"family": "range", "q": q, "M": M, "n": n}
        for p, a, b in itertools.product(g.ps, g.ints(6, start=1), g.ints(6, start=1)):
            yield {"family": "parties", "q": q, "p": p, "a": a, "b": b}


def _normalization_guard(b) -> Optional[str]:
    if b["family"] == "contagious":
        return _contagious_guard(b)
    return None


@_entry("N_ALL", "every closed-form finite pmf sums to exactly 1", guard=_normalization_guard)
def _n_all():
    def evaluate(family, q, p=None, n=None, m=None, u=None, s=None, M=None, a=None, b=None):
        if family == "bernoulli":
            total = bernoulli_pmf(n, p, q, mode=IDENTITY).total()
        elif family == "hypergeom":
            total = hypergeom_pmf(m, u, n, q).total()
        elif family == "contagious":
            total = contagious_pmf(m, u, s, n, q).total()
        elif family == "uniform":
            total = uniform_pmf(M, q).total()
        elif family == "range_alt":
            total = range_pmf_alt_n2(M, q).total()
        elif family == "range":
            total = range_pmf(M, n, q).total()
        else:
            total = sum(parties_probabilities(a, b, p, q))
        return total, Fraction(1)

    return _normalization_cases, evaluate


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------


def _refined(distance: Callable[[Fraction], Interval]) -> Interval:
    """Tighten ``distance(eps)`` until its width is small next to its lower end."""
    eps = Fraction(1, 10**12)
    while True:
        d = distance(eps)
        if d.width == 0 or d.width * 64 <= d.lo or eps < Fraction(1, 10**80):
            return d
        eps /= 10**8


def _tv_exact(a: dict, b: dict) -> Interval:
    keys = set(a) | set(b)
    return Interval.point(_sum(abs(a.get(k, 0) - b.get(k, 0)) for k in keys) / 2)


def _l4_3(n: int, q, p) -> Interval:
    exact = bernoulli_pmf(n, p, q)

    def distance(eps):
        lim = bernoulli_inf_pmf(p, q, n, eps)
        lo = as_interval(lim.defect).lo
        hi = as_interval(lim.defect).hi
        for k in range(n + 1):
            e = as_interval(lim[k])
            lo += e.gap(exact[k])
            hi += e.distance_bound(exact[k])
        return Interval(lo / 2, hi / 2)

    if p == 0:
        return Interval.point(0)
    return _refined(distance)


def _l5_17(N: int, q, c, n) -> Interval:
    target = bernoulli_pmf(n, q ** (-c), q, mode=IDENTITY).entries
    return _tv_exact(hypergeom_pmf(N - c, c, n, q).entries, target)


def _l5_25(N: int, q, c, n) -> Interval:
    Q = 1 / q
    pp = q**c
    target = {
        k: q_binomial(n, k, Q) * shifted_pow(1, -pp, k, Q) * pp ** (n - k) for k in range(n + 1)
    }
    return _tv_exact(hypergeom_pmf(c, N - c, n, q).entries, target)


def _superunit_distance(n: int, q, lam, limit) -> Interval:
    prod = shifted_pow(1, -lam / bracket(n, q), n, q)

    def distance(eps):
        const = limit(lam, q, eps)
        return Interval(const.gap(prod), const.distance_bound(prod))

    return _refined(distance)


def _i4_24(n: int, q, lam) -> Interval:
    return _superunit_distance(n, q, lam, superunit_limit_product)


def _i4_24_printed(n: int, q, lam) -> Interval:
    return _superunit_distance(n, q, lam, superunit_poisson_constant)


@dataclass(frozen=True)
class LimitSpec:
    name: str
    description: str
    distance: Callable[..., Interval]
    defaults: dict
    points: tuple[int, ...]
    point_name: str


LIMITS: dict[str, LimitSpec] = {
    "L4_3": LimitSpec(
        "L4_3",
        "TV distance from q-Bernoulli(n, p) to its n -> infinity limit (0 < q < 1)",
        _l4_3, {"q": F(1, 2), "p": F(1, 2)}, (10, 20, 30), "n",
    ),
    "L5_17": LimitSpec(
        "L5_17",
        "TV distance from q-hypergeometric(m=N-c, u=c, n) to q-Bernoulli(n, q^-c) (q > 1)",
        _l5_17, {"q": F(2), "c": 4, "n": 3}, (10, 20, 30), "N",
    ),
    "L5_25": LimitSpec(
        "L5_25",
        "TV distance from q-hypergeometric(m=c, u=N-c, n) to [n k]_(1/q) (1-p')_(1/q)^k p'^(n-k),"
        " p' = q^c (0 < q < 1)",
        _l5_25, {"q": F(1, 2), "c": 2, "n": 3}, (10, 20, 30), "N",
    ),
    "I4_24": LimitSpec(
        "I4_24",
        "|(1 - lambda/[n])_q^n - 1/sum_k q^-(k(k-1)/2) lambda^k (1-(q-1)lambda)_q^-k/[k]!| (q > 1)",
        _i4_24, {"q": F(2), "lam": F(1, 2)}, (20, 30, 40), "n",
    ),
    "I4_24_printed": LimitSpec(
        "I4_24_printed",
        "|(1 - lambda/[n])_q^n - 1/sum_k q^-(k(k-1)/2) lambda^k (1-lambda)_q^-k/[k]!| (q > 1);"
        " only tends to 0 at q = 2",
        _i4_24_printed, {"q": F(2), "lam": F(1, 2)}, (20, 30, 40), "n",
    ),
}


def limit_table(name: str, points: Optional[Sequence[int]] = None, **params) -> LimitTable:
    if name not in LIMITS:
        raise UnknownIdentity(f"unknown limit {name!r}; known: {', '.join(LIMITS)}")
    spec = LIMITS[name]
    unknown = set(params) - set(spec.defaults)
    if unknown:
        raise DomainError(f"{name} takes {sorted(spec.defaults)}, got {sorted(unknown)}")
    full = {k: params.get(k, v) for k, v in spec.defaults.items()}
    full = {k: (rational(v) if k in ("q", "p", "lam") else int(v)) for k, v in full.items()}
    pts = tuple(int(x) for x in (points or spec.points))
    return LimitTable(name, full, pts, tuple(spec.distance(x, **full) for x in pts))


def _limit_entry(id, statement, bindings, guard=None, final_tol=None, watchlist=False):
    def evaluate(**b):
        return limit_table(id, **b)

    CATALOG[id] = Entry(id, statement, MONOTONE, bindings, evaluate,
                        None if final_tol is None else rational(final_tol), guard, watchlist)


_limit_entry("L4_3", LIMITS["L4_3"].description,
             lambda g: _product(q=g.sub_qs, p=g.ps))
_limit_entry("L5_17", LIMITS["L5_17"].description,
             lambda g: _product(q=g.super_qs, c=(1, 2, 4), n=(3,)))
_limit_entry("L5_25", LIMITS["L5_25"].description,
             lambda g: _product(q=g.sub_qs, c=(1, 2, 3), n=(3,)))
_limit_entry(
    "I4_24", LIMITS["I4_24"].description,
    lambda g: _product(q=g.super_qs, lam=(F(1, 5), F(1, 2), F(1))),
    guard=lambda b: None if (b["q"] - 1) * b["lam"] < b["q"] else "needs (q-1) lambda < q",
    final_tol=Fraction(1, 10**6),
)
_limit_entry(
    "I4_24_printed", LIMITS["I4_24_printed"].description,
    lambda g: _product(q=g.super_qs, lam=(F(1, 5), F(1, 2), F(1))),
    guard=lambda b: None if b["lam"] < b["q"] else "needs lambda < q",
    final_tol=Fraction(1, 10**6),
    watchlist=True,
)


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------


def catalog_ids() -> list[str]:
    return list(CATALOG)


def _width(x) -> Fraction:
    if isinstance(x, Interval):
        return x.width
    if isinstance(x, tuple):
        return max((_width(v) for v in x), default=Fraction(0))
    return Fraction(0)


def _judge(entry: Entry, lhs, rhs) -> Optional[str]:
    if entry.mode == EXACT:
        return None if lhs == rhs else "sides differ"
    lo, ro = as_interval(lhs), as_interval(rhs)
    if not lo.overlaps(ro):
        return f"enclosures are disjoint (gap {float(lo.gap(ro)):.3e})"
    w = max(lo.width, ro.width)
    if w > entry.tolerance:
        return f"enclosure width {float(w):.3e} exceeds tolerance"
    return None


def _judge_table(entry: Entry, table: LimitTable) -> Optional[str]:
    if not table.strictly_decreasing:
        return "distances are not strictly decreasing"
    if entry.tolerance is not None and table.distances[-1].hi > entry.tolerance:
        return f"final distance {float(table.distances[-1].hi):.3e} exceeds tolerance"
    return None


def run_identity(id: str, grid: Optional[GridSpec] = None, bindings: Optional[Iterable[dict]] = None) -> IdentityCheck:
    """Evaluate one catalog identity on a grid (or on explicit ``bindings``).

    Grid bindings outside the identity's domain are listed in ``excluded``.
    Explicitly supplied bindings are never excluded: an out-of-domain one is
    reported as a failure.
    """
    if id not in CATALOG:
        raise UnknownIdentity(f"unknown identity {id!r}")
    entry = CATALOG[id]
    grid = grid or default_grid()
    explicit = bindings is not None
    check = IdentityCheck(
        id, entry.statement, entry.mode,
        entry.tolerance if entry.mode != EXACT else None,
        watchlist=entry.watchlist,
    )
    if entry.mode == MONOTONE:
        check.tolerance = entry.tolerance
    widths: list[Fraction] = []

    def fail(binding, lhs, rhs, reason):
        check.failures += 1
        if check.counterexample is None:
            check.counterexample = Counterexample(binding, lhs, rhs, reason)

    for b in (bindings if explicit else entry.bindings(grid)):
        b = dict(b)
        if "q" in b:
            b["q"] = rational(b["q"])
        reason = entry.guard(b) if entry.guard else None
        if reason is not None:
            if explicit:
                check.grid.append(b)
                fail(b, None, None, f"out of domain: {reason}")
            else:
                check.excluded.append((b, reason))
            continue
        check.grid.append(b)
        try:
            if entry.mode == MONOTONE:
                table = entry.evaluate(**b)
                check.tables.append(table)
                why = _judge_table(entry, table)
                if why:
                    fail(b, table.distances, None, why)
                continue
            if entry.mode == INTERVAL:
                lhs, rhs = entry.evaluate(**b, eps=entry.tolerance / 4)
                widths.append(max(_width(lhs), _width(rhs)))
            else:
                lhs, rhs = entry.evaluate(**b)
        except DomainError as exc:
            fail(b, None, None, f"out of domain: {exc}")
            continue
        why = _judge(entry, lhs, rhs)
        if why:
            fail(b, lhs, rhs, why)
    if widths:
        check.max_width = max(widths)
    check.outcome = FAIL if check.failures else PASS
    return check


def run_catalog(ids: Optional[Iterable[str]] = None, grid: Optional[GridSpec] = None) -> list[IdentityCheck]:
    ids = list(ids) if ids is not None else catalog_ids()
    for i in ids:
        if i not in CATALOG:
            raise UnknownIdentity(f"unknown identity {i!r}")
    return [run_identity(i, grid) for i in ids]
