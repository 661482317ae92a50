"""Exact q-deformed discrete probability: q-numbers, distributions, processes and identities."""

from .errors import DomainError, IdentityViolation, ResourceError
from .qnum import (
    Interval,
    PPoly,
    QBase,
    Regime,
    bracket,
    certified_series,
    jackson_integral,
    q_binomial,
    q_derivative,
    q_exponential,
    q_factorial,
    rational,
    shifted_pow,
    shifted_pow_infinite,
)
from .qdist import (
    Bernoulli,
    BernoulliInfinite,
    Contagious,
    Geometric,
    Hypergeom,
    MomentReport,
    NegBinomial,
    Pmf,
    Poisson,
    Uniform,
    pmf_of,
)
from .qprocess import PathPattern, ProcessState, SampleReport, aggregate, sample_paths
from .qverify import GridSpec, IdentityCheck, default_grid, limit_table, run_identity

__version__ = "0.1.0"
