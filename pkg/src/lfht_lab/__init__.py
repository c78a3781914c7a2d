"""Likelihood-free hypothesis testing lab.

Given n simulated samples from each of two unknown distributions and m real
observations drawn from one of them, decide which one.  This package provides
the L2-difference test family, robust and classifier-style baselines,
worst-case instance generators, closed-form divergence calculators, and a
Monte Carlo harness that maps the empirical (n, m) success region.
"""

__version__ = "0.2.0"

from .dist import (
    ConstructionError,
    DiscretePmf,
    SampleKind,
    SampleSet,
    Source,
    bin_cube_sample,
    empirical_pmf,
    make_discrete_pmf,
    sample,
)
from .divergence import chi2, hellinger, kl, tv

__all__ = [
    "ConstructionError",
    "DiscretePmf",
    "SampleKind",
    "SampleSet",
    "Source",
    "bin_cube_sample",
    "chi2",
    "empirical_pmf",
    "hellinger",
    "kl",
    "make_discrete_pmf",
    "sample",
    "tv",
    "__version__",
]
