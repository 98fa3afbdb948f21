"""Reference fits for adaptometer sample tables, emitted as golden fixtures.

The harness reads the sampling CSV export schema and fits the same model
family with an independent stack: statsmodels Logit for the fixed-effects
reference and a standalone dense Laplace maximum-likelihood implementation
(scipy optimizer, numerical outer derivatives) for the mixed model. Fixture
JSONs are committed artifacts; the main test suite compares against them
without ever importing this package.
"""

from .fixtures import Fixture, fixture_from_csv, load_fixture, sha256_of
from .reference import MixedLogitReference, logit_reference

__version__ = "0.1.0"

__all__ = [
    "Fixture",
    "fixture_from_csv",
    "load_fixture",
    "sha256_of",
    "MixedLogitReference",
    "logit_reference",
]
