"""Exact and numerical solver for a bond-dissipative SSH Lindbladian.

Rapidity spectra, biorthogonal normal-mode bases, steady-state covariance,
covariance dynamics and skin-effect diagnostics, exposed as a library, a
FastAPI compute service (``lskin.service``) and a thin-client CLI
(``lskin.cli``).
"""

__version__ = "0.1.0"

from .model import (ChainSpec, DerivedRates, FullyFilled, InitialState, OBC,
                    Occupations, PBC, SingleParticle, derive_rates, site_count)

__all__ = [
    "ChainSpec", "DerivedRates", "FullyFilled", "InitialState", "OBC",
    "Occupations", "PBC", "SingleParticle", "derive_rates", "site_count",
    "__version__",
]
