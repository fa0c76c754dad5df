"""Reliability analysis of cellular V2X uplinks on a line-process road model.

Layers:

* :mod:`v2xuplink.specfun` -- special functions and adaptive quadrature.
* :mod:`v2xuplink.pointprocess` -- road / vehicle / base-station sampling.
* :mod:`v2xuplink.analytic` -- distance laws, association probabilities,
  interference Laplace functionals, success probabilities.
* :mod:`v2xuplink.simulator` -- seeded Monte Carlo validation engine.
* :mod:`v2xuplink.experiments` -- presets, sweeps, CSV/SVG artifacts.
"""

from .pointprocess import Line, NetworkParams, NetworkRealization, RngSeed
from .analytic import LaplaceArg, SuccessBreakdown, success_v2x
from .simulator import Estimate, SimConfig, TrialOutcome
from .specfun import QuadratureSpec

__version__ = "0.1.0"

__all__ = [
    "Line",
    "NetworkParams",
    "NetworkRealization",
    "RngSeed",
    "LaplaceArg",
    "SuccessBreakdown",
    "success_v2x",
    "Estimate",
    "SimConfig",
    "TrialOutcome",
    "QuadratureSpec",
    "__version__",
]
