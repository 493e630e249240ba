"""Estimators of the integrated density of states."""

from .bloch import bloch_oracle
from .curves import IdsCurve, WegnerFit, WegnerRow, WegnerTable
from .exhaustion import ExhaustionResult, exhaustion_estimate, oracle_convergence, self_averaging
from .montecarlo import bracketing_bounds, fit_wegner, ratio_estimate, trace_estimate, wegner_experiment

__all__ = [
    "IdsCurve", "WegnerFit", "WegnerRow", "WegnerTable", "ExhaustionResult",
    "bloch_oracle", "bracketing_bounds", "exhaustion_estimate", "fit_wegner",
    "oracle_convergence", "ratio_estimate", "self_averaging", "trace_estimate",
    "wegner_experiment",
]
