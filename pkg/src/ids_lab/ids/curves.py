from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class IdsCurve:
    """Grid samples of an integrated density of states with provenance."""

    lambdas: np.ndarray
    values: np.ndarray
    estimator: str
    seed: int = None
    region: str = ""
    stderr: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        val = np.asarray(self.values, dtype=float)
        if lam.shape != val.shape:
            raise ValueError("lambdas and values differ in length")
        if np.any(val < 0):
            raise ValueError("IDS values must be nonnegative")
        if np.any(np.diff(val) < 0):
            raise ValueError("IDS values must be nondecreasing")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "values", val)
        if self.stderr is not None:
            object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=float))

    def __call__(self, lam):
        """Value at a grid point (exact match required)."""
        k = np.flatnonzero(self.lambdas == lam)
        if not len(k):
            raise KeyError(f"{lam} is not on the grid")
        return float(self.values[k[0]])

    def sup_distance(self, other: "IdsCurve") -> float:
        if not np.array_equal(self.lambdas, other.lambdas):
            raise ValueError("curves live on different grids")
        return float(np.max(np.abs(self.values - other.values)))


@dataclass(frozen=True)
class WegnerRow:
    epsilon: float
    size: int
    mean_trace: float
    se: float
    n_samples: int


@dataclass(frozen=True)
class WegnerFit:
    log_c: float
    alpha: float
    beta: float
    alpha_ci: tuple
    beta_ci: tuple
    r2: float
    rows_used: int

    @property
    def holder(self) -> bool:
        """Holder continuity is claimed only if the beta interval contains 1."""
        lo, hi = self.beta_ci
        return lo <= 1.0 <= hi


@dataclass(frozen=True)
class WegnerTable:
    energy: float
    rows: tuple
    fit: WegnerFit
    seed: int = None

    def __post_init__(self):
        for r in self.rows:
            if r.epsilon <= 0 or r.size <= 0:
                raise ValueError("epsilon and |J| must be positive")
            if r.mean_trace < 0:
                raise ValueError("mean trace must be nonnegative")
