"""Seeded i.i.d. random fields over Z^d, alloy potentials and conformal factors.

Every site value is a pure function of ``(seed, gamma + base_shift)``: the two
uniforms for a site are drawn from a :class:`numpy.random.SeedSequence` keyed on
the seed and the zigzag-encoded coordinates, so there is one independent stream
per site and the table can be extended in any order without changing values
already seen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import NegativePotential, WindowTooSmall
from .lattice import CoverRegion, add, element, sub

_MASK64 = (1 << 64) - 1
_KINDS = ("uniform", "triangular", "two-point")


@dataclass(frozen=True)
class DistributionSpec:
    """Compactly supported single-site law.

    ``uniform(a, b)``, ``triangular(a, b, mode)`` (mode defaults to the midpoint)
    or ``two-point(p; x0, x1)`` taking ``x0`` with probability ``p``.
    """

    kind: str
    a: float = 0.0
    b: float = 1.0
    mode: float = None
    p: float = 1.0
    x0: float = 0.0
    x1: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind in ("uniform", "triangular") and not self.a <= self.b:
            raise ValueError("need a <= b")
        if self.kind == "triangular":
            mode = 0.5 * (self.a + self.b) if self.mode is None else float(self.mode)
            if not self.a <= mode <= self.b:
                raise ValueError("triangular mode outside [a, b]")
            object.__setattr__(self, "mode", mode)
        if self.kind == "two-point" and not 0.0 <= self.p <= 1.0:
            raise ValueError("two-point p must lie in [0, 1]")

    @classmethod
    def uniform(cls, a, b):
        return cls("uniform", a=float(a), b=float(b))

    @classmethod
    def triangular(cls, a, b, mode=None):
        return cls("triangular", a=float(a), b=float(b), mode=mode)

    @classmethod
    def two_point(cls, p, x0, x1=0.0):
        return cls("two-point", p=float(p), x0=float(x0), x1=float(x1))

    @classmethod
    def constant(cls, c):
        return cls.two_point(1.0, c)

    def transform(self, u):
        """Map uniforms on [0, 1) through the inverse CDF."""
        u = np.asarray(u, dtype=float)
        if self.kind == "uniform":
            return self.a + (self.b - self.a) * u
        if self.kind == "two-point":
            return np.where(u < self.p, self.x0, self.x1)
        a, b, c = self.a, self.b, self.mode
        if b == a:
            return np.full_like(u, a)
        split = (c - a) / (b - a)
        left = a + np.sqrt(u * (b - a) * (c - a))
        right = b - np.sqrt((1.0 - u) * (b - a) * (b - c))
        return np.where(u < split, left, right)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            if self.b == self.a:
                return (x >= self.a).astype(float)
            return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)
        if self.kind == "two-point":
            lo, hi = sorted([(self.x0, self.p), (self.x1, 1 - self.p)])
            return np.where(x >= lo[0], lo[1], 0.0) + np.where(x >= hi[0], hi[1], 0.0)
        a, b, c = self.a, self.b, self.mode
        if b == a:
            return (x >= a).astype(float)
        left = (x - a) ** 2 / ((b - a) * (c - a)) if c > a else np.zeros_like(x)
        right = 1 - (b - x) ** 2 / ((b - a) * (b - c)) if b > c else np.ones_like(x)
        return np.where(x <= a, 0.0, np.where(x >= b, 1.0, np.where(x <= c, left, right)))

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.5 * (self.a + self.b)
        if self.kind == "triangular":
            return (self.a + self.b + self.mode) / 3.0
        return self.p * self.x0 + (1 - self.p) * self.x1

    @property
    def support(self):
        if self.kind == "two-point":
            pts = [x for x, w in ((self.x0, self.p), (self.x1, 1 - self.p)) if w > 0]
            return min(pts), max(pts)
        return self.a, self.b

    @property
    def is_degenerate(self) -> bool:
        lo, hi = self.support
        return lo == hi

    def to_dict(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform", "a": self.a, "b": self.b}
        if self.kind == "triangular":
            return {"kind": "triangular", "a": self.a, "b": self.b, "mode": self.mode}
        return {"kind": "two-point", "p": self.p, "x0": self.x0, "x1": self.x1}


@dataclass(frozen=True)
class SingleSiteFunction:
    """Finitely supported function on the cover: entries ``(offset, local, value)``."""

    support: tuple

    def __post_init__(self):
        entries = []
        for off, i, val in self.support:
            if float(val) < 0:
                raise ValueError("single-site values must be nonnegative")
            entries.append((element(off), int(i), float(val)))
        object.__setattr__(self, "support", tuple(entries))

    @classmethod
    def on_cell(cls, m: int, d: int, value: float = 1.0):
        """``value`` times the indicator of the fundamental cell."""
        return cls(tuple(((0,) * d, i, value) for i in range(m)))

    def kappa(self, m: int) -> float:
        """Largest kappa with f >= kappa on the fundamental cell."""
        d = len(self.support[0][0]) if self.support else 1
        vals = []
        for i in range(m):
            vals.append(sum(v for off, k, v in self.support if k == i and off == (0,) * d))
        return min(vals)

    def validate(self, m: int, d: int):
        for off, i, _ in self.support:
            if len(off) != d or not 0 <= i < m:
                raise ValueError(f"support entry {(off, i)} incompatible with cell (d={d}, m={m})")
        if self.kappa(m) <= 0:
            raise ValueError("single-site function must be positive on every vertex of the fundamental cell")

    def offsets(self):
        return sorted({off for off, _, _ in self.support})

    def total(self) -> float:
        return sum(v for _, _, v in self.support)

    def partition_sums(self, m: int):
        """Sum over gamma of f(gamma^{-1} x) for each local vertex."""
        return [sum(v for _, k, v in self.support if k == i) for i in range(m)]

    def to_list(self):
        return [[list(off), i, v] for off, i, v in self.support]


def _zigzag(c: int) -> int:
    return (c << 1) if c >= 0 else ((-c << 1) - 1)


def site_uniforms(seed: int, raw) -> tuple:
    """Two independent uniforms in [0, 1) for the site with raw coordinates ``raw``."""
    words = np.random.SeedSequence([seed & _MASK64, *map(_zigzag, raw)]).generate_state(2, np.uint64)
    return tuple(float(w >> np.uint64(11)) * 2.0**-53 for w in words)


class OmegaRealization:
    """Sample of the product field ``gamma -> (q_gamma, r_gamma)``.

    The realization knows the finite ``window`` it has materialized; querying
    outside it raises :class:`WindowTooSmall`.  ``extend`` and ``shift`` return
    new realizations and never mutate this one.
    """

    def __init__(self, seed, coupling, log_factor, d, base_shift=None, window=(), table=None):
        self.seed = int(seed)
        self.coupling = coupling
        self.log_factor = log_factor
        self.d = d
        self.base_shift = element(base_shift) if base_shift is not None else (0,) * d
        self._table = {} if table is None else table
        self.window = frozenset()
        self._materialize(window)

    def _materialize(self, cells):
        new = {element(g) for g in cells} - self.window
        for g in sorted(new):
            raw = add(g, self.base_shift)
            if raw not in self._table:
                uq, ur = site_uniforms(self.seed, raw)
                q = float(self.coupling.transform(uq)) if self.coupling is not None else 0.0
                r = float(self.log_factor.transform(ur)) if self.log_factor is not None else 0.0
                self._table[raw] = (q, r)
        self.window = self.window | new

    def extend(self, cells: Iterable) -> "OmegaRealization":
        out = OmegaRealization(self.seed, self.coupling, self.log_factor, self.d,
                               self.base_shift, self.window, dict(self._table))
        out._materialize(cells)
        return out

    def covers(self, cells: Iterable) -> bool:
        return all(element(g) in self.window for g in cells)

    def _lookup(self, gamma):
        gamma = element(gamma)
        if gamma not in self.window:
            raise WindowTooSmall(f"group element {gamma} is outside the sampled window")
        return self._table[add(gamma, self.base_shift)]

    def q(self, gamma) -> float:
        return self._lookup(gamma)[0]

    def r(self, gamma) -> float:
        return self._lookup(gamma)[1]

    def q_values(self, cells) -> np.ndarray:
        return np.array([self._lookup(g)[0] for g in cells], dtype=float)

    def r_values(self, cells) -> np.ndarray:
        return np.array([self._lookup(g)[1] for g in cells], dtype=float)

    def field_equal(self, other: "OmegaRealization") -> bool:
        if self.window != other.window:
            return False
        return all(self._lookup(g) == other._lookup(g) for g in self.window)

    def __repr__(self):
        return f"OmegaRealization(seed={self.seed}, base_shift={self.base_shift}, |window|={len(self.window)})"


def sample_omega(seed: int, window: Iterable, specs, d: int = None) -> OmegaRealization:
    """Materialize the field on ``window``.

    ``specs`` is ``(coupling law, log-factor law)``; either may be ``None`` for a
    field that is identically zero.
    """
    window = [element(g) for g in window]
    if d is None:
        if not window:
            raise ValueError("cannot infer dimension from an empty window")
        d = len(window[0])
    coupling, log_factor = specs
    return OmegaRealization(seed, coupling, log_factor, d, window=window)


def shift(omega: OmegaRealization, gamma) -> OmegaRealization:
    """Field translated by ``gamma``: ``q'(g) = q(g - gamma)``."""
    gamma = element(gamma)
    return OmegaRealization(
        omega.seed, omega.coupling, omega.log_factor, omega.d,
        base_shift=sub(omega.base_shift, gamma),
        window=[add(g, gamma) for g in omega.window],
        table=omega._table,
    )


def _support_sum(values_at, cells, locals_, f: SingleSiteFunction, transform=None):
    """sum_gamma w(gamma) f(cell - gamma, local) for each (cell, local) pair."""
    out = np.zeros(len(cells))
    for off, i, val in f.support:
        mask = locals_ == i
        if not mask.any():
            continue
        src = [sub(c, off) for c, keep in zip(cells, mask) if keep]
        w = values_at(src)
        if transform is not None:
            w = transform(w)
        out[mask] += val * w
    return out


def potential_reach(region: CoverRegion, v: SingleSiteFunction) -> set:
    return {sub(g, off) for g in region.cells for off in v.offsets()}


def alloy_potential(omega, region: CoverRegion, v: SingleSiteFunction, v_per=None,
                    require_nonnegative: bool = False) -> np.ndarray:
    """Periodic background plus the alloy sum of couplings times ``v``."""
    m = region.cell.m
    v_per = np.zeros(m) if v_per is None else np.asarray(v_per, dtype=float)
    cells = [region.cells[k // m] for k in range(region.n)]
    locals_ = region.local_indices()
    V = v_per[locals_].copy()
    V += _support_sum(omega.q_values, cells, locals_, v)
    if require_nonnegative and (V < 0).any():
        k = int(np.argmin(V))
        raise NegativePotential(f"V = {V[k]!r} < 0 at vertex {region.vertex(k)}")
    return V


def conformal_at(omega, cells, locals_, u: SingleSiteFunction) -> np.ndarray:
    return _support_sum(omega.r_values, list(cells), np.asarray(locals_), u, np.exp)


def conformal_factor(omega, region: CoverRegion, u: SingleSiteFunction) -> np.ndarray:
    """Per-vertex factor ``a = sum_gamma exp(r_gamma) u(gamma^{-1} x)``."""
    m = region.cell.m
    cells = [region.cells[k // m] for k in range(region.n)]
    return conformal_at(omega, cells, region.local_indices(), u)


def conformal_bounds(u: SingleSiteFunction, m: int, r_min: float, r_max: float):
    """Analytic bracket ``[kappa e^{r_min}, total(u) e^{r_max}]`` for the factor."""
    return u.kappa(m) * math.exp(r_min), u.total() * math.exp(r_max)


def log_ratio_diagnostic(a: np.ndarray, region: CoverRegion) -> float:
    """Largest |log a(x) - log a(y)| over edges; stands in for a gradient bound."""
    if len(region.edges) == 0:
        return 0.0
    la = np.log(a)
    return float(np.max(np.abs(la[region.edges[:, 0]] - la[region.edges[:, 1]])))
