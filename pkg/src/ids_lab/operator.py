"""Assembly of the restricted operator as a generalized pencil (K, M).

Discretization rules for the conformal factor ``a``:

* vertex volume ``mu(x) = base_vertex_weight(x) * a(x)``
* edge weight ``w(x, y) = base_edge_weight * sqrt(a(x) * a(y))``
* ``Q(f) = sum_edges w (f(x) - f(y))**2 + boundary terms + sum_x V(x) mu(x) f(x)**2``

Boundary terms per bond leaving the region: none for Neumann, ``w f(x)**2``
for Dirichlet (zero extension) and ``2 w f(x)**2`` for the decoupled Dirichlet
condition used in bracketing.  The decoupled form dominates the form of any
larger region, since ``(s - t)**2 <= 2 s**2 + 2 t**2``; the plain Dirichlet
form does not.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import WindowTooSmall
from .fields import alloy_potential, conformal_at, conformal_factor, shift
from .lattice import CoverRegion, act
from .model import Model


class BoundaryCondition(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    DECOUPLED = "decoupled"

    @classmethod
    def parse(cls, value) -> "BoundaryCondition":
        return value if isinstance(value, cls) else cls(str(value).lower())


BC = BoundaryCondition

_BOUNDARY_FACTOR = {BC.NEUMANN: 0.0, BC.DIRICHLET: 1.0, BC.DECOUPLED: 2.0}


@dataclass(frozen=True, eq=False)
class WeightedOperator:
    """Stiffness ``K`` (CSR, exactly symmetric) and diagonal volume measure ``mass``."""

    K: sp.csr_matrix = field(repr=False)
    mass: np.ndarray = field(repr=False)
    bc: BoundaryCondition
    potential: np.ndarray = field(repr=False, default=None)
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.K.shape[0]

    @property
    def M(self) -> sp.dia_matrix:
        return sp.diags(self.mass)

    @property
    def volume(self) -> float:
        return float(self.mass.sum())

    @cached_property
    def norm_inf(self) -> float:
        return float(abs(self.K).sum(axis=1).max())

    def gershgorin_upper(self) -> float:
        """Row-sum bound on the spectrum of M^{-1} K."""
        absrow = np.asarray(abs(self.K).sum(axis=1)).ravel()
        return float(np.max(absrow / self.mass))

    def dense(self):
        return self.K.toarray(), np.diag(self.mass)


def _factor(model: Model, omega, cells, locals_):
    if model.metric is None:
        return np.ones(len(locals_))
    return conformal_at(omega, cells, locals_, model.metric.single_site)


def _check_window(model: Model, omega, region: CoverRegion):
    need = model.required_window(region)
    if not need:
        return
    if omega is None or not omega.covers(need):
        missing = len(need) if omega is None else len([g for g in need if g not in omega.window])
        raise WindowTooSmall(f"realization misses {missing} group elements needed by {region.describe()}")


def vertex_fields(region: CoverRegion, omega, model: Model):
    """Conformal factor ``a``, volumes ``mu`` and potential ``V`` on the region."""
    _check_window(model, omega, region)
    cell = region.cell
    local = region.local_indices()
    if model.metric is None:
        a = np.ones(region.n)
    else:
        a = conformal_factor(omega, region, model.metric.single_site)
    mu = np.asarray(cell.vertex_weights)[local] * a
    p = model.potential
    if p is None:
        V = np.zeros(region.n)
    elif p.coupling is None:
        V = np.zeros(region.n) if p.v_per is None else np.asarray(p.v_per, dtype=float)[local]
    else:
        V = alloy_potential(omega, region, p.single_site, p.v_per, p.require_nonnegative)
    return a, mu, V


def assemble(region: CoverRegion, omega, model: Model, bc=BC.DIRICHLET) -> WeightedOperator:
    bc = BC.parse(bc)
    a, mu, V = vertex_fields(region, omega, model)
    n = region.n
    e0, e1 = region.edges[:, 0], region.edges[:, 1]
    w = region.edge_base * np.sqrt(a[e0] * a[e1])

    diag = np.zeros(n)
    np.add.at(diag, e0, w)
    np.add.at(diag, e1, w)
    factor = _BOUNDARY_FACTOR[bc]
    if factor and len(region.crossing_inside):
        inside = region.crossing_inside
        outside_cells = [c for c, _ in region.crossing_outside]
        outside_local = [i for _, i in region.crossing_outside]
        a_out = _factor(model, omega, outside_cells, outside_local)
        wc = region.crossing_base * np.sqrt(a[inside] * a_out)
        np.add.at(diag, inside, factor * wc)
    diag += V * mu

    idx = np.arange(n)
    rows = np.concatenate([idx, e0, e1])
    cols = np.concatenate([idx, e1, e0])
    vals = np.concatenate([diag, -w, -w])
    K = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    K.sort_indices()
    prov = {
        "region": region.describe(),
        "seed": None if omega is None else omega.seed,
        "base_shift": None if omega is None else list(omega.base_shift),
        "model": model.digest(),
        "bc": bc.value,
    }
    return WeightedOperator(K=K, mass=mu, bc=bc, potential=V, provenance=prov)


def volume(region: CoverRegion, omega, model: Model) -> float:
    """Total vertex volume of the region, the trace of M."""
    _, mu, _ = vertex_fields(region, omega, model)
    return float(mu.sum())


def conjugate_check(region: CoverRegion, omega, gamma, model: Model, bc=BC.DIRICHLET) -> bool:
    """Compare the operator on the translated region and shifted field with the
    permutation conjugate of the original one; entrywise exact equality."""
    op = assemble(region, omega, model, bc)
    moved, perm = act(gamma, region)
    other = assemble(moved, None if omega is None else shift(omega, gamma), model, bc)
    P = sp.csr_matrix((np.ones(region.n), (perm, np.arange(region.n))), shape=(region.n, region.n))
    conj = (P @ op.K @ P.T).tocsr()
    conj.sort_indices()
    mass = np.empty_like(op.mass)
    mass[perm] = op.mass
    same_k = conj.shape == other.K.shape and (conj != other.K).nnz == 0
    return bool(same_k and np.array_equal(mass, other.mass))


def write_coordinate(matrix, path):
    """Write a sparse matrix as ``n nnz`` followed by 1-based ``row col value`` lines."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{coo.shape[0]} {coo.nnz}\n")
        for k in order:
            fh.write(f"{coo.row[k] + 1} {coo.col[k] + 1} {float(coo.data[k])!r}\n")


def read_coordinate(path) -> sp.csr_matrix:
    with open(path) as fh:
        n, nnz = map(int, fh.readline().split())
        rows, cols, vals = [], [], []
        for line in fh:
            r, c, v = line.split()
            rows.append(int(r) - 1)
            cols.append(int(c) - 1)
            vals.append(float(v))
    if len(vals) != nnz:
        raise ValueError(f"expected {nnz} entries, found {len(vals)}")
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
