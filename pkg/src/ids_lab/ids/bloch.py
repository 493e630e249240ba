"""Floquet-Bloch IDS of a periodic model, used as an independent oracle."""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..errors import NotPeriodic
from ..model import Model
from .curves import IdsCurve


def periodic_cell_data(model: Model):
    """Volumes, potential and bond weights of a model without randomness."""
    if model.is_random:
        raise NotPeriodic("the Bloch oracle needs a model without random components")
    cell = model.cell
    m = cell.m
    a = np.ones(m)
    if model.metric is not None:
        c = model.metric.log_factor.support[0]
        a = math.exp(c) * np.asarray(model.metric.single_site.partition_sums(m))
    mu = np.asarray(cell.vertex_weights) * a
    V = np.zeros(m)
    p = model.potential
    if p is not None:
        if p.v_per is not None:
            V = V + np.asarray(p.v_per, dtype=float)
        if p.coupling is not None:
            q = p.coupling.support[0]
            V = V + q * np.asarray(p.single_site.partition_sums(m))
    internal = [(i, j, w * math.sqrt(a[i] * a[j])) for (i, j), w in zip(cell.internal_edges, cell.edge_weights)]
    bonds = [(i, off, j, w * math.sqrt(a[i] * a[j])) for (i, off, j), w in zip(cell.cross_bonds, cell.bond_weights)]
    return mu, V, internal, bonds


def fiber_matrices(model: Model, thetas: np.ndarray) -> np.ndarray:
    """Stack of Hermitian m x m fibers M^{-1/2} K(theta) M^{-1/2}; thetas is (T, d)."""
    mu, V, internal, bonds = periodic_cell_data(model)
    m = len(mu)
    T = len(thetas)
    H = np.zeros((T, m, m), dtype=complex)
    for i, j, w in internal:
        H[:, i, i] += w
        H[:, j, j] += w
        H[:, i, j] -= w
        H[:, j, i] -= w
    for i, off, j, w in bonds:
        phase = np.exp(1j * thetas @ np.asarray(off, dtype=float))
        H[:, i, i] += w
        H[:, j, j] += w
        H[:, i, j] -= w * phase
        H[:, j, i] -= w * np.conj(phase)
    idx = np.arange(m)
    H[:, idx, idx] += V * mu
    s = 1.0 / np.sqrt(mu)
    return H * s[None, :, None] * s[None, None, :]


def bloch_oracle(model: Model, lambdas, theta_samples: int = 4096, chunk: int = 65536) -> IdsCurve:
    """IDS from a midpoint quasimomentum grid with ``theta_samples`` points per axis."""
    lambdas = np.asarray(lambdas, dtype=float)
    mu, _, _, _ = periodic_cell_data(model)
    d = model.cell.d
    axis = 2 * np.pi * (np.arange(theta_samples) + 0.5) / theta_samples
    total = theta_samples**d
    grid = itertools.product(axis, repeat=d)
    counts = np.zeros(len(lambdas))
    while True:
        block = np.array(list(itertools.islice(grid, chunk)), dtype=float).reshape(-1, d)
        if not len(block):
            break
        ev = np.sort(np.linalg.eigvalsh(fiber_matrices(model, block)).ravel())
        counts += np.searchsorted(ev, lambdas, side="left")
    values = counts / total / mu.sum()
    return IdsCurve(lambdas, values, "bloch", region="fiber", meta={"theta_samples": theta_samples})
