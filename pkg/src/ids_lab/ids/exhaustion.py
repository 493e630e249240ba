"""Folner exhaustion of the IDS along boxes, plus its convergence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..lattice import FolnerSequence, box, build_region, is_tempered
from ..model import Model
from ..operator import BC, assemble
from ..parallel import derive_seeds, pmap
from ..spectral import counting_function
from .bloch import bloch_oracle
from .curves import IdsCurve


@dataclass(frozen=True)
class ExhaustionResult:
    curves: tuple
    radii: tuple
    sup_steps: tuple
    suspected_atoms: tuple
    tempered_ratio: float

    @property
    def final(self) -> IdsCurve:
        return self.curves[-1]


def exhaustion_estimate(model: Model, seed: int, folner: FolnerSequence, lambdas,
                        bc=BC.DIRICHLET, atom_jump: float = 0.05) -> ExhaustionResult:
    """Normalized counting functions on phi(I_j) for one fixed realization.

    ``sup_steps[k]`` is the sup-distance between curves k and k+1.  Grid points
    where the last two curves differ by more than ``atom_jump`` are reported as
    suspected atoms of the density of states.
    """
    ok, ratio = is_tempered(folner)
    if not ok:
        raise ValueError(f"Folner sequence is not tempered (sup ratio {ratio})")
    lambdas = np.asarray(lambdas, dtype=float)
    regions = [build_region(model.cell, I) for I in folner]
    omega = model.realization(seed, regions[-1])
    curves = []
    radii = folner.radii or tuple(range(1, len(folner) + 1))
    for j, region in zip(radii, regions):
        op = assemble(region, omega, model, bc)
        vals = counting_function(op, op.volume, lambdas)
        curves.append(IdsCurve(lambdas, vals, f"exhaustion-{BC.parse(bc).value}", seed,
                               region.describe(), meta={"j": j, "n": op.n, "volume": op.volume}))
    steps = tuple(a.sup_distance(b) for a, b in zip(curves, curves[1:]))
    atoms = ()
    if len(curves) > 1:
        jump = np.abs(curves[-1].values - curves[-2].values)
        atoms = tuple(float(x) for x in lambdas[jump > atom_jump])
    return ExhaustionResult(tuple(curves), tuple(radii), steps, atoms, float(ratio))


def oracle_convergence(model: Model, folner: FolnerSequence, lambdas, theta_samples: int = 4096):
    """Compare periodic exhaustion with the Bloch oracle.

    Returns ``(rows, C)`` with rows ``(j, sup_error, boundary_ratio)`` where the
    boundary ratio is crossing bonds over volume, and ``C`` the smallest constant
    with ``sup_error <= C * boundary_ratio`` for all rows.
    """
    oracle = bloch_oracle(model, lambdas, theta_samples)
    result = exhaustion_estimate(model, 0, folner, lambdas)
    rows = []
    for j, I, curve in zip(result.radii, folner.sets, result.curves):
        crossing = len(build_region(model.cell, I).crossing_inside)
        rows.append((j, curve.sup_distance(oracle), crossing / curve.meta["volume"]))
    C = max(err / ratio for _, err, ratio in rows if ratio > 0)
    return rows, C


def _selfavg_sample(args):
    model, seed, lam, j = args
    region = build_region(model.cell, box(model.cell.d, j))
    omega = model.realization(seed, region)
    op = assemble(region, omega, model, BC.DIRICHLET)
    return float(counting_function(op, op.volume, [lam])[0])


def self_averaging(model: Model, lam: float, js, samples: int, seed: int, workers: int = 1):
    """Ensemble mean and variance of N^j(lam) over independent realizations.

    Rows are ``(j, mean, variance, n_samples)`` with the unbiased variance.
    """
    if samples < 10:
        raise ValueError("self-averaging needs at least 10 samples")
    n_eval = samples if model.is_random else 1
    tasks = []
    for j in js:
        tasks += [(model, s, float(lam), int(j)) for s in derive_seeds(seed, "selfavg", n_eval, j)]
    values = np.array(pmap(_selfavg_sample, tasks, workers)).reshape(len(js), n_eval)
    rows = []
    for j, v in zip(js, values):
        if np.all(v == v[0]):
            mean, var = float(v[0]), 0.0
        else:
            mean, var = float(v.mean()), float(v.var(ddof=1))
        rows.append((int(j), mean, var, samples))
    return rows
