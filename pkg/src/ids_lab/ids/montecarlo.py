"""Monte Carlo estimators over realizations: bracketing, trace and Wegner."""

from __future__ import annotations

import numpy as np
from scipy import stats

from ..errors import InsufficientData, UnsupportedModel
from ..lattice import box, box_sides, build_region, zero
from ..model import Model
from ..operator import BC, assemble
from ..parallel import derive_seeds, pmap
from ..spectral import counts_below, dense_eigs
from .curves import IdsCurve, WegnerFit, WegnerRow, WegnerTable


def ratio_estimate(num: np.ndarray, den: np.ndarray):
    """Ratio of means with a delta-method standard error.

    ``num`` is (samples, k), ``den`` is (samples,).  Identical rows give an
    exactly zero error.
    """
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    n = len(den)
    if np.all(num == num[0]) and np.all(den == den[0]):
        return num[0] / den[0], np.zeros(num.shape[1])
    r = num.mean(axis=0) / den.mean()
    resid = num - r[None, :] * den[:, None]
    se = resid.std(axis=0, ddof=1) / np.sqrt(n) / den.mean()
    return r, se


def _cell_counts(args):
    model, seed, lambdas, lower_bc = args
    region = build_region(model.cell, [zero(model.cell.d)])
    omega = model.realization(seed, region)
    lower = assemble(region, omega, model, lower_bc)
    upper = assemble(region, omega, model, BC.NEUMANN)
    cl = [c.count for c in counts_below(lower, lambdas)]
    cu = [c.count for c in counts_below(upper, lambdas)]
    return cl, cu, lower.volume


def bracketing_bounds(model: Model, lambdas, samples: int, seed: int, workers: int = 1,
                      lower_bc=BC.DECOUPLED):
    """Single-cell lower and upper bounds on the IDS.

    The lower bound uses the decoupled Dirichlet condition by default; the plain
    Dirichlet condition is available through ``lower_bc`` but is not a bound.
    """
    if samples < 2:
        raise ValueError("bracketing needs at least 2 samples")
    lambdas = np.asarray(lambdas, dtype=float)
    n_eval = samples if model.is_random else 1
    seeds = derive_seeds(seed, "bracket", n_eval)
    out = pmap(_cell_counts, [(model, s, lambdas, BC.parse(lower_bc)) for s in seeds], workers)
    cl = np.array([o[0] for o in out], dtype=float)
    cu = np.array([o[1] for o in out], dtype=float)
    vol = np.array([o[2] for o in out])
    lo, lo_se = ratio_estimate(cl, vol)
    hi, hi_se = ratio_estimate(cu, vol)
    meta = {"samples": samples, "lower_bc": BC.parse(lower_bc).value}
    lower = IdsCurve(lambdas, lo, "bracket-lower", seed, "cell", lo_se, meta)
    upper = IdsCurve(lambdas, hi, "bracket-upper", seed, "cell", hi_se, meta)
    return lower, upper


def _trace_sample(args):
    model, seed, lambdas, j, bc = args
    d, m = model.cell.d, model.cell.m
    region = build_region(model.cell, box(d, j))
    omega = model.realization(seed, region)
    op = assemble(region, omega, model, bc)
    evals, phi = dense_eigs(op, vectors=True)
    centre = [region.index(zero(d), i) for i in range(m)]
    weights = (phi[centre, :] ** 2 * op.mass[centre, None]).sum(axis=0)
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    num = cum[np.searchsorted(evals, lambdas, side="left")]
    return num, float(op.mass[centre].sum())


def trace_estimate(model: Model, lambdas, j: int, samples: int, seed: int,
                   workers: int = 1, bc=BC.DIRICHLET) -> IdsCurve:
    """E[tr(chi_F P(lam))] / E[vol(F)] with the projector of the box of radius j."""
    lambdas = np.asarray(lambdas, dtype=float)
    n_eval = samples if model.is_random else 1
    seeds = derive_seeds(seed, "trace", n_eval)
    out = pmap(_trace_sample, [(model, s, lambdas, int(j), BC.parse(bc)) for s in seeds], workers)
    num = np.array([o[0] for o in out])
    vol = np.array([o[1] for o in out])
    val, se = ratio_estimate(num, vol)
    return IdsCurve(lambdas, val, "trace", seed, f"box radius {j}", se, {"samples": samples, "j": j})


def _wegner_sample(args):
    model, seed, side, edges = args
    region = build_region(model.cell, box_sides(model.cell.d, side))
    omega = model.realization(seed, region)
    op = assemble(region, omega, model, BC.DIRICHLET)
    return np.array([c.count for c in counts_below(op, edges)]), op.n


def fit_wegner(rows):
    """Least squares for log(mean) = log C + alpha log eps + beta log |J|."""
    usable = [r for r in rows if r.mean_trace > 0]
    if len(usable) < 3:
        raise InsufficientData(f"only {len(usable)} rows with positive mean trace; need 3")
    X = np.column_stack([np.ones(len(usable)),
                         np.log([r.epsilon for r in usable]),
                         np.log([r.size for r in usable])])
    y = np.log([r.mean_trace for r in usable])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = len(usable) - 3
    if dof > 0 and np.linalg.matrix_rank(X) == 3:
        cov = ss_res / dof * np.linalg.inv(X.T @ X)
        half = stats.t.ppf(0.975, dof) * np.sqrt(np.diag(cov))
    else:
        half = np.full(3, np.inf)
    return WegnerFit(
        log_c=float(coef[0]), alpha=float(coef[1]), beta=float(coef[2]),
        alpha_ci=(float(coef[1] - half[1]), float(coef[1] + half[1])),
        beta_ci=(float(coef[2] - half[2]), float(coef[2] + half[2])),
        r2=float(r2), rows_used=len(usable),
    )


def wegner_experiment(model: Model, energy: float, epsilons, sides, samples: int, seed: int,
                      workers: int = 1) -> WegnerTable:
    """Mean number of Dirichlet eigenvalues in [E - eps, E + eps] on boxes of
    ``side**d`` cells, and the fitted power laws in eps and |J|.

    All epsilons share the realizations drawn for a given box side.
    """
    if not model.is_random:
        raise UnsupportedModel("Wegner experiments need an alloy potential or alloy metric model")
    epsilons = [float(e) for e in epsilons]
    sides = [int(s) for s in sides]
    if not epsilons or not sides or samples < 2:
        raise ValueError("need epsilons, box sides and at least 2 samples")
    if min(epsilons) <= 0:
        raise ValueError("epsilons must be positive")
    edges = np.array([energy - e for e in epsilons] + [energy + e for e in epsilons])
    rows = []
    for side in sides:
        seeds = derive_seeds(seed, "wegner", samples, side)
        out = pmap(_wegner_sample, [(model, s, side, edges) for s in seeds], workers)
        counts = np.array([o[0] for o in out])
        k = len(epsilons)
        traces = counts[:, k:] - counts[:, :k]
        size = side ** model.cell.d
        for e, t in zip(epsilons, traces.T):
            rows.append(WegnerRow(e, size, float(t.mean()), float(t.std(ddof=1) / np.sqrt(samples)), samples))
    return WegnerTable(float(energy), tuple(rows), fit_wegner(rows), seed)
