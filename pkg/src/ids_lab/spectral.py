"""Eigenvalue counting for the pencil (K, M).

Two routes: a dense symmetric-definite eigensolver (the oracle) and spectrum
slicing, which counts negative pivots of an LDL^T factorization of K - lam*M.
By Sylvester's law of inertia that number equals #{lam_i < lam} because M is
positive diagonal.  The factorization runs on a band after a reverse
Cuthill-McKee reordering and is vectorized over a batch of shifts, so one
pass over the band serves a whole lambda grid.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import OracleCapExceeded, PivotBreakdown
from .operator import WeightedOperator

ORACLE_CAP = 2000
TOL_PIVOT = 1e-10


@dataclass(frozen=True)
class SpectralCount:
    lam: float
    count: int
    method: str
    shift_applied: float = 0.0


def dense_eigs(op: WeightedOperator, vectors: bool = False, cap: int = ORACLE_CAP):
    """Ascending generalized eigenvalues, optionally with M-orthonormal vectors."""
    if op.n > cap:
        raise OracleCapExceeded(f"n={op.n} exceeds the dense oracle cap {cap}")
    K = op.K.toarray()
    if not vectors:
        return sla.eigh(K, np.diag(op.mass), eigvals_only=True)
    scale = 1.0 / np.sqrt(op.mass)
    evals, psi = sla.eigh(scale[:, None] * K * scale[None, :])
    phi = scale[:, None] * psi
    resid = K @ phi - op.mass[:, None] * phi * evals[None, :]
    limit = 1e-8 * max(op.norm_inf, 1.0)
    if resid.size and np.abs(resid).max() > limit:
        raise ArithmeticError(f"eigenpair residual {np.abs(resid).max():.2e} above {limit:.2e}")
    return evals, phi


class _Band:
    """Lower band of the RCM-permuted stiffness: ``lower[r, c] = K[c + r, c]``."""

    def __init__(self, op: WeightedOperator):
        K = op.K
        perm = reverse_cuthill_mckee(K.tocsr(), symmetric_mode=True)
        Kp = K[perm][:, perm].tocoo()
        lower = Kp.row >= Kp.col
        r, c, v = Kp.row[lower], Kp.col[lower], Kp.data[lower]
        self.width = int((r - c).max()) if len(r) else 0
        self.lower = np.zeros((self.width + 1, op.n))
        self.lower[r - c, c] = v
        self.mass = op.mass[perm]
        self.perm = perm


_plans = weakref.WeakKeyDictionary()


def band_of(op: WeightedOperator) -> _Band:
    plan = _plans.get(op)
    if plan is None:
        plan = _plans[op] = _Band(op)
    return plan


def pivot_tolerance(op: WeightedOperator, lam, rel: float = TOL_PIVOT):
    """``rel * max(||K||_inf, |lam| max M)``, falling back to ``rel * max M`` when
    both vanish (the zero operator shifted by zero)."""
    lam = np.asarray(lam, dtype=float)
    scale = np.maximum(op.norm_inf, np.abs(lam) * op.mass.max())
    return rel * np.where(scale > 0, scale, op.mass.max())


def inertia_batch(op: WeightedOperator, lams, rel_tol: float = TOL_PIVOT):
    """Negative-pivot counts of K - lam*M for every lam in ``lams``.

    Returns ``(counts, broken, first_bad)``: lanes where some pivot had modulus
    below the tolerance are flagged in ``broken`` and their counts must not be
    used.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    band = band_of(op)
    b, n = band.width, op.n
    A = np.repeat(band.lower[None, :, :], len(lams), axis=0)
    A[:, 0, :] -= lams[:, None] * band.mass[None, :]
    tol = pivot_tolerance(op, lams, rel_tol)
    neg = np.zeros(len(lams), dtype=np.int64)
    broken = np.zeros(len(lams), dtype=bool)
    first_bad = np.full(len(lams), np.nan)
    for k in range(n):
        d = A[:, 0, k]
        small = np.abs(d) <= tol
        if small.any():
            first_bad = np.where(small & ~broken, d, first_bad)
            broken |= small
            d = np.where(small, tol, d)
        neg += d < 0
        w = min(b, n - 1 - k)
        if w:
            col = A[:, 1:w + 1, k].copy()
            ell = col / d[:, None]
            for j in range(1, w + 1):
                A[:, : w - j + 1, k + j] -= ell[:, j - 1:w] * col[:, j - 1:j]
    return neg, broken, first_bad


def count_below(op: WeightedOperator, lam: float, rel_tol: float = TOL_PIVOT, retry: bool = True) -> SpectralCount:
    """Number of generalized eigenvalues strictly below ``lam`` via inertia.

    A near-singular shift is retried at ``lam - 10 tol`` and then
    ``lam + 10 tol``; the shift actually used is reported.
    """
    return counts_below(op, [lam], rel_tol, retry)[0]


def counts_below(op: WeightedOperator, lams, rel_tol: float = TOL_PIVOT, retry: bool = True):
    lams = np.asarray(lams, dtype=float)
    neg, broken, first_bad = inertia_batch(op, lams, rel_tol)
    out = []
    for k, lam in enumerate(lams):
        if not broken[k]:
            out.append(SpectralCount(float(lam), int(neg[k]), "inertia"))
            continue
        if not retry:
            raise PivotBreakdown(float(lam), float(first_bad[k]), k)
        step = 10 * float(pivot_tolerance(op, lam, rel_tol))
        for delta in (-step, step):
            c, bad, _ = inertia_batch(op, [lam + delta], rel_tol)
            if not bad[0]:
                out.append(SpectralCount(float(lam), int(c[0]), "inertia", delta))
                break
        else:
            raise PivotBreakdown(float(lam), float(first_bad[k]), k)
    return out


def dense_count(op: WeightedOperator, lam: float, evals=None) -> SpectralCount:
    evals = dense_eigs(op) if evals is None else evals
    return SpectralCount(float(lam), int(np.count_nonzero(evals < lam)), "dense")


def counting_function(op: WeightedOperator, vol: float, lambdas, rel_tol: float = TOL_PIVOT) -> np.ndarray:
    """Normalized counts ``#{lam_i < lam} / vol`` on a strictly ascending grid."""
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or np.any(np.diff(lambdas) <= 0):
        raise ValueError("lambda grid must be strictly ascending")
    if vol <= 0:
        raise ValueError("volume must be positive")
    counts = np.array([c.count for c in counts_below(op, lambdas, rel_tol)], dtype=float)
    return counts / vol

