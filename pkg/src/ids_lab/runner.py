"""Runs the experiments of a configuration and writes their artifacts."""

from __future__ import annotations

import logging
import os
import platform
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .config import ExperimentConfig, ExperimentSpec
from .errors import IdsLabError
from .ids import (
    bloch_oracle, bracketing_bounds, exhaustion_estimate, self_averaging, trace_estimate,
    wegner_experiment,
)
from .lattice import box, box_folner, build_region
from .model import Model
from .operator import BC, assemble
from .output import ensure_dir, plot_curves, plot_wegner, write_csv, write_json
from .parallel import derive_seeds

log = logging.getLogger(__name__)


class ExperimentFailed(Exception):
    def __init__(self, name, error):
        super().__init__(f"experiment {name!r} failed: {type(error).__name__}: {error}")
        self.name = name
        self.error = error


def spectral_top(model: Model, seed: int = 0) -> float:
    """Gershgorin bound of one small realization; only used for default grids."""
    region = build_region(model.cell, box(model.cell.d, 1))
    op = assemble(region, model.realization(seed, region), model, BC.DIRICHLET)
    return op.gershgorin_upper()


def with_defaults(spec: ExperimentSpec, model: Model) -> ExperimentSpec:
    top = spectral_top(model)
    kw = {}
    if spec.lambdas is None and spec.estimator in ("oracle", "ids", "bracket", "trace"):
        kw["lambdas"] = tuple(float(x) for x in np.linspace(-0.5, top + 0.5, 41))
    defaults = {
        "oracle": {"theta_samples": 4096 if model.cell.d == 1 else 64},
        "ids": {"radii": (4, 8, 16, 32), "bc": "dirichlet"},
        "bracket": {"samples": 200, "lower_bc": "decoupled"},
        "trace": {"radius": 16, "samples": 20, "bc": "dirichlet"},
        "wegner": {"energies": (round(top / 2, 6),), "epsilons": (0.05, 0.1, 0.2, 0.4),
                   "sides": (8, 16, 32), "samples": 200},
        "selfavg": {"lam": round(top / 2, 6), "radii": (4, 8, 16, 32), "samples": 50},
    }[spec.estimator]
    for key, value in defaults.items():
        if getattr(spec, key) is None:
            kw[key] = value
    return replace(spec, **kw)


def default_experiment(estimator: str) -> ExperimentSpec:
    return ExperimentSpec(name=estimator, estimator=estimator)


def _run_one(spec, model, seed, workers, out, digest, plots):
    name = spec.name
    files = []

    def path(suffix):
        p = os.path.join(out, f"{name}{suffix}")
        files.append(os.path.basename(p))
        return p

    lam = np.asarray(spec.lambdas) if spec.lambdas is not None else None
    if spec.estimator == "oracle":
        curve = bloch_oracle(model, lam, spec.theta_samples)
        write_csv(path(".csv"), ["lambda", "N_value", "theta_samples"],
                  [(x, y, spec.theta_samples) for x, y in zip(lam, curve.values)], digest)
        if plots:
            plot_curves(path(".svg"), [("Bloch", lam, curve.values)], "Bloch-Floquet IDS")

    elif spec.estimator == "ids":
        folner = box_folner(model.cell.d, radii=spec.radii)
        res = exhaustion_estimate(model, seed, folner, lam, bc=spec.bc)
        rows = [(j, x, y) for j, c in zip(res.radii, res.curves) for x, y in zip(lam, c.values)]
        write_csv(path(".csv"), ["j", "lambda", "N_value"], rows, digest)
        header = ["j", "n", "sup_step"]
        oracle = None
        if not model.is_random:
            oracle = bloch_oracle(model, lam, 4096 if model.cell.d == 1 else 64)
            header.append("sup_error")
        conv = []
        for k, (j, c) in enumerate(zip(res.radii, res.curves)):
            row = [j, c.meta["n"], res.sup_steps[k - 1] if k else float("nan")]
            if oracle is not None:
                row.append(c.sup_distance(oracle))
            conv.append(row)
        write_csv(path("_convergence.csv"), header, conv, digest)
        if plots:
            curves = [(f"j={j}", lam, c.values) for j, c in zip(res.radii, res.curves)]
            if oracle is not None:
                curves.append(("Bloch", lam, oracle.values))
            plot_curves(path(".svg"), curves, "Folner exhaustion")

    elif spec.estimator == "bracket":
        lo, hi = bracketing_bounds(model, lam, spec.samples, seed, workers, spec.lower_bc)
        rows = zip(lam, lo.values, lo.stderr, hi.values, hi.stderr)
        write_csv(path(".csv"), ["lambda", "lower", "lower_se", "upper", "upper_se"], rows, digest)
        if plots:
            plot_curves(path(".svg"), [("lower", lam, lo.values), ("upper", lam, hi.values)],
                        "single-cell bracketing")

    elif spec.estimator == "trace":
        curve = trace_estimate(model, lam, spec.radius, spec.samples, seed, workers, spec.bc)
        rows = [(x, y, s, spec.samples) for x, y, s in zip(lam, curve.values, curve.stderr)]
        write_csv(path(".csv"), ["lambda", "N_value", "se", "n_samples"], rows, digest)
        if plots:
            plot_curves(path(".svg"), [("trace", lam, curve.values)], "fundamental-cell trace")

    elif spec.estimator == "wegner":
        for k, energy in enumerate(spec.energies):
            table = wegner_experiment(model, energy, spec.epsilons, spec.sides, spec.samples,
                                      derive_seeds(seed, "energy", 1, k)[0], workers)
            tag = f"_E{k}" if len(spec.energies) > 1 else ""
            rows = [(r.epsilon, r.size, r.mean_trace, r.se, r.n_samples) for r in table.rows]
            write_csv(path(f"{tag}.csv"), ["epsilon", "J_size", "mean_trace", "se", "n_samples"], rows, digest)
            f = table.fit
            write_json(path(f"{tag}_fit.json"), {
                "config_sha256": digest, "energy": energy, "log_C": f.log_c,
                "alpha": f.alpha, "alpha_ci": list(f.alpha_ci), "beta": f.beta, "beta_ci": list(f.beta_ci),
                "r2": f.r2, "rows_used": f.rows_used, "holder_continuity": f.holder,
            })
            if plots:
                plot_wegner(path(f"{tag}.svg"), table)

    elif spec.estimator == "selfavg":
        rows = self_averaging(model, spec.lam, spec.radii, spec.samples, seed, workers)
        write_csv(path(".csv"), ["j", "lambda", "mean", "variance", "n_samples"],
                  [(j, spec.lam, m, v, n) for j, m, v, n in rows], digest)
        if plots:
            plot_curves(path(".svg"), [("variance", [r[0] for r in rows], [r[2] for r in rows])],
                        f"self-averaging at lambda={spec.lam}", "j", "variance")
    return files


def run_experiments(config: ExperimentConfig, only: str = None, workers: int = 1, out: str = None,
                    plots: bool = True, seed: int = None) -> dict:
    """Run all experiments (or those of one estimator) and write the manifest."""
    out = ensure_dir(out or config.run.output)
    master = config.run.seed if seed is None else seed
    specs = list(config.experiments)
    if only is not None:
        specs = [s for s in specs if s.estimator == only] or [default_experiment(only)]
    digest = config.digest()
    started = time.time()
    manifest = {
        "config_sha256": digest,
        "seed": master,
        "workers": workers,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "versions": {
            "ids_lab": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
        },
        "model_discretization": "geometric-mean edge weights, linear vertex volumes",
        "experiments": [],
    }
    for spec in specs:
        spec = with_defaults(spec, config.model)
        exp_seed = derive_seeds(master, f"experiment:{spec.name}", 1)[0]
        t0 = time.time()
        log.info("running %s (%s)", spec.name, spec.estimator)
        try:
            files = _run_one(spec, config.model, exp_seed, workers, out, digest, plots)
        except IdsLabError as exc:
            raise ExperimentFailed(spec.name, exc) from exc
        manifest["experiments"].append({
            "name": spec.name, "estimator": spec.estimator, "seed": exp_seed,
            "parameters": spec.to_dict(), "outputs": files, "wall_time_s": round(time.time() - t0, 3),
        })
    manifest["wall_time_s"] = round(time.time() - started, 3)
    write_json(os.path.join(out, "manifest.json"), manifest)
    return manifest
