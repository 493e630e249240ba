"""JSON experiment configuration: parsing, validation and canonical serialization.

Layout::

    {
      "model": {"cell": {...}, "potential": {...} | null, "metric": {...} | null},
      "experiments": [{"name": ..., "estimator": ..., ...}, ...],
      "run": {"seed": 0, "workers": 1, "output": "out"}
    }

Errors are raised as :class:`ConfigError` carrying a dotted field path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError
from .fields import DistributionSpec, SingleSiteFunction
from .lattice import FundamentalCell
from .model import MetricSpec, Model, PotentialSpec
from .operator import BC

ESTIMATORS = ("oracle", "ids", "bracket", "trace", "wegner", "selfavg")


def _req(obj, key, path):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "missing")
    return obj[key]


def _int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def _num(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _num_list(value, path, min_len=1):
    if not isinstance(value, list) or len(value) < min_len:
        raise ConfigError(path, f"expected a list of at least {min_len} numbers")
    return tuple(_num(v, f"{path}[{k}]") for k, v in enumerate(value))


def _int_list(value, path, minimum=None):
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a nonempty list of integers")
    return tuple(_int(v, f"{path}[{k}]", minimum) for k, v in enumerate(value))


def _ascending(values, path):
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(path, "grid is not strictly ascending")
    return values


def parse_grid(value, path):
    """Explicit list, or ``{"start", "stop", "num"}`` expanded with linspace."""
    if isinstance(value, dict):
        start = _num(_req(value, "start", path), f"{path}.start")
        stop = _num(_req(value, "stop", path), f"{path}.stop")
        num = _int(_req(value, "num", path), f"{path}.num", 1)
        grid = tuple(float(x) for x in np.linspace(start, stop, num))
    else:
        grid = _num_list(value, path)
    return _ascending(grid, path)


def parse_distribution(obj, path) -> DistributionSpec:
    kind = _req(obj, "kind", path)
    try:
        if kind == "uniform":
            return DistributionSpec.uniform(_num(_req(obj, "a", path), f"{path}.a"), _num(_req(obj, "b", path), f"{path}.b"))
        if kind == "triangular":
            mode = obj.get("mode")
            return DistributionSpec.triangular(
                _num(_req(obj, "a", path), f"{path}.a"), _num(_req(obj, "b", path), f"{path}.b"),
                None if mode is None else _num(mode, f"{path}.mode"))
        if kind == "two-point":
            return DistributionSpec.two_point(
                _num(_req(obj, "p", path), f"{path}.p"), _num(_req(obj, "x0", path), f"{path}.x0"),
                _num(obj.get("x1", 0.0), f"{path}.x1"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.kind", f"unknown distribution {kind!r}")


def parse_single_site(value, path) -> SingleSiteFunction:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a nonempty list of [offset, local, value]")
    entries = []
    for k, e in enumerate(value):
        if not isinstance(e, list) or len(e) != 3 or not isinstance(e[0], list):
            raise ConfigError(f"{path}[{k}]", "expected [offset vector, local index, value]")
        entries.append((_int_list(e[0], f"{path}[{k}][0]"), _int(e[1], f"{path}[{k}][1]", 0), _num(e[2], f"{path}[{k}][2]")))
    try:
        return SingleSiteFunction(tuple(entries))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_cell(obj, path) -> FundamentalCell:
    d = _int(_req(obj, "dimension", path), f"{path}.dimension", 1)
    m = _int(_req(obj, "vertices", path), f"{path}.vertices", 1)
    vw = _num_list(obj.get("vertex_weights", [1.0] * m), f"{path}.vertex_weights")
    edges, ew = [], []
    for k, e in enumerate(obj.get("internal_edges", [])):
        p = f"{path}.internal_edges[{k}]"
        if not isinstance(e, list) or len(e) not in (2, 3):
            raise ConfigError(p, "expected [i, j] or [i, j, weight]")
        edges.append((_int(e[0], p), _int(e[1], p)))
        ew.append(_num(e[2], p) if len(e) == 3 else 1.0)
    bonds, bw = [], []
    for k, b in enumerate(obj.get("cross_bonds", [])):
        p = f"{path}.cross_bonds[{k}]"
        if not isinstance(b, list) or len(b) not in (3, 4) or not isinstance(b[1], list):
            raise ConfigError(p, "expected [i, offset vector, j] or [i, offset vector, j, weight]")
        bonds.append((_int(b[0], p), _int_list(b[1], p), _int(b[2], p)))
        bw.append(_num(b[3], p) if len(b) == 4 else 1.0)
    try:
        return FundamentalCell(d, m, tuple(edges), tuple(bonds), vw, tuple(ew), tuple(bw))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_model(obj, path="model") -> Model:
    cell = parse_cell(_req(obj, "cell", path), f"{path}.cell")
    potential = metric = None
    pot = obj.get("potential")
    if pot is not None:
        pp = f"{path}.potential"
        coupling = None if pot.get("coupling") is None else parse_distribution(pot["coupling"], f"{pp}.coupling")
        v = None if pot.get("single_site") is None else parse_single_site(pot["single_site"], f"{pp}.single_site")
        v_per = None if pot.get("v_per") is None else _num_list(pot["v_per"], f"{pp}.v_per")
        nonneg = pot.get("require_nonnegative", True)
        if not isinstance(nonneg, bool):
            raise ConfigError(f"{pp}.require_nonnegative", "expected true or false")
        potential = PotentialSpec(coupling, v, v_per, nonneg)
    met = obj.get("metric")
    if met is not None:
        mp = f"{path}.metric"
        metric = MetricSpec(parse_distribution(_req(met, "log_factor", mp), f"{mp}.log_factor"),
                            parse_single_site(_req(met, "single_site", mp), f"{mp}.single_site"))
    try:
        return Model(cell, potential, metric)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    estimator: str
    lambdas: tuple = None
    radii: tuple = None
    radius: int = None
    sides: tuple = None
    epsilons: tuple = None
    energies: tuple = None
    lam: float = None
    samples: int = None
    theta_samples: int = None
    bc: str = None
    lower_bc: str = None

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            key = "lambda" if f.name == "lam" else f.name
            out[key] = list(v) if isinstance(v, tuple) else v
        return out


def parse_experiment(obj, path) -> ExperimentSpec:
    name = _req(obj, "name", path)
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        raise ConfigError(f"{path}.name", "expected a plain nonempty string")
    est = _req(obj, "estimator", path)
    if est not in ESTIMATORS:
        raise ConfigError(f"{path}.estimator", f"unknown estimator {est!r}; expected one of {', '.join(ESTIMATORS)}")
    known = {f.name for f in fields(ExperimentSpec)} - {"lam"} | {"lambda"}
    for key in obj:
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown field")
    kw = {"name": name, "estimator": est}
    if "lambdas" in obj:
        kw["lambdas"] = parse_grid(obj["lambdas"], f"{path}.lambdas")
    if "radii" in obj:
        kw["radii"] = _ascending(_int_list(obj["radii"], f"{path}.radii", 0), f"{path}.radii")
    if "radius" in obj:
        kw["radius"] = _int(obj["radius"], f"{path}.radius", 0)
    if "sides" in obj:
        kw["sides"] = _ascending(_int_list(obj["sides"], f"{path}.sides", 1), f"{path}.sides")
    if "epsilons" in obj:
        eps = _ascending(_num_list(obj["epsilons"], f"{path}.epsilons"), f"{path}.epsilons")
        if eps[0] <= 0:
            raise ConfigError(f"{path}.epsilons", "epsilons must be positive")
        kw["epsilons"] = eps
    if "energies" in obj:
        kw["energies"] = _num_list(obj["energies"], f"{path}.energies")
    if "lambda" in obj:
        kw["lam"] = _num(obj["lambda"], f"{path}.lambda")
    if "samples" in obj:
        kw["samples"] = _int(obj["samples"], f"{path}.samples", 1)
    if "theta_samples" in obj:
        kw["theta_samples"] = _int(obj["theta_samples"], f"{path}.theta_samples", 1)
    for key in ("bc", "lower_bc"):
        if key in obj:
            try:
                kw[key] = BC.parse(obj[key]).value
            except ValueError:
                raise ConfigError(f"{path}.{key}", f"unknown boundary condition {obj[key]!r}") from None
    spec = ExperimentSpec(**kw)
    _check_minimums(spec, path)
    return spec


def _check_minimums(spec: ExperimentSpec, path):
    if spec.estimator == "bracket" and spec.samples is not None and spec.samples < 2:
        raise ConfigError(f"{path}.samples", "bracketing needs at least 2 samples")
    if spec.estimator == "selfavg" and spec.samples is not None and spec.samples < 10:
        raise ConfigError(f"{path}.samples", "self-averaging needs at least 10 samples")
    if spec.estimator == "wegner" and spec.samples is not None and spec.samples < 2:
        raise ConfigError(f"{path}.samples", "Wegner rows need at least 2 samples")


@dataclass(frozen=True)
class RunSpec:
    seed: int = 0
    workers: int = 1
    output: str = "out"

    def to_dict(self):
        return {"seed": self.seed, "workers": self.workers, "output": self.output}


@dataclass(frozen=True)
class ExperimentConfig:
    model: Model
    experiments: tuple
    run: RunSpec

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "experiments": [e.to_dict() for e in self.experiments],
            "run": self.run.to_dict(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        """SHA-256 of the canonical serialization, independent of source formatting."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_config(obj) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise ConfigError("<root>", "expected a JSON object")
    for key in obj:
        if key not in ("model", "experiments", "run"):
            raise ConfigError(key, "unknown top-level field")
    model = parse_model(_req(obj, "model", "<root>"))
    exps = obj.get("experiments", [])
    if not isinstance(exps, list):
        raise ConfigError("experiments", "expected a list")
    experiments = tuple(parse_experiment(e, f"experiments[{k}]") for k, e in enumerate(exps))
    names = [e.name for e in experiments]
    if len(set(names)) != len(names):
        raise ConfigError("experiments", "experiment names must be unique")
    run = obj.get("run", {})
    if not isinstance(run, dict):
        raise ConfigError("run", "expected an object")
    seed = _int(run.get("seed", 0), "run.seed")
    workers = _int(run.get("workers", 1), "run.workers", 1)
    output = run.get("output", "out")
    if not isinstance(output, str):
        raise ConfigError("run.output", "expected a string")
    return ExperimentConfig(model, experiments, RunSpec(seed, workers, output))


def loads(text: str) -> ExperimentConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", exc.msg, exc.lineno) from None
    return parse_config(obj)


def load(path) -> ExperimentConfig:
    with open(path) as fh:
        return loads(fh.read())
