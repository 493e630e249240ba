"""Model description: cell geometry plus the random potential and random metric."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .fields import DistributionSpec, OmegaRealization, SingleSiteFunction, sample_omega
from .lattice import CoverRegion, FundamentalCell, sub


@dataclass(frozen=True)
class PotentialSpec:
    coupling: DistributionSpec = None
    single_site: SingleSiteFunction = None
    v_per: tuple = None
    require_nonnegative: bool = True


@dataclass(frozen=True)
class MetricSpec:
    log_factor: DistributionSpec
    single_site: SingleSiteFunction


@dataclass(frozen=True)
class Model:
    """A random Schroedinger operator family on the cover of ``cell``.

    ``potential=None`` means V = 0; ``metric=None`` means the reference metric
    (conformal factor identically 1).
    """

    cell: FundamentalCell
    potential: PotentialSpec = None
    metric: MetricSpec = None

    def __post_init__(self):
        m, d = self.cell.m, self.cell.d
        p = self.potential
        if p is not None:
            if p.v_per is not None and len(p.v_per) != m:
                raise ValueError("v_per needs one value per local vertex")
            if p.coupling is not None:
                if p.single_site is None:
                    raise ValueError("a random coupling needs a single-site potential")
                p.single_site.validate(m, d)
        if self.metric is not None:
            self.metric.single_site.validate(m, d)

    @classmethod
    def free(cls, d: int = 1) -> "Model":
        return cls(FundamentalCell.lattice(d))

    @classmethod
    def anderson(cls, d: int = 1, a: float = 0.0, b: float = 1.0) -> "Model":
        """Alloy potential with uniform couplings and v the indicator of the cell."""
        cell = FundamentalCell.lattice(d)
        return cls(cell, PotentialSpec(DistributionSpec.uniform(a, b), SingleSiteFunction.on_cell(1, d)))

    @property
    def coupling(self):
        p = self.potential
        if p is None or p.coupling is None:
            return None
        return p.coupling

    @property
    def log_factor(self):
        return None if self.metric is None else self.metric.log_factor

    @property
    def random_potential(self) -> bool:
        c = self.coupling
        return c is not None and not c.is_degenerate

    @property
    def random_metric(self) -> bool:
        lf = self.log_factor
        return lf is not None and not lf.is_degenerate

    @property
    def is_random(self) -> bool:
        return self.random_potential or self.random_metric

    def required_window(self, region: CoverRegion) -> set:
        """Group elements whose field values enter the operator on ``region``."""
        need = set()
        if self.coupling is not None:
            for g in region.cells:
                for off in self.potential.single_site.offsets():
                    need.add(sub(g, off))
        if self.metric is not None:
            touched = set(region.cells) | {c for c, _ in region.crossing_outside}
            for g in touched:
                for off in self.metric.single_site.offsets():
                    need.add(sub(g, off))
        return need

    def realization(self, seed: int, region: CoverRegion = None) -> OmegaRealization:
        window = self.required_window(region) if region is not None else ()
        return sample_omega(seed, window, (self.coupling, self.log_factor), d=self.cell.d)

    def to_dict(self) -> dict:
        c = self.cell
        out = {
            "cell": {
                "dimension": c.d,
                "vertices": c.m,
                "vertex_weights": list(c.vertex_weights),
                "internal_edges": [[i, j, w] for (i, j), w in zip(c.internal_edges, c.edge_weights)],
                "cross_bonds": [[i, list(off), j, w] for (i, off, j), w in zip(c.cross_bonds, c.bond_weights)],
            },
            "potential": None,
            "metric": None,
        }
        p = self.potential
        if p is not None:
            out["potential"] = {
                "coupling": None if p.coupling is None else p.coupling.to_dict(),
                "single_site": None if p.single_site is None else p.single_site.to_list(),
                "v_per": None if p.v_per is None else list(p.v_per),
                "require_nonnegative": p.require_nonnegative,
            }
        if self.metric is not None:
            out["metric"] = {
                "log_factor": self.metric.log_factor.to_dict(),
                "single_site": self.metric.single_site.to_list(),
            }
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]
