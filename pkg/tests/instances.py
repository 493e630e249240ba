"""Random test instances shared by the unit and acceptance tests."""

import numpy as np

from ids_lab.fields import DistributionSpec, SingleSiteFunction
from ids_lab.lattice import FundamentalCell, box_sides, build_region
from ids_lab.model import MetricSpec, Model, PotentialSpec
from ids_lab.operator import BC, assemble

BCS = (BC.DIRICHLET, BC.NEUMANN, BC.DECOUPLED)


def random_cell(rng, d):
    if d == 1 and rng.random() < 0.4:
        return FundamentalCell.ladder()
    if rng.random() < 0.3:
        w = tuple(float(x) for x in rng.uniform(0.5, 2.0, size=d))
        return FundamentalCell(d, 1, cross_bonds=tuple((0, tuple(int(k == a) for k in range(d)), 0)
                                                       for a in range(d)), bond_weights=w,
                               vertex_weights=(float(rng.uniform(0.5, 2.0)),))
    return FundamentalCell.lattice(d)


def random_model(rng, d):
    cell = random_cell(rng, d)
    m = cell.m
    zero = (0,) * d
    entries = [(zero, i, float(rng.uniform(0.5, 1.5))) for i in range(m)]
    if rng.random() < 0.5:
        off = tuple(int(x) for x in rng.integers(-1, 2, size=d))
        entries.append((off, int(rng.integers(m)), float(rng.uniform(0.0, 1.0))))
    v = SingleSiteFunction(tuple(entries))
    kind = rng.integers(3)
    potential = metric = None
    if kind in (0, 2):
        b = float(rng.uniform(0.5, 4.0))
        potential = PotentialSpec(DistributionSpec.uniform(0.0, b), v,
                                  tuple(float(x) for x in rng.uniform(0, 1, size=m)))
    if kind in (1, 2):
        u = SingleSiteFunction.on_cell(m, d, float(rng.uniform(0.5, 2.0)))
        metric = MetricSpec(DistributionSpec.triangular(-0.5, 0.5), u)
    return Model(cell, potential, metric)


def random_region(rng, model, max_n=200):
    d, m = model.cell.d, model.cell.m
    if d == 1:
        side = int(rng.integers(1, max_n // m + 1))
        cells = box_sides(1, side)
    else:
        side = int(rng.integers(1, int(np.sqrt(max_n / m)) + 1))
        cells = box_sides(2, side)
    return build_region(model.cell, cells)


def random_instance(rng, d=None, max_n=200):
    d = int(rng.integers(1, 3)) if d is None else d
    model = random_model(rng, d)
    region = random_region(rng, model, max_n)
    seed = int(rng.integers(2**32))
    omega = model.realization(seed, region)
    bc = BCS[int(rng.integers(3))]
    return model, region, omega, bc


def random_operator(rng, d=None, max_n=200):
    model, region, omega, bc = random_instance(rng, d, max_n)
    return assemble(region, omega, model, bc)
