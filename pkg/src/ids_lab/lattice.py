"""Covering geometry: the group Z^d, fundamental cells, regions and Folner sets.

Group elements are plain tuples of ints.  A vertex of the cover is a pair
``(gamma, i)`` where ``gamma`` labels a translated copy of the cell and ``i`` is
the local vertex index.  Regions enumerate their vertices lexicographically by
cell and then by local index; that order is translation invariant, which is what
makes the equivariance checks exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import NonMonotoneSequence

GroupElement = tuple


def element(coords) -> tuple:
    return tuple(int(c) for c in coords)


def add(a, b) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def sub(a, b) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def neg(a) -> tuple:
    return tuple(-x for x in a)


def zero(d: int) -> tuple:
    return (0,) * d


def _positive(offset) -> bool:
    for c in offset:
        if c:
            return c > 0
    return False


@dataclass(frozen=True)
class FundamentalCell:
    """Finite weighted graph tiled by Z^d.

    ``cross_bonds`` hold ``(i, offset, j)``: local vertex ``i`` of cell ``gamma``
    is joined to local vertex ``j`` of cell ``gamma + offset``.  Bonds are
    normalized so the first nonzero offset coordinate is positive; the reversed
    bond is implied and may not be listed separately.
    """

    d: int
    m: int
    internal_edges: tuple = ()
    cross_bonds: tuple = ()
    vertex_weights: tuple = ()
    edge_weights: tuple = ()
    bond_weights: tuple = ()

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ValueError("cell needs d >= 1 and m >= 1")
        vw = tuple(float(w) for w in self.vertex_weights) or (1.0,) * self.m
        ew = tuple(float(w) for w in self.edge_weights) or (1.0,) * len(self.internal_edges)
        bw = tuple(float(w) for w in self.bond_weights) or (1.0,) * len(self.cross_bonds)
        if len(vw) != self.m or len(ew) != len(self.internal_edges) or len(bw) != len(self.cross_bonds):
            raise ValueError("weight lists do not match vertex/edge/bond counts")
        if min(vw + ew + bw) <= 0:
            raise ValueError("all base weights must be strictly positive")

        edges, seen = [], set()
        for i, j in self.internal_edges:
            i, j = int(i), int(j)
            self._check_local(i, j)
            if i == j:
                raise ValueError(f"internal self-loop at vertex {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate internal edge {key}")
            seen.add(key)
            edges.append(key)

        bonds, seen = [], set()
        for i, off, j in self.cross_bonds:
            i, j, off = int(i), int(j), element(off)
            self._check_local(i, j)
            if len(off) != self.d:
                raise ValueError(f"bond offset {off} is not in Z^{self.d}")
            if not any(off):
                raise ValueError("cross bond offsets must be nonzero")
            if not _positive(off):
                i, off, j = j, neg(off), i
            if (i, off, j) in seen:
                raise ValueError(f"bond {(i, off, j)} listed twice (possibly in both orientations)")
            seen.add((i, off, j))
            bonds.append((i, off, j))

        object.__setattr__(self, "internal_edges", tuple(edges))
        object.__setattr__(self, "cross_bonds", tuple(bonds))
        object.__setattr__(self, "vertex_weights", vw)
        object.__setattr__(self, "edge_weights", ew)
        object.__setattr__(self, "bond_weights", bw)

        patch = build_region(self, box(self.d, 1))
        if patch.n > 1:
            ncomp, _ = connected_components(patch.adjacency(), directed=False)
            if ncomp != 1:
                raise ValueError("cover graph is disconnected on the 3^d patch")

    def _check_local(self, *idx):
        for k in idx:
            if not 0 <= k < self.m:
                raise ValueError(f"local vertex {k} out of range for m={self.m}")

    @property
    def volume(self) -> float:
        return float(sum(self.vertex_weights))

    @classmethod
    def lattice(cls, d: int = 1) -> "FundamentalCell":
        """Single-vertex cell of the nearest-neighbour Z^d lattice."""
        bonds = tuple((0, tuple(int(k == a) for k in range(d)), 0) for a in range(d))
        return cls(d=d, m=1, cross_bonds=bonds)

    @classmethod
    def ladder(cls) -> "FundamentalCell":
        """Two-rail ladder: one rung per cell and two rails of offset +1."""
        return cls(d=1, m=2, internal_edges=((0, 1),), cross_bonds=((0, (1,), 0), (1, (1,), 1)))


def box(d: int, radius: int) -> frozenset:
    """Centered box {-radius, ..., radius}^d."""
    r = range(-radius, radius + 1)
    return frozenset(itertools.product(r, repeat=d))


def box_sides(d: int, side: int) -> frozenset:
    """Box {0, ..., side-1}^d with exactly side**d elements."""
    return frozenset(itertools.product(range(side), repeat=d))


@dataclass(frozen=True)
class FolnerSequence:
    sets: tuple
    shape: str = "box"
    radii: tuple = ()

    def __post_init__(self):
        if not self.sets or any(len(s) == 0 for s in self.sets):
            raise ValueError("Folner sets must be nonempty")

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)


def box_folner(d: int, j_max: int = None, radii: Sequence[int] = None) -> FolnerSequence:
    """Centered boxes I_j for j = 1..j_max, or for the given increasing radii."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if radii is None:
        if j_max is None or j_max < 1:
            raise ValueError("j_max must be >= 1")
        radii = range(1, j_max + 1)
    radii = tuple(int(r) for r in radii)
    if any(r < 0 for r in radii):
        raise ValueError("radii must be nonnegative")
    return FolnerSequence(tuple(box(d, r) for r in radii), "box", radii)


def folner_defect(I: Iterable, gamma) -> Fraction:
    """|I symmetric-difference (I + gamma)| / |I| by set enumeration."""
    I = frozenset(I)
    if not I:
        raise ValueError("I must be nonempty")
    shifted = {add(x, gamma) for x in I}
    return Fraction(len(I.symmetric_difference(shifted)), len(I))


def sumset_size(A: Iterable, B: Iterable) -> int:
    a = np.array(sorted(A), dtype=np.int64)
    b = np.array(sorted(B), dtype=np.int64)
    if a.ndim == 1:
        a, b = a[:, None], b[:, None]
    s = (a[:, None, :] + b[None, :, :]).reshape(-1, a.shape[1])
    return len(np.unique(s, axis=0))


def is_tempered(seq: FolnerSequence, bound: float = None):
    """Check monotonicity and the sumset growth ratio |I_{j+1} - I_j| / |I_{j+1}|.

    Returns ``(ok, sup_ratio)``.  ``bound`` defaults to ``2**d + 1``.
    """
    sets = [frozenset(s) for s in seq.sets]
    for k in range(len(sets) - 1):
        if not sets[k] <= sets[k + 1]:
            raise NonMonotoneSequence(f"I_{k} is not contained in I_{k + 1}")
    d = len(next(iter(sets[0])))
    if bound is None:
        bound = 2**d + 1
    if len(sets) == 1:
        return True, Fraction(1)
    sup = Fraction(0)
    for small, big in zip(sets, sets[1:]):
        ratio = Fraction(sumset_size(big, [neg(x) for x in small]), len(big))
        sup = max(sup, ratio)
    return sup < bound, sup


@dataclass(frozen=True, eq=False)
class CoverRegion:
    """Vertices ``(gamma, i)`` for gamma in ``cells`` with canonical flat indexing.

    ``edges`` (E, 2) flat index pairs with base weights ``edge_base``;
    ``crossing`` rows are ``(inside flat index, bond number)`` and
    ``crossing_outside`` holds the outside vertex ``(cell, local)`` of each.
    """

    cell: FundamentalCell
    cells: tuple
    edges: np.ndarray = field(repr=False)
    edge_base: np.ndarray = field(repr=False)
    crossing_inside: np.ndarray = field(repr=False)
    crossing_base: np.ndarray = field(repr=False)
    crossing_outside: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.cells) * self.cell.m

    @property
    def cell_set(self) -> frozenset:
        return frozenset(self.cells)

    def index(self, gamma, i: int) -> int:
        return self._rank[element(gamma)] * self.cell.m + i

    def vertex(self, k: int):
        return self.cells[k // self.cell.m], k % self.cell.m

    @property
    def _rank(self):
        rank = self.__dict__.get("_rank_cache")
        if rank is None:
            rank = {g: r for r, g in enumerate(self.cells)}
            object.__setattr__(self, "_rank_cache", rank)
        return rank

    def local_indices(self) -> np.ndarray:
        return np.tile(np.arange(self.cell.m), len(self.cells))

    def cell_array(self) -> np.ndarray:
        """(n, d) array with the cell coordinate of every flat vertex."""
        return np.repeat(np.array(self.cells, dtype=np.int64).reshape(-1, self.cell.d), self.cell.m, axis=0)

    def adjacency(self):
        e = self.edges
        data = np.ones(2 * len(e))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()

    def __eq__(self, other):
        return isinstance(other, CoverRegion) and self.cell == other.cell and self.cells == other.cells

    def __hash__(self):
        return hash((self.cell, self.cells))

    def describe(self) -> str:
        lo = np.min(self.cells, axis=0)
        hi = np.max(self.cells, axis=0)
        return f"cells={len(self.cells)} n={self.n} bbox={list(map(int, lo))}..{list(map(int, hi))}"


def build_region(cell: FundamentalCell, I: Iterable) -> CoverRegion:
    """Restrict the cover to the copies of the cell labelled by ``I``."""
    cells = tuple(sorted(element(g) for g in I))
    if not cells:
        raise ValueError("region needs at least one cell")
    if len(set(cells)) != len(cells):
        raise ValueError("duplicate cells")
    rank = {g: r for r, g in enumerate(cells)}
    m = cell.m
    edges, ebase = [], []
    cin, cbase, cout = [], [], []
    for r, g in enumerate(cells):
        base = r * m
        for (i, j), w in zip(cell.internal_edges, cell.edge_weights):
            edges.append((base + i, base + j))
            ebase.append(w)
        for (i, off, j), w in zip(cell.cross_bonds, cell.bond_weights):
            target = add(g, off)
            t = rank.get(target)
            if t is not None:
                edges.append((base + i, t * m + j))
                ebase.append(w)
            else:
                cin.append(base + i)
                cbase.append(w)
                cout.append((target, j))
        for (i, off, j), w in zip(cell.cross_bonds, cell.bond_weights):
            source = sub(g, off)
            if source not in rank:
                cin.append(base + j)
                cbase.append(w)
                cout.append((source, i))
    return CoverRegion(
        cell=cell,
        cells=cells,
        edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        edge_base=np.array(ebase, dtype=float),
        crossing_inside=np.array(cin, dtype=np.int64),
        crossing_base=np.array(cbase, dtype=float),
        crossing_outside=tuple(cout),
    )


def act(gamma, region: CoverRegion):
    """Translate ``region`` by ``gamma``.

    Returns ``(translated, perm)`` where ``perm[k]`` is the flat index, in the
    canonical indexing of the translated region, of the image of vertex ``k``.
    """
    gamma = element(gamma)
    moved = build_region(region.cell, [add(g, gamma) for g in region.cells])
    m = region.cell.m
    perm = np.empty(region.n, dtype=np.int64)
    for r, g in enumerate(region.cells):
        t = moved.index(add(g, gamma), 0)
        perm[r * m:(r + 1) * m] = np.arange(t, t + m)
    return moved, perm
