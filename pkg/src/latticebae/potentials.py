"""Discrete single- and double-layer potentials on the lattice.

With G the lattice Green's function, the single-layer kernel is

    S(m, n) = G(m - n),

and the double-layer kernel differences G against the exterior
connections D_n of each source node (its neighbours in M- outside the
boundary layer):

    D(m, n) = sum_{k in D_n} [G(m - n) - G(m - k)].

Both kernels are discretely harmonic in m away from the source set, so a
potential u(m) = sum_n K(m, n) q(n) with density q on gamma- satisfies
the 5-point Laplace equation at every interior node.  The classical
operator blocks are restrictions of these kernels:

    S-, D-  : targets gamma-  (square, |gamma-| x |gamma-|),
    S+, D+  : targets gamma+  (|gamma+| x |gamma-|),

and any other target set inside N+ (augmented interpolation sets, for
example) is equally legal since interior targets do not change the
structure.

Everything is dense: at the intended problem sizes (a few thousand
boundary nodes) dense assembly plus LAPACK factorizations is both
simpler and faster than hierarchical compression.  Kernel values are
gathered from a precomputed table of G over the needed index-difference
range, so each distinct lattice offset costs one evaluation in total.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AssemblyError, DoubleLayerInapplicableError
from .geometry import PointSets, exterior_connections
from .lgf import lgf, lgf_grid

_EVAL_CHUNK = 4096

_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))


class LayerKind(Enum):
    SINGLE = "single"
    DOUBLE = "double"


@dataclass(frozen=True)
class LayerMatrix:
    """Dense kernel block with its target/source orderings attached.

    ``entries[i, j]`` is the kernel evaluated at (rows[i], cols[j]);
    rows and cols are (n, 2) integer index arrays in the canonical
    lattice order fixed by the geometry module.
    """

    rows: np.ndarray
    cols: np.ndarray
    entries: np.ndarray
    kind: LayerKind

    def __post_init__(self):
        if self.entries.shape != (len(self.rows), len(self.cols)):
            raise AssemblyError(
                f"entries shape {self.entries.shape} does not match "
                f"{len(self.rows)} targets x {len(self.cols)} sources"
            )


@dataclass
class DensityVector:
    """Values attached to an ordered index set (a density or a trace)."""

    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.support = np.asarray(self.support)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != len(self.support):
            raise AssemblyError(
                f"{len(self.values)} values on {len(self.support)} support nodes"
            )


#: Traces u restricted to gamma+/gamma- reuse the same layout.
TraceVector = DensityVector


def single_kernel(m, n) -> float:
    """S(m, n) = G(m - n); finite even at m = n (where it is 0)."""
    return lgf((m[0] - n[0], m[1] - n[1]))


def double_kernel(m, n, conn) -> float:
    """D(m, n) = sum over conn of G(m - n) - G(m - k).

    ``conn`` must be the exterior connection set of n; an empty set
    leaves the kernel undefined.
    """
    if not conn:
        raise DoubleLayerInapplicableError(
            f"double-layer kernel undefined at source {tuple(n)}: "
            "no exterior connections"
        )
    value = len(conn) * lgf((m[0] - n[0], m[1] - n[1]))
    for k in conn:
        value -= lgf((m[0] - k[0], m[1] - k[1]))
    return value


def _as_index_array(indices) -> np.ndarray:
    arr = np.asarray(indices, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise AssemblyError(f"expected an (n, 2) index array, got shape {arr.shape}")
    return arr


def _check_membership(indices, mask, what):
    inside = mask[indices[:, 0], indices[:, 1]]
    if not inside.all():
        bad = indices[~inside][0]
        raise AssemblyError(f"{what} contains node {tuple(int(v) for v in bad)} outside its allowed set")


def _difference_radius(targets, sources, pad=0) -> int:
    dj = max(targets[:, 0].max() - sources[:, 0].min(), sources[:, 0].max() - targets[:, 0].min())
    dk = max(targets[:, 1].max() - sources[:, 1].min(), sources[:, 1].max() - targets[:, 1].min())
    return int(max(dj, dk)) + pad


def _connection_structure(ps: PointSets, sources):
    """Connection counts and per-direction presence masks for sources."""
    counts = np.zeros(len(sources), dtype=np.int64)
    present = np.zeros((4, len(sources)), dtype=bool)
    for col, idx in enumerate(sources):
        conn = exterior_connections(ps, idx)
        if not conn:
            raise DoubleLayerInapplicableError(
                f"double-layer matrix inapplicable: source {tuple(int(v) for v in idx)} "
                "has no exterior connections"
            )
        counts[col] = len(conn)
        for d, (d1, d2) in enumerate(_DIRECTIONS):
            if (idx[0] + d1, idx[1] + d2) in conn:
                present[d, col] = True
    return counts, present


def _gathered_block(grid_table, radius, targets, sources, row_slice=slice(None)):
    dj = targets[row_slice, 0:1] - sources[None, :, 0].reshape(1, -1)
    dk = targets[row_slice, 1:2] - sources[None, :, 1].reshape(1, -1)
    return grid_table[dj + radius, dk + radius]


def assemble_layer_matrix(targets, sources, kind: LayerKind, ps: PointSets) -> LayerMatrix:
    """Dense kernel block for the given target and source index lists.

    Sources must lie in gamma-; targets anywhere in N+.  For the double
    kernel the exterior connections are resolved once per source, and a
    source with none aborts assembly (the unbounded-domain failure mode).
    """
    targets = _as_index_array(targets)
    sources = _as_index_array(sources)
    _check_membership(sources, ps.gamma_minus, "source set")
    _check_membership(targets, ps.n_plus, "target set")
    pad = 1 if kind is LayerKind.DOUBLE else 0
    radius = _difference_radius(targets, sources, pad=pad)
    table = lgf_grid(radius)
    entries = _gathered_block(table, radius, targets, sources)
    if kind is LayerKind.DOUBLE:
        counts, present = _connection_structure(ps, sources)
        entries = entries * counts[None, :]
        for d, (d1, d2) in enumerate(_DIRECTIONS):
            cols = np.nonzero(present[d])[0]
            if len(cols):
                shifted = sources[cols] + np.array([d1, d2])
                entries[:, cols] -= _gathered_block(table, radius, targets, shifted)
    return LayerMatrix(rows=targets, cols=sources, entries=np.ascontiguousarray(entries), kind=kind)


def evaluate_potential(points, density: DensityVector, kind: LayerKind, ps: PointSets) -> np.ndarray:
    """Direct summation u(m) = sum_n K(m, n) q(n) at interior points.

    Chunks the target list so the gathered kernel block stays small;
    cost is O(|points| * |gamma-|) kernel lookups either way.
    """
    points = _as_index_array(points)
    _check_membership(points, ps.m_plus, "evaluation point set")
    sources = _as_index_array(density.support)
    _check_membership(sources, ps.gamma_minus, "density support")
    pad = 1 if kind is LayerKind.DOUBLE else 0
    radius = _difference_radius(points, sources, pad=pad)
    table = lgf_grid(radius)
    if kind is LayerKind.DOUBLE:
        counts, present = _connection_structure(ps, sources)
    out = np.empty(len(points))
    for start in range(0, len(points), _EVAL_CHUNK):
        rows = slice(start, min(start + _EVAL_CHUNK, len(points)))
        block = _gathered_block(table, radius, points, sources, row_slice=rows)
        if kind is LayerKind.DOUBLE:
            block = block * counts[None, :]
            for d, (d1, d2) in enumerate(_DIRECTIONS):
                cols = np.nonzero(present[d])[0]
                if len(cols):
                    shifted = sources[cols] + np.array([d1, d2])
                    block[:, cols] -= _gathered_block(table, radius, points, shifted, row_slice=rows)
        out[rows] = block @ density.values
    return out


def dump_layer_matrix(matrix: LayerMatrix, path) -> None:
    """Text dump: `rows cols` header then row-major entries, one row per line."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{len(matrix.rows)} {len(matrix.cols)}\n")
        for row in matrix.entries:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
