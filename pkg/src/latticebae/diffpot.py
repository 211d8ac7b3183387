"""Auxiliary-box fast solves and difference potentials.

Interior values of a homogeneous solution could be recovered by direct
lattice convolution at O(N^3) cost.  Cheaper: embed the domain in the
rectangular computational box, impose zero data on the box edge, and
solve the 5-point system with a sine transform.  The difference
potential of boundary data u_gamma is the box solution whose right-hand
side is [A u] of the zero-extension of u_gamma, restricted to the
exterior band; it is discretely harmonic on M+ and reproduces u_gamma
on gamma, so a single FFT solve replaces the convolution.

The same box solver yields particular solutions of the nonhomogeneous
problem from rhs = h^2 f on M+, after which the boundary right-hand
side is corrected and the homogeneous and particular parts superpose.

Unbounded geometries never enter here; no bounded box contains them,
and the direct convolution stays affordable on the box-restricted node
set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import fft as sfft

from .closure import ClosureMatrices
from .errors import AssemblyError, BoxTooSmallError
from .geometry import Grid, PointSets


@dataclass(frozen=True)
class AuxiliaryBox:
    """The rectangular box carrying the fast solver's zero boundary."""

    grid: Grid

    @classmethod
    def for_pointsets(cls, ps: PointSets) -> "AuxiliaryBox":
        """Wrap the classification grid, checking the one-node margin.

        Every node of N+ must be a box-interior node, otherwise some
        gamma node sits against the edge and the zero boundary would
        contaminate the potential.
        """
        edge = np.zeros_like(ps.n_plus)
        edge[0, :] = edge[-1, :] = True
        edge[:, 0] = edge[:, -1] = True
        if (ps.n_plus & edge).any():
            raise BoxTooSmallError(
                "N+ touches the box edge; enlarge the computational box"
            )
        return cls(grid=ps.grid)

    @property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros((self.grid.nx, self.grid.ny), dtype=bool)
        mask[0, :] = mask[-1, :] = True
        mask[:, 0] = mask[:, -1] = True
        return mask


@dataclass
class GridFunction:
    """A real field sampled on every node of an auxiliary box."""

    box: AuxiliaryBox
    values: np.ndarray

    def __post_init__(self):
        shape = (self.box.grid.nx, self.box.grid.ny)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != shape:
            raise AssemblyError(
                f"grid function has shape {self.values.shape}, box wants {shape}"
            )

    @classmethod
    def zeros(cls, box: AuxiliaryBox) -> "GridFunction":
        return cls(box=box, values=np.zeros((box.grid.nx, box.grid.ny)))


def apply_stencil(values: np.ndarray) -> np.ndarray:
    """[A u] at box-interior nodes (edges return 0), A the 5-point operator."""
    out = np.zeros_like(values)
    out[1:-1, 1:-1] = (
        4.0 * values[1:-1, 1:-1]
        - values[:-2, 1:-1]
        - values[2:, 1:-1]
        - values[1:-1, :-2]
        - values[1:-1, 2:]
    )
    return out


def fft_poisson_solve(rhs: GridFunction) -> GridFunction:
    """Solve [Aw] = rhs with w = 0 on the box edge via DST-I.

    The sine basis diagonalizes the 5-point operator on the interior
    nodes with eigenvalues 4 - 2cos(j pi / nx) - 2cos(k pi / ny), the
    n's counting grid intervals per axis.
    """
    grid = rhs.box.grid
    edge_max = max(
        np.abs(rhs.values[0, :]).max(),
        np.abs(rhs.values[-1, :]).max(),
        np.abs(rhs.values[:, 0]).max(),
        np.abs(rhs.values[:, -1]).max(),
    )
    if edge_max != 0.0:
        raise AssemblyError("rhs carries data on the box boundary")
    mx, my = grid.nx - 1, grid.ny - 1
    j = np.arange(1, mx)
    k = np.arange(1, my)
    lam = (4.0 - 2.0 * np.cos(np.pi * j / mx))[:, None] - 2.0 * np.cos(
        np.pi * k / my
    )[None, :]
    coeff = sfft.dstn(rhs.values[1:-1, 1:-1], type=1)
    w = GridFunction.zeros(rhs.box)
    w.values[1:-1, 1:-1] = sfft.idstn(coeff / lam, type=1)
    return w


def difference_potential(u_gamma: np.ndarray, ps: PointSets, box: AuxiliaryBox) -> GridFunction:
    """Box solution reproducing u_gamma on gamma, discretely harmonic on M+.

    Zero-extends the gamma data, applies the 5-point operator, keeps the
    result on the exterior band only, and solves the box system.
    """
    if box.grid != ps.grid:
        raise AssemblyError("auxiliary box grid differs from the classification grid")
    gamma_nodes = ps.gamma_indices
    u_gamma = np.asarray(u_gamma, dtype=float)
    if u_gamma.shape != (len(gamma_nodes),):
        raise AssemblyError(
            f"gamma data has shape {u_gamma.shape}, expected ({len(gamma_nodes)},)"
        )
    edge = box.boundary_mask
    near_edge = edge.copy()
    near_edge[1:-1, 1:-1] = (
        edge[:-2, 1:-1] | edge[2:, 1:-1] | edge[1:-1, :-2] | edge[1:-1, 2:]
    )
    if (ps.gamma & near_edge).any():
        raise BoxTooSmallError("a gamma node touches or neighbors the box edge")
    extension = np.zeros((ps.grid.nx, ps.grid.ny))
    extension[gamma_nodes[:, 0], gamma_nodes[:, 1]] = u_gamma
    rhs = GridFunction.zeros(box)
    band = ps.m_minus & ~edge
    rhs.values[band] = apply_stencil(extension)[band]
    return fft_poisson_solve(rhs)


def particular_solution(f: Callable, ps: PointSets, box: AuxiliaryBox, grid: Grid) -> GridFunction:
    """Box solve of [Au] = h^2 f on M+ (zero forcing outside the domain)."""
    if box.grid != ps.grid or grid != ps.grid:
        raise AssemblyError("particular solution grids are inconsistent")
    x, y = grid.mesh()
    rhs = GridFunction.zeros(box)
    inside = ps.m_plus & ~box.boundary_mask
    rhs.values[inside] = grid.h**2 * np.asarray(f(x, y))[inside]
    return fft_poisson_solve(rhs)


def _restrict(gf: GridFunction, indices: np.ndarray) -> np.ndarray:
    if len(indices) == 0:
        return np.zeros(0)
    nx, ny = gf.values.shape
    if indices[:, 0].min() < 0 or indices[:, 0].max() >= nx or (
        indices[:, 1].min() < 0 or indices[:, 1].max() >= ny
    ):
        raise AssemblyError("particular solution does not cover a closure node")
    return gf.values[indices[:, 0], indices[:, 1]]


def correct_boundary_rhs(cm: ClosureMatrices, u_p: GridFunction) -> np.ndarray:
    """Boundary data for the homogeneous part after splitting off u_p.

    Substituting u = u^h + u^p into the closure rows moves the particular
    values to the right-hand side.  The extrapolation identity is imposed
    on the homogeneous part alone, so the eta columns are charged with
    u^p sampled at the eta nodes themselves; the R blocks stay untouched.
    """
    return (
        cm.rhs
        - cm.phi_plus @ _restrict(u_p, cm.gamma_tilde_plus)
        - cm.phi_minus @ _restrict(u_p, cm.gamma_minus)
        - cm.phi_prime_minus @ _restrict(u_p, cm.eta)
    )


def superpose(u_h: GridFunction, u_p: GridFunction) -> GridFunction:
    """Pointwise sum of the homogeneous and particular parts."""
    if u_h.box.grid != u_p.box.grid:
        raise AssemblyError("cannot superpose grid functions on different boxes")
    return GridFunction(box=u_h.box, values=u_h.values + u_p.values)


def dump_grid_function_csv(gf: GridFunction, ps: PointSets, path) -> None:
    """Write x,y,value rows over the interior nodes in canonical order."""
    grid = gf.box.grid
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x,y,value\n")
        for j, k in ps.m_plus_indices:
            x, y = grid.node(int(j), int(k))
            fh.write(f"{x:.17g},{y:.17g},{gf.values[j, k]:.17g}\n")
