"""Level-set geometry embedded in a uniform lattice.

The domain Omega is described implicitly by a continuous level-set
function psi with the sign convention

    psi(x, y) < 0  strictly inside Omega,
    psi(x, y) = 0  on the boundary Gamma,
    psi(x, y) > 0  outside.

A node with psi = 0 counts as inside (it joins M+ and, when it borders
the exterior, gamma+ rather than gamma-), which is what makes the
interpolation fraction alpha live in [0, 1).

Classification of the box nodes follows the 5-point stencil structure:
M+ holds the inside nodes, N+ adds their four-neighbours, and the
boundary layers are

    gamma  = N+ intersect N-,
    gamma+ = gamma intersect M+   (inside nodes with an outside neighbour),
    gamma- = gamma minus gamma+   (outside nodes with an inside neighbour).

Layer densities live on gamma-; boundary conditions are imposed at one
boundary crossing per gamma- node, found by bisection along lattice
segments.  For unbounded exterior domains the classification is simply
restricted to the computational box; the lattice kernels themselves need
no truncation, so no artificial boundary condition ever appears.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateDomainError,
    GeometryTooTightError,
    InconsistentClassificationError,
    UnderResolvedBoundaryError,
)
from .lgf import LatticeIndex

#: Candidate segment directions in tie-break order: x-axis before y-axis,
#: positive step before negative.
_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))

#: Exterior connections of a gamma- node exclude its gamma- neighbours
#: (they must lie in M- minus gamma-).  Flip to False to experiment with
#: the looser reading that admits any M- neighbour.
CONNECTIONS_EXCLUDE_GAMMA_MINUS = True

_BISECT_ITERS = 50
_MULTI_ROOT_SAMPLES = 17


@dataclass(frozen=True)
class Grid:
    """Uniform node-centred grid covering the computational box.

    Node (j, k) sits at ``origin + (j h, k h)`` for 0 <= j < nx,
    0 <= k < ny.
    """

    h: float
    origin: tuple[float, float]
    nx: int
    ny: int

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid needs at least 4 nodes per axis, got {self.nx}x{self.ny}")

    @classmethod
    def from_box(cls, xlim, ylim, n_cells: int) -> "Grid":
        """Square-celled grid with ``n_cells`` intervals along x.

        The y extent must be an integer multiple of the resulting h (the
        standard case is a square box, where ny = nx).
        """
        h = (xlim[1] - xlim[0]) / n_cells
        ny_cells = (ylim[1] - ylim[0]) / h
        if abs(ny_cells - round(ny_cells)) > 1e-9:
            raise ValueError("box y-extent is not an integer number of cells")
        return cls(h=h, origin=(xlim[0], ylim[0]), nx=n_cells + 1, ny=int(round(ny_cells)) + 1)

    def xs(self) -> np.ndarray:
        return self.origin[0] + self.h * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return self.origin[1] + self.h * np.arange(self.ny)

    def mesh(self):
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def node(self, j: int, k: int) -> tuple[float, float]:
        return (self.origin[0] + j * self.h, self.origin[1] + k * self.h)

    def nodes(self, indices: np.ndarray) -> np.ndarray:
        """Coordinates of an (n, 2) integer index array, shape (n, 2)."""
        return np.asarray(self.origin) + self.h * np.asarray(indices, dtype=float)

    def contains_index(self, j: int, k: int) -> bool:
        return 0 <= j < self.nx and 0 <= k < self.ny


@dataclass(frozen=True)
class LevelSetShape:
    """Implicit domain description.

    ``psi`` must accept numpy arrays and broadcast.  ``grad`` (optional)
    returns the two gradient components; when absent, intersection
    normals fall back to central differences.  ``unbounded`` marks
    exterior domains whose M+ extends past every finite box.
    """

    kind: str
    psi: Callable
    grad: Optional[Callable] = None
    label: str = ""
    unbounded: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.kind)


def ellipse(aspect: float = 1.0) -> LevelSetShape:
    """Interior of x^2 + aspect^2 y^2 = 1 (aspect = 1 is the unit circle)."""
    if aspect <= 0.0:
        raise ValueError("aspect must be positive")
    a2 = float(aspect) ** 2

    def psi(x, y):
        return x * x + a2 * (y * y) - 1.0

    def grad(x, y):
        return 2.0 * x, 2.0 * a2 * y

    return LevelSetShape(
        kind="ellipse", psi=psi, grad=grad, label=f"ellipse-a{aspect:g}",
        params={"aspect": float(aspect)},
    )


def diamond(r1: float = 0.9, r2: float = 0.5) -> LevelSetShape:
    """Interior of |x/r1| + |y/r2| = 1 (corners on the axes)."""
    if r1 <= 0.0 or r2 <= 0.0:
        raise ValueError("diamond half-diagonals must be positive")

    def psi(x, y):
        return np.abs(x) / r1 + np.abs(y) / r2 - 1.0

    def grad(x, y):
        # copysign keeps a deterministic one-sided value on the axes.
        return np.copysign(1.0 / r1, x), np.copysign(1.0 / r2, y)

    return LevelSetShape(
        kind="diamond", psi=psi, grad=grad, label=f"diamond-r{r1:g}x{r2:g}",
        params={"r1": float(r1), "r2": float(r2)},
    )


def circle_exterior(radius: float = 1.0) -> LevelSetShape:
    """Unbounded exterior of a circle: psi = radius^2 - x^2 - y^2."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    r2 = float(radius) ** 2

    def psi(x, y):
        return r2 - x * x - y * y

    def grad(x, y):
        return -2.0 * x, -2.0 * y

    return LevelSetShape(
        kind="circle_exterior", psi=psi, grad=grad, label=f"circle-exterior-r{radius:g}",
        unbounded=True, params={"radius": float(radius)},
    )


def custom(psi: Callable, grad: Optional[Callable] = None, label: str = "custom",
           unbounded: bool = False) -> LevelSetShape:
    return LevelSetShape(kind="custom", psi=psi, grad=grad, label=label, unbounded=unbounded)


@dataclass
class PointSets:
    """Node classification masks on a grid, all shaped (nx, ny).

    The index arrays derived from each mask (``*_indices``) list nodes in
    canonical order: lexicographic by (j, k).  Every matrix and vector in
    the package is ordered by these arrays, so they are the single source
    of truth for degrees of freedom.
    """

    grid: Grid
    m_plus: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray
    gamma: np.ndarray
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray

    @property
    def m_minus(self) -> np.ndarray:
        return ~self.m_plus

    @cached_property
    def gamma_indices(self) -> np.ndarray:
        return np.argwhere(self.gamma)

    @cached_property
    def gamma_plus_indices(self) -> np.ndarray:
        return np.argwhere(self.gamma_plus)

    @cached_property
    def gamma_minus_indices(self) -> np.ndarray:
        return np.argwhere(self.gamma_minus)

    @cached_property
    def m_plus_indices(self) -> np.ndarray:
        return np.argwhere(self.m_plus)


def _dilate(mask: np.ndarray) -> np.ndarray:
    """Union of a mask with its four lattice neighbours (box-clipped)."""
    out = mask.copy()
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    return out


def classify(grid: Grid, shape: LevelSetShape) -> PointSets:
    """Build the M/N/gamma node sets for a shape on a grid.

    Raises
    ------
    DegenerateDomainError
        If no node lies inside, or the zero level set misses the box
        entirely (empty gamma).
    GeometryTooTightError
        If boundary-layer nodes reach into the outermost two node rings,
        i.e. Gamma runs within about 2h of the box edge.
    """
    x, y = grid.mesh()
    m_plus = np.asarray(shape.psi(x, y)) <= 0.0
    if not m_plus.any():
        raise DegenerateDomainError("no grid node lies inside the domain")
    n_plus = _dilate(m_plus)
    n_minus = _dilate(~m_plus)
    gamma = n_plus & n_minus
    if not gamma.any():
        raise DegenerateDomainError("zero level set does not cross the computational box")
    rim = np.zeros_like(gamma)
    rim[:2, :] = rim[-2:, :] = True
    rim[:, :2] = rim[:, -2:] = True
    if (gamma & rim).any():
        raise GeometryTooTightError(
            "boundary runs within 2h of the box edge; enlarge the box or refine"
        )
    for mask in (m_plus, n_plus, n_minus, gamma):
        mask.flags.writeable = False
    gamma_plus = gamma & m_plus
    gamma_minus = gamma & ~m_plus
    gamma_plus.flags.writeable = False
    gamma_minus.flags.writeable = False
    return PointSets(
        grid=grid, m_plus=m_plus, n_plus=n_plus, n_minus=n_minus,
        gamma=gamma, gamma_plus=gamma_plus, gamma_minus=gamma_minus,
    )


@dataclass(frozen=True)
class IntersectionPoint:
    """One boundary crossing assigned to a gamma- node.

    ``location`` = (1 - alpha) * node(inner) + alpha * node(owner), with
    alpha in [0, 1); alpha = 0 exactly when the inner node sits on Gamma.
    ``normal`` is the unit outward normal (psi increases along it).
    """

    location: tuple[float, float]
    owner: LatticeIndex
    inner: LatticeIndex
    alpha: float
    normal: tuple[float, float]


def _gradient_at(shape: LevelSetShape, x, y, h: float):
    if shape.grad is not None:
        gx, gy = shape.grad(x, y)
        return np.broadcast_to(gx, np.shape(x)).astype(float), \
            np.broadcast_to(gy, np.shape(x)).astype(float)
    step = 1e-6 * h
    gx = (shape.psi(x + step, y) - shape.psi(x - step, y)) / (2.0 * step)
    gy = (shape.psi(x, y + step) - shape.psi(x, y - step)) / (2.0 * step)
    return gx, gy


def select_intersections(ps: PointSets, shape: LevelSetShape, grid: Grid) -> list:
    """Pick one boundary crossing per gamma- node.

    Every lattice segment from a gamma- node to one of its inside
    neighbours crosses Gamma; among those candidates the crossing closest
    to the gamma- node (largest alpha) wins, with ties resolved by the
    fixed direction order (x before y, positive step before negative).
    Returns IntersectionPoints in canonical gamma- order.

    Raises
    ------
    GeometryTooTightError
        If any candidate segment crosses Gamma more than once, which
        means the grid does not resolve the geometry.
    InconsistentClassificationError
        If a gamma- node has no inside neighbour (classification and
        root finding disagree; should be impossible).
    """
    owners = ps.gamma_minus_indices
    m_plus = ps.m_plus
    cand_owner_row = []
    cand_dir = []
    for row, (j, k) in enumerate(owners):
        found = False
        for d1, d2 in _DIRECTIONS:
            jj, kk = j + d1, k + d2
            if grid.contains_index(jj, kk) and m_plus[jj, kk]:
                cand_owner_row.append(row)
                cand_dir.append((d1, d2))
                found = True
        if not found:
            raise InconsistentClassificationError(
                f"gamma- node {(int(j), int(k))} has no inside neighbour"
            )
    cand_owner_row = np.asarray(cand_owner_row)
    cand_dir = np.asarray(cand_dir)
    outer_idx = owners[cand_owner_row]
    inner_idx = outer_idx + cand_dir
    outer_xy = grid.nodes(outer_idx)
    inner_xy = grid.nodes(inner_idx)

    # Screen for multiple crossings: sample psi along each segment and
    # count sign transitions of the inside indicator.
    ts = np.linspace(0.0, 1.0, _MULTI_ROOT_SAMPLES)
    seg_x = outer_xy[:, 0, None] + ts[None, :] * (inner_xy[:, 0, None] - outer_xy[:, 0, None])
    seg_y = outer_xy[:, 1, None] + ts[None, :] * (inner_xy[:, 1, None] - outer_xy[:, 1, None])
    inside_samples = np.asarray(shape.psi(seg_x, seg_y)) <= 0.0
    transitions = np.count_nonzero(inside_samples[:, 1:] != inside_samples[:, :-1], axis=1)
    if (transitions > 1).any():
        bad = int(np.argmax(transitions > 1))
        j, k = outer_idx[bad]
        raise GeometryTooTightError(
            f"segment at gamma- node {(int(j), int(k))} crosses the boundary "
            f"{int(transitions[bad])} times; the grid under-resolves the geometry"
        )

    # Bisection along t in [0, 1] from the outer node (psi > 0) to the
    # inner node (psi <= 0); converges to the crossing nearest the outer
    # node, which is unique after the screen above.
    lo = np.zeros(len(cand_dir))
    hi = np.ones(len(cand_dir))
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        mx = outer_xy[:, 0] + mid * (inner_xy[:, 0] - outer_xy[:, 0])
        my = outer_xy[:, 1] + mid * (inner_xy[:, 1] - outer_xy[:, 1])
        neg = np.asarray(shape.psi(mx, my)) <= 0.0
        hi = np.where(neg, mid, hi)
        lo = np.where(neg, lo, mid)
    t_root = hi
    alphas = 1.0 - t_root
    snap = alphas < 1e-12
    alphas[snap] = 0.0

    loc_x = np.where(snap, inner_xy[:, 0], outer_xy[:, 0] + t_root * (inner_xy[:, 0] - outer_xy[:, 0]))
    loc_y = np.where(snap, inner_xy[:, 1], outer_xy[:, 1] + t_root * (inner_xy[:, 1] - outer_xy[:, 1]))
    gx, gy = _gradient_at(shape, loc_x, loc_y, grid.h)
    norms = np.hypot(gx, gy)
    if (norms < 1e-300).any():
        raise UnderResolvedBoundaryError("vanishing level-set gradient at a boundary crossing")
    gx = gx / norms
    gy = gy / norms

    # Per owner, keep the candidate with the largest alpha; strict
    # comparison preserves the direction enumeration order on exact ties.
    best = {}
    for i in range(len(cand_dir)):
        row = cand_owner_row[i]
        if row not in best or alphas[i] > alphas[best[row]]:
            best[row] = i
    points = []
    for row in range(len(owners)):
        i = best[row]
        points.append(
            IntersectionPoint(
                location=(float(loc_x[i]), float(loc_y[i])),
                owner=LatticeIndex(int(outer_idx[i][0]), int(outer_idx[i][1])),
                inner=LatticeIndex(int(inner_idx[i][0]), int(inner_idx[i][1])),
                alpha=float(alphas[i]),
                normal=(float(gx[i]), float(gy[i])),
            )
        )
    return points


def exterior_connections(ps: PointSets, n) -> set:
    """Neighbours of a gamma- node lying in M- but not in gamma-.

    These are the nodes the double-layer kernel differences against; the
    set may be empty (the double-layer assembler decides whether that is
    fatal).  Restricted to the computational box.
    """
    j, k = int(n[0]), int(n[1])
    if not ps.gamma_minus[j, k]:
        raise ValueError(f"node {(j, k)} is not a gamma- node")
    out = set()
    for d1, d2 in _DIRECTIONS:
        jj, kk = j + d1, k + d2
        if not ps.grid.contains_index(jj, kk) or ps.m_plus[jj, kk]:
            continue
        if CONNECTIONS_EXCLUDE_GAMMA_MINUS and ps.gamma_minus[jj, kk]:
            continue
        out.add(LatticeIndex(jj, kk))
    return out


def dump_classification_csv(ps: PointSets, path) -> None:
    """Write one ``x,y,class`` row per box node, for plotting the sets."""
    labels = np.where(ps.m_plus, "M+", "M-").astype(object)
    labels[ps.gamma_plus] = "gamma+"
    labels[ps.gamma_minus] = "gamma-"
    xs = ps.grid.xs()
    ys = ps.grid.ys()
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x,y,class\n")
        for j in range(ps.grid.nx):
            for k in range(ps.grid.ny):
                fh.write(f"{xs[j]:.17g},{ys[k]:.17g},{labels[j, k]}\n")
