"""Fixed structured background mesh, dof management and boundary tagging.

Nodes are numbered lexicographically (x fastest); cells likewise. Dofs are
segregated: all displacement components first (2 per active node, x then y),
then one pressure dof per active node, matching the 2x2 block structure of
the coupled Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, OutOfDomainError


@dataclass
class BackgroundGrid:
    origin: np.ndarray
    h: float
    cells: tuple[int, int]

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        if self.h <= 0.0 or self.cells[0] < 1 or self.cells[1] < 1:
            raise ConfigurationError("grid needs h > 0 and at least one cell per axis")
        self.nodes_per_axis = (self.cells[0] + 1, self.cells[1] + 1)
        self.n_nodes = self.nodes_per_axis[0] * self.nodes_per_axis[1]
        self.n_cells = self.cells[0] * self.cells[1]

    @property
    def extent(self):
        return self.origin + self.h * np.asarray(self.cells)

    def node_coords(self):
        nx, ny = self.nodes_per_axis
        ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
        coords = np.stack([ix.ravel(), iy.ravel()], axis=-1) * self.h + self.origin
        return coords

    def node_id(self, ix, iy):
        return iy * self.nodes_per_axis[0] + ix

    def cell_id(self, cx, cy):
        return cy * self.cells[0] + cx

    def cell_of(self, x, step=None):
        """Cell indices containing each point; face ties go to the lower cell.

        Raises OutOfDomainError naming the first offending particle.
        """
        x = np.asarray(x, dtype=float)
        rel = (x - self.origin) / self.h
        idx = np.ceil(rel).astype(int) - 1  # ties on faces -> lower cell
        idx = np.where(rel <= 0.0, 0, idx)
        inside = (
            (rel[..., 0] >= -1e-12) & (rel[..., 0] <= self.cells[0] + 1e-12)
            & (rel[..., 1] >= -1e-12) & (rel[..., 1] <= self.cells[1] + 1e-12)
        )
        if not np.all(inside):
            first = int(np.nonzero(~inside)[0][0])
            raise OutOfDomainError(
                f"particle {first} at {x[first]} left the grid"
                + (f" at step {step}" if step is not None else ""),
                particle=first,
                step=step,
            )
        idx[..., 0] = np.clip(idx[..., 0], 0, self.cells[0] - 1)
        idx[..., 1] = np.clip(idx[..., 1], 0, self.cells[1] - 1)
        return idx


def build_grid(origin, size, h, headroom_cells=0):
    """Grid covering origin..origin+size with optional empty rows on top.

    size must be divisible by h (relative tolerance 1e-9).
    """
    origin = np.asarray(origin, dtype=float)
    size = np.asarray(size, dtype=float)
    counts = size / h
    if np.any(np.abs(counts - np.round(counts)) > 1e-9 * np.maximum(counts, 1.0)):
        raise ConfigurationError(
            f"extents {size} are not an integer multiple of cell size {h}"
        )
    nx, ny = int(round(counts[0])), int(round(counts[1]))
    return BackgroundGrid(origin, h, (nx, ny + int(headroom_cells)))


def bin_particles(grid, x, step=None):
    """Element -> particle lists from particle centers.

    Returns (cell_index_per_particle, dict cell_id -> particle index array).
    Every particle lands in exactly one cell.
    """
    idx = grid.cell_of(x, step=step)
    flat = idx[:, 1] * grid.cells[0] + idx[:, 0]
    order = np.argsort(flat, kind="stable")
    bins: dict[int, np.ndarray] = {}
    if len(flat):
        sorted_flat = flat[order]
        boundaries = np.nonzero(np.diff(sorted_flat))[0] + 1
        chunks = np.split(order, boundaries)
        for chunk in chunks:
            bins[int(flat[chunk[0]])] = chunk
    return flat, bins


@dataclass
class BoundaryCondition:
    """Axis-aligned boundary condition.

    kind: fixed_displacement | roller | traction | prescribed_pressure |
          flux | impermeable. The selector is a segment {axis, coord, lo, hi}:
    points with x[axis] == coord and lo <= x[other] <= hi. amplitude(t) scales
    the prescribed value; traction value is a 2-vector, others scalars.
    roller constrains the component named by `component`.
    """

    kind: str
    axis: int
    coord: float
    lo: float
    hi: float
    value: object = 0.0
    component: int = 0
    amplitude: Optional[Callable[[float], float]] = None
    mode: str = "segment"  # traction/flux: "segment" (Gauss) or "material"

    def value_at(self, t):
        amp = 1.0 if self.amplitude is None else self.amplitude(t)
        return np.asarray(self.value, dtype=float) * amp

    def select_nodes(self, grid, tol=1e-9):
        coords = grid.node_coords()
        on_line = np.abs(coords[:, self.axis] - self.coord) <= tol * grid.h
        other = 1 - self.axis
        in_span = (coords[:, other] >= self.lo - tol * grid.h) & (
            coords[:, other] <= self.hi + tol * grid.h
        )
        return np.nonzero(on_line & in_span)[0]


@dataclass
class DofMap:
    """Bijection between active (node, field) pairs and [0, n_dof).

    u dofs come first (2 per active node), then p dofs. Dirichlet-flagged
    dofs are excluded from the free set used by the linear solver.
    """

    n_nodes: int
    active_nodes: np.ndarray
    node_rank: np.ndarray = field(init=False)

    def __post_init__(self):
        self.active_nodes = np.asarray(self.active_nodes, dtype=int)
        self.n_active = len(self.active_nodes)
        self.node_rank = np.full(self.n_nodes, -1, dtype=int)
        self.node_rank[self.active_nodes] = np.arange(self.n_active)
        self.n_u = 2 * self.n_active
        self.n_p = self.n_active
        self.n_dof = self.n_u + self.n_p

    def u_dof(self, nodes, comp):
        rank = self.node_rank[np.asarray(nodes, dtype=int)]
        return 2 * rank + comp

    def p_dof(self, nodes):
        return self.node_rank[np.asarray(nodes, dtype=int)]

    def same_active_set(self, other):
        return other is not None and np.array_equal(self.active_nodes, other.active_nodes)


def activate_and_number(grid, stencil_nodes, stencil_weights, threshold=1e-10):
    """Active nodes are those with accumulated basis support above threshold."""
    measure = np.zeros(grid.n_nodes)
    np.add.at(measure, stencil_nodes.ravel(), stencil_weights.ravel())
    active = np.nonzero(measure > threshold)[0]
    return DofMap(grid.n_nodes, active)
