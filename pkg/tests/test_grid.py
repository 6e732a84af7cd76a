import numpy as np
import pytest

from porompm.basis import BasisKind
from porompm.errors import ConfigurationError, OutOfDomainError
from porompm.grid import (
    BackgroundGrid,
    BoundaryCondition,
    activate_and_number,
    bin_particles,
    build_grid,
)
from porompm.particles import build_transfer_plan, seed_particles


class TestBuildGrid:
    def test_unit_square(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.5)
        assert g.cells == (2, 2)
        assert g.n_nodes == 9

    def test_footing_half_domain(self):
        # 10 m x 10 m at h = 0.25 -> 1600 cells plus headroom rows
        g = build_grid((0, 0), (10.0, 10.0), 0.25, headroom_cells=4)
        assert g.cells[0] * (g.cells[1] - 4) == 1600
        assert g.cells == (40, 44)

    def test_impact_domain(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.01)
        assert g.n_cells == 10000

    def test_non_conforming(self):
        with pytest.raises(ConfigurationError):
            build_grid((0, 0), (1.0, 1.0), 0.3)


class TestBinning:
    def test_single_particle(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.5)
        flat, bins = bin_particles(g, np.array([[0.25, 0.25]]))
        assert flat.tolist() == [0]
        assert bins[0].tolist() == [0]

    def test_face_tie_break_lower_cell(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.5)
        flat, _ = bin_particles(g, np.array([[0.5, 0.25]]))
        assert flat[0] == 0  # on the x-face between cells 0 and 1 -> lower

    def test_full_seeding_counts(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.25)
        parts = seed_particles(g, (0, 0), (1.0, 1.0), (2, 2), 0.4)
        flat, bins = bin_particles(g, parts.x)
        assert len(parts) == 16 * 4
        assert all(len(v) == 4 for v in bins.values())
        assert sum(len(v) for v in bins.values()) == len(parts)

    def test_outside_raises(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.5)
        with pytest.raises(OutOfDomainError):
            bin_particles(g, np.array([[1.5, 0.2]]), step=7)


class TestActivation:
    def test_no_particles(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.5)
        dof = activate_and_number(g, np.zeros((0, 4), dtype=int), np.zeros((0, 4)))
        assert dof.n_dof == 0

    def test_single_particle_linear(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.5)
        parts = seed_particles(g, (0, 0), (0.5, 0.5), (1, 1), 0.4)
        plan = build_transfer_plan(g, parts, BasisKind.LINEAR)
        dof = activate_and_number(g, plan.nodes, plan.S)
        assert dof.n_active == 4
        assert dof.n_dof == 12  # 8 u + 4 p

    def test_full_2x2_seeding(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.5)
        parts = seed_particles(g, (0, 0), (1.0, 1.0), (2, 2), 0.4)
        plan = build_transfer_plan(g, parts, BasisKind.LINEAR)
        dof = activate_and_number(g, plan.nodes, plan.S)
        assert dof.n_active == 9
        assert dof.n_dof == 27

    def test_deterministic_numbering(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.25)
        parts = seed_particles(g, (0, 0), (1.0, 1.0), (2, 2), 0.4)
        plan = build_transfer_plan(g, parts, BasisKind.GIMP)
        a = activate_and_number(g, plan.nodes, plan.S)
        b = activate_and_number(g, plan.nodes, plan.S)
        assert np.array_equal(a.active_nodes, b.active_nodes)
        assert a.same_active_set(b)

    def test_dof_bijection(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.5)
        parts = seed_particles(g, (0, 0), (1.0, 1.0), (2, 2), 0.4)
        plan = build_transfer_plan(g, parts, BasisKind.LINEAR)
        dof = activate_and_number(g, plan.nodes, plan.S)
        dofs = set()
        for node in dof.active_nodes:
            dofs.add(dof.u_dof([node], 0)[0])
            dofs.add(dof.u_dof([node], 1)[0])
            dofs.add(dof.n_u + dof.p_dof([node])[0])
        assert dofs == set(range(dof.n_dof))


class TestBoundaryCondition:
    def test_select_edge_nodes(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.5)
        bc = BoundaryCondition("roller", axis=0, coord=0.0, lo=0.0, hi=1.0)
        nodes = bc.select_nodes(g)
        coords = g.node_coords()[nodes]
        assert len(nodes) == 3
        assert np.allclose(coords[:, 0], 0.0)

    def test_segment_span(self):
        g = build_grid((0, 0), (1.0, 1.0), 0.25)
        bc = BoundaryCondition("prescribed_pressure", axis=1, coord=1.0, lo=0.5, hi=1.0)
        nodes = bc.select_nodes(g)
        coords = g.node_coords()[nodes]
        assert np.allclose(coords[:, 1], 1.0)
        assert coords[:, 0].min() >= 0.5 - 1e-12

    def test_amplitude(self):
        bc = BoundaryCondition(
            "traction", axis=1, coord=1.0, lo=0.0, hi=1.0,
            value=np.array([0.0, -3.0e6]), amplitude=lambda t: 1.0 - np.cos(100.0 * t),
        )
        assert np.allclose(bc.value_at(0.0), 0.0)  # load starts at zero
        assert np.isclose(bc.value_at(0.1)[1], -3.0e6 * (1 - np.cos(10.0)))
