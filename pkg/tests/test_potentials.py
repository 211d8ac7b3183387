"""Tests for lattice layer kernels and their dense assembly."""

import numpy as np
import pytest

from latticebae.errors import AssemblyError, DoubleLayerInapplicableError
from latticebae.geometry import Grid, classify, ellipse, exterior_connections
from latticebae.lgf import lgf
from latticebae.potentials import (
    DensityVector,
    LayerKind,
    LayerMatrix,
    assemble_layer_matrix,
    double_kernel,
    dump_layer_matrix,
    evaluate_potential,
    single_kernel,
)


@pytest.fixture(scope="module")
def circle_setup():
    grid = Grid.from_box((-1.15, 1.15), (-1.15, 1.15), 32)
    shape = ellipse(1.0)
    ps = classify(grid, shape)
    return grid, shape, ps


def test_single_kernel_values():
    assert single_kernel((3, 4), (3, 4)) == 0.0
    assert single_kernel((4, 4), (3, 4)) == pytest.approx(-0.25, abs=1e-14)
    assert single_kernel((7, -2), (3, 1)) == single_kernel((3, 1), (7, -2))


def test_double_kernel_toy_values():
    n = (5, 5)
    assert double_kernel(n, n, {(6, 5)}) == pytest.approx(0.25, abs=1e-14)
    assert double_kernel(n, n, {(6, 5), (4, 5)}) == pytest.approx(0.5, abs=1e-14)


def test_double_kernel_rejects_empty_connections():
    with pytest.raises(DoubleLayerInapplicableError):
        double_kernel((0, 0), (1, 1), set())


def test_double_kernel_far_field_decay():
    # Differences of shifted G values telescope the log term, leaving
    # O(1/r) decay.
    n = (0, 0)
    conn = {(1, 0), (0, 1)}
    near = abs(double_kernel((40, 0), n, conn))
    far = abs(double_kernel((80, 0), n, conn))
    assert far < near
    assert far < 4.0 / 80.0


def test_assembled_single_block_matches_entrywise(circle_setup):
    _, _, ps = circle_setup
    sources = ps.gamma_minus_indices[:12]
    targets = ps.gamma_plus_indices[:9]
    lm = assemble_layer_matrix(targets, sources, LayerKind.SINGLE, ps)
    assert lm.entries.shape == (9, 12)
    for i in range(9):
        for j in range(12):
            assert lm.entries[i, j] == pytest.approx(
                single_kernel(targets[i], sources[j]), abs=1e-14
            )


def test_assembled_double_block_matches_entrywise(circle_setup):
    _, _, ps = circle_setup
    sources = ps.gamma_minus_indices[:10]
    targets = ps.gamma_plus_indices[:7]
    lm = assemble_layer_matrix(targets, sources, LayerKind.DOUBLE, ps)
    for i in range(7):
        for j in range(10):
            conn = exterior_connections(ps, sources[j])
            assert lm.entries[i, j] == pytest.approx(
                double_kernel(targets[i], sources[j], conn), abs=1e-13
            )


def test_minus_single_block_symmetric_zero_diagonal(circle_setup):
    _, _, ps = circle_setup
    sources = ps.gamma_minus_indices
    lm = assemble_layer_matrix(sources, sources, LayerKind.SINGLE, ps)
    assert np.allclose(np.diag(lm.entries), 0.0)
    assert np.allclose(lm.entries, lm.entries.T, atol=1e-14)


def test_block_dimensions(circle_setup):
    _, _, ps = circle_setup
    lm = assemble_layer_matrix(ps.gamma_plus_indices, ps.gamma_minus_indices,
                               LayerKind.SINGLE, ps)
    assert lm.entries.shape == (len(ps.gamma_plus_indices), len(ps.gamma_minus_indices))


def test_assembly_validates_memberships(circle_setup):
    _, _, ps = circle_setup
    with pytest.raises(AssemblyError):
        assemble_layer_matrix(ps.gamma_plus_indices, ps.gamma_plus_indices,
                              LayerKind.SINGLE, ps)
    deep_outside = np.array([[0, 0]])
    with pytest.raises(AssemblyError):
        assemble_layer_matrix(deep_outside, ps.gamma_minus_indices, LayerKind.SINGLE, ps)


@pytest.mark.parametrize("kind", [LayerKind.SINGLE, LayerKind.DOUBLE])
def test_potential_is_discretely_harmonic(circle_setup, kind):
    # The layer field must satisfy the 5-point equation at every interior
    # node whose full stencil stays inside M+.
    grid, _, ps = circle_setup
    rng = np.random.default_rng(3)
    q = DensityVector(ps.gamma_minus_indices,
                      rng.standard_normal(len(ps.gamma_minus_indices)))
    full_stencil = ps.m_plus.copy()
    full_stencil[1:-1, 1:-1] = (
        ps.m_plus[1:-1, 1:-1]
        & ps.m_plus[2:, 1:-1] & ps.m_plus[:-2, 1:-1]
        & ps.m_plus[1:-1, 2:] & ps.m_plus[1:-1, :-2]
    )
    full_stencil[0, :] = full_stencil[-1, :] = False
    full_stencil[:, 0] = full_stencil[:, -1] = False
    centers = np.argwhere(full_stencil)
    field = {}
    needed = set()
    for j, k in centers:
        for dj, dk in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
            needed.add((j + dj, k + dk))
    needed = np.array(sorted(needed))
    values = evaluate_potential(needed, q, kind, ps)
    field = {tuple(idx): v for idx, v in zip(map(tuple, needed), values)}
    qmax = np.abs(q.values).max()
    for j, k in centers:
        residual = 4.0 * field[(j, k)] - field[(j + 1, k)] - field[(j - 1, k)] \
            - field[(j, k + 1)] - field[(j, k - 1)]
        assert abs(residual) <= 1e-10 * qmax


@pytest.mark.parametrize("kind", [LayerKind.SINGLE, LayerKind.DOUBLE])
def test_evaluation_matches_matrix_action(circle_setup, kind):
    _, _, ps = circle_setup
    rng = np.random.default_rng(5)
    q = DensityVector(ps.gamma_minus_indices,
                      rng.standard_normal(len(ps.gamma_minus_indices)))
    targets = ps.gamma_plus_indices
    lm = assemble_layer_matrix(targets, q.support, kind, ps)
    direct = evaluate_potential(targets, q, kind, ps)
    np.testing.assert_allclose(direct, lm.entries @ q.values, rtol=1e-13, atol=1e-15)


def test_zero_density_gives_zero_field(circle_setup):
    _, _, ps = circle_setup
    q = DensityVector(ps.gamma_minus_indices, np.zeros(len(ps.gamma_minus_indices)))
    out = evaluate_potential(ps.gamma_plus_indices[:5], q, LayerKind.SINGLE, ps)
    assert np.all(out == 0.0)


def test_unit_density_reproduces_matrix_column(circle_setup):
    _, _, ps = circle_setup
    n = len(ps.gamma_minus_indices)
    values = np.zeros(n)
    values[7] = 1.0
    q = DensityVector(ps.gamma_minus_indices, values)
    targets = ps.gamma_plus_indices[:20]
    lm = assemble_layer_matrix(targets, ps.gamma_minus_indices, LayerKind.SINGLE, ps)
    out = evaluate_potential(targets, q, LayerKind.SINGLE, ps)
    np.testing.assert_allclose(out, lm.entries[:, 7], rtol=1e-14)


def test_density_vector_validates_lengths(circle_setup):
    _, _, ps = circle_setup
    with pytest.raises(AssemblyError):
        DensityVector(ps.gamma_minus_indices, np.zeros(3))


def test_layer_matrix_validates_shape():
    with pytest.raises(AssemblyError):
        LayerMatrix(rows=np.zeros((3, 2), dtype=int), cols=np.zeros((2, 2), dtype=int),
                    entries=np.zeros((3, 3)), kind=LayerKind.SINGLE)


def test_matrix_dump_format(tmp_path, circle_setup):
    _, _, ps = circle_setup
    lm = assemble_layer_matrix(ps.gamma_plus_indices[:3], ps.gamma_minus_indices[:4],
                               LayerKind.SINGLE, ps)
    path = tmp_path / "block.txt"
    dump_layer_matrix(lm, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "3 4"
    parsed = np.array([[float(v) for v in line.split()] for line in lines[1:]])
    np.testing.assert_allclose(parsed, lm.entries, rtol=1e-15)
