"""Tests for the lattice Green's function evaluators."""

import math

import numpy as np
import pytest

from latticebae.errors import QuadratureError
from latticebae.lgf import (
    LatticeIndex,
    LgfTable,
    R_SWITCH,
    canonical_index,
    lgf,
    lgf_asymptotic,
    lgf_grid,
    lgf_quadrature,
    lgf_recursion_table,
    warm,
)

# Closed forms: G(1,0) from the stencil identity at the origin, G(1,1)
# analytically, the ring-2 values by substituting those into the stencil
# identity at (1,0), (1,1) and (2,1).
G00 = 0.0
G10 = -0.25
G11 = -1.0 / math.pi
G20 = 2.0 / math.pi - 1.0
G21 = 0.25 - 2.0 / math.pi
G22 = -4.0 / (3.0 * math.pi)
G31 = 4.0 * G21 - G11 - G22 - G20

CLOSED_FORMS = {
    (0, 0): G00,
    (1, 0): G10,
    (1, 1): G11,
    (2, 0): G20,
    (2, 1): G21,
    (2, 2): G22,
    (3, 1): G31,
}


def stencil_residual(fn, m):
    """4 G(m) - sum of neighbour values, minus the delta at the origin."""
    m1, m2 = m
    total = 4.0 * fn((m1, m2))
    for d1, d2 in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        total -= fn((m1 + d1, m2 + d2))
    return total - (1.0 if m == (0, 0) else 0.0)


def test_quadrature_matches_closed_forms():
    for m, ref in CLOSED_FORMS.items():
        assert lgf_quadrature(m, 1e-14) == pytest.approx(ref, abs=1e-12)


def test_quadrature_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        lgf_quadrature((1, 0), 1e-3)
    with pytest.raises(ValueError):
        lgf_quadrature((1, 0), 0.0)


def test_canonicalization_covers_symmetry_group():
    rng = np.random.default_rng(7)
    for _ in range(100):
        m1, m2 = rng.integers(-50, 51, size=2)
        rep = canonical_index((m1, m2))
        assert rep.m1 >= rep.m2 >= 0
        assert {abs(m1), abs(m2)} == {rep.m1, rep.m2}
        assert lgf((m1, m2)) == lgf((m2, m1)) == lgf((-m1, m2)) == lgf((m1, -m2))


def test_lattice_index_arithmetic():
    m = LatticeIndex(3, -2)
    assert m + LatticeIndex(1, 0) == LatticeIndex(4, -2)
    assert m - (0, 1) == LatticeIndex(3, -3)
    assert -m == LatticeIndex(-3, 2)


def test_delta_identity_through_dispatcher():
    # Sweep all indices with |m| <= 40; the stencil reaches across the
    # quadrature/asymptotic switch so this exercises both regimes.
    warm(42)
    for m1 in range(-40, 41):
        for m2 in range(-40, 41):
            if math.hypot(m1, m2) > 40.0:
                continue
            assert abs(stencil_residual(lgf, (m1, m2))) < 1e-10


def test_regime_agreement_band():
    # Quadrature and expansion must agree on a band straddling R_SWITCH.
    worst = 0.0
    for a in range(0, 51):
        for b in range(0, a + 1):
            r = math.hypot(a, b)
            if R_SWITCH - 10.0 <= r <= R_SWITCH + 20.0:
                diff = abs(lgf_quadrature((a, b), 1e-13) - lgf_asymptotic((a, b)))
                worst = max(worst, diff)
    assert worst <= 1e-10


def test_asymptotic_rejects_origin():
    with pytest.raises(ValueError):
        lgf_asymptotic((0, 0))


def test_asymptotic_on_axis_has_unit_cosines():
    r = 1.0e6
    expected = (
        -(math.log(r) + np.euler_gamma + 0.5 * math.log(8.0)) / (2.0 * math.pi)
        + 1.0 / (24.0 * math.pi * r**2)
        + 43.0 / (480.0 * math.pi * r**4)
        + 949.0 / (2016.0 * math.pi * r**6)
    )
    assert lgf_asymptotic((10**6, 0)) == pytest.approx(expected, rel=1e-15)


def test_asymptotic_diagonal_flips_cos4theta():
    # theta = pi/4 makes cos(4 theta) = -1 and cos(8 theta) = +1.
    k = 2000
    r2 = 2.0 * k * k
    expected = (
        -(0.5 * math.log(r2) + np.euler_gamma + 0.5 * math.log(8.0)) / (2.0 * math.pi)
        - 1.0 / (24.0 * math.pi * r2)
        + (25.0 - 18.0) / (480.0 * math.pi * r2**2)
        + (-490.0 + 459.0) / (2016.0 * math.pi * r2**3)
    )
    assert lgf_asymptotic((k, k)) == pytest.approx(expected, rel=1e-15)


def test_recursion_table_seeds_and_ring2():
    table = lgf_recursion_table(3)
    assert table.values[(1, 1)] == pytest.approx(G11, abs=1e-15)
    assert table.values[(2, 0)] == pytest.approx(G20, abs=1e-14)
    assert table.values[(2, 1)] == pytest.approx(G21, abs=1e-14)
    assert table.values[(2, 2)] == pytest.approx(G22, abs=1e-14)
    assert table.values[(3, 1)] == pytest.approx(G31, abs=1e-13)


def test_recursion_table_agrees_with_dispatcher():
    table = lgf_recursion_table(12)
    for (a, b), value in table.values.items():
        assert value == pytest.approx(lgf((a, b)), abs=1e-8)


def test_recursion_table_rejects_out_of_cap():
    with pytest.raises(ValueError):
        lgf_recursion_table(0)
    with pytest.raises(ValueError):
        lgf_recursion_table(31)


def test_recursion_values_satisfy_interior_stencil():
    table = lgf_recursion_table(8)

    def fn(m):
        return table.values[canonical_index(m)]

    for m in [(2, 1), (3, 0), (4, 2), (5, 5), (6, 1), (7, 3)]:
        assert abs(stencil_residual(fn, m)) < 1e-12


def test_dispatcher_memoizes():
    table = LgfTable()
    value = lgf((4, 1), table)
    assert table.values[(4, 1)] == value
    assert lgf((-1, 4), table) == value


def test_grid_matches_pointwise_values():
    radius = 34
    grid = lgf_grid(radius)
    assert grid.shape == (2 * radius + 1, 2 * radius + 1)
    rng = np.random.default_rng(11)
    for _ in range(60):
        m1, m2 = rng.integers(-radius, radius + 1, size=2)
        assert grid[m1 + radius, m2 + radius] == pytest.approx(lgf((m1, m2)), abs=1e-13)
    assert not grid.flags.writeable


def test_cache_file_round_trip(tmp_path):
    table = warm(5, LgfTable())
    path = tmp_path / "lgf.cache"
    table.save(path)
    text = path.read_text()
    assert text.splitlines()[0] == "lgf-cache v1 radius=5"
    reloaded = LgfTable.load(path)
    assert reloaded.radius == 5
    assert reloaded.values == table.values


def test_cache_file_rejects_foreign_header(tmp_path):
    path = tmp_path / "bogus.cache"
    path.write_text("something else\n1,0,-0.25\n")
    with pytest.raises(ValueError):
        LgfTable.load(path)


def test_quadrature_error_carries_estimate():
    err = QuadratureError("no convergence", achieved=3e-9)
    assert err.achieved == 3e-9
