"""
Tests for the critical propagators
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from boundary_ising.errors import InvalidSpec, QuadratureNotConverged
from boundary_ising.propagators import (
    ISOTROPIC_T,
    PropagatorKind,
    QuadratureGrid,
    _self_converged,
    band_weight,
    bulk_edge_split,
    couplings,
    cutoff_propagator,
    decay_rate_fit,
    dimensional_bound_fit,
    eta_band,
    evaluate_batch,
    full_critical_propagator,
    infinite_plane_propagator,
    k1_integrated,
    edge_propagator,
    massive_closed_form,
    massive_propagator,
    midpoint_nodes,
    propagator,
    row_sum,
    scale_le_propagator,
    scale_propagator,
)


@pytest.mark.parametrize("dx", [-3, -1, 0, 1, 2, 5])
def test_massive_matches_geometric_series(dx):
    """Test the 1D quadrature against (+-t)^|dx|"""
    value = massive_propagator(dx, 0.3)

    assert np.allclose(value, massive_closed_form(dx, 0.3), atol=1e-12)


def test_massive_limits():
    """Test weights and separations out of range"""
    with pytest.raises(InvalidSpec):
        massive_propagator(1, 1.0)
    with pytest.raises(InvalidSpec):
        massive_propagator(10 ** 7)


def test_critical_couplings():
    """Test the isotropic point is self-dual and massless at k = 0"""
    cp = couplings(ISOTROPIC_T)

    assert cp.t2 == pytest.approx(ISOTROPIC_T)
    assert cp.a == pytest.approx(cp.b)
    assert cp.b0 + cp.b1 == pytest.approx(1.0)


def test_midpoint_nodes_symmetric():
    """Test the grid is symmetric and avoids k = 0"""
    k = midpoint_nodes(16)

    assert np.allclose(k, -k[::-1])
    assert np.min(np.abs(k)) > 0.0


def test_eta_bands():
    """Test dyadic bands tile [0, inf)"""
    assert eta_band(0) == (0.0, 1.0)
    assert eta_band(-1) == (1.0, 4.0)
    assert eta_band(-2) == (4.0, 16.0)
    with pytest.raises(InvalidSpec):
        eta_band(1)


def test_band_weight_rules_agree():
    """Test the exact eta integral against Gauss-Legendre"""
    D = np.linspace(0.05, 2.0, 9)
    for lo, hi in ((0.0, 1.0), (1.0, 4.0), (4.0, 16.0)):
        exact = band_weight(lo, hi, QuadratureGrid())(D)
        gauss = band_weight(lo, hi, QuadratureGrid(eta_rule="gauss"))(D)
        assert np.allclose(gauss, exact, rtol=1e-10, atol=0.0)


def test_grid_validation():
    """Test momentum grids must be even"""
    with pytest.raises(ValidationError):
        QuadratureGrid(n_k=129)
    refined = QuadratureGrid(n_k=64).refined()
    assert refined.n_k == 128
    assert refined.k2_nodes == 256


@pytest.mark.parametrize("method", ["fast", "grid"])
@pytest.mark.parametrize("dx,row,h", [(0, 1, 0), (2, 3, -1), (-3, 2, -2), (1, 4, 0)])
def test_fictitious_row_cancellation(dx, row, h, method):
    """Test the components that must vanish when one point sits on z2 = 0"""
    grid = QuadratureGrid(n_k=64)
    low = scale_propagator((dx, 0), (0, row), h, grid=grid, check=False, method=method)
    high = scale_propagator((dx, row), (0, 0), h, grid=grid, check=False, method=method)

    assert abs(low.component("+", "+")) < 1e-12
    assert abs(low.component("+", "-")) < 1e-12
    assert abs(high.component("+", "+")) < 1e-12
    assert abs(high.component("-", "+")) < 1e-12


def test_full_propagator_cancellation_on_row_zero(coarse_grid):
    """Test the fast path obeys the same vanishing components"""
    low = full_critical_propagator((2, 0), (0, 3), grid=coarse_grid)

    assert abs(low.component("+", "+")) < 1e-12
    assert abs(low.component("+", "-")) < 1e-12


@pytest.mark.parametrize("z,zp", [((0, 1), (0, 1)), ((2, 1), (0, 3)), ((-1, 2), (3, 1))])
def test_full_propagator_antisymmetry(z, zp, coarse_grid):
    """Test g(z, z') = -g(z', z)^T"""
    forward = full_critical_propagator(z, zp, grid=coarse_grid).value
    backward = full_critical_propagator(zp, z, grid=coarse_grid).value

    assert np.allclose(forward, -backward.T, atol=1e-9)


def test_bulk_plus_edge_is_full(coarse_grid):
    """Test the infinite-plane and image parts add up"""
    z, zp = (1, 2), (0, 1)
    full = full_critical_propagator(z, zp, grid=coarse_grid).value
    bulk = infinite_plane_propagator(z, zp, grid=coarse_grid).value
    edge = edge_propagator(z, zp, grid=coarse_grid).value

    assert np.allclose(bulk + edge, full, atol=1e-12)


def test_bulk_part_is_translation_invariant(coarse_grid):
    """Test the infinite-plane part depends on z - z' only"""
    first = infinite_plane_propagator((1, 2), (0, 1), grid=coarse_grid).value
    second = infinite_plane_propagator((4, 5), (3, 4), grid=coarse_grid).value

    assert np.allclose(first, second, atol=1e-9)


def test_telescoping_to_full_propagator(coarse_grid):
    """Test the closed-form tail g^(<=h) plus Gauss-in-eta scale bands rebuilds the full propagator"""
    h = -2
    for z, zp in (((0, 1), (0, 1)), ((2, 2), (0, 1)), ((-1, 3), (1, 2))):
        total = scale_le_propagator(z, zp, h, grid=coarse_grid).value
        for j in range(h + 1, 1):
            total = total + scale_propagator(z, zp, j, grid=coarse_grid).value
        full = full_critical_propagator(z, zp, grid=coarse_grid).value

        assert np.allclose(total, full, atol=1e-10)


def test_scale_le_at_zero_is_full(coarse_grid):
    """Test g^(<=0) is the full propagator"""
    le = scale_le_propagator((1, 1), (0, 2), 0, grid=coarse_grid)
    full = full_critical_propagator((1, 1), (0, 2), grid=coarse_grid)

    assert le.kind is PropagatorKind.SCALE_LE
    assert np.allclose(le.value, full.value)


def test_bulk_edge_split_adds_to_scale(coarse_grid):
    """Test the single-scale bulk and image parts sum to g^(h)"""
    bulk, edge = bulk_edge_split((1, 2), (0, 1), -1, grid=coarse_grid)
    total = scale_propagator((1, 2), (0, 1), -1, grid=coarse_grid)

    assert bulk.kind is PropagatorKind.INFINITE
    assert edge.kind is PropagatorKind.EDGE
    assert np.allclose(bulk.value + edge.value, total.value, atol=1e-14)


def test_cutoff_at_zero_eta_is_local():
    """Test g^[0] vanishes away from the diagonal rows"""
    sample = cutoff_propagator((0, 5), (0, 1), 0.0, grid=QuadratureGrid(n_k=64))

    assert sample.norm() < 1e-12
    with pytest.raises(InvalidSpec):
        cutoff_propagator((0, 1), (0, 1), -1.0)


@pytest.mark.parametrize("z2", [1, 2, 4])
def test_row_sum_closed_form(z2):
    """Test the zero-momentum row sum equals 2(1-t^2)/b = 1 + sqrt2"""
    assert row_sum(z2) == pytest.approx(1.0 + math.sqrt(2.0), rel=1e-12)
    assert row_sum(0) == 0.0


def test_dispatcher_requirements():
    """Test kinds that need h or eta"""
    with pytest.raises(InvalidSpec):
        propagator(PropagatorKind.CUTOFF, (0, 1), (0, 1))
    with pytest.raises(InvalidSpec):
        propagator(PropagatorKind.SCALE, (0, 1), (0, 1))

    massive = propagator(PropagatorKind.MASSIVE, (1, 1), (0, 2))
    assert massive.norm() == 0.0


def test_evaluate_batch_keeps_order(coarse_grid):
    """Test batch evaluation in threads preserves request order"""
    requests = [
        {"kind": "massive", "z": [dx, 1], "zp": [0, 1]} for dx in range(4)
    ]

    samples = evaluate_batch(requests, grid=coarse_grid, workers=3)

    assert [s.z for s in samples] == [(dx, 1) for dx in range(4)]
    for dx, sample in enumerate(samples):
        assert sample.component("+", "-") == pytest.approx((-ISOTROPIC_T) ** dx, abs=1e-12)


def test_sample_to_dict(coarse_grid):
    """Test JSON rendering of a sample"""
    data = scale_propagator((0, 1), (0, 1), 0, grid=coarse_grid).to_dict()

    assert set(data["components"]) == {"++", "+-", "-+", "--"}
    assert data["kind"] == "scale"
    assert data["h"] == 0
    assert data["meta"]["k2_nodes"] >= coarse_grid.k2_nodes
    assert data["meta"]["eta_nodes"] >= coarse_grid.eta_nodes


def test_grid_path_reports_grid_size():
    """Test the 2D grid route records its momentum grid"""
    grid = QuadratureGrid(n_k=64)
    data = scale_propagator((0, 1), (0, 1), 0, grid=grid, check=False, method="grid").to_dict()

    assert data["meta"]["n_k"] >= grid.n_k


@pytest.mark.parametrize("z,zp", [((0, 1), (0, 0)), ((0, 1), (0, 1)), ((3, 2), (0, 1))])
def test_default_grid_propagators_are_finite(z, zp):
    """Test the full, bulk and image parts are finite on the default grid"""
    for sample in (
        full_critical_propagator(z, zp),
        infinite_plane_propagator(z, zp),
        edge_propagator(z, zp),
    ):
        assert np.all(np.isfinite(sample.value))


@pytest.mark.parametrize("dx", [0, 1, -2])
def test_k1_moments_stable_near_zero_momentum(dx):
    """Test the k1-integrated braces stay finite and continuous as k2 -> 0"""
    tiny, small = k1_integrated(np.array([2.7e-9]), dx), k1_integrated(np.array([1e-7]), dx)

    for near, far in zip(tiny, small):
        assert np.all(np.isfinite(near))
        assert np.allclose(near, far, atol=1e-2)


def test_k1_integrated_matches_midpoint_sum():
    """Test the closed-form k1 integral against a fine midpoint sum of the braces over D"""
    from boundary_ising.propagators import _numerators

    cp = couplings(ISOTROPIC_T)
    k2 = np.array([0.3, 1.1, 2.5])
    k1 = midpoint_nodes(4096)[:, None]
    dx = 2
    D = cp.a * (1.0 - np.cos(k1)) + cp.b * (1.0 - np.cos(k2[None, :]))
    phase = np.exp(-1j * k1 * dx) / D
    bulk_braces, image_braces = _numerators(cp, k1, k2[None, :])
    bulk, image = k1_integrated(k2, dx)

    for i in range(2):
        for j in range(2):
            assert np.allclose(bulk[i, j], np.mean(phase * bulk_braces[i][j], axis=0), atol=1e-10)
            assert np.allclose(image[i, j], np.mean(phase * image_braces[i][j], axis=0), atol=1e-10)


def test_band_routes_agree_off_the_image_diagonal():
    """Test eta-Gauss bands over exact k1 against the 2D grid with the exact eta weight"""
    z, zp = (1, 2), (0, 1)
    bulk_fast, edge_fast = bulk_edge_split(z, zp, -1, check=False)
    bulk_grid, edge_grid = bulk_edge_split(z, zp, -1, grid=QuadratureGrid(n_k=256), check=False, method="grid")

    assert np.allclose(bulk_fast.value, bulk_grid.value, atol=1e-8)
    for i, j in ((0, 0), (0, 1), (1, 0)):
        assert edge_fast.value[i, j] == pytest.approx(edge_grid.value[i, j], abs=1e-8)


def test_grid_halving_sees_every_image_entry():
    """Test a change confined to the (--) image entry fails the halving test"""
    def drifting(n):
        edge = np.zeros((2, 2), dtype=complex)
        edge[1, 1] = 1.0 / n
        return np.eye(2, dtype=complex), edge

    def settled(n):
        return np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex)

    with pytest.raises(QuadratureNotConverged):
        _self_converged(drifting, 64, 1e-8, "drifting image entry")
    bulk, edge = _self_converged(settled, 64, 1e-8, "settled")
    assert np.allclose(bulk, np.eye(2))


@pytest.mark.slow
def test_dimensional_bound_and_decay():
    """Test ||g^(h)|| scales like 2^h and decays on the scale 2^-h"""
    grid = QuadratureGrid(n_k=128)
    bound = dimensional_bound_fit([0, -1, -2], grid=grid)
    decay = decay_rate_fit([0, -1], grid=grid, steps=2)

    assert set(bound.ratios) == {0, -1, -2}
    assert bound.constant == max(bound.ratios.values())
    assert all(r > 0.0 and math.isfinite(r) for r in bound.ratios.values())
    assert all(s < 1.0 for s in decay.suppression.values())
