"""Torus and SU(2) skew products, sector transfer operators, and the shift seam model."""

import numpy as np
import pytest

from commix import (
    GridField,
    OperatorPair,
    ResolutionError,
    SU2Cocycle,
    RationalApproximationWarning,
    StructureError,
    TorusCocycle,
    TorusFlow,
    cocycle_sum,
    degree_identity_check,
    estimate_degree,
    max_norm,
    sector_apply,
    sector_correlation,
    sector_matrix,
    sector_truncation_sweep,
    shift_weyl_model,
    su2_degree_field,
    su2_irrep,
    torus_degree_field,
    u2_frequency_separation,
    unit_grid,
    unitary_symbol,
)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def golden_flow():
    return TorusFlow([GOLDEN])


def standard_cocycle():
    # winding 2, sector charge 3, one smooth mode pair
    return TorusCocycle([[2]], {(1,): (-0.025j,), (-1,): (0.025j,)}, [3])


def sector_eta(z):
    # q.eta for the standard cocycle: charge 3 against modes +-0.025j
    return 3 * 2 * np.real(-0.025j * np.exp(2j * np.pi * z))


def sector_phase(z):
    return 6 * z + sector_eta(z)


def test_flow_validation_and_advance():
    with pytest.raises(ValueError):
        TorusFlow([1.2])
    with pytest.raises(ValueError):
        TorusFlow([0.0])
    with pytest.warns(RationalApproximationWarning):
        TorusFlow([0.25])
    flow = golden_flow()
    out = flow.advance(np.array([0.9]), 1)
    assert 0.0 <= float(out[0]) < 1.0
    assert float(out[0]) == pytest.approx((0.9 + GOLDEN) % 1.0)


def test_grid_field_sampling_and_shift():
    f = GridField.from_modes({(3,): 1 + 0.5j, (-3,): 1 - 0.5j, (0,): 0.2}, (64,))
    xs = np.arange(64) / 64
    direct = 0.2 + 2 * np.real((1 + 0.5j) * np.exp(2j * np.pi * 3 * xs))
    assert np.max(np.abs(f.values - direct)) <= 1e-12
    shifted = f.shift((0.21,))
    direct_sh = 0.2 + 2 * np.real((1 + 0.5j) * np.exp(2j * np.pi * 3 * (xs + 0.21)))
    assert np.max(np.abs(shifted.values - direct_sh)) <= 1e-12
    assert f.mean() == pytest.approx(0.2)
    assert abs(f.inner(f) - f.norm() ** 2) <= 1e-12
    assert f.occupied_band() == [3]
    with pytest.raises(ValueError):
        GridField(np.zeros(48))


def test_grid_field_refine_is_exact_interpolation():
    f = GridField.from_modes({(3,): 1 + 0.5j, (-3,): 1 - 0.5j}, (32,))
    fine = f.refine(4)
    xs = np.arange(128) / 128
    direct = 2 * np.real((1 + 0.5j) * np.exp(2j * np.pi * 3 * xs))
    assert fine.values.shape == (128,)
    assert np.max(np.abs(fine.values - direct)) <= 1e-12
    g = GridField.from_modes({(0, 2): 1.0, (0, -2): 1.0}, (8, 16))
    assert abs(g.refine(2).norm() - g.norm()) <= 1e-12


def test_cocycle_validation():
    with pytest.raises(ValueError):
        TorusCocycle([[1.5]], {}, [1])
    with pytest.raises(StructureError):
        # a real-valued perturbation needs mirrored conjugate modes
        TorusCocycle([[1]], {(1,): (0.5j,)}, [1])
    coc = standard_cocycle()
    assert list(coc.sector_winding) == [6]


def test_cocycle_sum_matches_brute_force():
    flow = golden_flow()
    coc = standard_cocycle()
    x0 = 0.123
    for n in (1, 4, 9):
        brute = sum(sector_phase(x0 + j * GOLDEN) for j in range(n))
        got = float(np.asarray(cocycle_sum(coc, flow, [x0], n))[0])
        assert abs(got - brute) <= 1e-9 * max(1.0, abs(brute))


def test_cocycle_law():
    flow = golden_flow()
    coc = standard_cocycle()
    x0 = np.array([0.123])
    n, m = 5, 8
    lhs = cocycle_sum(coc, flow, x0, n + m)
    # with unreduced intermediate coordinates the law is exact ...
    rhs = cocycle_sum(coc, flow, x0, n) + cocycle_sum(coc, flow, x0 + n * GOLDEN, m)
    assert abs(float((lhs - rhs)[0])) <= 1e-9
    # ... while reducing mod 1 shifts the winding part by an integer, which
    # leaves the associated phase untouched
    reduced = cocycle_sum(coc, flow, x0, n) + cocycle_sum(coc, flow, flow.advance(x0, n), m)
    gap = float((lhs - reduced)[0])
    assert abs(gap - round(gap)) <= 1e-9
    # inverse branch and the empty sum
    assert float(np.asarray(cocycle_sum(coc, flow, x0, 0))[0]) == 0.0
    neg = cocycle_sum(coc, flow, x0, -4)
    ref = -cocycle_sum(coc, flow, flow.advance(x0, -4), 4)
    assert abs(float((neg - ref)[0])) <= 1e-12


def test_sector_apply_pointwise():
    flow = golden_flow()
    coc = standard_cocycle()
    f = GridField.from_modes({(0,): 1.0, (1,): 0.5, (-1,): 0.25}, (1024,))
    xs = unit_grid((1024,))
    for steps in (1, 3):
        out = sector_apply(coc, flow, f, steps)
        phase = np.exp(2j * np.pi * cocycle_sum(coc, flow, xs, steps))
        moved = (
            1.0
            + 0.5 * np.exp(2j * np.pi * (xs + steps * GOLDEN))
            + 0.25 * np.exp(-2j * np.pi * (xs + steps * GOLDEN))
        )
        assert np.max(np.abs(out.values - phase * moved)) <= 1e-12


def test_sector_apply_group_law_and_unitarity():
    flow = golden_flow()
    coc = standard_cocycle()
    f = GridField.from_modes({(0,): 1.0, (1,): 0.5, (-1,): 0.25}, (1024,))
    two_step = sector_apply(coc, flow, sector_apply(coc, flow, f, 3), 4)
    direct = sector_apply(coc, flow, f, 7)
    assert np.max(np.abs(two_step.values - direct.values)) <= 1e-10
    assert abs(direct.norm() - f.norm()) <= 1e-12
    assert np.max(np.abs(sector_apply(coc, flow, f, 0).values - f.values)) == 0.0


def test_sector_apply_resolution_guard():
    flow = golden_flow()
    coc = standard_cocycle()
    f = GridField.from_modes({(1,): 1.0, (-1,): 1.0}, (256,))
    with pytest.raises(ResolutionError):
        sector_apply(coc, flow, f, 32)


def test_sector_correlation_matches_inner_products():
    flow = golden_flow()
    coc = standard_cocycle()
    f = GridField.from_modes({(1,): 0.7, (-1,): 0.7}, (512,))
    g = GridField.from_modes({(2,): 0.3, (-2,): 0.3, (0,): 0.1}, (512,))
    series = sector_correlation(coc, flow, f, g, 6)
    for n in range(1, 7):
        brute = f.inner(sector_apply(coc, flow, g, n))
        assert abs(series.values[n - 1] - brute) <= 1e-12


def test_sector_matrix_is_valid_pair_and_matches_function_route():
    flow = golden_flow()
    coc = standard_cocycle()
    pair = sector_matrix(coc, flow, 256)
    assert pair.kind == "discrete"
    for steps in (1, 2, 3):
        assert degree_identity_check(pair, steps).passed
    f = GridField.from_modes({(1,): 0.5, (-1,): 0.5, (2,): 0.1, (-2,): 0.1}, (256,))
    matrix_route = pair.main @ f.values
    function_route = sector_apply(coc, flow, f, 1)
    assert np.max(np.abs(matrix_route - function_route.values)) <= 1e-10
    with pytest.raises(ValueError):
        sector_matrix(coc, flow, 100)


def test_torus_degree_field_against_brute_average():
    flow = golden_flow()
    coc = standard_cocycle()
    steps = 50
    rep = torus_degree_field(coc, flow, (64,), steps)
    assert rep.limit == pytest.approx(2 * np.pi * 6 * GOLDEN, rel=1e-12)
    xs = unit_grid((64,))
    brute = np.zeros(64)
    for n in range(steps):
        z = xs + n * GOLDEN
        brute += 2 * np.pi * (6 * GOLDEN + 2 * np.real(2j * np.pi * GOLDEN * 3 * (-0.025j) * np.exp(2j * np.pi * z)))
    brute /= steps
    assert np.max(np.abs(rep.field.values - brute)) <= 1e-9
    assert rep.sup_error == pytest.approx(np.max(np.abs(brute - rep.limit)), rel=1e-9)


def test_torus_degree_sup_error_shrinks():
    flow = golden_flow()
    coc = standard_cocycle()
    errs = [torus_degree_field(coc, flow, (64,), n).sup_error for n in (16, 256)]
    assert errs[1] < errs[0] / 4


def test_su2_irrep_basics():
    rng = np.random.default_rng(301)
    theta = 0.4
    h = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]], dtype=complex)
    coc = SU2Cocycle(h, [1], {(1,): -0.05j, (-1,): 0.05j}, 2)
    g = coc.value(0.37)
    assert max_norm(g @ g.conj().T - np.eye(2)) <= 1e-12
    assert abs(np.linalg.det(g) - 1.0) <= 1e-12
    g2 = coc.value(0.71)
    for label in (0, 1, 2, 3):
        pg = su2_irrep(label, g)
        assert pg.shape == (label + 1, label + 1)
        assert max_norm(pg @ pg.conj().T - np.eye(label + 1)) <= 1e-12
        assert max_norm(su2_irrep(label, g @ g2) - pg @ su2_irrep(label, g2)) <= 1e-12
    assert max_norm(su2_irrep(3, np.eye(2, dtype=complex)) - np.eye(4)) == 0.0
    with pytest.raises(ValueError):
        su2_irrep(-1, g)


def test_su2_irrep_diagonal_weights():
    dg = np.diag(np.exp(1j * np.array([0.3, -0.3])))
    pd = su2_irrep(2, dg)
    weights = np.array([-2, 0, 2])
    assert np.allclose(np.diag(pd), np.exp(1j * 0.3 * weights))
    assert max_norm(pd - np.diag(np.diag(pd))) <= 1e-14


def test_su2_cocycle_validation():
    with pytest.raises(StructureError):
        SU2Cocycle(np.array([[1.0, 0.1], [0.0, 1.0]]), [1], {}, 1)
    with pytest.raises(ValueError):
        SU2Cocycle(np.eye(2, dtype=complex), [0], {}, 1)


def test_su2_accumulated_matches_brute_product():
    flow = golden_flow()
    theta = 0.4
    h = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]], dtype=complex)
    coc = SU2Cocycle(h, [1], {(1,): -0.05j, (-1,): 0.05j}, 2)
    x0 = 0.2
    n = 5
    acc = coc.accumulated_representation(flow, x0, n)
    brute = np.eye(3, dtype=complex)
    for j in range(n):
        brute = coc.representation_value(x0 + j * GOLDEN) @ brute
    assert max_norm(acc - brute) <= 1e-12


def test_su2_degree_field_eigenvalues_and_kernel():
    flow = golden_flow()
    theta = 0.4
    h = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]], dtype=complex)
    for label, expect_kernel in ((1, 0), (2, 1), (3, 0)):
        coc = SU2Cocycle(h, [1], {(1,): -0.05j, (-1,): 0.05j}, label)
        rep = su2_degree_field(coc, flow, (256,), 400)
        rel = np.max(
            np.abs(np.sort(rep.eigenvalues) - np.sort(rep.predicted_eigenvalues))
        ) / max(np.max(np.abs(rep.predicted_eigenvalues)), 1e-12)
        assert rel <= 2e-2
        assert rep.kernel_dim == expect_kernel
        assert rep.sup_deviation <= 0.05


def test_su2_degree_equivariance():
    # conjugating the cocycle conjugates the limit by the lifted rotation
    flow = golden_flow()
    theta = 0.7
    h = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]], dtype=complex)
    modes = {(1,): -0.05j, (-1,): 0.05j}
    plain = su2_degree_field(SU2Cocycle(np.eye(2, dtype=complex), [1], modes, 2), flow, (128,), 200)
    moved = su2_degree_field(SU2Cocycle(h, [1], modes, 2), flow, (128,), 200)
    pih = su2_irrep(2, h)
    assert max_norm(moved.limit_estimate - pih @ plain.limit_estimate @ pih.conj().T) <= 1e-8


def test_u2_frequency_separation():
    y = np.array([GOLDEN])
    b1, b2 = np.array([2.0]), np.array([1.0])
    resonant = u2_frequency_separation(1, 2, b1, b2, y)
    assert not resonant.member
    assert resonant.infimum == 0.0
    assert resonant.minimizer == 1
    clean = u2_frequency_separation(0, 1, b1, b2, y)
    assert clean.member
    assert clean.infimum == pytest.approx(2 * GOLDEN)
    assert clean.values == pytest.approx((4 * GOLDEN, 2 * GOLDEN))
    with pytest.raises(ValueError):
        u2_frequency_separation(0, 1, np.array([0.5]), b2, y)


def test_shift_model_seam_symbol():
    model = shift_weyl_model(8, 2)
    sym = unitary_symbol(model.pair)
    expect = np.eye(8, dtype=complex)
    expect[0, 0] = 1.0 - 8.0
    assert max_norm(sym - expect) <= 1e-12
    assert list(model.interior) == [2, 3, 4, 5]
    with pytest.raises(ValueError):
        shift_weyl_model(8, 5)
    with pytest.raises(ValueError):
        shift_weyl_model(3, 1)


def test_shift_model_degree_vanishes_on_window_multiples():
    model = shift_weyl_model(12, 3)
    est = estimate_degree(model.pair, [12, 24, 48])
    assert est.converged and not est.diverging
    assert max_norm(est.limit) == 0.0
    # off the resonant schedule the average is genuinely nonzero
    rough = estimate_degree(model.pair, [5, 7, 11])
    assert max_norm(rough.limit) > 1e-3


def test_sector_truncation_sweep_reports_no_fake_eigenvectors():
    flow = golden_flow()
    coc = standard_cocycle()
    sweep = sector_truncation_sweep(coc, flow, (128, 256))
    assert [e.size for e in sweep] == [128, 256]
    for entry in sweep:
        assert entry.eigenvalue_count == entry.size
        # truncation eigenvectors must stay visibly unfaithful to the full
        # operator: nothing here converges to point spectrum
        assert entry.min_residual >= 1e-6
        assert entry.min_residual >= 0.05
        assert entry.median_residual >= entry.min_residual
