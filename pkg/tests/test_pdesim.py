"""Method-of-lines evolution, residuals, symmetry transport, and the spin
chain on the sphere."""

import numpy as np
import pytest

from affsym.canonical import CanonicalSpec, build_system
from affsym.geometry import Connection, DiffusionSystem, scalar_operator
from affsym.liefn import VectorField
from affsym.pdesim import (
    SolutionGrid,
    apply_flow_to_grid,
    dump_csv,
    evolve,
    evolve_snapshots,
    heisenberg_embedding_residual,
    heisenberg_system,
    make_grid,
    pde_residual,
    sphere_to_stereo,
    stability_limit,
    stereo_to_sphere,
    symmetry_transport_check,
    transport_convergence,
)

L = 2 * np.pi


def heat_system(n=1, a=1.0):
    return DiffusionSystem(n, scalar_operator(n, a), Connection.zeros(n))


def test_heat_decay_matches_kernel():
    sys = heat_system()
    grid = make_grid([np.sin], 64, L)
    out = evolve(sys, grid, dt=0.002, steps=50)
    expected = np.exp(-0.1) * np.sin(grid.x)
    scale = np.max(np.abs(expected))
    assert np.max(np.abs(out.values[:, 0] - expected)) <= 1e-3 * scale


def test_constant_data_is_fixed_point():
    sys = build_system(CanonicalSpec("constcurv_22_13", n=2, a=1.0))
    grid = make_grid([lambda x: 0.2 + 0 * x, lambda x: -0.1 + 0 * x], 16, L)
    out = evolve(sys, grid, dt=1e-4, steps=20)
    assert np.max(np.abs(out.values - grid.values)) == 0.0


def test_stability_warning():
    sys = heat_system()
    grid = make_grid([np.sin], 16, L)
    with pytest.warns(RuntimeWarning):
        evolve(sys, grid, dt=10 * stability_limit(sys, grid), steps=1)


def test_blowup_reports_step():
    # backwards heat equation blows up fast
    sys = heat_system(a=-1.0)
    grid = make_grid([lambda x: np.sin(8 * x)], 64, L)
    with pytest.raises(RuntimeError, match="step"):
        evolve(sys, grid, dt=0.004, steps=2000)


def test_pde_residual_zero_for_linear_profile():
    sys = heat_system()
    grid = make_grid([lambda x: x], 64, L)
    snaps = [grid.copy(t=k * 0.01) for k in range(3)]
    # away from the periodic seam both sides vanish (up to stencil roundoff)
    assert pde_residual(sys, snaps, exclude_boundary=2) <= 1e-10


def test_pde_residual_second_order():
    sys = heat_system()
    res = []
    for N, dt in ((32, 0.004), (64, 0.002)):
        grid = make_grid([np.sin], N, L)
        snaps = evolve_snapshots(sys, grid, dt, steps=4, every=1)
        res.append(pde_residual(sys, snaps))
    ratio = res[0] / res[1]
    assert 3.4 <= ratio <= 4.6


def test_pde_residual_negative_control():
    sys = heat_system()
    grid = make_grid([np.sin], 64, L)
    snaps = evolve_snapshots(sys, grid, 0.002, steps=4, every=1)
    wrong = heat_system(a=3.0)
    assert pde_residual(wrong, snaps) > 0.5


def test_pde_residual_input_checks():
    sys = heat_system()
    grid = make_grid([np.sin], 64, L)
    with pytest.raises(ValueError):
        pde_residual(sys, [grid, grid])
    other = make_grid([np.sin], 32, L)
    with pytest.raises(ValueError):
        pde_residual(sys, [grid, other, grid])
    s1, s2, s3 = grid.copy(t=0.0), grid.copy(t=0.1), grid.copy(t=0.3)
    with pytest.raises(ValueError):
        pde_residual(sys, [s1, s2, s3])


# ---------------------------------------------------------------------------
# Symmetry transport
# ---------------------------------------------------------------------------


def test_transport_tau_zero_is_exact():
    sys = heat_system(2)
    grid = make_grid([np.sin, np.cos], 32, L)
    eta = VectorField.from_strings(2, ["y2", "-y1"])
    rep = symmetry_transport_check(sys, eta, 0.0, grid, 0.004, 10)
    assert rep["max_abs"] == 0.0


def test_transport_translation_exact_equivariance():
    sys = heat_system(2)
    grid = make_grid([np.sin, np.cos], 32, L)
    eta = VectorField.from_strings(2, ["1", "0"])
    rep = symmetry_transport_check(sys, eta, 0.7, grid, 0.004, 25)
    assert rep["max_abs"] <= 1e-12


def test_transport_scaling_flat_is_discretely_equivariant():
    # affine flows commute with the linear stencil exactly; the mismatch sits
    # at integrator-tolerance level at every resolution
    sys = heat_system(1)
    eta = VectorField.from_strings(1, ["y1"])
    gaps = transport_convergence(
        sys, eta, 0.1, [np.sin], N0=16, L=L, dt0=0.016, steps0=4, levels=2
    )
    assert max(gaps) <= 1e-9


def test_transport_rejects_non_symmetry():
    sys = heat_system(1)
    eta = VectorField.from_strings(1, ["y1^2"])
    grid = make_grid([np.sin], 16, L)
    with pytest.raises(ValueError):
        symmetry_transport_check(sys, eta, 0.1, grid, 0.004, 2)


def test_transport_nonlinear_flow_second_order():
    # quadratic sphere symmetry on the n=2 constant-curvature system: the
    # flow is nonlinear, so the discrete mismatch is a genuine O(dx^2)
    sys = build_system(CanonicalSpec("constcurv_22_13", n=2, a=1.0))
    eta = VectorField.from_strings(2, ["(1 + y1^2 - y2^2)/2", "y1*y2"])
    profiles = [
        lambda x: 0.25 * np.sin(x) + 0.05,
        lambda x: 0.2 * np.cos(x) - 0.03,
    ]
    gaps = transport_convergence(
        sys, eta, 0.1, profiles, N0=16, L=L, dt0=0.01, steps0=5, levels=3
    )
    orders = np.log2(np.array(gaps[:-1]) / np.array(gaps[1:]))
    assert orders[-1] >= 2.0 - 0.25


# ---------------------------------------------------------------------------
# Spin chain
# ---------------------------------------------------------------------------


def spin_profiles():
    return [
        lambda x: 0.3 * np.sin(x) + 0.05,
        lambda x: 0.2 * np.cos(x) - 0.1,
    ]


def test_heisenberg_embedding_residual_second_order():
    res = []
    for N in (64, 128):
        grid = make_grid(spin_profiles(), N, L)
        res.append(heisenberg_embedding_residual(grid, dt=1e-6))
    ratio = res[0] / res[1]
    assert 3.3 <= ratio <= 4.7


def test_heisenberg_constant_state_is_stationary():
    sys = heisenberg_system()
    grid = make_grid([lambda x: 0.3 + 0 * x, lambda x: -0.2 + 0 * x], 16, L)
    out = evolve(sys, grid, dt=1e-4, steps=50)
    assert np.max(np.abs(out.values - grid.values)) == 0.0


def test_heisenberg_sphere_norm_preserved():
    sys = heisenberg_system()
    grid = make_grid(spin_profiles(), 64, L)
    out = evolve(sys, grid, dt=0.003, steps=100)
    svals = stereo_to_sphere(out.values)
    assert np.max(np.abs(np.sum(svals**2, axis=1) - 1.0)) <= 1e-6


def test_stereo_round_trip():
    grid = make_grid(spin_profiles(), 32, L)
    back = sphere_to_stereo(stereo_to_sphere(grid.values))
    assert np.max(np.abs(back - grid.values)) <= 1e-12


def spin_energy(grid):
    s = stereo_to_sphere(grid.values)
    sx = (np.roll(s, -1, axis=0) - np.roll(s, 1, axis=0)) / (2 * grid.dx)
    return float(np.sum(sx**2) * grid.dx)


def test_heisenberg_energy_drift_shrinks_second_order():
    sys = heisenberg_system()
    drifts = []
    for lev in range(2):
        N = 32 * 2**lev
        dt = 2e-3 / 4**lev
        steps = 50 * 4**lev
        grid = make_grid(spin_profiles(), N, L)
        out = evolve(sys, grid, dt, steps)
        drifts.append(abs(spin_energy(out) - spin_energy(grid)))
    assert drifts[0] / drifts[1] >= 3.0


def test_dump_csv_format(tmp_path):
    grid = make_grid([np.sin], 8, 1.0)
    out = evolve(heat_system(), grid, 1e-5, 2)
    path = tmp_path / "snap.csv"
    with open(path, "w") as fp:
        dump_csv([grid, out], fp)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,x,y1"
    assert len(lines) == 1 + 2 * 8
    t, x, y1 = lines[1].split(",")
    assert float(t) == 0.0 and float(x) == 0.0


def test_grid_validation():
    with pytest.raises(ValueError):
        SolutionGrid(4, 1.0, 0.0, np.zeros((4, 1)))
    with pytest.raises(ValueError):
        SolutionGrid(8, 1.0, 0.0, np.full((8, 1), np.nan))


def test_evolve_records_mean_history():
    sys = heat_system()
    grid = make_grid([np.sin], 16, L)
    out = evolve(sys, grid, dt=0.01, steps=5, record_means=True)
    assert out.mean_history.shape == (6, 1)
    assert np.all(np.isfinite(out.mean_history))


def test_transport_entire_flat_basis_equivariant():
    # every field of the flat symmetry basis generates an affine flow, which
    # commutes with the linear stencil exactly; the mismatch stays at the
    # flow-integrator tolerance on every refinement level
    from affsym.symmetry import flat_symmetry_basis

    sys = heat_system(2)
    for eta in flat_symmetry_basis(2):
        gaps = transport_convergence(
            sys, eta, 0.2, [np.sin, np.cos], N0=16, L=L, dt0=0.016, steps0=2, levels=2
        )
        assert max(gaps) <= 1e-9
