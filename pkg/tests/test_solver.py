"""Explicit leapfrog scheme: exactness, reproducibility, and failure modes."""

import numpy as np
import pytest

import oracles
from stochwave import (
    BlowUpError,
    BrownianPath,
    GridFunction,
    ProblemData,
    SchemeCoefficients,
    SingularUpdateError,
    build_grid,
    observe,
    path_seed,
    random_field,
    random_slice,
    run_ensemble,
    sample_brownian,
    scheme_residual,
    sine_field,
    sine_slice,
    solve,
    zero_field,
)


def zero_path(grid, seed=0):
    return BrownianPath(np.zeros(grid.N + 1), seed)


def wave_data(grid):
    return ProblemData(
        y0=sine_slice(grid, 1, 1.0),
        y1=zero_field(grid),
        g=zero_field(grid, "primal", "primal"),
    )


def test_path_seed_is_splitmix64():
    assert [path_seed(0, k) for k in range(5)] == list(oracles.SPLITMIX64_SEED0)
    # distinct masters decorrelate, same call is pure
    assert path_seed(1, 0) != path_seed(0, 0)
    assert path_seed(7, 3) == path_seed(7, 3)


def test_sample_brownian_moments():
    grid = build_grid(3, 10_000, 100.0)      # dt = 0.01
    path = sample_brownian(grid.N, grid.dt, seed=2024)
    assert path.increments.shape == (grid.N + 1,)
    var = np.var(path.increments, ddof=1)
    lo, hi = oracles.BROWNIAN_VAR_BAND_10K
    assert lo <= var <= hi
    # reproducible, and distinct seeds differ
    again = sample_brownian(grid.N, grid.dt, seed=2024)
    np.testing.assert_array_equal(path.increments, again.increments)
    assert not np.array_equal(
        path.increments, sample_brownian(grid.N, grid.dt, seed=2025).increments
    )


def test_problem_data_validation():
    grid = build_grid(5, 5, 1.0)
    good = wave_data(grid)
    assert good.grid == grid
    bad_y0 = GridFunction(
        grid, np.ones(7), grid.space_axis("closure"), None
    )
    with pytest.raises(ValueError):
        ProblemData(y0=bad_y0, y1=zero_field(grid), g=zero_field(grid, "primal", "primal"))
    with pytest.raises(ValueError):
        ProblemData(
            y0=zero_field(grid, "primal", None),
            y1=zero_field(grid),
            g=zero_field(grid, "primal", "primal"),
        )


def test_matches_reference_stepper_exactly():
    grid = build_grid(7, 9, 0.9)
    data = ProblemData(
        y0=random_slice(grid, 1, 1.0),
        y1=random_slice(grid, 2, 0.6),
        g=random_field(grid, 3, 0.7),
        f=random_field(grid, 4, 0.2),
    )
    coeffs = SchemeCoefficients.constant(grid, a=-0.3, b=0.25, c=0.4, d=0.5)
    path = sample_brownian(grid.N, grid.dt, 777)
    traj = solve(data, coeffs, path, grid)
    co = {k: np.asarray(getattr(coeffs, k).values) for k in "abcd"}
    Yref = oracles.reference_leapfrog(
        grid.M, grid.N, grid.T,
        data.y0.values, data.y1.values,
        co["a"], co["b"], co["c"], co["d"],
        data.g.values, data.f.values, path.increments,
    )
    np.testing.assert_allclose(traj.y.values, Yref, rtol=0, atol=1e-13)


def test_boundary_pinned_exactly():
    grid = build_grid(9, 30, 1.5)
    data = ProblemData(
        y0=random_slice(grid, 10, 1.0),
        y1=random_slice(grid, 11, 1.0),
        g=random_field(grid, 12, 1.0),
    )
    coeffs = SchemeCoefficients.constant(grid, a=1.0, b=0.5, c=0.2, d=0.8)
    traj = solve(data, coeffs, sample_brownian(grid.N, grid.dt, 5), grid)
    assert np.all(traj.y.values[0] == 0.0)
    assert np.all(traj.y.values[-1] == 0.0)


def test_unit_cfl_standing_wave_exact_at_integer_times():
    # dt = dx propagates the mode-1 standing wave exactly to t = 1: the
    # scheme's dispersion relation is exact there and the first-step
    # initialization error cancels at integer times
    for M in (15, 31):
        N = M + 1                       # T = 1, dt = dx
        grid = build_grid(M, N, 1.0)
        traj = solve(
            wave_data(grid),
            SchemeCoefficients.constant(grid),
            zero_path(grid),
            grid,
        )
        exact = np.array([oracles.dalembert(x, 1.0) for x in grid.space_closure])
        err = np.max(np.abs(traj.y.values[:, N] - exact))
        assert err < 1e-12


def test_first_level_and_initial_slice():
    grid = build_grid(4, 4, 1.0)
    data = ProblemData(
        y0=sine_slice(grid, 1, 1.0),
        y1=sine_slice(grid, 2, 1.0),
        g=zero_field(grid, "primal", "primal"),
    )
    traj = solve(data, SchemeCoefficients.constant(grid), zero_path(grid), grid)
    np.testing.assert_array_equal(traj.y.values[:, 0], data.y0.values)
    interior = data.y0.values[1:-1] + grid.dt * data.y1.values[1:-1]
    np.testing.assert_array_equal(traj.y.values[1:-1, 1], interior)


def test_scheme_residual_of_solution_is_rounding():
    grid = build_grid(8, 12, 1.0)
    data = ProblemData(
        y0=random_slice(grid, 20, 1.0),
        y1=random_slice(grid, 21, 1.0),
        g=random_field(grid, 22, 1.0),
        f=random_field(grid, 23, 1.0),
    )
    coeffs = SchemeCoefficients.constant(grid, a=0.4, b=-0.2, c=0.5, d=0.9)
    path = sample_brownian(grid.N, grid.dt, 99)
    traj = solve(data, coeffs, path, grid)
    res = scheme_residual(traj.y, coeffs, data.g, data.f, path, grid)
    assert res < 1e-12


def test_singular_update_detected_upfront():
    grid = build_grid(5, 4, 1.0)          # dt = 0.25, c = 4 makes c dt = 1
    data = wave_data(grid)
    coeffs = SchemeCoefficients.constant(grid, c=4.0)
    with pytest.raises(SingularUpdateError):
        solve(data, coeffs, zero_path(grid), grid)


def test_blow_up_reports_first_level():
    # dt >> dx, enough steps for the instability to reach infinity
    grid = build_grid(63, 512, 128.0)
    data = ProblemData(
        y0=sine_slice(grid, 4, 1.0),
        y1=zero_field(grid),
        g=zero_field(grid, "primal", "primal"),
    )
    with pytest.raises(BlowUpError) as exc:
        solve(data, SchemeCoefficients.constant(grid), zero_path(grid), grid)
    assert exc.value.n >= 2
    assert 1 <= exc.value.j <= grid.M
    assert exc.value.path == 0


def test_cfl_warning_flag():
    g1 = build_grid(7, 64, 1.0)           # dt = 1/64 < dx = 1/8
    t1 = solve(wave_data(g1), SchemeCoefficients.constant(g1), zero_path(g1), g1)
    assert not t1.cfl_warning
    g2 = build_grid(7, 4, 1.0)            # dt = 0.25 > dx
    t2 = solve(wave_data(g2), SchemeCoefficients.constant(g2), zero_path(g2), g2)
    assert t2.cfl_warning


def test_run_ensemble_reproducible_and_decorrelated():
    grid = build_grid(6, 10, 1.0)
    data = ProblemData(
        y0=sine_slice(grid, 1, 1.0),
        y1=zero_field(grid),
        g=sine_field(grid, 1, 1.0),
    )
    coeffs = SchemeCoefficients.constant(grid, d=0.7)
    e1 = run_ensemble(data, coeffs, grid, paths=4, master_seed=13)
    e2 = run_ensemble(data, coeffs, grid, paths=4, master_seed=13)
    for a, b in zip(e1.trajectories, e2.trajectories):
        np.testing.assert_array_equal(a.y.values, b.y.values)
    seeds = [t.path.seed for t in e1.trajectories]
    assert len(set(seeds)) == 4
    assert seeds == [path_seed(13, k) for k in range(4)]
    # single-path ensemble equals a direct solve with the same path
    e3 = run_ensemble(data, coeffs, grid, paths=1, master_seed=13)
    direct = solve(data, coeffs, sample_brownian(grid.N, grid.dt, path_seed(13, 0)), grid)
    np.testing.assert_array_equal(e3.trajectories[0].y.values, direct.y.values)
    np.testing.assert_array_equal(e3.mean_values(), direct.y.values)


def test_observe_flux_and_terminal():
    grid = build_grid(5, 4, 1.0)          # dt = 0.25 is exact in binary
    data = ProblemData(
        y0=sine_slice(grid, 1, 1.0),
        y1=sine_slice(grid, 2, 1.0),
        g=zero_field(grid, "primal", "primal"),
    )
    traj = solve(data, SchemeCoefficients.constant(grid), zero_path(grid), grid)
    obs = observe(traj, grid)
    N = grid.N
    np.testing.assert_array_equal(obs.terminal_y.values, traj.y.values[:, N])
    expected_v = (traj.y.values[:, N + 1] - traj.y.values[:, N]) / grid.dt
    np.testing.assert_array_equal(obs.terminal_v.values, expected_v)
    # flux = first difference across the left boundary at primal times
    expected_flux = (traj.y.values[1, 1 : N + 1] - traj.y.values[0, 1 : N + 1]) / grid.dx
    np.testing.assert_allclose(obs.flux.values, expected_flux, rtol=1e-15)
    # trajectories must carry the full time closure to begin with
    short = traj.y.restrict(time="primal")
    with pytest.raises(ValueError):
        type(traj)(y=short, path=traj.path, cfl_warning=False)


def test_brownian_path_validation():
    with pytest.raises(ValueError):
        BrownianPath(np.zeros((2, 2)), 0)
    with pytest.raises(ValueError):
        BrownianPath(np.zeros(1), 0)
