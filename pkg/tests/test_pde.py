"""Finite-volume solver: stepping, conservation, equilibria, wave capture."""

import numpy as np
import pytest

from hystflow import pde_solver as pde
from hystflow.errors import DomainError, NumericalError
from hystflow.pde_solver import (
    FVSolver,
    Grid,
    SolverConfig,
    initial_condition,
    play_residual,
)
from hystflow.tw_solver import TWProblem, integrate_orbit

from conftest import make_model_a, make_model_b

C_MONOTONE = 1.3212945590994374     # chord speed of the (0.1, 0.4) wave


def small_problem(tau=0.045, S_T=0.4):
    return TWProblem(make_model_a(tau=tau), 0.1, S_T)


# ------------------------------------------------------------- grid & config


def test_grid_basics():
    g = Grid(z_in=-2.0, z_out=8.0, N=100)
    assert g.dz == pytest.approx(0.1)
    assert g.centers.shape == (100,)
    assert g.centers[0] == pytest.approx(-2.0 + 0.05)
    assert g.centers[-1] == pytest.approx(8.0 - 0.05)


def test_grid_validation():
    with pytest.raises(DomainError):
        Grid(z_in=1.0, z_out=8.0, N=100)    # inlet must sit left of 0
    with pytest.raises(DomainError):
        Grid(z_in=-2.0, z_out=-1.0, N=100)
    with pytest.raises(DomainError):
        Grid(z_in=-2.0, z_out=8.0, N=5)


def test_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(dt=-0.1)
    with pytest.raises(DomainError):
        SolverConfig(tol=0.0)
    with pytest.raises(DomainError):
        SolverConfig(L=-1.0)


# ------------------------------------------------------------- initial data


def test_initial_condition_endpoints():
    g = Grid(z_in=-5.0, z_out=20.0, N=250)
    S = initial_condition(g, 0.1, 0.55, l=1.0)
    z = g.centers
    assert np.all(S[z < -1.0] == 0.55)
    assert np.all(S[z > 1.0] == 0.1)
    # the ramp is odd around z = 0, so the interpolated value there is the
    # arithmetic midpoint
    assert np.interp(0.0, z, S) == pytest.approx(0.5 * (0.1 + 0.55), abs=1e-12)


def test_initial_condition_monotone():
    g = Grid(z_in=-3.0, z_out=9.0, N=240)
    S = initial_condition(g, 0.2, 0.8, l=2.0)
    assert np.all(np.diff(S) <= 1e-15)
    assert S.min() == pytest.approx(0.2) and S.max() == pytest.approx(0.8)


def test_initial_condition_misfit():
    g = Grid(z_in=-1.0, z_out=9.0, N=100)
    with pytest.raises(DomainError):
        initial_condition(g, 0.1, 0.55, l=2.0)   # ramp wider than the inlet


def test_play_residual_signs():
    m = make_model_a()
    S = np.array([0.3, 0.3, 0.3])
    pci, pcd = m.pc("i", 0.3), m.pc("d", 0.3)
    p = np.array([pci - 0.5, 0.5 * (pci + pcd), pcd + 0.5])
    r = play_residual(m, S, p)
    assert r[0] == pytest.approx(0.5)
    assert r[1] == 0.0
    assert r[2] == pytest.approx(-0.5)


# ------------------------------------------------------------- equilibria


def test_equilibrium_preserved_exactly():
    # a uniform state on the imbibition curve is a fixed point of the full
    # update: the pressure solve returns in one pass and no mass moves
    prob = small_problem(tau=1.0, S_T=0.1 + 1e-12)
    grid = Grid(z_in=-2.0, z_out=8.0, N=50)
    solver = FVSolver(prob, grid, SolverConfig())
    m = prob.model
    state = pde.GridState(np.full(50, 0.1), np.full(50, m.pc("i", 0.1)), 0.0)
    p_new, iters = solver.lscheme_pressure_solve(state)
    assert iters == 1
    assert np.max(np.abs(p_new - state.p)) < 1e-12
    new, _ = solver.step(state, dt=0.05)
    assert np.array_equal(new.S, state.S)


def test_boundary_ghosts():
    prob = small_problem()
    grid = Grid(z_in=-2.0, z_out=8.0, N=50)
    solver = FVSolver(prob, grid, SolverConfig())
    state = solver.initial_state()
    (S_l, p_l), (S_r, p_r) = solver.apply_bcs(state.S, state.p)
    # outflow side copies the first cell, inlet side reflects through the
    # base-state pressure and holds the base saturation
    assert S_l == state.S[0] and p_l == state.p[0]
    assert S_r == prob.S_B
    assert p_r == pytest.approx(2.0 * prob.p_B - state.p[-1])


def test_initial_state_on_branch():
    prob = small_problem()
    grid = Grid(z_in=-2.0, z_out=8.0, N=50)
    solver = FVSolver(prob, grid, SolverConfig())
    state = solver.initial_state()
    pci = prob.model.pc("i", state.S)
    assert np.max(np.abs(state.p - pci)) < 1e-12
    assert state.t == 0.0


def test_dt_auto_bounds():
    prob = small_problem(tau=0.045)
    grid = Grid(z_in=-2.0, z_out=8.0, N=100)
    solver = FVSolver(prob, grid, SolverConfig())
    dt = solver.dt_auto()
    assert 0.0 < dt <= 0.5 * 0.045


# ------------------------------------------------------------- conservation


def test_mass_balance_per_step():
    prob = small_problem(tau=0.045)
    grid = Grid(z_in=-5.0, z_out=25.0, N=300)
    res = pde.run(prob, grid, SolverConfig(t_end=5.0))
    assert res.mass_residual < 1e-8
    assert res.rejected_steps == 0


def test_checkpoints_recorded():
    prob = small_problem(tau=0.045)
    grid = Grid(z_in=-3.0, z_out=12.0, N=150)
    res = pde.run(prob, grid, SolverConfig(t_end=2.0, checkpoints=(0.0, 1.0, 2.0)))
    assert [s.t for s in res.states] == pytest.approx([0.0, 1.0, 2.0])
    assert res.final.t == pytest.approx(2.0)
    # the t = 0 snapshot is the initial condition itself
    assert np.array_equal(res.states[0].S,
                          initial_condition(grid, prob.S_B, prob.S_T, 1.0))


# ------------------------------------------------------------- wave capture


def test_monotone_front_speed():
    # the (0.1, 0.4) wave at small tau travels at the chord speed
    prob = small_problem(tau=0.045)
    grid = Grid(z_in=-5.0, z_out=40.0, N=450)
    res = pde.run(prob, grid, SolverConfig(t_end=25.0, checkpoints=(15.0, 25.0)))
    level = 0.25
    zs = []
    for s in res.states:
        k = np.nonzero((s.S[:-1] - level) * (s.S[1:] - level) < 0)[0][0]
        z = grid.centers
        zs.append(z[k] + (level - s.S[k]) * (z[k + 1] - z[k]) / (s.S[k + 1] - s.S[k]))
    speed = (zs[1] - zs[0]) / 10.0
    assert speed == pytest.approx(C_MONOTONE, rel=5e-3)


def test_orbit_agreement_improves_with_resolution():
    # the moving-frame profile converges to the traveling-wave orbit
    prob = small_problem(tau=0.045)
    orbit = integrate_orbit(prob)

    def moving_frame_error(N):
        grid = Grid(z_in=-5.0, z_out=25.0, N=N)
        res = pde.run(prob, grid, SolverConfig(t_end=12.0))
        z = grid.centers
        S = res.final.S
        mid = 0.5 * (prob.S_B + prob.S_T)
        k = np.nonzero((S[:-1] - mid) * (S[1:] - mid) < 0)[0][0]
        z_mid = z[k] + (mid - S[k]) * (z[k + 1] - z[k]) / (S[k + 1] - S[k])
        # orbit coordinate runs against z: xi = c t - z
        xi = -(z - z_mid)
        keep = (xi > orbit.xi[0] + 0.5) & (xi < orbit.xi[-1] - 0.5)
        S_tw = np.interp(xi[keep], orbit.xi, orbit.S)
        return np.max(np.abs(S[keep] - S_tw))

    err_coarse = moving_frame_error(150)
    err_fine = moving_frame_error(300)
    assert err_fine < err_coarse
    assert err_fine < 0.05


def test_frozen_profile_stays_put():
    # with the top-state imbibition flux below the base flux no wave can
    # move; after a short adjustment the profile is stationary
    model = make_model_b(tau=0.5)
    prob = TWProblem(model, S_B=0.3, S_T=0.34)
    assert model.flux_i.F(0.34) < model.flux_d.F(0.3)
    grid = Grid(z_in=-4.0, z_out=8.0, N=240)
    res = pde.run(prob, grid, SolverConfig(t_end=8.0, checkpoints=(4.0, 8.0)))
    S1, S2 = res.states[0].S, res.states[1].S
    assert np.max(np.abs(S2 - S1)) < 1e-4
    # saturations never leave the data range
    assert res.final.S.min() > 0.29 and res.final.S.max() < 0.35


def test_scenario_b_plateau_overshoot():
    # advancing hysteretic-flux wave at large tau overshoots both end states
    model = make_model_b(tau=0.5)
    prob = TWProblem(model, S_B=0.3, S_T=0.5)
    grid = Grid(z_in=-5.0, z_out=30.0, N=350)
    res = pde.run(prob, grid, SolverConfig(t_end=12.0))
    assert res.final.S.max() > 0.55
    assert res.mass_residual < 1e-8


# ------------------------------------------------------------- failure modes


def test_pressure_stall_raises():
    prob = TWProblem(make_model_b(tau=0.5), S_B=0.3, S_T=0.5)
    grid = Grid(z_in=-2.0, z_out=8.0, N=100)
    cfg = SolverConfig(t_end=1.0, max_iter=1)
    with pytest.raises(NumericalError, match="rejected"):
        pde.run(prob, grid, cfg)


def test_step_rejects_out_of_range():
    # a near-saturated blob in a dry background drives the update past 1
    prob = TWProblem(make_model_a(tau=1.0), 0.1, 0.55)
    grid = Grid(z_in=-3.0, z_out=12.0, N=150)
    solver = FVSolver(prob, grid, SolverConfig())
    S = np.full(150, 0.1)
    S[60:75] = 0.97
    p = np.asarray(prob.model.pc("i", S), dtype=float)
    with pytest.raises(NumericalError, match="saturation"):
        solver.step(pde.GridState(S, p, 0.0), dt=0.5)


def test_huge_manual_dt_completes():
    # the pressure solve is implicit and the converged play residual is
    # divergence-limited, so even a grossly oversized dt stays in range;
    # the step is clipped to land on t_end exactly
    prob = small_problem(tau=0.045)
    grid = Grid(z_in=-3.0, z_out=12.0, N=150)
    auto = FVSolver(prob, grid, SolverConfig()).dt_auto()
    res = pde.run(prob, grid, SolverConfig(t_end=1.0, dt=400.0 * auto))
    assert res.final.t == pytest.approx(1.0)
    assert 0.0 < res.final.S.min() and res.final.S.max() < 1.0
