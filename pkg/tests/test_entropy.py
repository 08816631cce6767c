"""Piecewise self-similar solutions: construction, admissibility, evaluation."""

import numpy as np
import pytest

from hystflow.entropy import (
    ConstantState,
    Rarefaction,
    RiemannProblem,
    Shock,
    solve_A,
    solve_B,
    tau_bound,
)
from hystflow.errors import DomainError

from conftest import make_model_a, make_model_b

C_SINGLE = 1.3212945590994374       # chord speed of the (0.1, 0.4) shock
S_HAT_1 = 0.7258089184215334        # plateau level at tau = 1, base 0.1
C_INFILTRATION = 1.4682262130523973
C_DRAINAGE = 1.2547305629323484
S_TANGENT_I = 0.8173006744946062    # imbibition tangent from (0.3, pc_d)
S_TANGENT_D = 0.44444444445697917   # drainage tangent from (0.95, pc_d)
C_TANGENT_I = 1.5184996845374017
C_TANGENT_D = 1.4876033057851241


@pytest.fixture(scope="module")
def ma():
    return make_model_a()


@pytest.fixture(scope="module")
def mb():
    return make_model_b(tau=0.02)


def rh_residual(shock):
    return abs(shock.speed * (shock.left - shock.right)
               - (shock.F_left - shock.F_right))


def check_invariants(sol):
    speeds = sol.wave_speeds()
    assert all(b <= a + 1e-12 for a, b in zip(speeds, speeds[1:]))
    for sh in sol.shocks:
        assert rh_residual(sh) <= 1e-10


class TestSolveA:
    def test_single_classical_shock(self, ma):
        sol = solve_A(RiemannProblem(ma, 0.1, 0.4, tau=0.045))
        assert len(sol.segments) == 3
        (sh,) = sol.shocks
        assert sh.speed == pytest.approx(C_SINGLE, rel=1e-12)
        assert sh.classical
        assert sol.plateaus == []
        check_invariants(sol)

    def test_plateau_pair(self, ma):
        sol = solve_A(RiemannProblem(ma, 0.1, 0.55, tau=1.0))
        assert len(sol.segments) == 5
        infil, drain = sol.shocks
        assert infil.speed == pytest.approx(C_INFILTRATION, rel=1e-7)
        assert drain.speed == pytest.approx(C_DRAINAGE, rel=1e-7)
        assert drain.speed < infil.speed
        # the plateau sits at the overshoot level, not between the data
        (plateau,) = sol.plateaus
        assert plateau == pytest.approx(S_HAT_1, abs=1e-6)
        assert plateau > 0.55
        # the fast front exists only through the relaxation mechanism
        assert not infil.classical
        assert drain.classical
        check_invariants(sol)

    def test_plateau_rarefaction(self, ma):
        sol = solve_A(RiemannProblem(ma, 0.1, 0.8, tau=1.0))
        kinds = [type(s) for s in sol.segments]
        assert kinds == [ConstantState, Shock, ConstantState,
                         Rarefaction, ConstantState]
        sh = sol.shocks[0]
        fan = sol.segments[3]
        assert sh.left == pytest.approx(S_HAT_1, abs=1e-6)
        assert fan.S_right == pytest.approx(sh.left, abs=1e-12)
        assert fan.S_left == 0.8
        # fan edges move with the characteristic speed of the branch
        dF = ma.flux_i.dF
        assert fan.speed_right == pytest.approx(dF(fan.S_right), abs=1e-8)
        assert fan.speed_left == pytest.approx(dF(0.8), abs=1e-8)
        assert fan.speed_right < sh.speed
        check_invariants(sol)

    @pytest.mark.parametrize("S_T", [0.55, 0.8])
    def test_overshoot_solutions_are_non_classical(self, ma, S_T):
        sol = solve_A(RiemannProblem(ma, 0.1, S_T, tau=1.0))
        assert sum(not sh.classical for sh in sol.shocks) >= 1

    def test_evaluate_plateau_profile(self, ma):
        sol = solve_A(RiemannProblem(ma, 0.1, 0.55, tau=1.0))
        t = 10.0
        infil, drain = sol.shocks
        assert sol.evaluate((infil.speed + 0.5) * t, t) == 0.1
        mid = 0.5 * (infil.speed + drain.speed)
        assert sol.evaluate(mid * t, t) == pytest.approx(S_HAT_1, abs=1e-6)
        assert sol.evaluate((drain.speed - 0.5) * t, t) == 0.55

    def test_evaluate_fan_interior(self, ma):
        sol = solve_A(RiemannProblem(ma, 0.1, 0.8, tau=1.0))
        fan = sol.segments[3]
        for zeta in np.linspace(fan.speed_left, fan.speed_right, 7):
            S = sol.evaluate(zeta * 3.0, 3.0)
            assert ma.flux_i.dF(S) == pytest.approx(zeta, abs=1e-8)

    def test_rejects_receding_data(self, ma):
        with pytest.raises(DomainError):
            solve_A(RiemannProblem(ma, 0.4, 0.1, tau=0.1))

    def test_rejects_unclassified_pair(self, ma):
        with pytest.raises(DomainError, match="solution sets"):
            solve_A(RiemannProblem(ma, 0.1, 0.95, tau=1.0))

    def test_rejects_hysteretic_flux(self, mb):
        with pytest.raises(DomainError, match="solve_B"):
            solve_A(RiemannProblem(mb, 0.3, 0.6, tau=0.02))


class TestSolveB:
    def test_advancing_tangent_fan(self, mb):
        pb = mb.pc("d", 0.3)
        sol = solve_B(RiemannProblem(mb, 0.3, 0.95, p_B=pb, tau=0.02))
        kinds = [type(s) for s in sol.segments]
        assert kinds == [ConstantState, Shock, Rarefaction, ConstantState]
        sh, fan = sol.segments[1], sol.segments[2]
        assert sh.left == pytest.approx(S_TANGENT_I, abs=1e-9)
        assert sh.speed == pytest.approx(C_TANGENT_I, rel=1e-9)
        # tangency: the shock rides the characteristic of its left state
        assert sh.speed == pytest.approx(mb.flux_i.dF(sh.left), abs=1e-8)
        assert fan.branch == "i"
        assert fan.speed_right == pytest.approx(sh.speed, abs=1e-12)
        assert fan.speed_left == pytest.approx(mb.flux_i.dF(0.95), abs=1e-8)
        check_invariants(sol)

    def test_receding_tangent_fan(self, mb):
        pb = mb.pc("d", 0.95)
        sol = solve_B(RiemannProblem(mb, 0.95, 0.3, p_B=pb, tau=0.02))
        sh, fan = sol.segments[1], sol.segments[2]
        assert sh.left == pytest.approx(S_TANGENT_D, abs=1e-9)
        assert sh.speed == pytest.approx(C_TANGENT_D, rel=1e-9)
        assert sh.speed == pytest.approx(mb.flux_d.dF(sh.left), abs=1e-8)
        assert fan.branch == "d"
        assert fan.speed_left == pytest.approx(mb.flux_d.dF(0.3), abs=1e-8)
        # profile is continuous across the tangent junction
        t = 5.0
        S_in = sol.evaluate((sh.speed - 1e-9) * t, t)
        assert S_in == pytest.approx(sh.left, abs=1e-4)
        check_invariants(sol)

    def test_advancing_single_shock(self, mb):
        pb = mb.pc("i", 0.3)
        sol = solve_B(RiemannProblem(mb, 0.3, 0.6, p_B=pb, tau=0.02))
        (sh,) = sol.shocks
        assert len(sol.segments) == 3
        c = (mb.flux_i.F(0.6) - mb.flux_i.F(0.3)) / 0.3
        assert sh.speed == pytest.approx(c, rel=1e-12)
        assert sh.classical
        check_invariants(sol)

    def test_receding_single_shock(self, mb):
        pb = mb.pc("d", 0.95)
        sol = solve_B(RiemannProblem(mb, 0.95, 0.6, p_B=pb, tau=0.02))
        (sh,) = sol.shocks
        c = (mb.flux_d.F(0.6) - mb.flux_d.F(0.95)) / (0.6 - 0.95)
        assert sh.speed == pytest.approx(c, rel=1e-12)
        assert sh.speed > 0.0
        check_invariants(sol)

    def test_frozen_interface(self, mb):
        pb = mb.pc("d", 0.3)
        sol = solve_B(RiemannProblem(mb, 0.3, 0.33, p_B=pb, tau=0.02))
        (sh,) = sol.shocks
        assert sh.speed == 0.0
        assert sh.F_left == sh.F_right == mb.flux_d.F(0.3)
        # a stationary jump has no single-branch chord: never classical
        assert not sh.classical
        assert sol.evaluate(-1.0, 4.0) == 0.33
        assert sol.evaluate(1.0, 4.0) == 0.3

    def test_refuses_above_relaxation_bound(self, mb):
        pb = mb.pc("d", 0.3)
        with pytest.raises(DomainError, match="scenario_b_orbit"):
            solve_B(RiemannProblem(mb, 0.3, 0.95, p_B=pb, tau=0.5))

    def test_rejects_single_branch_model(self, ma):
        with pytest.raises(DomainError, match="solve_A"):
            solve_B(RiemannProblem(ma, 0.1, 0.4, tau=0.02))

    def test_rejects_degenerate_data(self, mb):
        pb = mb.pc("d", 0.3)
        with pytest.raises(DomainError, match="degenerate"):
            solve_B(RiemannProblem(mb, 0.3, 0.3, p_B=pb, tau=0.02))


def test_tau_bound_value(mb):
    bound = tau_bound(mb, 0.3, mb.pc("d", 0.3))
    assert bound == pytest.approx(0.069055, abs=1e-4)
    assert 0.02 < bound < 0.5


def test_tau_bound_cached(mb):
    import time
    tau_bound(mb, 0.3, mb.pc("d", 0.3))
    t0 = time.time()
    tau_bound(mb, 0.3, mb.pc("d", 0.3))
    assert time.time() - t0 < 0.01


def test_self_similarity(mb):
    pb = mb.pc("d", 0.95)
    sol = solve_B(RiemannProblem(mb, 0.95, 0.3, p_B=pb, tau=0.02))
    rng = np.random.default_rng(7)
    zetas = rng.uniform(-0.5, 2.5, size=12)
    for zeta in zetas:
        vals = {sol.evaluate(zeta * t, t) for t in (0.5, 3.0, 40.0)}
        assert max(vals) - min(vals) <= 1e-12


def test_evaluate_initial_data(ma):
    sol = solve_A(RiemannProblem(ma, 0.1, 0.55, tau=1.0))
    assert sol.evaluate(-2.0, 0.0) == 0.55
    assert sol.evaluate(2.0, 0.0) == 0.1
    with pytest.raises(DomainError):
        sol.evaluate(0.0, -1.0)


def test_profile_vectorised(ma):
    sol = solve_A(RiemannProblem(ma, 0.1, 0.4, tau=0.045))
    z = np.linspace(-2.0, 30.0, 33)
    S = sol.profile(z, 10.0)
    assert S.shape == z.shape
    assert set(np.round(S, 12)) == {0.1, 0.4}
