"""Capillary curves, hysteresis classification, and fractional flow."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hystflow.constitutive import (
    FLUX_PRESETS,
    BranchFlux,
    DimensionalParams,
    PermeabilityModel,
    Region,
    VanGenuchtenCurve,
    nondimensionalize,
    power_perm,
)
from hystflow.errors import DomainError

from conftest import make_model_a, make_model_b


# -- van Genuchten curves ---------------------------------------------------

# reference values computed with 40-digit arithmetic from
#   pc(S) = Lambda * (S**(-1/m) - 1)**(1 - m)
PC_I_HALF = 3.532947717837635830
PC_D_HALF = 7.104742002927375016


def test_vg_frozen_values():
    pci = VanGenuchtenCurve(Lambda=3.5, m=0.92)
    pcd = VanGenuchtenCurve(Lambda=7.0, m=0.9)
    assert pci(0.5) == pytest.approx(PC_I_HALF, abs=1e-14)
    assert pcd(0.5) == pytest.approx(PC_D_HALF, abs=1e-14)


def test_vg_endpoints():
    pc = VanGenuchtenCurve(Lambda=3.5, m=0.92)
    assert pc(1.0) == 0.0
    assert pc.deriv(1.0) == -np.inf
    # grows without bound as S -> 0 (slowly: the outer exponent is 1 - m)
    assert pc(1e-12) > pc(0.01) > pc(0.5)


def test_vg_decreasing_and_ordered():
    pci = VanGenuchtenCurve(Lambda=3.5, m=0.92)
    pcd = VanGenuchtenCurve(Lambda=7.0, m=0.9)
    S = np.linspace(0.01, 0.99, 200)
    vi, vd = pci(S), pcd(S)
    assert np.all(np.diff(vi) < 0)
    assert np.all(np.diff(vd) < 0)
    # drainage lies strictly above imbibition in the interior
    assert np.all(vd > vi)


def test_vg_deriv_matches_difference_quotient():
    pc = VanGenuchtenCurve(Lambda=7.0, m=0.9)
    for S in np.linspace(0.05, 0.95, 19):
        h = 1e-7
        fd = (pc(S + h) - pc(S - h)) / (2 * h)
        assert pc.deriv(S) == pytest.approx(fd, rel=1e-5)


def test_vg_validates_parameters():
    with pytest.raises(DomainError):
        VanGenuchtenCurve(Lambda=-1.0, m=0.9)
    with pytest.raises(DomainError):
        VanGenuchtenCurve(Lambda=1.0, m=1.5)
    pc = VanGenuchtenCurve(Lambda=1.0, m=0.5)
    with pytest.raises(DomainError):
        pc(0.0)
    with pytest.raises(DomainError):
        pc(1.2)


# -- fractional flow and its derivatives ------------------------------------


def quadratic_flux(M=1.0, N_g=1.0):
    return BranchFlux(
        k_rw=power_perm(1.0, 2.0, wetting=True),
        k_rn=power_perm(1.0, 2.0, wetting=False),
        M=M,
        N_g=N_g,
    )


def test_flux_simple_values():
    fl = quadratic_flux(M=1.0, N_g=0.0)
    # equal mobilities at the midpoint
    assert fl.f(0.5) == pytest.approx(0.5, abs=1e-15)
    assert fl.F(1.0) == pytest.approx(1.0, abs=1e-15)
    assert fl.F(0.0) == 0.0
    assert fl.h(0.0) == 0.0
    assert fl.h(1.0) == pytest.approx(0.0, abs=1e-15)


def test_flux_monotone_and_bounded():
    fl = quadratic_flux()
    S = np.linspace(1e-4, 1 - 1e-4, 500)
    f = fl.f(S)
    assert np.all((f >= 0) & (f <= 1))
    assert np.all(fl.df(S) > 0)
    assert np.all(fl.h(S) > 0)


@pytest.mark.parametrize("M,N_g", [(1.0, 1.0), (2.0, 0.0), (0.5, 3.0)])
def test_flux_derivatives_match_fd(M, N_g):
    fl = quadratic_flux(M=M, N_g=N_g)
    for S in np.linspace(0.05, 0.95, 10):
        h = 1e-6
        fd1 = (fl.F(S + h) - fl.F(S - h)) / (2 * h)
        assert fl.dF(S) == pytest.approx(fd1, rel=1e-8, abs=1e-8)
        # wider stencil: the roundoff of a second difference scales as 1/h^2
        h = 1e-4
        fd2 = (fl.F(S + h) - 2 * fl.F(S) + fl.F(S - h)) / h**2
        assert fl.d2F(S) == pytest.approx(fd2, rel=1e-5, abs=1e-6)


def test_preset_drainage_faster_than_imbibition():
    for name in FLUX_PRESETS:
        perm = PermeabilityModel.from_preset(name)
        fi = BranchFlux(*perm.branch_i, M=1.0, N_g=0.0)
        fd = BranchFlux(*perm.branch_d, M=1.0, N_g=0.0)
        S = np.linspace(0.05, 0.95, 50)
        assert np.all(fd.f(S) > fi.f(S)), name


def test_preset_fractional_flow_formulas():
    # corey_3_2: f = S^2 / (S^2 + 3 (1-S)^2) on imbibition, coefficient 2
    # on drainage
    perm = PermeabilityModel.from_preset("corey_3_2")
    fi = BranchFlux(*perm.branch_i, M=1.0, N_g=0.0)
    fd = BranchFlux(*perm.branch_d, M=1.0, N_g=0.0)
    S = 0.37
    assert fi.f(S) == pytest.approx(S**2 / (S**2 + 3 * (1 - S) ** 2), abs=1e-15)
    assert fd.f(S) == pytest.approx(S**2 / (S**2 + 2 * (1 - S) ** 2), abs=1e-15)
    # paper_5_2 weights the nonwetting phase by (1 - S^2) directly
    perm2 = PermeabilityModel.from_preset("paper_5_2")
    gi = BranchFlux(*perm2.branch_i, M=1.0, N_g=0.0)
    assert gi.f(S) == pytest.approx(S**2 / (S**2 + 3 * (1 - S**2)), abs=1e-15)


def test_unknown_preset_rejected():
    with pytest.raises(DomainError):
        PermeabilityModel.from_preset("nope")


# -- hysteresis classification and relaxation --------------------------------


def test_classify_regions():
    m = make_model_a()
    S = 0.5
    lo, hi = m.pc("i", S), m.pc("d", S)
    assert m.classify(S, lo - 0.1) is Region.IMBIBITION
    assert m.classify(S, lo) is Region.SCANNING
    assert m.classify(S, 0.5 * (lo + hi)) is Region.SCANNING
    assert m.classify(S, hi) is Region.SCANNING
    assert m.classify(S, hi + 0.1) is Region.DRAINAGE


def test_relaxation_sign_and_zero_set():
    m = make_model_a()
    rng = np.random.RandomState(7)
    S = rng.uniform(0.05, 0.95, 300)
    lo, hi = m.pc("i", S), m.pc("d", S)
    # anywhere inside the scanning band the source vanishes
    p_in = lo + rng.uniform(0, 1, S.size) * (hi - lo)
    assert_allclose(m.relaxation(S, p_in), 0.0)
    # below the band saturation must rise, above it must fall
    assert np.all(m.relaxation(S, lo - 0.5) > 0)
    assert np.all(m.relaxation(S, hi + 0.5) < 0)
    # distance to the nearest branch
    assert m.relaxation(0.5, m.pc("i", 0.5) - 0.25) == pytest.approx(0.25)


def test_relaxation_nonincreasing_in_pressure():
    m = make_model_a()
    p = np.linspace(-2.0, 15.0, 400)
    r = m.relaxation(np.full_like(p, 0.4), p)
    assert np.all(np.diff(r) <= 1e-14)


# -- scanning interpolation of permeabilities --------------------------------


def test_krel_matches_branches_on_boundaries():
    m = make_model_b()
    S = 0.45
    ki_w, ki_n = m.permeability.branch_i
    kd_w, kd_n = m.permeability.branch_d
    assert m.krel("w", S, m.pc("i", S)) == pytest.approx(ki_w.value(S))
    assert m.krel("n", S, m.pc("i", S)) == pytest.approx(ki_n.value(S))
    assert m.krel("n", S, m.pc("d", S)) == pytest.approx(kd_n.value(S))


def test_krel_continuous_across_region_boundaries():
    m = make_model_b()
    rng = np.random.RandomState(11)
    eps = 1e-9
    worst = 0.0
    for S in rng.uniform(0.05, 0.95, 1000):
        for p0 in (m.pc("i", S), m.pc("d", S)):
            for phase in ("w", "n"):
                jump = abs(
                    m.krel(phase, S, p0 + eps) - m.krel(phase, S, p0 - eps)
                )
                worst = max(worst, jump)
    assert worst < 1e-6


def test_flux_interpolates_between_branches():
    m = make_model_b()
    S = 0.5
    pi, pd = m.pc("i", S), m.pc("d", S)
    Fi = m.flux_i.F(S)
    Fd = m.flux_d.F(S)
    F_lo = m.flux(S, pi).F
    F_mid = m.flux(S, 0.5 * (pi + pd)).F
    F_hi = m.flux(S, pd).F
    assert F_lo == pytest.approx(Fi, abs=1e-12)
    assert F_hi == pytest.approx(Fd, abs=1e-12)
    assert min(Fi, Fd) < F_mid < max(Fi, Fd)


def test_flux_pressure_independent_without_perm_hysteresis():
    m = make_model_a()
    S = 0.3
    out1 = m.flux(S, 0.0)
    out2 = m.flux(S, 100.0)
    assert out1.F == out2.F
    assert out1.h == out2.h


def test_coincident_branch_curves_do_not_divide_by_zero():
    # degenerate scanning band of zero width
    from hystflow.constitutive import CapillaryModel, ConstitutiveModel

    vg = VanGenuchtenCurve(Lambda=3.5, m=0.92)
    cap = CapillaryModel(imbibition=vg, drainage=vg, tau=1.0)
    perm = PermeabilityModel.from_preset("corey_3_2")
    m = ConstitutiveModel(capillary=cap, permeability=perm, M=1.0, N_g=0.0)
    S = 0.5
    out = m.flux(S, vg(S))
    assert out.F == pytest.approx(m.flux_i.F(S))


# -- scaling -----------------------------------------------------------------


def test_nondimensionalize_basic():
    dim = DimensionalParams(
        K=1e-10,
        phi=0.3,
        mu_w=1e-3,
        mu_n=2e-3,
        rho_w=1000.0,
        rho_n=800.0,
        sigma=0.05,
        v=1e-5,
        g=9.81,
    )
    nd = nondimensionalize(dim, tau_dimensional=100.0)
    assert set(nd) == {"N_g", "N_c", "tau_tilde"}
    assert nd["N_c"] > 0 and nd["tau_tilde"] > 0
    # gravity number vanishes for matched densities
    dim2 = DimensionalParams(**{**dim.__dict__, "rho_n": 1000.0})
    assert nondimensionalize(dim2, 100.0)["N_g"] == 0.0
    # relaxation scale is linear in the dimensional time
    nd2 = nondimensionalize(dim, tau_dimensional=200.0)
    assert nd2["tau_tilde"] == pytest.approx(2 * nd["tau_tilde"])


def test_nondimensionalize_rejects_degenerate_input():
    dim = DimensionalParams(
        K=1e-10, phi=0.3, mu_w=1e-3, mu_n=2e-3,
        rho_w=1000.0, rho_n=800.0, sigma=0.05, v=0.0, g=9.81,
    )
    with pytest.raises(DomainError):
        nondimensionalize(dim, 100.0)
