"""Material functions and hysteresis-region logic.

Everything downstream (phase-plane integration, Riemann construction, the
finite-volume solver) queries the model defined here: van Genuchten capillary
branches, relative-permeability branches, the fractional-flow functions, and
the play-type scanning region between the two capillary curves.

Conventions: saturation ``S`` is the wetting-phase fraction in (0, 1];
``p`` is the (dimensionless) capillary pressure variable. The two branches are
labeled ``"i"`` (imbibition, lower curve) and ``"d"`` (drainage, upper curve).
All evaluations accept scalars or numpy arrays.
"""

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError

__all__ = [
    "Region",
    "VanGenuchtenCurve",
    "CapillaryModel",
    "PermFn",
    "power_perm",
    "quadratic_complement_perm",
    "BranchFlux",
    "PermeabilityModel",
    "ConstitutiveModel",
    "FluxTriple",
    "DimensionalParams",
    "nondimensionalize",
    "FLUX_PRESETS",
]


class Region(enum.Enum):
    """Position of a state (S, p) relative to the two capillary curves."""

    IMBIBITION = "imbibition"   # p < p_c^(i)(S)
    SCANNING = "scanning"       # p_c^(i)(S) <= p <= p_c^(d)(S)
    DRAINAGE = "drainage"       # p > p_c^(d)(S)


def _check_saturation(S):
    arr = np.asarray(S, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr > 1.0):
        raise DomainError(f"saturation outside (0, 1]: {S!r}")
    return arr


@dataclass(frozen=True)
class VanGenuchtenCurve:
    """One van Genuchten capillary branch p_c(S) = Lambda*(S^(-1/m) - 1)^(1-m)."""

    Lambda: float
    m: float

    def __post_init__(self):
        if self.Lambda <= 0.0:
            raise DomainError("Lambda must be positive")
        if not 0.0 < self.m < 1.0:
            raise DomainError("m must lie in (0, 1)")

    def __call__(self, S):
        arr = _check_saturation(S)
        with np.errstate(divide="ignore"):
            out = self.Lambda * (arr ** (-1.0 / self.m) - 1.0) ** (1.0 - self.m)
        return out.item() if np.ndim(S) == 0 else out

    def deriv(self, S):
        """Analytic dp_c/dS; tends to -inf as S -> 1 (since m < 1)."""
        arr = _check_saturation(S)
        with np.errstate(divide="ignore"):
            core = (arr ** (-1.0 / self.m) - 1.0) ** (-self.m)
            out = (
                -self.Lambda
                * (1.0 - self.m)
                / self.m
                * arr ** (-1.0 / self.m - 1.0)
                * core
            )
        return out.item() if np.ndim(S) == 0 else out


@dataclass(frozen=True)
class CapillaryModel:
    """The two capillary branches plus the dynamic coefficient tau."""

    imbibition: VanGenuchtenCurve
    drainage: VanGenuchtenCurve
    tau: float = 0.0


class PermFn(NamedTuple):
    """A relative-permeability curve bundled with its first two derivatives."""

    value: Callable
    d1: Callable
    d2: Callable


def power_perm(coef, exponent, wetting):
    """k(S) = coef*S^q for the wetting phase, coef*(1-S)^q otherwise."""
    a, q = float(coef), float(exponent)
    if wetting:
        return PermFn(
            lambda S: a * np.asarray(S, float) ** q,
            lambda S: a * q * np.asarray(S, float) ** (q - 1.0),
            lambda S: a * q * (q - 1.0) * np.asarray(S, float) ** (q - 2.0),
        )
    return PermFn(
        lambda S: a * (1.0 - np.asarray(S, float)) ** q,
        lambda S: -a * q * (1.0 - np.asarray(S, float)) ** (q - 1.0),
        lambda S: a * q * (q - 1.0) * (1.0 - np.asarray(S, float)) ** (q - 2.0),
    )


def quadratic_complement_perm(coef):
    """k(S) = coef*(1 - S^2), the literal form of one published flux preset."""
    a = float(coef)
    return PermFn(
        lambda S: a * (1.0 - np.asarray(S, float) ** 2),
        lambda S: -2.0 * a * np.asarray(S, float),
        lambda S: -2.0 * a * np.ones_like(np.asarray(S, float)),
    )


@dataclass(frozen=True)
class BranchFlux:
    """Fractional-flow functions of one permeability branch.

    f = k_rw/(k_rw + M*k_rn), h = k_rn*f, F = f + N_g*h, with analytic
    derivatives up to second order (quotient rule throughout). Evaluations
    at S=0 and S=1 return the limits f(0)=0, F(1)=1 naturally because k_rw
    and k_rn vanish at the respective endpoints.
    """

    k_rw: PermFn
    k_rn: PermFn
    M: float
    N_g: float

    def _den(self, S):
        return self.k_rw.value(S) + self.M * self.k_rn.value(S)

    def f(self, S):
        out = self.k_rw.value(S) / self._den(S)
        return out.item() if np.ndim(S) == 0 else out

    def df(self, S):
        num = self.M * (
            self.k_rw.d1(S) * self.k_rn.value(S)
            - self.k_rw.value(S) * self.k_rn.d1(S)
        )
        out = num / self._den(S) ** 2
        return out.item() if np.ndim(S) == 0 else out

    def d2f(self, S):
        D = self._den(S)
        dD = self.k_rw.d1(S) + self.M * self.k_rn.d1(S)
        N = self.M * (
            self.k_rw.d1(S) * self.k_rn.value(S)
            - self.k_rw.value(S) * self.k_rn.d1(S)
        )
        dN = self.M * (
            self.k_rw.d2(S) * self.k_rn.value(S)
            - self.k_rw.value(S) * self.k_rn.d2(S)
        )
        out = (dN * D - 2.0 * N * dD) / D ** 3
        return out.item() if np.ndim(S) == 0 else out

    def h(self, S):
        out = self.k_rn.value(S) * np.asarray(self.f(S))
        return out.item() if np.ndim(S) == 0 else out

    def dh(self, S):
        out = self.k_rn.d1(S) * np.asarray(self.f(S)) + self.k_rn.value(S) * np.asarray(self.df(S))
        return out.item() if np.ndim(S) == 0 else out

    def d2h(self, S):
        out = (
            self.k_rn.d2(S) * np.asarray(self.f(S))
            + 2.0 * self.k_rn.d1(S) * np.asarray(self.df(S))
            + self.k_rn.value(S) * np.asarray(self.d2f(S))
        )
        return out.item() if np.ndim(S) == 0 else out

    def F(self, S):
        out = np.asarray(self.f(S)) + self.N_g * np.asarray(self.h(S))
        return out.item() if np.ndim(S) == 0 else out

    def dF(self, S):
        out = np.asarray(self.df(S)) + self.N_g * np.asarray(self.dh(S))
        return out.item() if np.ndim(S) == 0 else out

    def d2F(self, S):
        out = np.asarray(self.d2f(S)) + self.N_g * np.asarray(self.d2h(S))
        return out.item() if np.ndim(S) == 0 else out


#: named closed-form fractional-flow presets, as (k_rn builder pairs).
#: "paper_5_2" is the literal published pair with (1 - S^2) nonwetting
#: weights; "corey_3_2" is the standard quadratic Corey reading with
#: (1 - S)^2 weights. Both fix M = 1 internally (the preset pins the shape
#: of f, so a separate viscosity ratio would be double-counted).
FLUX_PRESETS = {
    "paper_5_2": {
        "i": (power_perm(1.0, 2, wetting=True), quadratic_complement_perm(3.0)),
        "d": (power_perm(1.0, 2, wetting=True), quadratic_complement_perm(2.0)),
    },
    "corey_3_2": {
        "i": (power_perm(1.0, 2, wetting=True), power_perm(3.0, 2, wetting=False)),
        "d": (power_perm(1.0, 2, wetting=True), power_perm(2.0, 2, wetting=False)),
    },
}


@dataclass(frozen=True)
class PermeabilityModel:
    """Relative-permeability branches; equal branches mean no flux hysteresis."""

    branch_i: tuple           # (k_rw: PermFn, k_rn: PermFn)
    branch_d: tuple
    hysteretic: bool

    @staticmethod
    def brooks_corey(q_i=2.0, q_d=2.0, hysteretic=False):
        bi = (power_perm(1.0, q_i, True), power_perm(1.0, q_i, False))
        bd = (power_perm(1.0, q_d, True), power_perm(1.0, q_d, False)) if hysteretic else bi
        return PermeabilityModel(bi, bd, hysteretic)

    @staticmethod
    def from_preset(name):
        if name not in FLUX_PRESETS:
            raise DomainError(f"unknown flux preset {name!r}")
        spec = FLUX_PRESETS[name]
        return PermeabilityModel(spec["i"], spec["d"], hysteretic=True)


class FluxTriple(NamedTuple):
    f: float
    h: float
    F: float


@dataclass(frozen=True)
class ConstitutiveModel:
    """Complete material description: capillary curves + permeabilities + M, N_g."""

    capillary: CapillaryModel
    permeability: PermeabilityModel
    M: float = 1.0
    N_g: float = 1.0

    flux_i: BranchFlux = field(init=False, repr=False)
    flux_d: BranchFlux = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "flux_i",
            BranchFlux(*self.permeability.branch_i, M=self.M, N_g=self.N_g),
        )
        object.__setattr__(
            self, "flux_d",
            BranchFlux(*self.permeability.branch_d, M=self.M, N_g=self.N_g),
        )

    # -- capillary branches ------------------------------------------------

    def pc(self, branch, S):
        curve = self.capillary.imbibition if branch == "i" else self.capillary.drainage
        return curve(S)

    def dpc(self, branch, S):
        curve = self.capillary.imbibition if branch == "i" else self.capillary.drainage
        return curve.deriv(S)

    @property
    def tau(self):
        return self.capillary.tau

    @property
    def scenario_a(self):
        """True when the permeability branches coincide (capillary-only hysteresis)."""
        return not self.permeability.hysteretic

    def branch_flux(self, branch):
        return self.flux_i if branch == "i" else self.flux_d

    # -- hysteresis-region logic --------------------------------------------

    def classify(self, S, p):
        """Region of a single state; boundary pressures map to SCANNING."""
        pci = self.pc("i", S)
        pcd = self.pc("d", S)
        if p < pci:
            return Region.IMBIBITION
        if p > pcd:
            return Region.DRAINAGE
        return Region.SCANNING

    def relaxation(self, S, p):
        """Pressure-relaxation driver: p_c^(d)-p above, p_c^(i)-p below, 0 between."""
        pci = np.asarray(self.pc("i", S))
        pcd = np.asarray(self.pc("d", S))
        parr = np.asarray(p, dtype=float)
        out = np.where(parr > pcd, pcd - parr, np.where(parr < pci, pci - parr, 0.0))
        return out.item() if np.ndim(S) == 0 and np.ndim(p) == 0 else out

    def theta(self, S, p):
        """Scanning interpolation weight in [0, 1]; 0 when the curves coincide."""
        pci = np.asarray(self.pc("i", S), dtype=float)
        pcd = np.asarray(self.pc("d", S), dtype=float)
        gap = pcd - pci
        safe = np.where(gap > 1e-14, gap, 1.0)
        t = np.clip((np.asarray(p, float) - pci) / safe, 0.0, 1.0)
        out = np.where(gap > 1e-14, t, 0.0)
        return out.item() if np.ndim(S) == 0 and np.ndim(p) == 0 else out

    def _kbar(self, S, p):
        ki_w, ki_n = self.permeability.branch_i
        kd_w, kd_n = self.permeability.branch_d
        if not self.permeability.hysteretic:
            return np.asarray(ki_w.value(S)), np.asarray(ki_n.value(S))
        th = np.asarray(self.theta(S, p))
        kw = np.asarray(ki_w.value(S)) + (np.asarray(kd_w.value(S)) - np.asarray(ki_w.value(S))) * th
        kn = np.asarray(ki_n.value(S)) + (np.asarray(kd_n.value(S)) - np.asarray(ki_n.value(S))) * th
        return kw, kn

    def krel(self, phase, S, p):
        """Relative permeability at (S, p): branch value outside the scanning
        region, linear-in-p interpolation inside it."""
        _check_saturation(S)
        kw, kn = self._kbar(S, p)
        out = kw if phase == "w" else kn
        return out.item() if np.ndim(S) == 0 and np.ndim(p) == 0 else out

    def flux(self, S, p):
        """Hysteretic fractional-flow triple (f, h, F) at the state (S, p)."""
        _check_saturation(S)
        kw, kn = self._kbar(S, p)
        den = kw + self.M * kn
        f = np.where(den > 0.0, kw / np.where(den > 0.0, den, 1.0), 0.0)
        h = kn * f
        F = f + self.N_g * h
        if np.ndim(S) == 0 and np.ndim(p) == 0:
            return FluxTriple(float(f), float(h), float(F))
        return FluxTriple(f, h, F)


@dataclass(frozen=True)
class DimensionalParams:
    """Dimensional inputs of the scaling that produces N_g, N_c and tau_tilde."""

    mu_n: float
    mu_w: float
    v: float
    sigma: float
    phi: float
    K: float
    rho_w: float
    rho_n: float
    g: float = 9.81
    H: float = 1.0


def nondimensionalize(dim: DimensionalParams, tau_dimensional):
    """Dimensionless groups for a dimensional parameter set.

    Returns a dict with the gravity number N_g, the capillary number N_c
    (with reference pressure p_r = sigma*sqrt(phi/K)), and the scaled
    dynamic-capillarity coefficient tau_tilde.
    """
    for name in ("v", "sigma", "phi"):
        if getattr(dim, name) == 0.0:
            raise DomainError(f"{name} must be nonzero for nondimensionalization")
    p_r = dim.sigma * np.sqrt(dim.phi / dim.K)
    return {
        "N_g": dim.K * (dim.rho_w - dim.rho_n) * dim.g / (dim.v * dim.mu_n),
        "N_c": dim.K * p_r / (dim.v * dim.mu_n * dim.H),
        "tau_tilde": dim.mu_n * dim.v ** 2 * tau_dimensional / (dim.sigma ** 2 * dim.phi ** 2),
    }
