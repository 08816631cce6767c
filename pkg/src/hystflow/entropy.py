"""Self-similar entropy solutions of the vanishing-capillarity limit.

In the hyperbolic limit the transport equation keeps a trace of both the
relaxation time and the hysteresis: admissibility of a shock is decided by
whether a traveling wave of the regularised model connects its end states.
The constructions here assemble the resulting piecewise self-similar
solutions — shocks, plateaus and rarefaction fans in ``z/t`` — for the
single-flux setting (:func:`solve_A`, where large relaxation times spawn a
non-classical plateau at the bifurcation level) and for the hysteretic-flux
setting (:func:`solve_B`, where infiltration and drainage ride different
flux branches and interfaces can freeze altogether).

Each shock is labeled ``classical`` by testing the Oleinik chord condition
against the flux branch it rides on; the non-classical labels mark exactly
the fronts that exist only through the relaxation mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .flux_geometry import base_state, rarefaction_inverse, tangent_saturations_B
from .tw_solver import SolutionSet, TWProblem, WaveAnalysis, tau_star

#: Riemann data reuses the wave-problem container (states, pressure, tau)
RiemannProblem = TWProblem

_GATE_CACHE = {}
_WA_CACHE = {}


def _analysis(model, S_B, p_B):
    # classification reuses expensive bisections; share one instance per base
    key = (id(model), round(S_B, 12),
           None if p_B is None else round(p_B, 12))
    if key not in _WA_CACHE:
        _WA_CACHE[key] = (model, WaveAnalysis(model, S_B, p_B))
    return _WA_CACHE[key][1]


@dataclass
class ConstantState:
    S: float


@dataclass
class Shock:
    """Discontinuity between ``left`` (smaller z/t side) and ``right``.

    ``F_left``/``F_right`` are the flux values of the connected states —
    in the hysteretic setting these live on different branches, so they are
    stored rather than recomputed.  ``classical`` records the Oleinik chord
    test against the carrying branch.
    """

    left: float
    right: float
    speed: float
    F_left: float
    F_right: float
    classical: bool = True


@dataclass
class Rarefaction:
    """Fan on one flux branch; speeds are F' at the matching endpoints."""

    branch: str
    S_left: float
    S_right: float
    speed_left: float
    speed_right: float


@dataclass
class PiecewiseSolution:
    """Self-similar solution, segments ordered by decreasing z/t.

    The first segment is the constant base state ahead of all waves, the
    last the constant top state behind them.
    """

    model: object
    segments: list = field(default_factory=list)

    def __post_init__(self):
        for seg in self.segments:
            if isinstance(seg, Shock):
                res = abs(seg.speed * (seg.left - seg.right)
                          - (seg.F_left - seg.F_right))
                if res > 1e-10:
                    raise DomainError(
                        f"jump condition violated by {res:.2e} across the "
                        f"shock {seg.left} -> {seg.right}"
                    )
        speeds = self.wave_speeds()
        if any(b > a + 1e-12 for a, b in zip(speeds, speeds[1:])):
            raise DomainError(f"wave speeds not ordered in z/t: {speeds}")

    def wave_speeds(self):
        """Speeds of the moving segments, in storage (decreasing) order."""
        out = []
        for seg in self.segments:
            if isinstance(seg, Shock):
                out.append(seg.speed)
            elif isinstance(seg, Rarefaction):
                out.extend([seg.speed_right, seg.speed_left])
        return out

    @property
    def S_behind(self):
        return self.segments[-1].S

    @property
    def S_ahead(self):
        return self.segments[0].S

    @property
    def shocks(self):
        return [s for s in self.segments if isinstance(s, Shock)]

    @property
    def plateaus(self):
        return [s.S for s in self.segments[1:-1]
                if isinstance(s, ConstantState)]

    def _branch_flux(self, branch):
        return self.model.flux_i if branch == "i" else self.model.flux_d

    def evaluate(self, z, t):
        """Saturation at position ``z`` and time ``t >= 0``.

        At ``t = 0`` this returns the Riemann data; afterwards the ratio
        ``z/t`` is located among the segment speeds, resolving rarefaction
        interiors by inverting F' on the carrying branch.
        """
        if t < 0.0:
            raise DomainError("negative time")
        if t == 0.0:
            return self.S_behind if z < 0.0 else self.S_ahead
        zeta = z / t
        state = self.S_ahead
        for seg in self.segments:
            if isinstance(seg, Shock):
                if zeta > seg.speed:
                    return state
                state = seg.left
            elif isinstance(seg, Rarefaction):
                if zeta > seg.speed_right:
                    return state
                if zeta >= seg.speed_left:
                    flux = self._branch_flux(seg.branch)
                    lo = min(seg.S_left, seg.S_right)
                    hi = max(seg.S_left, seg.S_right)
                    zlo, zhi = sorted((flux.dF(lo), flux.dF(hi)))
                    return rarefaction_inverse(flux, min(max(zeta, zlo), zhi),
                                               lo, hi)
                state = seg.S_left
        return state

    def profile(self, z, t):
        """Vectorised :meth:`evaluate` over an array of positions."""
        z = np.asarray(z, dtype=float)
        return np.array([self.evaluate(float(x), t) for x in z])


def evaluate(sol, z, t):
    return sol.evaluate(z, t)


def _classical_chord(flux, left, right, speed, F_left, F_right, n=400):
    """Oleinik chord test on one branch.

    A shock with the higher state behind (``left > right``) is classical
    when the chord stays on or above the branch flux between the states;
    with the lower state behind the chord must stay below.
    """
    lo, hi = (right, left) if left > right else (left, right)
    S = np.linspace(lo, hi, n)
    chord = F_right + speed * (S - right)
    gap = chord - np.array([flux.F(s) for s in S])
    tol = 1e-10
    if left > right:
        return bool(np.all(gap >= -tol))
    return bool(np.all(gap <= tol))


def solve_A(problem) -> PiecewiseSolution:
    """Entropy solution for the single-flux (capillary-hysteresis) setting.

    The relaxation time decides admissibility: pairs in the monotone class
    give the classical single shock, while pairs beyond the overshoot
    threshold split into an infiltration shock up to the bifurcation level
    ``S_hat(tau)`` — deliberately violating the chord condition — followed
    by a slower drainage shock (or a rarefaction fan when the top state
    lies beyond the tangent saturation).
    """
    model = problem.model
    if problem.scenario != "A":
        raise DomainError("pressure-dependent flux: use solve_B")
    S_B, S_T, tau = problem.S_B, problem.S_T, problem.tau
    if not 0.0 < S_B < S_T < 1.0:
        raise DomainError("advancing Riemann data required: 0 < S_B < S_T < 1")
    wa = _analysis(model, S_B, problem.p_B)
    F = wa.flux.F
    cls = wa.classify_pair(S_T, tau)
    if cls is SolutionSet.OUT_OF_SCOPE:
        raise DomainError(
            f"(S_T={S_T}, tau={tau}) outside the classified solution sets"
        )
    segs = [ConstantState(S_B)]
    if cls is SolutionSet.A:
        c = wa.chord(S_T)
        segs.append(Shock(S_T, S_B, c, F(S_T), F(S_B),
                          _classical_chord(wa.flux, S_T, S_B, c,
                                           F(S_T), F(S_B))))
    else:
        S_hat = float(wa.S_hat(tau))
        c_i = wa.chord(S_hat)
        segs.append(Shock(S_hat, S_B, c_i, F(S_hat), F(S_B),
                          _classical_chord(wa.flux, S_hat, S_B, c_i,
                                           F(S_hat), F(S_B))))
        segs.append(ConstantState(S_hat))
        if cls is SolutionSet.B:
            c_d = (F(S_hat) - F(S_T)) / (S_hat - S_T)
            segs.append(Shock(S_T, S_hat, c_d, F(S_T), F(S_hat),
                              _classical_chord(wa.flux, S_T, S_hat, c_d,
                                               F(S_T), F(S_hat))))
        else:
            dF = wa.flux.dF
            segs.append(Rarefaction("i", S_T, S_hat, dF(S_T), dF(S_hat)))
    segs.append(ConstantState(S_T))
    return PiecewiseSolution(model, segs)


def tau_bound(model, S_B, p_B=None, n=5):
    """Uniform admissibility bound for the hysteretic-flux constructions.

    The infimum of the branch monotone-connection thresholds over the
    reachable top states on both sides of the base: below this every shock
    produced by :func:`solve_B` is backed by a monotone branch wave.
    Evaluated on a small saturation grid per side and cached per base.
    """
    base = base_state(model, S_B, p_B)
    key = (id(model), round(base.S_B, 12), round(base.p_B, 12), n)
    if key in _GATE_CACHE:
        return _GATE_CACHE[key][1]
    s_i, s_d = tangent_saturations_B(model, base)
    vals = [np.inf]
    if s_i > S_B + 2e-3:
        for S in np.linspace(S_B + 1e-3, s_i, n):
            vals.append(tau_star(model, S_B, float(S), "i", p_B=base.p_B))
    if s_d < S_B - 2e-3:
        for S in np.linspace(s_d, S_B - 1e-3, n):
            vals.append(tau_star(model, S_B, float(S), "d", p_B=base.p_B))
    bound = min(vals)
    _GATE_CACHE[key] = (model, bound)
    return bound


def solve_B(problem) -> PiecewiseSolution:
    """Entropy solution with hysteretic permeabilities.

    Advancing data ride the imbibition flux branch: a single shock when the
    top state is reachable below the branch tangent, a tangent shock plus
    rarefaction fan beyond it, and a stationary shock when the branch flux
    at the top state undershoots the base flux (the interface freezes).
    Receding data mirror the construction on the drainage branch.

    Only admissible below the uniform relaxation bound of
    :func:`tau_bound`; beyond it the wave structure changes qualitatively
    and must be resolved by the wave solver (``scenario_b_orbit``).
    """
    model = problem.model
    if problem.scenario != "B":
        raise DomainError("single flux branch: use solve_A")
    S_B, S_T, p_B, tau = problem.S_B, problem.S_T, problem.p_B, problem.tau
    if abs(S_T - S_B) < 1e-12:
        raise DomainError("degenerate Riemann data: S_T == S_B")
    bound = tau_bound(model, S_B, p_B)
    if tau > bound:
        raise DomainError(
            f"tau={tau} exceeds the admissibility bound {bound:.4g} for this "
            "base state; construct the wave profile directly with "
            "scenario_b_orbit instead"
        )
    F_B = model.flux(S_B, p_B).F
    base = base_state(model, S_B, p_B)
    s_i, s_d = tangent_saturations_B(model, base)
    segs = [ConstantState(S_B)]
    if S_T > S_B:
        flux = model.flux_i
        if flux.F(S_T) <= F_B + 1e-14:
            # frozen interface: no advancing branch wave carries this flux
            segs.append(Shock(S_T, S_B, 0.0, F_B, F_B, classical=False))
        elif S_T <= s_i + 1e-12:
            c = (flux.F(S_T) - F_B) / (S_T - S_B)
            segs.append(Shock(S_T, S_B, c, flux.F(S_T), F_B,
                              _classical_chord(flux, S_T, S_B, c,
                                               flux.F(S_T), F_B)))
        else:
            c = (flux.F(s_i) - F_B) / (s_i - S_B)
            segs.append(Shock(s_i, S_B, c, flux.F(s_i), F_B,
                              _classical_chord(flux, s_i, S_B, c,
                                               flux.F(s_i), F_B)))
            # tangency: the fan head moves with the shock (speeds coincide
            # to the tangent-root tolerance; snap so the fan stays attached)
            segs.append(Rarefaction("i", S_T, s_i, flux.dF(S_T), c))
    else:
        flux = model.flux_d
        if flux.F(S_T) >= F_B - 1e-14:
            segs.append(Shock(S_T, S_B, 0.0, F_B, F_B, classical=False))
        elif S_T >= s_d - 1e-12:
            c = (flux.F(S_T) - F_B) / (S_T - S_B)
            segs.append(Shock(S_T, S_B, c, flux.F(S_T), F_B,
                              _classical_chord(flux, S_T, S_B, c,
                                               flux.F(S_T), F_B)))
        else:
            c = (flux.F(s_d) - F_B) / (s_d - S_B)
            segs.append(Shock(s_d, S_B, c, flux.F(s_d), F_B,
                              _classical_chord(flux, s_d, S_B, c,
                                               flux.F(s_d), F_B)))
            segs.append(Rarefaction("d", S_T, s_d, flux.dF(S_T), c))
    segs.append(ConstantState(S_T))
    return PiecewiseSolution(model, segs)
