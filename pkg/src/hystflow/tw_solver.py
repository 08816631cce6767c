"""Traveling-wave analysis for the relaxed hysteretic transport model.

A traveling wave ``S(c t - z)``, ``p(c t - z)`` of the two-phase system turns
the PDE into the planar dynamical system

    S' = F(S, p) / (c tau),      p' = G(S) = (F(S) - ell(S)) / h(S),

where ``ell`` is the Rankine-Hugoniot chord through the base state and ``F``
is the play-type relaxation term.  Away from the scanning band the orbit
hugs one capillary curve, and the squared pressure offset ``y = (p - pc)^2``
obeys a scalar ODE in ``S`` that is much better behaved numerically than the
(xi-parametrised) phase flow.  Everything in this module is built from legs
of that scalar ODE glued together by vertical scanning connectors.

:class:`WaveAnalysis` bundles the machinery that treats the classical
non-hysteretic-permeability setting (wave speed from a single flux curve):
overshoot curves ``w(S)``, the thresholds ``tau_m``/``tau_c``, and the
plateau bifurcation curves.  :func:`integrate_orbit`, :func:`drainage_orbit`
and :func:`scenario_b_orbit` produce full orbits with classified outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericalError
from .flux_geometry import FluxGeometry, base_state, plateau_saturation, tangent_saturations_B
from .numerics import bisect_predicate, bisect_root

#: squared pressure offset below which the orbit counts as sitting on a curve
YTOL = 1e-10
#: |S - equilibrium| treated as an asymptotic landing
LAND_TOL = 1e-7
#: offset used to step off a hyperbolic equilibrium before integrating
EPS_START = 1e-8
#: squared offset at which a diverging orbit is certified as blowing up
ESCAPE_Y = 1e4
#: upper saturation cap for integrations that may run toward full saturation
S_CAP = 1.0 - 1e-6

MAX_LEGS = 60
_RTOL = 1e-9
_ATOL = 1e-14


class OrbitOutcome(Enum):
    """Terminal behaviour of a wave orbit."""

    MONOTONE_TO_IMBIBITION = "monotone_to_imbibition"
    FINITE_TURNS_TO_IMBIBITION = "finite_turns_to_imbibition"
    FINITE_TURNS_TO_DRAINAGE = "finite_turns_to_drainage"
    INFINITE_SPIRAL = "infinite_spiral"
    REACHES_BETA = "reaches_beta"
    FULL_SATURATION_BLOWUP = "full_saturation_blowup"
    DRAINAGE_CONNECTION = "drainage_connection"
    FROZEN = "frozen"


class SolutionSet(Enum):
    """Riemann-data classification for the classical-speed setting."""

    A = "A"
    B = "B"
    C = "C"
    OUT_OF_SCOPE = "out_of_scope"


class CriticalTaus(NamedTuple):
    tau_i: float
    tau_d: float


def rh_speed(model, S_B, S_T, p_B=None, p_T=None):
    """Rankine-Hugoniot speed between two end states.

    Parameters
    ----------
    model : ConstitutiveModel
    S_B, S_T : float
        Base (right) and top (left) saturations.
    p_B, p_T : float, optional
        End-state pressures.  By default the base state sits on the
        imbibition curve for a wetting configuration (``S_T > S_B``) and the
        top state on the curve it relaxes to: imbibition when advancing,
        drainage when receding.

    Returns
    -------
    float
        ``(F(S_T, p_T) - F(S_B, p_B)) / (S_T - S_B)``.
    """
    if abs(S_T - S_B) < 1e-14:
        raise DomainError("degenerate end states: S_T == S_B")
    if p_B is None:
        p_B = model.pc("i", S_B) if S_T > S_B else model.pc("d", S_B)
    if p_T is None:
        p_T = model.pc("i", S_T) if S_T > S_B else model.pc("d", S_T)
    F_B = model.flux(S_B, p_B).F
    F_T = model.flux(S_T, p_T).F
    return (F_T - F_B) / (S_T - S_B)


@dataclass
class TWProblem:
    """A traveling-wave connection problem between two end states."""

    model: object
    S_B: float
    S_T: float
    p_B: float = None
    tau: float = None

    def __post_init__(self):
        if self.p_B is None:
            branch = "i" if self.model.scenario_a else "d"
            self.p_B = self.model.pc(branch, self.S_B)
        if self.tau is None:
            self.tau = self.model.capillary.tau
        if self.tau <= 0.0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        # base state must lie in the closed scanning band
        base_state(self.model, self.S_B, self.p_B)

    @property
    def scenario(self):
        return "A" if self.model.scenario_a else "B"

    @property
    def p_T(self):
        branch = "i" if self.S_T > self.S_B else "d"
        return self.model.pc(branch, self.S_T)

    @property
    def c(self):
        return rh_speed(self.model, self.S_B, self.S_T, self.p_B, self.p_T)


@dataclass
class Orbit:
    """A sampled wave orbit with its classified outcome.

    ``xi`` increases along the orbit and is shifted so that the saturation
    first crosses the midpoint of the end states at ``xi = 0``.  ``S_m`` is
    the largest saturation reached below the imbibition curve, when that
    notion applies.
    """

    xi: np.ndarray
    S: np.ndarray
    p: np.ndarray
    outcome: OrbitOutcome
    c: float
    tau: float
    S_m: float = None
    n_legs: int = 0
    amplitudes: list = field(default_factory=list)
    plateau: float = None
    p_T: float = None


@dataclass
class WCurve:
    """Pressure curve ``w(S)`` of a wave below the imbibition branch."""

    S: np.ndarray
    w: np.ndarray
    S_m: float
    blew_up: bool

    def w_at(self, S):
        return np.interp(S, self.S, self.w)


@dataclass
class BifurcationCurves:
    """Plateau onset/level curves over a grid of relaxation times."""

    tau_grid: np.ndarray
    S_check: np.ndarray
    S_hat: np.ndarray
    tau_bar: float


class _ChordField:
    """Pressure drive G and its S-derivative on one capillary branch.

    The drive is measured against the line through ``(S_ref, F_ref)`` with
    slope ``c``; the branch fixes which flux and capillary curve apply.
    """

    def __init__(self, model, branch, S_ref, F_ref, c):
        self.model = model
        self.branch = branch
        self.flux = model.flux_i if branch == "i" else model.flux_d
        self.S_ref = S_ref
        self.F_ref = F_ref
        self.c = c

    def line(self, S):
        return self.F_ref + self.c * (S - self.S_ref)

    def G(self, S):
        return (self.flux.F(S) - self.line(S)) / self.flux.h(S)

    def dG(self, S):
        h = self.flux.h(S)
        return (self.flux.dF(S) - self.c - self.G(S) * self.flux.dh(S)) / h

    def pc(self, S):
        return self.model.pc(self.branch, S)

    def dpc(self, S):
        return self.model.dpc(self.branch, S)


class _Leg(NamedTuple):
    status: str  # 'landed' | 'touch' | 'end'
    S_end: float
    y_end: float
    S: np.ndarray
    y: np.ndarray


def _touch_event(S, y):
    return y[0]


_touch_event.terminal = True
_touch_event.direction = -1


def _escape_event(S, y):
    return y[0] - ESCAPE_Y


_escape_event.terminal = True
_escape_event.direction = 1


class _LegEngine:
    """Integrates wave legs in the squared pressure offset y = (p - pc)^2.

    One engine instance is bound to a chord (anchor point plus speed) and a
    relaxation time; its imbibition legs run upward in S below the
    imbibition curve and its drainage legs run downward above the drainage
    curve.  Leg endpoints are either asymptotic landings on an equilibrium
    (y below YTOL at the target saturation) or transversal touches of the
    carrying curve detected by an event.
    """

    def __init__(self, model, S_ref, F_ref, c, tau):
        self.model = model
        self.c = c
        self.tau = tau
        self.fi = _ChordField(model, "i", S_ref, F_ref, c)
        self.fd = _ChordField(model, "d", S_ref, F_ref, c)

    def kappa(self, fld, S_eq):
        """Departure slope |dv/dS| of the unstable manifold at an equilibrium."""
        dG = fld.dG(S_eq)
        slope = fld.dpc(S_eq)
        disc = slope * slope - 4.0 * self.c * self.tau * dG
        if disc <= 0.0:
            raise NumericalError(
                f"no hyperbolic departure at S={S_eq}: discriminant {disc}"
            )
        return 0.5 * (slope + math.sqrt(disc))

    def _run(self, rhs, span, y0, events=None):
        if abs(span[1] - span[0]) < 1e-13:
            return None
        sol = solve_ivp(
            rhs,
            span,
            [y0],
            method="RK45",
            rtol=_RTOL,
            atol=_ATOL,
            max_step=abs(span[1] - span[0]) / 64.0,
            events=events,
        )
        if sol.status < 0:
            raise NumericalError(f"wave leg integration failed: {sol.message}")
        return sol

    def _leg(self, fld, sign, S0, y0, target, stop):
        """Run one leg; ``sign`` is +1 on the imbibition side, -1 on drainage."""
        ct2 = 2.0 * self.c * self.tau

        def rhs(S, y):
            v = math.sqrt(max(y[0], 0.0))
            return [sign * 2.0 * fld.dpc(S) * v - ct2 * fld.G(S)]

        S_parts, y_parts = [], []
        # phase 1: run to the target equilibrium, no curve touches possible
        going = (target - S0) * sign
        y_t = y0
        if going > 1e-13:
            sol = self._run(rhs, (S0, target), y0)
            S_parts.append(sol.t)
            y_parts.append(sol.y[0])
            y_t = sol.y[0, -1]
            if y_t <= YTOL:
                return _Leg("landed", target, y_t,
                            np.concatenate(S_parts), np.concatenate(y_parts))
        # phase 2: continue past the equilibrium until the curve is touched,
        # the orbit escapes, or the stop saturation is reached
        if (stop - target) * sign <= 1e-13:
            return _Leg("end", target, y_t,
                        _cat(S_parts, [target]), _cat(y_parts, [y_t]))
        sol = self._run(rhs, (target, stop), max(y_t, 1e-30),
                        events=[_touch_event, _escape_event])
        S_parts.append(sol.t)
        y_parts.append(sol.y[0])
        S_all = np.concatenate(S_parts)
        y_all = np.concatenate(y_parts)
        if sol.t_events[0].size:
            S_e = sol.t_events[0][0]
            return _Leg("touch", S_e, 0.0, S_all, y_all)
        return _Leg("end", sol.t[-1], sol.y[0, -1], S_all, y_all)

    def i_leg(self, S0, y0, target, stop):
        return self._leg(self.fi, 1.0, S0, y0, target, stop)

    def d_leg(self, S0, y0, target, stop):
        return self._leg(self.fd, -1.0, S0, y0, target, stop)


def _cat(parts, extra):
    return np.concatenate([np.concatenate(parts) if parts else np.empty(0),
                           np.asarray(extra, dtype=float)])


def _leg_xi(S, y, ctau, sign):
    """Cumulative xi along a leg from d(xi)/dS = sign * c tau / v."""
    v = np.sqrt(np.clip(y, 1e-24, None))
    integrand = sign * ctau / v
    if S.size < 2:
        return np.zeros_like(S)
    dxi = np.diff(S) * 0.5 * (integrand[1:] + integrand[:-1])
    return np.concatenate([[0.0], np.cumsum(dxi)])


def _connector(model, S_e, p_from, p_to, line_val, n=33):
    """Vertical scanning connector at fixed saturation.

    Returns pressure samples and the xi increments from dp/dxi = G(S_e, p).
    The offset endpoints guard against departing exactly from an equilibrium
    of the scanning segment, where the connector time diverges.
    """
    ps = np.linspace(p_from, p_to, n)
    G = np.array([(model.flux(S_e, p).F - line_val) / model.flux(S_e, p).h
                  for p in ps])
    bad = np.abs(G) < 1e-14
    if bad.any():
        G[bad] = np.sign(G[~bad].mean() if (~bad).any() else 1.0) * 1e-14
    integrand = 1.0 / G
    dxi = np.diff(ps) * 0.5 * (integrand[1:] + integrand[:-1])
    xi = np.concatenate([[0.0], np.cumsum(dxi)])
    if xi[-1] < 0.0:
        raise NumericalError(
            f"scanning connector at S={S_e} runs backward in xi"
        )
    return ps, xi


class _OrbitBuilder:
    """Accumulates orbit pieces (legs and connectors) in xi order."""

    def __init__(self, model, c, tau):
        self.model = model
        self.ctau = c * tau
        self.c = c
        self.tau = tau
        self.xi_parts, self.S_parts, self.p_parts = [], [], []
        self._xi0 = 0.0

    def add_leg(self, leg, fld, sign):
        xi = _leg_xi(leg.S, leg.y, self.ctau, sign)
        v = np.sqrt(np.clip(leg.y, 0.0, None))
        pc = np.array([fld.pc(s) for s in leg.S])
        p = pc - v if sign > 0 else pc + v
        self.xi_parts.append(self._xi0 + xi)
        self.S_parts.append(leg.S)
        self.p_parts.append(p)
        self._xi0 += xi[-1] if xi.size else 0.0

    def add_connector(self, S_e, p_from, p_to, line_val):
        ps, xi = _connector(self.model, S_e, p_from, p_to, line_val)
        self.xi_parts.append(self._xi0 + xi)
        self.S_parts.append(np.full_like(ps, S_e))
        self.p_parts.append(ps)
        self._xi0 += xi[-1]

    def assemble(self, mid, outcome, **kw):
        xi = np.concatenate(self.xi_parts)
        S = np.concatenate(self.S_parts)
        p = np.concatenate(self.p_parts)
        # normalize: first midpoint crossing of S sits at xi = 0
        cross = np.nonzero((S[:-1] - mid) * (S[1:] - mid) <= 0.0)[0]
        if cross.size:
            k = cross[0]
            if S[k + 1] != S[k]:
                frac = (mid - S[k]) / (S[k + 1] - S[k])
            else:
                frac = 0.0
            xi = xi - (xi[k] + frac * (xi[k + 1] - xi[k]))
        return Orbit(xi=xi, S=S, p=p, outcome=outcome,
                     c=self.c, tau=self.tau, **kw)


def _spiral(amps):
    """Sustained rotation test: many alternations with decaying amplitude."""
    if len(amps) < 7:
        return False
    changes = sum(1 for a, b in zip(amps, amps[1:]) if a * b < 0.0)
    if changes < 6:
        return False
    return all(abs(b) < 0.95 * abs(a) for a, b in zip(amps, amps[1:]))


def _limit_cycle(amps):
    """Converged period-2 touch pattern: rotation that neither lands nor decays."""
    if len(amps) < 7 or amps[-1] * amps[-2] >= 0.0:
        return False
    return all(
        abs(amps[-k] - amps[-k - 2]) < 1e-5 * max(1.0, abs(amps[-k]))
        for k in (1, 2, 3, 4)
    )


class WaveAnalysis:
    """Wave machinery for a fixed base state without permeability hysteresis.

    Bundles the overshoot integration ``w(S)``, the monotonicity threshold
    ``tau_m``, the blow-up threshold ``tau_c``, the plateau bifurcation
    curves and the Riemann-data classification, sharing one memoization
    table for the expensive overshoot searches.

    Parameters
    ----------
    model : ConstitutiveModel
        Must have pressure-independent flux (single permeability branch).
    S_B : float
        Base saturation (right state of the wave).
    p_B : float, optional
        Base pressure; defaults to the imbibition curve value.
    """

    def __init__(self, model, S_B, p_B=None):
        if not model.scenario_a:
            raise DomainError(
                "hysteretic permeabilities: use scenario_b_orbit / tau_star"
            )
        self.model = model
        self.base = base_state(model, S_B, p_B)
        self.flux = model.flux_i
        self.geometry = FluxGeometry(self.flux, self.base)
        self._sm_cache = {}
        self._scheck_cache = {}

    @property
    def S_B(self):
        return self.base.S_B

    @property
    def F_B(self):
        return self.base.F_B

    def chord(self, S_T):
        return (self.flux.F(S_T) - self.F_B) / (S_T - self.S_B)

    # -- overshoot curve ---------------------------------------------------

    def integrate_w(self, tau, S_T):
        """Integrate the wave pressure ``w(S)`` below the imbibition curve.

        Starts from the singular point at the base saturation with the local
        departure slope and runs until the curve is touched again (giving
        ``S_m``) or the orbit is certified to blow up (``S_m = 1``).

        Returns
        -------
        WCurve
        """
        if tau <= 0.0:
            raise DomainError("tau must be positive")
        if not (self.S_B < S_T <= self.geometry.S_bar + 1e-12):
            raise DomainError(
                f"S_T={S_T} outside (S_B, S_bar] = "
                f"({self.S_B}, {self.geometry.S_bar}]"
            )
        eng = _LegEngine(self.model, self.S_B, self.F_B, self.chord(S_T), tau)
        k = eng.kappa(eng.fi, self.S_B)
        y0 = (k * EPS_START) ** 2
        leg = eng.i_leg(self.S_B + EPS_START, y0, S_T, S_CAP)
        blew = leg.status == "end" and leg.y_end > YTOL
        if leg.status == "landed":
            S_m = S_T
        elif leg.status == "touch":
            S_m = leg.S_end
        else:
            S_m = 1.0 if blew else leg.S_end
        v = np.sqrt(np.clip(leg.y, 0.0, None))
        w = np.array([self.model.pc("i", s) for s in leg.S]) - v
        key = (round(tau, 12), round(S_T, 12))
        self._sm_cache[key] = S_m
        return WCurve(S=leg.S, w=w, S_m=S_m, blew_up=blew)

    def S_m(self, tau, S_T):
        key = (round(tau, 12), round(S_T, 12))
        if key not in self._sm_cache:
            self.integrate_w(tau, S_T)
        return self._sm_cache[key]

    # -- critical relaxation times -----------------------------------------

    def critical_taus(self, S_T, c=None):
        """Spiral-onset thresholds from the equilibrium eigenvalues.

        ``tau_j = pc_j'(S_T)^2 / (4 c G'(S_T))`` for both capillary
        branches.  ``c`` defaults to the chord speed of the base
        configuration; pass the drainage-wave speed for the receding
        analogue.
        """
        if c is None:
            c = self.chord(S_T)
        dGT = (self.flux.dF(S_T) - c) / self.flux.h(S_T)
        if dGT <= 0.0:
            raise NumericalError(
                f"no oscillatory regime at S_T={S_T}: G'(S_T)={dGT} <= 0"
            )
        denom = 4.0 * c * dGT
        return CriticalTaus(
            tau_i=self.model.dpc("i", S_T) ** 2 / denom,
            tau_d=self.model.dpc("d", S_T) ** 2 / denom,
        )

    def tau_bar_m(self, S_T):
        """Closed-form lower bound for the monotonicity threshold."""
        c = self.chord(S_T)
        grid = np.linspace(self.S_B + 1e-9, self.geometry.S_bar, 800)
        P_low = min(-self.model.dpc("i", s) for s in grid)
        fld = _ChordField(self.model, "i", self.S_B, self.F_B, c)
        sgrid = np.linspace(self.S_B + 1e-9, S_T, 800)
        m0 = max(fld.dG(s) for s in sgrid)
        if m0 <= 0.0 or P_low <= 0.0:
            raise NumericalError("degenerate bound: m0 or P_low nonpositive")
        return P_low ** 2 / (4.0 * c * m0)

    def _bracket(self, pred, lo):
        """Grow a False/True bisection bracket from an analytic seed."""
        guard = 0
        while pred(lo):
            lo *= 0.5
            guard += 1
            if guard > 60:
                raise NumericalError("no lower bracket: predicate always true")
        hi = 2.0 * lo
        guard = 0
        while not pred(hi):
            hi *= 2.0
            guard += 1
            if guard > 20:
                raise NumericalError(
                    f"bracket growth cap exceeded at tau={hi}"
                )
        return max(lo, hi / 2.0), hi

    def tau_m(self, S_T):
        """Largest tau for which the wave joins the top state monotonically.

        Bisection on the overshoot predicate of :meth:`integrate_w`.  Near
        the threshold the overshoot amplitude is exponentially small, so the
        computed value can slightly exceed the spiral-onset ``tau_i``; see
        the ordering notes in the tests.
        """
        pred = lambda t: self.S_m(t, S_T) > S_T + 1e-12
        lo, hi = self._bracket(pred, self.tau_bar_m(S_T))
        return bisect_predicate(pred, lo, hi, rel_tol=1e-6)

    def tau_c(self, S_T):
        """The tau at which the overshoot first reaches beta(S_T)."""
        g = self.geometry
        if not (g.S_star + 1e-12 < S_T < g.S_bar + 1e-12):
            raise DomainError(
                f"tau_c defined on (S_star, S_bar) = ({g.S_star}, {g.S_bar})"
            )
        target = g.beta(min(S_T, g.S_bar))
        pred = lambda t: self.S_m(t, S_T) >= target - 1e-9
        lo, hi = self._bracket(pred, self.tau_bar_m(S_T))
        return bisect_predicate(pred, lo, hi, rel_tol=1e-6)

    @cached_property
    def tau_bar(self):
        """Threshold below which no plateau exists for any top state."""
        return self.tau_m(self.geometry.S_bar - 1e-9)

    # -- plateau bifurcation -------------------------------------------------

    def S_check(self, tau):
        """Onset saturation: top states above it blow through beta at this tau."""
        key = round(tau, 12)
        if key in self._scheck_cache:
            return self._scheck_cache[key]
        g = self.geometry
        if tau <= self.tau_bar:
            val = g.S_bar
        else:
            def pred(S_T):
                return self.S_m(tau, S_T) >= g.beta(S_T) - 1e-9

            lo = g.S_star + 1e-4
            hi = g.S_bar - 1e-9
            if not pred(hi):
                val = g.S_bar
            elif pred(lo):
                val = lo
            else:
                val = bisect_predicate(pred, lo, hi, rel_tol=1e-8)
        self._scheck_cache[key] = val
        return val

    def S_hat(self, tau):
        """Plateau saturation reached above the onset: beta of S_check."""
        return self.geometry.beta(self.S_check(tau))

    def bifurcation_curves(self, tau_grid):
        taus = np.asarray(tau_grid, dtype=float)
        if (taus <= 0.0).any():
            raise DomainError("tau grid must be positive")
        checks = np.array([self.S_check(t) for t in taus])
        hats = np.array([self.geometry.beta(sc) for sc in checks])
        return BifurcationCurves(tau_grid=taus, S_check=checks, S_hat=hats,
                                 tau_bar=self.tau_bar)

    def beta_inverse(self, S_hat_val):
        g = self.geometry
        return bisect_root(lambda a: g.beta(a) - S_hat_val,
                           g.S_star + 1e-12, g.S_bar - 1e-12)

    def classify_pair(self, S_T, tau):
        """Assign Riemann data to a solution class.

        Boundary pairs resolve to the earlier class in the order A, B, C;
        anything outside all three is OUT_OF_SCOPE.
        """
        g = self.geometry
        if not 0.0 < self.S_B < g.S_o:
            raise DomainError(
                f"classification needs a base below the inflection {g.S_o}"
            )
        if tau <= 0.0 or not (0.0 < S_T < 1.0):
            return SolutionSet.OUT_OF_SCOPE
        S_star, S_upper = g.star_pair
        if self.S_B < S_T < g.S_bar:
            if S_T <= S_star + 1e-12:
                return SolutionSet.A
            if tau <= self.tau_c(S_T) * (1.0 + 1e-9):
                return SolutionSet.A
        if tau > self.tau_bar:
            sc = self.S_check(tau)
            if sc - 1e-12 <= S_T <= self.geometry.beta(sc) + 1e-12:
                return SolutionSet.B
        if g.S_bar < S_T < S_upper:
            alpha = self.beta_inverse(S_T)
            if tau <= self.tau_c(alpha) * (1.0 + 1e-9):
                return SolutionSet.C
        return SolutionSet.OUT_OF_SCOPE

    # -- orbits ---------------------------------------------------------------

    def drainage_orbit(self, tau, S_T):
        """Receding wave from the plateau state down to the top state.

        Integrates the modified wave system anchored at the plateau
        ``S_hat(tau)`` with the drainage chord speed; the orbit departs the
        drainage curve and lands on (or oscillates around) the segment over
        ``S_T``.  A single-leg landing is the monotone case.
        """
        if tau <= self.tau_bar:
            raise DomainError(
                f"(S_T={S_T}, tau={tau}) is not a plateau configuration"
            )
        S_hat = self.S_hat(tau)
        if not (self.S_check(tau) - 1e-12 <= S_T <= S_hat + 1e-12):
            raise DomainError(
                f"(S_T={S_T}, tau={tau}) is not a plateau configuration"
            )
        F = self.flux.F
        c_d = (F(S_hat) - F(S_T)) / (S_hat - S_T)
        eng = _LegEngine(self.model, S_T, F(S_T), c_d, tau)
        bld = _OrbitBuilder(self.model, c_d, tau)
        k = eng.kappa(eng.fd, S_hat)
        y0 = (k * EPS_START) ** 2
        S_cur, y_cur = S_hat - EPS_START, y0
        amps, side = [], "d"
        outcome = None
        S_min_stop = 1e-6
        for _ in range(MAX_LEGS):
            if side == "d":
                leg = eng.d_leg(S_cur, y_cur, S_T, S_min_stop)
                bld.add_leg(leg, eng.fd, -1.0)
            else:
                leg = eng.i_leg(S_cur, y_cur, S_T, S_hat - EPS_START)
                bld.add_leg(leg, eng.fi, 1.0)
            if leg.status == "end":
                raise NumericalError(
                    f"receding leg escaped the wave window at S={leg.S_end}"
                )
            amp = leg.S_end - S_T
            amps.append(amp)
            if _spiral(amps):
                outcome = OrbitOutcome.INFINITE_SPIRAL
                break
            if leg.status == "landed" or abs(amp) < LAND_TOL:
                outcome = (OrbitOutcome.FINITE_TURNS_TO_DRAINAGE if side == "d"
                           else OrbitOutcome.FINITE_TURNS_TO_IMBIBITION)
                break
            S_e = leg.S_end
            line_val = eng.fd.line(S_e)
            if side == "d":
                bld.add_connector(S_e, self.model.pc("d", S_e),
                                  self.model.pc("i", S_e), line_val)
                side = "i"
            else:
                bld.add_connector(S_e, self.model.pc("i", S_e),
                                  self.model.pc("d", S_e), line_val)
                side = "d"
            S_cur, y_cur = S_e, 0.0
        else:
            raise NumericalError("receding orbit: leg budget exhausted")
        return bld.assemble((S_hat + S_T) / 2.0, outcome,
                            n_legs=len(amps), amplitudes=amps)


def integrate_orbit(problem: TWProblem) -> Orbit:
    """Integrate and classify an advancing wave orbit (single flux branch).

    The orbit departs the base equilibrium below the imbibition curve,
    possibly overshoots the top state, and then alternates between the two
    capillary curves through vertical scanning connectors.  Outcomes follow
    the amplitude sequence of the successive curve touches: asymptotic
    landings within ``LAND_TOL`` of the top state terminate the wave, six or
    more decaying alternations certify an infinite spiral, and a first leg
    that reaches beta (or escapes) is a blow-up.
    """
    model = problem.model
    if problem.scenario != "A":
        raise DomainError("pressure-dependent flux: use scenario_b_orbit")
    S_B, S_T, tau, c = problem.S_B, problem.S_T, problem.tau, problem.c
    if not S_B < S_T:
        raise DomainError("advancing waves need S_T > S_B; see drainage_orbit")
    if c <= 0.0:
        raise DomainError(f"nonpositive wave speed c={c}")
    analysis = WaveAnalysis(model, S_B, problem.p_B)
    g = analysis.geometry
    if S_T > g.S_bar + 1e-12:
        raise DomainError(
            f"S_T={S_T} beyond the tangent saturation {g.S_bar}: no single "
            "wave exists (rarefaction needed)"
        )
    beta_T = None
    if g.S_tilde < S_T <= g.S_bar:
        try:
            beta_T = g.beta(S_T)
        except (DomainError, NumericalError):
            beta_T = None
    upper_stop = beta_T if beta_T is not None else S_CAP
    eng = _LegEngine(model, S_B, analysis.F_B, c, tau)
    bld = _OrbitBuilder(model, c, tau)
    mid = 0.5 * (S_B + S_T)

    k = eng.kappa(eng.fi, S_B)
    S_cur, y_cur = S_B + EPS_START, (k * EPS_START) ** 2
    amps, side = [], "i"
    S_m = None
    outcome = None
    for n in range(MAX_LEGS):
        if side == "i":
            leg = eng.i_leg(S_cur, y_cur, S_T, upper_stop)
            bld.add_leg(leg, eng.fi, 1.0)
        else:
            leg = eng.d_leg(S_cur, y_cur, S_T, S_B + 1e-9)
            bld.add_leg(leg, eng.fd, -1.0)
        if leg.status == "end":
            if side == "i" and n == 0:
                # ran past the stop on the first rise: blow-up or exact beta hit
                if leg.y_end <= YTOL and beta_T is not None:
                    outcome, S_m = OrbitOutcome.REACHES_BETA, beta_T
                else:
                    outcome, S_m = OrbitOutcome.FULL_SATURATION_BLOWUP, 1.0
                break
            raise NumericalError(
                f"wave leg escaped the window at S={leg.S_end}"
            )
        if side == "i" and S_m is None and leg.status == "touch":
            S_m = leg.S_end
        amp = leg.S_end - S_T
        amps.append(amp)
        if _spiral(amps):
            outcome = OrbitOutcome.INFINITE_SPIRAL
            break
        if leg.status == "landed" or abs(amp) < LAND_TOL:
            if side == "i":
                outcome = (OrbitOutcome.MONOTONE_TO_IMBIBITION if n == 0
                           else OrbitOutcome.FINITE_TURNS_TO_IMBIBITION)
                if S_m is None:
                    S_m = S_T
            else:
                outcome = OrbitOutcome.FINITE_TURNS_TO_DRAINAGE
            break
        S_e = leg.S_end
        if beta_T is not None and abs(S_e - beta_T) < 1e-9:
            outcome, S_m = OrbitOutcome.REACHES_BETA, beta_T
            break
        line_val = eng.fi.line(S_e)
        if side == "i":
            bld.add_connector(S_e, model.pc("i", S_e), model.pc("d", S_e),
                              line_val)
            side = "d"
        else:
            bld.add_connector(S_e, model.pc("d", S_e), model.pc("i", S_e),
                              line_val)
            side = "i"
        S_cur, y_cur = S_e, 0.0
    if outcome is None:
        changes = sum(1 for a, b in zip(amps, amps[1:]) if a * b < 0.0)
        if changes >= 6 and abs(amps[-1]) < abs(amps[0]):
            outcome = OrbitOutcome.INFINITE_SPIRAL
        else:
            raise NumericalError(
                "orbit inconclusive after leg budget; amplitudes "
                f"{[float(a) for a in amps[-6:]]}"
            )
    return bld.assemble(mid, outcome, S_m=S_m, n_legs=len(amps),
                        amplitudes=amps)


def tau_star(model, S_B, S_T, case, p_B=None):
    """Monotone-connection threshold for one flux branch.

    Computed like the monotonicity threshold of the classical setting but
    on the branch wave system: bisection over tau of the overshoot
    predicate of a single leg from the base toward ``S_T``.  Returns
    ``math.inf`` in the frozen regime (no advancing branch wave exists).

    Parameters
    ----------
    model : ConstitutiveModel
    S_B, S_T : float
    case : {'i', 'd'}
        Which branch carries the wave: imbibition legs run upward
        (``S_T > S_B``), drainage legs downward.
    p_B : float, optional
        Base pressure (defaults to the carrying curve's value at ``S_B``).
    """
    if case not in ("i", "d"):
        raise DomainError(f"case must be 'i' or 'd', got {case!r}")
    if p_B is None:
        p_B = model.pc(case, S_B)
    base = base_state(model, S_B, p_B)
    F_B = base.F_B
    flux = model.flux_i if case == "i" else model.flux_d
    if case == "i":
        if not S_T > S_B:
            raise DomainError("imbibition branch wave needs S_T > S_B")
        if flux.F(S_T) <= F_B + 1e-14:
            return math.inf
    else:
        if not S_T < S_B:
            raise DomainError("drainage branch wave needs S_T < S_B")
        if flux.F(S_T) >= F_B - 1e-14:
            return math.inf
    c = (flux.F(S_T) - F_B) / (S_T - S_B)
    if c <= 0.0:
        return math.inf

    def overshoots(tau):
        eng = _LegEngine(model, S_B, F_B, c, tau)
        fld = eng.fi if case == "i" else eng.fd
        G0 = fld.G(S_B)
        if abs(G0) < 1e-12:
            k = eng.kappa(fld, S_B)
            if case == "i":
                S0, y0 = S_B + EPS_START, (k * EPS_START) ** 2
            else:
                S0, y0 = S_B - EPS_START, (k * EPS_START) ** 2
        else:
            S0, y0 = S_B, 0.0
        if case == "i":
            leg = eng.i_leg(S0, y0, S_T, S_T)
        else:
            leg = eng.d_leg(S0, y0, S_T, S_T)
        return leg.y_end > YTOL

    # analytic seed of the same structure as the classical lower bound
    fld = _ChordField(model, case, S_B, F_B, c)
    lo_g, hi_g = (S_B, S_T) if case == "i" else (S_T, S_B)
    grid = np.linspace(lo_g + 1e-9, hi_g - 1e-9, 400)
    P_low = min(abs(fld.dpc(s)) for s in grid)
    m0 = max(abs(fld.dG(s)) for s in grid)
    seed = P_low ** 2 / (4.0 * c * m0)
    guard = 0
    lo = seed
    while overshoots(lo):
        lo *= 0.5
        guard += 1
        if guard > 60:
            raise NumericalError("tau_star: no monotone regime found")
    hi = 2.0 * lo
    guard = 0
    while not overshoots(hi):
        hi *= 2.0
        guard += 1
        if guard > 20:
            raise NumericalError("tau_star: bracket growth cap exceeded")
    return bisect_predicate(overshoots, max(lo, hi / 2.0), hi, rel_tol=1e-6)


def _frozen_orbit(model, S_B, S_T, p_B, F_B):
    fi, fd = model.flux_i, model.flux_d
    if fd.F(S_T) < F_B - 1e-14:
        raise DomainError(
            "no scanning pressure carries the base flux at the fixed top "
            f"state: F_d({S_T}) < F_B"
        )
    p_lo, p_hi = model.pc("i", S_T), model.pc("d", S_T)
    p_T = bisect_root(lambda p: model.flux(S_T, p).F - F_B, p_lo, p_hi)
    # stationary interface: base state ahead (small xi), top state behind
    xi = np.array([-1.0, 0.0, 0.0, 1.0])
    S = np.array([S_B, S_B, S_T, S_T])
    p = np.array([p_B, p_B, p_T, p_T])
    return Orbit(xi=xi, S=S, p=p, outcome=OrbitOutcome.FROZEN, c=0.0,
                 tau=model.capillary.tau, p_T=p_T)


def scenario_b_orbit(problem: TWProblem) -> Orbit:
    """Wave orbit with hysteretic permeabilities (pressure-dependent flux).

    Covers the advancing branch wave, the receding branch wave, the frozen
    jump (no moving wave exists; the top pressure pins inside the scanning
    band), and the stable-plateau composite: when the direct advancing wave
    overshoots, the orbit is re-anchored on the line through the base state
    and the drainage value of the top state, producing a hump that passes
    the plateau saturation and lands on the drainage equilibrium of the top
    state at the common speed.  Persistent rotation that neither lands nor
    decays (the hysteresis-loop limit cycle of the receding wave at large
    relaxation times) is reported as INFINITE_SPIRAL.
    """
    model = problem.model
    S_B, S_T, p_B, tau = problem.S_B, problem.S_T, problem.p_B, problem.tau
    base = base_state(model, S_B, p_B)
    F_B = base.F_B
    fi, fd = model.flux_i, model.flux_d
    if abs(S_T - S_B) < 1e-12:
        raise DomainError("degenerate wave: S_T == S_B")

    if S_T < S_B:
        # receding branch wave through the drainage curve
        _, S_bar_d = tangent_saturations_B(model, base)
        if S_T < S_bar_d - 1e-12:
            raise DomainError(
                f"S_T={S_T} below the drainage tangent saturation "
                f"{S_bar_d}: no single wave (rarefaction needed)"
            )
        if fd.F(S_T) >= F_B - 1e-14:
            return _frozen_orbit(model, S_B, S_T, p_B, F_B)
        c = (fd.F(S_T) - F_B) / (S_T - S_B)
        eng = _LegEngine(model, S_B, F_B, c, tau)
        bld = _OrbitBuilder(model, c, tau)
        pcd_B = model.pc("d", S_B)
        if pcd_B - p_B > 1e-12:
            bld.add_connector(S_B, p_B + 1e-6 * (pcd_B - p_B), pcd_B, F_B)
            S0, y0 = S_B, 0.0
        else:
            # base sits on the drainage curve: step off the saddle
            k = eng.kappa(eng.fd, S_B)
            S0, y0 = S_B - EPS_START, (k * EPS_START) ** 2
        outcome, amps = _alternate_legs(
            eng, bld, model, start_side="d", S_start=S0, y_start=y0,
            target=S_T, lo_stop=1e-6, hi_stop=S_B - 1e-12,
            land_map={"d": OrbitOutcome.DRAINAGE_CONNECTION,
                      "i": OrbitOutcome.DRAINAGE_CONNECTION})
        return bld.assemble((S_B + S_T) / 2.0, outcome,
                            n_legs=len(amps), amplitudes=amps)

    # advancing side
    if fi.F(S_T) < F_B - 1e-14:
        return _frozen_orbit(model, S_B, S_T, p_B, F_B)
    S_bar_i, _ = tangent_saturations_B(model, base)
    if S_T > S_bar_i + 1e-12:
        raise DomainError(
            f"S_T={S_T} beyond the imbibition tangent saturation "
            f"{S_bar_i}: no single wave (rarefaction needed)"
        )

    def advancing(c):
        eng = _LegEngine(model, S_B, F_B, c, tau)
        bld = _OrbitBuilder(model, c, tau)
        pci_B = model.pc("i", S_B)
        if p_B - pci_B > 1e-12:
            bld.add_connector(S_B, p_B - 1e-6 * (p_B - pci_B), pci_B, F_B)
            S0, y0 = S_B, 0.0
        else:
            k = eng.kappa(eng.fi, S_B)
            S0, y0 = S_B + EPS_START, (k * EPS_START) ** 2
        return eng, bld, S0, y0

    c_i = (fi.F(S_T) - F_B) / (S_T - S_B)
    if c_i <= 1e-14:
        return _frozen_orbit(model, S_B, S_T, p_B, F_B)
    eng, bld, S0, y0 = advancing(c_i)
    first = eng.i_leg(S0, y0, S_T, S_CAP)
    if first.status == "landed" or (first.status == "touch"
                                    and abs(first.S_end - S_T) < LAND_TOL):
        bld.add_leg(first, eng.fi, 1.0)
        return bld.assemble((S_B + S_T) / 2.0,
                            OrbitOutcome.MONOTONE_TO_IMBIBITION,
                            S_m=S_T, n_legs=1, amplitudes=[0.0])
    if first.status == "end":
        raise NumericalError("advancing branch wave escaped toward S = 1")

    # overshoot: stable-plateau composite at the drainage chord speed
    S_P = plateau_saturation(model, base, S_T)
    c_P = (fd.F(S_T) - F_B) / (S_T - S_B)
    eng, bld, S0, y0 = advancing(c_P)
    outcome, amps = _alternate_legs(
        eng, bld, model, start_side="i", S_start=S0, y_start=y0,
        target_i=S_P, target_d=S_T, lo_stop=S_B + 1e-9, hi_stop=S_CAP,
        plateau=S_P)
    S_m = next((S_P + a for a in amps if a > 0.0), None)
    return bld.assemble((S_B + S_T) / 2.0, outcome, S_m=S_m,
                        n_legs=len(amps), amplitudes=amps, plateau=S_P)


def _alternate_legs(eng, bld, model, start_side, S_start, y_start,
                    lo_stop, hi_stop, target=None, target_i=None,
                    target_d=None, land_map=None, plateau=None):
    """Run alternating curve legs until a landing or sustained rotation.

    With a single ``target`` both sides aim for the same equilibrium (the
    receding wave); with split targets the imbibition side aims for the
    plateau crossing and the drainage side for the top state (the composite
    wave).  Returns (outcome, amplitudes).
    """
    if target is not None:
        target_i = target_d = target
    side, S_cur, y_cur = start_side, S_start, y_start
    amps = []
    for n in range(MAX_LEGS):
        if side == "i":
            tgt = target_i
            leg = eng.i_leg(S_cur, y_cur, tgt, hi_stop)
            bld.add_leg(leg, eng.fi, 1.0)
        else:
            tgt = target_d
            leg = eng.d_leg(S_cur, y_cur, tgt, lo_stop)
            bld.add_leg(leg, eng.fd, -1.0)
        if leg.status == "end":
            raise NumericalError(
                f"wave leg escaped the window at S={leg.S_end}"
            )
        amp = leg.S_end - tgt
        amps.append(amp)
        if _spiral(amps) or _limit_cycle(amps):
            return OrbitOutcome.INFINITE_SPIRAL, amps
        if leg.status == "landed" or abs(amp) < LAND_TOL:
            if land_map is not None:
                return land_map[side], amps
            if plateau is not None:
                if side == "d":
                    # landed on the drainage equilibrium of the top state
                    return OrbitOutcome.DRAINAGE_CONNECTION, amps
                # landed on the plateau crossing: glue the receding piece
                pci, pcd = model.pc("i", plateau), model.pc("d", plateau)
                line_val = eng.fi.line(plateau)
                bld.add_connector(plateau, pci + 1e-6 * (pcd - pci), pcd,
                                  line_val)
                tail = eng.d_leg(plateau, 0.0, target_d, lo_stop)
                bld.add_leg(tail, eng.fd, -1.0)
                if tail.status in ("landed", "touch") and \
                        abs(tail.S_end - target_d) < 1e-4:
                    return OrbitOutcome.DRAINAGE_CONNECTION, amps
                raise NumericalError(
                    "receding piece of the composite wave missed the top "
                    f"state: reached S={tail.S_end}"
                )
            return (OrbitOutcome.FINITE_TURNS_TO_IMBIBITION if side == "i"
                    else OrbitOutcome.FINITE_TURNS_TO_DRAINAGE), amps
        S_e = leg.S_end
        line_val = eng.fi.line(S_e)
        if side == "i":
            bld.add_connector(S_e, model.pc("i", S_e), model.pc("d", S_e),
                              line_val)
            side = "d"
        else:
            bld.add_connector(S_e, model.pc("d", S_e), model.pc("i", S_e),
                              line_val)
            side = "i"
        S_cur, y_cur = S_e, 0.0
    raise NumericalError("wave orbit: leg budget exhausted")
