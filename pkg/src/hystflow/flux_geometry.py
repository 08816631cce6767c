"""Chord, tangent, and root saturations of the flux diagram.

For a fixed base state (S_B, p_B) and a flux branch F, the traveling-wave and
Riemann constructions are parameterized by a handful of special saturations:
the inflection point S_o, the chord intersections S_tilde / beta(alpha), the
Welge tangent point S_bar, the quadrature root gamma(alpha), and the pair
(S_star, S_upper_star) where beta and gamma meet.  This module computes them
all by bracketed bisection and adaptive quadrature, plus the Scenario-B
tangent points and the plateau saturation.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, NumericalError
from .numerics import ROOT_TOL, bisect_root, integrate, scan_sign_change

__all__ = [
    "BaseState",
    "base_state",
    "FluxGeometry",
    "tangent_saturations_B",
    "plateau_saturation",
    "rarefaction_inverse",
]

# integration never reaches S = 1 exactly: G ~ 1/k_rn blows up there
S_CAP = 1.0 - 1e-8


@dataclass(frozen=True)
class BaseState:
    """Left/base state of a wave construction: (S_B, p_B) and U_B = (S_B, F_B)."""

    S_B: float
    p_B: float
    F_B: float


def base_state(model, S_B, p_B=None):
    """Build a :class:`BaseState`; p_B defaults to the imbibition pressure.

    The pressure must lie in the closed scanning band [p_c^(i), p_c^(d)] at
    S_B, which is what makes (S_B, p_B) an equilibrium of the wave system.
    """
    if p_B is None:
        p_B = model.pc("i", S_B)
    lo, hi = model.pc("i", S_B), model.pc("d", S_B)
    if not (lo - 1e-12 <= p_B <= hi + 1e-12):
        raise DomainError(
            f"p_B={p_B} outside the scanning interval [{lo}, {hi}] at S_B={S_B}"
        )
    return BaseState(float(S_B), float(p_B), float(model.flux(S_B, p_B).F))


class FluxGeometry:
    """Special saturations of one flux branch relative to a base state.

    Parameters
    ----------
    flux : BranchFlux
        The branch whose diagram is analyzed (in Scenario A both permeability
        branches coincide, so there is only one).
    base : BaseState
        Base state; chords emanate from U_B = (S_B, F_B).
    """

    def __init__(self, flux, base, root_tol=ROOT_TOL, scan_points=2000):
        self.flux = flux
        self.base = base
        self.root_tol = root_tol
        self.scan_points = scan_points
        self._gamma_cache = {}

    # -- chords --------------------------------------------------------------

    def chord_slope(self, alpha):
        if alpha == self.base.S_B:
            raise DomainError("degenerate chord: alpha equals S_B")
        return (self.flux.F(alpha) - self.base.F_B) / (alpha - self.base.S_B)

    def chord_function(self, S, alpha):
        """Secant line through U_B and (alpha, F(alpha))."""
        c = self.chord_slope(alpha)
        return self.base.F_B + c * (np.asarray(S, float) - self.base.S_B)

    def G(self, S, alpha):
        """(F - chord)/h, the pressure-equation right-hand side."""
        return (self.flux.F(S) - self.chord_function(S, alpha)) / self.flux.h(S)

    def dG(self, S, alpha):
        """Analytic derivative of G; at S=alpha this is (F'-c)/h exactly."""
        c = self.chord_slope(alpha)
        h = self.flux.h(S)
        return ((self.flux.dF(S) - c) - self.G(S, alpha) * self.flux.dh(S)) / h

    # -- special saturations ---------------------------------------------------

    @cached_property
    def S_o(self):
        """Inflection point: the root of F'' = 0."""
        br = scan_sign_change(self.flux.d2F, 1e-4, 1.0 - 1e-4, n=self.scan_points)
        if br is None:
            raise NumericalError("F'' has no sign change: flux is not S-shaped")
        return bisect_root(self.flux.d2F, *br, tol=self.root_tol)

    @cached_property
    def S_underline(self):
        """Tangent point of the chord from (1, 1): F'(S)(1-S) = 1 - F(S)."""
        fn = lambda S: self.flux.dF(S) * (1.0 - S) - (1.0 - self.flux.F(S))
        br = scan_sign_change(fn, 1e-4, 1.0 - 1e-4, n=self.scan_points)
        if br is None:
            raise NumericalError("no tangent point from (1,1) found")
        return bisect_root(fn, *br, tol=self.root_tol)

    @cached_property
    def S_tilde(self):
        """Interior re-intersection of the chord from U_B to (1, 1)."""
        c = (1.0 - self.base.F_B) / (1.0 - self.base.S_B)
        fn = lambda S: self.flux.F(S) - (self.base.F_B + c * (S - self.base.S_B))
        br = scan_sign_change(fn, self.base.S_B + 1e-6, 1.0 - 1e-6, n=self.scan_points)
        if br is None:
            raise NumericalError("chord to (1,1) has no interior intersection")
        return bisect_root(fn, *br, tol=self.root_tol)

    @cached_property
    def S_bar(self):
        """Welge tangent point: chord from U_B tangent to F."""
        fn = lambda S: self.flux.dF(S) * (S - self.base.S_B) - (
            self.flux.F(S) - self.base.F_B
        )
        br = scan_sign_change(fn, self.base.S_B + 1e-6, 1.0 - 1e-6, n=self.scan_points)
        if br is None:
            raise NumericalError("no tangent chord from the base state found")
        return bisect_root(fn, *br, tol=self.root_tol)

    # -- beta / gamma / star pair ----------------------------------------------

    def beta(self, alpha):
        """Third chord intersection in [S_bar, 1]; beta(S_bar)=S_bar, beta(S_tilde)=1."""
        if not (self.S_tilde - 1e-9 <= alpha <= self.S_bar + 1e-9):
            raise DomainError(f"beta defined on [S_tilde, S_bar], got {alpha}")
        if abs(alpha - self.S_bar) < 1e-12:
            return self.S_bar
        if abs(alpha - self.S_tilde) < 1e-12:
            return 1.0
        fn = lambda S: self.flux.F(S) - self.chord_function(S, alpha)
        lo = max(alpha + 1e-12, self.S_bar)
        br = scan_sign_change(fn, lo, 1.0, n=4000, direction="+-")
        if br is None:
            return 1.0
        return bisect_root(fn, *br, tol=self.root_tol)

    def gamma(self, alpha):
        """Second zero of the primitive of G: the smallest x > S_B with
        ``int_{S_B}^{x} G(s; alpha) ds = 0``.

        The primitive is strictly negative on (S_B, alpha] and can only come
        back to zero while G > 0, i.e. before the chord re-intersection; past
        beta(alpha) the integrand is negative again, so the search stops there.
        Raises when no root exists (that certifies alpha > S_star).
        """
        key = round(alpha, 12)
        if key in self._gamma_cache:
            return self._gamma_cache[key]
        S_B = self.base.S_B
        if abs(alpha - S_B) < 1e-14:
            return S_B
        upper = S_CAP
        if self.S_tilde <= alpha <= self.S_bar:
            upper = min(upper, self.beta(alpha))
        probes = np.linspace(S_B, upper, 1500)
        g = lambda s: self.G(s, alpha)
        P = 0.0
        root = None
        for k in range(1, len(probes)):
            P_next = P + integrate(g, probes[k - 1], probes[k])
            if P_next >= 0.0 and probes[k] > S_B + 1e-10:
                # bracketed: refine the crossing of the primitive
                base_val = P
                fn = lambda x: base_val + integrate(g, probes[k - 1], x)
                root = bisect_root(fn, probes[k - 1], probes[k], tol=self.root_tol)
                break
            P = P_next
        if root is None:
            raise NumericalError(
                f"primitive of G has no second zero for alpha={alpha} "
                "(alpha exceeds S_star)"
            )
        self._gamma_cache[key] = root
        return root

    def has_gamma(self, alpha):
        try:
            self.gamma(alpha)
            return True
        except NumericalError:
            return False

    @cached_property
    def star_pair(self):
        """(S_star, S_upper_star): where gamma and beta meet; beyond S_star no
        gamma root exists."""
        lo = self.S_tilde + 1e-6
        hi = self.S_bar - 1e-6

        def above(alpha):
            # gamma(alpha) >= beta(alpha) iff the primitive of G is still
            # negative at beta, i.e. Phi > 0 there; one quadrature instead of
            # a full root search
            return self.Phi(self.beta(alpha), alpha) > 0.0

        if above(lo) or not above(hi):
            raise NumericalError(
                "beta and gamma do not intersect on (S_tilde, S_bar); "
                "this flux/base combination is out of scope"
            )
        while hi - lo > 1e-8:
            mid = 0.5 * (lo + hi)
            if above(mid):
                hi = mid
            else:
                lo = mid
        S_star = 0.5 * (lo + hi)
        return S_star, self.beta(min(S_star, self.S_bar))

    @property
    def S_star(self):
        return self.star_pair[0]

    @property
    def S_upper_star(self):
        return self.star_pair[1]

    # -- the Phi potential -----------------------------------------------------

    def Phi(self, S, alpha):
        """-int_{S_B}^{S} G(s; alpha) ds, capped just below full saturation."""
        S_eff = min(float(S), S_CAP)
        if S_eff <= self.base.S_B:
            return 0.0
        return -integrate(lambda s: self.G(s, alpha), self.base.S_B, S_eff)

    def phi_diverges(self, alpha, tail_threshold=1e3):
        """True when the Phi tail beyond the cap is effectively infinite."""
        tail = -integrate(lambda s: self.G(s, alpha), 1.0 - 1e-4, S_CAP)
        return abs(tail) > tail_threshold


def _tangent_residual(flux, base):
    return lambda S: flux.dF(S) * (S - base.S_B) - (flux.F(S) - base.F_B)


def tangent_saturations_B(model, base):
    """Tangent points (S_bar_i, S_bar_d) from U_B to the two flux branches.

    S_bar_i >= S_B is the tangency on the imbibition branch, S_bar_d <= S_B
    on the drainage branch.  Degenerate cases return S_B itself (base on the
    curve with the wrong-signed curvature); a branch with no interior tangency
    returns the domain endpoint (1 or ~0).
    """
    fi, fd = model.flux_i, model.flux_d
    S_B = base.S_B

    # imbibition side, searching upward
    if abs(base.p_B - model.pc("i", S_B)) < 1e-12 and fi.d2F(S_B) <= 0.0:
        S_bar_i = S_B
    else:
        fn = _tangent_residual(fi, base)
        br = scan_sign_change(fn, S_B + 1e-6, 1.0 - 1e-9, n=4000)
        S_bar_i = bisect_root(fn, *br) if br is not None else 1.0

    # drainage side, searching downward from S_B
    if abs(base.p_B - model.pc("d", S_B)) < 1e-12 and fd.d2F(S_B) >= 0.0:
        S_bar_d = S_B
    else:
        fn = _tangent_residual(fd, base)
        grid = np.linspace(S_B - 1e-6, 1e-6, 4000)
        vals = np.array([fn(g) for g in grid])
        s = np.sign(vals)
        idx = np.where(s[:-1] != s[1:])[0]
        if idx.size:
            a, b = grid[idx[0] + 1], grid[idx[0]]
            S_bar_d = bisect_root(fn, a, b)
        else:
            S_bar_d = 1e-6
    return S_bar_i, S_bar_d


def plateau_saturation(model, base, S_T):
    """Saturation S_P of the stable plateau between an infiltration and a
    drainage front of equal speed.

    S_P is where the line through U_B = (S_B, F_B) and (S_T, F^(d)(S_T))
    meets the imbibition branch, in (S_T, S_bar_i).  At the root the three
    points are collinear, which is exactly the equal-speed condition.
    """
    fi, fd = model.flux_i, model.flux_d
    c_P = (fd.F(S_T) - base.F_B) / (S_T - base.S_B)
    line = lambda S: base.F_B + c_P * (S - base.S_B)
    fn = lambda S: fi.F(S) - line(S)
    # first intersection beyond S_T; the stable-plateau regime has it below
    # the tangency point S_bar_i, but the root itself is defined either way
    br = scan_sign_change(fn, S_T + 1e-9, 1.0 - 1e-9, n=4000)
    if br is None:
        raise NumericalError("no stable plateau for this data: the connecting "
                             "line does not meet the imbibition branch")
    return bisect_root(fn, *br)


def rarefaction_inverse(flux, zeta, S_lo, S_hi, tol=ROOT_TOL):
    """Invert F' = zeta on a monotone piece [S_lo, S_hi] of one branch."""
    fn = lambda S: flux.dF(S) - zeta
    a, b = fn(S_lo), fn(S_hi)
    if a == 0.0:
        return S_lo
    if b == 0.0:
        return S_hi
    if np.sign(a) == np.sign(b):
        raise NumericalError(
            f"speed {zeta} outside the admissible range "
            f"[{min(flux.dF(S_lo), flux.dF(S_hi))}, {max(flux.dF(S_lo), flux.dF(S_hi))}]"
        )
    return bisect_root(fn, S_lo, S_hi, tol=tol)
