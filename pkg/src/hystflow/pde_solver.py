"""Finite-volume solver for the relaxation system on a bounded interval.

The evolution couples an explicit saturation update driven by the play-type
pressure residual with an implicit pressure equation per time step,

    tau * dS/dt = R(S, p),        R = distance of p to the scanning band,
    dS/dt + d/dz (F(S, p) + h(S, p) dp/dz) = 0,

solved on cell centers with donor-cell advective fluxes and arithmetic-mean
diffusion coefficients.  Eliminating dS/dt gives an elliptic equation for
the pressure at frozen saturation; it is solved by a damped fixed-point
iteration whose linear part is a symmetric positive-definite tridiagonal
system (the L-scheme).  Steps that lose convergence or push saturations
out of (0,1) are rejected and retried with a halved time step.

The left boundary is zero-gradient in pressure (outflow of the wave), the
right boundary holds the base-state capillary pressure of the scenario.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, NumericalError

MAX_HALVINGS = 10

# Default damping weight of the pressure iteration.  Inside the scanning
# band the relaxation exerts no pull, so on long in-band stretches the
# frozen-saturation pressure equation is nearly indifferent to the local
# pressure level and its softest modes amplify the lagged coefficients
# into limit cycles.  A small uniform weight on (p_new - p_old) pins those
# modes to the previous iterate (their level is set by history anyway)
# without shifting the fixed point or slowing the stiffer modes.
DAMPING_ETA = 1e-3


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered mesh on (z_in, z_out)."""

    z_in: float
    z_out: float
    N: int

    def __post_init__(self):
        if not (self.z_in < 0.0 < self.z_out):
            raise DomainError("grid must contain the initial front: z_in < 0 < z_out")
        if self.N < 10:
            raise DomainError("at least 10 cells required")

    @property
    def dz(self):
        return (self.z_out - self.z_in) / self.N

    @property
    def centers(self):
        return self.z_in + (np.arange(self.N) + 0.5) * self.dz


@dataclass
class GridState:
    S: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def copy(self):
        return GridState(self.S.copy(), self.p.copy(), self.t)


@dataclass
class SolverConfig:
    """Numerical parameters; ``dt`` defaults to stability bounds.

    ``dt`` obeys an advective CFL-type limit, resolves the relaxation time
    and keeps the explicit saturation update stable against the capillary
    slope.  ``L`` overrides the damping weight of the pressure iteration;
    the relaxation slope 1/tau already sits on the diagonal of the active
    rows, so the default keeps only a small uniform weight that pins the
    otherwise indifferent pressure level of in-band stretches.  ``band_eps``
    smooths the play indicator over a narrow pressure width (orders of
    magnitude below the band gap), which both the pressure solve and the
    saturation update share so that the discrete mass balance still
    telescopes.
    """

    dt: float = None
    L: float = None
    tol: float = 1e-8
    max_iter: int = 500
    smoothing_l: float = 1.0
    t_end: float = 1.0
    bc_mode: str = None          # "A" or "B"; defaults to the model scenario
    checkpoints: tuple = ()
    band_eps: float = 1e-4       # regularization width of the band edges

    def __post_init__(self):
        if self.tol <= 0.0 or (self.dt is not None and self.dt <= 0.0):
            raise DomainError("dt and tol must be positive")
        if self.L is not None and self.L <= 0.0:
            raise DomainError("L must be positive")
        if self.band_eps < 0.0:
            raise DomainError("band_eps must be nonnegative")


@dataclass
class RunResult:
    grid: Grid
    states: list
    final: GridState
    steps: int = 0
    total_iterations: int = 0
    max_iterations: int = 0
    rejected_steps: int = 0
    mass_residual: float = 0.0
    wall_time: float = 0.0


def initial_condition(grid, S_B, S_T, l):
    """Monotone cubic smoothing of the Riemann data over [-l, l]."""
    if not 0.0 < l < min(-grid.z_in, grid.z_out):
        raise DomainError("smoothing length must fit inside the domain")
    z = grid.centers
    S = np.full(grid.N, 0.5 * (S_B + S_T))
    S += (S_T - S_B) / (4.0 * l**3) * z * (z**2 - 3.0 * l**2)
    S[z < -l] = S_T
    S[z > l] = S_B
    return S


def play_residual(model, S, p, eps=0.0):
    """Signed distance of p to the scanning band [pc_i(S), pc_d(S)].

    Positive below the imbibition curve (saturation rises), negative above
    the drainage curve, zero inside the band.  With ``eps > 0`` the kink at
    each band edge is rounded over a pressure width ``eps`` (quadratic
    through the corner, then linear with the exact slope, offset by eps/2);
    the pressure iteration needs the derivative to be continuous when the
    solution grazes a band edge over many cells at once.
    """
    pci = np.asarray(model.pc("i", S), dtype=float)
    pcd = np.asarray(model.pc("d", S), dtype=float)
    parr = np.asarray(p, dtype=float)
    if eps == 0.0:
        return np.where(parr < pci, pci - parr,
                        np.where(parr > pcd, pcd - parr, 0.0))
    lo = _rounded_corner(pci - parr, eps)
    hi = _rounded_corner(parr - pcd, eps)
    return lo - hi


def _rounded_corner(r, eps):
    """max(r, 0) with the corner at 0 rounded over [0, eps]."""
    return np.where(r >= eps, r - 0.5 * eps,
                    np.clip(r, 0.0, None) ** 2 / (2.0 * eps))


class FVSolver:
    """Time stepper for one Riemann-type run.

    Parameters
    ----------
    problem : TWProblem
        Model and Riemann data (S_B ahead, S_T behind, base pressure).
    grid : Grid
    config : SolverConfig

    Notes
    -----
    ``initial_state`` places the saturation on the cubic smoothing of the
    data and the pressure on the scenario's equilibrium branch, so the run
    starts from a capillary-relaxed column.
    """

    def __init__(self, problem, grid, config):
        self.problem = problem
        self.model = problem.model
        self.grid = grid
        self.config = config
        self.tau = problem.tau
        if self.tau <= 0.0:
            raise DomainError("relaxation time must be positive")
        self.mode = config.bc_mode or problem.scenario
        branch = "i" if self.mode == "A" else "d"
        self.bc_branch = branch
        self.p_bc = problem.p_B
        self._dFmax = self._flux_slope_bound()

    # -- setup -----------------------------------------------------------

    def _flux_slope_bound(self):
        lo = min(self.problem.S_B, self.problem.S_T)
        hi = max(self.problem.S_B, self.problem.S_T)
        S = np.linspace(lo, min(hi + 0.05, 1.0 - 1e-9), 200)
        out = max(abs(self.model.flux_i.dF(s)) for s in S)
        if not self.model.scenario_a:
            out = max(out, max(abs(self.model.flux_d.dF(s)) for s in S))
        return out

    def dt_auto(self):
        lo = min(self.problem.S_B, self.problem.S_T)
        hi = max(self.problem.S_B, self.problem.S_T)
        S = np.linspace(lo, hi, 200)
        dpc = max(np.max(np.abs(self.model.dpc("i", S))),
                  np.max(np.abs(self.model.dpc("d", S))))
        return min(0.5 * self.grid.dz / self._dFmax,
                   0.5 * self.tau,
                   0.8 * self.tau / dpc)

    def lscheme_L(self):
        return self.config.L if self.config.L is not None else DAMPING_ETA

    def initial_state(self):
        S = initial_condition(self.grid, self.problem.S_B, self.problem.S_T,
                              self.config.smoothing_l)
        p = np.asarray(self.model.pc(self.bc_branch, S), dtype=float)
        return GridState(S, p, 0.0)

    # -- spatial operators -------------------------------------------------

    def apply_bcs(self, S, p):
        """Ghost values (S, p) beyond the left and right boundaries."""
        left = (S[0], p[0])                      # zero gradient
        right = (self.problem.S_B, 2.0 * self.p_bc - p[-1])
        return left, right

    def _faces(self, S, p):
        """Upwinded advective flux and mean diffusivity on the N+1 faces."""
        (S_l, p_l), (S_r, p_r) = self.apply_bcs(S, p)
        Se = np.concatenate(([S_l], S, [S_r]))
        pe = np.concatenate(([p_l], p, [p_r]))
        tr = self.model.flux(Se, pe)
        F_cell, h_cell = np.asarray(tr.F), np.asarray(tr.h)
        h_face = 0.5 * (h_cell[:-1] + h_cell[1:])
        dpdz = (pe[1:] - pe[:-1]) / self.grid.dz
        probe = 0.5 * (F_cell[:-1] + F_cell[1:]) + h_face * dpdz
        F_face = np.where(probe >= 0.0, F_cell[:-1], F_cell[1:])
        return F_face, h_face

    def total_flux(self, S, p):
        """Advective + diffusive flux on the faces at the given state."""
        (S_l, p_l), (S_r, p_r) = self.apply_bcs(S, p)
        pe = np.concatenate(([p_l], p, [p_r]))
        F_face, h_face = self._faces(S, p)
        return F_face + h_face * (pe[1:] - pe[:-1]) / self.grid.dz

    # -- pressure solve ----------------------------------------------------

    def lscheme_pressure_solve(self, state):
        """Converged pressure at frozen saturation, and iteration count.

        Each pass solves the SPD tridiagonal system for the equation

            R(S, p)/tau = -d/dz (F + h dp/dz)

        with the advective flux and diffusivity lagged at the previous
        iterate.  The relaxation term is linearized about the old iterate
        (a semismooth Newton step): the row gets D = |dR/dp|/tau on the
        diagonal and D*p_old + R(p_old)/tau on the right-hand side, which
        for the piecewise form reduces to anchoring active cells at their
        band edge with the full 1/tau slope.  This terminates as soon as
        the active set stabilizes; purely lagging the residual contracts
        like 1 - O(tau) per pass and stalls on the weakly-coupled in-band
        cells.  A damping weight (``lscheme_L``) is re-injected from the
        old iterate: it leaves the fixed point alone but pins the softest
        modes of long in-band stretches, whose pressure level the equation
        at frozen saturation barely determines, so that lagged-coefficient
        kinks cannot excite them.  The ``band_eps`` corner rounding keeps
        the linearization continuous for cells grazing a band edge, and
        the iterate is additionally under-relaxed (same fixed point,
        damped map) whenever consecutive updates point in opposing
        directions.
        """
        cfg = self.config
        S = state.S
        eta = self.lscheme_L()
        dz = self.grid.dz
        N = self.grid.N
        p = state.p.copy()
        pci = np.asarray(self.model.pc("i", S), dtype=float)
        pcd = np.asarray(self.model.pc("d", S), dtype=float)
        eps = cfg.band_eps
        relax = 1.0
        prev_delta = np.inf
        prev_dp = None
        for it in range(1, cfg.max_iter + 1):
            F_face, h_face = self._faces(S, p)
            if eps > 0.0:
                w_lo = np.clip((pci - p) / eps, 0.0, 1.0)
                w_hi = np.clip((p - pcd) / eps, 0.0, 1.0)
                resid = _rounded_corner(pci - p, eps) - _rounded_corner(
                    p - pcd, eps)
            else:
                w_lo = (p < pci).astype(float)
                w_hi = (p > pcd).astype(float)
                resid = w_lo * (pci - p) + w_hi * (pcd - p)
            chi = (w_lo + w_hi) / self.tau
            rhs = ((chi + eta) * p + resid / self.tau
                   + (F_face[1:] - F_face[:-1]) / dz)
            diag = chi + eta + (h_face[:-1] + h_face[1:]) / dz**2
            off = -h_face[1:-1] / dz**2
            # left face carries no pressure gradient (zero-gradient ghost)
            diag[0] -= h_face[0] / dz**2
            # right ghost is reflected through the Dirichlet value
            diag[-1] += h_face[-1] / dz**2
            rhs[-1] += 2.0 * h_face[-1] * self.p_bc / dz**2
            ab = np.zeros((3, N))
            ab[0, 1:] = off
            ab[1] = diag
            ab[2, :-1] = off
            p_new = solve_banded((1, 1), ab, rhs)
            if relax < 1.0:
                p_new = p + relax * (p_new - p)
            dp = p_new - p
            delta = np.max(np.abs(dp))
            p = p_new
            if delta < cfg.tol:
                return p, it
            if prev_dp is not None and float(np.dot(dp, prev_dp)) < 0.0:
                relax = max(0.5 * relax, 0.25)
            elif delta < 0.5 * prev_delta:
                relax = min(2.0 * relax, 1.0)
            prev_delta = delta
            prev_dp = dp
        raise NumericalError(
            f"pressure iteration stalled: {cfg.max_iter} passes, "
            f"last update {delta:.2e} at t={state.t:.6g}"
        )

    def saturation_update(self, state, p_new, dt):
        return state.S + (dt / self.tau) * play_residual(
            self.model, state.S, p_new, eps=self.config.band_eps)

    # -- time loop ---------------------------------------------------------

    def step(self, state, dt):
        p_new, iters = self.lscheme_pressure_solve(state)
        S_new = self.saturation_update(state, p_new, dt)
        if not (np.all(np.isfinite(S_new)) and np.all(np.isfinite(p_new))):
            raise NumericalError("state lost finiteness")
        if np.any(S_new <= 0.0) or np.any(S_new >= 1.0):
            raise NumericalError("saturation left (0,1)")
        return GridState(S_new, p_new, state.t + dt), iters

    def mass_residual(self, state, new, dt):
        flux = self.total_flux(state.S, new.p)
        dM = np.sum(new.S - state.S) * self.grid.dz
        return abs(dM + dt * (flux[-1] - flux[0]))

    def run(self):
        """Advance to t_end, recording the requested checkpoint states."""
        cfg = self.config
        t0 = time.perf_counter()
        state = self.initial_state()
        dt_base = cfg.dt if cfg.dt is not None else self.dt_auto()
        remaining = sorted(t for t in cfg.checkpoints if t <= cfg.t_end)
        result = RunResult(self.grid, [], state)
        while remaining and remaining[0] <= 1e-12:
            result.states.append(state.copy())
            remaining.pop(0)
        dt_cur = dt_base
        while state.t < cfg.t_end - 1e-12:
            target = remaining[0] if remaining else cfg.t_end
            dt = min(dt_cur, target - state.t, cfg.t_end - state.t)
            for halving in range(MAX_HALVINGS + 1):
                try:
                    new, iters = self.step(state, dt)
                    break
                except NumericalError:
                    if halving == MAX_HALVINGS:
                        raise NumericalError(
                            f"step at t={state.t:.6g} rejected after "
                            f"{MAX_HALVINGS} halvings (dt={dt:.3e})"
                        )
                    dt *= 0.5
                    dt_cur = dt
                    result.rejected_steps += 1
            result.mass_residual = max(result.mass_residual,
                                       self.mass_residual(state, new, dt))
            state = new
            result.steps += 1
            result.total_iterations += iters
            result.max_iterations = max(result.max_iterations, iters)
            dt_cur = min(dt_cur * 2.0, dt_base)
            if remaining and state.t >= remaining[0] - 1e-12:
                result.states.append(state.copy())
                remaining.pop(0)
        result.final = state
        result.wall_time = time.perf_counter() - t0
        return result


def run(problem, grid, config):
    """One-shot convenience wrapper around :class:`FVSolver`."""
    return FVSolver(problem, grid, config).run()
