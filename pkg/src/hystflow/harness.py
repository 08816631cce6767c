"""Command-line front-end: run configuration, CSV emission, and the
measured-vs-predicted comparison metrics.

A run is described by an INI document with sections ``[constitutive]``,
``[geometry]``, ``[tw]``, ``[riemann]``, ``[pde]`` and ``[compare]``; every
key has a default, unknown keys are rejected, and a run is reproducible from
its config file alone.  Results are emitted as plain CSV (header row, comma
delimiter, LF endings, 17-significant-digit floats) so any plotting tool can
consume them; nothing is rendered in-process.

The comparison path closes the loop between the finite-volume solver and the
wave-level predictions: a plateau is read off the late-time profile, front
speeds are estimated from level crossings of two checkpoints, and both are
set against the plateau/speed values computed from the flux geometry and the
Riemann constructions.
"""

import argparse
import configparser
import sys
from dataclasses import dataclass, field

import numpy as np

from . import entropy, pde_solver
from .constitutive import (
    FLUX_PRESETS,
    CapillaryModel,
    ConstitutiveModel,
    PermeabilityModel,
    VanGenuchtenCurve,
)
from .errors import ConfigError, DomainError, NumericalError
from .flux_geometry import (
    FluxGeometry,
    base_state,
    plateau_saturation,
    tangent_saturations_B,
)
from .tw_solver import (
    SolutionSet,
    TWProblem,
    WaveAnalysis,
    integrate_orbit,
    rh_speed,
    scenario_b_orbit,
)

__all__ = [
    "RunConfig",
    "ComparisonReport",
    "extract_plateau",
    "estimate_front_speed",
    "compare",
    "write_csv",
    "read_csv",
    "main",
]


# ---------------------------------------------------------------------------
# configuration


def _floats(text):
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


#: per-section key schema: key -> (parser, default).  ``None`` defaults mean
#: "absent": downstream code substitutes its own derived value.
_SCHEMA = {
    "constitutive": {
        "Lambda_i": (float, 3.5),
        "m_i": (float, 0.92),
        "Lambda_d": (float, 7.0),
        "m_d": (float, 0.9),
        "tau": (float, 1.0),
        "M": (float, 1.0),
        "N_g": (float, 1.0),
        "q_i": (float, 2.0),
        "q_d": (float, 2.0),
        "hysteretic_permeability": (None, False),  # parsed as a boolean
        "f_i": (str, None),
        "f_d": (str, None),
    },
    "geometry": {
        "S_B": (float, 0.1),
        "p_B": (float, None),
    },
    "tw": {
        "S_T": (float, 0.4),
        "tau_min": (float, 0.25),
        "tau_max": (float, 4.0),
        "n_tau": (int, 8),
    },
    "riemann": {
        "S_T": (float, 0.55),
        "t": (float, 1.0),
        "z_min": (float, None),
        "z_max": (float, None),
        "n": (int, 800),
    },
    "pde": {
        "S_T": (float, 0.55),
        "z_in": (float, -10.0),
        "z_out": (float, 500.0),
        "N": (int, 2550),
        "t_end": (float, 300.0),
        "dt": (float, None),
        "tol": (float, 1e-8),
        "max_iter": (int, 500),
        "smoothing_l": (float, 1.0),
        "checkpoints": (_floats, None),
    },
    "compare": {
        "t1": (float, None),
        "t2": (float, None),
        "level": (float, None),
        "min_cells": (int, 20),
        "tol": (float, 5e-3),
    },
}

_BOOL_WORDS = {
    "true": True, "yes": True, "on": True, "1": True,
    "false": False, "no": False, "off": False, "0": False,
}


def _parse_value(section, key, raw):
    parse, _ = _SCHEMA[section][key]
    if parse is None:
        word = raw.strip().lower()
        if word not in _BOOL_WORDS:
            raise ConfigError(f"[{section}] {key}: not a boolean: {raw!r}")
        return _BOOL_WORDS[word]
    try:
        return parse(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}")


@dataclass
class RunConfig:
    """Typed view of one INI run description (all sections, all defaults).

    Every section is a plain dict keyed as in the file.  ``load`` reads and
    validates a file; ``defaults`` gives the built-in run.  The ``build_*``
    helpers turn the sections into model / problem / solver objects.
    """

    constitutive: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)
    tw: dict = field(default_factory=dict)
    riemann: dict = field(default_factory=dict)
    pde: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)

    def __post_init__(self):
        for section, schema in _SCHEMA.items():
            values = dict(getattr(self, section))
            for key in values:
                if key not in schema:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
            for key, (_, default) in schema.items():
                values.setdefault(key, default)
            setattr(self, section, values)

    @classmethod
    def defaults(cls):
        return cls()

    @classmethod
    def load(cls, path):
        parser = configparser.ConfigParser(
            inline_comment_prefixes=("#",), interpolation=None
        )
        parser.optionxform = str  # keys are case-sensitive (Lambda_i vs m_i)
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}")
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path!r}: {exc}")
        sections = {}
        for name in parser.sections():
            if name not in _SCHEMA:
                raise ConfigError(f"unknown section [{name}]")
            values = {}
            for key, raw in parser.items(name):
                if key not in _SCHEMA[name]:
                    raise ConfigError(f"unknown key {key!r} in [{name}]")
                values[key] = _parse_value(name, key, raw)
            sections[name] = values
        return cls(**sections)

    # -- builders ------------------------------------------------------------

    def build_model(self):
        c = self.constitutive
        cap = CapillaryModel(
            imbibition=VanGenuchtenCurve(c["Lambda_i"], c["m_i"]),
            drainage=VanGenuchtenCurve(c["Lambda_d"], c["m_d"]),
            tau=c["tau"],
        )
        if c["f_i"] is not None or c["f_d"] is not None:
            if c["f_i"] is None or c["f_d"] is None:
                raise ConfigError("flux presets come in pairs: set both f_i and f_d")
            if c["M"] != 1.0:
                raise ConfigError("flux presets fix the shape of f; leave M at 1")
            for name in (c["f_i"], c["f_d"]):
                if name not in FLUX_PRESETS:
                    raise ConfigError(f"unknown flux preset {name!r}")
            perm = PermeabilityModel(
                FLUX_PRESETS[c["f_i"]]["i"],
                FLUX_PRESETS[c["f_d"]]["d"],
                hysteretic=True,
            )
        else:
            perm = PermeabilityModel.brooks_corey(
                q_i=c["q_i"], q_d=c["q_d"],
                hysteretic=c["hysteretic_permeability"],
            )
        return ConstitutiveModel(
            capillary=cap, permeability=perm, M=c["M"], N_g=c["N_g"]
        )

    def build_problem(self, S_T, model=None, tau=None):
        model = model or self.build_model()
        return TWProblem(
            model=model,
            S_B=self.geometry["S_B"],
            S_T=S_T,
            p_B=self.geometry["p_B"],
            tau=tau,
        )

    def build_grid(self):
        p = self.pde
        return pde_solver.Grid(z_in=p["z_in"], z_out=p["z_out"], N=p["N"])

    def build_solver_config(self, checkpoints=None):
        p = self.pde
        if checkpoints is None:
            checkpoints = p["checkpoints"] or ()
        return pde_solver.SolverConfig(
            dt=p["dt"],
            tol=p["tol"],
            max_iter=p["max_iter"],
            smoothing_l=p["smoothing_l"],
            t_end=p["t_end"],
            checkpoints=tuple(checkpoints),
        )


# ---------------------------------------------------------------------------
# profile metrics


def extract_plateau(z, S, min_cells=20, tol=5e-3, exclude=(), exclude_tol=1e-2):
    """Find the plateau of a saturation profile, if there is one.

    A plateau is the longest run of at least ``min_cells`` consecutive cells
    that all sit within ``tol`` of the run's own median.  Runs are seeded by
    a left-to-right sweep over windows of total spread below ``tol`` and then
    extended cell by cell while the median condition keeps holding, so a
    slowly drifting plateau keeps its full extent.  Runs whose median lies
    within ``exclude_tol`` of any level in ``exclude`` are skipped — pass the
    Riemann end states to ignore the unperturbed regions ahead of and behind
    the wave.

    Returns ``(median, (z_lo, z_hi))``, or ``None`` when no run qualifies.
    """
    z = np.asarray(z, dtype=float)
    S = np.asarray(S, dtype=float)
    if z.shape != S.shape or z.ndim != 1:
        raise DomainError("profile arrays must be 1-d and of equal length")
    n = S.size
    runs = []
    i = 0
    while i < n:
        lo = hi = S[i]
        j = i + 1
        while j < n:
            lo2 = min(lo, S[j])
            hi2 = max(hi, S[j])
            if hi2 - lo2 >= tol:
                break
            lo, hi = lo2, hi2
            j += 1
        if j - i >= min_cells:
            runs.append(_grow_run(S, i, j, tol))
        i = max(j, i + 1)
    best = None
    for i, j in runs:
        med = float(np.median(S[i:j]))
        if any(abs(med - lvl) < exclude_tol for lvl in exclude):
            continue
        if best is None or (j - i) > (best[1] - best[0]):
            best = (i, j)
    if best is None:
        return None
    i, j = best
    med = float(np.median(S[i:j]))
    return med, (float(z[i]), float(z[j - 1]))


def _grow_run(S, i, j, tol):
    """Extend [i, j) outward while every cell stays within tol of the median."""
    while True:
        med = np.median(S[i:j])
        if i > 0 and abs(S[i - 1] - med) < tol and np.all(np.abs(S[i - 1:j] - np.median(S[i - 1:j])) < tol):
            i -= 1
            continue
        if j < S.size and np.all(np.abs(S[i:j + 1] - np.median(S[i:j + 1])) < tol):
            j += 1
            continue
        return i, j


def _crossings(z, S, level):
    d = S - level
    sign_change = np.nonzero(d[:-1] * d[1:] < 0.0)[0]
    exact = np.nonzero(d == 0.0)[0]
    zs = [z[k] for k in exact]
    for k in sign_change:
        zs.append(z[k] + (level - S[k]) * (z[k + 1] - z[k]) / (S[k + 1] - S[k]))
    return sorted(zs)


def estimate_front_speed(z, S1, t1, S2, t2, level, which="last"):
    """Front speed from the level crossings of two snapshots.

    The crossing position of ``level`` is located by linear interpolation in
    each profile; the speed is the displacement over ``t2 - t1``.  ``which``
    picks the crossing when the profile cuts the level more than once:
    ``"first"`` (smallest z, the trailing front) or ``"last"`` (largest z,
    the leading front).  A profile that does not cross the level is an
    error; identical snapshots give speed 0.
    """
    if which not in ("first", "last"):
        raise DomainError(f"which must be 'first' or 'last', got {which!r}")
    if not t2 > t1:
        raise DomainError("need two snapshots with t2 > t1")
    z = np.asarray(z, dtype=float)
    pick = 0 if which == "first" else -1
    positions = []
    for S in (S1, S2):
        zs = _crossings(z, np.asarray(S, dtype=float), level)
        if not zs:
            raise DomainError(f"profile does not cross level {level}")
        positions.append(zs[pick])
    return (positions[1] - positions[0]) / (t2 - t1)


# ---------------------------------------------------------------------------
# comparison


@dataclass
class ComparisonReport:
    """Measured-vs-predicted summary of one finite-volume run.

    ``front_speeds`` and ``theory_values`` are keyed by the same wave names
    (``plateau``, ``front_i``, ``front_d``); ``deviations`` holds the
    absolute error for every key present on both sides, so each reported
    deviation traces back to one measured and one predicted number.
    """

    plateau_value: float
    plateau_extent: tuple
    front_speeds: dict
    theory_values: dict
    deviations: dict

    def rows(self):
        measured = dict(self.front_speeds)
        if self.plateau_value is not None:
            measured["plateau"] = self.plateau_value
        names = sorted(set(measured) | set(self.theory_values))
        out = []
        for name in names:
            out.append((
                name,
                measured.get(name, ""),
                self.theory_values.get(name, ""),
                self.deviations.get(name, ""),
            ))
        return out


def _theory_advancing_a(problem):
    model = problem.model
    wa = WaveAnalysis(model, problem.S_B, problem.p_B)
    F = model.flux_i.F
    cls = wa.classify_pair(problem.S_T, problem.tau)
    if cls is SolutionSet.A:
        return {"front_i": wa.chord(problem.S_T)}
    if cls in (SolutionSet.B, SolutionSet.C):
        S_hat = wa.S_hat(problem.tau)
        theory = {
            "plateau": float(S_hat),
            "front_i": (F(S_hat) - wa.F_B) / (S_hat - wa.S_B),
        }
        if cls is SolutionSet.B:
            theory["front_d"] = (F(problem.S_T) - F(S_hat)) / (problem.S_T - S_hat)
        else:
            # trailing structure is a fan; a level inside it travels at the
            # characteristic speed of that saturation
            level = 0.5 * (problem.S_T + S_hat)
            theory["front_d"] = model.flux_i.dF(level)
        return theory
    return {"front_i": rh_speed(model, problem.S_B, problem.S_T,
                                problem.p_B, problem.p_T)}


def _theory_b(problem):
    model = problem.model
    base = base_state(model, problem.S_B, problem.p_B)
    advancing = problem.S_T > problem.S_B
    bound = entropy.tau_bound(model, problem.S_B, problem.p_B)
    if problem.tau >= bound and advancing:
        S_P = plateau_saturation(model, base, problem.S_T)
        c_P = (model.flux_d.F(problem.S_T) - base.F_B) / (problem.S_T - base.S_B)
        return {"plateau": float(S_P), "front_i": c_P, "front_d": c_P}
    if problem.tau < bound:
        sol = entropy.solve_B(problem)
        speeds = sol.wave_speeds()
        # segments are stored from the base-state side, so the first speed
        # belongs to the leading wave
        key = "front_i" if advancing else "front_d"
        return {key: speeds[0]}
    return {"front_d": rh_speed(model, problem.S_B, problem.S_T,
                                problem.p_B, problem.p_T)}


def compare(problem, z, profiles, times, min_cells=20, tol=5e-3, level=None):
    """Set a pair of solver snapshots against the wave-level predictions.

    Parameters
    ----------
    problem : TWProblem
        The Riemann data the run was started from.
    z : array
        Cell centers shared by all profiles.
    profiles : sequence of arrays
        Saturation snapshots; the last one is used for plateau extraction
        and the last two for front speeds.
    times : sequence of float
        Snapshot times, strictly increasing, matching ``profiles``.

    Returns
    -------
    ComparisonReport

    The measured side uses :func:`extract_plateau` (end states excluded) and
    :func:`estimate_front_speed` at mid-levels between the end states and the
    plateau; the predicted side comes from the Riemann classification (single
    front, plateau pair, or fan) or, with pressure-dependent flux, from the
    equal-speed plateau construction / the vanishing-capillarity solution.
    """
    z = np.asarray(z, dtype=float)
    if len(profiles) != len(times) or len(profiles) < 2:
        raise ConfigError("need matching profiles and times, at least two")
    if any(np.asarray(p).shape != z.shape for p in profiles):
        raise ConfigError("profile shape does not match the grid")
    times = [float(t) for t in times]
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise ConfigError("snapshot times must be strictly increasing")

    S_B, S_T = problem.S_B, problem.S_T
    S_last = np.asarray(profiles[-1], dtype=float)
    found = extract_plateau(z, S_last, min_cells=min_cells, tol=tol,
                            exclude=(S_B, S_T))
    plateau, extent = found if found is not None else (None, None)

    advancing = S_T > S_B
    speeds = {}
    two = (profiles[-2], profiles[-1])
    t1, t2 = times[-2], times[-1]
    if plateau is not None:
        lead = level if level is not None else 0.5 * (S_B + plateau)
        trail = 0.5 * (S_T + plateau)
        lead_side = "last" if advancing else "first"
        trail_side = "first" if advancing else "last"
        speeds["front_i" if advancing else "front_d"] = estimate_front_speed(
            z, two[0], t1, two[1], t2, lead, which=lead_side)
        speeds["front_d" if advancing else "front_i"] = estimate_front_speed(
            z, two[0], t1, two[1], t2, trail, which=trail_side)
    else:
        lvl = level if level is not None else 0.5 * (S_B + S_T)
        key = "front_i" if advancing else "front_d"
        speeds[key] = estimate_front_speed(z, two[0], t1, two[1], t2, lvl,
                                           which="last" if advancing else "first")

    if problem.scenario == "A" and advancing:
        theory = _theory_advancing_a(problem)
    elif problem.scenario == "B":
        theory = _theory_b(problem)
    else:
        theory = {"front_d": rh_speed(problem.model, S_B, S_T,
                                      problem.p_B, problem.p_T)}

    measured = dict(speeds)
    if plateau is not None:
        measured["plateau"] = plateau
    deviations = {
        name: abs(measured[name] - theory[name])
        for name in measured
        if name in theory
    }
    return ComparisonReport(
        plateau_value=plateau,
        plateau_extent=extent,
        front_speeds=speeds,
        theory_values=theory,
        deviations=deviations,
    )


# ---------------------------------------------------------------------------
# CSV emission


def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % value


def write_csv(target, header, rows):
    """Write rows of numbers (or strings) as CSV with LF endings.

    ``target`` is a path or a text stream; floats are formatted with 17
    significant digits so that reading the file back reproduces the exact
    doubles.
    """
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", newline="") as fh:
            fh.write(text)


def read_csv(path):
    """Read a CSV written by :func:`write_csv`: (header, columns as floats)."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    data = np.array(
        [[float(tok) for tok in line.split(",")] for line in lines[1:]],
        dtype=float,
    )
    return header, data


def _columns(arrays):
    return list(zip(*[np.asarray(a).tolist() for a in arrays]))


# ---------------------------------------------------------------------------
# subcommands


def _open_out(out):
    if out in (None, "-"):
        return sys.stdout, False
    return open(out, "w", newline=""), True


def _emit(out, header, rows):
    stream, close = _open_out(out)
    try:
        write_csv(stream, header, rows)
    finally:
        if close:
            stream.close()


def _cmd_geometry(cfg, out):
    model = cfg.build_model()
    base = base_state(model, cfg.geometry["S_B"], cfg.geometry["p_B"])
    geo = FluxGeometry(model.flux_i, base)
    rows = [
        ("S_B", base.S_B),
        ("F_B", base.F_B),
        ("S_tilde", geo.S_tilde),
        ("S_bar", geo.S_bar),
        ("S_o", geo.S_o),
        ("S_star", geo.S_star),
        ("S_upper_star", geo.S_upper_star),
    ]
    if not model.scenario_a:
        s_i, s_d = tangent_saturations_B(model, base)
        rows += [("S_bar_i", s_i), ("S_bar_d", s_d)]
    _emit(out, ("name", "value"), rows)
    return 0


def _cmd_tw(cfg, out):
    model = cfg.build_model()
    problem = cfg.build_problem(cfg.tw["S_T"], model=model)
    orbit = integrate_orbit(problem) if model.scenario_a else scenario_b_orbit(problem)
    _emit(out, ("xi", "S", "p"), _columns((orbit.xi, orbit.S, orbit.p)))
    print(f"outcome={orbit.outcome.name} c={_fmt(orbit.c)} legs={orbit.n_legs}",
          file=sys.stderr)
    return 0


def _cmd_critical_tau(cfg, out):
    model = cfg.build_model()
    wa = WaveAnalysis(model, cfg.geometry["S_B"], cfg.geometry["p_B"])
    taus = wa.critical_taus(cfg.tw["S_T"])
    _emit(out, ("name", "value"),
          [("tau_i", taus.tau_i), ("tau_d", taus.tau_d)])
    return 0


def _cmd_bifurcation(cfg, out):
    model = cfg.build_model()
    wa = WaveAnalysis(model, cfg.geometry["S_B"], cfg.geometry["p_B"])
    grid = np.geomspace(cfg.tw["tau_min"], cfg.tw["tau_max"], cfg.tw["n_tau"])
    curves = wa.bifurcation_curves(grid)
    _emit(out, ("tau", "S_check", "S_hat"),
          _columns((curves.tau_grid, curves.S_check, curves.S_hat)))
    print(f"tau_bar={_fmt(curves.tau_bar)}", file=sys.stderr)
    return 0


def _cmd_riemann(cfg, out):
    model = cfg.build_model()
    r = cfg.riemann
    problem = cfg.build_problem(r["S_T"], model=model)
    sol = entropy.solve_A(problem) if model.scenario_a else entropy.solve_B(problem)
    speeds = sol.wave_speeds()
    span = max(abs(s) for s in speeds) if speeds else 1.0
    z_min = r["z_min"] if r["z_min"] is not None else -0.2 * span * r["t"] - 1.0
    z_max = r["z_max"] if r["z_max"] is not None else 1.5 * span * r["t"] + 1.0
    z = np.linspace(z_min, z_max, r["n"])
    S = sol.profile(z, r["t"])
    _emit(out, ("z", "S"), _columns((z, S)))
    return 0


def _run_pde(cfg, checkpoints=None):
    model = cfg.build_model()
    problem = cfg.build_problem(cfg.pde["S_T"], model=model)
    grid = cfg.build_grid()
    sc = cfg.build_solver_config(checkpoints)
    return problem, grid, pde_solver.run(problem, grid, sc)


def _cmd_pde(cfg, out):
    _, grid, result = _run_pde(cfg)
    _emit(out, ("z", "S", "p"),
          _columns((grid.centers, result.final.S, result.final.p)))
    print(f"steps={result.steps} iterations={result.total_iterations} "
          f"mass_residual={_fmt(result.mass_residual)}", file=sys.stderr)
    return 0


def _cmd_compare(cfg, out):
    t_end = cfg.pde["t_end"]
    t1 = cfg.compare["t1"] if cfg.compare["t1"] is not None else 0.5 * t_end
    t2 = cfg.compare["t2"] if cfg.compare["t2"] is not None else t_end
    if not 0.0 < t1 < t2 <= t_end:
        raise ConfigError(f"compare times must satisfy 0 < t1 < t2 <= t_end, "
                          f"got {t1}, {t2}")
    problem, grid, result = _run_pde(cfg, checkpoints=(t1, t2))
    # states line up with the sorted checkpoints the run was asked for
    profiles = [s.S for s in result.states]
    report = compare(
        problem, grid.centers, profiles, (t1, t2),
        min_cells=cfg.compare["min_cells"], tol=cfg.compare["tol"],
        level=cfg.compare["level"],
    )
    _emit(out, ("name", "measured", "theory", "deviation"), report.rows())
    return 0


_COMMANDS = {
    "geometry": _cmd_geometry,
    "tw": _cmd_tw,
    "critical-tau": _cmd_critical_tau,
    "bifurcation": _cmd_bifurcation,
    "riemann": _cmd_riemann,
    "pde": _cmd_pde,
    "compare": _cmd_compare,
}


# ---------------------------------------------------------------------------
# canned reproduce runs

_SECT51 = {
    "constitutive": {"Lambda_i": 3.5, "m_i": 0.92, "Lambda_d": 7.0, "m_d": 0.9,
                     "M": 1.0, "N_g": 1.0},
    "geometry": {"S_B": 0.1},
}

_SECT52 = {
    "constitutive": {"Lambda_i": 3.5, "m_i": 0.92, "Lambda_d": 7.0, "m_d": 0.9,
                     "M": 1.0, "N_g": 0.0, "f_i": "corey_3_2", "f_d": "corey_3_2"},
    "geometry": {"S_B": 0.3},
}


def _scenario_b_config(**over):
    cfg = {k: dict(v) for k, v in _SECT52.items()}
    for sect, vals in over.items():
        cfg.setdefault(sect, {}).update(vals)
    out = RunConfig(**cfg)
    out.geometry["p_B"] = out.build_model().pc("d", out.geometry["S_B"])
    return out


def _reproduce_orbits(outdir):
    files = []
    for tau in (0.045, 0.25, 1.0, 2.0):
        cfg = RunConfig(**{**_SECT51, "constitutive": dict(_SECT51["constitutive"], tau=tau)})
        path = f"{outdir}/orbit-tau{tau}.csv"
        _cmd_tw(cfg, path)
        files.append(path)
    return files


def _reproduce_bifurcation(outdir):
    cfg = RunConfig(**_SECT51, tw={"tau_min": 0.3, "tau_max": 3.0, "n_tau": 7})
    path = f"{outdir}/bifurcation.csv"
    _cmd_bifurcation(cfg, path)
    return [path]


def _reproduce_entropy(outdir):
    files = []
    for S_T in (0.3, 0.55, 0.8):
        cfg = RunConfig(**_SECT51, riemann={"S_T": S_T, "t": 1.0})
        path = f"{outdir}/riemann-ST{S_T}.csv"
        _cmd_riemann(cfg, path)
        files.append(path)
    return files


def _reproduce_scenario_b(outdir):
    cfg = _scenario_b_config(
        constitutive={"tau": 0.02},
        riemann={"S_T": 0.95, "t": 1.0},
    )
    path = f"{outdir}/scenarioB-shock-rarefaction.csv"
    _cmd_riemann(cfg, path)
    return [path]


def _reproduce_plateau(outdir):
    cfg = RunConfig(**_SECT51, pde={"S_T": 0.55, "t_end": 300.0})
    path = f"{outdir}/plateau-profile.csv"
    _cmd_pde(cfg, path)
    return [path]


_FIGURES = {
    "fig-orbits": _reproduce_orbits,
    "fig-bifurcation": _reproduce_bifurcation,
    "fig-entropy": _reproduce_entropy,
    "fig-scenarioB-rw": _reproduce_scenario_b,
    "fig-plateau": _reproduce_plateau,
}


# ---------------------------------------------------------------------------
# entry point


def main(argv=None):
    """CLI entry point; returns 0 on success, 2 on bad configuration or
    parameters, 3 on numerical failure."""
    parser = argparse.ArgumentParser(
        prog="hystflow",
        description="Traveling waves, Riemann solutions and finite-volume "
                    "runs for two-phase flow with play-type hysteresis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", default=None,
                       help="INI run description (defaults used when omitted)")
        p.add_argument("-o", "--out", default="-",
                       help="output CSV path ('-' for stdout)")
    rp = sub.add_parser("reproduce")
    rp.add_argument("figure", choices=sorted(_FIGURES))
    rp.add_argument("-d", "--outdir", default=".")
    args = parser.parse_args(argv)

    try:
        if args.command == "reproduce":
            for path in _FIGURES[args.figure](args.outdir):
                print(path)
            return 0
        cfg = RunConfig.load(args.config) if args.config else RunConfig.defaults()
        return _COMMANDS[args.command](cfg, args.out)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
