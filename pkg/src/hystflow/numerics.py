"""Small numerical utilities: bracketed bisection, sign scans, quadrature.

All root-finding in this package goes through :func:`bisect_root` because the
flux functions are only piecewise-smooth across hysteresis branches; plain
bisection is insensitive to that, while derivative-based methods are not.
"""

import numpy as np
from scipy.integrate import quad

from .errors import NumericalError

#: default root tolerance in the saturation variable
ROOT_TOL = 1e-10
#: default adaptive-quadrature tolerance
QUAD_TOL = 1e-11


def bisect_root(fn, lo, hi, tol=ROOT_TOL, max_iter=200):
    """Find a root of ``fn`` in [lo, hi] by bisection.

    The endpoints must bracket a sign change.  Returns the midpoint of the
    final bracket; converges to ``tol`` in the argument.
    """
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NumericalError(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0 or hi - lo < tol:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_predicate(pred, lo, hi, rel_tol=1e-6, max_iter=200):
    """Bisect a monotone boolean predicate: False on ``lo`` side, True on ``hi``.

    Returns the threshold argument where the predicate flips.  Both endpoint
    values are trusted as given (they are not re-evaluated).
    """
    for _ in range(max_iter):
        if hi - lo <= rel_tol * max(abs(hi), abs(lo), 1e-30):
            break
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def scan_sign_change(fn, lo, hi, n=2000, first_only=True, direction=None):
    """Scan [lo, hi] on an ``n``-point grid and return sign-change brackets.

    ``direction`` restricts to '+-' (positive to nonpositive) or '-+'
    crossings.  Returns a list of (a, b) brackets, or just the first one when
    ``first_only``; empty list / None when no crossing is found.
    """
    grid = np.linspace(lo, hi, n)
    vals = np.asarray([fn(g) for g in grid], dtype=float)
    s = np.sign(vals)
    brackets = []
    for k in range(n - 1):
        if s[k] == 0.0:
            brackets.append((grid[k], grid[k]))
        elif s[k] != s[k + 1]:
            if direction == "+-" and not (s[k] > 0 > s[k + 1] or s[k + 1] == 0):
                continue
            if direction == "-+" and not (s[k] < 0 < s[k + 1] or s[k + 1] == 0):
                continue
            brackets.append((grid[k], grid[k + 1]))
        else:
            continue
        if first_only:
            return brackets[0]
    if first_only:
        return None
    return brackets


def integrate(fn, lo, hi, tol=QUAD_TOL):
    """Adaptive quadrature of ``fn`` on [lo, hi]; returns the value only."""
    if lo == hi:
        return 0.0
    val, _ = quad(fn, lo, hi, epsabs=tol, epsrel=tol, limit=200)
    return val


def central_diff(fn, x, h=None):
    """Central finite difference with the documented default step."""
    if h is None:
        h = 1e-6 * max(1.0, abs(x))
    return (fn(x + h) - fn(x - h)) / (2.0 * h)
