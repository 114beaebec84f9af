"""Line searches along retraction curves ``phi(a) = f(R_x(a d))``."""
import numpy as np

from ..errors import LineSearchFailed

# near a minimizer the achievable decrease drops below the resolution of phi0
ROUNDING_SLACK = 8 * np.finfo(float).eps
# zoom gives up once the bracket is this small relative to the first trial step
MIN_BRACKET = 1e-10


def armijo(phi, phi0, dphi0, alpha0, c1=1e-4, shrink=0.5, max_trials=50):
    """Backtracking until ``phi(a) <= phi0 + c1 a dphi0``; returns ``(a, phi(a), trials)``.

    Both searches allow a few ulps of ``phi0`` as slack in the decrease test.
    """
    if not dphi0 < 0:
        raise LineSearchFailed(f"not a descent direction (slope {dphi0:.3e})")
    slack = ROUNDING_SLACK * abs(phi0)
    a = alpha0
    for trial in range(1, max_trials + 1):
        val = phi(a)
        if np.isfinite(val) and val <= phi0 + c1 * a * dphi0 + slack:
            return a, val, trial
        a *= shrink
    raise LineSearchFailed(f"Armijo condition not met after {max_trials} trials")


def _interpolate(a_lo, a_hi, f_lo, f_hi, g_lo, g_hi):
    """Minimizer of the cubic through both endpoints, safeguarded into the bracket."""
    d1 = g_lo + g_hi - 3.0 * (f_lo - f_hi) / (a_lo - a_hi)
    rad = d1 * d1 - g_lo * g_hi
    lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
    if rad >= 0 and np.isfinite(rad):
        d2 = np.sign(a_hi - a_lo) * np.sqrt(rad)
        a = a_hi - (a_hi - a_lo) * (g_hi + d2 - d1) / (g_hi - g_lo + 2.0 * d2)
        if np.isfinite(a) and lo + 0.1 * (hi - lo) <= a <= hi - 0.1 * (hi - lo):
            return a
    return 0.5 * (lo + hi)


def strong_wolfe(phi_dphi, phi0, dphi0, alpha0=1.0, c1=1e-4, c2=0.9, max_evals=25, grow=2.0):
    """Bracketing line search for the strong Wolfe conditions.

    ``phi_dphi(a)`` returns ``(phi(a), phi'(a), payload)``; the payload of
    the accepted trial is returned so the caller can reuse the point and
    gradient it computed. Returns ``(a, phi(a), payload, evals)``.
    """
    if not dphi0 < 0:
        raise LineSearchFailed(f"not a descent direction (slope {dphi0:.3e})")
    slack = ROUNDING_SLACK * abs(phi0)
    evals = 0
    a_prev, f_prev, g_prev = 0.0, phi0, dphi0
    a = alpha0
    lo = hi = None
    while evals < max_evals:
        f, g, payload = phi_dphi(a)
        evals += 1
        if not np.isfinite(f):
            hi = (a, np.inf, np.nan)
            lo = (a_prev, f_prev, g_prev)
            break
        if f > phi0 + c1 * a * dphi0 + slack or (evals > 1 and f >= f_prev):
            lo, hi = (a_prev, f_prev, g_prev), (a, f, g)
            break
        if abs(g) <= -c2 * dphi0:
            return a, f, payload, evals
        if g >= 0:
            lo, hi = (a, f, g), (a_prev, f_prev, g_prev)
            break
        a_prev, f_prev, g_prev = a, f, g
        a = grow * a
    else:
        raise LineSearchFailed(f"no bracket after {max_evals} evaluations")

    best = None
    while evals < max_evals:
        a_lo, f_lo, g_lo = lo
        a_hi, f_hi, g_hi = hi
        if abs(a_hi - a_lo) <= MIN_BRACKET * alpha0:
            break
        if np.isfinite(f_hi) and np.isfinite(g_hi):
            a = _interpolate(a_lo, a_hi, f_lo, f_hi, g_lo, g_hi)
        else:
            a = 0.5 * (a_lo + a_hi)
        f, g, payload = phi_dphi(a)
        evals += 1
        if not np.isfinite(f) or f > phi0 + c1 * a * dphi0 + slack or f > f_lo + slack:
            hi = (a, f, g)
            continue
        if abs(g) <= -c2 * dphi0:
            return a, f, payload, evals
        best = (a, f, payload)
        if g * (a_hi - a_lo) >= 0:
            hi = lo
        lo = (a, f, g)
    if best is not None:
        # sufficient decrease holds; accept rather than fail on curvature alone
        return best[0], best[1], best[2], evals
    raise LineSearchFailed(f"strong Wolfe conditions not met after {max_evals} evaluations")
