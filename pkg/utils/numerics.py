"""
Quadrature and root-finding kernels shared by the whole toolkit.

Both kernels delegate the heavy lifting to scipy (QUADPACK through
``scipy.integrate.quad`` and Brent's method through ``scipy.optimize.brentq``)
and add what the special functions need on top: analytic removal of
power-law endpoint singularities, NaN detection, and a bracket-safeguarded
Newton iteration when a derivative is available.
"""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import integrate as sp_integrate
from scipy import optimize as sp_optimize

from utils.errors import (
    DomainError,
    IntegrationError,
    NaNIntegrandError,
    NoBracketError,
    RootFindingError,
)

logger = logging.getLogger(__name__)

# QUADPACK subintervals allowed per unit of max_depth
_SUBINTERVALS_PER_LEVEL = 8
_ROUNDOFF_SLACK = 100.0


class QuadSpec(BaseModel):
    """Tolerances for ``integrate``.

    ``singular_ends`` flags the endpoints carrying an integrable power-law
    singularity ``|x - end|**alpha``; ``exponents`` gives alpha for each end.
    """

    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(1e-10, gt=0)
    rel_tol: float = Field(1e-10, gt=0)
    max_depth: int = Field(60, ge=1)
    singular_ends: Tuple[bool, bool] = (False, False)
    exponents: Tuple[float, float] = (-0.5, -0.5)

    @field_validator("exponents")
    @classmethod
    def _integrable(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if any(not math.isfinite(alpha) or alpha <= -1.0 for alpha in value):
            raise ValueError("endpoint exponents must be finite and > -1")
        return value

    def with_singular(self, left: bool = False, right: bool = False,
                      left_exponent: float = -0.5, right_exponent: float = -0.5) -> "QuadSpec":
        return self.model_copy(update={
            "singular_ends": (left, right),
            "exponents": (left_exponent, right_exponent),
        })


class RootSpec(BaseModel):
    """Tolerances for ``find_root_monotone``"""

    model_config = ConfigDict(frozen=True)

    tol: float = Field(1e-13, gt=0)
    max_iter: int = Field(200, ge=1)


DEFAULT_QUAD = QuadSpec()
DEFAULT_ROOT = RootSpec()


def integrate(f: Callable[[float], float], a: float, b: float,
              spec: QuadSpec = DEFAULT_QUAD) -> float:
    """Integrate ``f`` over ``[a, b]`` to ``max(abs_tol, rel_tol*|I|)``.

    Flagged endpoints are removed with ``u = (x - a)**(1 + alpha)`` (mirrored
    at the right end), which turns ``(x - a)**alpha`` into a bounded factor.
    Raises ``IntegrationError`` when QUADPACK gives up above tolerance and
    ``NaNIntegrandError`` when ``f`` returns NaN.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"integration limits must be finite, got [{a}, {b}]")
    if a > b:
        raise DomainError(f"integrate expects a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0

    left, right = spec.singular_ends
    if left and right:
        mid = 0.5 * (a + b)
        return (integrate(f, a, mid, spec.with_singular(left=True, left_exponent=spec.exponents[0]))
                + integrate(f, mid, b, spec.with_singular(right=True, right_exponent=spec.exponents[1])))

    guarded = _nan_guard(f)
    if left:
        g, lo, hi = _left_substitution(guarded, a, b, spec.exponents[0])
    elif right:
        g, lo, hi = _right_substitution(guarded, a, b, spec.exponents[1])
    else:
        g, lo, hi = guarded, a, b

    return _quad(g, lo, hi, spec)


def _quad(g: Callable[[float], float], lo: float, hi: float, spec: QuadSpec) -> float:
    out = sp_integrate.quad(
        g, lo, hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=_SUBINTERVALS_PER_LEVEL * spec.max_depth,
        full_output=1,
    )
    value, err = float(out[0]), float(out[1])
    target = max(spec.abs_tol, spec.rel_tol * abs(value))
    if len(out) > 3:
        # QUADPACK flags roundoff even when the achieved error is tiny
        if err > _ROUNDOFF_SLACK * target or not math.isfinite(value):
            raise IntegrationError(f"quadrature on [{lo}, {hi}] did not converge: {out[3]}", value, err)
        logger.debug(f"Accepted quadrature on [{lo}, {hi}] with warning: {out[3]}")
    return value


def _nan_guard(f: Callable[[float], float]) -> Callable[[float], float]:
    def guarded(x: float) -> float:
        value = float(f(x))
        if math.isnan(value):
            raise NaNIntegrandError(x)
        return value
    return guarded


def _left_substitution(f, a: float, b: float, alpha: float):
    beta = 1.0 / (1.0 + alpha)

    def g(u: float) -> float:
        x = a + u ** beta
        if x == a:
            return 0.0
        return f(x) * beta * u ** (beta - 1.0)

    return g, 0.0, (b - a) ** (1.0 + alpha)


def _right_substitution(f, a: float, b: float, alpha: float):
    beta = 1.0 / (1.0 + alpha)

    def g(u: float) -> float:
        x = b - u ** beta
        if x == b:
            return 0.0
        return f(x) * beta * u ** (beta - 1.0)

    return g, 0.0, (b - a) ** (1.0 + alpha)


def find_root_monotone(f: Callable[[float], float], lo: float, hi: float,
                       spec: RootSpec = DEFAULT_ROOT,
                       fprime: Optional[Callable[[float], float]] = None,
                       x0: Optional[float] = None,
                       bracket_values: Optional[Tuple[float, float]] = None) -> float:
    """Root of a continuous strictly monotone ``f`` bracketed by ``[lo, hi]``.

    Without ``fprime`` this is Brent's method. With ``fprime`` it is a
    Newton iteration that falls back to bisection whenever the Newton step
    leaves the bracket, converges too slowly, or the derivative is not a
    usable finite number. ``bracket_values`` passes known ``(f(lo), f(hi))``.
    """
    if lo > hi:
        lo, hi = hi, lo
        if bracket_values is not None:
            bracket_values = (bracket_values[1], bracket_values[0])
    if bracket_values is None:
        f_lo, f_hi = float(f(lo)), float(f(hi))
    else:
        f_lo, f_hi = (float(v) for v in bracket_values)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise NoBracketError(f"no bracket: f({lo})={f_lo} and f({hi})={f_hi} share a sign")

    if fprime is None:
        root, info = sp_optimize.brentq(
            f, lo, hi, xtol=spec.tol, maxiter=spec.max_iter, full_output=True, disp=False
        )
        if not info.converged:
            raise RootFindingError(f"brentq stopped after {info.iterations} iterations", (lo, hi))
        return float(root)

    return _safe_newton(f, fprime, lo, hi, f_lo, spec, x0)


def _safe_newton(f, fprime, lo: float, hi: float, f_lo: float, spec: RootSpec,
                 x0: Optional[float]) -> float:
    # orient so that f(x_neg) < 0 < f(x_pos)
    x_neg, x_pos = (lo, hi) if f_lo < 0.0 else (hi, lo)
    x = 0.5 * (lo + hi) if x0 is None or not (lo < x0 < hi) else float(x0)
    dx_old = dx = abs(hi - lo)
    fx, dfx = float(f(x)), float(fprime(x))

    for _ in range(spec.max_iter):
        newton_ok = math.isfinite(dfx) and dfx != 0.0
        if newton_ok:
            step_out = ((x - x_pos) * dfx - fx) * ((x - x_neg) * dfx - fx) > 0.0
            too_slow = abs(2.0 * fx) > abs(dx_old * dfx)
            newton_ok = not (step_out or too_slow)
        dx_old = dx
        if newton_ok:
            dx = fx / dfx
            x -= dx
        else:
            dx = 0.5 * (x_pos - x_neg)
            x = x_neg + dx
        if abs(dx) < spec.tol or abs(x_pos - x_neg) < spec.tol:
            return x
        fx, dfx = float(f(x)), float(fprime(x))
        if fx == 0.0:
            return x
        if fx < 0.0:
            x_neg = x
        else:
            x_pos = x

    raise RootFindingError(f"safeguarded Newton exceeded {spec.max_iter} iterations",
                           (min(x_neg, x_pos), max(x_neg, x_pos)))


def simpson_with_error(values: np.ndarray, s: np.ndarray) -> Tuple[float, float]:
    """Composite Simpson on uniform nodes plus a Richardson error estimate."""
    total = float(sp_integrate.simpson(values, x=s))
    if len(s) < 5:
        return total, 0.0
    # the halved grid needs an even number of intervals
    stop = len(s) if (len(s) - 1) % 2 == 0 else len(s) - 1
    fine = float(sp_integrate.simpson(values[:stop], x=s[:stop]))
    coarse = float(sp_integrate.simpson(values[:stop:2], x=s[:stop:2]))
    return total, abs(fine - coarse) / 15.0
