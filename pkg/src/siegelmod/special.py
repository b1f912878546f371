"""Whittaker W, upper incomplete gamma and log-gamma in double precision.

``W_{kappa,mu}(y)`` is computed from the integral representation

    W(y) = y^(mu+1/2) e^(-y/2) / Gamma(a) * int_R exp(a x - y e^x) (1 + e^x)^(mu+kappa-1/2) dx,

``a = 1/2 + mu - kappa > 0``, obtained from the usual Laplace-type integral
by ``t = e^x``.  The integrand is positive, analytic in the strip
``|Im x| < pi/2`` and decays exponentially on the left and doubly
exponentially on the right, so the trapezoid rule converges geometrically in
``1/h``.  Halving the step gives a built-in error estimate; when it is not
met, or ``a <= 0``, evaluation falls back to mpmath at extended precision.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import loggamma

from .errors import DomainError, PoleError, PrecisionLoss


@dataclass(frozen=True)
class PrecisionPolicy:
    target: float = 1e-10
    step: float = 0.1
    left_decay: float = 40.0  # integrate until exp(a x) < e^-left_decay
    right_cutoff: float = 45.0  # and until y e^x exceeds this
    fallback_digits: int = 30
    allow_fallback: bool = True

    def __post_init__(self):
        if not self.target > np.finfo(float).eps:
            raise ValueError("target must exceed machine epsilon")


DEFAULT_POLICY = PrecisionPolicy()


def _whittaker_quadrature(kappa: float, mu: float, y: float, policy: PrecisionPolicy):
    a = 0.5 + mu - kappa
    c = mu + kappa - 0.5
    lo = -policy.left_decay / a
    hi = math.log((policy.right_cutoff + abs(c) * 4 + 10) / y)
    # the integrand peaks near x = log(a / y); make sure the grid brackets it
    hi = max(hi, math.log(max(a, 1e-300) / y) + 5)
    x = np.arange(lo, hi + policy.step, policy.step)
    log_f = a * x - y * np.exp(x) + c * np.logaddexp(0.0, x)
    top = log_f.max()
    w = np.exp(log_f - top)
    fine = w.sum() * policy.step
    coarse = w[::2].sum() * 2 * policy.step
    err = abs(fine - coarse) / fine
    log_w = (mu + 0.5) * math.log(y) - y / 2 - float(loggamma(a).real) + top + math.log(fine)
    return log_w, err


def whittaker_w(kappa: float, mu: float, y: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Whittaker function ``W_{kappa,mu}(y)`` for real parameters and ``y > 0``."""
    if not y > 0:
        raise DomainError(f"Whittaker W needs y > 0, got {y}")
    a = 0.5 + mu - kappa
    if a > 0:
        log_w, err = _whittaker_quadrature(kappa, mu, y, policy)
        # the coarse grid has roughly the square root of the fine grid's error
        if err < math.sqrt(policy.target):
            return math.exp(log_w)
    if not policy.allow_fallback:
        raise PrecisionLoss(f"W_{{{kappa},{mu}}}({y}) not resolved by quadrature")
    try:
        with mpmath.workdps(policy.fallback_digits):
            value = mpmath.whitw(kappa, mu, y)
    except (ValueError, ZeroDivisionError) as exc:
        raise PrecisionLoss(f"W_{{{kappa},{mu}}}({y}): {exc}") from exc
    out = float(mpmath.re(value))
    if not math.isfinite(out):
        raise PrecisionLoss(f"W_{{{kappa},{mu}}}({y}) is not finite")
    return out


def whittaker_w_many(kappa: float, mu: float, ys, policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    return np.array([whittaker_w(kappa, mu, float(y), policy) for y in np.atleast_1d(ys)])


def _is_pole(s: complex) -> bool:
    return s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real)


def log_gamma(s: complex) -> complex:
    """Principal branch of ``log Gamma(s)``."""
    s = complex(s)
    if _is_pole(s):
        raise PoleError(f"Gamma has a pole at {s}")
    return complex(loggamma(s))


def gamma(s: complex) -> complex:
    return cmath.exp(log_gamma(s))


def upper_incomplete_gamma(s: complex, x: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> complex:
    """``Gamma(s, x) = int_x^oo t^(s-1) e^-t dt`` for complex ``s`` and ``x > 0``."""
    if not x > 0:
        raise DomainError(f"incomplete gamma needs x > 0, got {x}")
    with mpmath.workdps(policy.fallback_digits):
        value = complex(mpmath.gammainc(mpmath.mpc(s), a=mpmath.mpf(x)))
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise PrecisionLoss(f"Gamma({s}, {x}) is not finite in double precision")
    return value
