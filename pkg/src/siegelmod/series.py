"""Coefficient sequences, the gamma/Sigma matrix identity and completed L-functions.

Completed L-functions are evaluated by splitting the Mellin integral of
``f(t) = a0 + sum a(n) exp(-lam n t)`` at ``t0``, using the relation
``f(1/t) = C t^k g(t)`` with the dual series ``g``:

    Lambda(s) = sum a(n) (lam n)^-s Gamma(s, lam n t0)
              + C sum b(n) (lam n)^-(k-s) Gamma(k-s, lam n / t0)
              - a0 t0^s / s - C b0 t0^(s-k) / (k-s),

where ``lam = 2 pi / (r sqrt(N))`` and ``k = m/2``.  The value is
independent of ``t0`` exactly when the functional equation holds for the
supplied data, which is what the checks below measure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .characters import (
    DirichletCharacter,
    KroneckerCharacter,
    epsilon_d,
    gauss_sum,
    jacobi,
    legendre_character,
)
from .errors import (
    IllConditioned,
    MissingConstants,
    MissingMeasure,
    ModulusDividesLevel,
    ParityViolation,
    PoleProximity,
    SingularGamma,
    VariantMismatch,
)
from .localdensity import MeasureTable
from .quadform import FormProfile, QuadraticForm, validate
from .special import upper_incomplete_gamma

POLE_MARGIN = 1e-6


def _lookup(measures, n: int) -> float:
    """Measure at the signed index ``n`` from one table or a ``{sign: table}`` map."""
    sign = 1 if n > 0 else -1
    if isinstance(measures, MeasureTable):
        tables = {measures.sign: measures}
    else:
        tables = dict(measures)
    table = tables.get(sign)
    if table is None or abs(n) not in table.entries:
        raise MissingMeasure(f"no measure for n={n}")
    return table[abs(n)]


def coeff_a(form: QuadraticForm, measures, n: int, kind: str = "maass", profile: FormProfile | None = None) -> complex:
    """``a(n)`` built from the (relative) measure of ``P(v) = n``.

    ``kind="maass"``: ``|D|^-1/2 e^(pi i (2p-m)/4) |n|^(1-m/2) M(P;n)``;
    ``kind="holomorphic"``: ``|D|^-1/2 M(P;n)``.
    """
    profile = profile or validate(form)
    M = _lookup(measures, n)
    D, m, p = abs(profile.D), form.m, profile.p
    if kind == "holomorphic":
        return complex(M / math.sqrt(D))
    return M / math.sqrt(D) * cmath.exp(1j * math.pi * (2 * p - m) / 4) * abs(n) ** (1 - m / 2)


def coeff_b(form: QuadraticForm, dual_measures, n: int, kind: str = "maass", profile: FormProfile | None = None) -> complex:
    """``b(n)`` built from the measure of ``Phat(v*) = n`` on the dual form.

    ``kind="maass"``: ``(|n|/N)^(1-m/2) M*(Phat;n)``;
    ``kind="holomorphic"``: ``e^(pi i (m-2p)/4) N^(m/4) M*(Phat;n)``.
    """
    profile = profile or validate(form)
    M = _lookup(dual_measures, n)
    m, p, N = form.m, profile.p, profile.N
    if kind == "holomorphic":
        return cmath.exp(1j * math.pi * (m - 2 * p) / 4) * N ** (m / 4) * M
    return complex((abs(n) / N) ** (1 - m / 2) * M)


def growth_witness(entries: np.ndarray) -> tuple[float, float]:
    """``(C, K)`` with ``|e(n)| <= C n^K`` on the given range."""
    mags = np.abs(np.asarray(entries))
    n = np.arange(1, len(mags) + 1)
    nz = mags > 0
    if not nz.any():
        return 0.0, 0.0
    ref = mags[nz][0]
    with np.errstate(divide="ignore"):
        slopes = np.log(mags[nz][1:] / ref) / np.log(n[nz][1:])
    K = max(0.0, float(np.max(slopes, initial=0.0)))
    C = float(np.max(mags / n**K))
    return C, K


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """Holomorphic-type data ``a(n), b(n)`` (n >= 1) with constant terms.

    ``root`` is ``C`` in ``f(1/t) = C t^k g(t)``: ``i^(m/2)`` untwisted, and the
    product of ``i^(m/2)`` with the twist constant otherwise.  ``twist`` is the
    modulus ``r`` of a twist (1 when untwisted).
    """

    a: np.ndarray
    b: np.ndarray
    m: int
    N: int
    a0: complex | None = None
    b0: complex | None = None
    root: complex | None = None
    twist: int = 1
    normalization: str = "relative"

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=complex))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=complex))
        if self.root is None:
            object.__setattr__(self, "root", 1j ** (self.m / 2) if self.m % 2 == 0 else cmath.exp(1j * math.pi * self.m / 4))

    @property
    def k(self) -> float:
        return self.m / 2

    @property
    def n_max(self) -> int:
        return min(len(self.a), len(self.b))

    @property
    def lam(self) -> float:
        return 2 * math.pi / (self.twist * math.sqrt(self.N))

    def growth(self) -> tuple[float, float]:
        ca, ka = growth_witness(self.a)
        cb, kb = growth_witness(self.b)
        return max(ca, cb), max(ka, kb)

    def with_constants(self, a0: complex, b0: complex) -> "CoefficientSeries":
        return replace(self, a0=complex(a0), b0=complex(b0))

    def scaled_dual(self, beta: complex) -> "CoefficientSeries":
        return replace(self, b=self.b * beta)

    def perturbed(self, n: int, factor: float = 1.1, side: str = "a") -> "CoefficientSeries":
        arr = (self.a if side == "a" else self.b).copy()
        arr[n - 1] *= factor
        return replace(self, **{side: arr})

    def swapped(self) -> "CoefficientSeries":
        """The dual series: ``g`` in place of ``f``, so ``g(1/t) = C^-1 t^k f(t)``."""
        return replace(self, a=self.b, b=self.a, a0=self.b0, b0=self.a0, root=1 / self.root)


def holomorphic_series(
    form: QuadraticForm, measures: MeasureTable, dual_measures: MeasureTable, n_max: int | None = None
) -> CoefficientSeries:
    """``a(n) = |D|^-1/2 M(P;n)`` and ``b(n) = e^(pi i (m-2p)/4) N^(m/4) M*(Phat;n)``."""
    profile = validate(form)
    if (form.m - profile.p) % 2:
        raise ParityViolation("the number of negative eigenvalues must be even; use -P")
    n_max = n_max or min(len(measures), len(dual_measures))
    a = [coeff_a(form, measures, n, "holomorphic", profile) for n in range(1, n_max + 1)]
    b = [coeff_b(form, dual_measures, n, "holomorphic", profile) for n in range(1, n_max + 1)]
    return CoefficientSeries(np.array(a), np.array(b), form.m, profile.N)


def gamma_matrix(s: complex) -> np.ndarray:
    e = cmath.exp(1j * math.pi * s / 2)
    return np.array([[e, 1 / e], [1 / e, e]])


def sigma_matrix(ell: int) -> np.ndarray:
    return np.array([[0, 1j**ell], [1, 0]], dtype=complex)


def modified_fe_identity_defect(s: complex, m: int, p: int) -> float:
    """Frobenius norm of the difference between the trigonometric matrix and
    ``gamma(s)^-1 Sigma(2p-m) gamma(2 - m/2 - s)``."""
    sin = lambda x: cmath.sin(math.pi * x)  # noqa: E731
    if abs(sin(s)) < 1e-8:
        raise SingularGamma(f"sin(pi s) vanishes at s={s}")
    lhs = cmath.exp(1j * math.pi * (2 * p - m) / 4) / sin(s) * np.array(
        [[sin(s + p / 2 - 1), sin((m - p) / 2)], [sin(p / 2), sin(s + (m - p) / 2 - 1)]]
    )
    rhs = np.linalg.solve(gamma_matrix(s), sigma_matrix(2 * p - m) @ gamma_matrix(2 - m / 2 - s))
    return float(np.linalg.norm(lhs - rhs))


def _check_poles(s: complex, k: float) -> None:
    if abs(s) < POLE_MARGIN or abs(s - k) < POLE_MARGIN:
        raise PoleProximity(f"s={s} is within {POLE_MARGIN} of a pole (0 or {k})")


def _half_sum(coeffs: np.ndarray, lam: float, s: complex, x_scale: float) -> complex:
    total = 0j
    for n, c in enumerate(coeffs, start=1):
        if c == 0:
            continue
        x = lam * n * x_scale
        total += c * (lam * n) ** (-s) * upper_incomplete_gamma(s, x)
    return total


def lambda_parts(series: CoefficientSeries, s: complex, t0: float) -> dict[str, complex]:
    """Individual pieces of the smoothed sum; every piece is linear in one datum."""
    k, lam = series.k, series.lam
    return {
        "a": _half_sum(series.a, lam, s, t0),
        "b": series.root * _half_sum(series.b, lam, k - s, 1 / t0),
        "a0": -(t0**s) / s,
        "b0": -series.root * t0 ** (s - k) / (k - s),
    }


def lambda_completed(series: CoefficientSeries, s: complex, t0: float = 1.0, with_tail: bool = False):
    """Smoothed completed L-function; optionally also a truncation-tail estimate."""
    s = complex(s)
    _check_poles(s, series.k)
    if series.a0 is None or series.b0 is None:
        raise MissingConstants("constant terms a0, b0 must be known or fitted first")
    parts = lambda_parts(series, s, t0)
    value = parts["a"] + parts["b"] + series.a0 * parts["a0"] + series.b0 * parts["b0"]
    if not with_tail:
        return value
    return value, _tail_estimate(series, s, t0)


def _tail_estimate(series: CoefficientSeries, s: complex, t0: float) -> float:
    C, K = series.growth()
    n = series.n_max + 1
    lam, k = series.lam, series.k
    est = 0.0
    for sc, ss in ((t0, s), (1 / t0, k - s)):
        x = lam * n * sc
        term = C * n**K * abs((lam * n) ** (-ss) * upper_incomplete_gamma(ss, x))
        est += term / max(1e-300, 1 - math.exp(-lam * sc))
    return est


def t0_invariance_defect(series: CoefficientSeries, s: complex, t0s=(1.0, 1.5)) -> float:
    vals = [lambda_completed(series, s, t) for t in t0s]
    return max(abs(v - vals[0]) for v in vals) / abs(vals[0])


def fe_defect(series: CoefficientSeries, s: complex, t0: float = 1.0) -> float:
    """``|Lambda(s) - C Lambda~(k - s)| / |Lambda(s)|`` with ``Lambda~`` built from
    the swapped data; the two sides are evaluated at unrelated split points."""
    lhs = lambda_completed(series, s, t0)
    rhs = series.root * lambda_completed(series.swapped(), series.k - s, 1.0 / (t0 * 1.3))
    return abs(lhs - rhs) / abs(lhs)


@dataclass(frozen=True)
class FEFit:
    beta: complex
    a0: complex
    b0: complex
    residual: float
    condition: float


def fit_fe_constants(series: CoefficientSeries, points, t0s=(0.8, 1.0, 1.25)) -> FEFit:
    """Fit the dual scale ``beta`` and the constants ``a0, b0`` by least squares.

    The unknowns enter linearly; equations demand that the smoothed value is the
    same for every split point in ``t0s`` at every ``s`` in ``points``.
    """
    rows, rhs = [], []
    for s in points:
        s = complex(s)
        _check_poles(s, series.k)
        parts = [lambda_parts(series, s, t) for t in t0s]
        for p1, p2 in zip(parts, parts[1:]):
            rows.append([p1["b"] - p2["b"], p1["a0"] - p2["a0"], p1["b0"] - p2["b0"]])
            rhs.append(-(p1["a"] - p2["a"]))
    A = np.array(rows)
    y = np.array(rhs)
    if A.shape[0] < 3 * A.shape[1]:
        raise IllConditioned("need at least three equations per unknown")
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > 1e12:
        raise IllConditioned(f"condition number {cond:.3g}")
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.linalg.norm(A @ sol - y) / np.linalg.norm(y))
    return FEFit(complex(sol[0]), complex(sol[1]), complex(sol[2]), residual, cond)


VARIANTS = ("even", "odd", "odd-quadratic")


def _variant_for(m: int, psi: DirichletCharacter) -> str:
    if m % 2 == 0:
        return "even"
    return "odd-quadratic" if psi.index == legendre_character(psi.modulus).index else "odd"


def twist_constants(form: QuadraticForm, psi: DirichletCharacter, variant: str | None = None) -> complex:
    """Constant of the twisted functional equation (without the factor ``i^(m/2)``).

    ``even``: ``chi_K(r) psi(-N) tau_psi / tau_psibar``;
    ``odd``: ``(-1/m)^((m-1)/2) chi_K(r) (N/r) psi(-N) eps_r^-1 tau_{psi phi} / tau_psibar``;
    ``odd-quadratic``: ``(-1/m)^((m-1)/2) chi_K(r)``, with ``phi = (./r)``.
    """
    profile = validate(form)
    m, N, r = form.m, profile.N, psi.modulus
    if N % r == 0:
        raise ModulusDividesLevel(f"r={r} divides N={N}")
    if psi.principal:
        raise VariantMismatch("twisting needs a primitive (non-principal) character")
    expected = _variant_for(m, psi)
    variant = variant or expected
    if variant not in VARIANTS:
        raise VariantMismatch(f"unknown variant {variant!r}")
    if variant != expected:
        raise VariantMismatch(f"variant {variant!r} does not fit m={m} and this character; expected {expected!r}")
    chi = KroneckerCharacter(profile.K_disc)(r)
    if variant == "even":
        return chi * psi(-N) * gauss_sum(psi) / gauss_sum(psi.conj())
    sign = jacobi(-1, m) ** ((m - 1) // 2)
    if variant == "odd-quadratic":
        return complex(sign * chi)
    phi = legendre_character(r)
    return (
        sign * chi * jacobi(N % r, r) * psi(-N) / epsilon_d(r)
        * gauss_sum(psi * phi) / gauss_sum(psi.conj())
    )


def twisted_series(
    series: CoefficientSeries,
    form: QuadraticForm,
    psi: DirichletCharacter,
    variant: str | None = None,
    literal_quadratic: bool = False,
) -> CoefficientSeries:
    """Data of ``Lambda_N(s; M, psi)`` and its dual side, constant included in ``root``.

    For the quadratic twist of odd ``m`` the dual series is
    ``r sum b(rn)(rn)^-s - sum b(n) n^-s``, whose constant term is ``(r - 1) b0``.
    Here the twist constant is divided by ``sqrt(r)``: the twisted side is
    normalized by ``tau_phi = eps_r sqrt(r)`` while the dual side carries the
    unnormalized principal Gauss sum.  With that factor the pole coefficient is
    ``C (sqrt(r) - 1/sqrt(r)) b0``.  ``literal_quadratic=True`` instead uses the
    undivided constant and the dual constant term ``i^(-m/2) (sqrt(r) - 1/sqrt(r)) b0``.
    """
    r = psi.modulus
    variant = variant or _variant_for(form.m, psi)
    C = twist_constants(form, psi, variant)
    n = np.arange(1, series.n_max + 1)
    a = series.a[: len(n)] * psi.values[n % r]
    b = series.b[: len(n)]
    b0 = 0j
    i_k = 1j**series.k if form.m % 2 == 0 else cmath.exp(1j * math.pi * form.m / 4)
    if variant == "even":
        b = b * psi.conj().values[n % r]
    elif variant == "odd":
        b = b * (psi.conj() * legendre_character(r)).values[n % r]
    else:
        b = b * np.where(n % r == 0, r - 1, -1)
        if series.b0 is None:
            raise MissingConstants("the quadratic twist needs b0")
        if literal_quadratic:
            b0 = (math.sqrt(r) - 1 / math.sqrt(r)) * series.b0 / i_k
        else:
            b0 = (r - 1) * series.b0
            C = C / math.sqrt(r)
    return CoefficientSeries(a, b, series.m, series.N, a0=0j, b0=b0, root=i_k * C, twist=r)


def twisted_lambda(
    series: CoefficientSeries,
    form: QuadraticForm,
    psi: DirichletCharacter,
    s: complex,
    t0: float = 1.0,
    literal_quadratic: bool = False,
) -> tuple[complex, float]:
    """``Lambda_N(s; M, psi)`` and its functional-equation defect."""
    tw = twisted_series(series, form, psi, literal_quadratic=literal_quadratic)
    return lambda_completed(tw, s, t0), fe_defect(tw, s, t0)


def series_from_mapping(a: Mapping[int, complex], b: Mapping[int, complex], m: int, N: int, **kw) -> CoefficientSeries:
    n_max = max(max(a, default=0), max(b, default=0))
    return CoefficientSeries(
        np.array([a.get(n, 0) for n in range(1, n_max + 1)]),
        np.array([b.get(n, 0) for n in range(1, n_max + 1)]),
        m,
        N,
        **kw,
    )
