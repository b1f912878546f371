"""Fourier expansions of the Maass and holomorphic forms attached to a quadratic
form, their evaluation on the upper half-plane, and numerical checks of
modularity, the Fricke relation and the Laplace eigenvalue equation.

Measures of representation are only known up to one global constant, and the
constant terms contain volumes that are not computed here.  Both therefore
enter as unknowns: constants are fitted by linear least squares on the
modularity (or Fricke) equations, which are affine in them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .characters import KroneckerCharacter, theta_multiplier
from .errors import (
    BelowYMin,
    IllConditioned,
    MissingMeasure,
    NotInGamma04,
    ParityViolation,
    UnresolvedConstants,
    ValidationError,
)
from .quadform import FormProfile, QuadraticForm, validate
from .series import _lookup
from .special import gamma as gamma_fn
from .special import whittaker_w

DEFAULT_Y_MIN = 0.3
KNOWN, FITTED, UNKNOWN = "known", "fitted", "unknown"


@dataclass(frozen=True)
class Constant:
    value: complex | None = None
    state: str = UNKNOWN

    @classmethod
    def known(cls, value: complex) -> "Constant":
        return cls(complex(value), KNOWN)

    @classmethod
    def fitted(cls, value: complex) -> "Constant":
        return cls(complex(value), FITTED)

    @property
    def resolved(self) -> bool:
        return self.state != UNKNOWN and self.value is not None


@dataclass(frozen=True)
class GammaElement:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValidationError(f"det of {self.matrix} is not 1")

    @property
    def matrix(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return (self.a, self.b), (self.c, self.d)

    def in_gamma0(self, N: int) -> bool:
        return self.c % N == 0

    def act(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def inverse(self) -> "GammaElement":
        return GammaElement(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "GammaElement") -> "GammaElement":
        return GammaElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __repr__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


@dataclass(frozen=True, eq=False)
class FourierExpansion:
    """Truncated expansion of a Maass form or holomorphic modular form.

    Maass kind::

        F(z) = g y^(lambda - l/4) + h y^(1 - lambda - l/4)
             + scale * sum_{n != 0} w(n) c(n) y^(-l/4) W_{sgn(n) l/4, m/4 - 1/2}(4 pi |n| y) e(nx)

    with ``w(n) = 1`` for ``n > 0`` and ``neg_scale`` for ``n < 0``.
    Holomorphic kind: ``F(z) = g + scale * sum_{n >= 1} c(n) e(nz)``.
    """

    kind: str
    ell: int
    m: int
    N: int
    character: KroneckerCharacter
    pos: np.ndarray
    neg: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    const_growth: Constant = Constant()
    const_decay: Constant = Constant()
    scale: complex = 1.0
    neg_scale: complex = 1.0
    y_min: float = DEFAULT_Y_MIN

    def __post_init__(self):
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=complex))
        object.__setattr__(self, "neg", np.asarray(self.neg, dtype=complex))
        if self.kind not in ("maass", "holomorphic"):
            raise ValidationError(f"unknown kind {self.kind!r}")
        if self.kind == "holomorphic" and len(self.neg):
            raise ValidationError("holomorphic expansions have no negative-index coefficients")
        if self.ell % 2 and self.N % 4:
            raise ValidationError("odd weight numerator needs 4 | N")

    @property
    def weight_half(self) -> float:
        return self.ell / 2

    @property
    def lambda_param(self) -> float:
        return self.m / 4

    @property
    def eigenvalue(self) -> float | None:
        if self.kind != "maass":
            return None
        return (self.m - self.ell) * (4 - self.m - self.ell) / 16

    @property
    def n_max(self) -> int:
        return max(len(self.pos), len(self.neg))

    @property
    def growth_power(self) -> float:
        return (self.m - self.ell) / 4

    @property
    def decay_power(self) -> float:
        return 1 - (self.m + self.ell) / 4

    def with_constants(self, growth=None, decay=None, scale=None, neg_scale=None, state: str = FITTED) -> "FourierExpansion":
        kw = {}
        if growth is not None:
            kw["const_growth"] = Constant(complex(growth), state)
        if decay is not None:
            kw["const_decay"] = Constant(complex(decay), state)
        if scale is not None:
            kw["scale"] = complex(scale)
        if neg_scale is not None:
            kw["neg_scale"] = complex(neg_scale)
        return replace(self, **kw)

    def perturbed(self, n: int, factor: float = 1.1) -> "FourierExpansion":
        arr = (self.pos if n > 0 else self.neg).copy()
        arr[abs(n) - 1] *= factor
        return replace(self, **{"pos" if n > 0 else "neg": arr})


def _maass_factor(m: int, ell: int, n: int) -> float:
    sgn = 1 if n > 0 else -1
    return math.pi ** (m / 4) * abs(n) ** (-m / 4) / gamma_fn((m + sgn * ell) / 4).real


def build_maass(form: QuadraticForm, ell: int, measures_plus, measures_minus, n_max: int, y_min: float = DEFAULT_Y_MIN) -> FourierExpansion:
    """The expansion ``F`` of the Maass form attached to ``form`` (weight ``ell/2``)."""
    profile = validate(form)
    m, p = form.m, profile.p
    if m % 2 == 0 and p % 2 == 0:
        raise ParityViolation("m and p are both even; use the holomorphic construction")
    if (ell - (2 * p - m)) % 4:
        raise ParityViolation(f"ell={ell} is not congruent to 2p-m={2 * p - m} mod 4")
    tables = {1: measures_plus, -1: measures_minus}
    sign = (-1) ** ((2 * p - m - ell) // 4)
    root_D = math.sqrt(abs(profile.D))
    pos, neg = [], []
    for n in range(1, n_max + 1):
        pos.append(sign * _lookup(tables, n) / root_D * _maass_factor(m, ell, n))
        neg.append(sign * _lookup(tables, -n) / root_D * _maass_factor(m, ell, -n))
    return FourierExpansion(
        "maass", ell, m, profile.N, KroneckerCharacter(profile.K_disc), np.array(pos), np.array(neg), y_min=y_min
    )


def _require_holomorphic_parity(profile: FormProfile, m: int) -> None:
    if (m - profile.p) % 2:
        hint = " (p is even: apply the construction to -P)" if profile.p % 2 == 0 else ""
        raise ParityViolation(f"holomorphic construction needs m - p even{hint}")


def build_holomorphic(form: QuadraticForm, measures_plus, n_max: int, y_min: float = DEFAULT_Y_MIN) -> FourierExpansion:
    """``F(z) = a0 + |D|^-1/2 sum M(P;n) e(nz)`` of weight ``m/2``."""
    profile = validate(form)
    m = form.m
    _require_holomorphic_parity(profile, m)
    root_D = math.sqrt(abs(profile.D))
    pos = [_lookup({1: measures_plus}, n) / root_D for n in range(1, n_max + 1)]
    return FourierExpansion(
        "holomorphic", m, m, profile.N, KroneckerCharacter(profile.K_disc), np.array(pos),
        const_decay=Constant.known(0), y_min=y_min,
    )


def build_dual(
    form: QuadraticForm,
    kind: str,
    dual_plus,
    dual_minus=None,
    n_max: int = 0,
    ell: int | None = None,
    y_min: float = DEFAULT_Y_MIN,
) -> FourierExpansion:
    """The partner ``G`` of ``F`` under the Fricke involution, built from dual measures."""
    profile = validate(form)
    m, p, N = form.m, profile.p, profile.N
    chi = KroneckerCharacter(profile.K_N_disc)
    if kind == "holomorphic":
        _require_holomorphic_parity(profile, m)
        pref = cmath.exp(1j * math.pi * (m - 2 * p) / 4) * N ** (m / 4)
        pos = [pref * _lookup({1: dual_plus}, n) for n in range(1, n_max + 1)]
        return FourierExpansion(
            "holomorphic", m, m, N, chi, np.array(pos), const_decay=Constant.known(0), y_min=y_min
        )
    if ell is None:
        raise ValidationError("Maass dual needs ell")
    if m % 2 == 0 and p % 2 == 0:
        raise ParityViolation("m and p are both even; use the holomorphic construction")
    if (ell - (2 * p - m)) % 4:
        raise ParityViolation(f"ell={ell} is not congruent to 2p-m mod 4")
    tables = {1: dual_plus, -1: dual_minus}
    pref = cmath.exp(-1j * math.pi * ell / 4) * N ** (m / 4)
    pos, neg = [], []
    for n in range(1, n_max + 1):
        pos.append(pref * _lookup(tables, n) * _maass_factor(m, ell, n))
        neg.append(pref * _lookup(tables, -n) * _maass_factor(m, ell, -n))
    return FourierExpansion("maass", ell, m, N, chi, np.array(pos), np.array(neg), y_min=y_min)


def _whittaker_terms(exp: FourierExpansion, y: float, signs=(1, -1)) -> dict[int, np.ndarray]:
    mu = exp.m / 4 - 0.5
    out = {}
    for s in signs:
        coeffs = exp.pos if s > 0 else exp.neg
        n = np.arange(1, len(coeffs) + 1)
        w = np.array([whittaker_w(s * exp.ell / 4, mu, 4 * math.pi * k * y) for k in n])
        out[s] = coeffs * y ** (-exp.ell / 4) * w
    return out


def components(exp: FourierExpansion, z: complex) -> dict[str, complex]:
    """Pieces of ``F(z)`` that enter linearly: the constant-term powers and the
    positive and negative halves of the sum (before scaling)."""
    x, y = z.real, z.imag
    if exp.kind == "holomorphic":
        n = np.arange(1, len(exp.pos) + 1)
        return {"growth": 1.0, "decay": 0.0, "pos": complex(np.sum(exp.pos * np.exp(2j * np.pi * n * z))), "neg": 0j}
    terms = _whittaker_terms(exp, y)
    n_pos = np.arange(1, len(exp.pos) + 1)
    n_neg = np.arange(1, len(exp.neg) + 1)
    return {
        "growth": y**exp.growth_power,
        "decay": y**exp.decay_power,
        "pos": complex(np.sum(terms[1] * np.exp(2j * np.pi * n_pos * x))),
        "neg": complex(np.sum(terms[-1] * np.exp(-2j * np.pi * n_neg * x))),
    }


def _combine(exp: FourierExpansion, parts: dict[str, complex]) -> complex:
    return (
        exp.const_growth.value * parts["growth"]
        + exp.const_decay.value * parts["decay"]
        + exp.scale * (parts["pos"] + exp.neg_scale * parts["neg"])
    )


def _check_y(exp: FourierExpansion, z: complex) -> None:
    if z.imag < exp.y_min:
        raise BelowYMin(f"Im z = {z.imag:.4g} is below y_min = {exp.y_min}")


def tail_estimate(exp: FourierExpansion, y: float) -> float:
    """Bound on the omitted terms ``|n| > n_max`` from ``W ~ (4 pi n y)^kappa e^(-2 pi n y)``."""
    n = exp.n_max + 1
    geom = 1 / (1 - math.exp(-2 * math.pi * y))
    if exp.kind == "holomorphic":
        c = abs(exp.pos[-1]) if len(exp.pos) else 0.0
        return c * (n / max(1, n - 1)) ** (exp.m / 2) * math.exp(-2 * math.pi * n * y) * geom * abs(exp.scale)
    total = 0.0
    for s, coeffs in ((1, exp.pos), (-1, exp.neg)):
        if not len(coeffs):
            continue
        kappa = s * exp.ell / 4
        c = abs(coeffs[-1]) * ((n - 1) / n) ** (exp.m / 4)
        total += c * y ** (-exp.ell / 4) * (4 * math.pi * n * y) ** kappa * math.exp(-2 * math.pi * n * y) * geom
    return total * abs(exp.scale)


def evaluate(exp: FourierExpansion, z: complex, with_tail: bool = False):
    """``F(z)``; with ``with_tail`` also a truncation-error estimate."""
    z = complex(z)
    _check_y(exp, z)
    if not (exp.const_growth.resolved and exp.const_decay.resolved):
        raise UnresolvedConstants("constant terms must be known or fitted before evaluation")
    value = _combine(exp, components(exp, z))
    return (value, tail_estimate(exp, z.imag)) if with_tail else value


def multiplier(exp: FourierExpansion, g: GammaElement, z: complex) -> complex:
    """``chi(d) j(g,z)^(l/2)`` for even ``l`` and ``chi(d) J(g,z)^l`` for odd ``l``."""
    chi = exp.character(g.d)
    if exp.ell % 2 == 0:
        return chi * (g.c * z + g.d) ** (exp.ell // 2)
    if g.c % 4:
        raise NotInGamma04(f"{g} is not in Gamma_0(4)")
    return chi * theta_multiplier(g.matrix, z) ** exp.ell


def sample_gamma0(N: int, count: int, seed: int = 0, bound: int = 60, max_len: int = 8) -> list[GammaElement]:
    """Distinct elements of ``Gamma_0(N)`` from random words in ``T``, ``[[1,0],[N,1]]``,
    their inverses and ``-I``; the generators themselves come first."""
    if N < 1:
        raise ValidationError("N must be positive")
    T = GammaElement(1, 1, 0, 1)
    L = GammaElement(1, 0, N, 1)
    minus = GammaElement(-1, 0, 0, -1)
    gens = [T, T.inverse(), L, L.inverse(), minus]
    out = [T, L, minus]
    seen = {(g.a, g.b, g.c, g.d) for g in out}
    rng = np.random.default_rng(seed)
    attempts = 0
    while len(out) < count and attempts < 200 * count + 1000:
        attempts += 1
        g = GammaElement(1, 0, 0, 1)
        for i in rng.integers(0, len(gens), size=int(rng.integers(1, max_len + 1))):
            g = g @ gens[i]
        key = (g.a, g.b, g.c, g.d)
        if key in seen or max(map(abs, key)) > bound:
            continue
        seen.add(key)
        out.append(g)
    return out[:count]


def sample_points(g: GammaElement, y_min: float, count: int, rng: np.random.Generator) -> list[complex]:
    """Points ``z`` with ``Im z >= y_min`` and ``Im gz >= y_min``.

    With ``z = -d/c + u + i y`` one has ``Im gz = y / (c^2 (u^2 + y^2))``, so the
    admissible set is nonempty only when ``|c| y_min <= 1``.
    """
    if g.c == 0:
        return [complex(rng.uniform(-0.5, 0.5), y_min * rng.uniform(1.0, 3.0)) for _ in range(count)]
    c2 = g.c * g.c
    y_hi = 1 / (c2 * y_min)
    if y_hi < y_min:
        return []
    pts = []
    while len(pts) < count:
        y = rng.uniform(y_min, y_hi)
        u_max = math.sqrt(max(y / (c2 * y_min) - y * y, 0.0))
        z = complex(-g.d / g.c + rng.uniform(-u_max, u_max), y)
        if g.act(z).imag >= y_min:
            pts.append(z)
    return pts


def modularity_samples(N: int, y_min: float, n_gamma: int, per_gamma: int, seed: int) -> list[tuple[GammaElement, complex]]:
    """Pairs ``(g, z)`` usable at ``y_min``, drawn deterministically from ``seed``."""
    rng = np.random.default_rng(seed)
    gammas = [g for g in sample_gamma0(N, 40 * n_gamma + 10, seed) if g.c != 0 and abs(g.c) * y_min <= 1]
    out = []
    for g in gammas[:n_gamma]:
        out.extend((g, z) for z in sample_points(g, y_min, per_gamma, rng))
    return out


def _defect_row(exp: FourierExpansion, g: GammaElement, z: complex):
    gz = g.act(z)
    _check_y(exp, z)
    _check_y(exp, gz)
    mu = multiplier(exp, g, z)
    a, b = components(exp, gz), components(exp, z)
    return {key: a[key] - mu * b[key] for key in a}, b


def modularity_defect(exp: FourierExpansion, g: GammaElement, z: complex, floor: float = 1e-12) -> float:
    """``|F(gz) - chi(g) mult(g,z) F(z)| / max(|F(z)|, floor)``."""
    z = complex(z)
    if not (exp.const_growth.resolved and exp.const_decay.resolved):
        raise UnresolvedConstants("constant terms must be known or fitted first")
    diff, at_z = _defect_row(exp, g, z)
    return abs(_combine(exp, diff)) / max(abs(_combine(exp, at_z)), floor)


@dataclass(frozen=True)
class FitResult:
    expansion: FourierExpansion
    values: dict[str, complex]
    residual: float
    condition: float


@dataclass(frozen=True)
class ModularityReport:
    samples: list[tuple[GammaElement, complex, float]]
    fit: FitResult | None
    n_max: int
    tail: float

    @property
    def defects(self) -> np.ndarray:
        return np.array([d for _, _, d in self.samples])

    @property
    def median(self) -> float:
        return float(np.median(self.defects))


_FIT_KEYS = ("growth", "decay", "neg_scale")


def _solve(rows, rhs, n_unknowns: int):
    A = np.array(rows, dtype=complex)
    y = np.array(rhs, dtype=complex)
    if A.shape[0] < 3 * n_unknowns:
        raise IllConditioned(f"{A.shape[0]} equations for {n_unknowns} unknowns; need at least 3 per unknown")
    col = np.linalg.norm(A, axis=0)
    if np.any(col == 0):
        raise IllConditioned("an unknown does not enter any equation")
    An = A / col
    cond = float(np.linalg.cond(An))
    if not np.isfinite(cond) or cond > 1e10:
        raise IllConditioned(f"condition number {cond:.3g}")
    sol, *_ = np.linalg.lstsq(An, y, rcond=None)
    sol = sol / col
    denom = np.linalg.norm(y)
    residual = float(np.linalg.norm(A @ sol - y) / denom) if denom else 0.0
    return sol, residual, cond


def fit_constants(
    exp: FourierExpansion,
    samples: Sequence[tuple[GammaElement, complex]],
    unknowns: Iterable[str] = ("growth", "decay"),
) -> FitResult:
    """Least-squares fit of the unknown scalars from the modularity equations.

    ``unknowns`` is a subset of ``growth``, ``decay`` and ``neg_scale`` (the
    ratio of the negative to the positive branch); the overall scale stays
    fixed, which removes the trivial solution ``F = 0``.  Each equation is
    divided by ``|F(z)|`` estimated from the known part so that all samples
    weigh alike.
    """
    unknowns = [u for u in _FIT_KEYS if u in set(unknowns)]
    rows, rhs = [], []
    for g, z in samples:
        diff, at_z = _defect_row(exp, g, complex(z))
        weight = 1 / max(abs(at_z["pos"] + at_z["neg"]), 1e-300)
        coef = {
            "growth": diff["growth"],
            "decay": diff["decay"],
            "neg_scale": exp.scale * diff["neg"],
        }
        known = exp.scale * diff["pos"]
        for key in _FIT_KEYS:
            if key in unknowns:
                continue
            if key == "neg_scale":
                known += exp.scale * exp.neg_scale * diff["neg"]
            else:
                const = exp.const_growth if key == "growth" else exp.const_decay
                if not const.resolved:
                    raise UnresolvedConstants(f"{key} is neither known nor being fitted")
                known += const.value * coef[key]
        rows.append([coef[k] * weight for k in unknowns])
        rhs.append(-known * weight)
    sol, residual, cond = _solve(rows, rhs, len(unknowns))
    values = dict(zip(unknowns, (complex(v) for v in sol)))
    fitted = exp.with_constants(
        growth=values.get("growth"), decay=values.get("decay"), neg_scale=values.get("neg_scale")
    )
    return FitResult(fitted, values, residual, cond)


def modularity_report(exp: FourierExpansion, samples, fit: FitResult | None = None) -> ModularityReport:
    rows = [(g, complex(z), modularity_defect(exp, g, z)) for g, z in samples]
    tail = max((tail_estimate(exp, min(z.imag, g.act(z).imag)) for g, z in samples), default=0.0)
    return ModularityReport(rows, fit, exp.n_max, tail)


@lru_cache(maxsize=None)
def _central_weights(order: int, deriv: int) -> tuple[float, ...]:
    """Weights on offsets ``-order/2 .. order/2`` of the central difference of
    the given accuracy order for the ``deriv``-th derivative (exact solve)."""
    half = order // 2
    offsets = range(-half, half + 1)
    size = 2 * half + 1
    # Vandermonde system sum_j w_j j^i = i! [i == deriv]
    rows = [[Fraction(j) ** i for j in offsets] + [Fraction(math.factorial(deriv) if i == deriv else 0)] for i in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        rows[col] = [x / rows[col][col] for x in rows[col]]
        for r in range(size):
            if r != col and rows[r][col]:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return tuple(float(row[-1]) for row in rows)


def laplacian(fn, z: complex, h: float, ell: int, order: int = 4) -> complex:
    """``Delta_{l/2} fn(z)`` by central differences of accuracy ``order``
    (``order + 1`` points per axis; ``order=2`` is the classical five-point
    Laplacian stencil).
    """
    if order < 2 or order % 2:
        raise ValidationError("order must be a positive even integer")
    w1, w2 = _central_weights(order, 1), _central_weights(order, 2)
    half = order // 2
    cache = {}

    def f(i, axis):
        key = (i, axis) if i else (0, 0)
        if key not in cache:
            cache[key] = fn(z + i * h * (1 if axis == 0 else 1j))
        return cache[key]

    def diff(weights, axis, power):
        return sum(w * f(i - half, axis) for i, w in enumerate(weights) if w) / h**power

    y = z.imag
    dxx, dyy = diff(w2, 0, 2), diff(w2, 1, 2)
    dx, dy = diff(w1, 0, 1), diff(w1, 1, 1)
    return -(y**2) * (dxx + dyy) + 1j * ell * y / 2 * (dx + 1j * dy)


def laplacian_defect(exp: FourierExpansion, z: complex, h: float = 1e-3, fn=None, order: int = 4) -> float:
    """``|Delta F - Lambda F| / |F|`` at ``z`` by finite differences.

    ``fn`` may replace ``F`` by any function of ``z`` (e.g. a single Fourier term).
    """
    if exp.kind != "maass":
        raise ValidationError("the eigenvalue check applies to Maass expansions")
    z = complex(z)
    if z.imag - (order // 2) * h < exp.y_min:
        raise BelowYMin(f"the stencil reaches below y_min = {exp.y_min}")
    f = fn or (lambda w: evaluate(exp, w))
    value = f(z)
    return abs(laplacian(f, z, h, exp.ell, order) - exp.eigenvalue * value) / abs(value)


def single_term(exp: FourierExpansion, n: int):
    """The ``n``-th Fourier term of a Maass expansion as a function of ``z``."""
    mu = exp.m / 4 - 0.5
    sgn = 1 if n > 0 else -1
    c = (exp.pos if n > 0 else exp.neg)[abs(n) - 1]

    def term(z: complex) -> complex:
        y = z.imag
        return c * y ** (-exp.ell / 4) * whittaker_w(sgn * exp.ell / 4, mu, 4 * math.pi * abs(n) * y) * cmath.exp(2j * math.pi * n * z.real)

    return term


def fricke_image(F: FourierExpansion, z: complex) -> complex:
    """``F(-1/(Nz)) (sqrt(N) z)^(-l/2)`` with the principal branch."""
    w = -1 / (F.N * z)
    return evaluate(F, w) * (math.sqrt(F.N) * z) ** (-F.ell / 2)


def fricke_points(N: int, y_min: float, count: int, seed: int) -> list[complex]:
    """Points with ``Im z`` and ``Im(-1/(Nz))`` at least ``y_min``; the fixed point first."""
    rng = np.random.default_rng(seed)
    fixed = 1j / math.sqrt(N)
    pts = [fixed]
    r0 = 1 / math.sqrt(N)
    while len(pts) < count:
        z = fixed + complex(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)) * r0
        if z.imag >= y_min and (-1 / (N * z)).imag >= y_min:
            pts.append(z)
    return pts


def fit_dual(
    F: FourierExpansion, G: FourierExpansion, points: Sequence[complex], fit_neg_scale: bool = False
) -> FitResult:
    """Fit the scale and constant terms of ``G`` so that ``G(z)`` matches the
    Fricke image of ``F`` at ``points``."""
    keys = ["scale", "growth"] + (["decay"] if G.kind == "maass" else [])
    if fit_neg_scale and G.kind == "maass":
        keys.append("neg_scale")
    rows, rhs = [], []
    for z in points:
        z = complex(z)
        _check_y(G, z)
        target = fricke_image(F, z)
        parts = components(G, z)
        weight = 1 / max(abs(target), 1e-300)
        row = {
            "scale": parts["pos"] + (0 if fit_neg_scale else G.neg_scale * parts["neg"]),
            "growth": parts["growth"],
            "decay": parts["decay"],
            "neg_scale": parts["neg"],
        }
        rows.append([row[k] * weight for k in keys])
        rhs.append(target * weight)
    sol, residual, cond = _solve(rows, rhs, len(keys))
    values = dict(zip(keys, (complex(v) for v in sol)))
    if fit_neg_scale:
        # the product scale * neg_scale was fitted as one unknown
        values["neg_scale"] = values["neg_scale"] / values["scale"]
    fitted = G.with_constants(
        growth=values["growth"],
        decay=values.get("decay", G.const_decay.value),
        scale=values["scale"],
        neg_scale=values.get("neg_scale"),
    )
    return FitResult(fitted, values, residual, cond)


def fricke_defect(F: FourierExpansion, G: FourierExpansion, z: complex, floor: float = 1e-12) -> float:
    """``|F(-1/(Nz)) (sqrt(N) z)^(-l/2) - G(z)| / max(|G(z)|, floor)``."""
    z = complex(z)
    g = evaluate(G, z)
    return abs(fricke_image(F, z) - g) / max(abs(g), floor)


def missing_measure_guard(tables: dict, n_max: int) -> None:
    for sign, table in tables.items():
        if table is None or len(table) < n_max:
            raise MissingMeasure(f"measures for sign {sign} do not reach n_max={n_max}")


def constant_term(exp: FourierExpansion, which: str):
    """``y^(growth power)`` or ``y^(decay power)`` as a function of ``z``."""
    power = {"growth": exp.growth_power, "decay": exp.decay_power}[which]
    return lambda z: complex(z).imag ** power
