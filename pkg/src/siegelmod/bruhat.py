"""Schwartz-Bruhat functions on Q^m as finite tables, and their Fourier transform.

A function ``phi`` supported in ``(1/M) Z^m`` and invariant under ``L Z^m`` is
determined by its values ``phi(u / M)`` for ``u`` in ``(Z / ML)^m``; that array
is the table.  The transform

    phi_hat(v*) = r^-m * sum over v in (1/M)Z^m / r Z^m of phi(v) e(-<v, v*>)

is supported in ``(1/L) Z^m`` with period ``M``, so it is again a table over
``(Z / ML)^m``.  The sum is evaluated axis by axis as a dense matrix product
(no FFT), which keeps every term explicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .characters import (
    DirichletCharacter,
    KroneckerCharacter,
    c_lr,
    gauss_sum,
    psi_star,
)
from .errors import DimensionMismatch, ModulusDividesLevel, TableOverflow
from .quadform import QuadraticForm, validate

TABLE_BUDGET = 10**7


@dataclass(frozen=True, eq=False)
class SchwartzBruhatFn:
    """``phi`` with support in ``(1/denom) Z^m`` and period ``period``."""

    m: int
    denom: int
    period: int
    table: np.ndarray

    def __post_init__(self):
        side = self.denom * self.period
        if self.table.shape != (side,) * self.m:
            raise DimensionMismatch(f"table shape {self.table.shape} does not match (M L)^m with M L = {side}")

    @property
    def side(self) -> int:
        return self.denom * self.period

    def __call__(self, v: Sequence) -> complex:
        if len(v) != self.m:
            raise DimensionMismatch(f"point has {len(v)} coordinates, function has m={self.m}")
        idx = []
        for x in v:
            u = Fraction(x) * self.denom
            if u.denominator != 1:
                return 0j
            idx.append(int(u) % self.side)
        return complex(self.table[tuple(idx)])

    def allclose(self, other: "SchwartzBruhatFn", tol: float = 1e-12) -> bool:
        """Equality as functions on Q^m (representations may differ)."""
        M = np.lcm(self.denom, other.denom)
        L = np.lcm(self.period, other.period)
        a, b = self.refine(M, L), other.refine(M, L)
        return bool(np.max(np.abs(a.table - b.table), initial=0.0) <= tol)

    def refine(self, denom: int, period: int) -> "SchwartzBruhatFn":
        """Same function on the finer grid ``(1/denom) Z^m`` mod ``period``."""
        if denom % self.denom or period % self.period:
            raise ValueError("refinement must use multiples of the current denominator and period")
        side = denom * period
        step = denom // self.denom
        u = np.arange(side)
        on_grid = u % step == 0
        src = (u // step) % self.side
        out = self.table
        for axis in range(self.m):
            out = np.take(out, src, axis=axis)
            shape = [1] * self.m
            shape[axis] = side
            out = out * on_grid.reshape(shape)
        return SchwartzBruhatFn(self.m, denom, period, out)


def _check_budget(side: int, m: int, budget: int) -> None:
    if side**m > budget:
        raise TableOverflow(f"table of {side}^{m} entries exceeds the budget {budget}")


def build_phi0(m: int) -> SchwartzBruhatFn:
    """Characteristic function of ``Z^m``."""
    if m < 1:
        raise DimensionMismatch("m must be positive")
    return SchwartzBruhatFn(m, 1, 1, np.ones((1,) * m, dtype=complex))


def form_values_mod(form: QuadraticForm, r: int) -> np.ndarray:
    """``P(u) mod r`` for all ``u`` in ``(Z/r)^m``, as an m-dimensional array."""
    m = form.m
    G = np.array(form.gram2, dtype=np.int64)
    grids = np.meshgrid(*([np.arange(r, dtype=np.int64)] * m), indexing="ij")
    total = np.zeros((r,) * m, dtype=np.int64)
    for i in range(m):
        total += (G[i, i] // 2) * grids[i] * grids[i]
        for j in range(i + 1, m):
            if G[i, j]:
                total += G[i, j] * grids[i] * grids[j]
    return total % r


def build_phi_psi_P(form: QuadraticForm, psi: DirichletCharacter, budget: int = TABLE_BUDGET) -> SchwartzBruhatFn:
    """``phi(v) = tau_psi(P(v))`` on ``Z^m`` and zero elsewhere."""
    r = psi.modulus
    profile = validate(form)
    if profile.N % r == 0:
        raise ModulusDividesLevel(f"r={r} divides the level N={profile.N}")
    _check_budget(r, form.m, budget)
    taus = np.array([gauss_sum(psi, n) for n in range(r)])
    return SchwartzBruhatFn(form.m, 1, r, taus[form_values_mod(form, r)])


def fourier_transform(
    phi: SchwartzBruhatFn, r: int | None = None, budget: int = TABLE_BUDGET
) -> SchwartzBruhatFn:
    """Finite Fourier transform with normalization ``[Z^m : r Z^m]^-1``.

    ``r`` defaults to the period of ``phi``; any multiple of it gives the same
    result and can be passed to check that.
    """
    M, L, m = phi.denom, phi.period, phi.m
    r = L if r is None else r
    if r % L:
        raise ValueError(f"r={r} must be a multiple of the period {L}")
    n_in = M * r
    _check_budget(max(n_in, M * L), m, budget)
    if r != L:
        phi = phi.refine(M, r)
    side_out = M * L
    u = np.arange(n_in)
    w = np.arange(side_out)
    # kernel[u, w] = e(-u w / (M L)) for v = u/M, v* = w/L
    kernel = np.exp(-2j * np.pi * (np.outer(u, w) % side_out) / side_out)
    out = phi.table.astype(complex)
    for axis in range(m):
        out = np.moveaxis(np.tensordot(out, kernel, axes=([axis], [0])), -1, axis)
    return SchwartzBruhatFn(m, L, M, out / float(r) ** m)


def stark_rhs(form: QuadraticForm, psi: DirichletCharacter) -> np.ndarray:
    """``r^(-m/2) chi_K(r) C_{2p-m,r} psi*(-N) tau_{psi*}(Phat(v*))`` on ``(Z/r)^m``."""
    r = psi.modulus
    profile = validate(form)
    m = form.m
    star = psi_star(psi, m)
    chi = KroneckerCharacter(profile.K_disc)
    const = r ** (-m / 2) * chi(r) * c_lr(2 * profile.p - m, r) * star(-profile.N)
    taus = np.array([gauss_sum(star, n) for n in range(r)])
    return const * taus[form_values_mod(profile.dual, r)]


def stark_defect(form: QuadraticForm, psi: DirichletCharacter, budget: int = TABLE_BUDGET) -> float:
    """Max deviation between the transform of ``phi_{psi,P}`` at ``v*/r`` and its closed form."""
    phi_hat = fourier_transform(build_phi_psi_P(form, psi, budget), budget=budget)
    # phi_hat has denominator r and period 1: its table is indexed by v* mod r
    return float(np.max(np.abs(phi_hat.table - stark_rhs(form, psi))))


def parseval_ratio(phi: SchwartzBruhatFn) -> float:
    """``sum |phi_hat|^2 / sum |phi|^2`` over one table each; equals ``(M/L)^m``."""
    hat = fourier_transform(phi)
    return float(np.sum(np.abs(hat.table) ** 2) / np.sum(np.abs(phi.table) ** 2))
