import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractions import Fraction

from siegelmod.bruhat import (
    SchwartzBruhatFn,
    build_phi0,
    build_phi_psi_P,
    fourier_transform,
    form_values_mod,
    parseval_ratio,
    stark_defect,
)
from siegelmod.characters import enumerate_characters, legendre_character
from siegelmod.errors import DimensionMismatch, ModulusDividesLevel, TableOverflow
from siegelmod.quadform import evaluate

from .conftest import MAASS_FORM, MIXED_FORM
from .oracles import dft_direct


def test_phi0():
    phi = build_phi0(5)
    assert phi((0,) * 5) == 1 and phi((3, -1, 2, 0, 7)) == 1
    assert phi((Fraction(1, 2), 0, 0, 0, 0)) == 0
    with pytest.raises(DimensionMismatch):
        build_phi0(0)


def test_phi0_self_dual():
    assert fourier_transform(build_phi0(3)).allclose(build_phi0(3))


def test_phi_psi_values():
    r = 3
    chi = enumerate_characters(r)
    phi_np = build_phi_psi_P(MAASS_FORM, chi[1])
    phi_p = build_phi_psi_P(MAASS_FORM, chi[0])
    zero = (1, 1, 1, 0, 0)  # P = 3
    assert evaluate(MAASS_FORM, zero) % r == 0
    assert phi_np(zero) == 0
    assert phi_p(zero) == r - 1
    assert phi_p((Fraction(1, 3), 0, 0, 0, 0)) == 0


def test_phi_psi_requires_coprime_modulus():
    with pytest.raises(ModulusDividesLevel):
        build_phi_psi_P(MIXED_FORM, legendre_character(3))


def test_table_budget():
    with pytest.raises(TableOverflow):
        build_phi_psi_P(MAASS_FORM, legendre_character(7), budget=1000)


def test_form_values_mod():
    vals = form_values_mod(MIXED_FORM, 5)
    assert vals[1, 1, 0, 0, 1] == evaluate(MIXED_FORM, (1, 1, 0, 0, 1)) % 5


def test_stark_support():
    phi_hat = fourier_transform(build_phi_psi_P(MAASS_FORM, legendre_character(5)))
    assert phi_hat.denom == 5 and phi_hat.period == 1


@pytest.mark.parametrize("r", [3, 5])
def test_stark_examples(r):
    for psi in enumerate_characters(r):
        assert stark_defect(MAASS_FORM, psi) < 1e-10
    assert stark_defect(MIXED_FORM, enumerate_characters(5)[1]) < 1e-10


def _random_fn(rng, m, M, L):
    side = M * L
    table = rng.normal(size=(side,) * m) + 1j * rng.normal(size=(side,) * m)
    return SchwartzBruhatFn(m, M, L, table)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 4), st.integers(0, 2**31))
def test_matches_direct_sum(m, M, L, seed):
    if (M * L) ** m > 150:
        return
    phi = _random_fn(np.random.default_rng(seed), m, M, L)
    hat = fourier_transform(phi)
    assert np.allclose(hat.table, dft_direct(phi.table, M, L), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 5), st.integers(0, 2**31))
def test_double_transform_reflects(m, M, L, seed):
    if (M * L) ** m > 400:
        return
    phi = _random_fn(np.random.default_rng(seed), m, M, L)
    back = fourier_transform(fourier_transform(phi))
    idx = (-np.arange(M * L)) % (M * L)
    reflected = phi.table
    for axis in range(m):
        reflected = np.take(reflected, idx, axis=axis)
    assert np.allclose(back.table, reflected, atol=1e-11)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 4), st.integers(0, 2**31))
def test_parseval(m, M, L, seed):
    if (M * L) ** m > 400:
        return
    phi = _random_fn(np.random.default_rng(seed), m, M, L)
    assert parseval_ratio(phi) == pytest.approx((M / L) ** m, rel=1e-12)


def test_transform_independent_of_r():
    phi = _random_fn(np.random.default_rng(3), 2, 2, 3)
    a = fourier_transform(phi)
    b = fourier_transform(phi, r=6)
    assert a.allclose(b, tol=1e-12)
    with pytest.raises(ValueError):
        fourier_transform(phi, r=4)


def test_refine_keeps_function():
    phi = _random_fn(np.random.default_rng(4), 2, 1, 2)
    fine = phi.refine(3, 4)
    for v in [(0, 1), (Fraction(1, 3), 0), (5, -3), (Fraction(2, 3), Fraction(1, 3))]:
        assert fine(v) == phi(v)
