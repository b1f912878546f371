
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siegelmod.characters import KroneckerCharacter
from siegelmod.errors import (
    BelowYMin,
    IllConditioned,
    MissingMeasure,
    ParityViolation,
    UnresolvedConstants,
    ValidationError,
)
from siegelmod.forms import (
    Constant,
    FourierExpansion,
    GammaElement,
    build_dual,
    build_holomorphic,
    build_maass,
    constant_term,
    evaluate,
    fit_constants,
    fit_dual,
    fricke_defect,
    fricke_points,
    laplacian_defect,
    missing_measure_guard,
    modularity_defect,
    modularity_report,
    modularity_samples,
    sample_gamma0,
    sample_points,
    single_term,
)

from .conftest import HOLO_FORM, MAASS_FORM
from .oracles import sum_of_squares_counts

Y_MIN = 0.2


def theta_power(m: int, n_max: int = 80, constant=Constant.known(1)) -> FourierExpansion:
    """``theta(z)^m`` with ``theta(z) = sum e(n^2 z)``, an exact modular form on Gamma_0(4)."""
    r = sum_of_squares_counts(m, n_max)
    chi = KroneckerCharacter(-4 if m % 4 == 2 else None)
    return FourierExpansion(
        "holomorphic", m, m, 4, chi, np.array(r[1:], dtype=float),
        const_growth=constant, const_decay=Constant.known(0), y_min=Y_MIN,
    )


@pytest.fixture(scope="module")
def maass(maass_tables):
    plus, minus = maass_tables[50]
    return build_maass(MAASS_FORM, 3, plus, minus, 40, y_min=Y_MIN)


@pytest.fixture(scope="module")
def maass_fitted(maass):
    samples = modularity_samples(4, Y_MIN, 6, 8, seed=1)
    return fit_constants(maass, samples, ("growth", "decay", "neg_scale")).expansion


def test_gamma_element():
    g = GammaElement(1, 0, 4, 1)
    assert g.in_gamma0(4) and not g.in_gamma0(8)
    assert (g @ g.inverse()).matrix == ((1, 0), (0, 1))
    with pytest.raises(ValidationError):
        GammaElement(1, 1, 1, 1)


def test_sample_gamma0_properties():
    gs = sample_gamma0(4, 30, seed=3)
    assert gs[:3] == [GammaElement(1, 1, 0, 1), GammaElement(1, 0, 4, 1), GammaElement(-1, 0, 0, -1)]
    assert len({g.matrix for g in gs}) == len(gs) == 30
    for g in gs:
        assert g.a * g.d - g.b * g.c == 1 and g.c % 4 == 0
    assert sample_gamma0(4, 30, seed=3) == gs


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_sample_points_respect_y_min(seed):
    rng = np.random.default_rng(seed)
    for g in sample_gamma0(4, 8, seed)[:8]:
        for z in sample_points(g, Y_MIN, 4, rng):
            assert z.imag >= Y_MIN and g.act(z).imag >= Y_MIN - 1e-12


def test_half_height_is_infeasible_for_level_four():
    g = GammaElement(1, 0, 4, 1)
    assert sample_points(g, 0.5, 5, np.random.default_rng(0)) == []
    assert modularity_samples(4, 0.5, 6, 8, seed=0) == []


def test_maass_eigenvalue_and_parity(maass_tables):
    plus, minus = maass_tables[10]
    F = build_maass(MAASS_FORM, 3, plus, minus, 10)
    assert F.eigenvalue == -0.5
    with pytest.raises(ParityViolation):
        build_maass(MAASS_FORM, 1, plus, minus, 10)
    with pytest.raises(ParityViolation):
        build_holomorphic(MAASS_FORM, plus, 10)
    with pytest.raises(MissingMeasure):
        missing_measure_guard({1: plus, -1: None}, 10)


def test_holomorphic_constant_term_is_unknown(holo_tables):
    F = build_holomorphic(HOLO_FORM, holo_tables[10], 20)
    with pytest.raises(UnresolvedConstants):
        evaluate(F, 0.1 + 1j)


@pytest.mark.parametrize("m", [5, 6])
def test_theta_powers_are_modular(m):
    F = theta_power(m)
    samples = modularity_samples(4, Y_MIN, 6, 5, seed=2)
    assert len(samples) >= 20
    assert max(modularity_defect(F, g, z) for g, z in samples) < 1e-10


def test_perturbed_theta_is_not_modular():
    F = theta_power(6).perturbed(1)
    samples = modularity_samples(4, Y_MIN, 4, 5, seed=2)
    assert np.median([modularity_defect(F, g, z) for g, z in samples]) > 1e-3


def test_fit_recovers_theta_constant():
    F = theta_power(6, constant=Constant())
    fit = fit_constants(F, modularity_samples(4, Y_MIN, 6, 5, seed=4), ("growth",))
    assert fit.values["growth"] == pytest.approx(1, abs=1e-8)
    assert fit.residual < 1e-10


def test_residual_is_scale_invariant():
    samples = modularity_samples(4, Y_MIN, 6, 5, seed=4)
    F = theta_power(6, constant=Constant()).perturbed(2)
    a = fit_constants(F, samples, ("growth",))
    b = fit_constants(F.with_constants(scale=7.5), samples, ("growth",))
    assert a.residual == pytest.approx(b.residual, rel=1e-8)
    assert b.values["growth"] == pytest.approx(7.5 * a.values["growth"], rel=1e-8)


def test_fit_refuses_too_few_samples():
    F = theta_power(6, constant=Constant())
    with pytest.raises(IllConditioned):
        fit_constants(F, modularity_samples(4, Y_MIN, 1, 2, seed=0), ("growth",))


def test_periodicity_and_trivial_elements(maass_fitted):
    T, minus = GammaElement(1, 1, 0, 1), GammaElement(-1, 0, 0, -1)
    for z in (0.13 + 0.9j, -0.4 + 0.35j):
        assert abs(evaluate(maass_fitted, z + 1) - evaluate(maass_fitted, z)) < 1e-12 * abs(evaluate(maass_fitted, z))
        assert modularity_defect(maass_fitted, T, z) < 1e-12
        assert modularity_defect(theta_power(5), minus, z) < 1e-12


def test_maass_modularity_after_fit(maass, maass_fitted):
    samples = modularity_samples(4, Y_MIN, 6, 8, seed=9)
    report = modularity_report(maass_fitted, samples)
    assert report.median < 1e-3
    assert modularity_report(maass_fitted.perturbed(1), samples).median > 10 * report.median
    g = samples[-1][0]
    z = samples[-1][1]
    assert modularity_defect(maass_fitted, g.inverse(), g.act(z)) < 1e-2


def test_holomorphic_values_real_on_imaginary_axis(holo_tables):
    F = build_holomorphic(HOLO_FORM, holo_tables[50], 40).with_constants(growth=0.25)
    for y in (0.3, 0.8, 2.0):
        assert abs(evaluate(F, 1j * y).imag) < 1e-12 * abs(evaluate(F, 1j * y))


def test_tail_shrinks_with_more_terms(holo_tables):
    short = build_holomorphic(HOLO_FORM, holo_tables[10], 10).with_constants(growth=0)
    long = build_holomorphic(HOLO_FORM, holo_tables[10], 20).with_constants(growth=0)
    assert evaluate(long, 0.5j, with_tail=True)[1] < evaluate(short, 0.5j, with_tail=True)[1] / 2


def test_below_y_min_raises(maass_fitted):
    with pytest.raises(BelowYMin):
        evaluate(maass_fitted, 0.1j)
    with pytest.raises(BelowYMin):
        laplacian_defect(maass_fitted, 0.2001j)


def test_laplacian_single_terms_and_constants(maass):
    z = 0.1 + 1.2j
    for n in (1, -1, 2):
        assert laplacian_defect(maass, z, fn=single_term(maass, n)) < 1e-4
    for which in ("growth", "decay"):
        assert laplacian_defect(maass, z, fn=constant_term(maass, which)) < 1e-6


@pytest.mark.parametrize("order", [2, 4])
def test_laplacian_error_scales_with_order(maass, order):
    z = 0.1 + 1.2j
    term = single_term(maass, 1)
    coarse = laplacian_defect(maass, z, h=4e-2, fn=term, order=order)
    fine = laplacian_defect(maass, z, h=2e-2, fn=term, order=order)
    assert coarse / fine == pytest.approx(2**order, rel=0.15)


def test_laplacian_rejects_holomorphic():
    with pytest.raises(ValidationError):
        laplacian_defect(theta_power(6), 1j)


def test_theta_fricke_partner():
    F = theta_power(6)
    G = theta_power(6, constant=Constant())
    pts = fricke_points(4, Y_MIN, 12, seed=0)
    assert pts[0] == 0.5j
    fit = fit_dual(F, G, pts)
    assert fit.values["scale"] == pytest.approx(1j, abs=1e-10)
    assert fit.values["growth"] == pytest.approx(1j, abs=1e-10)
    assert max(fricke_defect(F, fit.expansion, z) for z in pts) < 1e-10


def test_holomorphic_fricke_fixed_point(holo_tables):
    table = holo_tables[50]
    F = build_holomorphic(HOLO_FORM, table, 40, y_min=Y_MIN)
    F = fit_constants(F, modularity_samples(4, Y_MIN, 6, 8, seed=5), ("growth",)).expansion
    G = build_dual(HOLO_FORM, "holomorphic", table, n_max=40, y_min=Y_MIN)
    fit = fit_dual(F, G, fricke_points(4, Y_MIN, 12, seed=1))
    assert abs(fit.values["scale"] * 64 - 1) < 1e-6
    assert fricke_defect(F, fit.expansion, 0.5j) < 1e-6
