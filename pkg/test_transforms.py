import math

import numpy as np
import pytest
from scipy import special as sp_special

from config import EXIT_RESIDUAL
from errors import (
    ConfigError,
    GammaPole,
    NoConvergence,
    NonpositiveLength,
    PreconditionError,
    TransformPole,
)
from special import gamma, half_integer_product, lanczos_gamma
from transforms import (
    ModelHeatTerm,
    TermKind,
    cancellation_check,
    evenness_grid,
    full_line_checks,
    gaussian_kernel,
    gaussian_kernel_grid,
    identity_term_transform,
    laplace_gaussian_kernel,
    laplace_mellin_pk,
    laplace_pk,
    model_term_grid,
    pk_closed_form,
    pk_grid,
    pk_quadrature,
    pk_transform,
    quadrature_laplace,
    spot_checks,
    unipotent_term_transform,
)


def assert_all_pass(checks):
    failed = [c for c in checks if not c.passed]
    assert not failed, [(c.name, c.residual, c.bound) for c in failed]


@pytest.mark.parametrize("z", [0.5 + 0.3j, 2.7 - 1.1j, -1.3 + 0.4j, 4.5j])
def test_lanczos_against_scipy(z):
    assert lanczos_gamma(z) == pytest.approx(complex(sp_special.gamma(z)), rel=1e-12)


def test_gamma_poles():
    for n in (0, -1, -4):
        with pytest.raises(GammaPole):
            gamma(n)
    assert gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-15)


def test_half_integer_product():
    assert half_integer_product(0) == 1
    assert half_integer_product(1) == 0.5
    assert half_integer_product(3) == pytest.approx(0.5 * 1.5 * 2.5)


def test_kernel_closed_form():
    assert laplace_gaussian_kernel(1.7, 2.3) == pytest.approx(math.exp(-1.7 * 2.3) / 1.7, rel=1e-15)


def test_kernel_quadrature_spot():
    numeric = quadrature_laplace(lambda t: gaussian_kernel(1.7, t), 0, 2.3).value
    assert numeric == pytest.approx(math.exp(-1.7 * 2.3) / 1.7, rel=1e-8)


def test_kernel_rejects_nonpositive_length():
    with pytest.raises(NonpositiveLength):
        laplace_gaussian_kernel(0.0, 1.0)


def test_kernel_grid():
    assert_all_pass(gaussian_kernel_grid())


def test_pk_spot_values():
    assert laplace_mellin_pk(0, 1, 2) == pytest.approx(math.pi / 4, rel=1e-12)
    assert laplace_mellin_pk(1, 2, 1) == pytest.approx(math.pi / 4, rel=1e-12)
    assert laplace_pk(0, 1) == pytest.approx(-math.pi, rel=1e-12)
    assert laplace_pk(1, 2) == pytest.approx(8 * math.pi / 3, rel=1e-12)


def test_pk_nested_quadrature():
    numeric = quadrature_laplace(lambda t: pk_quadrature(0, t), 3, 1.5).value
    assert numeric == pytest.approx(laplace_mellin_pk(0, 3, 1.5), rel=1e-8)


def test_pk_quadrature_matches_closed_form():
    for k in (0, 1, 2):
        assert pk_quadrature(k, 0.8) == pytest.approx(pk_closed_form(k, 0.8), rel=1e-10)


def test_pk_pole():
    with pytest.raises(GammaPole):
        laplace_mellin_pk(0, 0.5, 1.0)
    assert pk_transform(1, 1.5).poles == [0j]


def test_pk_grid():
    assert_all_pass(pk_grid())


def test_spot_checks():
    assert_all_pass(spot_checks())


def test_evenness():
    assert_all_pass(evenness_grid())


def test_full_line_moments():
    assert_all_pass(full_line_checks())


def test_quadrature_needs_decay():
    with pytest.raises(PreconditionError):
        quadrature_laplace(lambda t: 1.0, 1, 1j)


def test_quadrature_reports_non_convergence(monkeypatch):
    monkeypatch.setattr("transforms.QUAD_LIMIT", 3)
    with pytest.raises(NoConvergence, match="did not converge") as info:
        quadrature_laplace(lambda t: math.cos(300 * t), 1, 0.1, t_min=1.0, t_max=40.0)
    assert info.value.exit_code == EXIT_RESIDUAL


def test_identity_terms():
    vol = 2.0
    z = 1.5
    expI0 = identity_term_transform(TermKind.IDENTITY0, vol)
    I1 = identity_term_transform(TermKind.IDENTITY1, vol)
    assert expI0(z) == pytest.approx(math.pi / 3 * vol * z**3, rel=1e-13)
    assert I1(z) == pytest.approx(2 * math.pi * vol * (z**3 / 3 - z), rel=1e-13)


@pytest.mark.parametrize("convention, factor", [("halved", 1.0), ("direct", 2.0)])
def test_unipotent_conventions(convention, factor):
    c = 0.7
    U1 = unipotent_term_transform(TermKind.UNIPOTENT1, c, convention)
    expU0 = unipotent_term_transform(TermKind.UNIPOTENT0, c, convention)
    assert U1(2.0) == pytest.approx(-factor * math.pi * c * 2.0, rel=1e-13)
    assert U1(2.0) == pytest.approx(2 * expU0(2.0), rel=1e-13)


def test_unknown_unipotent_convention():
    with pytest.raises(ConfigError):
        ModelHeatTerm(TermKind.UNIPOTENT1, convention="other")


def test_identity_needs_positive_volume():
    with pytest.raises(ConfigError):
        ModelHeatTerm(TermKind.IDENTITY0, volume=0.0)


def test_small_t_expansion_shape():
    term = ModelHeatTerm(TermKind.IDENTITY1, volume=3.0)
    decays = [decay for decay, _ in term.small_t_expansion()]
    assert decays == [1.5, 0.5]
    assert term.integrand(0.25) == pytest.approx(
        sum(c * 0.25 ** (-d) for d, c in term.small_t_expansion())
    )


def test_model_terms_against_quadrature():
    assert_all_pass(model_term_grid(volume=2.029883212819307, c_rho_gamma=0.8))
    assert_all_pass(model_term_grid(convention="direct"))


def test_cancellation_random_draws():
    rng = np.random.default_rng(20240607)
    for vol, c in zip(list(rng.uniform(0.1, 10.0, 20)) + [1e6], list(rng.uniform(-5, 5, 20)) + [1.0]):
        for which, scale in (("Identity", vol), ("Unipotent", abs(c))):
            for convention in ("halved", "direct"):
                poly = cancellation_check(which, vol, c, convention)
                assert np.max(np.abs(poly.coef)) <= 1e-12 * max(1.0, scale)


def test_cancellation_unknown_family():
    with pytest.raises(ValueError):
        cancellation_check("Elliptic")


def test_reflection_needs_integer_powers():
    with pytest.raises(TransformPole):
        pk_transform(0, 1.25).reflected()
