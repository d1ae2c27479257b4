import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from characters import Character
from errors import HypothesisFailed, NoCuspData, NotAcyclic, PoleAtOne, ShapeError
from group import GroupPresentation, Word, expand_presentation
from moebius import MoebiusElement
from torsion import (
    LaurentPoly,
    TwistedChainComplex,
    alexander_at_one,
    exact_unit,
    fox_derivative,
    laurent_determinant,
    reidemeister_torsion_magnitude,
    theorem_report,
    twisted_alexander,
)

T = LaurentPoly.monomial(1, 1)
ONE = LaurentPoly.constant(1)


def poly(*coefficients):
    """Polynomial from coefficients of t^0, t^1, ..."""
    return LaurentPoly.from_dict(dict(enumerate(coefficients)))


def circle() -> GroupPresentation:
    return GroupPresentation(
        name="circle",
        generator_names=["a"],
        generator_matrices=[MoebiusElement.checked(2, 0, 0, 0.5)],
        relators=[],
        cusp_words=[Word(((0, 1),))],
        abelianization=[[1]],
        epimorphism_to_z=[1],
    )


def test_laurent_arithmetic():
    p = T - 1
    q = T + 1
    assert (p * q).as_dict() == {0: -1, 2: 1}
    assert str(poly(1, -3, 1)) == "1 - 3*t + t^2"
    assert T.inverse().as_dict() == {-1: 1}
    assert (T.inverse() * T).as_dict() == {0: 1}


def test_normalized_removes_units():
    unit = LaurentPoly.monomial(-1j, -3)
    assert (unit * poly(1, -1, 1)).normalized().is_close(poly(1, -1, 1))


def test_fox_derivative_of_generator():
    images = [T, T]
    assert fox_derivative(Word(((0, 1),)), 0, images).as_dict() == {0: 1}
    assert fox_derivative(Word(((0, -1),)), 0, images).as_dict() == {-1: -1}
    assert fox_derivative(Word(((0, 1),)), 1, images).is_zero


def test_fox_product_rule():
    rng = np.random.default_rng(11)
    images = [LaurentPoly.monomial(1j, 1), LaurentPoly.monomial(-1, 2)]
    for _ in range(50):
        u = Word.from_letters([(int(g), int(e)) for g, e in zip(rng.integers(0, 2, 6), rng.choice([-1, 1], 6))])
        v = Word.from_letters([(int(g), int(e)) for g, e in zip(rng.integers(0, 2, 5), rng.choice([-1, 1], 5))])
        prefix = ONE
        for gen, exp in u.letters:
            prefix = prefix * (images[gen] if exp > 0 else images[gen].inverse())
        for i in (0, 1):
            expected = fox_derivative(u, i, images) + prefix * fox_derivative(v, i, images)
            assert fox_derivative(u * v, i, images).is_close(expected, 1e-12)


def test_fundamental_formula(figure8):
    """sum_i dr/da_i (a_i - 1) = r - 1 = 0 in the abelianized ring"""
    images = [T, T]
    r = figure8.relators[0]
    total = sum((fox_derivative(r, i, images) * (images[i] - 1) for i in range(2)), LaurentPoly())
    assert total.is_zero


def test_laurent_determinant():
    matrix = [[T - 1, ONE], [T.inverse(), T + 1]]
    # (t - 1)(t + 1) - t^-1
    expected = LaurentPoly.from_dict({2: 1, 0: -1, -1: -1})
    assert laurent_determinant(matrix).is_close(expected, 1e-12)


def test_trefoil_alexander(trefoil):
    invariant = twisted_alexander(trefoil, Character.trivial(1)).normalized()
    assert invariant.numerator.is_close(poly(1, -1, 1), 1e-12)
    assert invariant.denominator.is_close(poly(-1, 1), 1e-12)


def test_figure8_alexander(figure8):
    invariant = twisted_alexander(figure8, Character.trivial(1)).normalized()
    assert invariant.numerator.is_close(poly(1, -3, 1), 1e-12)
    assert str(invariant.numerator) == "1 - 3*t + t^2"


def test_alexander_independent_of_removed_generator(figure8, quarter):
    first = twisted_alexander(figure8, quarter, remove=0)
    second = twisted_alexander(figure8, quarter, remove=1)
    assert first.equivalent(second)


def test_figure8_torsion(figure8, quarter):
    chain = TwistedChainComplex.from_presentation(figure8, quarter)
    tau = reidemeister_torsion_magnitude(chain)
    assert tau == pytest.approx(3 / math.sqrt(2), abs=1e-9)
    assert tau**2 == pytest.approx(4.5, abs=1e-9)
    assert abs(alexander_at_one(figure8, quarter)) == pytest.approx(tau, abs=1e-9)


def test_trefoil_torsion(trefoil, quarter):
    chain = TwistedChainComplex.from_presentation(trefoil, quarter)
    tau = reidemeister_torsion_magnitude(chain)
    assert tau == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert abs(alexander_at_one(trefoil, quarter)) == pytest.approx(tau, abs=1e-9)


def test_torsion_independent_of_subbasis(figure8, quarter):
    chain = TwistedChainComplex.from_presentation(figure8, quarter)
    first = reidemeister_torsion_magnitude(chain, row_sets={1: [0], 2: [0]})
    second = reidemeister_torsion_magnitude(chain, row_sets={1: [1], 2: [0]})
    assert first == pytest.approx(second, rel=1e-12)


def test_torsion_invariant_under_expansion(figure8, quarter):
    expanded = expand_presentation(figure8, figure8.word("a b A"))
    tau = reidemeister_torsion_magnitude(TwistedChainComplex.from_presentation(figure8, quarter))
    tau_expanded = reidemeister_torsion_magnitude(
        TwistedChainComplex.from_presentation(expanded, quarter)
    )
    assert tau_expanded == pytest.approx(tau, rel=1e-9)


def test_unimodular_change_of_basis(figure8, quarter):
    chain = TwistedChainComplex.from_presentation(figure8, quarter)
    shear = np.array([[1, 2 + 1j], [0, 1]], dtype=complex)
    changed = chain.change_basis(1, shear)
    assert changed.check_boundary() <= 1e-12
    assert reidemeister_torsion_magnitude(changed) == pytest.approx(
        reidemeister_torsion_magnitude(chain), rel=1e-9
    )


def test_circle_conventions():
    rho = Character.parse("1/2")
    chain = TwistedChainComplex.from_presentation(circle(), rho)
    assert reidemeister_torsion_magnitude(chain, "turaev") == pytest.approx(2.0, rel=1e-12)
    assert reidemeister_torsion_magnitude(chain, "milnor") == pytest.approx(0.5, rel=1e-12)


def test_trivial_circle_is_not_acyclic():
    chain = TwistedChainComplex.from_presentation(circle(), Character.trivial(1))
    assert chain.homology() == [1, 1, 0]
    with pytest.raises(NotAcyclic):
        reidemeister_torsion_magnitude(chain)


def test_engineered_non_acyclic_character(trefoil):
    sixth = Character.parse("1/6")
    chain = TwistedChainComplex.from_presentation(trefoil, sixth)
    assert any(chain.homology())
    with pytest.raises(HypothesisFailed, match="h\\^1"):
        theorem_report(trefoil, sixth)


def test_report_refuses_trivial_character(figure8):
    with pytest.raises(HypothesisFailed, match="cusp"):
        theorem_report(figure8, Character.trivial(1))


def test_alexander_needs_deficiency_one(figure8):
    doubled = GroupPresentation(
        name="doubled",
        generator_names=figure8.generator_names,
        generator_matrices=figure8.generator_matrices,
        relators=figure8.relators * 2,
        cusp_words=figure8.cusp_words,
        abelianization=figure8.abelianization,
        epimorphism_to_z=figure8.epimorphism_to_z,
    )
    with pytest.raises(ShapeError):
        twisted_alexander(doubled, Character.parse("1/4"))


def test_theorem_report(figure8, quarter):
    report = theorem_report(figure8, quarter, delta_rho=2.0)
    assert report.tau_squared == pytest.approx(4.5, abs=1e-9)
    assert report.cross_check <= 1e-9
    assert report.delta_prediction == pytest.approx(4 * 4.5, abs=1e-8)
    data = report.to_dict()
    assert data["ruelle_at_zero"] is None
    assert data["torsion_convention"] == "milnor"
    assert "meromorphic continuation" in report.to_text()


def test_report_without_alexander_side():
    report = theorem_report(circle(), Character.parse("1/2"), convention="turaev")
    assert report.tau_magnitude == pytest.approx(2.0)
    assert report.alexander_abs == pytest.approx(0.5)
    assert report.cross_check == pytest.approx(0.0, abs=1e-12)


def test_report_needs_cusp_words():
    with pytest.raises(NoCuspData):
        theorem_report(replace(circle(), cusp_words=[]), Character.parse("1/2"))


def test_exact_units():
    assert sp.simplify(exact_unit(Fraction(1, 6)) - (sp.Rational(1, 2) + sp.sqrt(3) * sp.I / 2)) == 0
    assert exact_unit(Fraction(1, 4)) == sp.I
    assert exact_unit(Fraction(0)) == 1


def test_alexander_coefficients_are_exact(figure8):
    trivial = twisted_alexander(figure8, Character.trivial(1)).normalized()
    assert trivial.numerator.as_dict() == {0: 1, 1: -3, 2: 1}
    third = twisted_alexander(figure8, Character.parse("1/3"))
    for part in (third.numerator, third.denominator):
        assert part.terms
        assert not any(c.has(sp.Float) for c in part.as_dict().values())


def test_wada_invariance_at_third(figure8):
    rho = Character.parse("1/3")
    assert twisted_alexander(figure8, rho, remove=0).equivalent(twisted_alexander(figure8, rho, remove=1))


def test_trivial_character_has_pole_at_one(figure8):
    invariant = twisted_alexander(figure8, Character.trivial(1)).normalized()
    assert invariant.denominator.as_dict() == {0: -1, 1: 1}
    assert invariant.denominator(1) == 0
    with pytest.raises(PoleAtOne):
        alexander_at_one(figure8, Character.trivial(1))


def test_alexander_at_one_with_meridian_minus_one(figure8):
    value = alexander_at_one(figure8, Character.parse("1/2"))
    # Delta(-1) / |-1 - 1| with Delta = t^2 - 3t + 1
    assert abs(value) == pytest.approx(2.5, abs=1e-12)
    assert value.imag == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("value", ["1/4", "1/3", "1/6"])
def test_alexander_at_one_is_conjugation_equivariant(figure8, value):
    rho = Character.parse(value)
    direct = alexander_at_one(figure8, rho)
    assert alexander_at_one(figure8, rho.conjugate()) == pytest.approx(direct.conjugate(), abs=1e-12)


def swapped(p: GroupPresentation) -> GroupPresentation:
    def swap(w: Word) -> Word:
        return Word(tuple((1 - g, e) for g, e in w.letters))

    return GroupPresentation(
        name=f"{p.name}-swapped",
        generator_names=p.generator_names[::-1],
        generator_matrices=p.generator_matrices[::-1],
        relators=[swap(r) for r in p.relators],
        cusp_words=[swap(w) for w in p.cusp_words],
        abelianization=p.abelianization[::-1],
        epimorphism_to_z=p.epimorphism_to_z[::-1],
    )


@pytest.mark.parametrize("value", ["1/4", "1/3", "1/2"])
def test_alexander_at_one_independent_of_generator_order(figure8, trefoil, value):
    rho = Character.parse(value)
    for p in (figure8, trefoil):
        assert abs(alexander_at_one(swapped(p), rho)) == pytest.approx(
            abs(alexander_at_one(p, rho)), rel=1e-12
        )
