from fractions import Fraction

import numpy as np
import pytest

from characters import (
    Character,
    cusp_nontrivial,
    evaluate,
    require_cusp_nontrivial,
    to_fraction,
    unit_value,
)
from errors import ConfigError, HypothesisFailed, NoCuspData
from group import Word


def test_parse_rational_vector():
    assert Character.parse("1/3, 0").vector == (Fraction(1, 3), Fraction(0))
    assert Character.parse("[1/3, 0]").vector == (Fraction(1, 3), Fraction(0))


def test_decimal_is_read_exactly():
    assert to_fraction(0.25) == Fraction(1, 4)
    assert to_fraction("0.1") == Fraction(1, 10)


def test_bad_rational():
    with pytest.raises(ConfigError):
        to_fraction("one third")


def test_quarter_turns_are_exact():
    assert unit_value(Fraction(1, 4)) == 1j
    assert unit_value(Fraction(1, 2)) == -1
    assert unit_value(Fraction(5, 4)) == 1j


def test_unit_value_is_unimodular():
    assert abs(unit_value(Fraction(1, 3))) == pytest.approx(1.0, abs=1e-15)


def test_trivial_character():
    rho = Character.trivial(2)
    assert rho.is_trivial
    assert Character.from_values([1, 0]).is_trivial
    assert not Character.parse("1/4").is_trivial


def test_conjugate_negates_phases():
    assert Character.parse("1/3").conjugate().vector == (Fraction(-1, 3),)


def test_rank_mismatch(figure8):
    with pytest.raises(ConfigError):
        Character.parse("1/3, 0").phase(figure8.word("a"), figure8)


def test_evaluate_on_words(figure8, quarter):
    assert evaluate(quarter, figure8.word("a"), figure8) == 1j
    assert evaluate(quarter, figure8.word("a b"), figure8) == -1
    assert evaluate(quarter, figure8.word("a B"), figure8) == 1


def test_cusp_nontriviality(figure8, quarter):
    assert cusp_nontrivial(quarter, figure8)
    assert not cusp_nontrivial(Character.trivial(1), figure8)
    assert not cusp_nontrivial(Character.parse("1"), figure8)


def test_gate_refuses_trivial_character(figure8):
    with pytest.raises(HypothesisFailed, match="trivial on the cusp"):
        require_cusp_nontrivial(Character.trivial(1), figure8)


def test_no_cusp_words(cyclic):
    with pytest.raises(NoCuspData):
        cusp_nontrivial(Character.parse("1/3"), cyclic)
    with pytest.raises(NoCuspData, match="no cusp words"):
        require_cusp_nontrivial(Character.parse("1/3"), cyclic)


def random_word(rng, rank: int, length: int) -> Word:
    gens = rng.integers(0, rank, length)
    exps = rng.choice([-1, 1], length)
    return Word.from_letters([(int(g), int(e)) for g, e in zip(gens, exps)])


def test_multiplicative_on_random_words(figure8):
    rng = np.random.default_rng(5)
    rho = Character.parse("1/3")
    for _ in range(1000):
        u = random_word(rng, 2, int(rng.integers(0, 12)))
        v = random_word(rng, 2, int(rng.integers(0, 12)))
        assert rho.phase(u * v, figure8) == (rho.phase(u, figure8) + rho.phase(v, figure8)) % 1
        product = evaluate(rho, u, figure8) * evaluate(rho, v, figure8)
        assert abs(evaluate(rho, u * v, figure8) - product) <= 1e-14


def test_inverse_is_conjugate(figure8):
    rng = np.random.default_rng(8)
    rho = Character.parse("2/7")
    for _ in range(50):
        w = random_word(rng, 2, 9)
        assert rho.phase(w.inverse(), figure8) == (-rho.phase(w, figure8)) % 1
        assert evaluate(rho, w.inverse(), figure8) == pytest.approx(
            evaluate(rho, w, figure8).conjugate(), abs=1e-15
        )


@pytest.mark.parametrize("value", ["1/4", "1/3", "2/5", "0.3"])
def test_relators_map_to_one(figure8, trefoil, value):
    rho = Character.parse(value)
    for p in (figure8, trefoil):
        for r in p.relators:
            assert rho.phase(r, p) == 0
            assert evaluate(rho, r, p) == 1
