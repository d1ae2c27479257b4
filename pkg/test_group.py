import math
from dataclasses import replace

import pytest

from characters import Character
from errors import InconsistentPresentation, NonpositiveLength, PresentationError
from group import (
    Word,
    enumerate_words,
    expand_presentation,
    length_spectrum,
    parse_word,
    primitive_decomposition,
)
from moebius import MoebiusElement


def test_free_reduction():
    w = Word.from_letters([(0, 1), (1, 1), (1, -1), (0, 1)])
    assert w.letters == ((0, 1), (0, 1))
    assert (w * w.inverse()).letters == ()


def test_cyclic_reduction():
    assert parse_word("a b A", ["a", "b"]).is_cyclically_reduced() is False
    assert parse_word("a b a", ["a", "b"]).is_cyclically_reduced()


def test_compact_and_spaced_words_agree():
    names = ["a", "b"]
    assert parse_word("abAB", names) == parse_word("a b A B", names)


def test_multi_letter_generators():
    names = ["x0", "x1"]
    w = parse_word("x0 X1 x0", names)
    assert w.to_string(names) == "x0 X1 x0"


def test_unknown_generator():
    with pytest.raises(PresentationError):
        parse_word("a c", ["a", "b"])


@pytest.mark.parametrize("depth, count", [(1, 4), (2, 16), (3, 52)])
def test_enumeration_counts(figure8, depth, count):
    words = [w for w, _ in enumerate_words(figure8, depth)]
    assert len(words) == count
    assert len(set(words)) == count


def test_enumeration_matches_evaluation(figure8):
    for w, matrix in enumerate_words(figure8, 3):
        assert matrix.is_close(figure8.evaluate(w), 1e-12)


def test_shipped_presentations_validate(figure8, trefoil, cyclic):
    for p in (figure8, trefoil, cyclic):
        p.validate()
    assert figure8.deficiency == 1
    assert figure8.rank == 1


def test_bad_relator(figure8):
    broken = replace(figure8, relators=[figure8.word("a b")])
    with pytest.raises(InconsistentPresentation, match="identity"):
        broken.validate()


def test_relator_with_abelian_image(cyclic):
    broken = replace(
        cyclic,
        generator_matrices=[MoebiusElement.identity()],
        relators=[cyclic.word("a")],
    )
    with pytest.raises(InconsistentPresentation, match="abelianization"):
        broken.validate()


def test_cusp_word_must_be_parabolic(figure8):
    broken = replace(figure8, cusp_words=[figure8.word("a b")])
    with pytest.raises(InconsistentPresentation, match="Parabolic"):
        broken.validate()


def test_expansion_keeps_presentation_valid(figure8):
    expanded = expand_presentation(figure8, figure8.word("a b"))
    expanded.validate()
    assert expanded.generator_names == ["a", "b", "x0"]
    assert expanded.deficiency == figure8.deficiency
    assert expanded.abelianization[-1] == [2]
    assert expanded.epimorphism_to_z[-1] == 2


def test_cyclic_spectrum_powers(cyclic):
    spectrum = length_spectrum(cyclic, Character.trivial(1), 5.0, 4)
    l0 = 2 * math.log(2)
    assert [c.multiplicity for c in spectrum] == [1, 2, 3]
    for c, n in zip(spectrum, (1, 2, 3)):
        assert c.length == pytest.approx(n * l0, abs=1e-12)
        assert c.primitive_length == pytest.approx(l0, abs=1e-12)
        assert c.orientation_pair
        assert c.weight == 2


def test_cyclic_spectrum_with_complex_character(cyclic):
    spectrum = length_spectrum(cyclic, Character.parse("1/3"), 3.0, 2)
    # a and its inverse carry conjugate characters
    assert [c.multiplicity for c in spectrum] == [1, 1, 2, 2]
    assert all(c.weight == 1 for c in spectrum)


def test_nonpositive_cutoff(cyclic):
    with pytest.raises(NonpositiveLength):
        length_spectrum(cyclic, Character.trivial(1), 0.0, 4)


def test_primitive_decomposition(cyclic):
    spectrum = length_spectrum(cyclic, Character.trivial(1), 2.0, 1)
    l0, mu = primitive_decomposition(cyclic.word("a a a"), spectrum.classes, cyclic)
    assert mu == 3
    assert l0 == pytest.approx(2 * math.log(2), abs=1e-12)


def test_decomposition_defaults_to_primitive(cyclic):
    l0, mu = primitive_decomposition(cyclic.word("a a"), [], cyclic)
    assert mu == 1
    assert l0 == pytest.approx(4 * math.log(2), abs=1e-12)


def test_figure8_spectrum(figure8_spectrum):
    assert len(figure8_spectrum) > 0
    shortest = figure8_spectrum[0]
    assert shortest.length == pytest.approx(1.08707015, abs=1e-6)
    assert abs(shortest.holonomy_angle) == pytest.approx(1.722768, abs=1e-5)
    lengths = [c.length for c in figure8_spectrum]
    assert lengths == sorted(lengths)
    assert all(c.length <= 3.0 + 1e-8 for c in figure8_spectrum)


def test_figure8_spectrum_is_stable(figure8, quarter, figure8_spectrum):
    deeper = length_spectrum(figure8, quarter, 3.0, 10)

    def key(entries):
        return sorted((round(l, 8), round(t, 6), m) for l, t, m in entries)

    a = key(figure8_spectrum.as_multiset(3.0))
    b = key(deeper.as_multiset(3.0))
    assert len(a) == len(b)
    for (l1, t1, m1), (l2, t2, m2) in zip(a, b):
        assert l1 == pytest.approx(l2, abs=1e-8)
        assert t1 == pytest.approx(t2, abs=1e-8)
        assert m1 == m2
    assert deeper[0].length == pytest.approx(figure8_spectrum[0].length, abs=1e-10)
