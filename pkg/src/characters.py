import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Sequence, Tuple, Union

from config import TOLERANCES
from errors import ConfigError, HypothesisFailed, NoCuspData

if TYPE_CHECKING:
    from group import GroupPresentation, Word

Rational = Union[Fraction, int, float, str]

# Exact values at quarter turns
_QUARTER_TURNS = {
    Fraction(0): 1 + 0j,
    Fraction(1, 4): 1j,
    Fraction(1, 2): -1 + 0j,
    Fraction(3, 4): -1j,
}


def to_fraction(value: Rational) -> Fraction:
    """Parse '1/3', '0.25', 0.1 or 2 exactly"""
    try:
        if isinstance(value, float):
            return Fraction(repr(value))
        if isinstance(value, str):
            return Fraction(value.strip())
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise ConfigError(f"Invalid rational '{value}': {e}") from e


def unit_value(phase: Fraction) -> complex:
    """exp(2 pi i phase) for a phase in full turns"""
    phase = phase % 1
    if phase in _QUARTER_TURNS:
        return _QUARTER_TURNS[phase]
    return cmath.exp(2j * math.pi * float(phase))


@dataclass(frozen=True)
class Character:
    """Rank-one unitary character, angles in full turns per abelianization coordinate"""

    vector: Tuple[Fraction, ...]

    @classmethod
    def from_values(cls, values: Sequence[Rational]) -> "Character":
        return cls(tuple(to_fraction(v) for v in values))

    @classmethod
    def parse(cls, text: str) -> "Character":
        """Parse '1/3, 0' or '[1/3, 0]'"""
        text = text.strip().strip("[]")
        if not text:
            return cls(())
        return cls.from_values([part for part in text.split(",")])

    @classmethod
    def trivial(cls, rank: int) -> "Character":
        return cls(tuple(Fraction(0) for _ in range(rank)))

    @property
    def rank(self) -> int:
        return len(self.vector)

    @property
    def is_trivial(self) -> bool:
        return all(v % 1 == 0 for v in self.vector)

    def conjugate(self) -> "Character":
        return Character(tuple(-v for v in self.vector))

    def phase_of_image(self, image: Sequence[int]) -> Fraction:
        """<v, ab(w)> mod 1"""
        if len(image) != self.rank:
            raise ConfigError(
                f"Character has {self.rank} entries, abelianization has rank {len(image)}"
            )
        return sum((v * n for v, n in zip(self.vector, image)), Fraction(0)) % 1

    def phase(self, w: "Word", p: "GroupPresentation") -> Fraction:
        return self.phase_of_image(p.abelian_image(w))

    def __str__(self) -> str:
        return "[" + ", ".join(str(v) for v in self.vector) + "]"


def evaluate(rho: Character, w: "Word", p: "GroupPresentation") -> complex:
    """rho(w) through the abelianization"""
    return unit_value(rho.phase(w, p))


def _distance_to_integer(phase: Fraction) -> Fraction:
    phase = phase % 1
    return min(phase, 1 - phase)


def cusp_nontrivial(rho: Character, p: "GroupPresentation") -> bool:
    if not p.cusp_words:
        raise NoCuspData(f"Presentation '{p.name}' has no cusp words")
    return any(
        _distance_to_integer(rho.phase(w, p)) > TOLERANCES.character
        for w in p.cusp_words
    )


def require_cusp_nontrivial(rho: Character, p: "GroupPresentation") -> None:
    """Gate for every pipeline that needs a nontrivial restriction to the cusp

    Raises NoCuspData when the presentation declares no cusp words.
    """
    if not cusp_nontrivial(rho, p):
        raise HypothesisFailed(
            f"rho = {rho} is trivial on the cusp subgroup of '{p.name}'; "
            "the identities need a character that is nontrivial on the cusp"
        )
