import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from characters import Character, unit_value
from config import TOLERANCES, console
from errors import InconsistentPresentation, NonpositiveLength, PresentationError
from moebius import (
    ElementClass,
    GeodesicInvariants,
    MoebiusElement,
    classify,
    geodesic_invariants,
)

Letter = Tuple[int, int]


@dataclass(frozen=True)
class Word:
    """Freely reduced word, letters are (generator index, +1 or -1)"""

    letters: Tuple[Letter, ...] = ()

    @classmethod
    def from_letters(cls, letters: Sequence[Letter]) -> "Word":
        reduced: List[Letter] = []
        for gen, exp in letters:
            if exp not in (1, -1):
                raise ValueError(f"Exponent must be +1 or -1, got {exp}")
            if reduced and reduced[-1] == (gen, -exp):
                reduced.pop()
            else:
                reduced.append((gen, exp))
        return cls(tuple(reduced))

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word.from_letters(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def power(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return Word.from_letters(base.letters * abs(n))

    def is_cyclically_reduced(self) -> bool:
        if len(self.letters) < 2:
            return True
        (g0, e0), (g1, e1) = self.letters[0], self.letters[-1]
        return not (g0 == g1 and e0 == -e1)

    def to_string(self, names: Sequence[str]) -> str:
        tokens = []
        for gen, exp in self.letters:
            name = names[gen]
            tokens.append(name if exp > 0 else name.swapcase())
        return " ".join(tokens)


def parse_word(text: str, names: Sequence[str]) -> Word:
    """Parse 'a b A B' (capital = inverse), or 'abAB' for one-letter names"""
    lookup: Dict[str, Letter] = {}
    for i, name in enumerate(names):
        lookup[name] = (i, 1)
        lookup[name.swapcase()] = (i, -1)

    text = text.strip()
    if " " in text or not all(len(n) == 1 for n in names):
        tokens = text.split()
    else:
        tokens = list(text)

    letters = []
    for token in tokens:
        if token not in lookup:
            raise PresentationError(f"Unknown generator '{token}' in word '{text}'")
        letters.append(lookup[token])
    return Word.from_letters(letters)


@dataclass
class GroupPresentation:
    name: str
    generator_names: List[str]
    generator_matrices: List[MoebiusElement]
    relators: List[Word]
    cusp_words: List[Word]
    abelianization: List[List[int]]
    epimorphism_to_z: List[int]
    hyperbolic: bool = True
    cusps: int = 1

    @property
    def rank(self) -> int:
        """Rank b of H_1 modulo torsion"""
        return len(self.abelianization[0]) if self.abelianization else 0

    @property
    def deficiency(self) -> int:
        return len(self.generator_names) - len(self.relators)

    def word(self, text: str) -> Word:
        return parse_word(text, self.generator_names)

    def word_string(self, w: Word) -> str:
        return w.to_string(self.generator_names)

    def evaluate(self, w: Word) -> MoebiusElement:
        result = MoebiusElement.identity()
        for gen, exp in w.letters:
            g = self.generator_matrices[gen]
            result = result @ (g if exp > 0 else g.inverse())
        return result

    def abelian_image(self, w: Word) -> Tuple[int, ...]:
        image = [0] * self.rank
        for gen, exp in w.letters:
            for j, n in enumerate(self.abelianization[gen]):
                image[j] += exp * n
        return tuple(image)

    def epimorphism_image(self, w: Word) -> int:
        return sum(exp * self.epimorphism_to_z[gen] for gen, exp in w.letters)

    def validate(self) -> None:
        """Check relators, cusp words and the abelianization against the matrices"""
        n = len(self.generator_names)
        if len(self.generator_matrices) != n or len(self.abelianization) != n:
            raise InconsistentPresentation(
                f"'{self.name}': {n} generators but {len(self.generator_matrices)} matrices "
                f"and {len(self.abelianization)} abelianization rows"
            )
        if len({len(row) for row in self.abelianization}) > 1:
            raise InconsistentPresentation(f"'{self.name}': ragged abelianization matrix")
        if self.epimorphism_to_z and len(self.epimorphism_to_z) != n:
            raise InconsistentPresentation(
                f"'{self.name}': epimorphism has {len(self.epimorphism_to_z)} entries for {n} generators"
            )

        for g in self.generator_matrices:
            g.require_unimodular()

        identity = MoebiusElement.identity()
        for r in self.relators:
            value = self.evaluate(r)
            if not value.is_close(identity, TOLERANCES.relator * value.scale()):
                raise InconsistentPresentation(
                    f"Relator '{self.word_string(r)}' does not evaluate to the identity"
                )
            if any(self.abelian_image(r)):
                raise InconsistentPresentation(
                    f"Relator '{self.word_string(r)}' has nonzero abelianization"
                )
            if self.epimorphism_to_z and self.epimorphism_image(r) != 0:
                raise InconsistentPresentation(
                    f"Relator '{self.word_string(r)}' is not killed by the epimorphism"
                )

        for w in self.cusp_words:
            kind = classify(self.evaluate(w))
            if kind is not ElementClass.PARABOLIC:
                raise InconsistentPresentation(
                    f"Cusp word '{self.word_string(w)}' is {kind.value}, not Parabolic"
                )


def expand_presentation(
    p: GroupPresentation, w: Word, name: Optional[str] = None
) -> GroupPresentation:
    """Elementary expansion: new generator g with relator g w^-1"""
    if name is None:
        name = next(
            f"x{i}" for i in range(len(p.generator_names) + 1)
            if f"x{i}" not in p.generator_names
        )
    index = len(p.generator_names)
    g = Word(((index, 1),))
    return GroupPresentation(
        name=f"{p.name}+{name}",
        generator_names=p.generator_names + [name],
        generator_matrices=p.generator_matrices + [p.evaluate(w)],
        relators=p.relators + [g * w.inverse()],
        cusp_words=list(p.cusp_words),
        abelianization=p.abelianization + [list(p.abelian_image(w))],
        epimorphism_to_z=(
            p.epimorphism_to_z + [p.epimorphism_image(w)] if p.epimorphism_to_z else []
        ),
        hyperbolic=p.hyperbolic,
        cusps=p.cusps,
    )


def enumerate_words(
    p: GroupPresentation, max_word_length: int
) -> Iterator[Tuple[Word, MoebiusElement]]:
    """Every freely reduced word of length <= max_word_length, once, with its matrix"""
    letters: List[Letter] = []
    images: List[MoebiusElement] = []
    for i, g in enumerate(p.generator_matrices):
        letters += [(i, 1), (i, -1)]
        images += [g, g.inverse()]

    level = [(Word(), MoebiusElement.identity())]
    for _ in range(max_word_length):
        next_level = []
        for word, matrix in level:
            last = word.letters[-1] if word.letters else None
            for letter, image in zip(letters, images):
                if last is not None and last == (letter[0], -letter[1]):
                    continue
                child = (Word(word.letters + (letter,)), matrix @ image)
                next_level.append(child)
                yield child
        level = next_level


@dataclass
class GeodesicClass:
    representative: Word
    word: str
    invariants: GeodesicInvariants
    primitive_length: float
    multiplicity: int
    rho_phase: Fraction = Fraction(0)
    orientation_pair: bool = False
    first_depth: int = 0

    @property
    def length(self) -> float:
        return self.invariants.length

    @property
    def holonomy_angle(self) -> float:
        return self.invariants.holonomy_angle

    @property
    def is_primitive(self) -> bool:
        return self.multiplicity == 1

    @property
    def rho_value(self) -> complex:
        return unit_value(self.rho_phase)

    @property
    def weight(self) -> int:
        """Number of conjugacy classes this entry stands for"""
        return 2 if self.orientation_pair else 1


@dataclass
class LengthSpectrum:
    classes: List[GeodesicClass]
    max_geodesic_length: float
    max_word_length: int
    completeness_caveat: bool = False
    character: Optional[Character] = None

    def __iter__(self) -> Iterator[GeodesicClass]:
        return iter(self.classes)

    def __len__(self) -> int:
        return len(self.classes)

    def __getitem__(self, i: int) -> GeodesicClass:
        return self.classes[i]

    @property
    def stabilized(self) -> bool:
        return not self.completeness_caveat

    def as_multiset(self, max_length: Optional[float] = None) -> List[Tuple[float, float, int]]:
        cut = self.max_geodesic_length if max_length is None else max_length
        return sorted(
            (c.length, c.holonomy_angle, c.multiplicity)
            for c in self.classes
            if c.length <= cut + TOLERANCES.invariant_match
        )


def _is_real_phase(phase: Fraction) -> bool:
    return phase % Fraction(1, 2) == 0


def _decompose(
    inv: GeodesicInvariants, phase: Fraction, primitives: Sequence[GeodesicClass]
) -> Tuple[float, int]:
    tol = TOLERANCES.invariant_match
    shortest = min((c.length for c in primitives), default=math.inf)
    if not primitives or shortest > inv.length:
        return inv.length, 1

    for mu in range(int(inv.length / shortest + tol), 1, -1):
        target = inv.length / mu
        for c in primitives:
            if abs(c.length - target) > tol * mu:
                continue
            if (mu * c.rho_phase - phase) % 1 != 0:
                continue
            if c.invariants.power(mu).matches(inv, tol * mu):
                return target, mu
    return inv.length, 1


def primitive_decomposition(
    w: Word,
    spectrum_so_far: Sequence[GeodesicClass],
    p: GroupPresentation,
    rho: Optional[Character] = None,
) -> Tuple[float, int]:
    """(l0, mu) with mu the largest power matching an already found primitive class"""
    rho = Character.trivial(p.rank) if rho is None else rho
    inv = geodesic_invariants(p.evaluate(w))
    primitives = [c for c in spectrum_so_far if c.is_primitive]
    return _decompose(inv, rho.phase(w, p), primitives)


class _ClassIndex:
    """Buckets classes by length for near-duplicate lookup"""

    def __init__(self, width: float = 1e-6):
        self.width = width
        self.buckets: Dict[int, List[GeodesicClass]] = {}

    def find(self, inv: GeodesicInvariants, phase: Fraction) -> Optional[GeodesicClass]:
        key = int(inv.length / self.width)
        for k in (key - 1, key, key + 1):
            for c in self.buckets.get(k, []):
                if c.rho_phase == phase and c.invariants.matches(inv):
                    return c
        return None

    def add(self, c: GeodesicClass) -> None:
        self.buckets.setdefault(int(c.length / self.width), []).append(c)


def length_spectrum(
    p: GroupPresentation,
    rho: Character,
    max_geodesic_length: float,
    max_word_length: int,
    verbose: bool = False,
) -> LengthSpectrum:
    """Deduplicated loxodromic classes with l <= max_geodesic_length, sorted by l"""
    if max_geodesic_length <= 0:
        raise NonpositiveLength(f"max_geodesic_length must be positive, got {max_geodesic_length}")
    p.validate()

    cutoff = max_geodesic_length + TOLERANCES.invariant_match
    index = _ClassIndex()
    found: List[GeodesicClass] = []
    primitives: List[GeodesicClass] = []
    depth_counts: Dict[int, int] = {}

    for w, matrix in enumerate_words(p, max_word_length):
        if not w.is_cyclically_reduced():
            continue
        if classify(matrix) is not ElementClass.LOXODROMIC:
            continue
        inv = geodesic_invariants(matrix)
        if inv.length > cutoff:
            continue
        phase = rho.phase(w, p)
        if index.find(inv, phase) is not None:
            continue

        l0, mu = _decompose(inv, phase, primitives)
        c = GeodesicClass(
            representative=w,
            word=p.word_string(w),
            invariants=inv,
            primitive_length=l0,
            multiplicity=mu,
            rho_phase=phase,
            orientation_pair=_is_real_phase(phase),
            first_depth=len(w),
        )
        index.add(c)
        found.append(c)
        if c.is_primitive:
            primitives.append(c)
        depth_counts[len(w)] = depth_counts.get(len(w), 0) + 1

    if verbose:
        for depth in sorted(depth_counts):
            console.print(f"[dim]depth {depth}: {depth_counts[depth]} new classes[/]")

    found.sort(key=lambda c: (c.length, c.holonomy_angle, c.rho_phase))
    caveat = any(c.first_depth > max_word_length - 2 for c in found)
    return LengthSpectrum(found, max_geodesic_length, max_word_length, caveat, rho)
