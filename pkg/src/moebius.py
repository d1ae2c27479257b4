import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from config import TOLERANCES
from errors import NonUnimodular, NotLoxodromic


class ElementClass(Enum):
    IDENTITY = "Identity"
    PARABOLIC = "Parabolic"
    ELLIPTIC = "Elliptic"
    LOXODROMIC = "Loxodromic"


def reduce_angle(theta: float) -> float:
    """Reduce an angle to (-pi, pi]"""
    theta = math.remainder(theta, 2 * math.pi)
    if theta <= -math.pi + TOLERANCES.compare:
        return math.pi
    return theta


def angle_distance(x: float, y: float) -> float:
    """Distance between two angles on the circle"""
    return abs(math.remainder(x - y, 2 * math.pi))


@dataclass(frozen=True, eq=False)
class MoebiusElement:
    """A matrix [[a, b], [c, d]] of SL(2,C), read up to sign"""

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls) -> "MoebiusElement":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @classmethod
    def checked(cls, a, b, c, d) -> "MoebiusElement":
        """Build an element, refusing determinants away from 1"""
        g = cls(complex(a), complex(b), complex(c), complex(d))
        g.require_unimodular()
        return g

    @property
    def entries(self) -> Tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def require_unimodular(self) -> None:
        drift = abs(self.det - 1)
        if drift > TOLERANCES.unimodular:
            raise NonUnimodular(f"|det - 1| = {drift:.3e} for {self}")

    def renormalized(self) -> "MoebiusElement":
        det = self.det
        if abs(det - 1) <= TOLERANCES.renormalize:
            return self
        root = cmath.sqrt(det)
        return MoebiusElement(self.a / root, self.b / root, self.c / root, self.d / root)

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        return MoebiusElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        ).renormalized()

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement(self.d, -self.b, -self.c, self.a).renormalized()

    def power(self, n: int) -> "MoebiusElement":
        base = self if n >= 0 else self.inverse()
        result = MoebiusElement.identity()
        for _ in range(abs(n)):
            result = result @ base
        return result

    def is_close(self, other: "MoebiusElement", tol: Optional[float] = None) -> bool:
        """Equality in PSL(2,C) within tol"""
        tol = TOLERANCES.compare if tol is None else tol
        plus = max(abs(x - y) for x, y in zip(self.entries, other.entries))
        minus = max(abs(x + y) for x, y in zip(self.entries, other.entries))
        return min(plus, minus) <= tol

    # Equality is up to tolerance, so elements are unhashable.
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MoebiusElement):
            return NotImplemented
        return self.is_close(other)

    def scale(self) -> float:
        return max(1.0, max(abs(z) for z in self.entries))


@dataclass(frozen=True)
class GeodesicInvariants:
    length: float
    holonomy_angle: float
    trace: complex

    @property
    def eigenvalue(self) -> complex:
        """The eigenvalue of modulus > 1, up to sign"""
        return cmath.exp(complex(self.length, self.holonomy_angle) / 2)

    def power(self, n: int) -> "GeodesicInvariants":
        """Invariants of the n-th power"""
        lam = self.eigenvalue**n
        return GeodesicInvariants(
            n * self.length, reduce_angle(n * self.holonomy_angle), lam + 1 / lam
        )

    def matches(self, other: "GeodesicInvariants", tol: Optional[float] = None) -> bool:
        tol = TOLERANCES.invariant_match if tol is None else tol
        return (
            abs(self.length - other.length) <= tol
            and angle_distance(self.holonomy_angle, other.holonomy_angle) <= tol
        )


def classify(g: MoebiusElement) -> ElementClass:
    """Identity, Parabolic, Elliptic or Loxodromic"""
    g.require_unimodular()
    tol = TOLERANCES.compare * g.scale()
    if g.is_close(MoebiusElement.identity(), tol):
        return ElementClass.IDENTITY
    tr2 = g.trace * g.trace
    if abs(tr2 - 4) <= tol:
        return ElementClass.PARABOLIC
    if abs(tr2.imag) <= tol and 0 <= tr2.real < 4:
        return ElementClass.ELLIPTIC
    return ElementClass.LOXODROMIC


def geodesic_invariants(g: MoebiusElement) -> GeodesicInvariants:
    kind = classify(g)
    if kind is not ElementClass.LOXODROMIC:
        raise NotLoxodromic(f"{kind.value} element has no closed geodesic")

    tr = g.trace
    disc = cmath.sqrt(tr * tr - 4)
    lam = max((tr + disc) / 2, (tr - disc) / 2, key=abs)
    length = 2 * math.log(abs(lam))
    theta = reduce_angle(2 * cmath.phase(lam))
    return GeodesicInvariants(length, theta, tr)


def delta_gamma(inv: GeodesicInvariants) -> float:
    """det(I - A^s) = |1 - e^{-l + i theta}|^2"""
    x = math.exp(-inv.length)
    return (1 - x) ** 2 + 2 * x * (1 - math.cos(inv.holonomy_angle))
