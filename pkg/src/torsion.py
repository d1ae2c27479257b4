import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import sympy as sp

from characters import Character, require_cusp_nontrivial, unit_value
from config import DEFAULT_TORSION_CONVENTION, TOLERANCES, TORSION_CONVENTIONS
from errors import (
    ConfigError,
    DegenerateDenominator,
    HypothesisFailed,
    NotAcyclic,
    PoleAtOne,
    ShapeError,
)
from group import GroupPresentation, Word
from transforms import Check

T = sp.Symbol("t")

Scalar = Union[sp.Expr, complex, float, int, Fraction]


def exact_unit(phase: Fraction) -> sp.Expr:
    """exp(2 pi i phase) in radicals where sympy knows them"""
    angle = 2 * sp.pi * sp.Rational(phase.numerator, phase.denominator)
    return sp.cos(angle) + sp.I * sp.sin(angle)


def _exact(c: Scalar) -> sp.Expr:
    if isinstance(c, sp.Basic):
        return c
    if isinstance(c, (int, Fraction)):
        c = Fraction(c)
        return sp.Rational(c.numerator, c.denominator)
    c = complex(c)
    return sp.nsimplify(c.real, rational=True) + sp.I * sp.nsimplify(c.imag, rational=True)


def _reduced(c: sp.Expr) -> sp.Expr:
    """Expanded coefficient, zero when it vanishes identically"""
    c = sp.expand(c)
    if c == 0:
        return sp.S.Zero
    if abs(complex(sp.N(c))) <= TOLERANCES.coefficient and c.equals(0) is not False:
        return sp.S.Zero
    return c


def _collect(expr: sp.Expr) -> Dict[int, sp.Expr]:
    grouped: Dict[int, sp.Expr] = {}
    for term in sp.Add.make_args(sp.expand(expr)):
        coefficient, exponent = term.as_coeff_exponent(T)
        grouped[int(exponent)] = grouped.get(int(exponent), sp.S.Zero) + coefficient
    terms = {}
    for k in sorted(grouped):
        c = _reduced(grouped[k])
        if c != 0:
            terms[k] = c
    return terms


@dataclass(frozen=True)
class LaurentPoly:
    """Laurent polynomial in t with exact algebraic coefficients"""

    expr: sp.Expr = sp.S.Zero

    @classmethod
    def from_dict(cls, coefficients: Dict[int, Scalar]) -> "LaurentPoly":
        return cls(sp.Add(*(_exact(c) * T ** int(k) for k, c in coefficients.items())))

    @classmethod
    def constant(cls, c: Scalar) -> "LaurentPoly":
        return cls(_exact(c))

    @classmethod
    def monomial(cls, c: Scalar, exponent: int) -> "LaurentPoly":
        return cls(_exact(c) * T**exponent)

    @cached_property
    def terms(self) -> Dict[int, sp.Expr]:
        return _collect(self.expr)

    def as_dict(self) -> Dict[int, sp.Expr]:
        return dict(self.terms)

    @cached_property
    def numeric_terms(self) -> Dict[int, complex]:
        return {k: complex(sp.N(c)) for k, c in self.terms.items()}

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def min_exponent(self) -> int:
        return min(self.terms, default=0)

    @property
    def max_exponent(self) -> int:
        return max(self.terms, default=0)

    def __add__(self, other: Union["LaurentPoly", Scalar]) -> "LaurentPoly":
        return LaurentPoly(sp.expand(self.expr + _as_poly(other).expr))

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(-self.expr)

    def __sub__(self, other: Union["LaurentPoly", Scalar]) -> "LaurentPoly":
        return LaurentPoly(sp.expand(self.expr - _as_poly(other).expr))

    def __mul__(self, other: Union["LaurentPoly", Scalar]) -> "LaurentPoly":
        return LaurentPoly(sp.expand(self.expr * _as_poly(other).expr))

    __rmul__ = __mul__
    __radd__ = __add__

    def inverse(self) -> "LaurentPoly":
        if len(self.terms) != 1:
            raise ValueError("Only monomials are invertible")
        (k, c), = self.terms.items()
        return LaurentPoly.monomial(sp.radsimp(1 / c), -k)

    def __call__(self, t: complex) -> complex:
        t = complex(t)
        return complex(sum(c * t**k for k, c in self.numeric_terms.items()))

    def normalized(self) -> "LaurentPoly":
        """Lowest exponent 0 and a positive real leading coefficient"""
        if self.is_zero:
            return self
        lead = self.terms[self.max_exponent]
        unit = sp.conjugate(lead) / sp.Abs(lead)
        low = self.min_exponent
        return LaurentPoly.from_dict(
            {k - low: sp.radsimp(sp.expand(c * unit)) for k, c in self.terms.items()}
        )

    def is_close(self, other: "LaurentPoly", tol: float = 1e-9) -> bool:
        a, b = self.numeric_terms, other.numeric_terms
        return all(abs(a.get(k, 0) - b.get(k, 0)) <= tol for k in set(a) | set(b))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k, c in self.terms.items():
            coef = _format_coefficient(c)
            if k == 0:
                monomial = coef
            else:
                power = "t" if k == 1 else f"t^{k}"
                if coef == "1":
                    monomial = power
                elif coef == "-1":
                    monomial = "-" + power
                else:
                    monomial = f"{coef}*{power}"
            parts.append(monomial)
        text = " + ".join(parts)
        return text.replace("+ -", "- ")


def _format_coefficient(c: sp.Expr) -> str:
    text = sp.sstr(c)
    return f"({text})" if isinstance(c, sp.Add) else text


def _as_poly(x: Union[LaurentPoly, Scalar]) -> LaurentPoly:
    return x if isinstance(x, LaurentPoly) else LaurentPoly.constant(x)


def _invert(x):
    return x.inverse() if isinstance(x, LaurentPoly) else 1 / x


def fox_derivative(w: Word, i: int, images: Sequence) -> Union[LaurentPoly, complex]:
    """d w / d a_i evaluated through images of the generators"""
    one = LaurentPoly.constant(1) if isinstance(images[0], LaurentPoly) else 1 + 0j
    result = one * 0
    prefix = one
    for gen, exp in w.letters:
        image = images[gen] if exp > 0 else _invert(images[gen])
        if gen == i:
            if exp > 0:
                result = result + prefix
            else:
                result = result - prefix * image
        prefix = prefix * image
    return result


def alexander_images(p: GroupPresentation, rho: Character) -> List[LaurentPoly]:
    """rho(a_i) t^{epim(a_i)} per generator, exact"""
    return [
        LaurentPoly.monomial(exact_unit(rho.phase_of_image(row)), p.epimorphism_to_z[i])
        for i, row in enumerate(p.abelianization)
    ]


def fox_jacobian(p: GroupPresentation, images: Sequence) -> List[List]:
    """Rows indexed by relators, columns by generators"""
    return [
        [fox_derivative(r, i, images) for i in range(len(p.generator_names))]
        for r in p.relators
    ]


def laurent_determinant(matrix: Sequence[Sequence[LaurentPoly]]) -> LaurentPoly:
    """Exact determinant: each row shifted to a polynomial, then fraction-free Bareiss"""
    if len(matrix) == 0:
        return LaurentPoly.constant(1)
    shifts = [min(e.min_exponent for e in row) for row in matrix]
    rows = [[sp.expand(e.expr * T ** (-s)) for e in row] for row, s in zip(matrix, shifts)]
    det = sp.Matrix(rows).det(method="bareiss")
    return LaurentPoly(sp.expand(sp.cancel(det) * T ** sum(shifts)))


@dataclass
class TwistedAlexander:
    numerator: LaurentPoly
    denominator: LaurentPoly
    removed_generator: int

    def __call__(self, t: complex) -> complex:
        den = self.denominator(t)
        if abs(den) <= TOLERANCES.compare:
            raise PoleAtOne(f"Denominator {self.denominator} vanishes at t = {t}")
        return self.numerator(t) / den

    def normalized(self) -> "TwistedAlexander":
        return TwistedAlexander(
            self.numerator.normalized(), self.denominator.normalized(), self.removed_generator
        )

    def equivalent(self, other: "TwistedAlexander", tol: float = 1e-9) -> bool:
        """Equal up to a unit c t^k"""
        left = (self.numerator * other.denominator).normalized()
        right = (other.numerator * self.denominator).normalized()
        return left.is_close(right, tol)

    def __str__(self) -> str:
        n = self.normalized()
        return f"({n.numerator}) / ({n.denominator})"


def twisted_alexander(
    p: GroupPresentation, rho: Character, remove: Optional[int] = None
) -> TwistedAlexander:
    """Wada invariant of a deficiency-one presentation"""
    if p.deficiency != 1:
        raise ShapeError(
            f"'{p.name}' has {len(p.generator_names)} generators and {len(p.relators)} relators, deficiency must be 1"
        )
    if not p.epimorphism_to_z:
        raise ShapeError(f"'{p.name}' has no epimorphism to Z")

    images = alexander_images(p, rho)
    one = LaurentPoly.constant(1)
    denominators = [image - one for image in images]
    if remove is None:
        remove = next((i for i, d in enumerate(denominators) if not d.is_zero), None)
        if remove is None:
            raise DegenerateDenominator(
                f"Every generator of '{p.name}' has rho(a) t^epim(a) = 1"
            )
    elif denominators[remove].is_zero:
        raise DegenerateDenominator(
            f"Generator '{p.generator_names[remove]}' has rho(a) t^epim(a) = 1 identically"
        )

    jacobian = fox_jacobian(p, images)
    minor = [[e for i, e in enumerate(row) if i != remove] for row in jacobian]
    return TwistedAlexander(laurent_determinant(minor), denominators[remove], remove)


def alexander_at_one(p: GroupPresentation, rho: Character, remove: Optional[int] = None) -> complex:
    invariant = twisted_alexander(p, rho, remove).normalized()
    if abs(invariant.denominator(1)) <= TOLERANCES.compare:
        raise PoleAtOne(
            f"Denominator {invariant.denominator} vanishes at t = 1 for rho = {rho}"
        )
    return invariant(1)


@dataclass
class TwistedChainComplex:
    """C_2 -> C_1 -> C_0 acting on row vectors: boundaries[q] maps C_q to C_{q-1}"""

    boundaries: Dict[int, np.ndarray]
    dimensions: List[int]
    twisting: Optional[Character] = None
    evaluation_point: complex = 1 + 0j

    @classmethod
    def from_presentation(
        cls, p: GroupPresentation, rho: Character, evaluation_point: complex = 1 + 0j
    ) -> "TwistedChainComplex":
        images = []
        for i, row in enumerate(p.abelianization):
            value = unit_value(rho.phase_of_image(row))
            power = p.epimorphism_to_z[i] if p.epimorphism_to_z else 0
            images.append(value * complex(evaluation_point) ** power)
        n = len(p.generator_names)
        boundary_2 = np.array(fox_jacobian(p, images), dtype=complex).reshape(len(p.relators), n)
        boundary_1 = np.array([[x - 1] for x in images], dtype=complex).reshape(n, 1)
        complex_ = cls({1: boundary_1, 2: boundary_2}, [1, n, len(p.relators)], rho, evaluation_point)
        complex_.check_boundary()
        return complex_

    @property
    def boundary_1(self) -> np.ndarray:
        return self.boundaries[1]

    @property
    def boundary_2(self) -> np.ndarray:
        return self.boundaries[2]

    @property
    def top(self) -> int:
        return len(self.dimensions) - 1

    def check_boundary(self) -> float:
        worst = 0.0
        for q in range(2, self.top + 1):
            product = self.boundaries[q] @ self.boundaries[q - 1]
            if product.size:
                worst = max(worst, float(np.max(np.abs(product))))
        if worst > TOLERANCES.compare * 100:
            raise ShapeError(f"Boundary of boundary is {worst:.3e}, not zero")
        return worst

    def ranks(self) -> Dict[int, int]:
        return {q: numeric_rank(self.boundaries[q]) for q in range(1, self.top + 1)}

    def homology(self) -> List[int]:
        ranks = self.ranks()
        return [
            self.dimensions[q] - ranks.get(q, 0) - ranks.get(q + 1, 0)
            for q in range(self.top + 1)
        ]

    def change_basis(self, q: int, matrix: np.ndarray) -> "TwistedChainComplex":
        """New basis of C_q given by the rows of matrix"""
        boundaries = dict(self.boundaries)
        if q in boundaries:
            boundaries[q] = matrix @ boundaries[q]
        if q + 1 in boundaries:
            boundaries[q + 1] = boundaries[q + 1] @ np.linalg.inv(matrix)
        return TwistedChainComplex(boundaries, list(self.dimensions), self.twisting, self.evaluation_point)


def numeric_rank(matrix: np.ndarray) -> int:
    """Singular values above rank * max(1, largest) count"""
    if matrix.size == 0:
        return 0
    singular = np.linalg.svd(matrix, compute_uv=False)
    return int(np.sum(singular > TOLERANCES.rank * max(1.0, float(singular[0]))))


def _independent_rows(block: np.ndarray, count: int) -> List[int]:
    """Indices of count well-conditioned rows, by QR with column pivoting on the transpose"""
    if count == 0:
        return []
    _, _, pivots = scipy.linalg.qr(block.T, pivoting=True, mode="economic")
    return sorted(int(i) for i in pivots[:count])


def reidemeister_torsion_magnitude(
    c: TwistedChainComplex,
    convention: str = DEFAULT_TORSION_CONVENTION,
    row_sets: Optional[Dict[int, Sequence[int]]] = None,
) -> float:
    """|tau| from a tau-chain of subbases; milnor is the reciprocal of turaev"""
    if convention not in TORSION_CONVENTIONS:
        raise ConfigError(f"Unknown torsion convention '{convention}'")
    homology = c.homology()
    if any(homology):
        raise NotAcyclic(
            f"Twisted complex has homology of dimensions {homology}, it is not acyclic"
        )

    ranks = c.ranks()
    chosen: Dict[int, List[int]] = {0: []}
    log_tau = 0.0
    for q in range(1, c.top + 1):
        complement = [i for i in range(c.dimensions[q - 1]) if i not in chosen[q - 1]]
        block = c.boundaries[q][:, complement]
        if row_sets is not None and q in row_sets:
            rows = sorted(row_sets[q])
        else:
            rows = _independent_rows(block, ranks[q])
        chosen[q] = rows
        square = block[rows, :]
        if square.shape[0] != square.shape[1]:
            raise ShapeError(f"Subbasis in degree {q} gives a {square.shape} block")
        det = abs(np.linalg.det(square)) if square.size else 1.0
        if det == 0 or numeric_rank(square) < square.shape[0]:
            raise ShapeError(f"Rows {rows} in degree {q} do not form a subbasis")
        log_tau += (-1) ** (q + 1) * math.log(det)

    if convention == "milnor":
        log_tau = -log_tau
    return math.exp(log_tau)


@dataclass
class TheoremReport:
    presentation: str
    character: str
    convention: str
    tau_magnitude: float
    tau_squared: float
    alexander: str
    alexander_at_one: Optional[complex]
    alexander_abs: Optional[float]
    cross_check: Optional[float]
    delta_rho: Optional[float] = None
    residuals: List[Check] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def delta_prediction(self) -> Optional[float]:
        """(delta_rho |A*(1)|)^2"""
        if self.delta_rho is None or self.alexander_abs is None:
            return None
        return (self.delta_rho * self.alexander_abs) ** 2

    @property
    def residuals_passed(self) -> bool:
        return all(check.passed for check in self.residuals)

    def to_dict(self) -> Dict[str, object]:
        at_one = None
        if self.alexander_at_one is not None:
            at_one = [self.alexander_at_one.real, self.alexander_at_one.imag]
        return {
            "presentation": self.presentation,
            "character": self.character,
            "torsion_convention": self.convention,
            "tau_abs": self.tau_magnitude,
            "tau_abs_squared": self.tau_squared,
            "twisted_alexander": self.alexander,
            "alexander_at_one": at_one,
            "alexander_at_one_abs": self.alexander_abs,
            "alexander_cross_check": self.cross_check,
            "delta_rho": self.delta_rho,
            "delta_rho_alexander_squared": self.delta_prediction,
            "residuals": [check.to_dict() for check in self.residuals],
            "ruelle_at_zero": None,
            "notes": list(self.notes),
        }

    def to_text(self, fmt: str = ".15g") -> str:
        lines = [
            f"presentation: {self.presentation}",
            f"character: {self.character}",
            f"torsion convention: {self.convention}",
            f"|tau_X(rho)|: {self.tau_magnitude:{fmt}}",
            f"|tau_X(rho)|^2: {self.tau_squared:{fmt}}",
            f"twisted Alexander invariant: {self.alexander}",
        ]
        if self.alexander_abs is not None:
            lines.append(f"|A*(1)|: {self.alexander_abs:{fmt}}")
        if self.cross_check is not None:
            lines.append(f"| |tau| - |A*(1)| |: {self.cross_check:{fmt}}")
        if self.delta_prediction is not None:
            lines.append(f"(delta_rho |A*(1)|)^2: {self.delta_prediction:{fmt}}")
        for check in self.residuals:
            status = "pass" if check.passed else "FAIL"
            lines.append(
                f"{check.name}: residual {check.residual:{fmt}} bound {check.bound:{fmt}} {status}"
            )
        lines.extend(self.notes)
        return "\n".join(lines) + "\n"


CONTINUATION_NOTE = (
    "R_rho(0) is defined by meromorphic continuation and is not computed; "
    "only the convergent-region identities above are checked numerically."
)
DELTA_NOTE = "|R_rho(0)| = (delta_rho |A*(1)|)^2 with delta_rho an external constant."


def theorem_report(
    p: GroupPresentation,
    rho: Character,
    residuals: Sequence[Check] = (),
    delta_rho: Optional[float] = None,
    convention: str = DEFAULT_TORSION_CONVENTION,
) -> TheoremReport:
    """Torsion side of R(0) = tau^2 next to the convergent-region residuals"""
    require_cusp_nontrivial(rho, p)

    chain = TwistedChainComplex.from_presentation(p, rho)
    try:
        tau = reidemeister_torsion_magnitude(chain, convention)
    except NotAcyclic as e:
        raise HypothesisFailed(f"h^1(rho) does not vanish: {e}") from e

    alexander_text = "undefined"
    at_one: Optional[complex] = None
    cross_check: Optional[float] = None
    notes = [CONTINUATION_NOTE, DELTA_NOTE]
    try:
        invariant = twisted_alexander(p, rho)
        alexander_text = str(invariant)
        at_one = alexander_at_one(p, rho, invariant.removed_generator)
        milnor = tau if convention == "milnor" else 1 / tau
        cross_check = abs(milnor - abs(at_one))
    except (ShapeError, DegenerateDenominator, PoleAtOne) as e:
        notes.append(f"twisted Alexander side unavailable: {e}")

    return TheoremReport(
        presentation=p.name,
        character=str(rho),
        convention=convention,
        tau_magnitude=tau,
        tau_squared=tau * tau,
        alexander=alexander_text,
        alexander_at_one=at_one,
        alexander_abs=None if at_one is None else abs(at_one),
        cross_check=cross_check,
        delta_rho=delta_rho,
        residuals=list(residuals),
        notes=notes,
    )
