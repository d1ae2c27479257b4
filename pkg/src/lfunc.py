"""Geodesic-side series: orbital sums, S-series, the Ruelle product and its identities"""

import cmath
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Sequence

from characters import unit_value
from config import DEFAULT_ABSCISSA, TOLERANCES
from errors import BelowAbscissa
from group import GeodesicClass, LengthSpectrum
from moebius import GeodesicInvariants, angle_distance, delta_gamma, reduce_angle
from transforms import Check, laplace_gaussian_kernel, quadrature_laplace


@dataclass(frozen=True)
class SeriesTerm:
    """One loxodromic class with its attached character value"""

    length: float
    holonomy_angle: float
    primitive_length: float
    multiplicity: int
    rho_phase: Fraction = Fraction(0)
    weight: int = 1
    word: str = ""

    @property
    def rho_value(self) -> complex:
        return unit_value(self.rho_phase)

    @property
    def is_primitive(self) -> bool:
        return self.multiplicity == 1

    @property
    def invariants(self) -> GeodesicInvariants:
        lam = cmath.exp(complex(self.length, self.holonomy_angle) / 2)
        return GeodesicInvariants(self.length, self.holonomy_angle, lam + 1 / lam)

    @property
    def delta(self) -> float:
        return delta_gamma(self.invariants)

    @property
    def a0(self) -> complex:
        return self.rho_value * self.primitive_length / self.delta

    @property
    def a1(self) -> complex:
        return self.rho_value * 2 * math.cos(self.holonomy_angle) * self.primitive_length / self.delta

    def coefficient(self, j: int) -> complex:
        return self.a0 if j == 0 else self.a1

    def power(self, n: int) -> "SeriesTerm":
        """The n-th power of a primitive term"""
        return replace(
            self,
            length=n * self.length,
            holonomy_angle=reduce_angle(n * self.holonomy_angle),
            multiplicity=n * self.multiplicity,
            rho_phase=(n * self.rho_phase) % 1,
            word=f"({self.word})^{n}" if self.word else "",
        )

    def matches(self, other: "SeriesTerm") -> bool:
        tol = TOLERANCES.invariant_match
        return (
            abs(self.length - other.length) <= tol * max(1, self.multiplicity)
            and angle_distance(self.holonomy_angle, other.holonomy_angle) <= tol * max(1, self.multiplicity)
            and self.rho_phase == other.rho_phase
        )


@dataclass
class SeriesValue:
    value: complex
    bound: float = 0.0


@dataclass
class SpectrumSeries:
    terms: List[SeriesTerm]
    cutoff: float
    label: str = ""

    def __post_init__(self):
        self.terms = sorted(self.terms, key=lambda t: (t.length, t.holonomy_angle, t.rho_phase))

    @classmethod
    def from_spectrum(cls, spectrum: LengthSpectrum, label: str = "") -> "SpectrumSeries":
        return cls(
            [_term_from_class(c) for c in spectrum],
            spectrum.max_geodesic_length,
            label,
        )

    @classmethod
    def single_primitive(
        cls,
        length: float,
        max_power: int,
        holonomy_angle: float = 0.0,
        rho_phase: Fraction = Fraction(0),
        weight: int = 1,
    ) -> "SpectrumSeries":
        """All powers n <= max_power of one primitive class"""
        base = SeriesTerm(length, holonomy_angle, length, 1, Fraction(rho_phase), weight, "g")
        return cls([base.power(n) for n in range(1, max_power + 1)], max_power * length, "single primitive")

    @property
    def primitives(self) -> List[SeriesTerm]:
        return [t for t in self.terms if t.is_primitive]

    def power_weight(self, base: SeriesTerm, n: int) -> int:
        target = base.power(n)
        return sum(t.weight for t in self.terms if t.multiplicity == n and t.matches(target))

    def has_power(self, base: SeriesTerm, n: int) -> bool:
        return self.power_weight(base, n) > 0

    def power_completed(self, max_power: int) -> "SpectrumSeries":
        """Add every missing power n <= max_power of every primitive"""
        terms = list(self.terms)
        for base in self.primitives:
            for n in range(2, max_power + 1):
                if not self.has_power(base, n):
                    terms.append(base.power(n))
        cutoff = max([self.cutoff] + [t.length for t in terms])
        return SpectrumSeries(terms, cutoff, self.label)

    def conjugate(self) -> "SpectrumSeries":
        return SpectrumSeries(
            [replace(t, rho_phase=(-t.rho_phase) % 1) for t in self.terms], self.cutoff, self.label
        )


def _term_from_class(c: GeodesicClass) -> SeriesTerm:
    return SeriesTerm(
        length=c.length,
        holonomy_angle=c.holonomy_angle,
        primitive_length=c.primitive_length,
        multiplicity=c.multiplicity,
        rho_phase=c.rho_phase,
        weight=c.weight,
        word=c.word,
    )


def compensated_sum(values: Iterable[complex]) -> complex:
    """Correctly rounded sum, independent of order"""
    values = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def _require_abscissa(z: complex, abscissa: float) -> None:
    if complex(z).real < abscissa:
        raise BelowAbscissa(
            f"Re z = {complex(z).real:g} is below the convergence abscissa {abscissa:g}"
        )


def counting_constant(terms: Sequence[SeriesTerm]) -> float:
    """K = max_l N(l) e^{-2l} over the weighted counting function"""
    count = 0
    k = 0.0
    for t in sorted(terms, key=lambda t: t.length):
        count += t.weight
        k = max(k, count * math.exp(-2 * t.length))
    return k


def truncation_bound(terms: Sequence[SeriesTerm], cutoff: float, z: complex, factor: float = 1.0) -> float:
    """K e^{(2 - Re z) L} / (Re z - 2), with K scaled by 2 Re z"""
    sigma = complex(z).real
    if not terms or sigma <= 2:
        return 0.0 if not terms else math.inf
    k = 2 * sigma * factor * counting_constant(terms)
    return k * math.exp((2 - sigma) * cutoff) / (sigma - 2)


def log_ruelle(spec: SpectrumSeries, z: complex, abscissa: float = DEFAULT_ABSCISSA) -> SeriesValue:
    """Sum over primitive classes of log(1 - rho e^{-z l})"""
    _require_abscissa(z, abscissa)
    z = complex(z)
    primitives = spec.primitives
    value = compensated_sum(
        t.weight * cmath.log(1 - t.rho_value * cmath.exp(-z * t.length)) for t in primitives
    )
    return SeriesValue(value, truncation_bound(primitives, spec.cutoff, z))


def ruelle_product(spec: SpectrumSeries, z: complex, abscissa: float = DEFAULT_ABSCISSA) -> SeriesValue:
    """Product over primitive classes of (1 - rho e^{-z l})"""
    logged = log_ruelle(spec, z, abscissa)
    return SeriesValue(cmath.exp(logged.value), logged.bound)


def log_s_series(spec: SpectrumSeries, j: int, z: complex, abscissa: float = DEFAULT_ABSCISSA) -> SeriesValue:
    """log S_j(z) = -sum over all classes of (a_j / l) e^{-z l}"""
    _require_abscissa(z, abscissa)
    z = complex(z)
    value = -compensated_sum(
        t.weight * t.coefficient(j) / t.length * cmath.exp(-z * t.length) for t in spec.terms
    )
    # |a_j| / l <= (1 + j) / (1 - e^{-l_min})^2
    shortest = min((t.length for t in spec.terms), default=1.0)
    factor = (1 + j) / (1 - math.exp(-shortest)) ** 2
    return SeriesValue(value, truncation_bound(spec.terms, spec.cutoff, z, factor))


def s_series(spec: SpectrumSeries, j: int, z: complex, abscissa: float = DEFAULT_ABSCISSA) -> SeriesValue:
    logged = log_s_series(spec, j, z, abscissa)
    return SeriesValue(cmath.exp(logged.value), logged.bound)


def missing_power_bound(spec: SpectrumSeries, z: complex) -> float:
    """Bound on the log-series terms present on only one side of the factorization

    Per primitive: sum over powers n of |w - w_n| |rho e^{-z l0}|^n / n, where
    w_n is the weight found for the n-th power, plus the tail past the cutoff.
    Powers whose primitive is absent count in full.
    """
    sigma = complex(z).real
    total = []
    for base in spec.primitives:
        x = math.exp(-sigma * base.length)
        n_max = int(spec.cutoff / base.length + TOLERANCES.invariant_match)
        absent = [
            abs(base.weight - spec.power_weight(base, n)) * x**n / n for n in range(2, n_max + 1)
        ]
        tail = x ** (n_max + 1) / ((n_max + 1) * (1 - x))
        total.append(math.fsum(absent) + base.weight * tail)
    orphans = [
        t.weight * math.exp(-sigma * t.length) / t.multiplicity
        for t in spec.terms
        if not t.is_primitive
        and not any(t.matches(b.power(t.multiplicity)) for b in spec.primitives)
    ]
    return math.fsum(total + orphans)


@dataclass
class RSResult:
    z: complex
    log_ruelle: complex
    log_s_combination: complex
    residual: float
    bound: float
    truncation: float = 0.0

    @property
    def passed(self) -> bool:
        return self.residual <= self.bound

    def as_check(self) -> Check:
        return Check(
            f"rs z={_format_point(self.z)}",
            self.residual,
            self.bound,
            detail=f"unseen classes beyond the cutoff <= {self.truncation:.3e}",
        )


def rs_factorization_check(spec: SpectrumSeries, z: complex, abscissa: float = DEFAULT_ABSCISSA) -> RSResult:
    """|log R(z) - (log S0(z) + log S0(z+2) - log S1(z+1))|

    The identity holds term by term for each primitive, so only powers missing
    from the spectrum can make the two sides differ. Classes beyond the cutoff
    drop out of both sides; their counting-function estimate is reported as
    truncation and does not enter the bound.
    """
    z = complex(z)
    log_r = log_ruelle(spec, z, abscissa)
    s0 = log_s_series(spec, 0, z, abscissa)
    s0_shift = log_s_series(spec, 0, z + 2, abscissa)
    s1 = log_s_series(spec, 1, z + 1, abscissa)
    combination = s0.value + s0_shift.value - s1.value
    residual = abs(log_r.value - combination)
    bound = missing_power_bound(spec, z) + 1e-12 * max(1.0, abs(log_r.value))
    truncation = log_r.bound + s0.bound + s0_shift.bound + s1.bound
    return RSResult(z, log_r.value, combination, residual, bound, truncation)


def theta_sum(spec: SpectrumSeries, j: int, t: float, times_exp: bool = False) -> SeriesValue:
    """H_j(t), or e^t H_j(t) when times_exp; the tail bound is heuristic"""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    shift = t if j == 0 else 0.0
    if times_exp:
        shift -= t
    norm = math.sqrt(4 * math.pi * t)
    value = compensated_sum(
        term.weight
        * term.coefficient(j)
        / norm
        * math.exp(-(term.length**2 / (4 * t) + shift + term.length))
        for term in spec.terms
    )
    if not spec.terms:
        return SeriesValue(value, 0.0)
    cutoff = spec.cutoff
    k = counting_constant(spec.terms)
    bound = 2 * k * cutoff * math.exp(-(cutoff**2) / (4 * t) + cutoff - shift) / norm
    return SeriesValue(value, bound)


def hyperbolic_laplace(spec: SpectrumSeries, j: int, z: complex) -> complex:
    """L(H_1)(z), or L(e^t H_0)(z) for j = 0, term by term from the Gaussian kernel transform"""
    return compensated_sum(
        t.weight * t.coefficient(j) * math.exp(-t.length) * laplace_gaussian_kernel(t.length, z)
        for t in spec.terms
    )


def _format_point(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"


@dataclass
class ShiftedLaplaceResult:
    z: complex
    closed: Dict[str, complex] = field(default_factory=dict)
    quadrature: Dict[str, complex] = field(default_factory=dict)
    targets: Dict[str, complex] = field(default_factory=dict)
    closed_residual: float = 0.0
    quadrature_residual: float = 0.0
    closed_bound: float = 0.0
    quadrature_bound: float = 0.0

    @property
    def passed(self) -> bool:
        return self.closed_residual <= self.closed_bound and self.quadrature_residual <= self.quadrature_bound

    def checks(self) -> List[Check]:
        label = _format_point(self.z)
        return [
            Check(f"shifted Laplace closed z={label}", self.closed_residual, self.closed_bound),
            Check(f"shifted Laplace quadrature z={label}", self.quadrature_residual, self.quadrature_bound),
        ]


def default_power_count(spec: SpectrumSeries, z: complex, digits: float = 45.0) -> int:
    """Powers needed until |e^{-z n l0}| is below e^{-digits}"""
    sigma = complex(z).real
    shortest = min((t.length for t in spec.primitives), default=1.0)
    return max(1, math.ceil(digits / (sigma * shortest)) + 1)


def shifted_laplace_check(
    spec: SpectrumSeries,
    z: complex,
    abscissa: float = DEFAULT_ABSCISSA,
    complete_powers: bool = True,
    quadrature_tol: float = 1e-7,
    closed_tol: float = 1e-10,
) -> ShiftedLaplaceResult:
    """L(H1)(z) - L(e^t H0)(z-1) - L(e^t H0)(z+1) = log R(z), both by closed form and by quadrature"""
    z = complex(z)
    if z.real <= abscissa:
        raise BelowAbscissa(
            f"Re z = {z.real:g} must exceed the convergence abscissa {abscissa:g}"
        )
    if complete_powers:
        spec = spec.power_completed(default_power_count(spec, z))

    targets = {
        "L(H1)(z)": -log_s_series(spec, 1, z + 1, abscissa).value,
        "L(e^t H0)(z-1)": -log_s_series(spec, 0, z, abscissa).value,
        "L(e^t H0)(z+1)": -log_s_series(spec, 0, z + 2, abscissa).value,
    }
    log_r = log_ruelle(spec, z, abscissa).value
    targets["log R(z)"] = log_r

    closed = {
        "L(H1)(z)": hyperbolic_laplace(spec, 1, z),
        "L(e^t H0)(z-1)": hyperbolic_laplace(spec, 0, z - 1),
        "L(e^t H0)(z+1)": hyperbolic_laplace(spec, 0, z + 1),
    }
    closed["log R(z)"] = _combination(closed)

    h1: Callable[[float], complex] = lambda t: theta_sum(spec, 1, t).value
    h0: Callable[[float], complex] = lambda t: theta_sum(spec, 0, t, times_exp=True).value
    quad_error = 0.0
    quadrature = {}
    for name, f, point in (
        ("L(H1)(z)", h1, z),
        ("L(e^t H0)(z-1)", h0, z - 1),
        ("L(e^t H0)(z+1)", h0, z + 1),
    ):
        result = quadrature_laplace(f, 0, point)
        quadrature[name] = result.value
        quad_error += result.error
    quadrature["log R(z)"] = _combination(quadrature)

    scale = max(1.0, max(abs(v) for v in targets.values()))
    tail = missing_power_bound(spec, z)

    def worst(values: Dict[str, complex]) -> float:
        return max(abs(values[key] - targets[key]) / scale for key in targets)

    return ShiftedLaplaceResult(
        z=z,
        closed=closed,
        quadrature=quadrature,
        targets=targets,
        closed_residual=worst(closed),
        quadrature_residual=worst(quadrature),
        closed_bound=closed_tol + tail,
        quadrature_bound=max(quadrature_tol, 10 * quad_error) + tail,
    )


def _combination(values: Dict[str, complex]) -> complex:
    return values["L(H1)(z)"] - values["L(e^t H0)(z-1)"] - values["L(e^t H0)(z+1)"]
