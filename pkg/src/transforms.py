import cmath
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special as sp_special
from scipy.integrate import IntegrationWarning, quad

from config import (
    DEFAULT_UNIPOTENT_CONVENTION,
    QUAD_ABS,
    QUAD_LIMIT,
    QUAD_LOG_FLOOR,
    TOLERANCES,
    UNIPOTENT_CONVENTIONS,
)
from errors import (
    ConfigError,
    GammaPole,
    NoConvergence,
    NonpositiveLength,
    PreconditionError,
    TransformPole,
)
from special import gamma, half_integer_product, is_gamma_pole

Number = Union[int, float, complex]

SQRT_PI = math.sqrt(math.pi)


@dataclass
class Check:
    """One residual compared against its bound"""

    name: str
    residual: float
    bound: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.residual <= self.bound

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "residual": self.residual,
            "bound": self.bound,
            "passed": self.passed,
            "detail": self.detail,
        }


def _integer_power(p: complex) -> Optional[int]:
    if abs(p.imag) > TOLERANCES.coefficient:
        return None
    n = round(p.real)
    if abs(p.real - n) > TOLERANCES.coefficient:
        return None
    return n


def z_power(z: complex, p: complex) -> complex:
    """z^p, exact for integer p, principal branch otherwise"""
    z = complex(z)
    p = complex(p)
    n = _integer_power(p)
    if n is not None:
        if z == 0 and n < 0:
            raise TransformPole(f"z^{n} has a pole at z = 0")
        return z**n
    if z.imag == 0 and z.real <= 0:
        raise TransformPole(f"z^{p} is on its branch cut at z = {z.real:g}")
    return cmath.exp(p * cmath.log(z))


@dataclass(frozen=True)
class TransformTerm:
    """coefficient * z^z_power * Gamma(gamma_argument)"""

    coefficient: complex
    z_power: complex
    gamma_argument: Optional[complex] = None

    @property
    def gamma_factor(self) -> Number:
        if self.gamma_argument is None:
            return 1.0
        return gamma(self.gamma_argument)

    @property
    def folded(self) -> complex:
        """Coefficient with the Gamma factor multiplied in"""
        return self.coefficient * self.gamma_factor

    def __call__(self, z: complex) -> complex:
        return self.folded * z_power(z, self.z_power)


@dataclass(frozen=True)
class TransformValue:
    """A closed-form transform as a sum of power terms in z"""

    terms: Tuple[TransformTerm, ...] = ()

    def __call__(self, z: Number) -> complex:
        return complex(sum(term(complex(z)) for term in self.terms))

    @property
    def poles(self) -> List[complex]:
        return [
            t.gamma_argument
            for t in self.terms
            if t.gamma_argument is not None and is_gamma_pole(t.gamma_argument)
        ]

    def __add__(self, other: "TransformValue") -> "TransformValue":
        return TransformValue(self.terms + other.terms)

    def __neg__(self) -> "TransformValue":
        return self.scaled(-1)

    def __sub__(self, other: "TransformValue") -> "TransformValue":
        return self + (-other)

    def scaled(self, c: Number) -> "TransformValue":
        return TransformValue(
            tuple(TransformTerm(c * t.coefficient, t.z_power, t.gamma_argument) for t in self.terms)
        )

    def reflected(self) -> "TransformValue":
        """The closed form at -z, integer powers only"""
        terms = []
        for t in self.terms:
            n = _integer_power(complex(t.z_power))
            if n is None:
                raise TransformPole(f"z^{t.z_power} cannot be reflected across the branch cut")
            terms.append(TransformTerm((-1) ** n * t.coefficient, t.z_power, t.gamma_argument))
        return TransformValue(tuple(terms))

    def evaluated_at(self, z0: Number) -> "TransformValue":
        """Constant closed form with the value at z0"""
        return TransformValue((TransformTerm(self(z0), 0),))

    def as_polynomial(self) -> Polynomial:
        """Coefficients in z, needs nonnegative integer powers"""
        coefficients: Dict[int, complex] = {}
        for t in self.terms:
            n = _integer_power(complex(t.z_power))
            if n is None or n < 0:
                raise TransformPole(f"z^{t.z_power} is not a polynomial term")
            coefficients[n] = coefficients.get(n, 0) + t.folded
        degree = max(coefficients, default=0)
        coef = np.zeros(degree + 1, dtype=complex)
        for n, c in coefficients.items():
            coef[n] = c
        return Polynomial(coef)


def power_law_transform(coefficient: Number, decay: Number, s: Number) -> TransformValue:
    """Laplace-Mellin transform of coefficient * t^{-decay}"""
    return TransformValue(
        (TransformTerm(complex(coefficient), 2 * complex(decay) - 2 * complex(s), complex(s) - complex(decay)),)
    )


# Gaussian moments


def pk_closed_form(k: int, t: float) -> float:
    """p_k(t) = int_0^inf e^{-t x^2} x^{2k} dx"""
    return SQRT_PI * half_integer_product(k) / 2 * t ** (-0.5 - k)


@lru_cache(maxsize=None)
def _unit_moment(k: int, full_line: bool) -> float:
    lower = -np.inf if full_line else 0.0
    value, _ = _quad_checked(lambda y: math.exp(-y * y) * y ** (2 * k), lower, np.inf)
    return value


def pk_quadrature(k: int, t: float, full_line: bool = False) -> float:
    """p_k(t) by quadrature, or the full-line moment when full_line"""
    return t ** (-0.5 - k) * _unit_moment(k, full_line)


def pk_transform(k: int, s: Number) -> TransformValue:
    """Laplace-Mellin transform of p_k as a closed form in z"""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    return power_law_transform(SQRT_PI * half_integer_product(k) / 2, k + 0.5, s)


def laplace_mellin_pk(k: int, s: Number, z: Number) -> complex:
    transform = pk_transform(k, s)
    if transform.poles:
        raise GammaPole(f"Laplace-Mellin transform of p_{k} has a pole at s = {s}")
    return transform(z)


def laplace_pk(k: int, z: Number) -> complex:
    """Laplace transform of p_k, entire in z"""
    return pk_transform(k, 0)(z)


def laplace_gaussian_kernel(l: float, z: Number) -> complex:
    """Laplace transform of (4 pi t)^{-1/2} e^{-l^2/4t}"""
    if l <= 0:
        raise NonpositiveLength(f"Geodesic length must be positive, got {l}")
    return cmath.exp(-l * complex(z)) / l


def gaussian_kernel(l: float, t: float) -> float:
    return math.exp(-l * l / (4 * t)) / math.sqrt(4 * math.pi * t)


# Identity and unipotent terms


class TermKind(Enum):
    IDENTITY0 = "L_expI0"
    IDENTITY1 = "L_I1"
    UNIPOTENT0 = "L_expU0"
    UNIPOTENT1 = "L_U1"


@dataclass(frozen=True)
class ModelHeatTerm:
    kind: TermKind
    volume: float = 1.0
    c_rho_gamma: float = 1.0
    convention: str = DEFAULT_UNIPOTENT_CONVENTION

    def __post_init__(self):
        if self.kind in (TermKind.IDENTITY0, TermKind.IDENTITY1) and self.volume <= 0:
            raise ConfigError(f"Volume must be positive, got {self.volume}")
        if self.convention not in UNIPOTENT_CONVENTIONS:
            raise ConfigError(f"Unknown unipotent convention '{self.convention}'")

    def small_t_expansion(self) -> List[Tuple[float, float]]:
        """(decay, coefficient) pairs with f(t) = sum coefficient * t^{-decay}, exact"""
        p0 = SQRT_PI / 2
        p1 = SQRT_PI / 4
        c = self.c_rho_gamma
        if self.kind is TermKind.IDENTITY0:
            return [(1.5, self.volume * p1)]
        if self.kind is TermKind.IDENTITY1:
            return [(1.5, 2 * self.volume * p1), (0.5, 2 * self.volume * p0)]
        scale = 1.0 if self.convention == "direct" else 0.5
        if self.kind is TermKind.UNIPOTENT0:
            return [(0.5, scale * c * p0)]
        return [(0.5, 2 * scale * c * p0)]

    def integrand(self, t: float) -> float:
        """e^t I0, I1, e^t U0 or U1 at t"""
        return sum(coef * t ** (-decay) for decay, coef in self.small_t_expansion())

    def laplace_mellin(self, s: Number) -> TransformValue:
        result = TransformValue()
        for decay, coef in self.small_t_expansion():
            result = result + power_law_transform(coef, decay, s)
        return result

    def laplace(self) -> TransformValue:
        return self.laplace_mellin(0)


def identity_term_transform(which: Union[TermKind, str], vol: float) -> TransformValue:
    kind = TermKind(which)
    if kind not in (TermKind.IDENTITY0, TermKind.IDENTITY1):
        raise ValueError(f"{kind.value} is not an identity term")
    return ModelHeatTerm(kind, volume=vol).laplace()


def unipotent_term_transform(
    which: Union[TermKind, str], c: float, convention: str = DEFAULT_UNIPOTENT_CONVENTION
) -> TransformValue:
    kind = TermKind(which)
    if kind not in (TermKind.UNIPOTENT0, TermKind.UNIPOTENT1):
        raise ValueError(f"{kind.value} is not a unipotent term")
    return ModelHeatTerm(kind, c_rho_gamma=c, convention=convention).laplace()


def cancellation_check(
    which: str,
    vol: float = 1.0,
    c: float = 1.0,
    convention: str = DEFAULT_UNIPOTENT_CONVENTION,
) -> Polynomial:
    """L(X1)(0) - L(e^t X0)(-z) - L(e^t X0)(z) as a polynomial in z, zero when the identity holds"""
    if which == "Identity":
        odd = identity_term_transform(TermKind.IDENTITY0, vol)
        even_part = identity_term_transform(TermKind.IDENTITY1, vol)
    elif which == "Unipotent":
        odd = unipotent_term_transform(TermKind.UNIPOTENT0, c, convention)
        even_part = unipotent_term_transform(TermKind.UNIPOTENT1, c, convention)
    else:
        raise ValueError(f"Unknown cancellation '{which}'")
    residual = even_part.evaluated_at(0) - odd.reflected() - odd
    return residual.as_polynomial()


# Quadrature oracle


@dataclass
class QuadratureResult:
    value: complex
    error: float


def _quad_checked(func: Callable[[float], float], a: float, b: float, points=None) -> Tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            if points is not None:
                return quad(
                    func, a, b, points=points,
                    epsabs=QUAD_ABS, epsrel=TOLERANCES.quad_rel, limit=QUAD_LIMIT,
                )
            return quad(func, a, b, epsabs=QUAD_ABS, epsrel=TOLERANCES.quad_rel, limit=QUAD_LIMIT)
        except IntegrationWarning as e:
            raise NoConvergence(f"Adaptive quadrature on [{a}, {b}] did not converge: {e}") from e


def _complex_quad(func: Callable[[float], complex], a: float, b: float, points=None) -> QuadratureResult:
    re, re_err = _quad_checked(lambda x: complex(func(x)).real, a, b, points)
    im, im_err = _quad_checked(lambda x: complex(func(x)).imag, a, b, points)
    return QuadratureResult(complex(re, im), math.hypot(re_err, im_err))


def quadrature_laplace(
    f: Callable[[float], Number],
    s: Number,
    z: Number,
    t_min: Optional[float] = None,
    t_max: float = math.inf,
) -> QuadratureResult:
    """int_{t_min}^{t_max} e^{-t z^2} t^{s-1} f(t) dt by adaptive quadrature"""
    z = complex(z)
    s = complex(s)
    z2 = z * z
    if math.isinf(t_max) and z2.real <= 0:
        raise PreconditionError(f"e^(-t z^2) does not decay for z = {z}")
    t_min = math.exp(QUAD_LOG_FLOOR) if t_min is None else t_min

    value = 0j
    error = 0.0
    split = min(1.0, t_max)
    if t_min < split:
        u_min = math.log(t_min)
        u_max = math.log(split)

        def log_part(u: float) -> complex:
            t = math.exp(u)
            return cmath.exp(-t * z2 + s * u) * f(t)

        points = [p for p in (-50.0, -20.0, -5.0) if u_min < p < u_max] or None
        part = _complex_quad(log_part, u_min, u_max, points)
        value += part.value
        error += part.error

    if t_max > split:

        def tail_part(t: float) -> complex:
            return cmath.exp(-t * z2 + (s - 1) * math.log(t)) * f(t)

        part = _complex_quad(tail_part, max(split, t_min), t_max)
        value += part.value
        error += part.error

    return QuadratureResult(value, error)


def _relative(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def gaussian_kernel_grid(
    lengths: Sequence[float] = (0.5, 1.0, 1.7, 3.0),
    points: Sequence[float] = (0.7, 1.0, 2.3),
    tol: float = 1e-8,
) -> List[Check]:
    """Quadrature against e^{-lz}/l"""
    checks = []
    for l in lengths:
        for z in points:
            closed = laplace_gaussian_kernel(l, z)
            numeric = quadrature_laplace(lambda t: gaussian_kernel(l, t), 0, z).value
            checks.append(Check(f"kernel l={l:g} z={z:g}", _relative(numeric, closed), tol))
    return checks


def pk_grid(
    ks: Sequence[int] = (0, 1, 2),
    ss: Sequence[float] = (1.0, 2.0, 3.0),
    points: Sequence[float] = (0.7, 1.0, 1.5, 2.3),
    tol: float = 1e-8,
) -> List[Check]:
    """Closed forms of p_k against quadrature, or against scipy's Gamma where the integral diverges"""
    checks = []
    for k in ks:
        for s in ss:
            for z in points:
                closed = laplace_mellin_pk(k, s, z)
                if s > k + 0.5:
                    numeric = quadrature_laplace(lambda t: pk_quadrature(k, t), s, z).value
                    label = "quad"
                else:
                    c = SQRT_PI * half_integer_product(k) / 2
                    numeric = c * z ** (1 + 2 * k - 2 * s) * sp_special.gamma(s - 0.5 - k)
                    label = "continued"
                checks.append(
                    Check(f"p_{k} s={s:g} z={z:g}", _relative(numeric, closed), tol, label)
                )
    return checks


def spot_checks(tol: float = 1e-12) -> List[Check]:
    """Exact values of the closed forms"""
    expected = [
        ("LM p_0 s=1 z=2", laplace_mellin_pk(0, 1, 2), math.pi / 4),
        ("LM p_1 s=2 z=1", laplace_mellin_pk(1, 2, 1), math.pi / 4),
        ("L p_0 z=1", laplace_pk(0, 1), -math.pi),
        ("L p_1 z=2", laplace_pk(1, 2), 8 * math.pi / 3),
        ("L e^t I0 z=1", identity_term_transform(TermKind.IDENTITY0, 1.0)(1), math.pi / 3),
        ("L I1 z=1", identity_term_transform(TermKind.IDENTITY1, 1.0)(1), -4 * math.pi / 3),
        ("L U1 z=2", unipotent_term_transform(TermKind.UNIPOTENT1, 1.0)(2), -2 * math.pi),
        ("L e^t U0 z=2", unipotent_term_transform(TermKind.UNIPOTENT0, 1.0)(2), -math.pi),
    ]
    return [Check(name, _relative(value, exact), tol) for name, value, exact in expected]


def evenness_grid(
    ks: Sequence[int] = (0, 1, 2),
    ss: Sequence[float] = (1.0, 2.0, 3.0),
    points: Sequence[float] = (0.7, 1.0, 1.5, 2.3),
    tol: float = 1e-12,
) -> List[Check]:
    checks = []
    for k in ks:
        for s in ss:
            if s <= k + 0.5:
                continue
            for z in points:
                plus = quadrature_laplace(lambda t: pk_quadrature(k, t), s, z).value
                minus = quadrature_laplace(lambda t: pk_quadrature(k, t), s, -z).value
                checks.append(Check(f"even p_{k} s={s:g} z=+-{z:g}", _relative(minus, plus), tol))
    return checks


def full_line_checks(
    ks: Sequence[int] = (0, 1, 2), ts: Sequence[float] = (0.5, 1.0, 2.0), tol: float = 1e-10
) -> List[Check]:
    """The full-line Gaussian moment is twice p_k"""
    checks = []
    for k in ks:
        for t in ts:
            full = pk_quadrature(k, t, full_line=True)
            checks.append(Check(f"full line k={k} t={t:g}", _relative(full, 2 * pk_closed_form(k, t)), tol))
    return checks


def model_term_grid(
    volume: float = 1.0,
    c_rho_gamma: float = 1.0,
    convention: str = DEFAULT_UNIPOTENT_CONVENTION,
    ss: Sequence[float] = (2.0, 3.0),
    points: Sequence[float] = (0.7, 1.5),
    tol: float = 1e-8,
) -> List[Check]:
    """Two-variable closed forms of the identity and unipotent terms against quadrature"""
    checks = []
    for kind in TermKind:
        term = ModelHeatTerm(kind, volume, c_rho_gamma, convention)
        for s in ss:
            closed = term.laplace_mellin(s)
            for z in points:
                numeric = quadrature_laplace(term.integrand, s, z).value
                checks.append(
                    Check(f"{kind.value} s={s:g} z={z:g}", _relative(numeric, closed(z)), tol)
                )
    return checks
