import cmath
import math
from typing import Union

from errors import GammaPole

# Lanczos coefficients, g = 7
LANCZOS_G = 7
LANCZOS_P = (
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
LANCZOS_X0 = 0.99999999999980993

POLE_TOLERANCE = 1e-12


def is_gamma_pole(z: complex) -> bool:
    z = complex(z)
    if abs(z.imag) > POLE_TOLERANCE or z.real > POLE_TOLERANCE:
        return False
    return abs(z.real - round(z.real)) <= POLE_TOLERANCE


def lanczos_gamma(z: complex) -> complex:
    """Lanczos approximation with reflection for Re z < 1/2"""
    z = complex(z)
    if z.real < 0.5:
        # reflection
        return cmath.pi / (cmath.sin(cmath.pi * z) * lanczos_gamma(1 - z))
    z -= 1
    x = LANCZOS_X0
    for i, p in enumerate(LANCZOS_P):
        x += p / (z + i + 1)
    t = z + LANCZOS_G + 0.5
    return cmath.sqrt(2 * cmath.pi) * t ** (z + 0.5) * cmath.exp(-t) * x


def gamma(z: Union[complex, float]) -> Union[complex, float]:
    """Gamma function, raising GammaPole at 0, -1, -2, ..."""
    z = complex(z)
    if is_gamma_pole(z):
        raise GammaPole(f"Gamma has a pole at {z.real:g}")
    if z.imag == 0:
        return math.gamma(z.real)
    return lanczos_gamma(z)


def half_integer_product(k: int) -> float:
    """C_k = prod_{m<k} (m + 1/2), C_0 = 1"""
    return math.prod(m + 0.5 for m in range(k))
