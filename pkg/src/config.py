from dataclasses import dataclass, fields

from rich.console import Console

VERSION = "v0.1.0"
TITLE = "ruelle-lab"

DEFAULT_ABSCISSA = 2.1  # geodesic counting grows like e^{2L}
MIN_ABSCISSA = 2.0
DEFAULT_MAX_LENGTH = 3.0
DEFAULT_MAX_WORD_LENGTH = 8
DEFAULT_SEED = 20240607
DEFAULT_OUTPUT_DIR = "out"
VERIFY_POINTS = (2.5, 3.0, 3.0 + 1.0j)
SHIFTED_LAPLACE_POINT = 3.0

OUTPUT_DIGITS = 15
FLOAT_FORMAT = f".{OUTPUT_DIGITS}g"

QUAD_LIMIT = 200
QUAD_LOG_FLOOR = -200.0  # lower cut of u = ln t on (0, 1]
QUAD_ABS = 1e-15

UNIPOTENT_CONVENTIONS = ("halved", "direct")
DEFAULT_UNIPOTENT_CONVENTION = "halved"
TORSION_CONVENTIONS = ("milnor", "turaev")
DEFAULT_TORSION_CONVENTION = "milnor"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3
EXIT_HYPOTHESIS = 4
EXIT_RESIDUAL = 5

SPECTRUM_COLUMNS = [
    "l",
    "theta",
    "l0",
    "mu",
    "rho_re",
    "rho_im",
    "a0_re",
    "a0_im",
    "a1_re",
    "a1_im",
    "word",
]


@dataclass
class Tolerances:
    """Numerical thresholds read by the library at call time"""

    compare: float = 1e-10
    renormalize: float = 1e-12
    unimodular: float = 1e-9
    relator: float = 1e-8
    invariant_match: float = 1e-8
    character: float = 1e-12
    rank: float = 1e-8
    coefficient: float = 1e-12
    quad_rel: float = 1e-10

    def update(self, **overrides: float) -> None:
        names = {f.name for f in fields(self)}
        for key, value in overrides.items():
            if key not in names:
                raise KeyError(f"Unknown tolerance '{key}'")
            setattr(self, key, float(value))

    def reset(self) -> None:
        for f in fields(self):
            setattr(self, f.name, f.default)


TOLERANCES = Tolerances()

console = Console()
