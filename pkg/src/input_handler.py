import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from characters import Character
from config import (
    DEFAULT_ABSCISSA,
    DEFAULT_MAX_LENGTH,
    DEFAULT_MAX_WORD_LENGTH,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_SEED,
    DEFAULT_TORSION_CONVENTION,
    DEFAULT_UNIPOTENT_CONVENTION,
    TORSION_CONVENTIONS,
    UNIPOTENT_CONVENTIONS,
    VERSION,
    Tolerances,
    console,
)
from errors import ConfigError, LabError
from utils import load_run_config, parse_character

VERIFY_TARGETS = ["transforms", "cancellation", "rs", "prop31"]
NEEDS_PRESENTATION = {"spectrum", "torsion", "report", "rs", "prop31"}


@dataclass
class RunConfig:
    command: str
    check: Optional[str]
    presentation_path: Optional[Path]
    character: Optional[Character]
    max_geodesic_length: float
    max_word_length: int
    abscissa: float
    volume: Optional[float]
    c_rho_gamma: Optional[float]
    delta_rho: Optional[float]
    output_dir: Path
    seed: int
    unipotent_convention: str = DEFAULT_UNIPOTENT_CONVENTION
    torsion_convention: str = DEFAULT_TORSION_CONVENTION
    tolerances: Dict[str, float] = field(default_factory=dict)
    verbose: bool = False

    @property
    def needs_presentation(self) -> bool:
        return self.command in NEEDS_PRESENTATION or self.check in NEEDS_PRESENTATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruelle-lab",
        description="Length spectra, Ruelle L-function identities and twisted torsion of Kleinian groups.",
    )
    parser.add_argument("--version", action="version", version=VERSION)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="Run configuration (TOML)")
    common.add_argument("--presentation", "-p", type=str, default=None, help="Presentation file (TOML)")
    common.add_argument("--rho", type=str, default=None, help='Character as rationals, e.g. "1/4" or "1/3,0"')
    common.add_argument("--max-length", type=float, default=None, help=f"Geodesic length cutoff (default: {DEFAULT_MAX_LENGTH})")
    common.add_argument("--max-word", type=int, default=None, help=f"Maximal word length (default: {DEFAULT_MAX_WORD_LENGTH})")
    common.add_argument("--abscissa", type=float, default=None, help=f"Convergence abscissa (default: {DEFAULT_ABSCISSA})")
    common.add_argument("--volume", type=float, default=None, help="Hyperbolic volume for the identity terms")
    common.add_argument("--c-rho-gamma", type=float, default=None, help="Constant of the unipotent term")
    common.add_argument("--delta-rho", type=float, default=None, help="Optional constant delta_rho for the report")
    common.add_argument("--out", type=str, default=None, help=f"Output directory (default: '{DEFAULT_OUTPUT_DIR}')")
    common.add_argument("--seed", type=int, default=None, help=f"Seed for random draws (default: {DEFAULT_SEED})")
    common.add_argument("--unipotent-convention", choices=UNIPOTENT_CONVENTIONS, default=None)
    common.add_argument("--torsion-convention", choices=TORSION_CONVENTIONS, default=None)
    common.add_argument("--verbose", "-V", action="store_true", help="Print what is being done")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="Enumerate the length spectrum into spectrum.csv")
    verify = sub.add_parser("verify", parents=[common], help="Check identities against their bounds")
    verify.add_argument("check", choices=VERIFY_TARGETS)
    sub.add_parser("torsion", parents=[common], help="Torsion report for the character")
    sub.add_parser("report", parents=[common], help="Spectrum, rs and prop31 checks, then torsion")
    return parser


def _pick(cli_value, file_values: Dict, key: str, default):
    if cli_value is not None:
        return cli_value
    return file_values.get(key, default)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge the config file with command-line overrides and validate"""
    file_values = load_run_config(args.config) if args.config else {}

    known = {
        "presentation", "rho", "max_geodesic_length", "max_word_length", "abscissa",
        "volume", "c_rho_gamma", "delta_rho", "output_dir", "seed",
        "unipotent_convention", "torsion_convention", "tolerances",
    }
    unknown = sorted(set(file_values) - known)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")

    presentation = _pick(args.presentation, file_values, "presentation", None)
    rho_value = _pick(args.rho, file_values, "rho", None)
    tolerances = file_values.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("[tolerances] must be a table")
    allowed = set(Tolerances.__dataclass_fields__)
    bad = sorted(set(tolerances) - allowed)
    if bad:
        raise ConfigError(f"Unknown tolerances: {', '.join(bad)}")

    config = RunConfig(
        command=args.command,
        check=getattr(args, "check", None),
        presentation_path=Path(presentation) if presentation else None,
        character=parse_character(rho_value) if rho_value is not None else None,
        max_geodesic_length=float(_pick(args.max_length, file_values, "max_geodesic_length", DEFAULT_MAX_LENGTH)),
        max_word_length=int(_pick(args.max_word, file_values, "max_word_length", DEFAULT_MAX_WORD_LENGTH)),
        abscissa=float(_pick(args.abscissa, file_values, "abscissa", DEFAULT_ABSCISSA)),
        volume=_optional_float(_pick(args.volume, file_values, "volume", None)),
        c_rho_gamma=_optional_float(_pick(args.c_rho_gamma, file_values, "c_rho_gamma", None)),
        delta_rho=_optional_float(_pick(args.delta_rho, file_values, "delta_rho", None)),
        output_dir=Path(_pick(args.out, file_values, "output_dir", DEFAULT_OUTPUT_DIR)),
        seed=int(_pick(args.seed, file_values, "seed", DEFAULT_SEED)),
        unipotent_convention=_pick(args.unipotent_convention, file_values, "unipotent_convention", DEFAULT_UNIPOTENT_CONVENTION),
        torsion_convention=_pick(args.torsion_convention, file_values, "torsion_convention", DEFAULT_TORSION_CONVENTION),
        tolerances={k: float(v) for k, v in tolerances.items()},
        verbose=args.verbose,
    )
    validate_config(config)
    return config


def _optional_float(value) -> Optional[float]:
    return None if value is None else float(value)


def validate_config(config: RunConfig) -> None:
    if config.needs_presentation:
        if config.presentation_path is None:
            raise ConfigError(f"'{config.check or config.command}' needs a presentation (--presentation or config)")
        if not config.presentation_path.exists():
            raise ConfigError(f"Presentation '{config.presentation_path}' does not exist")
    if config.max_geodesic_length <= 0:
        raise ConfigError("max_geodesic_length must be positive")
    if config.max_word_length < 1:
        raise ConfigError("max_word_length must be at least 1")
    if config.volume is not None and config.volume <= 0:
        raise ConfigError("volume must be positive")
    if config.delta_rho is not None and config.delta_rho <= 0:
        raise ConfigError("delta_rho must be positive")
    if config.unipotent_convention not in UNIPOTENT_CONVENTIONS:
        raise ConfigError(f"Unknown unipotent convention '{config.unipotent_convention}'")
    if config.torsion_convention not in TORSION_CONVENTIONS:
        raise ConfigError(f"Unknown torsion convention '{config.torsion_convention}'")
    for name, value in config.tolerances.items():
        if value <= 0:
            raise ConfigError(f"Tolerance '{name}' must be positive")


def parse_args(argv: Optional[List[str]] = None) -> RunConfig:
    """Parse command-line arguments"""
    args = build_parser().parse_args(argv)
    try:
        return resolve_config(args)
    except LabError as e:
        console.print(f"[bold red]Error:[/] {e}")
        sys.exit(e.exit_code)
