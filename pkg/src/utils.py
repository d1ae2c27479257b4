import csv
import json
import re
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from rich import box
from rich.table import Table

from characters import Character
from config import FLOAT_FORMAT, SPECTRUM_COLUMNS, console
from errors import ConfigError, LabError, PresentationError
from group import GroupPresentation, LengthSpectrum, parse_word
from lfunc import SpectrumSeries
from moebius import MoebiusElement
from transforms import Check

_TOML_LINE = re.compile(r"line (\d+)")


def _line_of(text: str, key: str) -> Optional[int]:
    """First line assigning key or opening table key"""
    pattern = re.compile(rf"^\s*(\[\s*)?{re.escape(key)}\b")
    for number, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return number
    return None


def _read_toml(path: Path) -> tuple[str, Dict[str, Any]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise PresentationError(f"Cannot read '{path}': {e}") from e
    try:
        return text, tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = _TOML_LINE.search(str(e))
        raise PresentationError(f"{path}: {e}", int(match.group(1)) if match else None) from e


def parse_complex(value: Any) -> complex:
    """[re, im] pair, or a bare real"""
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    raise ValueError(f"expected [re, im], got {value!r}")


def load_presentation(path: str | Path, validate: bool = True) -> GroupPresentation:
    """Load a TOML presentation file, line-numbered errors on failure"""
    path = Path(path)
    text, data = _read_toml(path)

    def fail(message: str, key: str) -> PresentationError:
        return PresentationError(f"{path}: {message}", _line_of(text, key))

    generators = data.get("generators")
    if not isinstance(generators, dict) or not generators:
        raise fail("missing [generators] table", "generators")

    names: List[str] = []
    matrices: List[MoebiusElement] = []
    for name, entries in generators.items():
        if not re.fullmatch(r"[a-z][a-z0-9_]*", name):
            raise fail(f"generator name '{name}' must be lowercase (capitals denote inverses)", name)
        if not isinstance(entries, list) or len(entries) != 4:
            raise fail(f"generator '{name}' needs 4 complex entries", name)
        try:
            a, b, c, d = (parse_complex(x) for x in entries)
        except ValueError as e:
            raise fail(f"generator '{name}': {e}", name) from e
        try:
            matrices.append(MoebiusElement.checked(a, b, c, d))
        except LabError as e:
            raise fail(f"generator '{name}': {e}", name) from e
        names.append(name)

    def words(key: str) -> list:
        raw = data.get(key, [])
        if not isinstance(raw, list) or not all(isinstance(w, str) for w in raw):
            raise fail(f"'{key}' must be a list of strings", key)
        try:
            return [parse_word(w, names) for w in raw]
        except PresentationError as e:
            raise fail(str(e), key) from e

    relators = words("relators")
    cusp_words = words("cusp_words")

    abelianization = data.get("abelianization")
    if (
        not isinstance(abelianization, list)
        or len(abelianization) != len(names)
        or not all(isinstance(row, list) and all(isinstance(n, int) for n in row) for row in abelianization)
    ):
        raise fail("'abelianization' must be an integer matrix with one row per generator", "abelianization")

    epimorphism = data.get("epimorphism", [])
    if not isinstance(epimorphism, list) or not all(isinstance(n, int) for n in epimorphism):
        raise fail("'epimorphism' must be an integer vector", "epimorphism")
    if epimorphism and len(epimorphism) != len(names):
        raise fail(f"'epimorphism' needs {len(names)} entries", "epimorphism")

    cusps = data.get("cusps", 1)
    presentation = GroupPresentation(
        name=str(data.get("name", path.stem)),
        generator_names=names,
        generator_matrices=matrices,
        relators=relators,
        cusp_words=cusp_words,
        abelianization=abelianization,
        epimorphism_to_z=epimorphism,
        hyperbolic=bool(data.get("hyperbolic", True)),
        cusps=int(cusps),
    )
    if validate:
        presentation.validate()
    if presentation.cusps > 1:
        console.print(
            f"[bold yellow]Warning:[/] '{presentation.name}' has {presentation.cusps} cusps; "
            "the identities are only claimed for one cusp"
        )
    if not presentation.hyperbolic:
        console.print(
            f"[bold yellow]Warning:[/] '{presentation.name}' is marked non-hyperbolic, use it for torsion only"
        )
    return presentation


def load_run_config(path: str | Path) -> Dict[str, Any]:
    """Read a run configuration, resolving paths against the file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
        data = tomllib.loads(text)
    except OSError as e:
        raise ConfigError(f"Cannot read config '{path}': {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    for key in ("presentation", "output_dir"):
        if key in data:
            data[key] = str((path.parent / data[key]).resolve())
    return data


def parse_character(value: Any) -> Character:
    """'1/3, 0', ['1/3', 0] or 0.25"""
    if isinstance(value, str):
        return Character.parse(value)
    if isinstance(value, (int, float)):
        return Character.from_values([value])
    if isinstance(value, list):
        return Character.from_values(value)
    raise ConfigError(f"Cannot read a character from {value!r}")


def fmt(x: float) -> str:
    return format(x, FLOAT_FORMAT)


def rounded(obj: Any) -> Any:
    """Floats cut to the output precision, recursively"""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return float(fmt(obj)) if obj == obj and abs(obj) != float("inf") else str(obj)
    if isinstance(obj, complex):
        return [rounded(obj.real), rounded(obj.imag)]
    if isinstance(obj, dict):
        return {k: rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    return obj


def write_spectrum_csv(series: SpectrumSeries, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SPECTRUM_COLUMNS)
        for term in series.terms:
            rho, a0, a1 = term.rho_value, term.a0, term.a1
            writer.writerow(
                [
                    fmt(term.length),
                    fmt(term.holonomy_angle),
                    fmt(term.primitive_length),
                    term.multiplicity,
                    fmt(rho.real),
                    fmt(rho.imag),
                    fmt(a0.real),
                    fmt(a0.imag),
                    fmt(a1.real),
                    fmt(a1.imag),
                    term.word,
                ]
            )
    return path


def read_spectrum_csv(path: str | Path) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def write_json(data: Dict[str, Any], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(rounded(data), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def write_text(text: str, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def display_spectrum(spectrum: LengthSpectrum, limit: int = 20) -> None:
    """Display the shortest classes in a formatted table."""
    table = Table(title=f"Length spectrum (l <= {spectrum.max_geodesic_length:g})", box=box.ROUNDED)
    table.add_column("l", style="cyan", justify="right")
    table.add_column("theta", style="cyan", justify="right")
    table.add_column("mu", style="yellow", justify="right")
    table.add_column("rho", style="green")
    table.add_column("word", style="green")

    for c in spectrum.classes[:limit]:
        rho = c.rho_value
        table.add_row(
            f"{c.length:.10f}",
            f"{c.holonomy_angle:.6f}",
            str(c.multiplicity),
            f"{rho.real:.4f}{rho.imag:+.4f}i",
            c.word + (" (+inverse)" if c.orientation_pair else ""),
        )
    console.print(table)
    if len(spectrum) > limit:
        console.print(f"[dim]... {len(spectrum) - limit} more classes in the CSV[/]")


def display_checks(checks: Sequence[Check], title: str) -> None:
    """Display residuals against their bounds."""
    table = Table(title=title, box=box.ROUNDED)
    table.add_column("Check", style="cyan")
    table.add_column("Residual", justify="right")
    table.add_column("Bound", justify="right")
    table.add_column("Status")

    for check in checks:
        status = "[green]pass[/]" if check.passed else "[bold red]FAIL[/]"
        table.add_row(check.name, f"{check.residual:.3e}", f"{check.bound:.3e}", status)
    console.print(table)


def display_report(report) -> None:
    """Display the torsion side of the report."""
    table = Table(title=f"Torsion report: {report.presentation}", box=box.ROUNDED)
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")

    table.add_row("character", report.character)
    table.add_row(f"|tau| ({report.convention})", fmt(report.tau_magnitude))
    table.add_row("|tau|^2", fmt(report.tau_squared))
    table.add_row("twisted Alexander", report.alexander)
    if report.alexander_abs is not None:
        table.add_row("|A*(1)|", fmt(report.alexander_abs))
    if report.delta_prediction is not None:
        table.add_row("(delta_rho |A*(1)|)^2", fmt(report.delta_prediction))
    console.print(table)
    for note in report.notes:
        console.print(f"[dim]{note}[/]")
