from typing import List, Optional

import numpy as np

from characters import Character, require_cusp_nontrivial
from config import (
    EXIT_OK,
    EXIT_RESIDUAL,
    MIN_ABSCISSA,
    SHIFTED_LAPLACE_POINT,
    TOLERANCES,
    VERIFY_POINTS,
    console,
)
from errors import BelowAbscissa, LabError
from group import GroupPresentation, LengthSpectrum, length_spectrum
from input_handler import RunConfig
from lfunc import SpectrumSeries, rs_factorization_check, shifted_laplace_check
from torsion import theorem_report
from transforms import (
    Check,
    cancellation_check,
    evenness_grid,
    full_line_checks,
    gaussian_kernel_grid,
    model_term_grid,
    pk_grid,
    spot_checks,
)
from utils import (
    display_checks,
    display_report,
    display_spectrum,
    load_presentation,
    write_json,
    write_spectrum_csv,
    write_text,
)

CANCELLATION_DRAWS = 20
LARGE_VOLUME = 1e6


def _status(message: str):
    return console.status(f"[yellow]{message}[/]", spinner="dots", spinner_style="yellow", speed=0.8)


def _character(config: RunConfig, p: GroupPresentation) -> Character:
    return config.character if config.character is not None else Character.trivial(p.rank)


def _spectrum(config: RunConfig, p: GroupPresentation) -> LengthSpectrum:
    rho = _character(config, p)
    with _status(f"Enumerating words of {p.name} up to length {config.max_word_length}..."):
        spectrum = length_spectrum(
            p, rho, config.max_geodesic_length, config.max_word_length, verbose=config.verbose
        )
    if spectrum.completeness_caveat:
        console.print(
            "[bold yellow]Warning:[/] new classes still appeared near the maximal word length; "
            "the spectrum may be incomplete below the cutoff"
        )
    return spectrum


def _require_abscissa(config: RunConfig) -> None:
    if config.abscissa <= MIN_ABSCISSA:
        raise BelowAbscissa(
            f"abscissa {config.abscissa:g} must exceed {MIN_ABSCISSA:g} for the series to converge"
        )


def _report_checks(checks: List[Check], title: str) -> int:
    display_checks(checks, title)
    failed = [c for c in checks if not c.passed]
    if failed:
        console.print(f"[bold red]Error:[/] {len(failed)} of {len(checks)} checks exceed their bounds")
        return EXIT_RESIDUAL
    console.print(f"[bold green]All {len(checks)} checks passed[/]")
    return EXIT_OK


def cmd_spectrum(config: RunConfig) -> int:
    p = load_presentation(config.presentation_path)
    spectrum = _spectrum(config, p)
    series = SpectrumSeries.from_spectrum(spectrum, label=p.name)
    path = write_spectrum_csv(series, config.output_dir / "spectrum.csv")
    display_spectrum(spectrum)
    console.print(f"[bold green]{len(spectrum)} classes written to[/] {path}")
    return EXIT_OK


def transform_checks(config: RunConfig) -> List[Check]:
    volume = config.volume if config.volume is not None else 1.0
    c = config.c_rho_gamma if config.c_rho_gamma is not None else 1.0
    checks: List[Check] = []
    with _status("Integrating the transform grids..."):
        checks += spot_checks()
        checks += gaussian_kernel_grid()
        checks += pk_grid()
        checks += evenness_grid()
        checks += full_line_checks()
        checks += model_term_grid(volume, c, config.unipotent_convention)
    return checks


def cancellation_checks(config: RunConfig) -> List[Check]:
    rng = np.random.default_rng(config.seed)
    volumes = list(rng.uniform(0.1, 10.0, CANCELLATION_DRAWS)) + [LARGE_VOLUME]
    constants = list(rng.uniform(-5.0, 5.0, CANCELLATION_DRAWS)) + [1.0]
    if config.volume is not None:
        volumes.append(config.volume)
        constants.append(config.c_rho_gamma if config.c_rho_gamma is not None else 1.0)

    checks = []
    for vol, c in zip(volumes, constants):
        for which, scale in (("Identity", vol), ("Unipotent", abs(c))):
            poly = cancellation_check(which, vol, c, config.unipotent_convention)
            residual = float(np.max(np.abs(poly.coef))) if len(poly.coef) else 0.0
            checks.append(
                Check(
                    f"{which} vol={vol:.6g} c={c:.6g}",
                    residual,
                    TOLERANCES.coefficient * max(1.0, scale),
                )
            )
    return checks


def series_for(config: RunConfig) -> SpectrumSeries:
    p = load_presentation(config.presentation_path)
    require_cusp_nontrivial(_character(config, p), p)
    spectrum = _spectrum(config, p)
    if not spectrum.classes:
        console.print("[bold yellow]Warning:[/] no geodesics below the cutoff, the series are empty")
    return SpectrumSeries.from_spectrum(spectrum, label=p.name)


def rs_checks(config: RunConfig, series: Optional[SpectrumSeries] = None) -> List[Check]:
    _require_abscissa(config)
    series = series or series_for(config)
    with _status("Summing the Ruelle and Selberg series..."):
        return [rs_factorization_check(series, z, config.abscissa).as_check() for z in VERIFY_POINTS]


def shifted_laplace_checks(config: RunConfig, series: Optional[SpectrumSeries] = None) -> List[Check]:
    _require_abscissa(config)
    series = series or series_for(config)
    with _status("Integrating the theta series..."):
        result = shifted_laplace_check(series, SHIFTED_LAPLACE_POINT, config.abscissa)
    return result.checks()


def cmd_verify(config: RunConfig) -> int:
    if config.check == "transforms":
        return _report_checks(transform_checks(config), "Transform closed forms")
    if config.check == "cancellation":
        return _report_checks(cancellation_checks(config), "Reflection cancellation")
    if config.check == "rs":
        return _report_checks(rs_checks(config), "Ruelle = S0 S0 / S1")
    return _report_checks(shifted_laplace_checks(config), "Shifted Laplace identity")


def _write_report(report, config: RunConfig) -> None:
    json_path = write_json(report.to_dict(), config.output_dir / "report.json")
    write_text(report.to_text(), config.output_dir / "report.txt")
    display_report(report)
    console.print(f"[bold green]Report written to[/] {json_path.parent}")


def cmd_torsion(config: RunConfig) -> int:
    p = load_presentation(config.presentation_path)
    rho = _character(config, p)
    with _status("Computing the twisted torsion..."):
        report = theorem_report(p, rho, delta_rho=config.delta_rho, convention=config.torsion_convention)
    _write_report(report, config)
    return EXIT_OK


def cmd_report(config: RunConfig) -> int:
    """Spectrum, convergent-region checks and torsion in one run"""
    _require_abscissa(config)
    p = load_presentation(config.presentation_path)
    rho = _character(config, p)
    require_cusp_nontrivial(rho, p)
    spectrum = _spectrum(config, p)
    series = SpectrumSeries.from_spectrum(spectrum, label=p.name)
    write_spectrum_csv(series, config.output_dir / "spectrum.csv")

    residuals = rs_checks(config, series) + shifted_laplace_checks(config, series)
    display_checks(residuals, "Convergent-region identities")
    with _status("Computing the twisted torsion..."):
        report = theorem_report(
            p, rho, residuals, delta_rho=config.delta_rho, convention=config.torsion_convention
        )
    _write_report(report, config)
    if not report.residuals_passed:
        console.print("[bold red]Error:[/] some residuals exceed their bounds")
        return EXIT_RESIDUAL
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "torsion": cmd_torsion,
    "report": cmd_report,
}


def start(config: RunConfig) -> int:
    """Run one command, mapping failures to exit codes"""
    TOLERANCES.reset()
    try:
        TOLERANCES.update(**config.tolerances)
        return COMMANDS[config.command](config)
    except LabError as e:
        console.print(f"[bold red]Error:[/] {e}")
        return e.exit_code
