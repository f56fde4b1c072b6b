import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import click
import numpy as np
from pydantic import ValidationError

from Project import __version__
from Project.Config import Command, OutputFormat, RunConfig, read_config_file
from Project.Errors import BelltideError, Errors
from Project.Optimizer.Optimizer_module import Optimizer
from Project.Output.Output_module import OutputModule
from Project.Protocols.Protocols_module import teleport_fidelity_closed, teleport_fidelity_numeric
from Project.Scenario import CrossingResult, Scenario, ScenarioKind
from Project.Verify.Verify_module import VerifyReport, Verifier

logger = logging.getLogger(__name__)

OPTIMIZER_KEYS = {
    "restarts": "restarts",
    "seed": "rng_seed",
    "rng_seed": "rng_seed",
    "grid_points_per_dim": "grid_points_per_dim",
    "simplex_tolerance": "simplex_tolerance",
    "max_iterations": "max_iterations",
    "grid_seeds": "grid_seeds",
    "max_grid_nodes": "max_grid_nodes",
    "polish_rounds": "polish_rounds",
    "polished_runs": "polished_runs",
    "crossing_tolerance": "crossing_tolerance",
    "workers": "workers",
}
QUADRATURE_KEYS = {"rings", "sectors"}
THRESHOLD_THETA = np.pi / 8


class CommandFailed(Exception):
    """Carries an exit code from a command body up to the click boundary."""

    def __init__(self, code: Errors, message: str):
        super().__init__(message)
        self.code = code


def build_config(command: Command, config_file: Optional[str], options: Dict[str, Any]) -> RunConfig:
    """
    Merges built-in defaults, the config file and the command-line flags.

    Args:
        command (Command): the subcommand being run.
        config_file (Optional[str]): flat key=value file, or None.
        options (Dict[str, Any]): flag values; None or an empty tuple means "not given".
    Returns:
        RunConfig: validated configuration.
    Raises:
        CommandFailed: unreadable file or invalid combination (exit code 2).
    """
    raw: Dict[str, Any] = {}
    if config_file is not None:
        try:
            raw.update(read_config_file(config_file))
        except (OSError, ValueError) as e:
            raise CommandFailed(Errors.IO_ERROR, f"config file: {e}") from e
        if "scenario" in raw:
            raw["scenarios"] = [s.strip() for s in raw.pop("scenario").split(",") if s.strip()]
    for key, value in options.items():
        if value is None or value == ():
            continue
        raw["scenarios" if key == "scenario" else key] = list(value) if key == "scenario" else value

    optimizer = {OPTIMIZER_KEYS[k]: raw.pop(k) for k in list(raw) if k in OPTIMIZER_KEYS}
    quadrature = {k: raw.pop(k) for k in list(raw) if k in QUADRATURE_KEYS}
    try:
        return RunConfig(command=command, optimizer=optimizer, quadrature=quadrature, **raw)
    except ValidationError as e:
        raise CommandFailed(Errors.IO_ERROR, f"invalid configuration:\n{e}") from e


def _output(config: RunConfig) -> OutputModule:
    return OutputModule({
        "belltide": __version__,
        "seed": str(config.optimizer.rng_seed),
        "config": config.model_dump_json(),
    })


def _paths(out: str, suffix: str, kind: ScenarioKind, several: bool) -> Path:
    path = Path(out)
    if several:
        path = path.with_name(f"{path.stem}-{kind.value}{path.suffix}")
    return path.with_suffix(suffix) if suffix else path


def cmd_sweep(config: RunConfig, progress: bool = False) -> List[Path]:
    """
    Sweeps every selected scenario over the θ range.

    Logic:
    1) One warm-started sweep per scenario.
    2) CSV `theta,value,converged,evaluations` per scenario, to stdout without --out.
    3) With svg/both, one SVG overlaying all selected curves.
    """
    optimizer = Optimizer(config.optimizer, progress=progress)
    output = _output(config)
    results = [optimizer.sweep(kind, config.theta_min, config.theta_max, config.steps)
               for kind in config.scenarios]
    several = len(results) > 1
    written = []
    if config.format in (OutputFormat.CSV, OutputFormat.BOTH):
        for result in results:
            frame = output.sweep_frame(result)
            if config.out is None:
                click.echo(output.csv_text(frame), nl=False)
                continue
            suffix = ".csv" if config.format == OutputFormat.BOTH else ""
            path = _paths(config.out, suffix, result.kind, several)
            output.write_csv(path, frame)
            written.append(path)
    if config.format in (OutputFormat.SVG, OutputFormat.BOTH):
        path = Path(config.out)
        if config.format == OutputFormat.BOTH:
            path = path.with_suffix(".svg")
        output.plot_sweeps(path, results, degrees=config.degrees)
        written.append(path)
    return written


def cmd_optimize(config: RunConfig) -> List[Path]:
    """Maximizes one scenario at one θ and reports the optimal settings."""
    kind = config.scenarios[0]
    result = Optimizer(config.optimizer).maximize(Scenario(kind, config.theta))
    output = _output(config)
    frame = output.optimize_frame(result)
    click.echo(f"{kind.value} at theta={config.theta:.12g}: {result.value:.12g} "
               f"(converged={result.converged}, evaluations={result.evaluations})", err=True)
    if config.out is None:
        click.echo(output.csv_text(frame), nl=False)
        return []
    output.write_csv(config.out, frame)
    return [Path(config.out)]


def cmd_fidelity(config: RunConfig) -> List[Path]:
    """
    Closed-form against quadrature teleportation fidelity on the θ grid.

    The footer records F(π/8) under the label "threshold".
    """
    output = _output(config)
    grid = np.linspace(config.theta_min, config.theta_max, config.steps)
    closed = np.array([teleport_fidelity_closed(t) for t in grid])
    numeric = np.array([teleport_fidelity_numeric(t, config.quadrature) for t in grid])
    frame = output.fidelity_frame(grid, closed, numeric)
    footer = [f"threshold,{teleport_fidelity_closed(THRESHOLD_THETA):.12g}"]
    if config.out is None:
        click.echo(output.csv_text(frame, footer), nl=False)
        return []
    output.write_csv(config.out, frame, footer)
    return [Path(config.out)]


def crossing_report(result: CrossingResult, degrees: bool = False) -> str:
    if not result.found:
        low, high = result.endpoint_values
        return (f"no crossing: {result.kind.value} stays on one side of {result.level:g} "
                f"(max {low:.6f} at theta={result.bracket[0]:.6f}, {high:.6f} at theta={result.bracket[1]:.6f})")
    lines = [f"{result.kind.value} crosses {result.level:g} at theta* = {result.theta:.8f} rad "
             f"= {result.theta / np.pi:.8f} pi"]
    if degrees:
        lines.append(f"theta* = {np.degrees(result.theta):.6f} deg")
    if result.kind == ScenarioKind.TELE_CHSH:
        lines.append(f"teleport fidelity at theta*: {teleport_fidelity_closed(result.theta):.8f}")
    return "\n".join(lines)


def cmd_crossing(config: RunConfig) -> CrossingResult:
    """Bisection for the θ at which the maximized correlator reaches the level."""
    kind = config.scenarios[0]
    result = Optimizer(config.optimizer).find_crossing(kind, config.level, config.theta_min, config.theta_max)
    click.echo(crossing_report(result, config.degrees))
    return result


def cmd_verify(config: RunConfig, inject_fault: bool = False) -> VerifyReport:
    """Runs every verification suite and prints one line per suite."""
    report = Verifier(config, inject_fault=inject_fault).run()
    for suite in report.suites:
        click.echo(suite.line())
    failure = report.first_failure
    if failure is not None:
        click.echo(f"first failing assertion: [{failure.name}] {failure.failure}")
    return report


def _run(ctx: click.Context, body):
    try:
        code = body()
    except CommandFailed as e:
        click.echo(f"Error: {e}", err=True)
        ctx.exit(e.code.value)
    except (BelltideError, OSError) as e:
        click.echo(f"Error: {e}", err=True)
        ctx.exit(Errors.IO_ERROR.value)
    except Exception:
        logger.exception("unexpected failure")
        ctx.exit(Errors.IO_ERROR.value)
    ctx.exit(code.value)


SCENARIO_CHOICE = click.Choice([k.value for k in ScenarioKind])


def range_options(f):
    f = click.option("--steps", type=int, help="Number of θ grid points (endpoints included).")(f)
    f = click.option("--theta-max", type=float, help="Upper end of the θ range, radians.")(f)
    f = click.option("--theta-min", type=float, help="Lower end of the θ range, radians.")(f)
    return f


def optimizer_options(f):
    f = click.option("--workers", type=int, help="Parallel simplex runs.")(f)
    f = click.option("--seed", type=int, help="Key of the random generator.")(f)
    f = click.option("--restarts", type=int, help="Random simplex starts.")(f)
    return f


def common_options(f):
    f = click.option("--config", "config_file", type=click.Path(dir_okay=False),
                     help="Flat key=value file; flags override it.")(f)
    f = click.option("--degrees", is_flag=True, default=None, help="Show angles in degrees.")(f)
    f = click.option("--quick", is_flag=True, default=None, help="Reduced grids and draw counts.")(f)
    f = click.option("--format", "format_", type=click.Choice([o.value for o in OutputFormat]),
                     help="Output format.")(f)
    f = click.option("--out", type=click.Path(dir_okay=False), help="Output file.")(f)
    return f


def _options(**kwargs) -> Dict[str, Any]:
    if "format_" in kwargs:
        kwargs["format"] = kwargs.pop("format_")
    return kwargs


@click.group()
@click.version_option(__version__, prog_name="belltide")
@click.option("--log-level", default="INFO",
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              help="Logging verbosity on stderr.")
def belltide(log_level: str):
    """Simulates teleportation and remote state preparation over cosθ|00> + sinθ|11>
    and maximizes their Bell-type correlators."""
    logging.basicConfig(level=getattr(logging, log_level.upper()),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


@belltide.command()
@click.option("--scenario", multiple=True, type=SCENARIO_CHOICE, help="Scenario kind; repeat to overlay.")
@range_options
@optimizer_options
@common_options
@click.pass_context
def sweep(ctx, config_file, **kwargs):
    """Maximized correlator against θ, as CSV and/or SVG."""
    def body():
        config = build_config(Command.SWEEP, config_file, _options(**kwargs))
        cmd_sweep(config, progress=True)
        return Errors.OK
    _run(ctx, body)


@belltide.command()
@click.option("--scenario", multiple=True, type=SCENARIO_CHOICE, help="Scenario kind.")
@click.option("--theta", type=float, help="Resource parameter, radians.")
@optimizer_options
@common_options
@click.pass_context
def optimize(ctx, config_file, **kwargs):
    """Optimal settings of one scenario at one θ."""
    def body():
        config = build_config(Command.OPTIMIZE, config_file, _options(**kwargs))
        cmd_optimize(config)
        return Errors.OK
    _run(ctx, body)


@belltide.command()
@range_options
@click.option("--rings", type=int, help="Gauss-Legendre rings of the sphere quadrature.")
@click.option("--sectors", type=int, help="Azimuthal sectors of the sphere quadrature.")
@common_options
@click.pass_context
def fidelity(ctx, config_file, **kwargs):
    """Teleportation fidelity table, closed form against quadrature."""
    def body():
        config = build_config(Command.FIDELITY, config_file, _options(**kwargs))
        cmd_fidelity(config)
        return Errors.OK
    _run(ctx, body)


@belltide.command()
@click.option("--scenario", multiple=True, type=SCENARIO_CHOICE, help="Scenario kind.")
@click.option("--level", type=float, help="Correlator level to cross (default 2).")
@range_options
@optimizer_options
@common_options
@click.pass_context
def crossing(ctx, config_file, **kwargs):
    """θ at which the maximized correlator reaches the level."""
    def body():
        config = build_config(Command.CROSSING, config_file, _options(**kwargs))
        result = cmd_crossing(config)
        return Errors.OK if result.found else Errors.NO_CROSSING
    _run(ctx, body)


@belltide.command()
@optimizer_options
@common_options
@click.option("--inject-fault", is_flag=True, hidden=True)
@click.pass_context
def verify(ctx, config_file, inject_fault, **kwargs):
    """Runs the self-check suites; exit code 1 on the first failure."""
    def body():
        config = build_config(Command.VERIFY, config_file, _options(**kwargs))
        report = cmd_verify(config, inject_fault=inject_fault)
        return Errors.OK if report.passed else Errors.VERIFICATION_FAILED
    _run(ctx, body)


if __name__ == "__main__":
    belltide()
