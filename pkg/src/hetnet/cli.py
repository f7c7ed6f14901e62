"""``hetnet`` command line: validate, simulate, stats, fit, plot, presets.

Exit codes: 0 success, 1 domain failure (violations, escape, empty
statistics, failed fit), 2 usage or parse error.
"""
from __future__ import annotations

import json
import pathlib
import sys

import click

from . import analysis, dynamics, plotting
from .field import DomainError, SingularityError
from .netspec import NetworkSpec, SpecError, load_spec, parse_spec, serialize, validate
from .presets import UnknownPresetError, catalog, fit_problem_text, load_preset, preset_text

EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _fail(msg: str, code: int) -> None:
    click.echo(msg, err=True)
    sys.exit(code)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        click.echo(text, nl=False)
    else:
        pathlib.Path(path).write_text(text, encoding="utf-8")


def _spec_from(spec_path: str | None, preset: str | None, *, validated: bool = True) -> NetworkSpec:
    if bool(spec_path) == bool(preset):
        _fail("give exactly one of --spec or --preset", EXIT_USAGE)
    try:
        spec = load_preset(preset) if preset else load_spec(spec_path)
    except UnknownPresetError as e:
        _fail(str(e), EXIT_USAGE)
    except SpecError as e:
        _fail(f"{spec_path}: {e}", EXIT_USAGE)
    except OSError as e:
        _fail(f"cannot read {spec_path}: {e.strerror}", EXIT_USAGE)
    if validated:
        problems = validate(spec)
        if problems:
            _fail("invalid spec:\n  " + "\n  ".join(problems), EXIT_DOMAIN)
    return spec


def _parse_floats(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise click.BadParameter(f"{what} must be comma-separated numbers") from None


def _init(spec: NetworkSpec, init: str | None):
    if init is None:
        return dynamics.default_init(spec)
    xy = _parse_floats(init, "--init")
    if len(xy) != 2:
        raise click.BadParameter("--init takes x,y")
    return xy


def _bins(text: str | None):
    if text is None:
        return analysis.DEFAULT_BINS
    try:
        return analysis._check_bins(_parse_floats(text, "--bins"))
    except ValueError as e:
        raise click.BadParameter(str(e)) from None


spec_opt = click.option("--spec", "spec_path", type=click.Path(), help="Spec file (YAML or JSON).")
preset_opt = click.option("--preset", help="Name of a shipped preset instead of --spec.")


@click.group()
def cli():
    """Deterministic chaotic heteroclinic networks."""


@cli.command("validate")
@click.argument("spec_file", required=False, type=click.Path())
@spec_opt
@preset_opt
def cmd_validate(spec_file, spec_path, preset):
    """Check a spec; exit 1 and list violations if it is invalid."""
    spec = _spec_from(spec_file or spec_path, preset, validated=False)
    problems = validate(spec)
    if problems:
        for p in problems:
            click.echo(p)
        sys.exit(EXIT_DOMAIN)
    click.echo(f"{spec.name or 'spec'}: ok")


@cli.command("simulate")
@spec_opt
@preset_opt
@click.option("--steps", type=int, required=True, help="Number of map iterations.")
@click.option("--init", help="Initial point x,y (default: just off the first corridor).")
@click.option("--out", help="Trajectory CSV; the events go to <out stem>.events.csv.")
def cmd_simulate(spec_path, preset, steps, init, out):
    """Iterate the perturbed map and write the trajectory as CSV."""
    if steps < 1:
        _fail("n_steps must be >= 1", EXIT_USAGE)
    spec = _spec_from(spec_path, preset)
    try:
        traj = dynamics.advance(spec, _init(spec, init), steps)
    except (dynamics.EscapeError, DomainError, SingularityError) as e:
        _fail(str(e), EXIT_DOMAIN)
    _write(out, traj.to_csv())
    if out and out != "-":
        p = pathlib.Path(out)
        p.with_name(p.stem + ".events.csv").write_text(traj.events_csv(), encoding="utf-8")


@cli.command("stats")
@spec_opt
@preset_opt
@click.option("--traj", type=click.Path(exists=True), help="Trajectory CSV to analyse.")
@click.option("--steps", type=int, help="Simulate this many steps from --init instead.")
@click.option("--transitions", type=int, help="Pool an ensemble of this many transitions instead.")
@click.option("--init", help="Initial point x,y for --steps.")
@click.option("--bins", help="Dwell bin edges, e.g. 3,30.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", help="Stats JSON (default: standard output).")
@click.option("--csv", "csv_out", help="Also write the long-format CSV flattening here.")
def cmd_stats(spec_path, preset, traj, steps, transitions, init, bins, threads, out, csv_out):
    """Switching statistics of a trajectory, a fresh run, or an ensemble."""
    if sum(v is not None for v in (traj, steps, transitions)) != 1:
        _fail("give exactly one of --traj, --steps, --transitions", EXIT_USAGE)
    spec = _spec_from(spec_path, preset)
    edges = _bins(bins)
    try:
        if transitions is not None:
            if transitions < 1:
                _fail("--transitions must be >= 1", EXIT_USAGE)
            st = analysis.ensemble(spec, transitions, bins=edges, threads=threads).stats
        else:
            if traj is not None:
                t = dynamics.Trajectory.from_csv(pathlib.Path(traj).read_text(encoding="utf-8"))
            else:
                if steps < 1:
                    _fail("n_steps must be >= 1", EXIT_USAGE)
                t = dynamics.advance(spec, _init(spec, init), steps)
            st = analysis.switching_stats(analysis.label(spec, t), edges)
    except (dynamics.EscapeError, DomainError, SingularityError) as e:
        _fail(str(e), EXIT_DOMAIN)
    except (KeyError, ValueError) as e:
        _fail(f"cannot read trajectory: {e}", EXIT_USAGE)
    if st.n_transitions == 0:
        _write(out, json.dumps(analysis.EMPTY.to_dict()) + "\n")
        _fail("no transitions observed", EXIT_DOMAIN)
    _write(out, st.to_json())
    if csv_out:
        _write(csv_out, st.to_csv())


@cli.command("fit")
@click.argument("problem", required=False, type=click.Path())
@click.option("--preset", help="Use the fit problem shipped with this preset.")
@click.option("--out", help="Fit result JSON (default: standard output).")
@click.option("--spec-out", help="Fitted spec file (default: <out stem>.spec.yaml).")
@click.option("--threads", type=int, default=1, show_default=True)
def cmd_fit(problem, preset, out, spec_out, threads):
    """Fit free spec parameters to the target statistics of a problem file."""
    from .fit import FitError, FitProblem, fit

    if bool(problem) == bool(preset):
        _fail("give exactly one of PROBLEM or --preset", EXIT_USAGE)
    try:
        text = fit_problem_text(preset) if preset else pathlib.Path(problem).read_text(
            encoding="utf-8")
        if text is None:
            _fail(f"preset {preset!r} has no fit problem", EXIT_USAGE)
        prob = FitProblem.from_json(text, threads=threads)
    except UnknownPresetError as e:
        _fail(str(e), EXIT_USAGE)
    except (SpecError, ValueError) as e:
        _fail(f"bad fit problem: {e}", EXIT_USAGE)
    except OSError as e:
        _fail(f"cannot read {problem}: {e.strerror}", EXIT_USAGE)
    try:
        res = fit(prob)
    except FitError as e:
        _fail(str(e), EXIT_DOMAIN)
    _write(out, res.to_json())
    if spec_out is None and out and out != "-":
        p = pathlib.Path(out)
        spec_out = str(p.with_name(p.stem + ".spec.yaml"))
    if spec_out:
        _write(spec_out, serialize(res.spec))


@cli.command("plot")
@click.argument("source", type=click.Path(exists=True))
@click.option("--kind", type=click.Choice(["phase", "histogram", "matrix"]), required=True)
@click.option("--out", required=True, help="SVG file to write.")
@spec_opt
@preset_opt
def cmd_plot(source, kind, out, spec_path, preset):
    """Render a trajectory CSV (phase) or stats JSON (histogram, matrix) as SVG."""
    text = pathlib.Path(source).read_text(encoding="utf-8")
    if kind == "phase":
        spec = _spec_from(spec_path, preset) if (spec_path or preset) else None
        try:
            t = dynamics.Trajectory.from_csv(text)
        except (KeyError, ValueError) as e:
            _fail(f"{source}: not a trajectory CSV ({e})", EXIT_USAGE)
        svg = plotting.phase_svg(t.points, spec, title=spec.name if spec else None)
    else:
        try:
            d = json.loads(text)
            st = analysis.SwitchingStats.from_dict(d.get("stats", d))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            _fail(f"{source}: not a stats JSON ({e})", EXIT_USAGE)
        svg = plotting.histogram_svg(st) if kind == "histogram" else plotting.matrix_svg(st)
    _write(out, svg)


@cli.group("presets")
def cmd_presets():
    """List or export shipped presets."""


@cmd_presets.command("list")
def presets_list():
    for name, e in catalog().items():
        click.echo(f"{name}\n    {e.blurb}")


@cmd_presets.command("export")
@click.argument("name")
@click.option("--out", help="Destination file (default: standard output).")
@click.option("--json", "as_json", is_flag=True, help="Emit the JSON mirror instead of YAML.")
def presets_export(name, out, as_json):
    try:
        text = preset_text(name)
    except UnknownPresetError as e:
        _fail(str(e), EXIT_USAGE)
    if as_json:
        text = serialize(parse_spec(text), fmt="json")
    _write(out, text)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="hetnet", standalone_mode=True)
    except SystemExit as e:
        return int(e.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
