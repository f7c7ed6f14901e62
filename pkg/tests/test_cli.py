import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from click.testing import CliRunner

from hetnet.cli import cli
from hetnet.dynamics import Trajectory
from hetnet.netspec import parse_spec


@pytest.fixture
def run():
    r = CliRunner()

    def invoke(*args):
        return r.invoke(cli, [str(a) for a in args], catch_exceptions=False)
    return invoke


def test_validate_ok(run, tmp_path, minimal_text):
    p = tmp_path / "s.yaml"
    p.write_text(minimal_text)
    res = run("validate", p)
    assert res.exit_code == 0 and "ok" in res.output


def test_validate_violation(run, tmp_path, minimal_text):
    p = tmp_path / "s.yaml"
    p.write_text(minimal_text.replace("lambda_s: -1.0, lambda_u: 0.5, stable_axis: vertical",
                                      "lambda_s: 1.0, lambda_u: 0.5, stable_axis: vertical"))
    res = run("validate", p)
    assert res.exit_code == 1 and res.output.strip()


def test_validate_parse_error(run, tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text("fixedpoints: [\n")
    assert run("validate", p).exit_code == 2


def test_validate_preset(run):
    assert run("validate", "--preset", "nichols4").exit_code == 0
    assert run("validate", "--preset", "nope").exit_code == 2


def test_simulate_rows_and_reproducible(run, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        res = run("simulate", "--preset", "fig1-cycle3", "--steps", 1000, "--init", "0.6,0.1",
                  "--out", out)
        assert res.exit_code == 0
    lines = a.read_text().splitlines()
    assert lines[0] == "step,t,x,y" and len(lines) == 1002
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.events.csv").read_text().startswith("step,corridor,kick")


def test_simulate_zero_steps(run):
    res = run("simulate", "--preset", "fig1-cycle3", "--steps", 0)
    assert res.exit_code == 2 and "n_steps must be >= 1" in res.output


def test_simulate_escape(run):
    res = run("simulate", "--preset", "fig1-cycle3", "--steps", 10, "--init", "100,100")
    assert res.exit_code != 0


def _hand_traj(path, spec_states):
    pts = []
    for xy in spec_states:
        pts += [xy] * 3 + [(1.0, 1.0)]
    path.write_text(Trajectory(0.0, 0.5, np.array(pts, dtype=float)).to_csv())


def test_stats_hand_built(run, tmp_path):
    t = tmp_path / "t.csv"
    _hand_traj(t, [(0, 0), (2, 0), (2, 2), (0, 0)])
    out = tmp_path / "s.json"
    res = run("stats", "--preset", "fig1-cycle3", "--traj", t, "--out", out,
              "--csv", tmp_path / "s.csv")
    assert res.exit_code == 0
    d = json.loads(out.read_text())
    assert d["transition_counts"] == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    assert d["dwell_counts"]["p1"] == [2, 0, 0]  # two visits of 3 steps x 0.5
    assert (tmp_path / "s.csv").read_text().startswith("section,state,key,value")


def test_stats_empty(run, tmp_path):
    t = tmp_path / "t.csv"
    _hand_traj(t, [(0, 0)])
    out = tmp_path / "s.json"
    res = run("stats", "--preset", "fig1-cycle3", "--traj", t, "--out", out)
    assert res.exit_code == 1
    assert json.loads(out.read_text()) == {"empty": True}


def test_stats_needs_one_source(run):
    assert run("stats", "--preset", "fig1-cycle3").exit_code == 2


def test_stats_ensemble_threads_identical(run, tmp_path):
    outs = []
    for th in (1, 2):
        out = tmp_path / f"s{th}.json"
        assert run("stats", "--preset", "nichols4", "--transitions", 500, "--threads", th,
                   "--out", out).exit_code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def _is_svg(path):
    root = ET.parse(path).getroot()
    return root.tag.endswith("svg")


def test_plots(run, tmp_path):
    traj, st = tmp_path / "t.csv", tmp_path / "s.json"
    run("simulate", "--preset", "nichols4", "--steps", 20000, "--out", traj)
    run("stats", "--preset", "nichols4", "--traj", traj, "--out", st)
    for kind, src in (("phase", traj), ("histogram", st), ("matrix", st)):
        svg = tmp_path / f"{kind}.svg"
        extra = ("--preset", "nichols4") if kind == "phase" else ()
        assert run("plot", src, "--kind", kind, "--out", svg, *extra).exit_code == 0
        assert _is_svg(svg)
    again = tmp_path / "again.svg"
    run("plot", st, "--kind", "matrix", "--out", again)
    assert again.read_bytes() == (tmp_path / "matrix.svg").read_bytes()


def test_plot_bad_source(run, tmp_path):
    p = tmp_path / "x.json"
    p.write_text("not json")
    assert run("plot", p, "--kind", "matrix", "--out", tmp_path / "o.svg").exit_code == 2


def test_presets_list_and_export(run):
    res = run("presets", "list")
    assert "nichols4" in res.output and "linderman8" in res.output
    y = run("presets", "export", "fig1-cycle3").output
    j = run("presets", "export", "fig1-cycle3", "--json").output
    assert parse_spec(y) == parse_spec(j)
    assert run("presets", "export", "nope").exit_code == 2


def test_fit_small(run, tmp_path):
    from hetnet.fit import FitProblem
    from hetnet.presets import fit_problem_text
    d = json.loads(fit_problem_text("nichols4"))
    d.update(budget=300, max_evals=3)
    prob = tmp_path / "p.json"
    prob.write_text(json.dumps(d))
    out = tmp_path / "r.json"
    assert run("fit", prob, "--out", out).exit_code == 0
    r = json.loads(out.read_text())
    assert r["n_evals"] <= 3
    spec = parse_spec((tmp_path / "r.spec.yaml").read_text())
    assert FitProblem.from_dict(d).free_params[0].lower <= \
        spec.perturbations[[p.corridor for p in spec.perturbations].index("f_r")].params.b


def test_fit_bad_problem(run, tmp_path):
    p = tmp_path / "p.json"
    p.write_text("{}")
    assert run("fit", p).exit_code == 2
