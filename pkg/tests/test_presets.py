import dataclasses

import pytest

from hetnet import presets
from hetnet.netspec import check_cycle_stability, heteroclinic_cycles, parse_spec, serialize, validate

FIG2 = [n for n in presets.names() if n.startswith("fig2-twosaddle")]


def test_catalog_lists_expected_families():
    names = presets.names()
    for n in ("fig1-cycle3", "cycle2", "fig2-twosaddle-sine", "nichols4",
              "nichols4-prelethargus10", "nichols4-lethargus10", "linderman8"):
        assert n in names
    assert len(FIG2) >= 3
    assert all(e.blurb for e in presets.catalog().values())


@pytest.mark.parametrize("name", presets.names())
def test_preset_validates_and_round_trips(name):
    spec = presets.load_preset(name)
    assert validate(spec) == []
    assert spec.name == name
    assert parse_spec(serialize(spec)) == spec


@pytest.mark.parametrize("name", presets.names())
def test_cycles_relaxed_stable(name):
    spec = presets.load_preset(name)
    cycles = heteroclinic_cycles(spec)
    assert cycles
    for cyc in cycles:
        ratios = [-spec.fixed_point(f).lambda_s / spec.fixed_point(f).lambda_u for f in cyc]
        assert check_cycle_stability(ratios)["relaxed"]


def test_fig1_shape():
    s = presets.load_preset("fig1-cycle3")
    assert (len(s.fixed_points), len(s.corridors), len(s.perturbations)) == (3, 3, 0)
    assert heteroclinic_cycles(s) == [["p1", "p2", "p3"]]


def test_nichols_shape():
    s = presets.load_preset("nichols4")
    assert sorted(fp.id for fp in s.fixed_points) == ["forward", "quiescence", "reversal"]
    assert [c.state for c in s.corridors if c.state] == ["turn"]
    assert len(s.state_ids) == 4


def test_linderman_has_eight_states():
    assert len(presets.load_preset("linderman8").state_ids) == 8


def _strip(spec):
    """Spec with the things a fig2 variant may change blanked out.

    Pieces are dropped too: they are rebuilt to restore the connection when
    lambda_u changes.
    """
    fps = tuple(dataclasses.replace(fp, lambda_u=0.0) for fp in spec.fixed_points)
    perts = tuple(dataclasses.replace(p, params=None, amplitude=0.0) if p.corridor == "across" else p
                  for p in spec.perturbations)
    return dataclasses.replace(spec, fixed_points=fps, perturbations=perts, name="",
                               description="", pieces=())


def test_fig2_variants_differ_only_in_kernel_and_lambda_u():
    base = _strip(presets.load_preset(FIG2[0]))
    for n in FIG2[1:]:
        assert _strip(presets.load_preset(n)) == base
    slow = [n for n in FIG2 if n.endswith("-slow")]
    assert slow
    for n in slow:
        a = presets.load_preset(n)
        b = presets.load_preset(n[: -len("-slow")])
        assert a.fixed_point("p2").lambda_u == pytest.approx(b.fixed_point("p2").lambda_u / 2)


def test_unknown_preset():
    with pytest.raises(presets.UnknownPresetError) as e:
        presets.load_preset("nope")
    assert "fig1-cycle3" in str(e.value)


def test_expected_stats_shipped():
    for name in ("nichols4", "linderman8"):
        d = presets.expected_stats(name)
        assert d["transitions"] == 10_000
        assert sum(map(sum, d["stats"]["transition_counts"])) == 10_000
    assert presets.expected_stats("fig1-cycle3") is None
    assert presets.fit_problem_text("nichols4") is not None
