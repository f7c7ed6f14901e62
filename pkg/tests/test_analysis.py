import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hetnet import analysis as an
from hetnet.dynamics import Trajectory, advance
from hetnet.netspec import FieldPiece, FixedPointSpec, Linear, NetworkSpec, Rect
from hetnet.presets import load_preset

IB = an.IN_BETWEEN


def lt(labels, dt=1.0, min_visit=2):
    return an.LabeledTrajectory.from_labels(labels, dt, min_visit)


def seq_lt(states, n=3, gap=1):
    """Labels for a visit sequence: each state ``n`` steps, separated by in-between gaps."""
    labels = []
    for s in states:
        labels += [s] * n + [IB] * gap
    return lt(labels)


# ------------------------------------------------------------------ label

def test_label_at_fixed_point(fig1):
    t = Trajectory(0.0, fig1.dt, np.array([fig1.fixed_point("p3").position]))
    assert an.label(fig1, t).labels == ["p3"]


def test_label_far_away(fig1):
    t = Trajectory(0.0, fig1.dt, np.array([[1.0, 1.0]]))
    assert an.label(fig1, t).labels == [IB]


def test_label_named_corridor(nichols):
    c = nichols.corridor("turn")
    t = Trajectory(0.0, nichols.dt, np.array([c.path[1]]))
    assert an.label(nichols, t).labels == ["turn"]


def test_label_length_matches(fig1):
    t = advance(fig1, (0.6, 0.1), 500)
    assert len(an.label(fig1, t)) == len(t)


def test_nichols_turn_between_reversal_and_forward(nichols):
    t = advance(nichols, (0.5, 0.01), 60_000)
    seq = [v.state for v in an.visits(an.label(nichols, t))]
    assert any(seq[i:i + 3] == ["reversal", "turn", "forward"] for i in range(len(seq) - 2))
    for i, s in enumerate(seq):
        if s == "turn" and 0 < i < len(seq) - 1:
            assert seq[i - 1] == "reversal" and seq[i + 1] == "forward"


# ------------------------------------------------------------------ dwell

def test_dwell_times_hand_count():
    assert an.dwell_times(lt(["F", "F", "F", IB, "R", "R"])) == [("F", 3.0), ("R", 2.0)]


def test_dwell_times_all_between():
    assert an.dwell_times(lt([IB] * 5)) == []


def test_dwell_times_drop_grazing():
    assert an.dwell_times(lt(["F", IB, "R", "R"])) == [("R", 2.0)]


def _saddle(lu, ls=-5.0, R=0.3):
    fp = FixedPointSpec("p", (0.0, 0.0), ls, lu, "vertical", R)
    pieces = (FieldPiece(Rect(-100, 100, -100, 100), 1.0, Linear("p")),)
    return NetworkSpec((fp,), pieces, (), (), 0.01, Rect(-10, 10, -10, 10))


def _saddle_dwell_steps(lu, delta, R=0.3):
    spec = _saddle(lu, R=R)
    n_max = int(math.log(R / delta) / math.log(1 + lu * spec.dt)) + 50
    t = advance(spec, (delta, R * (1 - 1e-9)), n_max)
    (state, dur), = an.dwell_times(an.label(spec, t))
    return dur / spec.dt


@pytest.mark.parametrize("lu, delta", [(0.5, 1e-3), (0.25, 1e-3), (1.0, 1e-6)])
def test_linear_saddle_closed_form(lu, delta):
    n = math.log(0.3 / delta) / math.log(1 + lu * 0.01)
    assert abs(_saddle_dwell_steps(lu, delta) - n) <= 2


def test_halving_lambda_u_doubles_dwell():
    deltas = [1e-2, 1e-3, 1e-4, 1e-5]
    fast = np.mean([_saddle_dwell_steps(0.5, d) for d in deltas])
    slow = np.mean([_saddle_dwell_steps(0.25, d) for d in deltas])
    assert slow / fast == pytest.approx(2.0, rel=0.1)


# ------------------------------------------------------------ transitions

def test_matrix_hand_count():
    l = seq_lt(["F", "R", "T", "F", "R", "T"])
    m = an.transition_matrix(l)
    st = l.states
    assert m[st.index("F"), st.index("R")] == 1.0
    assert m[st.index("R"), st.index("T")] == 1.0
    assert m[st.index("T"), st.index("F")] == 1.0


def test_matrix_single_visit_empty():
    assert an.transition_matrix(lt(["F", "F", "F"])) is an.EMPTY
    assert not an.EMPTY
    assert an.EMPTY.to_dict() == {"empty": True}


def test_absent_rows_are_nan():
    st = an.switching_stats(seq_lt(["A", "B", "A", "C"]))
    m = st.transition_matrix
    assert st.absent == ["C"]
    assert np.isnan(m[st.states.index("C")]).all()


@given(st.lists(st.sampled_from("ABCD"), min_size=2, max_size=40),
       st.lists(st.integers(1, 5), min_size=40, max_size=40))
def test_gap_insensitivity(states, gaps):
    a = an.switching_stats(seq_lt(states, gap=1))
    labels = []
    for s, g in zip(states, gaps):
        labels += [s] * 3 + [IB] * g
    b = an.switching_stats(lt(labels))
    assert np.array_equal(a.transitions, b.transitions)


@given(st.lists(st.sampled_from("ABCD"), min_size=2, max_size=60))
def test_rows_stochastic_and_bins_complete(states):
    s = an.switching_stats(seq_lt(states, n=4))
    m = s.transition_matrix
    for i, name in enumerate(s.states):
        if name not in s.absent:
            assert abs(m[i].sum() - 1.0) <= 1e-9
        assert s.dwell_counts[i].sum() == s.visit_counts[name]


def test_repeated_state_merges():
    vs = an.visits(lt(["A", "A", IB, "A", "A", "A", IB, "B", "B"]))
    assert [(v.state, v.steps) for v in vs] == [("A", 5), ("B", 2)]


def test_stats_json_and_csv():
    l = seq_lt(["F", "R", "T", "F", "Q", "F"])
    s = an.switching_stats(l)
    d = json.loads(s.to_json())
    assert d["bin_labels"] == ["0-3", "3-30", ">30"]
    back = an.SwitchingStats.from_dict(d)
    assert np.array_equal(back.transitions, s.transitions)
    assert np.array_equal(back.exit_counts, s.exit_counts)
    rows = s.to_csv().splitlines()
    assert rows[0] == "section,state,key,value"
    assert "transition,F,R,0.5" in rows


def test_merge_adds_counts():
    a = an.switching_stats(seq_lt(["A", "B", "A"]))
    b = an.switching_stats(an.LabeledTrajectory.from_labels(
        ["B", "B", "B", IB, "A", "A", "A"], 1.0, states=a.states))
    m = a.merge(b)
    assert m.n_transitions == a.n_transitions + b.n_transitions


def test_bins_validation():
    with pytest.raises(ValueError):
        an.switching_stats(seq_lt(["A", "B"]), bins=(30, 3))
    with pytest.raises(ValueError):
        an.switching_stats(seq_lt(["A", "B"]), bins=())


# ---------------------------------------------------- dwell-conditioned exits

def test_conditioned_exits_hand_count():
    labels = ["F"] + [IB] + ["R"] * 2 + [IB] + ["F"] * 40 + [IB] + ["Q"] * 2
    res = an.dwell_conditioned_exits(lt(labels, min_visit=1), "F", bins=(3, 30))
    assert res["fractions"][0] == {"R": 1.0}
    assert res["fractions"][1] == {}
    assert res["fractions"][2] == {"Q": 1.0}


def test_conditioned_exits_no_visits():
    res = an.dwell_conditioned_exits(seq_lt(["A", "B"]), "Z")
    assert res["counts"] == [] and res["fractions"] == []


def test_exit_fraction_rows_sum_to_one():
    s = an.switching_stats(seq_lt(["F", "R", "F", "Q", "F", "R"], n=5))
    f = s.exit_fractions("F")
    for row in f:
        if not np.isnan(row).any():
            assert row.sum() == pytest.approx(1.0, abs=1e-12)


# ------------------------------------------------------------------ history

def test_history_independent():
    h = an.history_dependence(seq_lt(["F", "R", "T", "Q", "R", "T", "F", "R", "T"]), "R")
    assert h["probabilities"]["F"] == h["probabilities"]["Q"] == {"T": 1.0}


def test_history_alternating_deterministic():
    h = an.history_dependence(seq_lt(["F", "R", "T"] * 5), "R")
    assert h["probabilities"] == {"F": {"T": 1.0}}


def test_history_insufficient():
    assert an.history_dependence(seq_lt(["F", "R"]), "R") is an.EMPTY


def test_history_skip_transitional():
    h = an.history_dependence(seq_lt(["R", "T", "F", "R", "T", "F", "Q"]), "F", skip=("T",))
    assert h["counts"] == {"R": {"R": 1, "Q": 1}}


def test_history_distinct_kernels_differ():
    # distinct kernels on the two corridors into reversal
    spec = load_preset("nichols4")
    r = an.ensemble(spec, 6000, keep_visits=True)
    seq = [v for vs in r.visit_sequences for v in vs]
    p = an.history_dependence(seq, "reversal")["probabilities"]
    tv = 0.5 * sum(abs(p["forward"].get(k, 0) - p["quiescence"].get(k, 0))
                   for k in set(p["forward"]) | set(p["quiescence"]))
    assert tv > 0.02


# ----------------------------------------------------------------- ensemble

def test_ensemble_budget_and_thread_independence():
    spec = load_preset("nichols4")
    a = an.ensemble(spec, 2000, threads=1)
    b = an.ensemble(spec, 2000, threads=3)
    assert a.stats.n_transitions == 2000
    assert a.stats.to_json() == b.stats.to_json()


def test_lattice_points_deterministic(nichols):
    assert an.lattice_points(nichols, 12) == an.lattice_points(nichols, 12)
    assert len(set(an.lattice_points(nichols, 12))) == 12


def test_section_crossings():
    pts = np.array([[0.0, -1.0], [0.0, 1.0], [0.5, 1.0], [0.5, -1.0]])
    hits = an.section_crossings(pts, ((-1.0, 0.0), (1.0, 0.0)))
    assert [k for k, _ in hits] == [1, 3]
    assert hits[1][1] == pytest.approx((0.5, 0.0))
