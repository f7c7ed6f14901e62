"""Regenerate the preset spec files shipped in ``src/hetnet/presets``.

Each preset is laid out with :class:`hetnet.tracks.TrackLayout`; the written
files contain every field piece explicitly, so loading a preset never runs
this script.  Usage::

    python3 tools/build_presets.py            # write all presets
    python3 tools/build_presets.py nichols4   # only the named ones
"""
from __future__ import annotations

import argparse
import json
import pathlib
import sys

from hetnet.netspec import FixedPointSpec, KernelParams, serialize, validate
from hetnet.tracks import Kick, Track, TrackLayout

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "hetnet" / "presets"

# positive everywhere on [-1, 1]: always pushes toward the chosen branch
INWARD = KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, 0.8)

FIG2_KERNELS = {
    "sine": (KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, 0.0), 0.1),
    "sawtooth": (KernelParams(0.02, 0.98, 50.0, 1.5, 50.0, 0.1), 0.15),
    "square": (KernelParams(0.1, 0.3, 50.0, 50.0, 50.0, 0.2), 0.05),
}


def fig1_cycle3():
    fps = [FixedPointSpec("p1", (0.0, 0.0), -1.0, 0.5, "vertical", 0.3),
           FixedPointSpec("p2", (2.0, 0.0), -1.0, 0.5, "horizontal", 0.3),
           FixedPointSpec("p3", (2.0, 2.0), -1.0, 0.5, "vertical", 0.3)]
    lay = TrackLayout(fps)
    lay.add(Track("c12", "p1", "p2", (), contraction=0.1))
    lay.add(Track("c23", "p2", "p3", (), contraction=0.1))
    lay.add(Track("c31", "p3", "p1", ((0.0, 2.0),), contraction=0.1))
    return lay.build(
        name="fig1-cycle3", dt=0.01,
        description="Three saddles joined into one heteroclinic cycle, no perturbations. "
                    "Every saddle has stability ratio 2, so orbits inside the cycle are "
                    "attracted to it with growing dwell times.")


def cycle2():
    fps = [FixedPointSpec("p1", (0.0, 0.0), -0.5, 1.0, "vertical", 0.3),
           FixedPointSpec("p2", (2.0, 0.0), -1.2, 0.4, "horizontal", 0.3)]
    lay = TrackLayout(fps)
    lay.add(Track("c12", "p1", "p2", (), contraction=0.5))
    lay.add(Track("c21", "p2", "p1", ((2.0, 2.0), (0.0, 2.0)), contraction=0.5))
    return lay.build(
        name="cycle2", dt=0.01,
        description="Two-saddle cycle with ratios 0.5 and 3: one saddle repels on its own "
                    "but the product of the ratios exceeds 1, so the cycle still attracts.")


def fig2_twosaddle(variant: str = "sine", lambda_u: float = 0.5):
    params, amp = FIG2_KERNELS[variant]
    fps = [FixedPointSpec("p1", (0.0, 0.0), -3.0, 1.0, "vertical", 0.3),
           FixedPointSpec("p2", (2.5, 0.0), -2.0, lambda_u, "horizontal", 0.3)]
    lay = TrackLayout(fps)
    lay.add(Track("across", "p1", "p2", (), speed=2.0))
    lay.add(Track("up", "p2", "p1", ((2.5, 2.0), (0.0, 2.0)), speed=2.0, state="up",
                  tube_radius=0.15))
    lay.add(Track("down", "p2", "p1", ((2.5, -2.0), (0.0, -2.0)), speed=2.0, state="down",
                  tube_radius=0.15))
    lay.kick(Kick("across", "up", params, amp))
    lay.kick(Kick("up", "across", INWARD, 0.02))
    lay.kick(Kick("down", "across", INWARD, 0.02))
    lu = {0.5: "", 0.25: "-slow"}[lambda_u]
    return lay.build(
        name=f"fig2-twosaddle-{variant}{lu}", dt=0.005,
        description=f"Two saddles; a {variant}-shaped kick before p2 decides whether the orbit "
                    f"returns over the upper or the lower loop (lambda_u at p2 = {lambda_u}). "
                    "The return loops carry a one-signed kick so every orbit re-enters the "
                    "crossing corridor.")


def nichols4(variant: str = "base"):
    """Forward / reversal / quiescence saddles with the turn as a named corridor.

    Geometry (time unit = seconds of the behavioural data):

    * reversal R at (0, 0): arrivals from above (F) and below (Q); exits right
      into the turn corridor, or left round to Q.
    * forward F at (2, 2): arrivals from below (turn) and above (from Q); exits
      left back to R, or right down to Q.
    * quiescence Q at (0, -2): arrivals from the left (R) and right (F); exits
      up to R, or down and round the outside to F.
    """
    p = NICHOLS_VARIANTS[variant]
    fps = [FixedPointSpec("forward", (2.0, 2.0), p["F_ls"], p["F_lu"], "vertical", 0.3),
           FixedPointSpec("reversal", (0.0, 0.0), -2.0, 1.0, "vertical", 0.3),
           FixedPointSpec("quiescence", (0.0, -2.0), p["Q_ls"], p["Q_lu"], "horizontal", 0.3)]
    # kicks reach 2 * amplitude, so the corridor tubes are wider than the default
    lay = TrackLayout(fps, tube=0.4)
    lay.add(Track("turn", "reversal", "forward", ((2.0, 0.0),), contraction=p["turn_a"],
                  final_contraction=p["turn_final_a"], state="turn", tube_radius=0.15))
    lay.add(Track("f_r", "forward", "reversal", ((0.0, 2.0),)))
    lay.add(Track("f_q", "forward", "quiescence", ((3.5, 2.0), (3.5, -2.0))))
    lay.add(Track("r_q", "reversal", "quiescence", ((-2.0, 0.0), (-2.0, -2.0))))
    lay.add(Track("q_r", "quiescence", "reversal", ()))
    lay.add(Track("q_f", "quiescence", "forward",
                  ((0.0, -3.5), (4.5, -3.5), (4.5, 3.5), (2.0, 3.5))))
    lay.kick(Kick("turn", "f_r", p["into_F"], p["into_F_amp"]))
    lay.kick(Kick("q_f", "f_r", p["into_F_q"], p["into_F_q_amp"]))
    lay.kick(Kick("f_r", "turn", p["into_R_f"], p["into_R_amp"]))
    lay.kick(Kick("q_r", "turn", p["into_R_q"], p["into_R_amp"]))
    lay.kick(Kick("f_q", "q_r", p["into_Q"], p["into_Q_amp"]))
    lay.kick(Kick("r_q", "q_r", p["into_Q"], p["into_Q_amp"]))
    name = "nichols4" if variant == "base" else f"nichols4-{variant}"
    return lay.build(name=name, dt=0.02, description=p["description"])


_N_BASE = dict(
    F_ls=-1.0, F_lu=0.5, Q_ls=-1.0, Q_lu=0.5, turn_a=8.0, turn_final_a=2.0,
    into_F=KernelParams(0.1, 0.1, 50.0, 100.0, 20.0, -0.1), into_F_amp=0.2,
    into_F_q=KernelParams(0.1, 0.1, 50.0, 100.0, 20.0, -0.1), into_F_q_amp=0.2,
    into_R_f=KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, 0.45),
    into_R_q=KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, 0.3), into_R_amp=0.1,
    into_Q=KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, 0.0), into_Q_amp=0.1,
    description="Forward, reversal and quiescence saddles with the turn as a named "
                "corridor from reversal to forward.",
)


def _variant(base=_N_BASE, **kw):
    d = dict(base)
    d.update(kw)
    return d


# shared by the two memory variants; they differ only in the turn corridor
_MEMORY = _variant(
    into_F_amp=0.12, into_F_q_amp=0.12,
    into_R_f=KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, 0.0),
    into_Q=KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, -0.8),
)

NICHOLS_VARIANTS = {
    "base": _N_BASE,
    "prelethargus10": _variant(
        description="Prelethargus at 10% oxygen: about half of the forward bouts end within "
                    "3 time units, mostly into reversal; long bouts end in quiescence."),
    "prelethargus21": _variant(
        into_F=KernelParams(0.1, 0.1, 50.0, 100.0, 20.0, -0.05),
        into_F_q=KernelParams(0.1, 0.1, 50.0, 100.0, 20.0, -0.05),
        description="Prelethargus at 21% oxygen: as at 10% with slightly fewer transitions "
                    "into quiescence."),
    "lethargus10": _variant(
        F_ls=-0.6, F_lu=0.15,
        into_F=KernelParams(0.1, 0.1, 50.0, 100.0, 20.0, -0.2), into_F_amp=0.1,
        into_F_q=KernelParams(0.1, 0.1, 50.0, 100.0, 20.0, -0.2), into_F_q_amp=0.1,
        description="Lethargus at 10% oxygen: slower escape from forward, so about half of "
                    "the forward bouts last beyond 30 time units, mostly ending in quiescence."),
    "memory-weak": _variant(
        _MEMORY, turn_a=0.5, turn_final_a=0.5, into_F_amp=0.01,
        description="Weakly contracting turn with a small kick before forward: the side on "
                    "which the orbit left reversal survives the turn, so forward bouts reached "
                    "through the turn tend to end in reversal again."),
    "memory-strong": _variant(
        _MEMORY,
        description="Same as memory-weak but the turn contracts strongly and the kick before "
                    "forward is large, so the exit from forward forgets the previous state."),
}


def linderman8():
    """Eight behavioural states: five saddles plus three named corridor states.

    ``pause`` labels two separate corridors (forward to slow forward and back).
    The onset saddles each use a single exit, so the corridors into them carry
    a one-signed kick.  Low-probability transitions are left out.
    """
    sad = dict(lambda_s=-1.0, lambda_u=0.5, region_radius=0.3)
    fps = [FixedPointSpec("reversal", (0.0, 0.0), stable_axis="vertical", **sad),
           FixedPointSpec("forward", (6.0, 4.0), stable_axis="horizontal", **sad),
           FixedPointSpec("forward_slow", (6.0, -4.0), stable_axis="vertical", **sad),
           FixedPointSpec("reversal_onset", (6.0, 8.0), stable_axis="vertical", **sad),
           FixedPointSpec("reversal_onset_slow", (3.0, -4.0), stable_axis="horizontal", **sad)]
    lay = TrackLayout(fps)
    lay.add(Track("dorsal", "reversal", "forward", ((3.0, 0.0), (3.0, 4.0)),
                  state="turn_dorsal", tube_radius=0.15))
    lay.add(Track("ventral", "reversal", "forward_slow", ((-3.0, 0.0), (-3.0, -7.0), (6.0, -7.0)),
                  speed=1.5, state="turn_ventral", tube_radius=0.15))
    lay.add(Track("f_o", "forward", "reversal_onset", ()))
    lay.add(Track("pause_down", "forward", "forward_slow", (), speed=0.5, state="pause",
                  tube_radius=0.15))
    lay.add(Track("pause_up", "forward_slow", "forward", ((9.0, -4.0), (9.0, 4.0)), speed=0.5,
                  state="pause", tube_radius=0.15))
    lay.add(Track("s_b", "forward_slow", "reversal_onset_slow", ()))
    lay.add(Track("o_r", "reversal_onset", "reversal", ((0.0, 8.0),)))
    lay.add(Track("b_r", "reversal_onset_slow", "reversal", ((3.0, -2.0), (0.0, -2.0))))
    sine = KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, 0.0)
    lay.kick(Kick("o_r", "dorsal", KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, 0.3), 0.1))
    lay.kick(Kick("b_r", "dorsal", KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, -0.3), 0.1))
    lay.kick(Kick("dorsal", "f_o", KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, 0.2), 0.1))
    lay.kick(Kick("pause_up", "f_o", sine, 0.1))
    lay.kick(Kick("pause_down", "s_b", sine, 0.1))
    lay.kick(Kick("ventral", "s_b", KernelParams(0.1, 0.1, 5.0, 5.0, 5.0, -0.2), 0.1))
    lay.kick(Kick("f_o", "o_r", INWARD, 0.02))
    lay.kick(Kick("s_b", "b_r", INWARD, 0.02))
    return lay.build(
        name="linderman8", dt=0.02,
        description="Eight states: reversal, forward, slow forward and two reversal-onset "
                    "saddles; dorsal and ventral turns and a pause state on two corridors. "
                    "Rare transitions are omitted.")


def presets():
    yield fig1_cycle3()
    yield cycle2()
    for v in FIG2_KERNELS:
        yield fig2_twosaddle(v, 0.5)
        yield fig2_twosaddle(v, 0.25)
    for v in NICHOLS_VARIANTS:
        yield nichols4(v)
    yield linderman8()


# fit problems shipped next to their presets.  Target entries other than the
# reversal -> turn probability are illustrative shapes, not measured values.
FIT_PROBLEMS = {
    "nichols4": {
        "free_params": [
            {"path": "perturbations.f_r.params.b", "lower": -0.5, "upper": 1.0},
            {"path": "perturbations.q_r.params.b", "lower": -0.5, "upper": 1.0},
        ],
        # start away from the shipped values so the fit has work to do
        "start": {"perturbations.f_r.params.b": 0.0, "perturbations.q_r.params.b": 0.0},
        "target": {"matrix": {"reversal": {"turn": 0.95, "quiescence": 0.05}}},
        "max_evals": 40,
    },
    "nichols4-prelethargus10": {
        "free_params": [
            {"path": "perturbations.turn.amplitude", "lower": 0.05, "upper": 0.3},
            {"path": "perturbations.q_f.amplitude", "lower": 0.05, "upper": 0.3},
        ],
        "start": {"perturbations.turn.amplitude": 0.15, "perturbations.q_f.amplitude": 0.15},
        "target": {
            "dwell": {"forward": [0.5, 0.4, 0.1]},
            "exits": {"forward": [{"reversal": 0.85, "quiescence": 0.15},
                                  {"reversal": 0.2, "quiescence": 0.8},
                                  {"reversal": 0.2, "quiescence": 0.8}]},
        },
        "max_evals": 30,
    },
}


def fit_problem_doc(name: str, spec) -> dict:
    from hetnet.analysis import lattice_points

    doc = {"format": "hetnet-fit/1", "spec": {"preset": name}}
    doc.update(FIT_PROBLEMS[name])
    doc["target"] = dict(doc["target"], bins=[3.0, 30.0])
    doc.setdefault("weights", [1.0, 1.0, 1.0])
    doc.setdefault("budget", 10000)
    doc["seed_points"] = [list(p) for p in lattice_points(spec, 8)]
    return doc


def expected_doc(spec) -> dict | None:
    from hetnet.analysis import ensemble

    if not spec.perturbations:
        return None  # unperturbed cycles slow down forever; nothing to tabulate
    st = ensemble(spec, 10000).stats
    return {"transitions": 10000, "seeds": 8, "stats": st.to_dict()}


def main(argv: list[str]) -> int:
    ap = argparse.ArgumentParser(description="Regenerate the shipped preset files.")
    ap.add_argument("names", nargs="*", help="only these presets (default: all)")
    wanted = set(ap.parse_args(argv).names)
    OUT.mkdir(parents=True, exist_ok=True)
    for spec in presets():
        if wanted and spec.name not in wanted:
            continue
        problems = validate(spec)
        if problems:
            print(f"{spec.name}: INVALID", *problems, sep="\n  ")
            return 1
        (OUT / f"{spec.name}.yaml").write_text(serialize(spec))
        exp = expected_doc(spec)
        if exp is not None:
            (OUT / f"{spec.name}.expected.json").write_text(json.dumps(exp, indent=2) + "\n")
        if spec.name in FIT_PROBLEMS:
            doc = fit_problem_doc(spec.name, spec)
            (OUT / f"{spec.name}.fit.json").write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {spec.name}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
