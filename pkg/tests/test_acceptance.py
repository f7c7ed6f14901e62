"""Acceptance suite: ten end-to-end criteria at their stated tolerances.

Every test prints one ``criterion N: PASS|FAIL ...`` line (visible even
without ``-s``) and then asserts, so a red criterion stays red.
"""
import dataclasses
import json
import math
import time

import numpy as np
import pytest

from hetnet import analysis as an
from hetnet.dynamics import advance, g_unit, separation_growth
from hetnet.fit import FitProblem, FreeParam, Target, fit, simulate_stats
from hetnet.netspec import set_param
from hetnet.presets import fit_problem_text, load_preset

pytestmark = pytest.mark.acceptance

KERNEL_VARIANTS = ["fig2-twosaddle-sine", "fig2-twosaddle-sawtooth", "fig2-twosaddle-square"]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, elapsed, limit):
        ok = ok and elapsed < limit
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}  "
                  f"[{elapsed:.1f}s / {limit:.0f}s]")
        assert elapsed < limit, f"criterion {n} took {elapsed:.1f}s (limit {limit}s)"
        return ok
    return emit


def positive_measure(params, n=200_001):
    a = np.linspace(-1.0, 1.0, n)
    return float(np.mean([g_unit(x, params) > 0 for x in a]))


# ---------------------------------------------------------------- 1 and 2

def _floor(spec, cycle):
    # double rounding leaves ~1e-14 offsets; a saddle with ratio r < 1 maps
    # an offset d to about d**r, so distances below this are not resolvable
    rmin = min(-spec.fixed_point(f).lambda_s / spec.fixed_point(f).lambda_u for f in cycle)
    return 10.0 * 1e-14 ** min(1.0, rmin)


def attraction_signature(spec, x0, n_steps=200_000):
    """(first five dwells, per-corridor resolvable crossing distances)."""
    tr = advance(spec, x0, n_steps)
    dwells = [v.steps for v in an.visits(an.label(spec, tr))][:5]
    floor = _floor(spec, [fp.id for fp in spec.fixed_points])
    dists = {}
    for c in spec.corridors:
        sec = an.first_leg_section(spec, c.id)
        d = [an.distance_to_cycle(spec, p, [c.id]) for _, p in an.section_crossings(tr.points, sec)]
        dists[c.id] = [v for v in d if v > floor]
    return dwells, dists


def _attracted(dwells, dists):
    increasing = len(dwells) == 5 and all(a < b for a, b in zip(dwells, dwells[1:]))
    decreasing = all(all(a > b for a, b in zip(d, d[1:])) for d in dists.values())
    n_cross = sum(len(d) for d in dists.values())
    return increasing and decreasing and n_cross >= 4


def test_criterion_1_stability_law(report):
    t = time.perf_counter()
    spec = load_preset("fig1-cycle3")
    dwells, dists = attraction_signature(spec, (0.6, 0.1))
    ok_stable = _attracted(dwells, dists)
    el1 = time.perf_counter() - t

    t = time.perf_counter()
    weak = spec
    for fp in spec.fixed_points:  # ratio 0.5 everywhere
        weak = set_param(weak, f"fixedpoints.{fp.id}.lambda_s", -0.25)
    tr = advance(weak, (0.6, 0.1), 100_000)
    far = max(an.distance_to_cycle(weak, p) for p in tr.points[::50])
    ok_unstable = far > 0.25  # the corridor tubes have radius 0.25
    el2 = time.perf_counter() - t

    ok = report(1, ok_stable and ok_unstable,
                f"dwells {dwells}, crossings {sum(map(len, dists.values()))} decreasing; "
                f"ratio-0.5 orbit reaches distance {far:.2f}", max(el1, el2), 10)
    assert ok_stable, (dwells, dists)
    assert ok_unstable, far
    assert ok


def test_criterion_2_relaxed_stability(report):
    t = time.perf_counter()
    spec = load_preset("cycle2")
    ratios = sorted(-fp.lambda_s / fp.lambda_u for fp in spec.fixed_points)
    dwells, dists = attraction_signature(spec, (0.6, 0.1))
    ok = ratios == pytest.approx([0.5, 3.0]) and _attracted(dwells, dists)
    ok = report(2, ok, f"ratios {ratios}, dwells {dwells}, crossings "
                f"{ {k: ['%.1e' % v for v in d] for k, d in dists.items()} }",
                time.perf_counter() - t, 10)
    assert ok


# -------------------------------------------------------------------- 3

def test_criterion_3_branching_measure(report):
    t = time.perf_counter()
    lines, ok = [], True
    for name in KERNEL_VARIANTS:
        spec = load_preset(name)
        st = an.ensemble(spec, 31_000).stats
        up, down = st.visit_counts["up"], st.visit_counts["down"]
        across = next(p for p in spec.perturbations if p.corridor == "across")
        m = positive_measure(across.params)
        frac = up / (up + down)
        ok &= up + down >= 10_000 and abs(frac - m) <= 0.02
        lines.append(f"{name.split('-')[-1]} {frac:.3f} vs {m:.3f} ({up + down} passages)")
    ok = report(3, ok, "; ".join(lines), time.perf_counter() - t, 60)
    assert ok


# -------------------------------------------------------------------- 4

def test_criterion_4_eigenvalue_dwell_law(report):
    t = time.perf_counter()
    fast = load_preset("fig2-twosaddle-sine")
    slow = load_preset("fig2-twosaddle-sine-slow")
    p2 = fast.fixed_point("p2")
    (cx, cy), R = p2.position, p2.region_radius
    # entry points into p2's disk, recorded once on the fast system
    pts = advance(fast, (0.6, 0.01), 400_000).points
    inside = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) < R
    entries = [tuple(pts[i]) for i in np.nonzero(~inside[:-1] & inside[1:])[0] + 1]
    worst, mean = 0.0, {}
    for spec in (fast, slow):
        lu = spec.fixed_point("p2").lambda_u
        n_steps = []
        for x0 in entries:
            u0 = abs(x0[1] - cy)  # stable axis is horizontal at p2
            n = math.log(R / u0) / math.log(1 + lu * spec.dt)
            d = np.hypot(*(advance(spec, x0, int(n) + 50).points - (cx, cy)).T)
            k = int(np.argmax(d >= R))
            worst = max(worst, abs(k - n))
            n_steps.append(k)
        mean[lu] = float(np.mean(n_steps))
    ratio = mean[0.25] / mean[0.5]
    ok = len(entries) >= 100 and abs(ratio - 2.0) <= 0.2 and worst <= 2.0
    ok = report(4, ok, f"{len(entries)} entries, mean dwell ratio {ratio:.3f}, "
                f"worst closed-form error {worst:.2f} steps", time.perf_counter() - t, 30)
    assert ok


# -------------------------------------------------------------------- 5

def test_criterion_5_sensitive_dependence(report):
    t = time.perf_counter()
    spec = load_preset("fig2-twosaddle-sine")
    x0 = (0.6, 0.01)
    x1 = (0.6, 0.01 + 1e-9)

    def branches(p):
        seq = [v.state for v in an.visits(an.label(spec, advance(spec, p, 10_000)))]
        return [s for s in seq if s in ("up", "down")]

    a, b = branches(x0), branches(x1)
    diverged = any(u != v for u, v in zip(a, b))
    lam = separation_growth(spec, x0, n_steps=100_000)
    bare = dataclasses.replace(spec, perturbations=())
    # horizon covering the approach to the cycle; see the decisions ledger
    lam0 = separation_growth(bare, x0, n_steps=20_000)
    ok = diverged and lam > 0 and lam0 <= 0
    ok = report(5, ok, f"itineraries {''.join(s[0] for s in a)} / {''.join(s[0] for s in b)}; "
                f"lyapunov {lam:.3f}, unperturbed {lam0:.3f}", time.perf_counter() - t, 30)
    assert ok


# ---------------------------------------------------------------- 6 and 7

def test_criterion_6_fitted_reversal_turn(report):
    t = time.perf_counter()
    res = fit(FitProblem.from_json(fit_problem_text("nichols4")))
    st = res.achieved
    p = st.p("reversal", "turn")
    ok = st.n_transitions == 10_000 and 0.90 <= p <= 1.00
    ok = report(6, ok, f"P(reversal->turn) = {p:.3f} over {st.n_transitions} transitions, "
                f"params {res.best_params}", time.perf_counter() - t, 300)
    assert ok


def test_criterion_7_dwell_bin_pattern(report):
    t = time.perf_counter()
    res = fit(FitProblem.from_json(fit_problem_text("nichols4-prelethargus10")))
    st = res.achieved
    mass = st.exit_mass("forward")
    fr = st.exit_fractions("forward")
    i = {s: k for k, s in enumerate(st.states)}
    short_rev = fr[0, i["reversal"]] > 0.5
    long_q = fr[-1, i["quiescence"]] > 0.5
    pre_ok = abs(mass[0] - 0.5) <= 0.1 and short_rev and long_q

    leth = an.ensemble(load_preset("nichols4-lethargus10"), 10_000).stats
    lmass = leth.exit_mass("forward")
    leth_ok = lmass[-1] >= 0.4
    ok = report(7, pre_ok and leth_ok,
                f"prelethargus mass {np.round(mass, 3).tolist()}, 0-3 reversal "
                f"{fr[0, i['reversal']]:.2f}, >30 quiescence {fr[-1, i['quiescence']]:.2f}; "
                f"lethargus >30 mass {lmass[-1]:.3f}", time.perf_counter() - t, 300)
    assert ok


# -------------------------------------------------------------------- 8

def test_criterion_8_fit_round_trip(report):
    t = time.perf_counter()
    spec = load_preset("nichols4")
    paths = ["perturbations.f_r.params.b", "perturbations.q_r.params.b"]
    truth = [0.2, 0.4]
    prob = FitProblem(spec, [FreeParam(p, -0.5, 1.0) for p in paths], Target(), max_evals=40)
    target_stats = simulate_stats(prob, truth)
    prob.target = Target.from_stats(target_stats)
    prob.start = {paths[0]: truth[0] * 1.2, paths[1]: truth[1] * 0.8}
    res = fit(prob)
    dist = float(np.linalg.norm(np.nan_to_num(res.achieved.transition_matrix)
                                - np.nan_to_num(target_stats.transition_matrix)))
    ok = report(8, dist <= 0.05, f"Frobenius {dist:.4f}, recovered "
                f"{ {k.split('.')[1]: round(v, 3) for k, v in res.best_params.items()} } "
                f"from truth {truth}", time.perf_counter() - t, 300)
    assert ok


# -------------------------------------------------------------------- 9

def _memory(name):
    r = an.ensemble(load_preset(name), 10_000, keep_visits=True)
    counts: dict[str, dict[str, int]] = {}
    for vs in r.visit_sequences:  # per run, so no triple spans two runs
        h = an.history_dependence(vs, "forward", skip=("turn",))
        if not h:
            continue
        for prev, row in h["counts"].items():
            for nxt, c in row.items():
                counts.setdefault(prev, {}).setdefault(nxt, 0)
                counts[prev][nxt] += c
    row = counts["reversal"]
    cond = row.get("reversal", 0) / sum(row.values())
    tot = sum(sum(r.values()) for r in counts.values())
    marg = sum(r.get("reversal", 0) for r in counts.values()) / tot
    return cond, marg


def test_criterion_9_history_dependence(report):
    t = time.perf_counter()
    wc, wm = _memory("nichols4-memory-weak")
    sc, sm = _memory("nichols4-memory-strong")
    ok = wc - wm >= 0.1 and abs(sc - sm) <= 0.05
    ok = report(9, ok, f"weak {wc:.3f} vs {wm:.3f} (diff {wc - wm:.3f}); "
                f"strong {sc:.3f} vs {sm:.3f} (diff {sc - sm:.3f})", time.perf_counter() - t, 120)
    assert ok


# ------------------------------------------------------------------- 10

def test_criterion_10_determinism(report):
    t = time.perf_counter()
    spec = load_preset("nichols4")
    csv = [advance(spec, (0.5, 0.01), 50_000).to_csv() for _ in range(2)]
    js = [an.ensemble(spec, 3000, threads=th).stats.to_json() for th in (1, 1, 4)]
    csv_stats = [an.ensemble(spec, 3000, threads=th).stats.to_csv() for th in (1, 4)]
    ok = csv[0] == csv[1] and js[0] == js[1] == js[2] and csv_stats[0] == csv_stats[1]
    json.loads(js[0])
    ok = report(10, ok, "trajectory CSV and stats JSON/CSV byte-identical across runs "
                "and threads 1/4", time.perf_counter() - t, 30)
    assert ok
