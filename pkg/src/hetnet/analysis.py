"""Turn trajectories into labelled state sequences and switching statistics.

Everything is computed from run-length encoded labels: a run is a maximal
stretch of consecutive steps carrying the same label.  Runs shorter than
``min_visit`` steps are grazing contacts and are dropped together with the
"in-between" runs; the remaining runs are visits.  Back-to-back visits to the
same state (separated only by a gap) are merged before transitions are
counted, so inserting in-between steps never changes the statistics.

:class:`SwitchingStats` holds integer counts only, so statistics from
several trajectories combine by addition (:meth:`SwitchingStats.merge`),
which is what the threaded ensemble runner relies on.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import core
from .dynamics import EscapeError, Trajectory
from .field import SingularityError
from .netspec import NetworkSpec, polyline_dist, segment_intersection

IN_BETWEEN = "in-between"
DEFAULT_BINS = (3.0, 30.0)


class _Empty:
    """Marker returned when there is nothing to count (no transitions, no data)."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "EMPTY"

    def to_dict(self) -> dict:
        return {"empty": True}


EMPTY = _Empty()


# ---------------------------------------------------------------- labelling

@dataclass
class LabeledTrajectory:
    """Per-step state codes; ``-1`` is in-between, otherwise an index into ``states``."""

    codes: np.ndarray
    states: tuple[str, ...]
    dt: float
    min_visit: int = 2

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def labels(self) -> list[str]:
        return [IN_BETWEEN if c < 0 else self.states[c] for c in self.codes]

    @classmethod
    def from_labels(cls, labels: Sequence[str], dt: float, min_visit: int = 2,
                    states: Sequence[str] | None = None) -> "LabeledTrajectory":
        if states is None:
            states = []
            for lab in labels:
                if lab != IN_BETWEEN and lab not in states:
                    states.append(lab)
        index = {s: i for i, s in enumerate(states)}
        codes = np.array([-1 if lab == IN_BETWEEN else index[lab] for lab in labels], dtype=np.int64)
        return cls(codes, tuple(states), float(dt), min_visit)

    def runs(self) -> tuple[np.ndarray, np.ndarray]:
        return run_length(self.codes)


def run_length(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run-length encode an integer sequence: (values, lengths)."""
    codes = np.asarray(codes)
    if len(codes) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    starts = np.concatenate(([0], np.nonzero(np.diff(codes))[0] + 1))
    lengths = np.diff(np.concatenate((starts, [len(codes)])))
    return codes[starts].astype(np.int64), lengths.astype(np.int64)


def label(spec: NetworkSpec, traj: Trajectory) -> LabeledTrajectory:
    """Label every point with the disk or named-corridor tube containing it, else in-between."""
    c = core.compile_spec(spec)
    pts = np.ascontiguousarray(np.asarray(traj.points, dtype=float).reshape(-1, 2))
    codes = core.backend.label_points(c.D, c.T, pts)
    return LabeledTrajectory(np.asarray(codes, dtype=np.int64), c.states, traj.dt, spec.min_visit)


# ------------------------------------------------------------------- visits

@dataclass(frozen=True)
class Visit:
    state: str
    steps: int
    duration: float


def dwell_times(lt: LabeledTrajectory) -> list[tuple[str, float]]:
    """Maximal labelled runs of at least ``min_visit`` steps as (state, duration)."""
    vals, lens = lt.runs()
    return [(lt.states[v], float(n) * lt.dt) for v, n in zip(vals, lens)
            if v >= 0 and n >= lt.min_visit]


def _visits_from_runs(vals, lens, states, dt, min_visit) -> list[Visit]:
    out: list[Visit] = []
    for v, n in zip(vals, lens):
        if v < 0 or n < min_visit:
            continue
        s = states[v]
        if out and out[-1].state == s:
            prev = out[-1]
            out[-1] = Visit(s, prev.steps + int(n), (prev.steps + int(n)) * dt)
        else:
            out.append(Visit(s, int(n), int(n) * dt))
    return out


def visits(lt: LabeledTrajectory) -> list[Visit]:
    """Visits after dropping gaps and grazing runs; repeated states are merged."""
    vals, lens = lt.runs()
    return _visits_from_runs(vals, lens, lt.states, lt.dt, lt.min_visit)


def _bin_index(duration: float, edges: Sequence[float]) -> int:
    k = 0
    while k < len(edges) and duration >= edges[k]:
        k += 1
    return k


def _check_bins(bins: Sequence[float]) -> tuple[float, ...]:
    bins = tuple(float(b) for b in bins)
    if not bins:
        raise ValueError("at least one bin edge is required")
    if any(not b > 0 or math.isinf(b) for b in bins) or any(
            b2 <= b1 for b1, b2 in zip(bins, bins[1:])):
        raise ValueError("bin edges must be positive, finite and strictly increasing")
    return bins


def bin_labels(edges: Sequence[float]) -> list[str]:
    pts = [0.0, *edges]
    out = [f"{_fmt(a)}-{_fmt(b)}" for a, b in zip(pts, pts[1:])]
    out.append(f">{_fmt(edges[-1])}")
    return out


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


# ------------------------------------------------------------------- stats

@dataclass
class SwitchingStats:
    """Integer tallies over visits; probabilities are derived on demand.

    ``transitions[i, j]`` counts visit pairs state i -> state j.
    ``dwell_counts[i, k]`` counts visits to state i with dwell in bin k.
    ``exit_counts[i, k, j]`` counts visits to i with dwell in bin k followed by j.
    """

    states: tuple[str, ...]
    bins: tuple[float, ...]
    transitions: np.ndarray
    dwell_counts: np.ndarray
    exit_counts: np.ndarray
    gap_steps: int = 0
    gaps: int = 0
    escaped: int = 0

    @classmethod
    def zeros(cls, states: Sequence[str], bins: Sequence[float] = DEFAULT_BINS) -> "SwitchingStats":
        n, nb = len(states), len(bins) + 1
        return cls(tuple(states), _check_bins(bins), np.zeros((n, n), dtype=np.int64),
                   np.zeros((n, nb), dtype=np.int64), np.zeros((n, nb, n), dtype=np.int64))

    # -- accumulation
    def add_visits(self, vs: Sequence[Visit]) -> None:
        index = {s: i for i, s in enumerate(self.states)}
        for k, v in enumerate(vs):
            i = index[v.state]
            b = _bin_index(v.duration, self.bins)
            self.dwell_counts[i, b] += 1
            if k + 1 < len(vs):
                j = index[vs[k + 1].state]
                self.transitions[i, j] += 1
                self.exit_counts[i, b, j] += 1

    def merge(self, other: "SwitchingStats") -> "SwitchingStats":
        if other.states != self.states or other.bins != self.bins:
            raise ValueError("cannot merge stats over different states or bins")
        return SwitchingStats(self.states, self.bins, self.transitions + other.transitions,
                              self.dwell_counts + other.dwell_counts,
                              self.exit_counts + other.exit_counts,
                              self.gap_steps + other.gap_steps, self.gaps + other.gaps,
                              self.escaped + other.escaped)

    # -- derived quantities
    @property
    def n_transitions(self) -> int:
        return int(self.transitions.sum())

    @property
    def visit_counts(self) -> dict[str, int]:
        return {s: int(self.dwell_counts[i].sum()) for i, s in enumerate(self.states)}

    @property
    def absent(self) -> list[str]:
        """States never left during the observation: their matrix rows are undefined."""
        return [s for i, s in enumerate(self.states) if self.transitions[i].sum() == 0]

    @property
    def transition_matrix(self) -> np.ndarray:
        """Row-stochastic matrix; rows of absent states are NaN."""
        t = self.transitions.astype(float)
        tot = t.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            m = t / tot
        m[tot[:, 0] == 0] = np.nan
        return m

    def p(self, src: str, dst: str) -> float:
        i, j = self.states.index(src), self.states.index(dst)
        return float(self.transition_matrix[i, j])

    def dwell_histogram(self, state: str) -> np.ndarray:
        """Fractions of visits to ``state`` per dwell bin (NaN when never visited)."""
        c = self.dwell_counts[self.states.index(state)].astype(float)
        tot = c.sum()
        return c / tot if tot else np.full(len(c), np.nan)

    def exit_fractions(self, state: str) -> np.ndarray:
        """``[bin, successor]`` exit fractions; empty bins are NaN rows."""
        c = self.exit_counts[self.states.index(state)].astype(float)
        tot = c.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            f = c / tot
        f[tot[:, 0] == 0] = np.nan
        return f

    def exit_mass(self, state: str) -> np.ndarray:
        """Fraction of all exits out of ``state`` falling in each dwell bin."""
        c = self.exit_counts[self.states.index(state)].sum(axis=1).astype(float)
        tot = c.sum()
        return c / tot if tot else np.full(len(c), np.nan)

    # -- export
    def to_dict(self) -> dict:
        def rows(m):
            return [[None if math.isnan(v) else float(v) for v in r] for r in m]

        return {
            "states": list(self.states),
            "bin_edges": list(self.bins),
            "bin_labels": bin_labels(self.bins),
            "transition_counts": self.transitions.tolist(),
            "transition_matrix": rows(self.transition_matrix),
            "absent_rows": self.absent,
            "visit_counts": self.visit_counts,
            "dwell_counts": {s: self.dwell_counts[i].tolist() for i, s in enumerate(self.states)},
            "dwell_histograms": {s: rows([self.dwell_histogram(s)])[0] for s in self.states},
            "exit_counts": {s: self.exit_counts[i].tolist() for i, s in enumerate(self.states)},
            "dwell_conditioned_exits": {s: rows(self.exit_fractions(s)) for s in self.states},
            "gaps": {"count": self.gaps, "steps": self.gap_steps},
            "escaped": self.escaped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "SwitchingStats":
        states = tuple(d["states"])
        s = cls.zeros(states, d["bin_edges"])
        s.transitions = np.array(d["transition_counts"], dtype=np.int64).reshape(s.transitions.shape)
        for i, st in enumerate(states):
            s.dwell_counts[i] = d["dwell_counts"][st]
            s.exit_counts[i] = np.array(d["exit_counts"][st], dtype=np.int64)
        s.gaps = int(d.get("gaps", {}).get("count", 0))
        s.gap_steps = int(d.get("gaps", {}).get("steps", 0))
        s.escaped = int(d.get("escaped", 0))
        return s

    def to_csv(self) -> str:
        """Long-format flattening: section, state, key, value."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["section", "state", "key", "value"])
        m = self.transition_matrix
        labels = bin_labels(self.bins)
        for i, s in enumerate(self.states):
            for j, t in enumerate(self.states):
                w.writerow(["transition", s, t, "" if math.isnan(m[i, j]) else repr(float(m[i, j]))])
        for s, n in self.visit_counts.items():
            w.writerow(["visits", s, "count", n])
        for s in self.states:
            for lab, v in zip(labels, self.dwell_histogram(s)):
                w.writerow(["dwell", s, lab, "" if math.isnan(v) else repr(float(v))])
        for s in self.states:
            f = self.exit_fractions(s)
            for k, lab in enumerate(labels):
                for j, t in enumerate(self.states):
                    v = f[k, j]
                    w.writerow(["exit", s, f"{lab}->{t}", "" if math.isnan(v) else repr(float(v))])
        return buf.getvalue()


def switching_stats(lt: LabeledTrajectory, bins: Sequence[float] = DEFAULT_BINS) -> SwitchingStats:
    st = SwitchingStats.zeros(lt.states, bins)
    vals, lens = lt.runs()
    _tally(st, vals, lens, lt.dt, lt.min_visit)
    return st


def _tally(st: SwitchingStats, vals, lens, dt: float, min_visit: int) -> None:
    st.add_visits(_visits_from_runs(vals, lens, st.states, dt, min_visit))
    _count_gaps(st, vals, lens)


def _count_gaps(st: SwitchingStats, vals, lens) -> None:
    labelled = np.nonzero(vals >= 0)[0]
    if len(labelled) > 1:
        inner = vals[labelled[0]:labelled[-1] + 1]
        inner_lens = lens[labelled[0]:labelled[-1] + 1]
        gaps = inner < 0
        st.gaps += int(gaps.sum())
        st.gap_steps += int(inner_lens[gaps].sum())


def transition_matrix(lt: LabeledTrajectory):
    """Row-stochastic transition matrix over ``lt.states``, or ``EMPTY`` when no transition occurred."""
    st = switching_stats(lt)
    if st.n_transitions == 0:
        return EMPTY
    return st.transition_matrix


def dwell_conditioned_exits(lt: LabeledTrajectory, state: str,
                            bins: Sequence[float] = DEFAULT_BINS) -> dict:
    """Per dwell bin: successor counts and fractions for visits to ``state``.

    Returns ``{"bins": labels, "counts": [{succ: n}], "fractions": [{succ: f}]}``;
    a bin without exits has an empty fractions dict.  Empty when ``state`` is
    never left.
    """
    bins = _check_bins(bins)
    vs = visits(lt)
    nb = len(bins) + 1
    counts: list[dict[str, int]] = [dict() for _ in range(nb)]
    for a, b in zip(vs, vs[1:]):
        if a.state != state:
            continue
        k = _bin_index(a.duration, bins)
        counts[k][b.state] = counts[k].get(b.state, 0) + 1
    if not any(counts):
        return {"bins": bin_labels(bins), "counts": [], "fractions": []}
    fracs = []
    for c in counts:
        tot = sum(c.values())
        fracs.append({k: v / tot for k, v in c.items()} if tot else {})
    return {"bins": bin_labels(bins), "counts": counts, "fractions": fracs}


def history_dependence(lt_or_visits, state: str, skip: Iterable[str] = ()):
    """``P(next | previous)`` at ``state``.

    ``skip`` names transitional states that are removed from the visit
    sequence first (so with ``skip=("turn",)`` the predecessor of a forward
    visit entered through a turn is the reversal before it).  Returns
    ``{"counts": {prev: {next: n}}, "probabilities": {prev: {next: p}}}``
    or ``EMPTY`` when no visit to ``state`` has both neighbours.
    """
    vs = visits(lt_or_visits) if isinstance(lt_or_visits, LabeledTrajectory) else list(lt_or_visits)
    seq = [v.state if isinstance(v, Visit) else v for v in vs]
    skip = set(skip)
    seq = [s for s in seq if s not in skip]
    # skipping can make a state follow itself; merge those
    merged: list[str] = []
    for s in seq:
        if not merged or merged[-1] != s:
            merged.append(s)
    counts: dict[str, dict[str, int]] = {}
    for prev, cur, nxt in zip(merged, merged[1:], merged[2:]):
        if cur != state:
            continue
        row = counts.setdefault(prev, {})
        row[nxt] = row.get(nxt, 0) + 1
    if not counts:
        return EMPTY
    probs = {p: {n: c / sum(r.values()) for n, c in r.items()} for p, r in counts.items()}
    return {"counts": counts, "probabilities": probs}


def conditional_vs_marginal(lt_or_visits, state: str, prev: str, nxt: str,
                            skip: Iterable[str] = ()) -> tuple[float, float]:
    """(P(nxt | state, previous=prev), P(nxt | state)) from the same visit sequence."""
    h = history_dependence(lt_or_visits, state, skip)
    if not h:
        return math.nan, math.nan
    row = h["counts"].get(prev, {})
    cond = row.get(nxt, 0) / sum(row.values()) if row else math.nan
    tot = sum(sum(r.values()) for r in h["counts"].values())
    marg = sum(r.get(nxt, 0) for r in h["counts"].values()) / tot
    return cond, marg


# ----------------------------------------------------------------- ensemble

def lattice_points(spec: NetworkSpec, n: int, spread: float = 0.02) -> list[tuple[float, float]]:
    """Deterministic seed points along the start of every corridor, off the manifold.

    Points are placed on a ladder of offsets in ``(0, spread]`` on both sides
    of each corridor's first point, cycling through corridors.
    """
    if n < 1:
        raise ValueError("need at least one seed point")
    out = []
    cors = spec.corridors
    for k in range(n):
        c = cors[k % len(cors)]
        (x0, y0) = c.path[0]
        src = spec.fixed_point(c.source).position
        dx, dy = x0 - src[0], y0 - src[1]
        nrm = math.hypot(dx, dy)
        rung = k // len(cors)
        frac = ((rung * 0.6180339887498949) % 1.0) * 0.9 + 0.1
        side = 1.0 if rung % 2 == 0 else -1.0
        off = side * spread * frac
        out.append((x0 - off * dy / nrm, y0 + off * dx / nrm))
    return out


@dataclass
class EnsembleResult:
    stats: SwitchingStats
    visit_sequences: list[list[Visit]] = field(default_factory=list)


def _run_one(spec: NetworkSpec, point, n_transitions: int, max_steps: int, bins,
             keep: bool):
    c = core.compile_spec(spec)
    armed = np.ones(len(c.Q), dtype=np.uint8)
    # repeated visits to one state separated by a gap merge into one visit,
    # so ask for more closed runs than transitions and trim afterwards
    want = int(n_transitions) + 1
    vals, lens, status, steps, x, y = core.backend.visits(
        c.P, c.Q, c.box, c.dt, float(point[0]), float(point[1]), int(max_steps),
        want + want // 2 + 2, int(spec.min_visit), c.D, c.T, armed)
    if status == 2:
        raise SingularityError("rotational singularity during ensemble run")
    vals = np.asarray(vals)
    lens = np.asarray(lens)
    # the trailing run is still open: its dwell is censored
    if len(vals) and status == 0 and steps < max_steps:
        vals, lens = vals[:-1], lens[:-1]
    vs = _visits_from_runs(vals, lens, c.states, c.dt, spec.min_visit)[:want]
    st = SwitchingStats.zeros(c.states, bins)
    st.add_visits(vs)
    _count_gaps(st, vals, lens)
    if status == 1:
        st.escaped += 1
    return st, (vs if keep else [])


def ensemble(spec: NetworkSpec, n_transitions: int, *, seed_points: Sequence | None = None,
             n_seeds: int = 8, bins: Sequence[float] = DEFAULT_BINS, threads: int = 1,
             max_steps: int | None = None, keep_visits: bool = False) -> EnsembleResult:
    """Switching statistics pooled over trajectories from deterministic seed points.

    The transition budget is split evenly over the seeds.  Runs are executed
    on ``threads`` worker threads (the compiled kernels release the GIL) and
    merged in seed order, so the result does not depend on ``threads``.
    """
    bins = _check_bins(bins)
    if seed_points is None:
        seed_points = lattice_points(spec, n_seeds)
    seed_points = [tuple(map(float, p)) for p in seed_points]
    if not seed_points:
        raise ValueError("no seed points")
    per = max(1, -(-int(n_transitions) // len(seed_points)))
    if max_steps is None:
        max_steps = per * 20_000
    core.compile_spec(spec)  # warm the cache before threads share it
    jobs = [(spec, p, per, max_steps, bins, keep_visits) for p in seed_points]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda a: _run_one(*a), jobs))
    else:
        parts = [_run_one(*a) for a in jobs]
    total = SwitchingStats.zeros(core.compile_spec(spec).states, bins)
    seqs = []
    for st, vs in parts:
        total = total.merge(st)
        seqs.append(vs)
    return EnsembleResult(total, seqs)


# ------------------------------------------------------- geometry helpers

def distance_to_cycle(spec: NetworkSpec, point, corridors: Sequence[str] | None = None) -> float:
    """Distance from ``point`` to the union of the given corridor polylines (all by default)."""
    ids = corridors if corridors is not None else [c.id for c in spec.corridors]
    return min(polyline_dist(float(point[0]), float(point[1]), spec.corridor_polyline(c))
               for c in ids)


def first_leg_section(spec: NetworkSpec, cid: str, half_width: float = 0.25):
    """Transverse segment across the midpoint of a corridor's first leg.

    On the first leg the corridor coincides with the source's unstable axis,
    so the distance of a crossing point to the corridor is its exact distance
    to the heteroclinic orbit.
    """
    c = spec.corridor(cid)
    a = spec.fixed_point(c.source).position
    b = c.path[1] if len(c.path) > 1 else spec.fixed_point(c.target).position
    mx, my = 0.5 * (c.path[0][0] + b[0]), 0.5 * (c.path[0][1] + b[1])
    dx, dy = b[0] - a[0], b[1] - a[1]
    n = math.hypot(dx, dy)
    nx, ny = -dy / n, dx / n
    return (mx - half_width * nx, my - half_width * ny), (mx + half_width * nx, my + half_width * ny)


def section_crossings(points: np.ndarray, section) -> list[tuple[int, tuple[float, float]]]:
    """(step, crossing point) for each step segment that crosses ``section``."""
    pts = np.asarray(points, dtype=float)
    (ax, ay), (bx, by) = section
    lo_x, hi_x = min(ax, bx), max(ax, bx)
    lo_y, hi_y = min(ay, by), max(ay, by)
    out = []
    for k in range(len(pts) - 1):
        p, q = pts[k], pts[k + 1]
        if max(p[0], q[0]) < lo_x or min(p[0], q[0]) > hi_x:
            continue
        if max(p[1], q[1]) < lo_y or min(p[1], q[1]) > hi_y:
            continue
        hit = segment_intersection((p[0], p[1]), (q[0], q[1]), section[0], section[1])
        if hit is not None and hit[0] < 1.0:
            t = hit[0]
            out.append((k + 1, (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))))
    return out


def run_ensemble_safe(spec: NetworkSpec, n_transitions: int, **kw) -> EnsembleResult | None:
    """:func:`ensemble` that returns ``None`` instead of raising on escape/singularity."""
    try:
        return ensemble(spec, n_transitions, **kw)
    except (EscapeError, SingularityError):
        return None
