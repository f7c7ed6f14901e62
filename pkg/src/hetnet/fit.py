"""Fit spec parameters so simulated switching statistics match a target.

The loss compares pooled ensemble statistics with a target transition matrix
and, optionally, target dwell histograms and dwell-conditioned exit
fractions.  The search is scipy's bounded Nelder-Mead in coordinates
normalised to the unit box, restarted from deterministic perturbations of
the incumbent.  Ensemble runs start from a fixed lattice of seed points, so
every loss evaluation is a deterministic function of the parameters.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .analysis import DEFAULT_BINS, SwitchingStats, ensemble, lattice_points
from .dynamics import EscapeError
from .field import SingularityError
from .netspec import NetworkSpec, SpecError, from_dict, get_param, serialize, set_param, to_dict, validate

ROW_PENALTY = 2.0  # largest squared error a probability row can have
ESCAPE_FACTOR = 10.0
RESTARTS = 3
# deterministic restart offsets, in units of the box width
_RESTART_SHIFT = 0.2


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class FreeParam:
    path: str
    lower: float
    upper: float

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError(f"{self.path}: bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"{self.path}: lower bound must be below upper bound")


@dataclass
class Target:
    """Target statistics; every component is optional.

    ``matrix`` maps a source state to its successor probabilities (missing
    successors are 0).  ``dwell`` maps a state to per-bin visit fractions and
    ``exits`` a state to per-bin successor dicts (``None`` for an untargeted
    bin).
    """

    matrix: dict[str, dict[str, float]] = field(default_factory=dict)
    dwell: dict[str, list[float]] = field(default_factory=dict)
    exits: dict[str, list[dict[str, float] | None]] = field(default_factory=dict)
    bins: tuple[float, ...] = DEFAULT_BINS

    def check(self, states: Sequence[str]) -> None:
        known = set(states)
        for src, row in self.matrix.items():
            bad = ({src} | set(row)) - known
            if bad:
                raise ValueError(f"target matrix names unknown states {sorted(bad)}")
            if abs(math.fsum(row.values()) - 1.0) > 1e-6:
                raise ValueError(f"target row {src!r} does not sum to 1")
        nb = len(self.bins) + 1
        for s, h in self.dwell.items():
            if s not in known or len(h) != nb:
                raise ValueError(f"target dwell histogram for {s!r} needs {nb} bins")
        for s, rows in self.exits.items():
            if s not in known or len(rows) != nb:
                raise ValueError(f"target exit fractions for {s!r} need {nb} bins")

    @classmethod
    def from_stats(cls, st: SwitchingStats, *, dwell: Sequence[str] = (),
                   exits: Sequence[str] = ()) -> "Target":
        """Target equal to observed statistics (rows that were never left are skipped)."""
        m = st.transition_matrix
        matrix = {}
        for i, s in enumerate(st.states):
            if s in st.absent:
                continue
            matrix[s] = {t: float(m[i, j]) for j, t in enumerate(st.states) if m[i, j] > 0}
        dw = {s: [float(v) for v in st.dwell_histogram(s)] for s in dwell}
        ex = {}
        for s in exits:
            f = st.exit_fractions(s)
            ex[s] = [None if np.isnan(r[0]) else
                     {t: float(r[j]) for j, t in enumerate(st.states) if r[j] > 0} for r in f]
        return cls(matrix, dw, ex, st.bins)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"matrix": self.matrix}
        if self.dwell:
            d["dwell"] = self.dwell
        if self.exits:
            d["exits"] = self.exits
        d["bins"] = list(self.bins)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Target":
        return cls({k: dict(v) for k, v in d.get("matrix", {}).items()},
                   {k: list(v) for k, v in d.get("dwell", {}).items()},
                   {k: list(v) for k, v in d.get("exits", {}).items()},
                   tuple(d.get("bins", DEFAULT_BINS)))


@dataclass
class FitProblem:
    spec: NetworkSpec
    free_params: list[FreeParam]
    target: Target
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    budget: int = 10_000  # transitions per loss evaluation
    seed_points: list[tuple[float, float]] | None = None
    n_seeds: int = 8
    max_evals: int = 120
    tol: float = 1e-6
    start: dict[str, float] = field(default_factory=dict)
    threads: int = 1
    spec_source: str | None = None  # preset name the spec came from, for round-tripping

    def __post_init__(self):
        if not self.free_params:
            raise ValueError("need at least one free parameter")
        for fp in self.free_params:
            get_param(self.spec, fp.path)  # raises on unknown paths
        self.target.check(self.spec.state_ids)
        if self.seed_points is None:
            self.seed_points = lattice_points(self.spec, self.n_seeds)

    @property
    def paths(self) -> list[str]:
        return [p.path for p in self.free_params]

    def initial(self) -> np.ndarray:
        return np.array([self.start.get(p.path, get_param(self.spec, p.path))
                         for p in self.free_params], dtype=float)

    def apply(self, params: Sequence[float]) -> NetworkSpec:
        spec = self.spec
        for fp, v in zip(self.free_params, params):
            spec = set_param(spec, fp.path, float(v))
        return spec

    # -- JSON
    def to_dict(self) -> dict:
        d: dict[str, Any] = {"format": "hetnet-fit/1"}
        d["spec"] = {"preset": self.spec_source} if self.spec_source else to_dict(self.spec)
        d["free_params"] = [{"path": p.path, "lower": p.lower, "upper": p.upper}
                            for p in self.free_params]
        if self.start:
            d["start"] = self.start
        d["target"] = self.target.to_dict()
        d["weights"] = list(self.weights)
        d["budget"] = self.budget
        d["seed_points"] = [list(p) for p in self.seed_points]
        d["max_evals"] = self.max_evals
        d["tol"] = self.tol
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping, *, threads: int = 1) -> "FitProblem":
        src = d.get("spec")
        if isinstance(src, Mapping) and set(src) == {"preset"}:
            from .presets import load_preset
            spec, name = load_preset(src["preset"]), src["preset"]
        elif isinstance(src, Mapping):
            spec, name = from_dict(src), None
        else:
            raise SpecError("fit problem needs a 'spec' object (inline spec or {preset: name})")
        try:
            free = [FreeParam(p["path"], float(p["lower"]), float(p["upper"]))
                    for p in d["free_params"]]
            target = Target.from_dict(d["target"])
        except KeyError as e:
            raise SpecError(f"fit problem: missing required field {e.args[0]!r}") from None
        seeds = d.get("seed_points")
        return cls(spec, free, target,
                   weights=tuple(float(w) for w in d.get("weights", (1.0, 1.0, 1.0))),
                   budget=int(d.get("budget", 10_000)),
                   seed_points=[tuple(map(float, p)) for p in seeds] if seeds else None,
                   max_evals=int(d.get("max_evals", 120)), tol=float(d.get("tol", 1e-6)),
                   start={k: float(v) for k, v in d.get("start", {}).items()},
                   threads=threads, spec_source=name)

    @classmethod
    def from_json(cls, text: str, **kw) -> "FitProblem":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise SpecError(f"fit problem: {e.msg}", e.lineno, e.colno) from None
        return cls.from_dict(d, **kw)


@dataclass
class FitResult:
    best_params: dict[str, float]
    loss: float
    loss_trace: list[float]
    achieved: SwitchingStats
    spec: NetworkSpec
    n_evals: int

    def to_dict(self) -> dict:
        return {"best_params": self.best_params, "loss": self.loss,
                "loss_trace": self.loss_trace, "n_evals": self.n_evals,
                "achieved": self.achieved.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def spec_text(self) -> str:
        return serialize(self.spec)


# ------------------------------------------------------------------- loss

def _row_error(achieved: np.ndarray, want: np.ndarray) -> float:
    if np.isnan(achieved).any():
        return ROW_PENALTY
    return float(np.sum((achieved - want) ** 2))


def stats_loss(problem: FitProblem, st: SwitchingStats) -> tuple[float, dict[str, float]]:
    """Weighted loss of observed stats against the target, with per-component parts."""
    t = problem.target
    idx = {s: i for i, s in enumerate(st.states)}
    m = st.transition_matrix
    parts = {"matrix": 0.0, "dwell": 0.0, "exits": 0.0}
    for src, row in t.matrix.items():
        want = np.zeros(len(st.states))
        for dst, p in row.items():
            want[idx[dst]] = p
        parts["matrix"] += _row_error(m[idx[src]], want)
    for s, h in t.dwell.items():
        parts["dwell"] += _row_error(st.dwell_histogram(s), np.asarray(h, dtype=float))
    for s, rows in t.exits.items():
        f = st.exit_fractions(s)
        for k, row in enumerate(rows):
            if row is None:
                continue
            want = np.zeros(len(st.states))
            for dst, p in row.items():
                want[idx[dst]] = p
            parts["exits"] += _row_error(f[k], want)
    w1, w2, w3 = problem.weights
    return w1 * parts["matrix"] + w2 * parts["dwell"] + w3 * parts["exits"], parts


def escape_penalty(problem: FitProblem) -> float:
    """Loss assigned when a trajectory escapes: 10x the largest possible matrix loss."""
    return ESCAPE_FACTOR * problem.weights[0] * ROW_PENALTY * max(1, len(problem.target.matrix))


def simulate_stats(problem: FitProblem, params: Sequence[float]) -> SwitchingStats | None:
    """Pooled stats at ``params``, or None when a run escaped or the spec is invalid."""
    spec = problem.apply(params)
    if validate(spec):
        return None
    try:
        res = ensemble(spec, problem.budget, seed_points=problem.seed_points,
                       bins=problem.target.bins, threads=problem.threads)
    except (EscapeError, SingularityError):
        return None
    if res.stats.escaped:
        return None
    return res.stats


def loss(problem: FitProblem, params: Sequence[float]) -> float:
    """Scalar loss at ``params`` (which must lie within the bounds)."""
    params = np.asarray(params, dtype=float)
    for fp, v in zip(problem.free_params, params):
        if not fp.lower <= v <= fp.upper:
            raise ValueError(f"{fp.path} = {v!r} outside [{fp.lower!r}, {fp.upper!r}]")
    st = simulate_stats(problem, params)
    if st is None:
        return escape_penalty(problem)
    return stats_loss(problem, st)[0]


# ----------------------------------------------------------------- search

class _Evaluator:
    """Memoised loss over normalised coordinates, tracking the incumbent."""

    def __init__(self, problem: FitProblem):
        self.p = problem
        self.lo = np.array([f.lower for f in problem.free_params])
        self.width = np.array([f.upper - f.lower for f in problem.free_params])
        self.cache: dict[tuple[float, ...], float] = {}
        self.trace: list[float] = []
        self.best_u: np.ndarray | None = None
        self.best = math.inf
        self.n = 0
        self.all_escaped = True

    def to_params(self, u) -> np.ndarray:
        return self.lo + np.clip(np.asarray(u, dtype=float), 0.0, 1.0) * self.width

    def __call__(self, u) -> float:
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        key = tuple(u.tolist())
        if key in self.cache:
            return self.cache[key]
        if self.n >= self.p.max_evals:
            raise _Budget
        self.n += 1
        val = loss(self.p, self.to_params(u))
        if val < escape_penalty(self.p):
            self.all_escaped = False
        self.cache[key] = val
        if val < self.best:
            self.best, self.best_u = val, u.copy()
        self.trace.append(self.best)
        return val


class _Budget(Exception):
    pass


def _restart_points(u0: np.ndarray, k: int) -> np.ndarray:
    # alternate the sign pattern so restarts probe different corners
    signs = np.array([1.0 if (i + k) % 2 == 0 else -1.0 for i in range(len(u0))])
    u = u0 + _RESTART_SHIFT * signs
    return np.where((u < 0.0) | (u > 1.0), u0 - _RESTART_SHIFT * signs, u).clip(0.0, 1.0)


def fit(problem: FitProblem) -> FitResult:
    """Bounded Nelder-Mead with ``RESTARTS`` deterministic restarts.

    Stops when ``max_evals`` loss evaluations have been spent or the loss
    falls below ``tol``.  The result never lies outside the bounds.

    Raises
    ------
    FitError
        When every evaluated parameter vector escaped.
    """
    ev = _Evaluator(problem)
    x0 = problem.initial()
    u0 = np.clip((x0 - ev.lo) / ev.width, 0.0, 1.0)
    bounds = [(0.0, 1.0)] * len(u0)
    starts = [u0]
    try:
        ev(u0)
        for k in range(RESTARTS + 1):
            start = starts[-1] if k == 0 else _restart_points(ev.best_u, k)
            if ev.best <= problem.tol:
                break
            # initial simplex: 10% of the box along each axis, stepping inward
            simplex = [start]
            for i in range(len(start)):
                v = start.copy()
                v[i] = v[i] + 0.1 if v[i] + 0.1 <= 1.0 else v[i] - 0.1
                simplex.append(v)
            minimize(ev, start, method="Nelder-Mead", bounds=bounds,
                     options={"initial_simplex": np.array(simplex), "xatol": 1e-3,
                              "fatol": problem.tol, "maxfev": problem.max_evals})
    except _Budget:
        pass
    if ev.all_escaped:
        raise FitError("every loss evaluation escaped the domain")
    best = ev.to_params(ev.best_u)
    spec = problem.apply(best)
    st = simulate_stats(problem, best)
    assert st is not None
    return FitResult({p: float(v) for p, v in zip(problem.paths, best)}, ev.best, ev.trace,
                     st, spec, ev.n)
