"""Discrete-time evolution: the Euler map of the blended field plus one-shot corridor kicks."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from .field import DomainError, SingularityError, eval_field
from .netspec import KernelParams, NetworkSpec

_OK, _ESCAPED, _SINGULAR = 0, 1, 2


class EscapeError(RuntimeError):
    """The orbit left the domain box.  ``last_point`` is the last valid point."""

    def __init__(self, step: int, last_point: tuple[float, float]):
        self.step = step
        self.last_point = last_point
        super().__init__(f"trajectory escaped the domain box after step {step} "
                         f"(last valid point {last_point})")


@dataclass(frozen=True)
class PerturbationKernel:
    """Even piecewise-tanh kick profile scaled to a displacement.

    ``input_scale`` is the half-width (in length units) of the fundamental
    domain that the kernel's core ``[-1, 1]`` is stretched over.
    """

    params: KernelParams
    amplitude: float
    input_scale: float = 1.0


def g_unit(x: float, p: KernelParams) -> float:
    """Dimensionless kick profile; even in ``x``."""
    return core._purecore.kernel_g(float(x), p.L1, p.L2, p.s1, p.s2, p.s3, p.b)


def eval_g(kernel: PerturbationKernel, u: float) -> float:
    """Signed displacement for section coordinate ``u``; the sign picks the branch."""
    return kernel.amplitude * g_unit(u / kernel.input_scale, kernel.params)


def kernel_for(spec: NetworkSpec, corridor: str) -> PerturbationKernel:
    for p in spec.perturbations:
        if p.corridor == corridor:
            return PerturbationKernel(p.params, p.amplitude, spec.input_scale(p))
    raise KeyError(f"no perturbation on corridor {corridor!r}")


@dataclass
class Trajectory:
    t0: float
    dt: float
    points: np.ndarray
    # (step index, corridor id, kick displacement)
    perturbation_events: list[tuple[int, str, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.points))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "t", "x", "y"])
        for k, (x, y) in enumerate(self.points):
            w.writerow([k, repr(self.t0 + k * self.dt), repr(float(x)), repr(float(y))])
        return buf.getvalue()

    def events_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "corridor", "kick"])
        for k, cid, kick in self.perturbation_events:
            w.writerow([k, cid, repr(float(kick))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, events_text: str | None = None) -> "Trajectory":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            return cls(0.0, 1.0, np.zeros((0, 2)))
        pts = np.array([[float(r["x"]), float(r["y"])] for r in rows])
        t0 = float(rows[0]["t"])
        dt = float(rows[1]["t"]) - t0 if len(rows) > 1 else 1.0
        events = []
        if events_text:
            for r in csv.DictReader(io.StringIO(events_text)):
                events.append((int(r["step"]), r["corridor"], float(r["kick"])))
        return cls(t0, dt, pts, events)


def step(spec: NetworkSpec, point) -> tuple[float, float]:
    """One Euler step ``x + dt f(x)`` of the unperturbed map."""
    v = eval_field(spec, point)
    x = point[0] + spec.dt * v.vx
    y = point[1] + spec.dt * v.vy
    if not spec.domain_box.contains(x, y):
        raise EscapeError(0, (float(point[0]), float(point[1])))
    return x, y


def _raise_for(status: int, n_done: int, last) -> None:
    if status == _ESCAPED:
        raise EscapeError(n_done, (float(last[0]), float(last[1])))
    if status == _SINGULAR:
        raise SingularityError(f"rotational singularity hit after step {n_done}")


def _check_start(spec: NetworkSpec, point) -> None:
    if not spec.domain_box.contains(float(point[0]), float(point[1])):
        raise DomainError(f"initial point {tuple(point)} outside domain_box")


def advance(spec: NetworkSpec, point, n_steps: int, *, backend: str | None = None) -> Trajectory:
    """Iterate the perturbed map ``n_steps`` times from ``point``.

    A kick fires when a step crosses an armed section; the crossing fraction
    along the step sets the kernel argument and the kick moves the post-step
    point along the section.  A section re-arms once the orbit is farther
    than ``2 * input_scale`` from it.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    _check_start(spec, point)
    c = core.compile_spec(spec)
    be = core.get_backend(backend)
    armed = np.ones(len(c.Q), dtype=np.uint8)
    pts, ev_s, ev_i, ev_k, status, n_done = be.simulate(
        c.P, c.Q, c.box, c.dt, float(point[0]), float(point[1]), int(n_steps), armed)
    _raise_for(status, n_done, pts[-1])
    events = [(int(s), c.pert_corridors[int(i)], float(k)) for s, i, k in zip(ev_s, ev_i, ev_k)]
    return Trajectory(0.0, spec.dt, pts, events)


def separation_growth(spec: NetworkSpec, point, epsilon: float = 1e-9, n_steps: int = 10_000,
                      renorm_every: int = 10, *, backend: str | None = None) -> float:
    """Largest Lyapunov exponent estimate (1/time) from two renormalised trajectories."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    _check_start(spec, point)
    c = core.compile_spec(spec)
    be = core.get_backend(backend)
    total, status, steps = be.lyapunov(c.P, c.Q, c.box, c.dt, float(point[0]), float(point[1]),
                                       float(epsilon), int(n_steps), int(renorm_every))
    if status == _ESCAPED:
        raise EscapeError(steps, (math.nan, math.nan))
    if status == _SINGULAR:
        raise SingularityError("rotational singularity during separation run")
    return total / (steps * spec.dt)


def default_init(spec: NetworkSpec, offset: float = 0.01) -> tuple[float, float]:
    """A point just off the start of the first corridor, inside the tube."""
    c = spec.corridors[0]
    (x0, y0) = c.path[0]
    src = spec.fixed_point(c.source).position
    dx, dy = x0 - src[0], y0 - src[1]
    n = math.hypot(dx, dy)
    # left normal of the departure direction
    return x0 - offset * dy / n, y0 + offset * dx / n
