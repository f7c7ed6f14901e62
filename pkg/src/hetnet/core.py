"""Backend selection and spec compilation for the hot loops.

The Cython extension ``hetnet._core`` is used when it was built; otherwise
the pure-Python ``hetnet._purecore`` takes over.  Set ``HETNET_BACKEND=python``
to force the fallback.
"""
from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass
from types import ModuleType

import numpy as np

from . import _purecore
from .netspec import Linear, NetworkSpec, Rotational, Transversal, segment_intersection


def _load_backend() -> ModuleType:
    if os.environ.get("HETNET_BACKEND", "").lower() == "python":
        return _purecore
    try:
        from . import _core
    except ImportError:
        return _purecore
    return _core


backend: ModuleType = _load_backend()
BACKEND = backend.NAME


def get_backend(name: str | None = None) -> ModuleType:
    if name is None:
        return backend
    if name == "python":
        return _purecore
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True, eq=False)
class Compiled:
    P: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    T: np.ndarray
    box: np.ndarray
    dt: float
    states: tuple[str, ...]
    pert_corridors: tuple[str, ...]


def _piece_rows(spec: NetworkSpec) -> np.ndarray:
    rows = []
    for p in spec.pieces:
        r = p.region
        loc = p.local
        if isinstance(loc, Linear):
            fp = spec.fixed_point(loc.fixed_point)
            lh, lv = fp.axis_rates
            tail = [0.0, fp.position[0], fp.position[1], lh, lv, 0.0]
        elif isinstance(loc, Transversal):
            kind = 1.0 if loc.orientation == "horizontal" else 2.0
            tail = [kind, loc.a, loc.b, loc.c, 0.0, 0.0]
        else:
            assert isinstance(loc, Rotational)
            tail = [3.0, loc.a, loc.b, loc.c, loc.center[0], loc.center[1]]
        rows.append([tail[0], r.x1, r.x2, r.y1, r.y2, p.slope, *tail[1:]])
    return np.array(rows, dtype=float).reshape(-1, 11)


def _travel_direction(spec: NetworkSpec, cid: str, section) -> tuple[float, float]:
    poly = spec.corridor_polyline(cid)
    for i in range(len(poly) - 1):
        if segment_intersection(section[0], section[1], poly[i], poly[i + 1]) is not None:
            dx, dy = poly[i + 1][0] - poly[i][0], poly[i + 1][1] - poly[i][1]
            n = math.hypot(dx, dy)
            return dx / n, dy / n
    raise ValueError(f"section of perturbation on {cid!r} does not cross its corridor")


def _pert_rows(spec: NetworkSpec) -> np.ndarray:
    rows = []
    for p in spec.perturbations:
        (ax, ay), (bx, by) = p.section
        n = math.hypot(bx - ax, by - ay)
        tx, ty = _travel_direction(spec, p.corridor, p.section)
        k = p.params
        guard = 2.0 * spec.input_scale(p)
        rows.append([ax, ay, bx, by, tx, ty, (bx - ax) / n, (by - ay) / n,
                     k.L1, k.L2, k.s1, k.s2, k.s3, k.b, p.amplitude, guard])
    return np.array(rows, dtype=float).reshape(-1, 16)


@functools.lru_cache(maxsize=64)
def compile_spec(spec: NetworkSpec) -> Compiled:
    states = tuple(spec.state_ids)
    index = {s: i for i, s in enumerate(states)}
    disks = [[*fp.position, fp.region_radius, index[fp.id]] for fp in spec.fixed_points]
    tubes = []
    for c in spec.corridors:
        if c.state is None:
            continue
        pts = c.path if len(c.path) > 1 else (c.path[0], c.path[0])
        for i in range(len(pts) - 1):
            tubes.append([*pts[i], *pts[i + 1], c.tube_radius, index[c.state]])
    box = spec.domain_box
    return Compiled(
        P=np.ascontiguousarray(_piece_rows(spec)),
        Q=np.ascontiguousarray(_pert_rows(spec)),
        D=np.ascontiguousarray(np.array(disks, dtype=float).reshape(-1, 4)),
        T=np.ascontiguousarray(np.array(tubes, dtype=float).reshape(-1, 6)),
        box=np.array([box.x1, box.x2, box.y1, box.y2], dtype=float),
        dt=spec.dt,
        states=states,
        pert_corridors=tuple(p.corridor for p in spec.perturbations),
    )
