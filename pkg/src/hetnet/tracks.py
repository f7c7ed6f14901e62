"""Lay down field pieces along axis-aligned "train tracks".

Each fixed point gets a square linear box; each straight corridor leg a
transversal piece attracting onto the leg; each corner a rotational piece
whose attracting circle rounds the corner.  This is the authoring tool the
preset files were generated with; the resulting pieces are written out in
full, so simulations never depend on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import core

from .netspec import (
    CorridorSpec, FieldPiece, FixedPointSpec, KernelParams, Linear, NetworkSpec, PerturbationSpec,
    Rect, Rotational, Transversal,
)


@dataclass
class Track:
    """A corridor to lay down: ``corners`` are the turning points between the two fixed points."""

    id: str
    source: str
    target: str
    corners: Sequence[tuple[float, float]] = ()
    speed: float = 1.0
    contraction: float = 2.0
    final_contraction: float | None = None  # final (kicked) leg; defaults to ``contraction``
    corner_radius: float = 0.3
    state: str | None = None
    tube_radius: float | None = None


@dataclass
class Kick:
    corridor: str
    toward: str  # outgoing corridor of the target that positive kicks lead to
    params: KernelParams = field(default_factory=KernelParams)
    amplitude: float = 0.1
    offset: float = 0.5  # distance of the section before the target's linear box


def _unit(dx: float, dy: float) -> tuple[float, float]:
    if dx != 0.0 and dy != 0.0:
        raise ValueError("track legs must be axis-aligned")
    n = math.hypot(dx, dy)
    if n == 0.0:
        raise ValueError("repeated track point")
    return dx / n, dy / n


class TrackLayout:
    def __init__(self, fixed_points: Sequence[FixedPointSpec], *, box_half: float = 0.5,
                 tube: float = 0.25, slope: float = 40.0, corner_slope: float | None = None):
        self.fps = {fp.id: fp for fp in fixed_points}
        self.order = [fp.id for fp in fixed_points]
        self.box_half = box_half
        self.tube = tube
        self.slope = slope
        self.corner_slope = corner_slope or slope
        self.tracks: list[Track] = []
        self.kicks: list[Kick] = []

    def add(self, track: Track) -> "TrackLayout":
        self.tracks.append(track)
        return self

    def kick(self, kick: Kick) -> "TrackLayout":
        self.kicks.append(kick)
        return self

    def _polyline(self, t: Track) -> list[tuple[float, float]]:
        return [self.fps[t.source].position, *t.corners, self.fps[t.target].position]

    def _path(self, t: Track) -> tuple[tuple[float, float], ...]:
        poly = self._polyline(t)
        h = self.box_half
        d0 = _unit(poly[1][0] - poly[0][0], poly[1][1] - poly[0][1])
        d1 = _unit(poly[-1][0] - poly[-2][0], poly[-1][1] - poly[-2][1])
        start = (poly[0][0] + h * d0[0], poly[0][1] + h * d0[1])
        end = (poly[-1][0] - h * d1[0], poly[-1][1] - h * d1[1])
        return (start, *t.corners, end)

    def pieces_for(self, t: Track) -> list[FieldPiece]:
        poly = self._polyline(t)
        h, w, rc = self.box_half, self.tube, t.corner_radius
        out = []
        n = len(poly)
        dirs = [_unit(poly[i + 1][0] - poly[i][0], poly[i + 1][1] - poly[i][1]) for i in range(n - 1)]
        for i in range(n - 1):
            a, b = poly[i], poly[i + 1]
            d = dirs[i]
            trim0 = h if i == 0 else rc
            trim1 = h if i == n - 2 else rc
            s = (a[0] + trim0 * d[0], a[1] + trim0 * d[1])
            e = (b[0] - trim1 * d[0], b[1] - trim1 * d[1])
            ka = t.contraction
            if i == n - 2 and t.final_contraction is not None:
                ka = t.final_contraction
            if d[1] == 0.0:
                region = Rect(min(s[0], e[0]), max(s[0], e[0]), a[1] - w, a[1] + w)
                local = Transversal(ka, a[1], t.speed * d[0], "horizontal")
            else:
                region = Rect(a[0] - w, a[0] + w, min(s[1], e[1]), max(s[1], e[1]))
                local = Transversal(ka, a[0], t.speed * d[1], "vertical")
            out.append(FieldPiece(region, self.slope, local, t.id))
            if i < n - 2:
                da, db = d, dirs[i + 1]
                c = b
                ox = c[0] - rc * da[0] + rc * db[0]
                oy = c[1] - rc * da[1] + rc * db[1]
                qx = c[0] + w * (da[0] - db[0])
                qy = c[1] + w * (da[1] - db[1])
                turn = da[0] * db[1] - da[1] * db[0]
                region = Rect(min(ox, qx), max(ox, qx), min(oy, qy), max(oy, qy))
                local = Rotational(t.contraction / (rc * rc), rc, turn * t.speed / rc, (ox, oy))
                out.append(FieldPiece(region, self.corner_slope, local, t.id))
        return out

    def _section(self, k: Kick) -> tuple[tuple[float, float], tuple[float, float]]:
        t = next(t for t in self.tracks if t.id == k.corridor)
        out = next(o for o in self.tracks if o.id == k.toward)
        if out.source != t.target:
            raise ValueError(f"kick toward {out.id!r}: it does not leave {t.target!r}")
        poly = self._polyline(t)
        d_in = _unit(poly[-1][0] - poly[-2][0], poly[-1][1] - poly[-2][1])
        opoly = self._polyline(out)
        n = _unit(opoly[1][0] - opoly[0][0], opoly[1][1] - opoly[0][1])
        if abs(n[0] * d_in[0] + n[1] * d_in[1]) > 1e-12:
            raise ValueError("outgoing branch must be transverse to the incoming leg")
        dist = self.box_half + k.offset
        cx = poly[-1][0] - dist * d_in[0]
        cy = poly[-1][1] - dist * d_in[1]
        w = self.tube
        return (cx - w * n[0], cy - w * n[1]), (cx + w * n[0], cy + w * n[1])

    def build(self, *, name: str, description: str, dt: float, margin: float = 1.0,
              min_visit: int = 2, connect: bool = True) -> NetworkSpec:
        """Assemble the spec.

        With ``connect`` set, every corridor that turns a corner has the
        attracting line of its final leg shifted (by bisection on the
        unperturbed map) so that the source's unstable manifold lands exactly
        on the target's stable axis.
        """
        spec = self._assemble(name, description, dt, margin, min_visit)
        if connect:
            for t in self.tracks:
                if t.corners:
                    spec = restore_connection(spec, t.id)
        return spec

    def _assemble(self, name, description, dt, margin, min_visit) -> NetworkSpec:
        pieces = []
        h = self.box_half
        for fid in self.order:
            x, y = self.fps[fid].position
            pieces.append(FieldPiece(Rect(x - h, x + h, y - h, y + h), self.slope, Linear(fid)))
        corridors = []
        for t in self.tracks:
            pieces.extend(self.pieces_for(t))
            corridors.append(CorridorSpec(t.id, t.source, t.target, self._path(t), t.speed,
                                          t.state, t.tube_radius))
        perts = [PerturbationSpec(k.corridor, self._section(k), k.params, k.amplitude)
                 for k in self.kicks]
        xs = [v for p in pieces for v in (p.region.x1, p.region.x2)]
        ys = [v for p in pieces for v in (p.region.y1, p.region.y2)]
        box = Rect(min(xs) - margin, max(xs) + margin, min(ys) - margin, max(ys) + margin)
        return NetworkSpec(tuple(self.fps[f] for f in self.order), tuple(pieces), tuple(corridors),
                           tuple(perts), dt, box, name, description, min_visit)


def _final_leg_index(spec: NetworkSpec, cid: str) -> int:
    idx = [i for i, p in enumerate(spec.pieces)
           if p.corridor == cid and isinstance(p.local, Transversal)]
    return idx[-1]


def landing_offset(spec: NetworkSpec, cid: str, max_steps: int | None = None) -> float:
    """Signed unstable coordinate with which the source's unstable manifold leaves the target.

    Shoots from the start of the corridor path (exactly on the source's
    unstable axis) with the unperturbed map and records the target-frame
    unstable coordinate when the orbit first leaves the target's disk.  The
    sign says which outgoing branch the manifold takes; a near-zero value
    after ``max_steps`` means the corridor is a saddle connection to float
    resolution.
    """
    c = spec.corridor(cid)
    dst = spec.fixed_point(c.target)
    poly = spec.corridor_polyline(cid)
    length = sum(math.dist(poly[i], poly[i + 1]) for i in range(len(poly) - 1))
    if max_steps is None:
        # travel time plus the dwell needed to grow from 1e-17 to the disk edge
        dwell = math.log(dst.region_radius / 1e-17) / dst.lambda_u
        max_steps = int((2 * length / c.speed + 2 * dwell) / spec.dt)
    cs = core.compile_spec(spec)
    pts, *_ = core.backend.simulate(cs.P, np.zeros((0, 16)), cs.box, cs.dt, c.path[0][0],
                                    c.path[0][1], max_steps, np.zeros(0, dtype=np.uint8))
    d = np.hypot(pts[:, 0] - dst.position[0], pts[:, 1] - dst.position[1])
    inside = d < dst.region_radius
    if not inside.any():
        raise ValueError(f"corridor {cid!r}: manifold never reaches {dst.id!r}")
    first = int(np.argmax(inside))
    left = np.nonzero(~inside[first:])[0]
    x, y = pts[first + left[0]] if len(left) else pts[-1]
    if dst.stable_axis == "horizontal":
        return float(y - dst.position[1])
    return float(x - dst.position[0])


def restore_connection(spec: NetworkSpec, cid: str, span: float = 0.05,
                       max_span: float = 0.2) -> NetworkSpec:
    k = _final_leg_index(spec, cid)
    piece = spec.pieces[k]
    b0 = piece.local.b

    def with_b(b: float) -> NetworkSpec:
        pieces = list(spec.pieces)
        pieces[k] = replace(piece, local=replace(piece.local, b=b))
        return replace(spec, pieces=tuple(pieces))

    while True:
        lo, hi = b0 - span, b0 + span
        f_lo = landing_offset(with_b(lo), cid)
        f_hi = landing_offset(with_b(hi), cid)
        if f_lo == 0.0:
            return with_b(lo)
        if f_hi == 0.0:
            return with_b(hi)
        if (f_lo > 0) != (f_hi > 0):
            break
        if span >= max_span:
            raise ValueError(f"corridor {cid!r}: no connection within +-{span} of the leg line")
        span = min(2 * span, max_span)
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = landing_offset(with_b(mid), cid)
        if f_mid == 0.0:
            return with_b(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return with_b(lo if abs(f_lo) < abs(landing_offset(with_b(hi), cid)) else hi)
