"""Global vector field: local linear/transversal/rotational dynamics blended by tanh windows.

These scalar functions are the reference formulas.  The compiled core in
``hetnet._core`` evaluates the same expressions in the same order, so both
backends agree bit for bit.
"""
from __future__ import annotations

from math import sqrt, tanh
from typing import NamedTuple

from .netspec import FieldPiece, FixedPointSpec, Linear, NetworkSpec, Rect, Rotational, Transversal

# tanh(x) rounds to exactly +-1 once |x| > 19.1; beyond this many slope-lengths
# from a region edge a window factor is exactly zero
CUTOFF = 20.0


class Velocity(NamedTuple):
    vx: float
    vy: float


class DomainError(ValueError):
    """Point outside the simulation box."""


class SingularityError(ValueError):
    """Rotational piece evaluated at its own center."""


def eval_weight(point, region: Rect, slope_s: float) -> float:
    x, y = point
    s = slope_s
    return 0.25 * (tanh(s * (x - region.x1)) - tanh(s * (x - region.x2))) * (
        tanh(s * (y - region.y1)) - tanh(s * (y - region.y2)))


def eval_linear(point, fp: FixedPointSpec) -> Velocity:
    lh, lv = fp.axis_rates
    return Velocity(lh * (point[0] - fp.position[0]), lv * (point[1] - fp.position[1]))


def eval_transversal(point, a: float, b: float, c: float, orientation: str) -> Velocity:
    if orientation == "horizontal":
        return Velocity(c, -a * (point[1] - b))
    return Velocity(-a * (point[0] - b), c)


def eval_rotational(point, a: float, b: float, c: float, center) -> Velocity:
    """Attracting circle of radius ``b`` around ``center`` with angular speed ``c``.

    In Cartesian form ``r' cos(t) - r sin(t) t'`` reduces to ``a (b - r) dx - c dy``.
    """
    dx = point[0] - center[0]
    dy = point[1] - center[1]
    r = sqrt(dx * dx + dy * dy)
    if r == 0.0:
        raise SingularityError(f"rotational piece evaluated at its center {tuple(center)}")
    k = a * (b - r)
    return Velocity(k * dx - c * dy, k * dy + c * dx)


def local_velocity(piece: FieldPiece, point, spec: NetworkSpec) -> Velocity:
    loc = piece.local
    if isinstance(loc, Linear):
        return eval_linear(point, spec.fixed_point(loc.fixed_point))
    if isinstance(loc, Transversal):
        return eval_transversal(point, loc.a, loc.b, loc.c, loc.orientation)
    assert isinstance(loc, Rotational)
    return eval_rotational(point, loc.a, loc.b, loc.c, loc.center)


def _culled(point, region: Rect, s: float) -> bool:
    x, y = point
    lim = CUTOFF / s
    return (x < region.x1 - lim or x > region.x2 + lim
            or y < region.y1 - lim or y > region.y2 + lim)


def eval_field(spec: NetworkSpec, point) -> Velocity:
    """Sum of ``w_i(point) * f_i(point)`` over the pieces in declaration order.

    Pieces whose window is exactly zero at ``point`` are skipped; this does
    not change the result.
    """
    if not spec.domain_box.contains(point[0], point[1]):
        raise DomainError(f"point {tuple(point)} outside domain_box")
    vx = 0.0
    vy = 0.0
    for piece in spec.pieces:
        if _culled(point, piece.region, piece.slope):
            continue
        w = eval_weight(point, piece.region, piece.slope)
        f = local_velocity(piece, point, spec)
        vx += w * f.vx
        vy += w * f.vy
    return Velocity(vx, vy)
