"""Pure-Python fallback for the hot loops in ``_core.pyx``.

Array layouts (see ``hetnet.core.compile_spec``):

P (pieces, 11 columns)
    kind, x1, x2, y1, y2, s, p0..p4.  kind 0 linear (px, py, lam_h, lam_v),
    1 transversal horizontal (a, b, c), 2 transversal vertical (a, b, c),
    3 rotational (a, b, c, cx, cy).
Q (perturbations, 16 columns)
    section start (2), section end (2), travel direction (2), unit kick
    direction (2), L1, L2, s1, s2, s3, b, amplitude, guard radius.
D (disks, 4 columns)
    cx, cy, radius, state index.
T (tube segments, 6 columns)
    ax, ay, bx, by, radius, state index.

Status codes: 0 ok, 1 escaped the domain box, 2 rotational singularity.
"""
from __future__ import annotations

from math import log, sqrt, tanh

import numpy as np

NAME = "python"

CUTOFF = 20.0
OK, ESCAPED, SINGULAR = 0, 1, 2


class _Singular(Exception):
    pass


def _field(P, x, y):
    vx = 0.0
    vy = 0.0
    for row in P:
        kind, x1, x2, y1, y2, s, p0, p1, p2, p3, p4 = row
        lim = CUTOFF / s
        if x < x1 - lim or x > x2 + lim or y < y1 - lim or y > y2 + lim:
            continue
        w = 0.25 * (tanh(s * (x - x1)) - tanh(s * (x - x2))) * (
            tanh(s * (y - y1)) - tanh(s * (y - y2)))
        if kind == 0.0:
            fx = p2 * (x - p0)
            fy = p3 * (y - p1)
        elif kind == 1.0:
            fx = p2
            fy = -p0 * (y - p1)
        elif kind == 2.0:
            fx = -p0 * (x - p1)
            fy = p2
        else:
            dx = x - p3
            dy = y - p4
            r = sqrt(dx * dx + dy * dy)
            if r == 0.0:
                raise _Singular
            k = p0 * (p1 - r)
            fx = k * dx - p2 * dy
            fy = k * dy + p2 * dx
        vx += w * fx
        vy += w * fy
    return vx, vy


def field(P, x, y):
    P = [tuple(map(float, r)) for r in P]
    try:
        return _field(P, float(x), float(y))
    except _Singular:
        raise ValueError("rotational singularity") from None


def kernel_g(a, L1, L2, s1, s2, s3, b):
    x = -a if a < 0.0 else a
    return (0.5 * (tanh(s1 * (x - L1)) + tanh(s1 * (x + L1)))
            - tanh(s2 * (x - (0.5 + b)))
            - 0.5 * (tanh(s3 * (x - (1.0 - L2))) - tanh(s3 * (x - (1.0 + L2)))))


def _seg_dist2(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    ll = dx * dx + dy * dy
    t = 0.0
    if ll > 0.0:
        t = ((px - ax) * dx + (py - ay) * dy) / ll
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    ex = px - (ax + t * dx)
    ey = py - (ay + t * dy)
    return ex * ex + ey * ey


def _step(P, Q, armed, dt, x, y):
    """One map iteration.  Returns (nx, ny, kicked index or -1, kick)."""
    vx, vy = _field(P, x, y)
    nx = x + dt * vx
    ny = y + dt * vy
    hit = -1
    kick = 0.0
    rx = nx - x
    ry = ny - y
    for j, q in enumerate(Q):
        if not armed[j]:
            continue
        s0x, s0y, s1x, s1y, tx, ty, ux, uy, L1, L2, k1, k2, k3, kb, amp, guard = q
        if rx * tx + ry * ty <= 0.0:
            continue
        sx = s1x - s0x
        sy = s1y - s0y
        den = rx * sy - ry * sx
        if den == 0.0:
            continue
        wx = s0x - x
        wy = s0y - y
        t = (wx * sy - wy * sx) / den
        u = (wx * ry - wy * rx) / den
        if 0.0 <= t < 1.0 and 0.0 <= u <= 1.0:
            a = 1.0 - 2.0 * t
            kick = amp * kernel_g(a, L1, L2, k1, k2, k3, kb)
            nx = nx + kick * ux
            ny = ny + kick * uy
            armed[j] = False
            hit = j
            break
    for j, q in enumerate(Q):
        if not armed[j] and j != hit:
            g2 = q[15] * q[15]
            if _seg_dist2(nx, ny, q[0], q[1], q[2], q[3]) > g2:
                armed[j] = True
    return nx, ny, hit, kick


def _rows(A):
    return [tuple(map(float, r)) for r in np.asarray(A, dtype=float)]


def _outside(box, x, y):
    return not (box[0] <= x <= box[1] and box[2] <= y <= box[3])


def simulate(P, Q, box, dt, x0, y0, n_steps, armed):
    """Iterate the map ``n_steps`` times from (x0, y0).

    ``armed`` (uint8 array, one per perturbation) is updated in place.
    Returns (points, ev_step, ev_index, ev_kick, status, n_done).
    """
    P, Q = _rows(P), _rows(Q)
    box = tuple(map(float, box))
    arm = [bool(a) for a in armed]
    pts = np.empty((n_steps + 1, 2))
    pts[0] = (x0, y0)
    x, y = float(x0), float(y0)
    ev_s, ev_i, ev_k = [], [], []
    status = OK
    n_done = 0
    for k in range(n_steps):
        try:
            nx, ny, hit, kick = _step(P, Q, arm, dt, x, y)
        except _Singular:
            status = SINGULAR
            break
        if _outside(box, nx, ny):
            status = ESCAPED
            break
        x, y = nx, ny
        pts[k + 1] = (x, y)
        n_done = k + 1
        if hit >= 0:
            ev_s.append(k + 1)
            ev_i.append(hit)
            ev_k.append(kick)
    armed[:] = arm
    return (pts[:n_done + 1], np.array(ev_s, dtype=np.int64), np.array(ev_i, dtype=np.int64),
            np.array(ev_k, dtype=float), status, n_done)


def _label(D, T, x, y):
    for cx, cy, r, st in D:
        dx = x - cx
        dy = y - cy
        if dx * dx + dy * dy < r * r:
            return int(st)
    for ax, ay, bx, by, r, st in T:
        if _seg_dist2(x, y, ax, ay, bx, by) < r * r:
            return int(st)
    return -1


def label_points(D, T, pts):
    D, T = _rows(D), _rows(T)
    return np.array([_label(D, T, float(x), float(y)) for x, y in pts], dtype=np.int64)


def visits(P, Q, box, dt, x0, y0, max_steps, max_visits, min_visit, D, T, armed):
    """Run-length encode the labels along a trajectory without storing it.

    Every run (including in-between runs, state -1) is reported.  Stops after
    ``max_steps`` iterations or once ``max_visits`` labelled runs of length
    >= ``min_visit`` have been closed.  Returns (run_state, run_len, status,
    steps_done, x_last, y_last).
    """
    P, Q, D, T = _rows(P), _rows(Q), _rows(D), _rows(T)
    box = tuple(map(float, box))
    arm = [bool(a) for a in armed]
    x, y = float(x0), float(y0)
    cur = _label(D, T, x, y)
    run = 1
    rs, rl = [], []
    closed = 0
    status = OK
    steps = 0
    while steps < max_steps:
        try:
            nx, ny, _, _ = _step(P, Q, arm, dt, x, y)
        except _Singular:
            status = SINGULAR
            break
        if _outside(box, nx, ny):
            status = ESCAPED
            break
        x, y = nx, ny
        steps += 1
        lab = _label(D, T, x, y)
        if lab == cur:
            run += 1
            continue
        rs.append(cur)
        rl.append(run)
        if cur >= 0 and run >= min_visit:
            closed += 1
        cur = lab
        run = 1
        if closed >= max_visits:
            break
    rs.append(cur)
    rl.append(run)
    armed[:] = arm
    return (np.array(rs, dtype=np.int64), np.array(rl, dtype=np.int64), status, steps, x, y)


def lyapunov(P, Q, box, dt, x0, y0, eps, n_steps, renorm):
    """Two-trajectory separation growth with renormalisation every ``renorm`` steps.

    Returns (sum of log growth factors, status, steps_done).
    """
    P, Q = _rows(P), _rows(Q)
    box = tuple(map(float, box))
    arm_a = [True] * len(Q)
    arm_b = [True] * len(Q)
    xa, ya = float(x0), float(y0)
    c = eps / sqrt(2.0)
    xb, yb = xa + c, ya + c
    total = 0.0
    status = OK
    steps = 0
    for k in range(n_steps):
        try:
            xa, ya, _, _ = _step(P, Q, arm_a, dt, xa, ya)
            xb, yb, _, _ = _step(P, Q, arm_b, dt, xb, yb)
        except _Singular:
            status = SINGULAR
            break
        if _outside(box, xa, ya) or _outside(box, xb, yb):
            status = ESCAPED
            break
        steps = k + 1
        if steps % renorm == 0 or steps == n_steps:
            dx = xb - xa
            dy = yb - ya
            d = sqrt(dx * dx + dy * dy)
            if d == 0.0:
                # trajectories merged onto the same float point
                total += log(2.2250738585072014e-308 / eps)
                xb, yb = xa + c, ya + c
                continue
            total += log(d / eps)
            xb = xa + dx * (eps / d)
            yb = ya + dy * (eps / d)
    return total, status, steps
