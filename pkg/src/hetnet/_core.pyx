# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  Same arithmetic, in the same order, as ``_purecore``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, sqrt, log
from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport int64_t

cnp.import_array()

NAME = "cython"

cdef double CUTOFF = 20.0
cdef int OK = 0
cdef int ESCAPED = 1
cdef int SINGULAR = 2


cdef int _field(const double[:, ::1] P, double x, double y, double* vx_out, double* vy_out) noexcept nogil:
    cdef Py_ssize_t i
    cdef double vx = 0.0, vy = 0.0
    cdef double kind, x1, x2, y1, y2, s, p0, p1, p2, p3, p4, lim, w, fx, fy, dx, dy, r, k
    for i in range(P.shape[0]):
        kind = P[i, 0]; x1 = P[i, 1]; x2 = P[i, 2]; y1 = P[i, 3]; y2 = P[i, 4]; s = P[i, 5]
        p0 = P[i, 6]; p1 = P[i, 7]; p2 = P[i, 8]; p3 = P[i, 9]; p4 = P[i, 10]
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
                return SINGULAR
            k = p0 * (p1 - r)
            fx = k * dx - p2 * dy
            fy = k * dy + p2 * dx
        vx += w * fx
        vy += w * fy
    vx_out[0] = vx
    vy_out[0] = vy
    return OK


cdef inline double _kernel_g(double a, double L1, double L2, double s1, double s2,
                             double s3, double b) noexcept nogil:
    cdef double x = -a if a < 0.0 else a
    return (0.5 * (tanh(s1 * (x - L1)) + tanh(s1 * (x + L1)))
            - tanh(s2 * (x - (0.5 + b)))
            - 0.5 * (tanh(s3 * (x - (1.0 - L2))) - tanh(s3 * (x - (1.0 + L2)))))


cdef inline double _seg_dist2(double px, double py, double ax, double ay,
                              double bx, double by) noexcept nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double ll = dx * dx + dy * dy
    cdef double t = 0.0, ex, ey
    if ll > 0.0:
        t = ((px - ax) * dx + (py - ay) * dy) / ll
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    ex = px - (ax + t * dx)
    ey = py - (ay + t * dy)
    return ex * ex + ey * ey


cdef int _step(const double[:, ::1] P, const double[:, ::1] Q, unsigned char* armed,
               double dt, double x, double y, double* nx_out, double* ny_out,
               int* hit_out, double* kick_out) noexcept nogil:
    cdef double vx, vy, nx, ny, rx, ry, sx, sy, den, wx, wy, t, u, a, kick = 0.0, g2
    cdef Py_ssize_t j
    cdef int hit = -1
    if _field(P, x, y, &vx, &vy) != OK:
        return SINGULAR
    nx = x + dt * vx
    ny = y + dt * vy
    rx = nx - x
    ry = ny - y
    for j in range(Q.shape[0]):
        if not armed[j]:
            continue
        if rx * Q[j, 4] + ry * Q[j, 5] <= 0.0:
            continue
        sx = Q[j, 2] - Q[j, 0]
        sy = Q[j, 3] - Q[j, 1]
        den = rx * sy - ry * sx
        if den == 0.0:
            continue
        wx = Q[j, 0] - x
        wy = Q[j, 1] - y
        t = (wx * sy - wy * sx) / den
        u = (wx * ry - wy * rx) / den
        if 0.0 <= t < 1.0 and 0.0 <= u <= 1.0:
            a = 1.0 - 2.0 * t
            kick = Q[j, 14] * _kernel_g(a, Q[j, 8], Q[j, 9], Q[j, 10], Q[j, 11], Q[j, 12], Q[j, 13])
            nx = nx + kick * Q[j, 6]
            ny = ny + kick * Q[j, 7]
            armed[j] = 0
            hit = <int>j
            break
    for j in range(Q.shape[0]):
        if not armed[j] and j != hit:
            g2 = Q[j, 15] * Q[j, 15]
            if _seg_dist2(nx, ny, Q[j, 0], Q[j, 1], Q[j, 2], Q[j, 3]) > g2:
                armed[j] = 1
    nx_out[0] = nx
    ny_out[0] = ny
    hit_out[0] = hit
    kick_out[0] = kick
    return OK


cdef inline bint _outside(const double[::1] box, double x, double y) noexcept nogil:
    return not (box[0] <= x <= box[1] and box[2] <= y <= box[3])


cdef inline int _label(const double[:, ::1] D, const double[:, ::1] T, double x, double y) noexcept nogil:
    cdef Py_ssize_t i
    cdef double dx, dy, r
    for i in range(D.shape[0]):
        dx = x - D[i, 0]
        dy = y - D[i, 1]
        r = D[i, 2]
        if dx * dx + dy * dy < r * r:
            return <int>D[i, 3]
    for i in range(T.shape[0]):
        r = T[i, 4]
        if _seg_dist2(x, y, T[i, 0], T[i, 1], T[i, 2], T[i, 3]) < r * r:
            return <int>T[i, 5]
    return -1


def _c2d(A, ncol):
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.size == 0:
        return np.zeros((0, ncol), dtype=np.float64)
    return A


def field(P, double x, double y):
    cdef const double[:, ::1] Pv = _c2d(P, 11)
    cdef double vx, vy
    if _field(Pv, x, y, &vx, &vy) != OK:
        raise ValueError("rotational singularity")
    return vx, vy


def kernel_g(double a, double L1, double L2, double s1, double s2, double s3, double b):
    return _kernel_g(a, L1, L2, s1, s2, s3, b)


def label_points(D, T, pts):
    cdef const double[:, ::1] Dv = _c2d(D, 4)
    cdef const double[:, ::1] Tv = _c2d(T, 6)
    cdef const double[:, ::1] X = np.ascontiguousarray(pts, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(X.shape[0]):
            o[i] = _label(Dv, Tv, X[i, 0], X[i, 1])
    return out


def simulate(P, Q, box, double dt, double x0, double y0, Py_ssize_t n_steps, armed):
    cdef const double[:, ::1] Pv = _c2d(P, 11)
    cdef const double[:, ::1] Qv = _c2d(Q, 16)
    cdef const double[::1] bx = np.ascontiguousarray(box, dtype=np.float64)
    arm = np.ascontiguousarray(armed, dtype=np.uint8).copy()
    cdef unsigned char[::1] av = arm
    cdef unsigned char* ap = &av[0] if av.shape[0] > 0 else NULL
    pts = np.empty((n_steps + 1, 2), dtype=np.float64)
    cdef double[:, ::1] pv = pts
    cdef Py_ssize_t cap = 64, nev = 0, k, n_done = 0
    cdef int64_t* es = <int64_t*>malloc(cap * sizeof(int64_t))
    cdef int64_t* ei = <int64_t*>malloc(cap * sizeof(int64_t))
    cdef double* ek = <double*>malloc(cap * sizeof(double))
    cdef double x = x0, y = y0, nx, ny, kick
    cdef int hit, status = OK
    pv[0, 0] = x0
    pv[0, 1] = y0
    with nogil:
        for k in range(n_steps):
            if _step(Pv, Qv, ap, dt, x, y, &nx, &ny, &hit, &kick) != OK:
                status = SINGULAR
                break
            if _outside(bx, nx, ny):
                status = ESCAPED
                break
            x = nx
            y = ny
            pv[k + 1, 0] = x
            pv[k + 1, 1] = y
            n_done = k + 1
            if hit >= 0:
                if nev == cap:
                    cap *= 2
                    es = <int64_t*>realloc(es, cap * sizeof(int64_t))
                    ei = <int64_t*>realloc(ei, cap * sizeof(int64_t))
                    ek = <double*>realloc(ek, cap * sizeof(double))
                es[nev] = k + 1
                ei[nev] = hit
                ek[nev] = kick
                nev += 1
    ev_s = np.array(<int64_t[:nev]>es if nev > 0 else [], dtype=np.int64)
    ev_i = np.array(<int64_t[:nev]>ei if nev > 0 else [], dtype=np.int64)
    ev_k = np.array(<double[:nev]>ek if nev > 0 else [], dtype=np.float64)
    free(es)
    free(ei)
    free(ek)
    armed[:] = arm
    return pts[:n_done + 1], ev_s, ev_i, ev_k, status, n_done


def visits(P, Q, box, double dt, double x0, double y0, Py_ssize_t max_steps,
           Py_ssize_t max_visits, Py_ssize_t min_visit, D, T, armed):
    cdef const double[:, ::1] Pv = _c2d(P, 11)
    cdef const double[:, ::1] Qv = _c2d(Q, 16)
    cdef const double[:, ::1] Dv = _c2d(D, 4)
    cdef const double[:, ::1] Tv = _c2d(T, 6)
    cdef const double[::1] bx = np.ascontiguousarray(box, dtype=np.float64)
    arm = np.ascontiguousarray(armed, dtype=np.uint8).copy()
    cdef unsigned char[::1] av = arm
    cdef unsigned char* ap = &av[0] if av.shape[0] > 0 else NULL
    cdef Py_ssize_t cap = 256, n = 0, closed = 0, steps = 0
    cdef int64_t* rs = <int64_t*>malloc(cap * sizeof(int64_t))
    cdef int64_t* rl = <int64_t*>malloc(cap * sizeof(int64_t))
    cdef double x = x0, y = y0, nx, ny, kick
    cdef int hit, status = OK, lab, cur
    cdef int64_t run = 1
    with nogil:
        cur = _label(Dv, Tv, x, y)
        while steps < max_steps:
            if _step(Pv, Qv, ap, dt, x, y, &nx, &ny, &hit, &kick) != OK:
                status = SINGULAR
                break
            if _outside(bx, nx, ny):
                status = ESCAPED
                break
            x = nx
            y = ny
            steps += 1
            lab = _label(Dv, Tv, x, y)
            if lab == cur:
                run += 1
                continue
            if n == cap:
                cap *= 2
                rs = <int64_t*>realloc(rs, cap * sizeof(int64_t))
                rl = <int64_t*>realloc(rl, cap * sizeof(int64_t))
            rs[n] = cur
            rl[n] = run
            n += 1
            if cur >= 0 and run >= min_visit:
                closed += 1
            cur = lab
            run = 1
            if closed >= max_visits:
                break
        if n == cap:
            cap += 1
            rs = <int64_t*>realloc(rs, cap * sizeof(int64_t))
            rl = <int64_t*>realloc(rl, cap * sizeof(int64_t))
        rs[n] = cur
        rl[n] = run
        n += 1
    out_s = np.array(<int64_t[:n]>rs, dtype=np.int64)
    out_l = np.array(<int64_t[:n]>rl, dtype=np.int64)
    free(rs)
    free(rl)
    armed[:] = arm
    return out_s, out_l, status, steps, x, y


def lyapunov(P, Q, box, double dt, double x0, double y0, double eps,
             Py_ssize_t n_steps, Py_ssize_t renorm):
    cdef const double[:, ::1] Pv = _c2d(P, 11)
    cdef const double[:, ::1] Qv = _c2d(Q, 16)
    cdef const double[::1] bx = np.ascontiguousarray(box, dtype=np.float64)
    nq = Qv.shape[0]
    arm_a = np.ones(max(nq, 1), dtype=np.uint8)
    arm_b = np.ones(max(nq, 1), dtype=np.uint8)
    cdef unsigned char[::1] aa = arm_a
    cdef unsigned char[::1] ab = arm_b
    cdef double xa = x0, ya = y0, c = eps / sqrt(2.0)
    cdef double xb = x0 + c, yb = y0 + c, nx, ny, kick, dx, dy, d, total = 0.0
    cdef int hit, status = OK
    cdef Py_ssize_t k, steps = 0
    with nogil:
        for k in range(n_steps):
            if _step(Pv, Qv, &aa[0], dt, xa, ya, &nx, &ny, &hit, &kick) != OK:
                status = SINGULAR
                break
            xa = nx
            ya = ny
            if _step(Pv, Qv, &ab[0], dt, xb, yb, &nx, &ny, &hit, &kick) != OK:
                status = SINGULAR
                break
            xb = nx
            yb = ny
            if _outside(bx, xa, ya) or _outside(bx, xb, yb):
                status = ESCAPED
                break
            steps = k + 1
            if steps % renorm == 0 or steps == n_steps:
                dx = xb - xa
                dy = yb - ya
                d = sqrt(dx * dx + dy * dy)
                if d == 0.0:
                    total += log(2.2250738585072014e-308 / eps)
                    xb = xa + c
                    yb = ya + c
                    continue
                total += log(d / eps)
                xb = xa + dx * (eps / d)
                yb = ya + dy * (eps / d)
    return total, status, steps
