"""Network descriptions: domain types, spec-file parsing and structural validation.

A network is declared as a set of saddle fixed points, the weighted local
field pieces whose blend forms the global vector field, the corridors
(saddle connections) between fixed points, and the one-shot perturbations
sitting on corridors.  Spec files are YAML with a versioned ``format``
header; a JSON mirror of the same document is accepted and emitted.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import networkx as nx
import yaml

FORMAT_TAG = "hetnet-spec/1"
DEFAULT_DT = 0.01
DEFAULT_MIN_VISIT = 2

Point = tuple[float, float]

AXES = ("horizontal", "vertical")


class SpecError(ValueError):
    """Raised for malformed spec text or references that cannot be resolved."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


@dataclass(frozen=True)
class Rect:
    x1: float
    x2: float
    y1: float
    y2: float

    def contains(self, x: float, y: float) -> bool:
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2

    def inside(self, other: "Rect") -> bool:
        return (other.x1 <= self.x1 and self.x2 <= other.x2
                and other.y1 <= self.y1 and self.y2 <= other.y2)

    def as_list(self) -> list[float]:
        return [self.x1, self.x2, self.y1, self.y2]


@dataclass(frozen=True)
class FixedPointSpec:
    id: str
    position: Point
    lambda_s: float
    lambda_u: float
    stable_axis: str
    region_radius: float

    @property
    def ratio(self) -> float:
        """Stability ratio ``-lambda_s / lambda_u``."""
        return -self.lambda_s / self.lambda_u

    @property
    def axis_rates(self) -> tuple[float, float]:
        """Rates ``(lambda_h, lambda_v)`` acting on the horizontal and vertical offsets."""
        if self.stable_axis == "horizontal":
            return self.lambda_s, self.lambda_u
        return self.lambda_u, self.lambda_s


@dataclass(frozen=True)
class Linear:
    fixed_point: str


@dataclass(frozen=True)
class Transversal:
    a: float
    b: float
    c: float
    orientation: str


@dataclass(frozen=True)
class Rotational:
    a: float
    b: float
    c: float
    center: Point


@dataclass(frozen=True)
class FieldPiece:
    region: Rect
    slope: float
    local: Linear | Transversal | Rotational
    # corridor the piece was laid down for; lets a corridor speed change reach c
    corridor: str | None = None


@dataclass(frozen=True)
class KernelParams:
    L1: float = 0.1
    L2: float = 0.1
    s1: float = 5.0
    s2: float = 5.0
    s3: float = 5.0
    b: float = 0.0


@dataclass(frozen=True)
class CorridorSpec:
    id: str
    source: str
    target: str
    path: tuple[Point, ...]
    speed: float
    state: str | None = None
    tube_radius: float | None = None


@dataclass(frozen=True)
class PerturbationSpec:
    corridor: str
    section: tuple[Point, Point]
    params: KernelParams
    amplitude: float
    input_scale: float | None = None


@dataclass(frozen=True)
class NetworkSpec:
    fixed_points: tuple[FixedPointSpec, ...]
    pieces: tuple[FieldPiece, ...]
    corridors: tuple[CorridorSpec, ...]
    perturbations: tuple[PerturbationSpec, ...]
    dt: float
    domain_box: Rect
    name: str = ""
    description: str = ""
    min_visit: int = DEFAULT_MIN_VISIT

    def fixed_point(self, fid: str) -> FixedPointSpec:
        for fp in self.fixed_points:
            if fp.id == fid:
                return fp
        raise KeyError(f"unknown fixed point {fid!r}")

    def corridor(self, cid: str) -> CorridorSpec:
        for c in self.corridors:
            if c.id == cid:
                return c
        raise KeyError(f"unknown corridor {cid!r}")

    @property
    def state_ids(self) -> list[str]:
        """Labelled states in canonical order: fixed points, then named corridors."""
        ids = [fp.id for fp in self.fixed_points]
        for c in self.corridors:
            if c.state is not None and c.state not in ids:
                ids.append(c.state)
        return ids

    def input_scale(self, pert: PerturbationSpec) -> float:
        """Half-width of the fundamental domain covered by the kernel's core ``[-1, 1]``."""
        if pert.input_scale is not None:
            return pert.input_scale
        return 0.5 * self.corridor(pert.corridor).speed * self.dt

    def corridor_polyline(self, cid: str) -> list[Point]:
        c = self.corridor(cid)
        return ([self.fixed_point(c.source).position, *c.path,
                 self.fixed_point(c.target).position])


# ---------------------------------------------------------------------------
# dict <-> dataclass conversion


def _point(v: Any, where: str) -> Point:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise SpecError(f"{where}: expected a 2D point [x, y]")
    return (_num(v[0], where), _num(v[1], where))


def _num(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _rect(v: Any, where: str) -> Rect:
    if not isinstance(v, (list, tuple)) or len(v) != 4:
        raise SpecError(f"{where}: expected a rectangle [x1, x2, y1, y2]")
    return Rect(*(_num(a, where) for a in v))


def _take(d: Any, where: str, required: Sequence[str], optional: Sequence[str] = ()) -> dict:
    if not isinstance(d, dict):
        raise SpecError(f"{where}: expected a mapping")
    unknown = set(d) - set(required) - set(optional)
    if unknown:
        raise SpecError(f"{where}: unknown key {sorted(unknown)[0]!r}")
    for k in required:
        if k not in d:
            raise SpecError(f"{where}: missing required field {k!r}")
    return d


def _ident(v: Any, where: str) -> str:
    if not isinstance(v, str) or not v or not v.isascii():
        raise SpecError(f"{where}: expected an ASCII identifier")
    return v


def _piece_from_dict(d: dict, where: str) -> FieldPiece:
    kind = d.get("kind") if isinstance(d, dict) else None
    common = ("kind", "region", "slope")
    if kind == "linear":
        _take(d, where, common + ("fixed_point",))
        local: Linear | Transversal | Rotational = Linear(_ident(d["fixed_point"], where))
        corridor = None
    elif kind == "transversal":
        _take(d, where, common + ("a", "b", "c", "orientation"), ("corridor",))
        if d["orientation"] not in AXES:
            raise SpecError(f"{where}: orientation must be horizontal or vertical")
        local = Transversal(_num(d["a"], where), _num(d["b"], where),
                            _num(d["c"], where), d["orientation"])
        corridor = d.get("corridor")
    elif kind == "rotational":
        _take(d, where, common + ("a", "b", "c", "center"), ("corridor",))
        local = Rotational(_num(d["a"], where), _num(d["b"], where),
                           _num(d["c"], where), _point(d["center"], where))
        corridor = d.get("corridor")
    else:
        raise SpecError(f"{where}: kind must be linear, transversal or rotational")
    return FieldPiece(_rect(d["region"], where), _num(d["slope"], where), local, corridor)


def from_dict(doc: Any) -> NetworkSpec:
    """Build a :class:`NetworkSpec` from the parsed document, filling defaults."""
    d = _take(doc, "document", ("format", "fixedpoints", "corridors"),
              ("name", "description", "settings", "pieces", "perturbations"))
    if d["format"] != FORMAT_TAG:
        raise SpecError(f"document: unsupported format {d['format']!r} (expected {FORMAT_TAG!r})")

    settings = _take(d.get("settings") or {}, "settings", (), ("dt", "domain_box", "min_visit"))
    dt = _num(settings.get("dt", DEFAULT_DT), "settings.dt")
    min_visit = settings.get("min_visit", DEFAULT_MIN_VISIT)
    if not isinstance(min_visit, int) or isinstance(min_visit, bool):
        raise SpecError("settings.min_visit: expected an integer")

    fps = []
    for i, f in enumerate(d["fixedpoints"] or []):
        where = f"fixedpoints[{i}]"
        _take(f, where, ("id", "position", "lambda_s", "lambda_u", "stable_axis", "region_radius"))
        if f["stable_axis"] not in AXES:
            raise SpecError(f"{where}: stable_axis must be horizontal or vertical")
        fps.append(FixedPointSpec(_ident(f["id"], where), _point(f["position"], where),
                                  _num(f["lambda_s"], where), _num(f["lambda_u"], where),
                                  f["stable_axis"], _num(f["region_radius"], where)))

    pieces = [_piece_from_dict(p, f"pieces[{i}]") for i, p in enumerate(d.get("pieces") or [])]

    corridors = []
    for i, c in enumerate(d["corridors"] or []):
        where = f"corridors[{i}]"
        _take(c, where, ("id", "from", "to", "path", "speed"), ("state", "tube_radius"))
        path = c["path"]
        if not isinstance(path, list) or not path:
            raise SpecError(f"{where}: path must be a non-empty list of points")
        tube = c.get("tube_radius")
        corridors.append(CorridorSpec(
            _ident(c["id"], where), _ident(c["from"], where), _ident(c["to"], where),
            tuple(_point(p, where) for p in path), _num(c["speed"], where),
            _ident(c["state"], where) if c.get("state") is not None else None,
            _num(tube, where) if tube is not None else None))

    perts = []
    for i, p in enumerate(d.get("perturbations") or []):
        where = f"perturbations[{i}]"
        _take(p, where, ("corridor", "section", "params", "amplitude"), ("input_scale",))
        sec = p["section"]
        if not isinstance(sec, list) or len(sec) != 2:
            raise SpecError(f"{where}: section must be two points")
        kp = _take(p["params"], where + ".params", (), ("L1", "L2", "s1", "s2", "s3", "b"))
        params = KernelParams(**{k: _num(v, where + ".params") for k, v in kp.items()})
        scale = p.get("input_scale")
        perts.append(PerturbationSpec(
            _ident(p["corridor"], where), (_point(sec[0], where), _point(sec[1], where)),
            params, _num(p["amplitude"], where),
            _num(scale, where) if scale is not None else None))

    if "domain_box" in settings:
        box = _rect(settings["domain_box"], "settings.domain_box")
    else:
        box = _default_box(fps, pieces)

    spec = NetworkSpec(tuple(fps), tuple(pieces), tuple(corridors), tuple(perts), dt, box,
                       str(d.get("name", "")), str(d.get("description", "")), min_visit)
    _check_references(spec)
    return spec


def _default_box(fps: Sequence[FixedPointSpec], pieces: Sequence[FieldPiece]) -> Rect:
    xs, ys = [], []
    for fp in fps:
        xs += [fp.position[0] - fp.region_radius, fp.position[0] + fp.region_radius]
        ys += [fp.position[1] - fp.region_radius, fp.position[1] + fp.region_radius]
    for p in pieces:
        xs += [p.region.x1, p.region.x2]
        ys += [p.region.y1, p.region.y2]
    if not xs:
        return Rect(-1.0, 1.0, -1.0, 1.0)
    pad = 1.0
    return Rect(min(xs) - pad, max(xs) + pad, min(ys) - pad, max(ys) + pad)


def _check_references(spec: NetworkSpec) -> None:
    fids = {fp.id for fp in spec.fixed_points}
    if len(fids) != len(spec.fixed_points):
        raise SpecError("fixedpoints: duplicate id")
    cids = {c.id for c in spec.corridors}
    if len(cids) != len(spec.corridors):
        raise SpecError("corridors: duplicate id")
    for c in spec.corridors:
        for end in (c.source, c.target):
            if end not in fids:
                raise SpecError(f"corridor {c.id!r}: unknown fixed point {end!r}")
    for p in spec.pieces:
        if isinstance(p.local, Linear) and p.local.fixed_point not in fids:
            raise SpecError(f"piece: unknown fixed point {p.local.fixed_point!r}")
        if p.corridor is not None and p.corridor not in cids:
            raise SpecError(f"piece: unknown corridor {p.corridor!r}")
    seen = set()
    for p in spec.perturbations:
        if p.corridor not in cids:
            raise SpecError(f"perturbation: unknown corridor {p.corridor!r}")
        if p.corridor in seen:
            raise SpecError(f"perturbation: corridor {p.corridor!r} perturbed twice")
        seen.add(p.corridor)


def _piece_to_dict(p: FieldPiece) -> dict:
    out: dict[str, Any] = {}
    loc = p.local
    if isinstance(loc, Linear):
        out = {"kind": "linear", "region": p.region.as_list(), "slope": p.slope,
               "fixed_point": loc.fixed_point}
    elif isinstance(loc, Transversal):
        out = {"kind": "transversal", "region": p.region.as_list(), "slope": p.slope,
               "a": loc.a, "b": loc.b, "c": loc.c, "orientation": loc.orientation}
    else:
        out = {"kind": "rotational", "region": p.region.as_list(), "slope": p.slope,
               "a": loc.a, "b": loc.b, "c": loc.c, "center": list(loc.center)}
    if p.corridor is not None:
        out["corridor"] = p.corridor
    return out


def to_dict(spec: NetworkSpec) -> dict:
    """Normalised document form (all defaults explicit)."""
    corridors = []
    for c in spec.corridors:
        cd: dict[str, Any] = {"id": c.id, "from": c.source, "to": c.target,
                              "path": [list(p) for p in c.path], "speed": c.speed}
        if c.state is not None:
            cd["state"] = c.state
        if c.tube_radius is not None:
            cd["tube_radius"] = c.tube_radius
        corridors.append(cd)
    perts = []
    for p in spec.perturbations:
        pd: dict[str, Any] = {"corridor": p.corridor, "section": [list(p.section[0]), list(p.section[1])],
                              "params": dict(vars(p.params)), "amplitude": p.amplitude}
        if p.input_scale is not None:
            pd["input_scale"] = p.input_scale
        perts.append(pd)
    return {
        "format": FORMAT_TAG,
        "name": spec.name,
        "description": spec.description,
        "settings": {"dt": spec.dt, "domain_box": spec.domain_box.as_list(),
                     "min_visit": spec.min_visit},
        "fixedpoints": [{"id": f.id, "position": list(f.position), "lambda_s": f.lambda_s,
                         "lambda_u": f.lambda_u, "stable_axis": f.stable_axis,
                         "region_radius": f.region_radius} for f in spec.fixed_points],
        "pieces": [_piece_to_dict(p) for p in spec.pieces],
        "corridors": corridors,
        "perturbations": perts,
    }


class _FlowDumper(yaml.SafeDumper):
    pass


def _represent_list(dumper: yaml.SafeDumper, data: list) -> yaml.Node:
    flow = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in data) or (
        all(isinstance(v, list) for v in data) and len(data) > 0
        and all(isinstance(x, (int, float)) for v in data for x in v))
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


def _represent_float(dumper: yaml.SafeDumper, data: float) -> yaml.Node:
    # repr() is the shortest round-trip decimal
    if math.isnan(data) or math.isinf(data):
        return dumper.represent_float(data)
    text = repr(data)
    if "e" in text and "." not in text.split("e")[0]:
        mant, exp = text.split("e")
        text = f"{mant}.0e{exp}"
    return dumper.represent_scalar("tag:yaml.org,2002:float", text)


_FlowDumper.add_representer(list, _represent_list)
_FlowDumper.add_representer(float, _represent_float)


def serialize(spec: NetworkSpec, fmt: str = "yaml") -> str:
    """Emit spec text.  ``fmt`` is ``"yaml"`` (default) or ``"json"``."""
    doc = to_dict(spec)
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    return yaml.dump(doc, Dumper=_FlowDumper, sort_keys=False, width=100)


def parse_spec(text: str) -> NetworkSpec:
    """Parse YAML or JSON spec text.

    Raises
    ------
    SpecError
        On syntax errors (with line/column), unknown keys, missing required
        fields and unresolvable references.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    else:
        try:
            doc = yaml.safe_load(text)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark
            line = mark.line + 1 if mark is not None else None
            col = mark.column + 1 if mark is not None else None
            raise SpecError(f"syntax error: {exc.problem}", line, col) from None
    return from_dict(doc)


def load_spec(path: str) -> NetworkSpec:
    with open(path, encoding="ascii") as fh:
        return parse_spec(fh.read())


# ---------------------------------------------------------------------------
# parameter paths


def get_param(spec: NetworkSpec, path: str) -> float:
    node: Any = to_dict(spec)
    for key in _path_keys(path):
        node = _descend(node, key, path)
    return float(node)


def set_param(spec: NetworkSpec, path: str, value: float) -> NetworkSpec:
    """Return a copy of ``spec`` with the dotted ``path`` set to ``value``.

    Lists of fixed points and corridors are addressed by id, perturbations by
    corridor id and pieces by index, e.g. ``perturbations.turn.params.b``.
    Setting ``corridors.<id>.speed`` rescales the pieces laid down for it.
    """
    doc = to_dict(spec)
    keys = _path_keys(path)
    node: Any = doc
    for key in keys[:-1]:
        node = _descend(node, key, path)
    if not isinstance(node, dict) or keys[-1] not in node:
        raise SpecError(f"unknown parameter path {path!r}")
    old = node[keys[-1]]
    node[keys[-1]] = float(value)
    if keys[0] == "corridors" and keys[-1] == "speed" and old:
        factor = float(value) / float(old)
        for piece in doc["pieces"]:
            if piece.get("corridor") == keys[1] and piece["kind"] != "linear":
                piece["c"] = piece["c"] * factor
    return from_dict(doc)


def _path_keys(path: str) -> list[str]:
    keys = path.split(".")
    if not all(keys):
        raise SpecError(f"malformed parameter path {path!r}")
    return keys


def _descend(node: Any, key: str, path: str) -> Any:
    if isinstance(node, dict):
        if key not in node:
            raise SpecError(f"unknown parameter path {path!r}")
        return node[key]
    if isinstance(node, list):
        for item in node:
            if isinstance(item, dict) and (item.get("id") == key or item.get("corridor") == key
                                           and "section" in item):
                return item
        if key.isdigit() and int(key) < len(node):
            return node[int(key)]
    raise SpecError(f"unknown parameter path {path!r}")


# ---------------------------------------------------------------------------
# validation


def check_cycle_stability(ratios: Iterable[float]) -> dict[str, bool]:
    """Stability of a heteroclinic cycle from its per-node ratios ``-lambda_s/lambda_u``.

    ``strict`` requires every ratio to exceed one; ``relaxed`` only needs the
    product to exceed one.
    """
    rs = list(ratios)
    if not rs:
        raise ValueError("ratios must be non-empty")
    if any(not r > 0 for r in rs):
        raise ValueError("ratios must be positive")
    strict = all(r > 1.0 for r in rs)
    # log-sum keeps long cycles from under/overflowing
    relaxed = math.fsum(math.log(r) for r in rs) > 0.0
    return {"strict": strict, "relaxed": relaxed or strict}


def heteroclinic_cycles(spec: NetworkSpec) -> list[list[str]]:
    """Simple cycles of the fixed-point connection graph, each rotated to start at its smallest id."""
    g = nx.DiGraph()
    g.add_nodes_from(fp.id for fp in spec.fixed_points)
    g.add_edges_from((c.source, c.target) for c in spec.corridors)
    cycles = []
    for cyc in nx.simple_cycles(g):
        k = cyc.index(min(cyc))
        cycles.append(cyc[k:] + cyc[:k])
    return sorted(cycles)


def _seg_point_dist(px: float, py: float, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    ll = dx * dx + dy * dy
    t = 0.0 if ll == 0 else max(0.0, min(1.0, ((px - a[0]) * dx + (py - a[1]) * dy) / ll))
    return math.hypot(px - (a[0] + t * dx), py - (a[1] + t * dy))


def polyline_dist(px: float, py: float, pts: Sequence[Point]) -> float:
    if len(pts) == 1:
        return math.hypot(px - pts[0][0], py - pts[0][1])
    return min(_seg_point_dist(px, py, pts[i], pts[i + 1]) for i in range(len(pts) - 1))


def segment_intersection(p: Point, q: Point, a: Point, b: Point) -> tuple[float, float] | None:
    """Parameters ``(t, u)`` with ``p + t(q-p) == a + u(b-a)``, both in [0, 1], else None."""
    rx, ry = q[0] - p[0], q[1] - p[1]
    sx, sy = b[0] - a[0], b[1] - a[1]
    den = rx * sy - ry * sx
    if den == 0.0:
        return None
    wx, wy = a[0] - p[0], a[1] - p[1]
    t = (wx * sy - wy * sx) / den
    u = (wx * ry - wy * rx) / den
    if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
        return t, u
    return None


def _on_axis(pt: Point, fp: FixedPointSpec, axis: str, tol: float = 1e-9) -> bool:
    if axis == "horizontal":
        return abs(pt[1] - fp.position[1]) <= tol
    return abs(pt[0] - fp.position[0]) <= tol


def _other(axis: str) -> str:
    return "vertical" if axis == "horizontal" else "horizontal"


def validate(spec: NetworkSpec) -> list[str]:
    """Structural and stability violations of ``spec``; empty when the spec is sound."""
    v: list[str] = []
    box = spec.domain_box
    if not spec.dt > 0:
        v.append("settings: dt must be > 0")
    if box.x1 >= box.x2 or box.y1 >= box.y2:
        v.append("settings: domain_box must have x1 < x2 and y1 < y2")
    if spec.min_visit < 1:
        v.append("settings: min_visit must be >= 1")

    for fp in spec.fixed_points:
        w = f"fixedpoints.{fp.id}"
        if not fp.lambda_s < 0:
            v.append(f"{w}: lambda_s must be < 0")
        if not fp.lambda_u > 0:
            v.append(f"{w}: lambda_u must be > 0")
        if not fp.region_radius > 0:
            v.append(f"{w}: region_radius must be > 0")
        x, y = fp.position
        r = fp.region_radius
        if not Rect(x - r, x + r, y - r, y + r).inside(box):
            v.append(f"{w}: labeling disk leaves domain_box")
    fps = spec.fixed_points
    for i in range(len(fps)):
        for j in range(i + 1, len(fps)):
            d = math.dist(fps[i].position, fps[j].position)
            if d <= fps[i].region_radius + fps[j].region_radius:
                v.append(f"fixedpoints.{fps[i].id}/{fps[j].id}: labeling disks overlap")

    for k, p in enumerate(spec.pieces):
        w = f"pieces[{k}]"
        rg = p.region
        if not (rg.x1 < rg.x2 and rg.y1 < rg.y2):
            v.append(f"{w}: region must have x1 < x2 and y1 < y2")
        if not p.slope > 0:
            v.append(f"{w}: slope must be > 0")
        if not rg.inside(box):
            v.append(f"{w}: region leaves domain_box")
        loc = p.local
        if isinstance(loc, Transversal) and not loc.a > 0:
            v.append(f"{w}: transversal a must be > 0")
        if isinstance(loc, Rotational):
            if not loc.a > 0:
                v.append(f"{w}: rotational a must be > 0")
            if not loc.b > 0:
                v.append(f"{w}: rotational b must be > 0")

    for c in spec.corridors:
        w = f"corridors.{c.id}"
        src, dst = spec.fixed_point(c.source), spec.fixed_point(c.target)
        if not c.speed > 0:
            v.append(f"{w}: speed must be > 0")
        if not _on_axis(c.path[0], src, _other(src.stable_axis)):
            v.append(f"{w}: path must start on the unstable axis of {src.id}")
        if not _on_axis(c.path[-1], dst, dst.stable_axis):
            v.append(f"{w}: path must end on the stable axis of {dst.id}")
        if c.state is not None:
            if c.tube_radius is None or not c.tube_radius > 0:
                v.append(f"{w}: named corridor needs tube_radius > 0")
            else:
                for fp in fps:
                    if polyline_dist(*fp.position, c.path) <= fp.region_radius + c.tube_radius:
                        v.append(f"{w}: tube overlaps labeling disk of {fp.id}")
                for x, y in c.path:
                    r = c.tube_radius
                    if not Rect(x - r, x + r, y - r, y + r).inside(box):
                        v.append(f"{w}: tube leaves domain_box")
                        break

    for p in spec.perturbations:
        w = f"perturbations.{p.corridor}"
        k = p.params
        if not p.amplitude >= 0:
            v.append(f"{w}: amplitude must be >= 0")
        if not (0 < k.L1 < 1 and 0 < k.L2 < 1):
            v.append(f"{w}: L1 and L2 must lie in (0, 1)")
        if not (k.s1 > 0 and k.s2 > 0 and k.s3 > 0):
            v.append(f"{w}: slopes s1, s2, s3 must be > 0")
        if p.input_scale is not None and not p.input_scale > 0:
            v.append(f"{w}: input_scale must be > 0")
        poly = spec.corridor_polyline(p.corridor)
        hits = []
        for i in range(len(poly) - 1):
            hit = segment_intersection(p.section[0], p.section[1], poly[i], poly[i + 1])
            if hit is not None:
                s0, s1 = p.section
                hits.append((s0[0] + hit[0] * (s1[0] - s0[0]), s0[1] + hit[0] * (s1[1] - s0[1])))
        # a hit on a shared waypoint is seen by both adjacent segments
        uniq = {(round(x, 12), round(y, 12)) for x, y in hits}
        if len(uniq) != 1:
            v.append(f"{w}: section must cross the corridor exactly once (crosses {len(uniq)})")
        else:
            dst = spec.fixed_point(spec.corridor(p.corridor).target)
            (hx, hy), = uniq
            if math.hypot(hx - dst.position[0], hy - dst.position[1]) <= dst.region_radius:
                v.append(f"{w}: section lies inside the labeling disk of {dst.id}")

    for cyc in heteroclinic_cycles(spec):
        ratios = [spec.fixed_point(f).ratio for f in cyc]
        if any(not r > 0 for r in ratios):
            continue  # sign violations already reported
        st = check_cycle_stability(ratios)
        if not st["relaxed"]:
            prod = math.prod(ratios)
            v.append(f"cycle {'->'.join(cyc)}: unstable cycle (ratio product {prod!r} <= 1)")
    return v

