"""Outline geometry: straight edges, quadratic curve units, freehand input.

Coordinates are continuous image pixels with the origin at the top-left
corner, x growing rightward and y downward. A curve unit is a quadratic
Bezier: endpoints ``pt_a``/``pt_b`` plus a single "gravity" control
point ``pt_g`` that pulls the chord into a curve,

    B(t) = (1-t)^2 * ptA + 2 t (1-t) * ptG + t^2 * ptB,   0 <= t <= 1.

Closed paths chain line and curve segments whose endpoints must match
exactly; :func:`flatten_path` reduces them to closed polylines ready for
rasterization, subdividing each curve until its chord deviation bound
``|ptG - midpoint(ptA, ptB)| / 2`` drops under the tolerance. That bound
equals the curve's true maximum distance from the parametric chord, so a
flattened polyline never strays more than ``tol`` from the curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, OpenPathError, SchemaViolation

Point = tuple[float, float]

#: Default flattening tolerance: quarter-pixel curve fidelity.
DEFAULT_FLATTEN_TOL = 0.25

#: Default freehand vertex spacing threshold, comfortable for stylus input.
DEFAULT_FREEHAND_MIN_DIST = 5.0

_MAX_SUBDIVISION_DEPTH = 40


def _as_point(value) -> Point:
    x, y = float(value[0]), float(value[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"point coordinates must be finite: {value!r}")
    return (x, y)


@dataclass(frozen=True)
class LineSegment:
    a: Point
    b: Point

    def __post_init__(self):
        object.__setattr__(self, "a", _as_point(self.a))
        object.__setattr__(self, "b", _as_point(self.b))

    @property
    def start(self) -> Point:
        return self.a

    @property
    def end(self) -> Point:
        return self.b


@dataclass(frozen=True)
class BezierUnit:
    pt_a: Point
    pt_g: Point
    pt_b: Point

    def __post_init__(self):
        object.__setattr__(self, "pt_a", _as_point(self.pt_a))
        object.__setattr__(self, "pt_g", _as_point(self.pt_g))
        object.__setattr__(self, "pt_b", _as_point(self.pt_b))

    @property
    def start(self) -> Point:
        return self.pt_a

    @property
    def end(self) -> Point:
        return self.pt_b


Segment = LineSegment | BezierUnit


@dataclass(frozen=True)
class AnnotationPath:
    """Ordered chain of segments; consecutive segments share endpoints."""

    segments: tuple[Segment, ...]
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("path needs at least one segment")
        for prev, cur in zip(self.segments, self.segments[1:]):
            if prev.end != cur.start:
                raise ValueError(
                    f"segments do not chain: {prev.end} != {cur.start}"
                )
        if self.closed and self.segments[-1].end != self.segments[0].start:
            raise ValueError("closed path must end where it starts")


def eval_bezier(unit: BezierUnit, t: float) -> Point:
    """Point on the quadratic curve at parameter ``t`` in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside [0, 1]")
    u = 1.0 - t
    w_a, w_g, w_b = u * u, 2.0 * u * t, t * t
    (ax, ay), (gx, gy), (bx, by) = unit.pt_a, unit.pt_g, unit.pt_b
    return (w_a * ax + w_g * gx + w_b * bx, w_a * ay + w_g * gy + w_b * by)


def _split_unit(a: Point, g: Point, b: Point):
    """De Casteljau split at t = 0.5."""
    ag = ((a[0] + g[0]) / 2.0, (a[1] + g[1]) / 2.0)
    gb = ((g[0] + b[0]) / 2.0, (g[1] + b[1]) / 2.0)
    mid = ((ag[0] + gb[0]) / 2.0, (ag[1] + gb[1]) / 2.0)
    return (a, ag, mid), (mid, gb, b)


def _control_on_chord(a: Point, g: Point, b: Point) -> bool:
    """True when ``g`` lies on the chord between ``a`` and ``b``.

    Such a unit traces the chord itself, so it flattens to a straight
    edge with no interior vertices regardless of tolerance.
    """
    abx, aby = b[0] - a[0], b[1] - a[1]
    agx, agy = g[0] - a[0], g[1] - a[1]
    chord_sq = abx * abx + aby * aby
    if chord_sq == 0.0:
        return g == a
    cross = abx * agy - aby * agx
    scale = max(abs(abx), abs(aby), abs(agx), abs(agy), 1.0)
    if abs(cross) > 1e-9 * scale * scale:
        return False
    dot = abx * agx + aby * agy
    return 0.0 <= dot <= chord_sq


def _flatten_unit(a: Point, g: Point, b: Point, tol: float, out: list[Point],
                  depth: int = 0) -> None:
    """Append the unit's interior+end vertices (start excluded) to ``out``."""
    mx, my = (a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0
    deviation = 0.5 * math.hypot(g[0] - mx, g[1] - my)
    if deviation <= tol or _control_on_chord(a, g, b) or depth >= _MAX_SUBDIVISION_DEPTH:
        out.append(b)
        return
    left, right = _split_unit(a, g, b)
    _flatten_unit(*left, tol, out, depth + 1)
    _flatten_unit(*right, tol, out, depth + 1)


def flatten_path(path: AnnotationPath, tol: float = DEFAULT_FLATTEN_TOL) -> list[Point]:
    """Reduce a closed path to a closed polyline within ``tol`` pixels.

    The returned vertex list does not repeat the first vertex; closure
    last-to-first is implicit, matching what the rasterizer expects.
    """
    if not path.closed:
        raise OpenPathError("only closed paths can be flattened")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    vertices: list[Point] = [path.segments[0].start]
    for segment in path.segments:
        if isinstance(segment, LineSegment):
            vertices.append(segment.end)
        else:
            _flatten_unit(segment.pt_a, segment.pt_g, segment.pt_b, tol, vertices)
    # closure re-emits the start point; drop it
    if len(vertices) > 1 and vertices[-1] == vertices[0]:
        vertices.pop()
    return vertices


def freehand_add(vertices: list[Point], cursor, min_dist: float = DEFAULT_FREEHAND_MIN_DIST) -> list[Point]:
    """Accumulate a freehand vertex when the cursor moved far enough.

    The first vertex is always accepted; afterwards the cursor becomes a
    vertex only when its distance to the last vertex strictly exceeds
    ``min_dist``. Returns a new list when a vertex was added, otherwise
    the input list unchanged.
    """
    if min_dist <= 0.0:
        raise ValueError(f"min_dist must be positive, got {min_dist}")
    cursor = _as_point(cursor)
    if not vertices:
        return [cursor]
    last = vertices[-1]
    if math.hypot(cursor[0] - last[0], cursor[1] - last[1]) > min_dist:
        return list(vertices) + [cursor]
    return vertices


def close_polyline(vertices: list[Point]) -> AnnotationPath:
    """Commit freehand/polygon vertices as a closed path of straight edges."""
    if len(vertices) < 3:
        raise ValueError("closing a polyline needs at least 3 vertices")
    points = [_as_point(v) for v in vertices]
    segments = [
        LineSegment(points[i], points[(i + 1) % len(points)])
        for i in range(len(points))
    ]
    return AnnotationPath(tuple(segments), closed=True)


# -- wire format ---------------------------------------------------------
#
# JSON list of segments, each {"kind": "line", "a": [x, y], "b": [x, y]}
# or {"kind": "bezier", "a": [x, y], "g": [x, y], "b": [x, y]}.

def _wire_point(value) -> Point:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SchemaViolation(f"expected [x, y], got {value!r}")
    try:
        return _as_point(value)
    except (TypeError, ValueError) as exc:
        raise SchemaViolation(str(exc)) from exc


def path_to_wire(path: AnnotationPath) -> list[dict]:
    wire = []
    for segment in path.segments:
        if isinstance(segment, LineSegment):
            wire.append({"kind": "line", "a": list(segment.a), "b": list(segment.b)})
        else:
            wire.append({
                "kind": "bezier",
                "a": list(segment.pt_a),
                "g": list(segment.pt_g),
                "b": list(segment.pt_b),
            })
    return wire


def path_from_wire(wire, closed: bool = True) -> AnnotationPath:
    if not isinstance(wire, list) or not wire:
        raise SchemaViolation("path wire format is a non-empty list of segments")
    segments: list[Segment] = []
    for entry in wire:
        if not isinstance(entry, dict):
            raise SchemaViolation(f"segment must be an object, got {entry!r}")
        kind = entry.get("kind")
        if kind == "line":
            segments.append(LineSegment(_wire_point(entry.get("a")), _wire_point(entry.get("b"))))
        elif kind == "bezier":
            segments.append(BezierUnit(
                _wire_point(entry.get("a")),
                _wire_point(entry.get("g")),
                _wire_point(entry.get("b")),
            ))
        else:
            raise SchemaViolation(f'segment kind must be "line" or "bezier", got {kind!r}')
    try:
        return AnnotationPath(tuple(segments), closed=closed)
    except ValueError as exc:
        raise SchemaViolation(str(exc)) from exc
