"""Procedural empty-room mesh generation.

Coordinate convention: right-handed, +z up, floor at z=0, room centered at the
origin in x/y. All triangles are wound counter-clockwise as seen from inside
the room, so normals face inward.

Walls are numbered 0..3 running clockwise when seen from above:
wall 0 at y=-depth/2, wall 1 at x=+width/2, wall 2 at y=+depth/2,
wall 3 at x=-width/2. An opening's ``offset`` is measured along the wall's
tangent direction from the wall origin (see ``_WALLS``). Doors rise from the
floor; windows are centered vertically in the wall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from scenepaint.core.mesh import MeshBuilder, Surface, TriMesh
from scenepaint.errors import ValidationError

WALL_COUNT = 4

# Door/window recess depth behind the wall plane, in meters. Recesses keep the
# shell closed so depth rendering never sees through an opening.
RECESS_DEPTH = 0.05

# Baseboard protrusion into the room, in meters.
BASEBOARD_THICKNESS = 0.015


class CeilingStyle(Enum):
    FLAT = "flat"
    STAR_INSET = "star-inset"
    DIAMOND_INSET = "diamond-inset"
    COFFERED = "coffered"


# Fixed decoration constants per style: (inset depth m, outer radius as a
# fraction of min(width, depth), inner/outer radius ratio of the 8-gon).
_INSET_STYLES = {
    CeilingStyle.STAR_INSET: (0.10, 0.35, 0.40),
    CeilingStyle.DIAMOND_INSET: (0.08, 0.35, math.cos(math.pi / 4)),
}
_COFFER_DEPTH = 0.06
_COFFER_CELLS = 3
_COFFER_BEAM_FRACTION = 0.15


@dataclass(frozen=True)
class Opening:
    """A door or window slot on a wall."""

    wall: int
    offset: float
    width: float
    height: float


@dataclass(frozen=True)
class RoomSpec:
    """Parameters of a procedurally generated empty room."""

    width: float
    depth: float
    height: float
    baseboard: bool = False
    baseboard_height: float = 0.1
    doors: tuple[Opening, ...] = ()
    windows: tuple[Opening, ...] = ()
    ceiling_style: CeilingStyle = CeilingStyle.FLAT

    def __post_init__(self):
        object.__setattr__(self, "doors", tuple(self.doors))
        object.__setattr__(self, "windows", tuple(self.windows))
        self.validate()

    def validate(self) -> None:
        for name in ("width", "depth", "height"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be > 0")
        if self.baseboard and not 0 < self.baseboard_height < self.height:
            raise ValidationError("baseboard_height", "must be in (0, height)")
        per_wall: dict[int, list[tuple[float, float, str]]] = {}
        for kind, group in (("doors", self.doors), ("windows", self.windows)):
            for i, op in enumerate(group):
                label = f"{kind}[{i}]"
                if not 0 <= op.wall < WALL_COUNT:
                    raise ValidationError(label + ".wall", f"must be in 0..{WALL_COUNT - 1}")
                if op.width <= 0 or op.height <= 0:
                    raise ValidationError(label, "width and height must be > 0")
                if op.height >= self.height:
                    raise ValidationError(label + ".height", "must be < room height")
                length = self.wall_length(op.wall)
                if op.offset < 0 or op.offset + op.width > length:
                    raise ValidationError(
                        label + ".offset", f"opening exceeds wall extent 0..{length:g}"
                    )
                per_wall.setdefault(op.wall, []).append((op.offset, op.offset + op.width, label))
        for wall, spans in per_wall.items():
            spans.sort()
            for (_, end_a, lab_a), (start_b, _, lab_b) in zip(spans, spans[1:]):
                if start_b < end_a:
                    raise ValidationError(lab_b, f"overlaps {lab_a} on wall {wall}")

    def wall_length(self, wall: int) -> float:
        return self.width if wall in (0, 2) else self.depth

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        half_w, half_d = self.width / 2, self.depth / 2
        return (
            np.array([-half_w, -half_d, 0.0]),
            np.array([half_w, half_d, self.height]),
        )

    def center(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.height / 2])

    def contains(self, points: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """Strict inside test for (N, 3) points, shrunk by ``margin``."""
        p = np.atleast_2d(points)
        lo, hi = self.aabb()
        return np.all((p > lo + margin) & (p < hi - margin), axis=1)


def _wall_frame(spec: RoomSpec, wall: int):
    """Origin, tangent and inward normal of a wall, as float arrays.

    Tangents are chosen so that a quad wound (s0,z0)-(s1,z0)-(s1,z1)-(s0,z1)
    faces inward (tangent x z == inward normal).
    """
    half_w, half_d = spec.width / 2, spec.depth / 2
    frames = {
        0: ((half_w, -half_d, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
        1: ((half_w, half_d, 0.0), (0.0, -1.0, 0.0), (-1.0, 0.0, 0.0)),
        2: ((-half_w, half_d, 0.0), (1.0, 0.0, 0.0), (0.0, -1.0, 0.0)),
        3: ((-half_w, -half_d, 0.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0)),
    }
    origin, tangent, normal = frames[wall]
    return np.array(origin), np.array(tangent), np.array(normal)


def generate_empty_room(spec: RoomSpec) -> TriMesh:
    """Build the labeled interior shell for a room spec.

    Pure function: equal specs produce byte-identical meshes. Openings become
    5 cm recesses labeled DOOR/WINDOW; the ceiling is decorated per style.
    """
    spec.validate()
    b = MeshBuilder()
    half_w, half_d, height = spec.width / 2, spec.depth / 2, spec.height

    # Floor, wound CCW seen from above (normal +z).
    b.quad_points(
        (-half_w, -half_d, 0.0),
        (half_w, -half_d, 0.0),
        (half_w, half_d, 0.0),
        (-half_w, half_d, 0.0),
        Surface.FLOOR,
    )

    _build_ceiling(b, spec)

    for wall in range(WALL_COUNT):
        _build_wall(b, spec, wall)

    if spec.baseboard:
        for wall in range(WALL_COUNT):
            _build_baseboard(b, spec, wall)

    return b.build()


def _build_wall(b: MeshBuilder, spec: RoomSpec, wall: int) -> None:
    origin, tangent, normal = _wall_frame(spec, wall)
    length, height = spec.wall_length(wall), spec.height

    def point(s: float, z: float, out: float = 0.0):
        return tuple(origin + s * tangent - out * normal + np.array([0.0, 0.0, z]))

    def panel(s0: float, s1: float, z0: float, z1: float, label=Surface.WALL, out: float = 0.0):
        if s1 - s0 <= 0 or z1 - z0 <= 0:
            return
        b.quad_points(
            point(s0, z0, out), point(s1, z0, out), point(s1, z1, out), point(s0, z1, out), label
        )

    openings: list[tuple[float, float, float, float, Surface]] = []
    for op in spec.doors:
        if op.wall == wall:
            openings.append((op.offset, op.offset + op.width, 0.0, op.height, Surface.DOOR))
    for op in spec.windows:
        if op.wall == wall:
            sill = (spec.height - op.height) / 2
            openings.append((op.offset, op.offset + op.width, sill, sill + op.height, Surface.WINDOW))
    openings.sort()

    # Full-height strips between openings, partial strips above/below each one.
    cursor = 0.0
    for s0, s1, z0, z1, label in openings:
        panel(cursor, s0, 0.0, height)
        panel(s0, s1, 0.0, z0)
        panel(s0, s1, z1, height)
        _build_recess(b, point, s0, s1, z0, z1, label)
        cursor = s1
    panel(cursor, length, 0.0, height)


def _build_recess(b: MeshBuilder, point, s0, s1, z0, z1, label: Surface) -> None:
    """Recessed back panel plus the four rim strips closing the cavity."""
    out = RECESS_DEPTH
    b.quad_points(point(s0, z0, out), point(s1, z0, out), point(s1, z1, out), point(s0, z1, out), label)
    # Left (faces +tangent), right (faces -tangent), bottom (+z), top (-z).
    b.quad_points(point(s0, z0), point(s0, z0, out), point(s0, z1, out), point(s0, z1), label)
    b.quad_points(point(s1, z0), point(s1, z1), point(s1, z1, out), point(s1, z0, out), label)
    b.quad_points(point(s0, z0), point(s1, z0), point(s1, z0, out), point(s0, z0, out), label)
    b.quad_points(point(s0, z1), point(s0, z1, out), point(s1, z1, out), point(s1, z1), label)


def _build_baseboard(b: MeshBuilder, spec: RoomSpec, wall: int) -> None:
    origin, tangent, normal = _wall_frame(spec, wall)
    length = spec.wall_length(wall)
    bb_h, bb_t = spec.baseboard_height, BASEBOARD_THICKNESS

    def wall_pt(s: float, z: float):
        return tuple(origin + s * tangent + np.array([0.0, 0.0, z]))

    def front_pt(s: float, z: float):
        return tuple(origin + s * tangent + bb_t * normal + np.array([0.0, 0.0, z]))

    door_spans = sorted(
        (op.offset, op.offset + op.width) for op in spec.doors if op.wall == wall
    )
    spans, cursor = [], 0.0
    for d0, d1 in door_spans:
        if d0 > cursor:
            spans.append((cursor, d0))
        cursor = d1
    if cursor < length:
        spans.append((cursor, length))

    for a, end in spans:
        b.quad_points(front_pt(a, 0), front_pt(end, 0), front_pt(end, bb_h), front_pt(a, bb_h), Surface.BASEBOARD)
        b.quad_points(wall_pt(a, bb_h), front_pt(a, bb_h), front_pt(end, bb_h), wall_pt(end, bb_h), Surface.BASEBOARD)
        # End caps (face away from the span).
        b.quad_points(wall_pt(a, 0), front_pt(a, 0), front_pt(a, bb_h), wall_pt(a, bb_h), Surface.BASEBOARD)
        b.quad_points(wall_pt(end, 0), wall_pt(end, bb_h), front_pt(end, bb_h), front_pt(end, 0), Surface.BASEBOARD)


def _build_ceiling(b: MeshBuilder, spec: RoomSpec) -> None:
    half_w, half_d, height = spec.width / 2, spec.depth / 2, spec.height
    style = spec.ceiling_style

    if style == CeilingStyle.FLAT:
        b.quad_points(
            (-half_w, -half_d, height),
            (-half_w, half_d, height),
            (half_w, half_d, height),
            (half_w, -half_d, height),
            Surface.CEILING,
        )
        return

    if style in _INSET_STYLES:
        depth, radius_frac, inner_ratio = _INSET_STYLES[style]
        _build_octagon_inset(b, spec, depth, radius_frac * min(spec.width, spec.depth), inner_ratio)
        return

    _build_coffers(b, spec)


def _build_octagon_inset(
    b: MeshBuilder, spec: RoomSpec, depth: float, radius: float, inner_ratio: float
) -> None:
    """Star/diamond inset: an 8-gon cavity recessed above the ceiling plane."""
    half_w, half_d, height = spec.width / 2, spec.depth / 2, spec.height
    top = height + depth

    # Outer ring: edge midpoints (even k) and corners (odd k), CCW from above.
    outer = [
        (half_w, 0.0), (half_w, half_d), (0.0, half_d), (-half_w, half_d),
        (-half_w, 0.0), (-half_w, -half_d), (0.0, -half_d), (half_w, -half_d),
    ]
    inner = []
    for k in range(8):
        r = radius if k % 2 == 0 else radius * inner_ratio
        ang = k * math.pi / 4
        inner.append((r * math.cos(ang), r * math.sin(ang)))

    ring_o = [b.vertex(x, y, height) for x, y in outer]
    ring_i = [b.vertex(x, y, height) for x, y in inner]
    ring_t = [b.vertex(x, y, top) for x, y in inner]
    center = b.vertex(0.0, 0.0, top)

    for k in range(8):
        nk = (k + 1) % 8
        b.quad(ring_o[k], ring_i[k], ring_i[nk], ring_o[nk], Surface.CEILING)
        b.quad(ring_i[nk], ring_i[k], ring_t[k], ring_t[nk], Surface.CEILING)
        b.tri(center, ring_t[nk], ring_t[k], Surface.CEILING)


def _build_coffers(b: MeshBuilder, spec: RoomSpec) -> None:
    """Grid of recessed square cells separated by flat beams."""
    half_w, half_d, height = spec.width / 2, spec.depth / 2, spec.height
    top = height + _COFFER_DEPTH
    n = _COFFER_CELLS
    pitch_x, pitch_y = spec.width / n, spec.depth / n
    beam = _COFFER_BEAM_FRACTION * min(pitch_x, pitch_y) / 2

    for i in range(n):
        for j in range(n):
            x0, y0 = -half_w + i * pitch_x, -half_d + j * pitch_y
            x1, y1 = x0 + pitch_x, y0 + pitch_y
            ox = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            ix = [(x0 + beam, y0 + beam), (x1 - beam, y0 + beam),
                  (x1 - beam, y1 - beam), (x0 + beam, y1 - beam)]
            ro = [b.vertex(x, y, height) for x, y in ox]
            ri = [b.vertex(x, y, height) for x, y in ix]
            rt = [b.vertex(x, y, top) for x, y in ix]
            for k in range(4):
                nk = (k + 1) % 4
                b.quad(ro[k], ri[k], ri[nk], ro[nk], Surface.CEILING)
                b.quad(ri[nk], ri[k], rt[k], rt[nk], Surface.CEILING)
            b.quad(rt[3], rt[2], rt[1], rt[0], Surface.CEILING)
