"""Compositional scene assembly: posed objects inside a generated room."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from scenepaint.core.mesh import MeshBuilder, Surface, TriMesh, transform_mesh
from scenepaint.core.room import RoomSpec, generate_empty_room
from scenepaint.errors import (
    DegenerateObjectError,
    DuplicateIdError,
    PlacementError,
    ValidationError,
)

ROOM_OWNER = "room"


@dataclass(frozen=True)
class ObjectInstance:
    """A posed, uniformly scaled object mesh with its text description.

    ``mesh`` is in local coordinates; world position of a vertex p is
    ``rotation @ (scale * p) + translation``.
    """

    object_id: str
    mesh: TriMesh
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    scale: float = 1.0
    description: str = ""

    def __post_init__(self):
        if self.scale <= 0:
            raise ValidationError("scale", "must be > 0")
        if not self.object_id or self.object_id == ROOM_OWNER:
            raise ValidationError("object_id", f"must be non-empty and not '{ROOM_OWNER}'")
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=np.float64).reshape(3, 3))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=np.float64).reshape(3))

    def world_mesh(self) -> TriMesh:
        return transform_mesh(self.mesh, self.rotation, self.translation, self.scale)

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        """World-space axis-aligned bounds of the transformed mesh."""
        verts = (self.scale * self.mesh.vertices) @ self.rotation.T + self.translation
        return verts.min(axis=0), verts.max(axis=0)

    def aabb_center(self) -> np.ndarray:
        lo, hi = self.aabb()
        return (lo + hi) / 2

    def moved(self, **changes) -> "ObjectInstance":
        from dataclasses import replace

        return replace(self, **changes)


def object_aspect_ratio(obj: ObjectInstance) -> float:
    """Length-width ratio of the horizontal footprint (always >= 1).

    Footprint axes are the object's local x/y after its yaw is snapped to the
    nearest multiple of 90 degrees.
    """
    ex, ey = _footprint_extents(obj)
    if min(ex, ey) <= 0:
        raise DegenerateObjectError(f"object '{obj.object_id}' has a zero horizontal extent")
    return max(ex, ey) / min(ex, ey)


def footprint_long_axis(obj: ObjectInstance) -> tuple[np.ndarray, float, float]:
    """World-space unit vector of the long footprint axis plus (long, short) extents."""
    ex, ey = _footprint_extents(obj)
    if min(ex, ey) <= 0:
        raise DegenerateObjectError(f"object '{obj.object_id}' has a zero horizontal extent")
    if ex >= ey:
        return np.array([1.0, 0.0, 0.0]), ex, ey
    return np.array([0.0, 1.0, 0.0]), ey, ex


def _footprint_extents(obj: ObjectInstance) -> tuple[float, float]:
    lo, hi = obj.mesh.aabb()
    ext = (hi - lo) * obj.scale
    yaw = math.atan2(obj.rotation[1, 0], obj.rotation[0, 0])
    quarter_turns = round(yaw / (math.pi / 2)) % 2
    ex, ey = float(ext[0]), float(ext[1])
    return (ey, ex) if quarter_turns else (ex, ey)


@dataclass(frozen=True)
class Scene:
    """Room shell plus posed objects and the global prompts."""

    room: RoomSpec
    interior: TriMesh
    objects: tuple[ObjectInstance, ...]
    style_prompt: str = ""
    negative_prompt: str = ""

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))

    def object_by_id(self, object_id: str) -> ObjectInstance:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        raise KeyError(object_id)

    def all_meshes(self) -> list[tuple[str, TriMesh]]:
        """(owner, world mesh) pairs; the interior is owned by 'room'."""
        out = [(ROOM_OWNER, self.interior)]
        out.extend((obj.object_id, obj.world_mesh()) for obj in self.objects)
        return out

    def pano_prompt(self) -> str:
        """Global prompt: the style followed by every object description."""
        parts = [self.style_prompt] + [o.description for o in self.objects if o.description]
        return ", ".join(p for p in parts if p)

    def object_prompt(self, obj: ObjectInstance) -> str:
        parts = [self.style_prompt, obj.description]
        return ", ".join(p for p in parts if p)

    def with_objects(self, objects) -> "Scene":
        from dataclasses import replace

        return replace(self, objects=tuple(objects))


def assemble_scene(
    spec: RoomSpec,
    objects: list[ObjectInstance] | tuple[ObjectInstance, ...] = (),
    style_prompt: str = "",
    negative_prompt: str = "",
) -> Scene:
    """Validate object placement and build the full scene.

    Raises:
        PlacementError: an object's world AABB pokes outside the room.
        DuplicateIdError: two objects share an id.
    """
    interior = generate_empty_room(spec)
    room_lo, room_hi = spec.aabb()
    seen: set[str] = set()
    for obj in objects:
        if obj.object_id in seen:
            raise DuplicateIdError(obj.object_id)
        seen.add(obj.object_id)
        validate_in_room(obj, spec)
    _ = room_lo, room_hi
    return Scene(spec, interior, tuple(objects), style_prompt, negative_prompt)


def validate_in_room(obj: ObjectInstance, spec: RoomSpec) -> None:
    # Micron slack absorbs float32 round-trips through mesh sidecars.
    room_lo, room_hi = spec.aabb()
    lo, hi = obj.aabb()
    if np.any(lo < room_lo - 1e-6) or np.any(hi > room_hi + 1e-6):
        raise PlacementError(
            obj.object_id,
            f"AABB [{lo.round(3)}, {hi.round(3)}] exceeds room bounds",
        )


def box_mesh(extents=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box with outward normals, labeled OBJECT."""
    ex, ey, ez = (float(v) / 2 for v in extents)
    cx, cy, cz = center
    b = MeshBuilder()

    def corner(sx, sy, sz):
        return (cx + sx * ex, cy + sy * ey, cz + sz * ez)

    # Each face wound CCW as seen from outside the box.
    faces = [
        ((1, -1, -1), (1, 1, -1), (1, 1, 1), (1, -1, 1)),      # +x
        ((-1, 1, -1), (-1, -1, -1), (-1, -1, 1), (-1, 1, 1)),  # -x
        ((1, 1, -1), (-1, 1, -1), (-1, 1, 1), (1, 1, 1)),      # +y
        ((-1, -1, -1), (1, -1, -1), (1, -1, 1), (-1, -1, 1)),  # -y
        ((-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1)),      # +z
        ((-1, 1, -1), (1, 1, -1), (1, -1, -1), (-1, -1, -1)),  # -z
    ]
    for pa, pb, pc, pd in faces:
        b.quad_points(corner(*pa), corner(*pb), corner(*pc), corner(*pd), Surface.OBJECT)
    return b.build()
