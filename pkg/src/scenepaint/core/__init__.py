"""Scene domain types and the procedural empty-room generator."""

from scenepaint.core.mesh import Surface, TriMesh, transform_mesh
from scenepaint.core.room import (
    CeilingStyle,
    Opening,
    RoomSpec,
    WALL_COUNT,
    generate_empty_room,
)
from scenepaint.core.scene import (
    ObjectInstance,
    Scene,
    assemble_scene,
    box_mesh,
    object_aspect_ratio,
)

__all__ = [
    "Surface",
    "TriMesh",
    "transform_mesh",
    "CeilingStyle",
    "Opening",
    "RoomSpec",
    "WALL_COUNT",
    "generate_empty_room",
    "ObjectInstance",
    "Scene",
    "assemble_scene",
    "box_mesh",
    "object_aspect_ratio",
]
