"""Triangle mesh value type with per-triangle semantic labels."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from scenepaint.errors import ValidationError

# Triangles thinner than this (in m^2) are rejected as degenerate.
MIN_TRIANGLE_AREA = 1e-12


class Surface(IntEnum):
    """Semantic label a triangle can carry."""

    WALL = 0
    FLOOR = 1
    CEILING = 2
    BASEBOARD = 3
    DOOR = 4
    WINDOW = 5
    OBJECT = 6


@dataclass(frozen=True)
class TriMesh:
    """Immutable triangle mesh in world meters.

    Attributes:
        vertices: (N, 3) float64 vertex positions.
        triangles: (M, 3) int32 vertex indices.
        labels: optional (M,) int16 per-triangle Surface codes.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64)).reshape(-1, 3)
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int32)).reshape(-1, 3)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        if self.labels is not None:
            lab = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int16)).reshape(-1)
            if lab.shape[0] != t.shape[0]:
                raise ValidationError("labels", "one label per triangle required")
            object.__setattr__(self, "labels", lab)
        if not np.all(np.isfinite(v)):
            raise ValidationError("vertices", "coordinates must be finite")
        if t.size and (t.min() < 0 or t.max() >= v.shape[0]):
            raise ValidationError("triangles", "vertex index out of range")
        if t.size:
            areas = self.triangle_areas()
            if np.any(areas <= MIN_TRIANGLE_AREA):
                bad = int(np.argmin(areas))
                raise ValidationError(
                    "triangles", f"triangle {bad} is degenerate (area {areas[bad]:.3e})"
                )

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    def triangle_corners(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return the (M, 3) corner position arrays (a, b, c)."""
        v, t = self.vertices, self.triangles
        return v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]

    def triangle_areas(self) -> np.ndarray:
        a, b, c = self.triangle_corners()
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned bounds as (min, max), each shape (3,)."""
        if self.num_vertices == 0:
            raise ValidationError("vertices", "empty mesh has no bounds")
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def label_set(self) -> set[Surface]:
        if self.labels is None:
            return set()
        return {Surface(int(code)) for code in np.unique(self.labels)}


def transform_mesh(
    mesh: TriMesh,
    rotation: np.ndarray,
    translation: np.ndarray,
    scale: float = 1.0,
) -> TriMesh:
    """Apply p -> rotation @ (scale * p) + translation to every vertex."""
    if scale <= 0:
        raise ValidationError("scale", "must be > 0")
    rot = np.asarray(rotation, dtype=np.float64).reshape(3, 3)
    t = np.asarray(translation, dtype=np.float64).reshape(3)
    verts = (scale * mesh.vertices) @ rot.T + t
    return TriMesh(verts, mesh.triangles, mesh.labels)


@dataclass
class MeshBuilder:
    """Accumulates labeled quads/triangles; shared by procedural generators."""

    vertices: list = field(default_factory=list)
    triangles: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    def vertex(self, x: float, y: float, z: float) -> int:
        self.vertices.append((x, y, z))
        return len(self.vertices) - 1

    def tri(self, a: int, b: int, c: int, label: Surface) -> None:
        self.triangles.append((a, b, c))
        self.labels.append(int(label))

    def quad(self, a: int, b: int, c: int, d: int, label: Surface) -> None:
        """Two triangles for the quad a-b-c-d (given in winding order)."""
        self.tri(a, b, c, label)
        self.tri(a, c, d, label)

    def quad_points(self, pa, pb, pc, pd, label: Surface) -> None:
        self.quad(self.vertex(*pa), self.vertex(*pb), self.vertex(*pc), self.vertex(*pd), label)

    def build(self) -> TriMesh:
        return TriMesh(
            np.asarray(self.vertices, dtype=np.float64),
            np.asarray(self.triangles, dtype=np.int32),
            np.asarray(self.labels, dtype=np.int16),
        )
