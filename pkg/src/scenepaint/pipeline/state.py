"""Job state: the coarse-stage products and the textured scene."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from scenepaint.core.mesh import Surface
from scenepaint.core.scene import ROOM_OWNER, Scene
from scenepaint.pipeline.config import JobConfig
from scenepaint.projection.cameras import PanoCamera, PerspCamera
from scenepaint.projection.rasters import BitMask, ColoredPointCloud, DepthMap, RgbImage


@dataclass(frozen=True)
class PatchRecord:
    """A floor/ceiling refinement patch: its camera, image and repaint mask."""

    surface: int  # Surface code
    camera: PerspCamera
    image: RgbImage
    mask: BitMask

    @property
    def surface_name(self) -> str:
        return Surface(self.surface).name.lower()


@dataclass(frozen=True)
class CoarseResult:
    """Everything the coarse stage hands to object texturing."""

    pano_camera: PanoCamera
    scene_depth: DepthMap   # panorama depth of the full scene
    room_depth: DepthMap    # panorama depth of the empty room
    pano_image: RgbImage    # styled reference panorama
    room_image: RgbImage    # empty-room panorama (occlusions inpainted)
    occlusion_mask: BitMask
    patches: tuple[PatchRecord, ...]
    room_cloud: ColoredPointCloud


@dataclass(frozen=True)
class TexturedScene:
    """A scene plus its colored point cloud partitioned by owner.

    ``owner_registry`` maps the per-point uint16 owner index to an owner name;
    index 0 is always the room. ``clouds`` is keyed by owner name. ``job_log``
    records one entry per pipeline step (request digests, chosen candidates,
    point accounting) and never stores images.
    """

    scene: Scene
    config: JobConfig
    coarse: CoarseResult
    clouds: dict[str, ColoredPointCloud]
    owner_registry: tuple[str, ...]
    job_log: tuple[dict, ...] = ()
    revision: int = 0

    def owner_index(self, owner: str) -> int:
        return self.owner_registry.index(owner)

    def total_points(self) -> int:
        return sum(len(c) for c in self.clouds.values())

    def full_cloud(self) -> ColoredPointCloud:
        """Concatenation of all owner partitions, room first then registry order."""
        parts = [
            self.clouds[name]
            for name in self.owner_registry
            if name in self.clouds and len(self.clouds[name])
        ]
        if not parts:
            return ColoredPointCloud.empty()
        return ColoredPointCloud(
            np.concatenate([p.points for p in parts]),
            np.concatenate([p.colors for p in parts]),
            np.concatenate([p.view_ids for p in parts]),
            np.concatenate([p.owners for p in parts]),
        )

    def with_updates(self, **changes) -> "TexturedScene":
        return replace(self, **changes)

    def bump(self, scene: Scene | None = None, clouds: dict | None = None,
             log_entries: tuple[dict, ...] = (), registry: tuple[str, ...] | None = None
             ) -> "TexturedScene":
        return replace(
            self,
            scene=self.scene if scene is None else scene,
            clouds=self.clouds if clouds is None else clouds,
            owner_registry=self.owner_registry if registry is None else registry,
            job_log=self.job_log + tuple(log_entries),
            revision=self.revision + 1,
        )


def build_registry(scene: Scene) -> tuple[str, ...]:
    """Room first, then objects sorted by id (the deterministic visit order)."""
    return (ROOM_OWNER, *sorted(obj.object_id for obj in scene.objects))
