"""On-disk job checkpoints and the persisted textured result.

Checkpoint writes finish with progress.json, so a directory missing it is
treated as no checkpoint (a torn write never resumes).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from scenepaint.core.scene import Scene
from scenepaint.pipeline.config import JobConfig
from scenepaint.pipeline.state import TexturedScene
from scenepaint.pipeline.texturing import JobState
from scenepaint.projection.rasters import ColoredPointCloud
from scenepaint.storage.serializers import (
    cloud_from_arrays,
    cloud_to_arrays,
    coarse_from_parts,
    coarse_to_parts,
    json_default,
)

logger = logging.getLogger(__name__)

_PROGRESS = "progress.json"
_COARSE_META = "coarse.json"
_COARSE_ARRAYS = "coarse.npz"
_CLOUD_ARRAYS = "clouds.npz"
_RESULT = "result.json"


def _save_clouds(clouds: dict[str, ColoredPointCloud], path: Path) -> list[str]:
    order = list(clouds)
    arrays: dict = {}
    for i, name in enumerate(order):
        cloud_to_arrays(f"c{i}", clouds[name], arrays)
    np.savez(path, **arrays)
    return order


def _load_clouds(path: Path, order: list[str]) -> dict[str, ColoredPointCloud]:
    with np.load(path) as arrays:
        return {name: cloud_from_arrays(f"c{i}", arrays) for i, name in enumerate(order)}


class FileCheckpointer:
    """Persists JobState under <dir>; safe to resume after a crash."""

    def __init__(self, directory: str | Path):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    def save(self, state: JobState) -> None:
        meta, coarse_arrays = coarse_to_parts(state.coarse)
        np.savez(self.dir / _COARSE_ARRAYS, **coarse_arrays)
        (self.dir / _COARSE_META).write_text(json.dumps(meta, default=json_default))

        cloud_order = _save_clouds(state.clouds, self.dir / _CLOUD_ARRAYS)
        partial_arrays: dict = {}
        cloud_to_arrays("partial", state.partial_cloud, partial_arrays)
        np.savez(self.dir / "partial.npz", **partial_arrays)

        progress = {
            "config": state.config.to_dict(),
            "registry": list(state.registry),
            "log": state.log,
            "cloud_order": cloud_order,
            "current_object": state.current_object,
            "next_view": state.next_view,
        }
        (self.dir / _PROGRESS).write_text(
            json.dumps(progress, default=json_default)
        )

    def load(self) -> JobState | None:
        progress_path = self.dir / _PROGRESS
        if not progress_path.exists():
            return None
        progress = json.loads(progress_path.read_text())
        meta = json.loads((self.dir / _COARSE_META).read_text())
        with np.load(self.dir / _COARSE_ARRAYS) as arrays:
            coarse = coarse_from_parts(meta, arrays)
        clouds = _load_clouds(self.dir / _CLOUD_ARRAYS, progress["cloud_order"])
        with np.load(self.dir / "partial.npz") as arrays:
            partial = cloud_from_arrays("partial", arrays)
        return JobState(
            config=JobConfig.from_dict(progress["config"]),
            coarse=coarse,
            registry=tuple(progress["registry"]),
            log=list(progress["log"]),
            clouds=clouds,
            current_object=progress["current_object"],
            next_view=progress["next_view"],
            partial_cloud=partial,
        )


def save_textured_scene(ts: TexturedScene, directory: str | Path) -> None:
    """Persist everything except the Scene (which lives in the project file)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta, coarse_arrays = coarse_to_parts(ts.coarse)
    np.savez(directory / _COARSE_ARRAYS, **coarse_arrays)
    (directory / _COARSE_META).write_text(json.dumps(meta, default=json_default))
    cloud_order = _save_clouds(ts.clouds, directory / _CLOUD_ARRAYS)
    result = {
        "config": ts.config.to_dict(),
        "registry": list(ts.owner_registry),
        "log": list(ts.job_log),
        "cloud_order": cloud_order,
        "revision": ts.revision,
    }
    (directory / _RESULT).write_text(json.dumps(result, default=json_default))


def load_textured_scene(directory: str | Path, scene: Scene) -> TexturedScene | None:
    directory = Path(directory)
    result_path = directory / _RESULT
    if not result_path.exists():
        return None
    result = json.loads(result_path.read_text())
    meta = json.loads((directory / _COARSE_META).read_text())
    with np.load(directory / _COARSE_ARRAYS) as arrays:
        coarse = coarse_from_parts(meta, arrays)
    clouds = _load_clouds(directory / _CLOUD_ARRAYS, result["cloud_order"])
    return TexturedScene(
        scene=scene,
        config=JobConfig.from_dict(result["config"]),
        coarse=coarse,
        clouds=clouds,
        owner_registry=tuple(result["registry"]),
        job_log=tuple(result["log"]),
        revision=result["revision"],
    )
