"""Project directory: the scene description, job settings and mesh sidecars.

Layout:
    project.json   canonical description (sorted keys, 2-space indent)
    meshes/        one PLY sidecar per object, digest-pinned in project.json
    state/         checkpoints and the textured result (see checkpoints.py)
    outputs/       exports
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from scenepaint.core.scene import ObjectInstance, Scene, assemble_scene
from scenepaint.errors import ProjectError, ScenePaintError
from scenepaint.pipeline.config import JobConfig
from scenepaint.storage.ply import load_mesh_ply, save_mesh_ply
from scenepaint.storage.serializers import room_from_dict, room_to_dict

PROJECT_VERSION = 1
PROJECT_FILE = "project.json"
MESH_DIR = "meshes"
STATE_DIR = "state"
OUTPUT_DIR = "outputs"


@dataclass
class Project:
    root: Path
    scene: Scene
    job_config: JobConfig = field(default_factory=JobConfig)
    backend: dict = field(default_factory=dict)

    @property
    def state_dir(self) -> Path:
        return self.root / STATE_DIR

    @property
    def output_dir(self) -> Path:
        return self.root / OUTPUT_DIR


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def save_project(project: Project) -> Path:
    """Write mesh sidecars and the canonical project file; byte-stable."""
    root = Path(project.root)
    (root / MESH_DIR).mkdir(parents=True, exist_ok=True)
    (root / STATE_DIR).mkdir(parents=True, exist_ok=True)
    (root / OUTPUT_DIR).mkdir(parents=True, exist_ok=True)

    sidecars: dict[str, str] = {}
    objects = []
    for obj in project.scene.objects:
        rel = f"{MESH_DIR}/{obj.object_id}.ply"
        save_mesh_ply(obj.mesh, root / rel)
        sidecars[rel] = _sha256(root / rel)
        objects.append(
            {
                "id": obj.object_id,
                "mesh": rel,
                "rotation": obj.rotation.tolist(),
                "translation": obj.translation.tolist(),
                "scale": obj.scale,
                "description": obj.description,
            }
        )

    data = {
        "version": PROJECT_VERSION,
        "scene": {
            "room": room_to_dict(project.scene.room),
            "objects": objects,
            "style_prompt": project.scene.style_prompt,
            "negative_prompt": project.scene.negative_prompt,
        },
        "job": project.job_config.to_dict(),
        "backend": project.backend,
        "sidecars": sidecars,
    }
    payload = json.dumps(data, sort_keys=True, indent=2) + "\n"
    path = root / PROJECT_FILE
    path.write_text(payload)
    return path


def load_project(root: str | Path) -> Project:
    """Load and validate a project directory.

    Raises:
        ProjectError: unknown version, missing or corrupted sidecar, or any
            scene invariant violation.
    """
    root = Path(root)
    path = root / PROJECT_FILE
    if not path.exists():
        raise ProjectError(f"{path}: project file not found")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProjectError(f"{path}: unreadable project file: {exc}") from exc
    if data.get("version") != PROJECT_VERSION:
        raise ProjectError(f"{path}: unknown project version {data.get('version')!r}")

    for rel, digest in data.get("sidecars", {}).items():
        sidecar = root / rel
        if not sidecar.exists():
            raise ProjectError(f"{rel}: referenced sidecar is missing")
        if _sha256(sidecar) != digest:
            raise ProjectError(f"{rel}: sidecar digest mismatch (file corrupted?)")

    scene_data = data["scene"]
    room = room_from_dict(scene_data["room"])
    objects = []
    for entry in scene_data["objects"]:
        mesh = load_mesh_ply(root / entry["mesh"])
        objects.append(
            ObjectInstance(
                object_id=entry["id"],
                mesh=mesh,
                rotation=np.asarray(entry["rotation"]),
                translation=np.asarray(entry["translation"]),
                scale=entry["scale"],
                description=entry.get("description", ""),
            )
        )
    try:
        scene = assemble_scene(
            room, objects,
            style_prompt=scene_data.get("style_prompt", ""),
            negative_prompt=scene_data.get("negative_prompt", ""),
        )
    except ScenePaintError as exc:
        raise ProjectError(f"{path}: scene invariant violated: {exc}") from exc
    return Project(
        root=root,
        scene=scene,
        job_config=JobConfig.from_dict(data.get("job", {})),
        backend=data.get("backend", {}),
    )
