"""Pydantic request/response models of the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ObjectDescriptor(BaseModel):
    id: str
    description: str = ""
    aabb_min: list[float]
    aabb_max: list[float]
    points: int = 0


class SceneDescriptor(BaseModel):
    revision: int
    textured: bool
    room: dict
    style_prompt: str
    negative_prompt: str
    objects: list[ObjectDescriptor]
    owners: list[str] = Field(default_factory=list)
    total_points: int = 0


class CameraModel(BaseModel):
    position: list[float]
    target: list[float]
    up_hint: list[float] = [0.0, 0.0, 1.0]
    focal: float = 500.0
    resolution: int = 512


class NewObjectModel(BaseModel):
    id: str
    box_extents: list[float] | None = None
    mesh_ply_base64: str | None = None
    translation: list[float] = [0.0, 0.0, 0.0]
    scale: float = 1.0
    description: str = ""


class EditRequest(BaseModel):
    kind: str
    target_id: str | None = None
    translation: list[float] | None = None
    angle: float | None = None
    scale: float | None = None
    prompt: str | None = None
    camera: CameraModel | None = None
    mask_png_base64: str | None = None
    sketch_png_base64: str | None = None
    new_object: NewObjectModel | None = None
    seed: int = 0


class EditResponse(BaseModel):
    job_id: str | None = None
    order: int
    revision: int
    applied: bool
    affected: list[str] = Field(default_factory=list)


class TextureRequest(BaseModel):
    resume: bool = False


class JobModel(BaseModel):
    job_id: str
    kind: str
    stage: str
    object_id: str | None = None
    view_index: int | None = None
    percent: float = 0.0
    updated_at: float
    error: str | None = None


class JobCreated(BaseModel):
    job_id: str
    order: int
