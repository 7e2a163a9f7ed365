"""Coarse-to-fine texturing orchestration and interactive edits."""

from scenepaint.pipeline.config import JobConfig
from scenepaint.pipeline.events import ProgressEvent
from scenepaint.pipeline.selection import select_candidate
from scenepaint.pipeline.state import CoarseResult, PatchRecord, TexturedScene
from scenepaint.pipeline.coarse import coarse_stage
from scenepaint.pipeline.objects import texture_object
from scenepaint.pipeline.texturing import MemoryCheckpointer, texture_scene
from scenepaint.pipeline.edits import EditCommand, apply_object_edit, apply_region_edit

__all__ = [
    "JobConfig",
    "ProgressEvent",
    "select_candidate",
    "CoarseResult",
    "PatchRecord",
    "TexturedScene",
    "coarse_stage",
    "texture_object",
    "MemoryCheckpointer",
    "texture_scene",
    "EditCommand",
    "apply_object_edit",
    "apply_region_edit",
]
