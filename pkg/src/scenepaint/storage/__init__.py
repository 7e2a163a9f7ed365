"""Persistence: PLY point clouds, triangle meshes, projects, checkpoints."""

from scenepaint.storage.ply import (
    export_ply,
    export_ply_bytes,
    import_ply,
    load_mesh_ply,
    load_mesh_ply_bytes,
    save_mesh_ply,
)
from scenepaint.storage.project import Project, load_project, save_project
from scenepaint.storage.checkpoints import FileCheckpointer, load_textured_scene, save_textured_scene

__all__ = [
    "export_ply",
    "export_ply_bytes",
    "import_ply",
    "load_mesh_ply",
    "load_mesh_ply_bytes",
    "save_mesh_ply",
    "Project",
    "load_project",
    "save_project",
    "FileCheckpointer",
    "load_textured_scene",
    "save_textured_scene",
]
