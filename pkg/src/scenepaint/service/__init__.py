"""HTTP service exposing scene state, texturing jobs, previews, and edits."""

from scenepaint.service.app import create_app

__all__ = ["create_app"]
