"""Exception types shared across the engine."""


class ScenePaintError(Exception):
    """Base class for all engine errors."""


class ValidationError(ScenePaintError, ValueError):
    """A spec or parameter failed validation; names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class PlacementError(ScenePaintError):
    """An object does not fit inside the room."""

    def __init__(self, object_id: str, message: str):
        self.object_id = object_id
        super().__init__(f"object '{object_id}': {message}")


class DuplicateIdError(ScenePaintError):
    """Two objects share an id."""

    def __init__(self, object_id: str):
        self.object_id = object_id
        super().__init__(f"duplicate object id '{object_id}'")


class DegenerateObjectError(ScenePaintError):
    """Object bounding box has a zero extent."""


class InvalidGeometryError(ScenePaintError):
    """A geometric construction is impossible (e.g. zero view direction)."""


class PlanningError(ScenePaintError):
    """View planning removed every candidate camera."""

    def __init__(self, object_id: str, message: str):
        self.object_id = object_id
        super().__init__(f"object '{object_id}': {message}")


class DepthInconsistencyError(ScenePaintError):
    """Masked pixels carry no finite depth; lists the offending pixels."""

    def __init__(self, pixels):
        self.pixels = list(pixels)
        shown = ", ".join(f"({r},{c})" for r, c in self.pixels[:8])
        extra = "" if len(self.pixels) <= 8 else f" and {len(self.pixels) - 8} more"
        super().__init__(f"masked pixels without finite depth: {shown}{extra}")


class NoKnownPixelsError(ScenePaintError):
    """An image-filling operation has no known pixel to propagate from."""


class MaskContractError(ScenePaintError):
    """A mask argument violates a containment contract (e.g. sparse outside unknown)."""


class EmptyCloudError(ScenePaintError):
    """Operation requires a non-empty point cloud."""


class BackendError(ScenePaintError):
    """A painter backend failed after exhausting retries."""

    def __init__(self, message: str, retries: int = 0):
        self.retries = retries
        super().__init__(f"{message} (retries: {retries})")


class ProtocolError(ScenePaintError):
    """A remote backend returned a malformed or mismatched response."""


class ProjectError(ScenePaintError):
    """Project file is unreadable, unrecognized, or fails validation."""
