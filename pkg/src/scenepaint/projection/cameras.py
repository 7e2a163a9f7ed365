"""Panoramic and pinhole camera models.

Equirectangular convention: u in [0, W) maps azimuth [-pi, pi) measured from
+x toward +y; v in [0, H) maps polar angle [0, pi] from +z. A yaw offset is
added to the azimuth. Depth is always Euclidean ray length, so unprojection
is origin + depth * direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from scenepaint.errors import ValidationError

DEFAULT_PANO_WIDTH = 2048
DEFAULT_PERSP_RESOLUTION = 1024
DEFAULT_FOCAL = 500.0

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PanoCamera:
    """Room-centered equirectangular camera."""

    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    width: int = DEFAULT_PANO_WIDTH
    height: int = DEFAULT_PANO_WIDTH // 2
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(3))
        if self.width != 2 * self.height:
            raise ValidationError("width", "panorama width must equal 2 x height")
        if self.height < 1:
            raise ValidationError("height", "must be >= 1")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def pixel_dirs(self, cols: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Unit ray directions through pixel centers, shape (N, 3)."""
        azimuth = -np.pi + (np.asarray(cols, dtype=np.float64) + 0.5) * (_TWO_PI / self.width)
        azimuth = azimuth + self.yaw
        polar = (np.asarray(rows, dtype=np.float64) + 0.5) * (np.pi / self.height)
        sin_p = np.sin(polar)
        return np.stack(
            [sin_p * np.cos(azimuth), sin_p * np.sin(azimuth), np.cos(polar)], axis=-1
        )

    def grid_dirs(self) -> np.ndarray:
        """Directions for every pixel, shape (H*W, 3), row-major."""
        rows, cols = np.divmod(np.arange(self.height * self.width), self.width)
        return self.pixel_dirs(cols, rows)

    def dirs_to_pixels(self, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Continuous pixel coordinates (u, v) for unit directions."""
        d = np.asarray(dirs, dtype=np.float64)
        azimuth = np.arctan2(d[..., 1], d[..., 0]) - self.yaw
        azimuth = np.mod(azimuth + np.pi, _TWO_PI) - np.pi
        polar = np.arccos(np.clip(d[..., 2] / np.linalg.norm(d, axis=-1), -1.0, 1.0))
        u = (azimuth + np.pi) * (self.width / _TWO_PI) - 0.5
        v = polar * (self.height / np.pi) - 0.5
        return u, v

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Project world points; returns (u, v, ray-length depth, valid)."""
        rel = np.asarray(points, dtype=np.float64) - self.center
        depth = np.linalg.norm(rel, axis=-1)
        valid = depth > 0
        safe = np.where(valid[..., None], rel, [1.0, 0.0, 0.0])
        u, v = self.dirs_to_pixels(safe)
        return u, v, depth, valid


@dataclass(frozen=True)
class PerspCamera:
    """Square pinhole camera defined by position, look-at target and focal length."""

    position: np.ndarray
    target: np.ndarray
    up_hint: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    focal: float = DEFAULT_FOCAL
    resolution: int = DEFAULT_PERSP_RESOLUTION

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64).reshape(3))
        object.__setattr__(self, "target", np.asarray(self.target, dtype=np.float64).reshape(3))
        object.__setattr__(self, "up_hint", np.asarray(self.up_hint, dtype=np.float64).reshape(3))
        if self.focal <= 0:
            raise ValidationError("focal", "must be > 0")
        if self.resolution < 1:
            raise ValidationError("resolution", "must be >= 1")
        if np.allclose(self.position, self.target):
            raise ValidationError("target", "must differ from position")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.resolution, self.resolution)

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (forward, right, down) in world space."""
        forward = self.target - self.position
        forward = forward / np.linalg.norm(forward)
        up = self.up_hint
        cross = np.cross(forward, up)
        norm = np.linalg.norm(cross)
        if norm < 1e-9:
            # Looking straight along the up hint; fall back to +y.
            cross = np.cross(forward, np.array([0.0, 1.0, 0.0]))
            norm = np.linalg.norm(cross)
        right = cross / norm
        down = np.cross(forward, right)
        return forward, right, down

    def pixel_dirs(self, cols: np.ndarray, rows: np.ndarray) -> np.ndarray:
        """Unit ray directions through pixel centers, shape (N, 3)."""
        forward, right, down = self.basis()
        half = self.resolution / 2.0
        x = np.asarray(cols, dtype=np.float64) + 0.5 - half
        y = np.asarray(rows, dtype=np.float64) + 0.5 - half
        d = x[..., None] * right + y[..., None] * down + self.focal * forward
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def grid_dirs(self) -> np.ndarray:
        rows, cols = np.divmod(np.arange(self.resolution * self.resolution), self.resolution)
        return self.pixel_dirs(cols, rows)

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Project world points; returns (u, v, ray-length depth, valid).

        valid is False for points at or behind the camera plane.
        """
        forward, right, down = self.basis()
        rel = np.asarray(points, dtype=np.float64) - self.position
        z = rel @ forward
        valid = z > 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (rel @ right) / z * self.focal + self.resolution / 2.0 - 0.5
            v = (rel @ down) / z * self.focal + self.resolution / 2.0 - 0.5
        depth = np.linalg.norm(rel, axis=-1)
        return u, v, depth, valid
