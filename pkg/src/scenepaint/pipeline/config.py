"""Tunables of a texturing job."""

from __future__ import annotations

from dataclasses import dataclass, field

from scenepaint.imaging.edges import EdgeParams
from scenepaint.painter.contract import BackendParams


@dataclass(frozen=True)
class JobConfig:
    """Resolution, tolerance and seeding knobs shared across a job.

    Defaults follow the production scale (2048x1024 panorama, 1024x1024
    perspective views); tests shrink them for speed. ``splat_radius`` is the
    disk footprint at the perspective resolution.
    """

    seed: int = 0
    pano_width: int = 2048
    persp_resolution: int = 1024
    candidates: int = 5
    splat_radius: int = 1
    stale_eps: float = 0.01
    occlusion_eps: float = 0.01
    classify_window: int = 7
    classify_threshold: float = 0.3
    score_band_radius: int = 8
    psnr_normalizer: float = 50.0
    min_standoff: float = 0.3
    pano_yaw: float = 0.0
    edge_params: EdgeParams = field(default_factory=EdgeParams)
    backend_params: BackendParams = field(default_factory=BackendParams)
    debug_events: bool = False

    @property
    def pano_height(self) -> int:
        return self.pano_width // 2

    def to_dict(self) -> dict:
        e, b = self.edge_params, self.backend_params
        return {
            "seed": self.seed,
            "pano_width": self.pano_width,
            "persp_resolution": self.persp_resolution,
            "candidates": self.candidates,
            "splat_radius": self.splat_radius,
            "stale_eps": self.stale_eps,
            "occlusion_eps": self.occlusion_eps,
            "classify_window": self.classify_window,
            "classify_threshold": self.classify_threshold,
            "score_band_radius": self.score_band_radius,
            "psnr_normalizer": self.psnr_normalizer,
            "min_standoff": self.min_standoff,
            "pano_yaw": self.pano_yaw,
            "debug_events": self.debug_events,
            "edge_params": {
                "canny_low": e.canny_low,
                "canny_high": e.canny_high,
                "blur_sigma": e.blur_sigma,
                "laplacian_threshold": e.laplacian_threshold,
                "dilate_radius": e.dilate_radius,
                "erode_radius": e.erode_radius,
            },
            "backend_params": {
                "steps": b.steps,
                "control_weight": b.control_weight,
                "cfg": b.cfg,
                "refiner_switch": b.refiner_switch,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JobConfig":
        data = dict(data)
        edge = EdgeParams(**data.pop("edge_params", {}))
        backend = BackendParams(**data.pop("backend_params", {}))
        return cls(edge_params=edge, backend_params=backend, **data)
