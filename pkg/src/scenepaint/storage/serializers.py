"""Shared converters between engine objects and JSON/array form."""

from __future__ import annotations

import numpy as np

from scenepaint.core.room import CeilingStyle, Opening, RoomSpec
from scenepaint.errors import ProjectError
from scenepaint.pipeline.state import CoarseResult, PatchRecord
from scenepaint.projection.cameras import PanoCamera, PerspCamera
from scenepaint.projection.rasters import BitMask, ColoredPointCloud, DepthMap, RgbImage


def json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def camera_to_dict(cam) -> dict:
    if isinstance(cam, PanoCamera):
        return {
            "type": "pano",
            "center": cam.center.tolist(),
            "width": cam.width,
            "height": cam.height,
            "yaw": cam.yaw,
        }
    if isinstance(cam, PerspCamera):
        return {
            "type": "persp",
            "position": cam.position.tolist(),
            "target": cam.target.tolist(),
            "up_hint": cam.up_hint.tolist(),
            "focal": cam.focal,
            "resolution": cam.resolution,
        }
    raise ProjectError(f"unknown camera type {type(cam)!r}")


def camera_from_dict(data: dict):
    if data["type"] == "pano":
        return PanoCamera(
            center=np.asarray(data["center"]), width=data["width"],
            height=data["height"], yaw=data["yaw"],
        )
    if data["type"] == "persp":
        return PerspCamera(
            position=np.asarray(data["position"]), target=np.asarray(data["target"]),
            up_hint=np.asarray(data["up_hint"]), focal=data["focal"],
            resolution=data["resolution"],
        )
    raise ProjectError(f"unknown camera type '{data.get('type')}'")


def room_to_dict(spec: RoomSpec) -> dict:
    def openings(group):
        return [
            {"wall": o.wall, "offset": o.offset, "width": o.width, "height": o.height}
            for o in group
        ]

    return {
        "width": spec.width,
        "depth": spec.depth,
        "height": spec.height,
        "baseboard": spec.baseboard,
        "baseboard_height": spec.baseboard_height,
        "doors": openings(spec.doors),
        "windows": openings(spec.windows),
        "ceiling_style": spec.ceiling_style.value,
    }


def room_from_dict(data: dict) -> RoomSpec:
    def openings(group):
        return tuple(Opening(o["wall"], o["offset"], o["width"], o["height"]) for o in group)

    return RoomSpec(
        width=data["width"],
        depth=data["depth"],
        height=data["height"],
        baseboard=data["baseboard"],
        baseboard_height=data["baseboard_height"],
        doors=openings(data["doors"]),
        windows=openings(data["windows"]),
        ceiling_style=CeilingStyle(data["ceiling_style"]),
    )


def cloud_to_arrays(prefix: str, cloud: ColoredPointCloud, arrays: dict) -> None:
    arrays[f"{prefix}_points"] = cloud.points
    arrays[f"{prefix}_colors"] = cloud.colors
    arrays[f"{prefix}_views"] = cloud.view_ids
    arrays[f"{prefix}_owners"] = cloud.owners


def cloud_from_arrays(prefix: str, arrays) -> ColoredPointCloud:
    return ColoredPointCloud(
        arrays[f"{prefix}_points"], arrays[f"{prefix}_colors"],
        arrays[f"{prefix}_views"], arrays[f"{prefix}_owners"],
    )


def coarse_to_parts(coarse: CoarseResult) -> tuple[dict, dict]:
    """Split into (json metadata, array payload)."""
    arrays: dict = {
        "scene_depth": coarse.scene_depth.values,
        "room_depth": coarse.room_depth.values,
        "pano_image": coarse.pano_image.pixels,
        "room_image": coarse.room_image.pixels,
        "occlusion": coarse.occlusion_mask.values,
    }
    cloud_to_arrays("room_cloud", coarse.room_cloud, arrays)
    meta = {
        "pano_camera": camera_to_dict(coarse.pano_camera),
        "patches": [],
    }
    for i, patch in enumerate(coarse.patches):
        arrays[f"patch{i}_image"] = patch.image.pixels
        arrays[f"patch{i}_mask"] = patch.mask.values
        meta["patches"].append(
            {"surface": patch.surface, "camera": camera_to_dict(patch.camera)}
        )
    return meta, arrays


def coarse_from_parts(meta: dict, arrays) -> CoarseResult:
    pano_cam = camera_from_dict(meta["pano_camera"])
    patches = []
    for i, p in enumerate(meta["patches"]):
        cam = camera_from_dict(p["camera"])
        patches.append(
            PatchRecord(
                surface=p["surface"],
                camera=cam,
                image=RgbImage(arrays[f"patch{i}_image"], camera=cam),
                mask=BitMask(arrays[f"patch{i}_mask"], camera=cam),
            )
        )
    return CoarseResult(
        pano_camera=pano_cam,
        scene_depth=DepthMap(arrays["scene_depth"], camera=pano_cam),
        room_depth=DepthMap(arrays["room_depth"], camera=pano_cam),
        pano_image=RgbImage(arrays["pano_image"], camera=pano_cam),
        room_image=RgbImage(arrays["room_image"], camera=pano_cam),
        occlusion_mask=BitMask(arrays["occlusion"], camera=pano_cam),
        patches=tuple(patches),
        room_cloud=cloud_from_arrays("room_cloud", arrays),
    )
