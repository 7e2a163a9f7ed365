"""Camera selection for object texturing and floor/ceiling refinement.

Per object: an initial view from the panorama center with a focal-length
search, eight basic views on a sphere slightly larger than the object, and
aspect-ratio-dependent additional views on a 0.7 x diagonal sphere. Cameras
outside the room or too close to the object are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scenepaint.core.room import RoomSpec
from scenepaint.core.scene import ObjectInstance, footprint_long_axis, object_aspect_ratio
from scenepaint.errors import InvalidGeometryError, PlanningError
from scenepaint.projection.cameras import DEFAULT_FOCAL, DEFAULT_PERSP_RESOLUTION, PerspCamera

# Basic-view sphere radius as a multiple of the AABB diagonal ("slightly
# larger than the object"); the additional-view multiple is fixed at 0.7.
BASIC_RADIUS_FACTOR = 1.1
ADDITIONAL_RADIUS_FACTOR = 0.7
# Aspect ratio above which the additional views split into two sphere groups.
SPLIT_ASPECT_RATIO = 1.5
# Minimum camera distance to the object AABB.
MIN_STANDOFF = 0.3
# Focal search multiplier.
FOCAL_STEP = 1.1

ROLE_BASIC = "basic"
ROLE_GROUP_0 = "additional-group-0"
ROLE_GROUP_1 = "additional-group-1"


@dataclass(frozen=True)
class ViewPlan:
    """Initial view plus the ordered novel views with their role tags.

    ``candidate_count`` is the number of candidate cameras before the
    room-boundary and standoff filters removed any.
    """

    initial: PerspCamera | None
    views: tuple[PerspCamera, ...]
    roles: tuple[str, ...]
    seed: int
    candidate_count: int = 0

    def __post_init__(self):
        if len(self.views) != len(self.roles):
            raise InvalidGeometryError("one role per view required")

    def all_cameras(self) -> list[PerspCamera]:
        cams = [] if self.initial is None else [self.initial]
        cams.extend(self.views)
        return cams


def _default_focal(resolution: int) -> float:
    """Paper-equivalent focal for a non-default resolution (500 at 1024)."""
    return DEFAULT_FOCAL * resolution / DEFAULT_PERSP_RESOLUTION


def _project_corners(cam: PerspCamera, corners: np.ndarray):
    u, v, _, valid = cam.project(corners)
    if not valid.all():
        raise InvalidGeometryError("object projects behind the camera")
    return u, v


def _search_focal(
    position: np.ndarray,
    target: np.ndarray,
    corners: np.ndarray,
    resolution: int,
    start_focal: float,
    min_span: float,
) -> float:
    """Walk the x1.1 focal grid: stay inside the frame, reach min_span if possible.

    Returns the largest grid focal that keeps all corners inside when the span
    target conflicts with the frame bound.
    """

    def measure(focal: float) -> tuple[bool, float]:
        cam = PerspCamera(position=position, target=target, focal=focal, resolution=resolution)
        u, v = _project_corners(cam, corners)
        lo, hi = -0.5, resolution - 0.5
        inside = bool(
            (u.min() >= lo) and (u.max() <= hi) and (v.min() >= lo) and (v.max() <= hi)
        )
        span = float(max(u.max() - u.min(), v.max() - v.min()))
        return inside, span

    focal = start_focal
    inside, span = measure(focal)
    guard = 0
    while not inside:
        focal /= FOCAL_STEP
        guard += 1
        if guard > 200:
            raise InvalidGeometryError("no focal length keeps the target in frame")
        inside, span = measure(focal)
    while span < min_span:
        nxt = focal * FOCAL_STEP
        nxt_inside, nxt_span = measure(nxt)
        if not nxt_inside:
            break
        focal, span = nxt, nxt_span
    return focal


def initial_view(
    obj: ObjectInstance,
    room: RoomSpec,
    pano_center: np.ndarray | None = None,
    resolution: int = DEFAULT_PERSP_RESOLUTION,
    start_focal: float | None = None,
) -> PerspCamera:
    """Camera at the panorama center aimed at the object.

    The focal length starts at the default and grows in x1.1 steps until the
    projected AABB fills half the image width while staying fully in frame.
    """
    position = room.center() if pano_center is None else np.asarray(pano_center, dtype=np.float64)
    center = obj.aabb_center()
    if np.linalg.norm(center - position) < 1e-9:
        raise InvalidGeometryError(
            f"object '{obj.object_id}' sits at the panorama center (zero view direction)"
        )
    corners = _aabb_corners(*obj.aabb())
    start = _default_focal(resolution) if start_focal is None else start_focal
    focal = _search_focal(position, center, corners, resolution, start, resolution / 2.0)
    return PerspCamera(position=position, target=center, focal=focal, resolution=resolution)


def _aabb_corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    xs, ys, zs = zip(lo, hi)
    return np.array([(x, y, z) for x in xs for y in ys for z in zs])


def _aabb_distance(point: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float:
    gap = np.maximum(np.maximum(lo - point, point - hi), 0.0)
    return float(np.linalg.norm(gap))


def _sphere_position(center: np.ndarray, radius: float, polar: float, azimuth: float) -> np.ndarray:
    return center + radius * np.array(
        [math.sin(polar) * math.cos(azimuth), math.sin(polar) * math.sin(azimuth), math.cos(polar)]
    )


def plan_views(
    obj: ObjectInstance,
    room: RoomSpec,
    rng_seed: int,
    resolution: int = DEFAULT_PERSP_RESOLUTION,
    min_standoff: float = MIN_STANDOFF,
    pano_center: np.ndarray | None = None,
) -> ViewPlan:
    """Deterministic camera plan for one object.

    Basic views sit at the eight bounding-box corner directions (polar pi/4 and
    3pi/4, azimuths pi/4 + k*pi/2) on a 1.1 x diagonal sphere. Additional
    views use a 0.7 x diagonal sphere, azimuths {0, pi/2, pi, 3pi/2}, and
    seeded random elevations in [pi/6, pi/3] mirrored above and below the
    equator; objects with aspect ratio >= 1.5 get two groups centered at
    +-1/3 of the long axis. Candidates outside the room or within
    ``min_standoff`` of the AABB are removed.
    """
    lo, hi = obj.aabb()
    center = (lo + hi) / 2
    diag = float(np.linalg.norm(hi - lo))
    if diag <= 0:
        raise PlanningError(obj.object_id, "degenerate bounding box")
    focal = _default_focal(resolution)

    candidates: list[tuple[np.ndarray, np.ndarray, str]] = []

    basic_radius = BASIC_RADIUS_FACTOR * diag
    for polar in (math.pi / 4, 3 * math.pi / 4):
        for k in range(4):
            azimuth = math.pi / 4 + k * (math.pi / 2)
            candidates.append(
                (_sphere_position(center, basic_radius, polar, azimuth), center, ROLE_BASIC)
            )

    ratio = object_aspect_ratio(obj)
    if ratio < SPLIT_ASPECT_RATIO:
        group_centers = [center]
    else:
        axis, long_extent, _ = footprint_long_axis(obj)
        offset = (long_extent / 3.0) * axis
        group_centers = [center - offset, center + offset]

    rng = np.random.default_rng(rng_seed)
    add_radius = ADDITIONAL_RADIUS_FACTOR * diag
    for gi, gc in enumerate(group_centers):
        role = ROLE_GROUP_0 if gi == 0 else ROLE_GROUP_1
        for azimuth in (0.0, math.pi / 2, math.pi, 3 * math.pi / 2):
            for sign in (1.0, -1.0):
                elevation = rng.uniform(math.pi / 6, math.pi / 3)
                polar = math.pi / 2 - sign * elevation
                candidates.append((_sphere_position(gc, add_radius, polar, azimuth), gc, role))

    views, roles = [], []
    for position, target, role in candidates:
        if not room.contains(position)[0]:
            continue
        if _aabb_distance(position, lo, hi) < min_standoff:
            continue
        views.append(
            PerspCamera(position=position, target=target, focal=focal, resolution=resolution)
        )
        roles.append(role)
    if not views:
        raise PlanningError(obj.object_id, "every candidate camera was filtered out")

    try:
        init = initial_view(obj, room, pano_center, resolution)
    except InvalidGeometryError:
        init = None
    return ViewPlan(init, tuple(views), tuple(roles), rng_seed, len(candidates))


def refinement_views(
    room: RoomSpec, resolution: int = DEFAULT_PERSP_RESOLUTION
) -> tuple[PerspCamera, PerspCamera]:
    """Overhead (floor) and upward (ceiling) cameras at the room center.

    The focal is searched on the x1.1 grid so the target surface spans at
    least 90% of the image width without leaving the frame.
    """
    position = room.center()
    half_w, half_d = room.width / 2, room.depth / 2
    start = _default_focal(resolution)
    result = []
    for z in (0.0, room.height):
        corners = np.array(
            [(x, y, z) for x in (-half_w, half_w) for y in (-half_d, half_d)]
        )
        target = np.array([0.0, 0.0, z])
        focal = _search_focal(position, target, corners, resolution, start, 0.9 * resolution)
        result.append(
            PerspCamera(position=position, target=target, focal=focal, resolution=resolution)
        )
    return result[0], result[1]
