"""The paint request/result contract and its wire serialization.

A painter turns a depth map (optionally with a base image, an inpaint mask,
and a sketch) into candidate images. The engine, not the backend, guarantees
that pixels outside the inpaint mask equal the base image bit-exactly.

Wire format (versioned JSON envelope):
    {"version": 1, "kind", "prompt", "negative_prompt", "seed", "n",
     "params": {"steps", "control_weight", "cfg", "refiner_switch"},
     "depth_range": [min, max] | null,
     "images": {"base"?, "mask"?, "sketch"?, "depth"}}   # base64 PNG
Depth travels as 16-bit normalized inverse depth (the usual depth-control
convention): value 0 is a miss, finite depths map to 1..65535 with near
surfaces bright.
"""

from __future__ import annotations

import base64
import hashlib
import json
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

import numpy as np

from scenepaint import pngio
from scenepaint.errors import ProtocolError, ValidationError
from scenepaint.projection.rasters import BitMask, DepthMap, RgbImage, check_aligned

WIRE_VERSION = 1
DEFAULT_CANDIDATES = 5


class PaintKind(str, Enum):
    GENERATE = "generate"
    INPAINT = "inpaint"
    SKETCH_INPAINT = "sketch-inpaint"


@dataclass(frozen=True)
class BackendParams:
    """Diffusion settings passed through to the backend."""

    steps: int = 50
    control_weight: float = 1.5
    cfg: float = 6.5
    refiner_switch: float = 0.8


@dataclass(frozen=True)
class PaintRequest:
    kind: PaintKind
    depth: DepthMap
    prompt: str
    negative_prompt: str = ""
    base: RgbImage | None = None
    mask: BitMask | None = None
    sketch: BitMask | None = None
    seed: int = 0
    candidates: int = DEFAULT_CANDIDATES
    params: BackendParams = field(default_factory=BackendParams)

    def __post_init__(self):
        if self.candidates < 1:
            raise ValidationError("candidates", "must be >= 1")
        if self.kind in (PaintKind.INPAINT, PaintKind.SKETCH_INPAINT):
            if self.base is None or self.mask is None:
                raise ValidationError("base", f"{self.kind.value} requires base and mask")
        if self.kind is PaintKind.SKETCH_INPAINT and self.sketch is None:
            raise ValidationError("sketch", "sketch-inpaint requires a sketch")
        check_aligned(*[r for r in (self.depth, self.base, self.mask, self.sketch) if r])

    @property
    def shape(self) -> tuple[int, int]:
        return self.depth.shape

    def normalized_depth(self) -> np.ndarray:
        """Depth scaled linearly to [0, 1] over finite values; misses are 1.0.

        A constant finite depth normalizes to 0.0 everywhere.
        """
        values = self.depth.values
        finite = np.isfinite(values)
        out = np.ones(values.shape, dtype=np.float64)
        if finite.any():
            lo, hi = values[finite].min(), values[finite].max()
            if hi > lo:
                out[finite] = (values[finite] - lo) / (hi - lo)
            else:
                out[finite] = 0.0
        return out


@dataclass(frozen=True)
class PaintResult:
    candidates: list[RgbImage]
    backend: str
    elapsed_seconds: float


class Painter(Protocol):
    name: str

    def paint(self, request: PaintRequest) -> PaintResult: ...


def finalize_result(
    request: PaintRequest,
    raw_candidates: list[np.ndarray],
    backend: str,
    started_at: float,
) -> PaintResult:
    """Validate candidate rasters and enforce out-of-mask fidelity.

    Overwrites every pixel outside the inpaint mask with the base image, so
    the mask contract holds even for sloppy remotes.

    Raises:
        ProtocolError: candidate count or resolution does not match.
    """
    if len(raw_candidates) != request.candidates:
        raise ProtocolError(
            f"{backend} returned {len(raw_candidates)} candidates, expected {request.candidates}"
        )
    shape = request.shape
    images = []
    for i, arr in enumerate(raw_candidates):
        if arr.shape[:2] != shape:
            raise ProtocolError(
                f"{backend} candidate {i} resolution {arr.shape[:2]} != request {shape}"
            )
        pixels = np.ascontiguousarray(arr[:, :, :3], dtype=np.uint8)
        if request.kind is not PaintKind.GENERATE:
            outside = ~request.mask.values
            pixels[outside] = request.base.pixels[outside]
        images.append(RgbImage(pixels, camera=request.depth.camera))
    return PaintResult(images, backend, time.monotonic() - started_at)


def encode_depth_wire(depth: DepthMap) -> tuple[np.ndarray, list[float] | None]:
    """16-bit inverse-depth raster plus the [min, max] range it encodes."""
    values = depth.values
    finite = np.isfinite(values)
    out = np.zeros(values.shape, dtype=np.uint16)
    if not finite.any():
        return out, None
    lo, hi = float(values[finite].min()), float(values[finite].max())
    if hi > lo:
        inv = (1.0 / values[finite] - 1.0 / hi) / (1.0 / lo - 1.0 / hi)
    else:
        inv = np.ones(int(finite.sum()))
    out[finite] = 1 + np.rint(inv * 65534.0).astype(np.uint16)
    return out, [lo, hi]


def decode_depth_wire(raster: np.ndarray, depth_range: list[float] | None) -> DepthMap:
    values = np.full(raster.shape, np.inf)
    hit = raster > 0
    if depth_range is None or not hit.any():
        return DepthMap(values)
    lo, hi = depth_range
    if hi > lo:
        inv_norm = (raster[hit].astype(np.float64) - 1.0) / 65534.0
        inv_d = inv_norm * (1.0 / lo - 1.0 / hi) + 1.0 / hi
        values[hit] = 1.0 / inv_d
    else:
        values[hit] = lo
    return DepthMap(values)


def encode_request(request: PaintRequest) -> bytes:
    """Canonical JSON bytes of the request envelope (stable across re-encodes)."""
    depth16, depth_range = encode_depth_wire(request.depth)
    images = {"depth": base64.b64encode(pngio.encode_gray16(depth16)).decode("ascii")}
    if request.base is not None:
        images["base"] = base64.b64encode(pngio.encode_rgb(request.base.pixels)).decode("ascii")
    if request.mask is not None:
        images["mask"] = base64.b64encode(pngio.encode_mask(request.mask.values)).decode("ascii")
    if request.sketch is not None:
        images["sketch"] = base64.b64encode(pngio.encode_mask(request.sketch.values)).decode("ascii")
    envelope = {
        "version": WIRE_VERSION,
        "kind": request.kind.value,
        "prompt": request.prompt,
        "negative_prompt": request.negative_prompt,
        "seed": request.seed,
        "n": request.candidates,
        "params": {
            "steps": request.params.steps,
            "control_weight": request.params.control_weight,
            "cfg": request.params.cfg,
            "refiner_switch": request.params.refiner_switch,
        },
        "depth_range": depth_range,
        "images": images,
    }
    return json.dumps(envelope, sort_keys=True, separators=(",", ":")).encode("utf-8")


def decode_request(data: bytes) -> PaintRequest:
    try:
        env = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"unreadable paint request: {exc}") from exc
    if env.get("version") != WIRE_VERSION:
        raise ProtocolError(f"unsupported request version {env.get('version')!r}")
    images = env["images"]
    depth = decode_depth_wire(
        pngio.decode_gray16(base64.b64decode(images["depth"])), env.get("depth_range")
    )
    base = mask = sketch = None
    if "base" in images:
        base = RgbImage(pngio.decode_rgb(base64.b64decode(images["base"])))
    if "mask" in images:
        mask = BitMask(pngio.decode_mask(base64.b64decode(images["mask"])))
    if "sketch" in images:
        sketch = BitMask(pngio.decode_mask(base64.b64decode(images["sketch"])))
    p = env["params"]
    return PaintRequest(
        kind=PaintKind(env["kind"]),
        depth=depth,
        prompt=env["prompt"],
        negative_prompt=env["negative_prompt"],
        base=base,
        mask=mask,
        sketch=sketch,
        seed=env["seed"],
        candidates=env["n"],
        params=BackendParams(
            steps=p["steps"], control_weight=p["control_weight"],
            cfg=p["cfg"], refiner_switch=p["refiner_switch"],
        ),
    )


def request_digest(request: PaintRequest) -> str:
    return hashlib.sha256(encode_request(request)).hexdigest()
