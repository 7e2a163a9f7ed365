"""Pluggable text-image scorers used during candidate selection."""

from __future__ import annotations

import base64
import logging
from typing import Protocol

import httpx

from scenepaint import pngio
from scenepaint.projection.rasters import RgbImage

logger = logging.getLogger(__name__)


class Scorer(Protocol):
    def score(self, img: RgbImage, prompt: str) -> float: ...


class NullScorer:
    """Scores everything 0.0; selection then rests on SSIM/PSNR alone."""

    def score(self, img: RgbImage, prompt: str) -> float:
        return 0.0


class RemoteScorer:
    """POSTs {image, prompt} to {url}/v1/score; falls back to 0.0 on failure."""

    def __init__(self, url: str, timeout_seconds: float = 60.0,
                 transport: httpx.BaseTransport | None = None):
        self._client = httpx.Client(base_url=url, timeout=timeout_seconds, transport=transport)

    def close(self) -> None:
        self._client.close()

    def score(self, img: RgbImage, prompt: str) -> float:
        try:
            response = self._client.post(
                "/v1/score",
                json={
                    "image": base64.b64encode(pngio.encode_rgb(img.pixels)).decode("ascii"),
                    "prompt": prompt,
                },
            )
            response.raise_for_status()
            return float(response.json()["score"])
        except (httpx.HTTPError, KeyError, ValueError, TypeError) as exc:
            logger.warning("remote scorer failed (%s); falling back to 0.0", exc)
            return 0.0
