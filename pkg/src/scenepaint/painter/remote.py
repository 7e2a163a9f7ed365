"""HTTP client for an external depth-conditioned diffusion service."""

from __future__ import annotations

import base64
import json
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path

import httpx

from scenepaint import pngio
from scenepaint.errors import BackendError, ProtocolError
from scenepaint.painter.contract import PaintRequest, PaintResult, encode_request, finalize_result

logger = logging.getLogger(__name__)

ENV_URL = "SCENEPAINT_BACKEND_URL"
ENV_API_KEY = "SCENEPAINT_API_KEY"
ENV_TIMEOUT = "SCENEPAINT_BACKEND_TIMEOUT"

_API_KEY_HEADER = "X-Api-Key"


@dataclass(frozen=True)
class BackendConfig:
    """Remote painter endpoint settings (file values overridden by env)."""

    url: str = ""
    timeout_seconds: float = 300.0
    max_retries: int = 2
    api_key: str | None = None


def load_backend_config(path: str | Path | None = None) -> BackendConfig:
    """Read a JSON config file (if given) and apply environment overrides."""
    data: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
    url = os.environ.get(ENV_URL, data.get("url", ""))
    api_key = os.environ.get(ENV_API_KEY, data.get("api_key"))
    timeout = float(os.environ.get(ENV_TIMEOUT, data.get("timeout_seconds", 300.0)))
    return BackendConfig(
        url=url,
        timeout_seconds=timeout,
        max_retries=int(data.get("max_retries", 2)),
        api_key=api_key,
    )


class RemotePainter:
    """POSTs the request envelope to {url}/v1/paint and decodes candidates.

    Transport and 5xx failures are retried up to ``max_retries`` times;
    malformed responses and 4xx are not retried.
    """

    def __init__(self, config: BackendConfig, transport: httpx.BaseTransport | None = None):
        if not config.url:
            raise BackendError("remote painter needs a backend URL", retries=0)
        self.config = config
        self.name = f"remote:{config.url}"
        headers = {}
        if config.api_key:
            headers[_API_KEY_HEADER] = config.api_key
        self._client = httpx.Client(
            base_url=config.url,
            timeout=config.timeout_seconds,
            headers=headers,
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def paint(self, request: PaintRequest) -> PaintResult:
        started = time.monotonic()
        body = encode_request(request)
        attempts = self.config.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                response = self._client.post(
                    "/v1/paint", content=body, headers={"Content-Type": "application/json"}
                )
            except httpx.HTTPError as exc:
                last_error = exc
                logger.warning("paint attempt %d/%d failed: %s", attempt + 1, attempts, exc)
                continue
            if response.status_code >= 500:
                last_error = ProtocolError(f"server error {response.status_code}")
                logger.warning("paint attempt %d/%d: HTTP %d", attempt + 1, attempts, response.status_code)
                continue
            if response.status_code != 200:
                raise ProtocolError(f"backend rejected request: HTTP {response.status_code}")
            return self._decode(request, response, started)
        raise BackendError(f"backend unreachable: {last_error}", retries=self.config.max_retries)

    def _decode(self, request: PaintRequest, response: httpx.Response, started: float) -> PaintResult:
        try:
            payload = response.json()
            raw = [pngio.decode_rgb(base64.b64decode(c)) for c in payload["candidates"]]
        except (KeyError, ValueError, TypeError) as exc:
            raise ProtocolError(f"malformed paint response: {exc}") from exc
        return finalize_result(request, raw, self.name, started)
