"""Candidate selection among backend outputs."""

from __future__ import annotations

from scenepaint.errors import ValidationError
from scenepaint.imaging.metrics import psnr, ssim
from scenepaint.painter.scorers import Scorer
from scenepaint.projection.rasters import BitMask, RgbImage

PSNR_NORMALIZER = 50.0


def select_candidate(
    candidates: list[RgbImage],
    reference: RgbImage,
    region: BitMask | None,
    prompt: str,
    scorer: Scorer,
    mode: str,
    psnr_normalizer: float = PSNR_NORMALIZER,
) -> tuple[int, list[float]]:
    """Pick the best candidate; returns (index, per-candidate scores).

    ``initial`` mode scores ssim(candidate, reference) + clip; ``iterative``
    scores psnr over the region (divided by ``psnr_normalizer`` so both terms
    share a scale) + clip. Exact ties go to the lowest index.
    """
    if not candidates:
        raise ValidationError("candidates", "need at least one candidate")
    if mode not in ("initial", "iterative"):
        raise ValidationError("mode", "must be 'initial' or 'iterative'")
    if mode == "iterative" and (region is None or not region.values.any()):
        raise ValidationError("region", "iterative mode needs a non-empty region")

    scores = []
    for cand in candidates:
        if mode == "initial":
            similarity = ssim(cand, reference)
        else:
            similarity = psnr(cand, reference, region) / psnr_normalizer
        scores.append(similarity + scorer.score(cand, prompt))
    best = 0
    for i, s in enumerate(scores):
        if s > scores[best]:
            best = i
    return best, scores
