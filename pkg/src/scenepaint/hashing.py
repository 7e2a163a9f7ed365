"""FNV-1a hashing used for mock colors and the per-call seed schedule."""

from __future__ import annotations

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def derive_seed(*parts) -> int:
    """Deterministic 63-bit seed from heterogeneous parts.

    Parts are joined with '|' after str() conversion, so the schedule is
    reproducible across runs and resumes.
    """
    blob = "|".join(str(p) for p in parts).encode("utf-8")
    return fnv1a64(blob) & ((1 << 63) - 1)
