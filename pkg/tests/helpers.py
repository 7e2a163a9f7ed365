"""Independent oracle implementations used to cross-check the engine."""

from __future__ import annotations

import numpy as np


def ray_aabb_distance(origin, direction, lo, hi):
    """Slab-method ray/AABB entry distance; inf on miss."""
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    t_near, t_far = -np.inf, np.inf
    for axis in range(3):
        if direction[axis] == 0.0:
            if origin[axis] < lo[axis] or origin[axis] > hi[axis]:
                return np.inf
            continue
        t1 = (lo[axis] - origin[axis]) / direction[axis]
        t2 = (hi[axis] - origin[axis]) / direction[axis]
        t_near = max(t_near, min(t1, t2))
        t_far = min(t_far, max(t1, t2))
    if t_near > t_far or t_far < 0:
        return np.inf
    return max(t_near, 0.0)


def point_triangle_distance(p, a, b, c):
    """Exact point-to-triangle distance (Ericson closest-point construction)."""
    p, a, b, c = (np.asarray(v, dtype=np.float64) for v in (p, a, b, c))
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = ab @ ap, ac @ ap
    if d1 <= 0 and d2 <= 0:
        return np.linalg.norm(p - a)
    bp = p - b
    d3, d4 = ab @ bp, ac @ bp
    if d3 >= 0 and d4 <= d3:
        return np.linalg.norm(p - b)
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        v = d1 / (d1 - d3)
        return np.linalg.norm(p - (a + v * ab))
    cp = p - c
    d5, d6 = ab @ cp, ac @ cp
    if d6 >= 0 and d5 <= d6:
        return np.linalg.norm(p - c)
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        w = d2 / (d2 - d6)
        return np.linalg.norm(p - (a + w * ac))
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return np.linalg.norm(p - (b + w * (c - b)))
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return np.linalg.norm(p - (a + ab * v + ac * w))


def point_mesh_distance(points, mesh, chunk=512):
    """Min distance from each point to any mesh triangle."""
    a, b, c = mesh.triangle_corners()
    out = np.empty(len(points))
    for i, p in enumerate(points):
        best = np.inf
        for t in range(mesh.num_triangles):
            best = min(best, point_triangle_distance(p, a[t], b[t], c[t]))
        out[i] = best
    return out


def dilate_oracle(mask: np.ndarray, radius: int) -> np.ndarray:
    """Set-based dilation: true if any true pixel lies within the disk."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dy * dy + dx * dx > radius * radius:
                continue
            src = mask[
                max(0, -dy): h - max(0, dy),
                max(0, -dx): w - max(0, dx),
            ]
            out[
                max(0, dy): h - max(0, -dy),
                max(0, dx): w - max(0, -dx),
            ] |= src
    return out


def erode_oracle(mask: np.ndarray, radius: int) -> np.ndarray:
    """Set-based erosion: true iff every in-bounds disk pixel is true."""
    h, w = mask.shape
    out = np.ones_like(mask)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dy * dy + dx * dx > radius * radius:
                continue
            shifted = np.ones_like(mask)
            src = mask[
                max(0, dy): h - max(0, -dy),
                max(0, dx): w - max(0, -dx),
            ]
            shifted[
                max(0, -dy): h - max(0, dy),
                max(0, -dx): w - max(0, dx),
            ] = src
            out &= shifted
    return out


def sample_mesh_surface(mesh, count: int, rng: np.random.Generator) -> np.ndarray:
    """Area-weighted uniform surface samples, shape (count, 3)."""
    a, b, c = mesh.triangle_corners()
    areas = mesh.triangle_areas()
    tri = rng.choice(mesh.num_triangles, size=count, p=areas / areas.sum())
    u = rng.random(count)
    v = rng.random(count)
    flip = u + v > 1
    u[flip], v[flip] = 1 - u[flip], 1 - v[flip]
    return a[tri] + u[:, None] * (b[tri] - a[tri]) + v[:, None] * (c[tri] - a[tri])


def poisson_thin(points: np.ndarray, radius: float, limit: int) -> np.ndarray:
    """Greedy Poisson-disk thinning (keeps the first point of each clump)."""
    from scipy.spatial import cKDTree

    kept: list[np.ndarray] = []
    tree = None
    for p in points:
        if tree is not None and len(tree.query_ball_point(p, radius)) > 0:
            continue
        kept.append(p)
        if len(kept) >= limit:
            break
        if len(kept) % 256 == 0:
            tree = cKDTree(np.asarray(kept))
        elif tree is None:
            tree = cKDTree(np.asarray(kept))
    return np.asarray(kept)


def visible_samples(samples: np.ndarray, cameras, soup) -> np.ndarray:
    """True where some camera sees the sample unoccluded and in frame."""
    from scenepaint.projection import cast_rays

    visible = np.zeros(len(samples), dtype=bool)
    for cam in cameras:
        rel = samples - cam.position
        dist = np.linalg.norm(rel, axis=1)
        u, v, _, in_front = cam.project(samples)
        res = cam.resolution
        in_frame = in_front & (u >= -0.5) & (u <= res - 0.5) & (v >= -0.5) & (v <= res - 0.5)
        todo = np.flatnonzero(in_frame & ~visible)
        if todo.size == 0:
            continue
        dirs = rel[todo] / dist[todo, None]
        t, _ = cast_rays(soup, np.broadcast_to(cam.position, (todo.size, 3)), dirs)
        unoccluded = t >= dist[todo] - 1e-6
        visible[todo[unoccluded]] = True
    return visible


def nearest_fill_oracle(pixels: np.ndarray, unknown: np.ndarray) -> np.ndarray:
    """O(N*M) nearest-known-color assignment with row-major tie-breaking."""
    known_rc = np.argwhere(~unknown)
    out = pixels.copy()
    for r, c in np.argwhere(unknown):
        d2 = (known_rc[:, 0] - r) ** 2 + (known_rc[:, 1] - c) ** 2
        best = np.flatnonzero(d2 == d2.min())[0]  # argwhere order is row-major
        out[r, c] = pixels[known_rc[best, 0], known_rc[best, 1]]
    return out
