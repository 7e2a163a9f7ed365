"""Depth rendering by ray-triangle intersection.

Two query paths share one JIT-compiled intersection routine: a brute-force
scan (the correctness oracle) and an AABB BVH. Both resolve the nearest hit
with ties broken by the lowest triangle index, so their outputs are
bit-identical; the BVH prunes conservatively (strictly worse entry distances
only) to keep that guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from scenepaint.core.mesh import TriMesh
from scenepaint.projection.cameras import PanoCamera, PerspCamera
from scenepaint.projection.rasters import BitMask, DepthMap

# Hits closer than this along the ray are ignored (self-intersection guard).
T_MIN = 1e-9
_DET_EPS = 1e-12
_LEAF_SIZE = 8
_NO_TRI = np.iinfo(np.int32).max
_STACK_DEPTH = 128


@dataclass
class TriangleSoup:
    """Flattened triangle set with per-triangle owner and label."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    owner_index: np.ndarray
    labels: np.ndarray
    owner_names: list[str]
    _bvh: "Bvh | None" = field(default=None, repr=False)
    _edges: tuple | None = field(default=None, repr=False)

    @classmethod
    def from_meshes(cls, meshes: list[tuple[str, TriMesh]]) -> "TriangleSoup":
        parts_a, parts_b, parts_c, owners, labels, names = [], [], [], [], [], []
        for owner, mesh in meshes:
            if owner not in names:
                names.append(owner)
            idx = names.index(owner)
            av, bv, cv = mesh.triangle_corners()
            parts_a.append(av)
            parts_b.append(bv)
            parts_c.append(cv)
            owners.append(np.full(mesh.num_triangles, idx, dtype=np.uint16))
            if mesh.labels is not None:
                labels.append(mesh.labels.astype(np.int16))
            else:
                labels.append(np.full(mesh.num_triangles, -1, dtype=np.int16))
        if parts_a:
            return cls(
                np.ascontiguousarray(np.concatenate(parts_a)),
                np.ascontiguousarray(np.concatenate(parts_b)),
                np.ascontiguousarray(np.concatenate(parts_c)),
                np.concatenate(owners), np.concatenate(labels), names,
            )
        empty = np.empty((0, 3))
        return cls(empty, empty, empty, np.empty(0, np.uint16), np.empty(0, np.int16), names)

    @property
    def num_triangles(self) -> int:
        return self.a.shape[0]

    def edges(self):
        """(a, e1, e2) contiguous float64 arrays for the intersection kernel."""
        if self._edges is None:
            self._edges = (
                np.ascontiguousarray(self.a),
                np.ascontiguousarray(self.b - self.a),
                np.ascontiguousarray(self.c - self.a),
            )
        return self._edges

    def bvh(self) -> "Bvh":
        if self._bvh is None:
            self._bvh = Bvh.build(self)
        return self._bvh


@dataclass
class Bvh:
    node_lo: np.ndarray
    node_hi: np.ndarray
    left: np.ndarray
    right: np.ndarray
    first: np.ndarray
    count: np.ndarray
    tri_order: np.ndarray

    @classmethod
    def build(cls, soup: TriangleSoup) -> "Bvh":
        n = soup.num_triangles
        tri_lo = np.minimum(np.minimum(soup.a, soup.b), soup.c)
        tri_hi = np.maximum(np.maximum(soup.a, soup.b), soup.c)
        centroids = (tri_lo + tri_hi) / 2.0

        node_lo, node_hi, left, right, first, count = [], [], [], [], [], []
        order = np.empty(max(n, 1), dtype=np.int32)
        cursor = 0

        def new_node(ids: np.ndarray) -> int:
            idx = len(node_lo)
            node_lo.append(tri_lo[ids].min(axis=0))
            node_hi.append(tri_hi[ids].max(axis=0))
            left.append(-1)
            right.append(-1)
            first.append(-1)
            count.append(0)
            return idx

        stack: list[tuple[int, np.ndarray]] = []
        if n:
            root_ids = np.arange(n, dtype=np.int32)
            stack.append((new_node(root_ids), root_ids))
        while stack:
            node, ids = stack.pop()
            cen = centroids[ids]
            spread = cen.max(axis=0) - cen.min(axis=0)
            axis = int(np.argmax(spread))
            if ids.size <= _LEAF_SIZE or spread[axis] <= 0:
                # Leaf triangles stored ascending so an in-order scan honors
                # the lowest-index tie rule.
                leaf_ids = np.sort(ids)
                first[node] = cursor
                count[node] = leaf_ids.size
                order[cursor:cursor + leaf_ids.size] = leaf_ids
                cursor += leaf_ids.size
                continue
            ordered = ids[np.argsort(cen[:, axis], kind="stable")]
            mid = ids.size // 2
            left[node] = new_node(ordered[:mid])
            right[node] = new_node(ordered[mid:])
            stack.append((left[node], ordered[:mid]))
            stack.append((right[node], ordered[mid:]))

        if not node_lo:
            zero3 = np.zeros((1, 3))
            return cls(zero3, zero3, np.full(1, -1, np.int32), np.full(1, -1, np.int32),
                       np.zeros(1, np.int32), np.zeros(1, np.int32), order[:0])
        return cls(
            np.ascontiguousarray(node_lo), np.ascontiguousarray(node_hi),
            np.asarray(left, dtype=np.int32), np.asarray(right, dtype=np.int32),
            np.asarray(first, dtype=np.int32), np.asarray(count, dtype=np.int32),
            order[:cursor],
        )


@njit(cache=True, inline="always")
def _hit(ox, oy, oz, dx, dy, dz, va, e1, e2, k):
    """Moller-Trumbore against triangle k; +inf on miss."""
    e1x, e1y, e1z = e1[k, 0], e1[k, 1], e1[k, 2]
    e2x, e2y, e2z = e2[k, 0], e2[k, 1], e2[k, 2]
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    if abs(det) <= _DET_EPS:
        return np.inf
    inv = 1.0 / det
    tvx = ox - va[k, 0]
    tvy = oy - va[k, 1]
    tvz = oz - va[k, 2]
    u = (tvx * px + tvy * py + tvz * pz) * inv
    if u < 0.0 or u > 1.0:
        return np.inf
    qx = tvy * e1z - tvz * e1y
    qy = tvz * e1x - tvx * e1z
    qz = tvx * e1y - tvy * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return np.inf
    t = (e2x * qx + e2y * qy + e2z * qz) * inv
    if t <= T_MIN:
        return np.inf
    return t


@njit(cache=True)
def _cast_brute_jit(origins, dirs, va, e1, e2, out_t, out_tri):
    n_tri = va.shape[0]
    for r in range(origins.shape[0]):
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx, dy, dz = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        best_t = np.inf
        best_k = _NO_TRI
        for k in range(n_tri):
            t = _hit(ox, oy, oz, dx, dy, dz, va, e1, e2, k)
            if t < best_t or (t == best_t and t < np.inf and k < best_k):
                best_t = t
                best_k = k
        out_t[r] = best_t
        out_tri[r] = best_k


@njit(cache=True)
def _cast_bvh_jit(
    origins, dirs, va, e1, e2,
    node_lo, node_hi, left, right, first, count, order,
    out_t, out_tri,
):
    stack = np.empty(_STACK_DEPTH, dtype=np.int32)
    for r in range(origins.shape[0]):
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx, dy, dz = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        best_t = np.inf
        best_k = _NO_TRI
        stack[0] = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top]
            # Slab test; zero direction components handled exactly.
            t_near = 0.0
            t_far = np.inf
            miss = False
            for axis in range(3):
                o = origins[r, axis]
                d = dirs[r, axis]
                lo = node_lo[node, axis]
                hi = node_hi[node, axis]
                if d != 0.0:
                    inv = 1.0 / d
                    t1 = (lo - o) * inv
                    t2 = (hi - o) * inv
                    if t1 > t2:
                        t1, t2 = t2, t1
                    if t1 > t_near:
                        t_near = t1
                    if t2 < t_far:
                        t_far = t2
                elif o < lo or o > hi:
                    miss = True
                    break
            if miss or t_near > t_far or t_far < 0.0:
                continue
            # Prune only nodes that cannot beat or tie the current best.
            if t_near > best_t * (1.0 + 1e-12) + 1e-12:
                continue
            if count[node] > 0:
                for j in range(first[node], first[node] + count[node]):
                    k = order[j]
                    t = _hit(ox, oy, oz, dx, dy, dz, va, e1, e2, k)
                    if t < best_t or (t == best_t and t < np.inf and k < best_k):
                        best_t = t
                        best_k = k
            else:
                stack[top] = left[node]
                stack[top + 1] = right[node]
                top += 2
        out_t[r] = best_t
        out_tri[r] = best_k


def cast_rays(soup: TriangleSoup, origins: np.ndarray, dirs: np.ndarray, use_bvh: bool = True):
    """Nearest hit per ray: (t, triangle index); misses are (+inf, -1).

    ``use_bvh=False`` runs the exhaustive oracle path.
    """
    origins = np.ascontiguousarray(origins, dtype=np.float64).reshape(-1, 3)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64).reshape(-1, 3)
    n_rays = origins.shape[0]
    out_t = np.full(n_rays, np.inf)
    out_tri = np.full(n_rays, _NO_TRI, dtype=np.int32)
    if soup.num_triangles == 0:
        out_tri[:] = -1
        return out_t, out_tri
    va, e1, e2 = soup.edges()
    if use_bvh:
        bvh = soup.bvh()
        _cast_bvh_jit(
            origins, dirs, va, e1, e2,
            bvh.node_lo, bvh.node_hi, bvh.left, bvh.right, bvh.first, bvh.count,
            bvh.tri_order, out_t, out_tri,
        )
    else:
        _cast_brute_jit(origins, dirs, va, e1, e2, out_t, out_tri)
    out_tri[~np.isfinite(out_t)] = -1
    return out_t, out_tri


def _as_soup(meshes) -> TriangleSoup:
    if isinstance(meshes, TriangleSoup):
        return meshes
    return TriangleSoup.from_meshes(list(meshes))


def render_pano_depth(meshes, cam: PanoCamera, use_bvh: bool = True) -> DepthMap:
    """Equirectangular ray-length depth; misses are +inf."""
    soup = _as_soup(meshes)
    dirs = cam.grid_dirs()
    origins = np.broadcast_to(cam.center, dirs.shape)
    t, _ = cast_rays(soup, origins, dirs, use_bvh=use_bvh)
    return DepthMap(t.reshape(cam.shape), camera=cam)


@dataclass(frozen=True)
class PerspRender:
    """Pinhole depth plus per-pixel nearest-hit ownership."""

    depth: DepthMap
    owner_index: np.ndarray  # (H, W) int32 index into owner_names, -1 for miss
    hit_labels: np.ndarray   # (H, W) int16 Surface code of the hit, -1 for miss
    owner_names: list[str]

    def mask(self, owner: str) -> BitMask:
        """True where the nearest hit belongs to ``owner``."""
        if owner not in self.owner_names:
            return BitMask(np.zeros(self.depth.shape, dtype=bool), camera=self.depth.camera)
        idx = self.owner_names.index(owner)
        return BitMask(self.owner_index == idx, camera=self.depth.camera)

    def masks(self) -> dict[str, BitMask]:
        return {name: self.mask(name) for name in self.owner_names}

    def label_mask(self, label: int) -> BitMask:
        return BitMask(self.hit_labels == int(label), camera=self.depth.camera)


def render_persp_depth(meshes, cam: PerspCamera, use_bvh: bool = True) -> PerspRender:
    """Pinhole ray-length depth with nearest-hit object masks."""
    soup = _as_soup(meshes)
    dirs = cam.grid_dirs()
    origins = np.broadcast_to(cam.position, dirs.shape)
    t, tri = cast_rays(soup, origins, dirs, use_bvh=use_bvh)
    owner = np.full(t.shape, -1, dtype=np.int32)
    labels = np.full(t.shape, -1, dtype=np.int16)
    hit = tri >= 0
    owner[hit] = soup.owner_index[tri[hit]].astype(np.int32)
    labels[hit] = soup.labels[tri[hit]]
    return PerspRender(
        DepthMap(t.reshape(cam.shape), camera=cam),
        owner.reshape(cam.shape),
        labels.reshape(cam.shape),
        list(soup.owner_names),
    )
