"""PLY I/O for colored point clouds and triangle meshes.

Point clouds use a fixed 17-byte binary little-endian layout: x/y/z float32,
red/green/blue uint8, owner uint16. Meshes load from ASCII or binary
little-endian PLY (positions and faces; any other surface data is ignored)
and save as binary with an optional per-face label property.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from scenepaint.core.mesh import TriMesh
from scenepaint.errors import EmptyCloudError, ProjectError
from scenepaint.projection.rasters import ColoredPointCloud

POINT_DTYPE = np.dtype(
    [
        ("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
        ("red", "u1"), ("green", "u1"), ("blue", "u1"),
        ("owner", "<u2"),
    ]
)

_PLY_SCALARS = {
    "char": "i1", "uchar": "u1", "int8": "i1", "uint8": "u1",
    "short": "<i2", "ushort": "<u2", "int16": "<i2", "uint16": "<u2",
    "int": "<i4", "uint": "<u4", "int32": "<i4", "uint32": "<u4",
    "float": "<f4", "float32": "<f4", "double": "<f8", "float64": "<f8",
}


def export_ply_bytes(cloud: ColoredPointCloud) -> bytes:
    """Serialize the cloud in the fixed binary point layout.

    Raises:
        EmptyCloudError: nothing to export.
    """
    if len(cloud) == 0:
        raise EmptyCloudError("refusing to export an empty point cloud")
    record = np.empty(len(cloud), dtype=POINT_DTYPE)
    pts = cloud.points.astype(np.float32)
    record["x"], record["y"], record["z"] = pts[:, 0], pts[:, 1], pts[:, 2]
    record["red"], record["green"], record["blue"] = (
        cloud.colors[:, 0], cloud.colors[:, 1], cloud.colors[:, 2]
    )
    record["owner"] = cloud.owners
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {len(cloud)}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "property ushort owner\n"
        "end_header\n"
    )
    buf = io.BytesIO()
    buf.write(header.encode("ascii"))
    buf.write(record.tobytes())
    return buf.getvalue()


def export_ply(cloud: ColoredPointCloud, path: str | Path) -> None:
    try:
        data = export_ply_bytes(cloud)
    except EmptyCloudError:
        raise
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ProjectError(f"cannot write point cloud to {path}: {exc}") from exc


def import_ply(path: str | Path) -> ColoredPointCloud:
    """Read a point cloud written by :func:`export_ply`.

    View provenance is not stored in the file; imported points carry view 0.
    """
    _, data = _read_ply(Path(path).read_bytes(), str(path))
    if "vertex" not in data:
        raise ProjectError(f"{path}: no vertex element")
    vertex = data["vertex"]
    names = vertex.dtype.names
    for needed in ("x", "y", "z", "red", "green", "blue"):
        if needed not in names:
            raise ProjectError(f"{path}: vertex property '{needed}' missing")
    points = np.stack([vertex["x"], vertex["y"], vertex["z"]], axis=1).astype(np.float64)
    colors = np.stack([vertex["red"], vertex["green"], vertex["blue"]], axis=1).astype(np.uint8)
    owners = (
        vertex["owner"].astype(np.uint16)
        if "owner" in names
        else np.zeros(len(vertex), np.uint16)
    )
    return ColoredPointCloud(points, colors, np.zeros(len(vertex), np.int32), owners)


def save_mesh_ply(mesh: TriMesh, path: str | Path) -> None:
    """Binary little-endian mesh with an optional per-face label property."""
    with_labels = mesh.labels is not None
    header = [
        "ply", "format binary_little_endian 1.0",
        f"element vertex {mesh.num_vertices}",
        "property float x", "property float y", "property float z",
        f"element face {mesh.num_triangles}",
        "property list uchar int vertex_indices",
    ]
    if with_labels:
        header.append("property short label")
    header.append("end_header")
    face_dtype = [("n", "u1"), ("idx", "<i4", (3,))]
    if with_labels:
        face_dtype.append(("label", "<i2"))
    faces = np.empty(mesh.num_triangles, dtype=np.dtype(face_dtype))
    faces["n"] = 3
    faces["idx"] = mesh.triangles
    if with_labels:
        faces["label"] = mesh.labels
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(mesh.vertices.astype("<f4").tobytes())
        fh.write(faces.tobytes())


def load_mesh_ply(path: str | Path) -> TriMesh:
    """Read an ASCII or binary little-endian triangle mesh.

    Faces with more than three vertices are fan-triangulated; non-geometry
    properties (materials, normals, colors) are ignored.
    """
    return load_mesh_ply_bytes(Path(path).read_bytes(), str(path))


def load_mesh_ply_bytes(blob: bytes, origin: str = "<memory>") -> TriMesh:
    _, data = _read_ply(blob, origin)
    if "vertex" not in data or "face" not in data:
        raise ProjectError(f"{origin}: mesh needs vertex and face elements")
    vertex = data["vertex"]
    points = np.stack([vertex["x"], vertex["y"], vertex["z"]], axis=1).astype(np.float64)
    face = data["face"]
    tris, labels = [], []
    face_labels = face.get("label")
    for i, indices in enumerate(face["__lists__"]):
        label = int(face_labels[i]) if face_labels is not None else None
        for k in range(1, len(indices) - 1):
            tris.append((indices[0], indices[k], indices[k + 1]))
            if label is not None:
                labels.append(label)
    if not tris:
        raise ProjectError(f"{origin}: mesh has no triangles")
    return TriMesh(
        points,
        np.asarray(tris, dtype=np.int32).reshape(-1, 3),
        np.asarray(labels, dtype=np.int16) if labels else None,
    )


def _read_ply(blob: bytes, origin: str):
    """Minimal PLY parser covering ascii and binary_little_endian files."""
    end = blob.find(b"end_header\n")
    if not blob.startswith(b"ply") or end < 0:
        raise ProjectError(f"{origin}: not a PLY file")
    header_lines = blob[:end].decode("ascii", errors="replace").splitlines()
    body = blob[end + len(b"end_header\n"):]

    fmt = None
    elements: list[tuple[str, int, list]] = []
    for line in header_lines[1:]:
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise ProjectError(f"{origin}: property before element")
            if parts[1] == "list":
                elements[-1][2].append(("list", parts[2], parts[3], parts[4]))
            else:
                elements[-1][2].append(("scalar", parts[1], parts[2]))
    if fmt not in ("ascii", "binary_little_endian"):
        raise ProjectError(f"{origin}: unsupported PLY format '{fmt}'")

    out: dict[str, object] = {}
    if fmt == "ascii":
        lines = [ln for ln in body.decode("ascii").splitlines() if ln.strip()]
        row = 0
        for name, count, props in elements:
            out[name] = _parse_ascii_element(lines[row: row + count], props)
            row += count
    else:
        offset = 0
        for name, count, props in elements:
            out[name], offset = _parse_binary_element(body, offset, count, props)
    return [name for name, _, _ in elements], out


def _parse_ascii_element(lines: list[str], props):
    if not any(p[0] == "list" for p in props):
        dtype = np.dtype([(p[2], _PLY_SCALARS[p[1]]) for p in props])
        arr = np.empty(len(lines), dtype=dtype)
        for i, line in enumerate(lines):
            for (kind, _, pname), value in zip(props, line.split()):
                arr[pname][i] = float(value)
        return arr
    lists, labels = [], []
    has_label = any(p[0] == "scalar" and p[2] == "label" for p in props)
    for line in lines:
        values = line.split()
        pos = 0
        row_list: list[int] = []
        for p in props:
            if p[0] == "list":
                n = int(values[pos])
                row_list = [int(v) for v in values[pos + 1: pos + 1 + n]]
                pos += 1 + n
            else:
                if p[2] == "label":
                    labels.append(int(float(values[pos])))
                pos += 1
        lists.append(row_list)
    result = {"__lists__": lists}
    if has_label:
        result["label"] = np.asarray(labels, dtype=np.int16)
    return result


def _parse_binary_element(body: bytes, offset: int, count: int, props):
    if not any(p[0] == "list" for p in props):
        dtype = np.dtype([(p[2], _PLY_SCALARS[p[1]]) for p in props])
        end = offset + count * dtype.itemsize
        if end > len(body):
            raise ProjectError("truncated PLY body")
        return np.frombuffer(body[offset:end], dtype=dtype), end
    lists, labels = [], []
    has_label = any(p[0] == "scalar" and p[2] == "label" for p in props)
    pos = offset
    for _ in range(count):
        row_list: list[int] = []
        for p in props:
            if p[0] == "list":
                count_dt = np.dtype(_PLY_SCALARS[p[1]])
                n = int(np.frombuffer(body, dtype=count_dt, count=1, offset=pos)[0])
                pos += count_dt.itemsize
                idx_dt = np.dtype(_PLY_SCALARS[p[2]])
                row_list = np.frombuffer(body, dtype=idx_dt, count=n, offset=pos).tolist()
                pos += n * idx_dt.itemsize
            else:
                dt = np.dtype(_PLY_SCALARS[p[1]])
                value = np.frombuffer(body, dtype=dt, count=1, offset=pos)[0]
                if p[2] == "label":
                    labels.append(int(value))
                pos += dt.itemsize
        lists.append(row_list)
    result = {"__lists__": lists}
    if has_label:
        result["label"] = np.asarray(labels, dtype=np.int16)
    return result, pos
