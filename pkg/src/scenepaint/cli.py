"""Command-line interface: room generation, texturing, export, serving."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from scenepaint import pngio
from scenepaint.core import CeilingStyle, ObjectInstance, Opening, RoomSpec, assemble_scene, box_mesh, generate_empty_room
from scenepaint.errors import ScenePaintError
from scenepaint.painter import MockPainter, NullScorer, RemotePainter, load_backend_config
from scenepaint.pipeline import JobConfig, ProgressEvent, texture_scene
from scenepaint.storage import (
    FileCheckpointer,
    Project,
    export_ply,
    load_project,
    load_textured_scene,
    save_mesh_ply,
    save_project,
    save_textured_scene,
)

logger = logging.getLogger(__name__)


def _parse_opening(value: str) -> Opening:
    wall, offset, width, height = value.split(",")
    return Opening(int(wall), float(offset), float(width), float(height))


def _room_from_args(args) -> RoomSpec:
    return RoomSpec(
        width=args.width,
        depth=args.depth,
        height=args.height,
        baseboard=args.baseboard,
        baseboard_height=args.baseboard_height,
        doors=tuple(_parse_opening(d) for d in args.door),
        windows=tuple(_parse_opening(w) for w in args.window),
        ceiling_style=CeilingStyle(args.ceiling),
    )


def _add_room_flags(parser) -> None:
    parser.add_argument("--width", type=float, required=True, help="room width in meters")
    parser.add_argument("--depth", type=float, required=True, help="room depth in meters")
    parser.add_argument("--height", type=float, required=True, help="room height in meters")
    parser.add_argument("--baseboard", action="store_true")
    parser.add_argument("--baseboard-height", type=float, default=0.1)
    parser.add_argument(
        "--door", action="append", default=[], metavar="WALL,OFFSET,WIDTH,HEIGHT",
        help="door placement (repeatable)",
    )
    parser.add_argument(
        "--window", action="append", default=[], metavar="WALL,OFFSET,WIDTH,HEIGHT",
        help="window placement (repeatable)",
    )
    parser.add_argument(
        "--ceiling", default="flat",
        choices=[s.value for s in CeilingStyle],
    )


def _resolve_backend(spec: str | None, project: Project):
    if spec == "mock":
        return MockPainter()
    if spec:
        base = load_backend_config()
        return RemotePainter(dataclasses.replace(base, url=spec))
    env = load_backend_config()
    if env.url:
        return RemotePainter(env)
    if project.backend.get("url"):
        from scenepaint.service.app import load_backend_config_from_dict

        return RemotePainter(load_backend_config_from_dict(project.backend))
    return MockPainter()


def cmd_generate_room(args) -> int:
    mesh = generate_empty_room(_room_from_args(args))
    save_mesh_ply(mesh, args.out)
    print(f"wrote {mesh.num_triangles} triangles to {args.out}")
    return 0


def cmd_init(args) -> int:
    room = _room_from_args(args)
    objects = []
    for spec in args.add_box:
        parts = spec.split(",")
        if len(parts) < 7:
            raise SystemExit(f"--add-box needs ID,EX,EY,EZ,TX,TY,TZ[,DESCRIPTION]: {spec}")
        object_id, ex, ey, ez, tx, ty, tz = parts[:7]
        description = parts[7] if len(parts) > 7 else ""
        objects.append(
            ObjectInstance(
                object_id=object_id,
                mesh=box_mesh((float(ex), float(ey), float(ez))),
                translation=np.array([float(tx), float(ty), float(tz)]),
                description=description,
            )
        )
    scene = assemble_scene(room, objects, style_prompt=args.style, negative_prompt=args.negative)
    config = JobConfig(
        seed=args.seed,
        pano_width=args.pano_width,
        persp_resolution=args.resolution,
        candidates=args.candidates,
    )
    project = Project(root=Path(args.project), scene=scene, job_config=config)
    path = save_project(project)
    print(f"initialized project at {path}")
    return 0


def cmd_texture(args) -> int:
    project = load_project(args.project)
    if args.seed is not None:
        project.job_config = dataclasses.replace(project.job_config, seed=args.seed)
        save_project(project)
    backend = _resolve_backend(args.backend, project)

    def emit(event: ProgressEvent) -> None:
        if event.stage == "audit":
            return
        location = event.object_id or "scene"
        print(f"[{event.percent:5.1f}%] {event.stage:8s} {location} {event.message}")

    checkpointer = FileCheckpointer(project.state_dir / "checkpoint")
    ts = texture_scene(
        project.scene, backend, NullScorer(), project.job_config,
        emit=emit, checkpointer=checkpointer, resume=args.resume,
    )
    save_textured_scene(ts, project.state_dir / "textured")
    save_project(project)
    print(f"textured scene: {ts.total_points()} points across {len(ts.clouds)} owners")
    return 0


def cmd_export(args) -> int:
    project = load_project(args.project)
    ts = load_textured_scene(project.state_dir / "textured", project.scene)
    if ts is None:
        print("project has no textured state; run `scenepaint texture` first", file=sys.stderr)
        return 1
    if args.ply:
        export_ply(ts.full_cloud(), args.ply)
        print(f"wrote {ts.total_points()} points to {args.ply}")
    if args.panorama:
        Path(args.panorama).write_bytes(pngio.encode_rgb(ts.coarse.pano_image.pixels))
        print(f"wrote panorama to {args.panorama}")
    if not args.ply and not args.panorama:
        print("nothing to export (use --ply and/or --panorama)", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from scenepaint.service import create_app

    project = load_project(args.project)
    backend = _resolve_backend(args.backend, project)
    app = create_app(project, backend=backend)
    host, _, port = args.bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenepaint",
        description="Texture compositional indoor scenes via iterative inpainting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate-room", help="generate an empty labeled room mesh")
    _add_room_flags(gen)
    gen.add_argument("--out", required=True, help="output mesh (.ply)")
    gen.set_defaults(fn=cmd_generate_room)

    init = sub.add_parser("init", help="create a project directory")
    _add_room_flags(init)
    init.add_argument("--project", required=True)
    init.add_argument(
        "--add-box", action="append", default=[],
        metavar="ID,EX,EY,EZ,TX,TY,TZ[,DESC]", help="add a box object (repeatable)",
    )
    init.add_argument("--style", default="", help="global style prompt")
    init.add_argument("--negative", default="", help="negative prompt")
    init.add_argument("--seed", type=int, default=0)
    init.add_argument("--pano-width", type=int, default=2048)
    init.add_argument("--resolution", type=int, default=1024)
    init.add_argument("--candidates", type=int, default=5)
    init.set_defaults(fn=cmd_init)

    tex = sub.add_parser("texture", help="run the texturing pipeline on a project")
    tex.add_argument("--project", required=True)
    tex.add_argument("--backend", default=None, help="'mock' or a painter service URL")
    tex.add_argument("--seed", type=int, default=None)
    tex.add_argument("--resume", action="store_true", help="continue from the last checkpoint")
    tex.set_defaults(fn=cmd_texture)

    exp = sub.add_parser("export", help="export the textured result")
    exp.add_argument("--project", required=True)
    exp.add_argument("--ply", default=None, help="write the scene point cloud")
    exp.add_argument("--panorama", default=None, help="write the reference panorama PNG")
    exp.set_defaults(fn=cmd_export)

    srv = sub.add_parser("serve", help="serve the HTTP API for a project")
    srv.add_argument("--project", required=True)
    srv.add_argument("--bind", default="127.0.0.1:8000")
    srv.add_argument("--backend", default=None, help="'mock' or a painter service URL")
    srv.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenePaintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
