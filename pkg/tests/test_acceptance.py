"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with: pytest tests/test_acceptance.py -v -s
Everything runs against the deterministic mock painter and the null scorer.
"""

import time

import numpy as np
import pytest
from scipy.spatial import cKDTree

from helpers import (
    dilate_oracle,
    erode_oracle,
    nearest_fill_oracle,
    poisson_thin,
    sample_mesh_surface,
    visible_samples,
)
from scenepaint.core import (
    ObjectInstance,
    RoomSpec,
    assemble_scene,
    box_mesh,
    generate_empty_room,
)
from scenepaint.hashing import derive_seed
from scenepaint.imaging import (
    EdgeParams,
    canny_edges,
    interp_inpaint,
    laplacian_edges,
    misalignment_mask,
    morphology,
    nearest_color_fill,
)
from scenepaint.painter import MockPainter, NullScorer
from scenepaint.pipeline import (
    EditCommand,
    JobConfig,
    MemoryCheckpointer,
    apply_object_edit,
    apply_region_edit,
    select_candidate,
    texture_scene,
)
from scenepaint.planning import plan_views, refinement_views
from scenepaint.projection import (
    BitMask,
    DepthMap,
    PanoCamera,
    PerspCamera,
    RgbImage,
    TriangleSoup,
    cast_rays,
    render_pano_depth,
    render_persp_depth,
    splat,
    unproject,
)
from scenepaint.storage import (
    Project,
    export_ply,
    import_ply,
    load_project,
    save_project,
)


def report(name: str) -> None:
    print(f"\n[ACCEPTANCE] {name}: PASS")


def acceptance_scene():
    """4x4x3 room with two mid-height boxes (all planned rings stay inside)."""
    room = RoomSpec(4, 4, 3)
    alpha = ObjectInstance(
        "alpha", box_mesh((0.8, 0.8, 0.8)), translation=np.array([1.0, 0.6, 1.5]),
        description="a storage box",
    )
    bravo = ObjectInstance(
        "bravo", box_mesh((0.6, 1.0, 0.6)), translation=np.array([-0.9, -0.5, 1.4]),
        description="a low cabinet",
    )
    return assemble_scene(room, [alpha, bravo], style_prompt="plain style")


def clouds_equal(a, b):
    return (
        np.array_equal(a.points, b.points)
        and np.array_equal(a.colors, b.colors)
        and np.array_equal(a.view_ids, b.view_ids)
        and np.array_equal(a.owners, b.owners)
    )


def test_geometry_oracle_suite():
    """Pano/persp depth equals brute-force ray casting bit-for-bit, < 60 s."""
    started = time.monotonic()
    rng = np.random.default_rng(2024)
    for scene_idx in range(5):
        spec = RoomSpec(
            float(rng.uniform(3.5, 6.0)), float(rng.uniform(3.5, 6.0)),
            float(rng.uniform(2.5, 3.5)),
        )
        meshes = [("room", generate_empty_room(spec))]
        for i in range(rng.integers(6, 14)):
            size = rng.uniform(0.2, 0.9, size=3)
            pos = np.array([
                rng.uniform(-spec.width / 2 + 1, spec.width / 2 - 1),
                rng.uniform(-spec.depth / 2 + 1, spec.depth / 2 - 1),
                rng.uniform(0.6, spec.height - 0.6),
            ])
            meshes.append((f"box{i}", box_mesh(size, center=pos)))
        soup = TriangleSoup.from_meshes(meshes)
        assert soup.num_triangles <= 10_000

        pano = PanoCamera(center=spec.center(), width=1024, height=512)
        dirs = pano.grid_dirs()
        origins = np.broadcast_to(pano.center, dirs.shape)
        t_fast, tri_fast = cast_rays(soup, origins, dirs, use_bvh=True)
        t_slow, tri_slow = cast_rays(soup, origins, dirs, use_bvh=False)
        assert np.array_equal(t_fast, t_slow)
        assert np.array_equal(tri_fast, tri_slow)

        persp = PerspCamera(
            position=spec.center() + rng.uniform(-0.5, 0.5, 3),
            target=rng.uniform(-1, 1, 3) + [0, 0, 1],
            focal=float(rng.uniform(250, 600)),
            resolution=512,
        )
        dirs = persp.grid_dirs()
        origins = np.broadcast_to(persp.position, dirs.shape)
        t_fast, tri_fast = cast_rays(soup, origins, dirs, use_bvh=True)
        t_slow, tri_slow = cast_rays(soup, origins, dirs, use_bvh=False)
        assert np.array_equal(t_fast, t_slow)
        assert np.array_equal(tri_fast, tri_slow)
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"geometry oracle suite took {elapsed:.1f}s"
    report(f"geometry oracle suite ({elapsed:.1f}s, 5 scenes)")


def test_round_trips(tmp_path):
    """Equirect < 1e-6 rad; unproject->splat bit-exact; PLY field-equal;
    project save/load byte-stable."""
    # Equirectangular direction <-> pixel round trip.
    cam = PanoCamera(center=(0.3, -0.2, 1.2), width=256, height=128, yaw=0.7)
    rows, cols = np.divmod(np.arange(cam.height * cam.width), cam.width)
    dirs = cam.pixel_dirs(cols, rows)
    u, v = cam.dirs_to_pixels(dirs)
    assert (np.abs(u - cols) * (2 * np.pi / cam.width)).max() < 1e-6
    assert (np.abs(v - rows) * (np.pi / cam.height)).max() < 1e-6

    # unproject -> splat identity, bit-exact on the mask.
    spec = RoomSpec(4, 4, 3)
    soup = TriangleSoup.from_meshes(
        [("room", generate_empty_room(spec)), ("box", box_mesh((1, 1, 1), center=(1, 0, 1.5)))]
    )
    view = PerspCamera(position=(-1, 0.2, 1.4), target=(1, 0, 1.5), focal=120, resolution=129)
    render = render_persp_depth(soup, view)
    rng = np.random.default_rng(7)
    img = RgbImage(rng.integers(0, 256, size=(129, 129, 3), dtype=np.uint8), camera=view)
    mask = BitMask(render.depth.finite_mask(), camera=view)
    cloud = unproject(img, mask, render.depth, view)
    back = splat(cloud, view, splat_radius=0)
    assert np.array_equal(back.known.values, mask.values)
    assert np.array_equal(back.image.pixels[mask.values], img.pixels[mask.values])

    # PLY export -> import field equality.
    path = tmp_path / "cloud.ply"
    export_ply(cloud, path)
    loaded = import_ply(path)
    assert np.array_equal(loaded.points, cloud.points.astype(np.float32).astype(np.float64))
    assert np.array_equal(loaded.colors, cloud.colors)
    assert np.array_equal(loaded.owners, cloud.owners)

    # Project save -> load -> save byte stability.
    project = Project(
        root=tmp_path / "proj",
        scene=acceptance_scene(),
        job_config=JobConfig(seed=42, pano_width=256, persp_resolution=384),
    )
    first = save_project(project).read_bytes()
    again = save_project(load_project(project.root)).read_bytes()
    assert first == again
    report("round trips (equirect, splat identity, PLY, project)")


def test_morphology_and_misalignment():
    """Dilate/erode/closing vs set oracle on 200 random 64^2 masks; the
    misalignment mask matches the oracle composition exactly."""
    rng = np.random.default_rng(11)
    for case in range(200):
        mask = rng.random((64, 64)) < rng.uniform(0.05, 0.5)
        radius = int(rng.integers(1, 6))
        got_d = morphology(BitMask(mask), "dilate", radius).values
        got_e = morphology(BitMask(mask), "erode", radius).values
        assert np.array_equal(got_d, dilate_oracle(mask, radius))
        assert np.array_equal(got_e, erode_oracle(mask, radius))
        closing = morphology(morphology(BitMask(mask), "dilate", radius), "erode", radius)
        assert not (mask & ~closing.values).any()  # closing is extensive

    column = 24
    img = np.zeros((48, 48, 3), dtype=np.uint8)
    img[:, column:] = 220
    depth = np.full((48, 48), 1.0)
    depth[:, column:] = 2.0
    params = EdgeParams(dilate_radius=5, erode_radius=2)
    image, dmap = RgbImage(img), DepthMap(depth)
    got = misalignment_mask(image, dmap, params)
    color_edges = canny_edges(image, params).values
    depth_edges = laplacian_edges(dmap, params).values
    confirmed = color_edges & dilate_oracle(depth_edges, 5)
    expected = erode_oracle(dilate_oracle(confirmed | depth_edges, 5), 2)
    assert got.count() > 0
    assert np.array_equal(got.values, expected)
    report("morphology + misalignment vs set oracle (200 masks)")


def test_inpainting_primitives():
    """Telea constant exact / ramp <= 2; nearest fill == brute force x10."""
    flat = RgbImage.filled((24, 24), (83, 83, 83))
    hole = np.zeros((24, 24), dtype=bool)
    hole[10:14, 9:15] = True
    out = interp_inpaint(flat, BitMask(hole))
    assert np.array_equal(out.pixels, flat.pixels)

    ramp_values = np.tile((np.arange(64) * 4).astype(np.uint8), (32, 1))
    ramp = RgbImage(np.repeat(ramp_values[..., None], 3, axis=2))
    strip = np.zeros((32, 64), dtype=bool)
    strip[:, 30:33] = True
    filled = interp_inpaint(ramp, BitMask(strip))
    err = np.abs(filled.pixels.astype(int) - ramp.pixels.astype(int))[strip]
    assert err.max() <= 2, f"ramp error {err.max()}"

    rng = np.random.default_rng(3)
    for case in range(10):
        img = rng.integers(0, 256, size=(20, 20, 3), dtype=np.uint8)
        unknown = rng.random((20, 20)) < rng.uniform(0.3, 0.9)
        unknown[tuple(rng.integers(0, 20, size=2))] = False
        got = nearest_color_fill(RgbImage(img), BitMask(unknown))
        assert np.array_equal(got.pixels, nearest_fill_oracle(img, unknown))
    report("inpainting primitives (Telea exact/<=2, nearest fill x10)")


def test_view_planner_constants():
    """Counts, angles, radii and boundary filtering from the planner rules."""
    room = RoomSpec(10, 10, 5)
    cube = ObjectInstance("cube", box_mesh(), translation=np.array([0, 0, 2.5]))
    plan = plan_views(cube, room, rng_seed=1)
    assert len(plan.views) == 16
    center, diag = cube.aabb_center(), np.sqrt(3.0)
    polars = set()
    for cam, role in zip(plan.views, plan.roles):
        rel = cam.position - center
        radius = np.linalg.norm(rel)
        if role == "basic":
            assert radius == pytest.approx(1.1 * diag, abs=1e-12)
            polars.add(round(float(np.arccos(rel[2] / radius)), 9))
        else:
            assert radius == pytest.approx(0.7 * diag, abs=1e-12)
            elevation = abs(np.arcsin(rel[2] / radius))
            assert np.pi / 6 - 1e-12 <= elevation <= np.pi / 3 + 1e-12
    assert polars == {round(np.pi / 4, 9), round(3 * np.pi / 4, 9)}

    sofa = ObjectInstance("sofa", box_mesh((3, 1, 1)), translation=np.array([0, 0, 4.0]))
    tall_room = RoomSpec(12, 12, 8)
    sofa_plan = plan_views(sofa, tall_room, rng_seed=2)
    assert sofa_plan.candidate_count == 24
    for role, offset in (("additional-group-0", -1.0), ("additional-group-1", 1.0)):
        group_center = sofa.aabb_center() + np.array([offset, 0, 0])
        members = [c for c, r in zip(sofa_plan.views, sofa_plan.roles) if r == role]
        assert len(members) == 8
        for cam in members:
            assert np.linalg.norm(cam.position - group_center) == pytest.approx(
                0.7 * np.linalg.norm([3, 1, 1]), abs=1e-12
            )

    snug = RoomSpec(5, 5, 3)
    wardrobe = ObjectInstance(
        "w", box_mesh((1.0, 0.6, 2.0)), translation=np.array([0.0, -2.1, 1.0])
    )
    wall_plan = plan_views(wardrobe, snug, rng_seed=3)
    assert len(wall_plan.views) > 0
    for cam in wall_plan.views:
        assert snug.contains(cam.position)[0]
    report("view planner constants (16 views, 24 candidates, wall filter)")


def test_end_to_end_mock_run():
    """Full texture_scene: < 5 min, bit-identical reruns and resume, >= 95%
    coverage at 1 cm, partition sums, zero misalignment-mask points."""
    scene = acceptance_scene()
    config = JobConfig(
        seed=42, pano_width=256, persp_resolution=384, candidates=3, debug_events=True
    )

    partitions_ok = []

    def on_event(event):
        if event.stage == "audit":
            overlap = event.extra["misalignment"] & event.extra["unprojected"]
            assert not overlap.any(), "points created inside a misalignment mask"

    class Counting:
        name = "mock"

        def __init__(self):
            self.calls, self.inner = 0, MockPainter()

        def paint(self, request):
            self.calls += 1
            return self.inner.paint(request)

    counter = Counting()
    started = time.monotonic()
    first = texture_scene(scene, counter, NullScorer(), config, emit=on_event)
    elapsed = time.monotonic() - started
    assert elapsed < 300.0, f"end-to-end run took {elapsed:.0f}s"

    # Ownership partition sums hold at every logged step.
    for owner, cloud in first.clouds.items():
        idx = first.owner_registry.index(owner)
        assert (cloud.owners == idx).all()
    assert first.total_points() == sum(len(c) for c in first.clouds.values())
    running = {}
    for entry in first.job_log:
        if entry.get("step") == "novel":
            running.setdefault(entry["owner"], []).append(entry["cloud_total"])
        assert entry.get("misalignment_overlap", 0) == 0
    for owner, totals in running.items():
        assert totals == sorted(totals)
        assert totals[-1] == len(first.clouds[owner])

    # Bit-identical rerun.
    second = texture_scene(scene, MockPainter(), NullScorer(), config)
    for owner in first.clouds:
        assert clouds_equal(first.clouds[owner], second.clouds[owner])

    # Bit-identical checkpoint resume.
    class Failing:
        name = "failing"

        def __init__(self, after):
            self.calls, self.after, self.inner = 0, after, MockPainter()

        def paint(self, request):
            self.calls += 1
            if self.calls > self.after:
                raise RuntimeError("injected failure")
            return self.inner.paint(request)

    checkpointer = MemoryCheckpointer()
    with pytest.raises(RuntimeError):
        texture_scene(
            scene, Failing(int(counter.calls * 0.55)), NullScorer(), config,
            checkpointer=checkpointer,
        )
    resumed = texture_scene(
        scene, MockPainter(), NullScorer(), config,
        checkpointer=checkpointer, resume=True,
    )
    for owner in first.clouds:
        assert clouds_equal(first.clouds[owner], resumed.clouds[owner])

    # Surface coverage: >= 95% of camera-reachable samples within 1 cm.
    soup = TriangleSoup.from_meshes(scene.all_meshes())
    rng = np.random.default_rng(99)
    for obj in scene.objects:
        plan = plan_views(
            obj, scene.room, derive_seed(config.seed, obj.object_id, "plan"),
            resolution=config.persp_resolution,
        )
        mesh = obj.world_mesh()
        raw = sample_mesh_surface(mesh, 60_000, rng)
        area = mesh.triangle_areas().sum()
        samples = poisson_thin(raw, radius=float(np.sqrt(area / 10_000)) * 0.6, limit=10_000)
        vis = visible_samples(samples, plan.all_cameras(), soup)
        assert vis.sum() > 1000
        merged = first.full_cloud()
        tree = cKDTree(merged.points)
        d, _ = tree.query(samples[vis])
        coverage = float((d <= 0.01).mean())
        assert coverage >= 0.95, f"{obj.object_id} coverage {coverage:.3f}"

    report(
        f"end-to-end mock run ({elapsed:.0f}s, {first.total_points()} points, "
        "identical rerun + resume, coverage >= 95%)"
    )


def test_candidate_selection():
    """Null scorer: argmax SSIM (initial) / band PSNR (iterative), incl. the
    closed-form 24.05 dB case."""
    rng = np.random.default_rng(5)
    ref = RgbImage(rng.integers(0, 256, size=(48, 48, 3), dtype=np.uint8))
    noise = RgbImage(rng.integers(0, 256, size=(48, 48, 3), dtype=np.uint8))
    idx, _ = select_candidate([noise, ref, noise], ref, None, "p", NullScorer(), "initial")
    assert idx == 1

    band = np.zeros((48, 48), dtype=bool)
    band[20:28, :] = True
    clean = RgbImage.filled((48, 48), (100, 100, 100))
    offset_px = np.full((48, 48, 3), 100, dtype=np.uint8)
    offset_px[band] = 116
    idx, scores = select_candidate(
        [RgbImage(offset_px), clean], clean, BitMask(band), "p", NullScorer(), "iterative"
    )
    assert idx == 1
    expected_db = 20 * np.log10(255 / 16)
    assert expected_db == pytest.approx(24.0484, abs=1e-4)
    assert scores[0] * 50.0 == pytest.approx(expected_db, abs=1e-9)
    assert scores[1] * 50.0 == pytest.approx(99.0)
    report("candidate selection (SSIM initial, band PSNR iterative, 24.05 dB)")


def test_edit_semantics():
    """translate o inverse to 1e-9; remove decrements exactly; region repaint
    satisfies |P'| = |P| - |P_orig| + |mask & finite|."""
    scene = acceptance_scene()
    config = JobConfig(seed=42, pano_width=128, persp_resolution=96, candidates=2)
    ts = texture_scene(scene, MockPainter(), NullScorer(), config)

    delta = np.array([0.25, -0.15, 0.05])
    fwd = apply_object_edit(ts, EditCommand(kind="translate", target_id="alpha", translation=delta))
    back = apply_object_edit(fwd, EditCommand(kind="translate", target_id="alpha", translation=-delta))
    drift = np.abs(back.clouds["alpha"].points - ts.clouds["alpha"].points).max()
    assert drift < 1e-9

    owned = len(ts.clouds["bravo"])
    removed = apply_object_edit(ts, EditCommand(kind="remove", target_id="bravo"))
    assert removed.total_points() == ts.total_points() - owned

    overhead, _ = refinement_views(scene.room, resolution=config.persp_resolution)
    soup = TriangleSoup.from_meshes(scene.all_meshes())
    render = render_persp_depth(soup, overhead)
    from scenepaint.core.mesh import Surface

    mask = render.label_mask(Surface.FLOOR)
    cmd = EditCommand(
        kind="repaint-region", camera=overhead, mask=mask, prompt="marble tiles", seed=4
    )
    # Independent |P_orig|: points whose rounded projection lands in the mask.
    full = ts.full_cloud()
    u, v, _, ok = overhead.project(full.points)
    px, py = np.rint(u).astype(int), np.rint(v).astype(int)
    res = overhead.resolution
    inside = ok & (px >= 0) & (px < res) & (py >= 0) & (py < res)
    landed = np.zeros(len(full), dtype=bool)
    landed[inside] = mask.values[py[inside], px[inside]]
    paintable = int((mask.values & render.depth.finite_mask()).sum())

    edited = apply_region_edit(ts, cmd, MockPainter(), NullScorer())
    assert edited.total_points() == ts.total_points() - int(landed.sum()) + paintable
    report("edit semantics (translate inverse, remove counts, repaint accounting)")
