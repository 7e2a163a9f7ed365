import numpy as np
import pytest
from scipy.spatial import cKDTree

from helpers import poisson_thin, sample_mesh_surface, visible_samples
from scenepaint.core import ObjectInstance, RoomSpec, assemble_scene, box_mesh
from scenepaint.errors import PlacementError, ValidationError
from scenepaint.hashing import derive_seed
from scenepaint.painter import MockPainter, NullScorer
from scenepaint.pipeline import (
    EditCommand,
    JobConfig,
    MemoryCheckpointer,
    apply_object_edit,
    apply_region_edit,
    coarse_stage,
    select_candidate,
    texture_object,
    texture_scene,
)
from scenepaint.pipeline.objects import TexturingContext
from scenepaint.planning import ViewPlan, plan_views, refinement_views
from scenepaint.projection import (
    BitMask,
    ColoredPointCloud,
    PerspCamera,
    RgbImage,
    TriangleSoup,
    cast_rays,
    merge_cloud,
    render_persp_depth,
    splat,
    unproject,
)


def small_config(seed=42, **kw):
    defaults = dict(seed=seed, pano_width=128, persp_resolution=96, candidates=3)
    defaults.update(kw)
    return JobConfig(**defaults)


def two_box_scene():
    room = RoomSpec(4, 4, 3)
    alpha = ObjectInstance(
        "alpha", box_mesh((0.8, 0.8, 0.8)), translation=np.array([1.0, 0.3, 0.4]),
        description="a storage box",
    )
    bravo = ObjectInstance(
        "bravo", box_mesh((0.6, 1.0, 0.6)), translation=np.array([-1.0, -0.8, 0.3]),
        description="a low bench",
    )
    return assemble_scene(room, [alpha, bravo], style_prompt="plain style")


def clouds_equal(a, b):
    return (
        np.array_equal(a.points, b.points)
        and np.array_equal(a.colors, b.colors)
        and np.array_equal(a.view_ids, b.view_ids)
        and np.array_equal(a.owners, b.owners)
    )


class CountingBackend:
    def __init__(self):
        self.inner = MockPainter()
        self.name = "counting"
        self.calls = 0

    def paint(self, request):
        self.calls += 1
        return self.inner.paint(request)


class FailingBackend:
    """Delegates to the mock until `fail_after` calls, then raises."""

    def __init__(self, fail_after):
        self.inner = MockPainter()
        self.name = "failing"
        self.fail_after = fail_after
        self.calls = 0

    def paint(self, request):
        self.calls += 1
        if self.calls > self.fail_after:
            raise RuntimeError("backend down")
        return self.inner.paint(request)


class TestCoarseStage:
    def test_empty_scene_room_image_is_pano(self):
        scene = assemble_scene(RoomSpec(4, 4, 3), style_prompt="s")
        coarse, log = coarse_stage(scene, MockPainter(), NullScorer(), small_config())
        assert coarse.occlusion_mask.count() == 0
        assert coarse.room_image is coarse.pano_image
        pano_pixels = int(coarse.room_depth.finite_mask().sum())
        patch_pixels = sum(
            int((p.mask.values & True).sum()) for p in coarse.patches
        )
        assert len(coarse.room_cloud) == pano_pixels + patch_pixels

    def test_occlusion_mask_matches_owner_oracle(self, cube_scene):
        config = small_config()
        coarse, _ = coarse_stage(cube_scene, MockPainter(), NullScorer(), config)
        soup = TriangleSoup.from_meshes(cube_scene.all_meshes())
        cam = coarse.pano_camera
        dirs = cam.grid_dirs()
        origins = np.broadcast_to(cam.center, dirs.shape)
        _, tri = cast_rays(soup, origins, dirs, use_bvh=False)
        hit_owner = np.where(tri >= 0, soup.owner_index[np.maximum(tri, 0)], -1)
        oracle = (hit_owner.reshape(cam.shape) != 0) & (tri.reshape(cam.shape) >= 0)
        assert np.array_equal(coarse.occlusion_mask.values, oracle)
        assert coarse.occlusion_mask.count() > 0

    def test_deterministic(self, cube_scene):
        a, _ = coarse_stage(cube_scene, MockPainter(), NullScorer(), small_config())
        b, _ = coarse_stage(cube_scene, MockPainter(), NullScorer(), small_config())
        assert np.array_equal(a.pano_image.pixels, b.pano_image.pixels)
        assert np.array_equal(a.room_image.pixels, b.room_image.pixels)
        assert clouds_equal(a.room_cloud, b.room_cloud)


class TestSelectCandidate:
    def test_single_candidate(self):
        img = RgbImage.filled((16, 16), (5, 5, 5))
        idx, scores = select_candidate([img], img, None, "p", NullScorer(), "initial")
        assert idx == 0 and len(scores) == 1

    def test_reference_beats_noise(self):
        rng = np.random.default_rng(0)
        ref = RgbImage(rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8))
        noise = RgbImage(rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8))
        idx, _ = select_candidate([noise, ref], ref, None, "p", NullScorer(), "initial")
        assert idx == 1

    def test_iterative_band_psnr_closed_form(self):
        ref = RgbImage.filled((32, 32), (100, 100, 100))
        band = np.zeros((32, 32), dtype=bool)
        band[10:16, :] = True
        on_band = RgbImage.filled((32, 32), (100, 100, 100))
        off_px = np.full((32, 32, 3), 100, dtype=np.uint8)
        off_px[band] = 116
        off_band = RgbImage(off_px)
        idx, scores = select_candidate(
            [off_band, on_band], ref, BitMask(band), "p", NullScorer(), "iterative"
        )
        assert idx == 1
        assert scores[0] == pytest.approx(20 * np.log10(255 / 16) / 50.0, abs=1e-9)
        assert scores[1] == pytest.approx(99.0 / 50.0)

    def test_tie_takes_lowest_index(self):
        img = RgbImage.filled((8, 8), (1, 1, 1))
        idx, _ = select_candidate([img, img, img], img, None, "p", NullScorer(), "initial")
        assert idx == 0

    def test_constant_clip_preserves_argmax(self):
        class ConstantScorer:
            def score(self, img, prompt):
                return 0.77

        rng = np.random.default_rng(1)
        ref = RgbImage(rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8))
        cands = [
            RgbImage(rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)),
            ref,
            RgbImage(rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)),
        ]
        a, _ = select_candidate(cands, ref, None, "p", NullScorer(), "initial")
        b, _ = select_candidate(cands, ref, None, "p", ConstantScorer(), "initial")
        assert a == b


class TestTextureObject:
    def build_ctx(self, scene, config):
        coarse, log = coarse_stage(scene, MockPainter(), NullScorer(), config)
        ctx = TexturingContext.create(
            scene, coarse, MockPainter(), NullScorer(), config
        )
        return ctx, log

    def test_surface_coverage_with_mock(self):
        # Elevated box: every planned ring stays inside the room, so the plan
        # can reach all faces (floor-hugging objects legitimately lose their
        # under-side rings and with them full coverage).
        room = RoomSpec(4, 4, 3)
        box = ObjectInstance(
            "box", box_mesh((0.8, 0.8, 0.8)), translation=np.array([1.0, 0.3, 1.5]),
            description="a wall cabinet",
        )
        scene = assemble_scene(room, [box], style_prompt="test style")
        config = small_config(persp_resolution=384, pano_width=256)
        ctx, log = self.build_ctx(scene, config)
        obj = scene.objects[0]
        plan = plan_views(
            obj, scene.room, derive_seed(config.seed, obj.object_id, "plan"),
            resolution=config.persp_resolution,
        )
        cloud = texture_object(ctx, obj, plan, owner_index=1, log=log)
        assert len(cloud) > 0

        rng = np.random.default_rng(123)
        raw = sample_mesh_surface(obj.world_mesh(), 60_000, rng)
        area = obj.world_mesh().triangle_areas().sum()
        samples = poisson_thin(raw, radius=np.sqrt(area / 10_000) * 0.6, limit=10_000)
        vis = visible_samples(samples, plan.all_cameras(), ctx.soup)
        assert vis.sum() > 1000

        merged = merge_cloud(ctx.coarse.room_cloud, cloud)
        tree = cKDTree(merged.points)
        d, _ = tree.query(samples[vis])
        coverage = (d <= 0.01).mean()
        assert coverage >= 0.95, f"coverage {coverage:.3f}"

    def test_resplat_reproduces_accepted_views(self, cube_scene):
        config = small_config(splat_radius=0, debug_events=True)
        events = []
        coarse, log = coarse_stage(cube_scene, MockPainter(), NullScorer(), config)
        ctx = TexturingContext.create(
            cube_scene, coarse, MockPainter(), NullScorer(), config, emit=events.append
        )
        obj = cube_scene.objects[0]
        plan = plan_views(
            obj, cube_scene.room, derive_seed(config.seed, obj.object_id, "plan"),
            resolution=config.persp_resolution,
        )
        snapshots = []
        texture_object(
            ctx, obj, plan, owner_index=1, log=log,
            view_done=lambda nxt, cloud: snapshots.append((nxt, cloud)),
        )
        audits = [e for e in events if e.stage == "audit" and e.view_index and e.view_index > 0]
        assert audits
        for event in audits:
            view_idx = event.view_index
            cloud = next(c for nxt, c in snapshots if nxt == view_idx + 1)
            cam = event.extra["camera"]
            accepted = event.extra["accepted"]
            obj_mask = event.extra["object_mask"]
            mis = event.extra["misalignment"]
            check = obj_mask & ~mis
            result = splat(merge_cloud(coarse.room_cloud, cloud), cam, 0)
            assert check.any()
            assert np.array_equal(result.image.pixels[check], accepted[check])

    def test_fully_known_view_skips_backend(self, cube_scene):
        config = small_config()
        coarse, log = coarse_stage(cube_scene, MockPainter(), NullScorer(), config)
        backend = CountingBackend()
        ctx = TexturingContext.create(
            cube_scene, coarse, backend, NullScorer(), config
        )
        obj = cube_scene.objects[0]
        cam = PerspCamera(
            position=(-0.5, 0, 1.2), target=obj.aabb_center(),
            focal=60, resolution=config.persp_resolution,
        )
        render = render_persp_depth(ctx.soup, cam)
        rng = np.random.default_rng(5)
        img = RgbImage(
            rng.integers(0, 256, size=(*cam.shape, 3), dtype=np.uint8), camera=cam
        )
        full = unproject(
            img, BitMask(render.depth.finite_mask(), camera=cam), render.depth, cam,
            view_id=0, owner=1,
        )
        plan = ViewPlan(initial=None, views=(cam,), roles=("basic",), seed=0)
        before = backend.calls
        cloud = texture_object(
            ctx, obj, plan, owner_index=1, log=log, start_view=1, cloud=full
        )
        assert backend.calls == before  # nothing unknown, no paint call
        assert len(cloud) == len(full)

    def test_audit_no_points_from_misalignment(self, cube_scene):
        config = small_config(debug_events=True)
        events = []
        coarse, log = coarse_stage(cube_scene, MockPainter(), NullScorer(), config)
        ctx = TexturingContext.create(
            cube_scene, coarse, MockPainter(), NullScorer(), config, emit=events.append
        )
        obj = cube_scene.objects[0]
        plan = plan_views(
            obj, cube_scene.room, derive_seed(config.seed, obj.object_id, "plan"),
            resolution=config.persp_resolution,
        )
        texture_object(ctx, obj, plan, owner_index=1, log=log)
        audits = [e for e in events if e.stage == "audit"]
        assert audits
        for event in audits:
            overlap = event.extra["misalignment"] & event.extra["unprojected"]
            assert not overlap.any()
        assert all(entry.get("misalignment_overlap", 0) == 0 for entry in log)


class TestTextureScene:
    def test_two_box_partition_and_determinism(self):
        scene = two_box_scene()
        config = small_config()
        ts1 = texture_scene(scene, MockPainter(), NullScorer(), config)
        assert set(ts1.clouds) == {"room", "alpha", "bravo"}
        assert ts1.total_points() == sum(len(c) for c in ts1.clouds.values())
        assert all(len(c) > 0 for c in ts1.clouds.values())

        ts2 = texture_scene(scene, MockPainter(), NullScorer(), config)
        for owner in ts1.clouds:
            assert clouds_equal(ts1.clouds[owner], ts2.clouds[owner])

    def test_monotone_cloud_growth(self):
        scene = two_box_scene()
        ts = texture_scene(scene, MockPainter(), NullScorer(), small_config())
        for owner in ("alpha", "bravo"):
            totals = [
                e["cloud_total"] for e in ts.job_log
                if e.get("step") == "novel" and e.get("owner") == owner
            ]
            assert totals == sorted(totals)

    def test_checkpoint_resume_bit_identical(self):
        scene = two_box_scene()
        config = small_config()
        reference = texture_scene(scene, MockPainter(), NullScorer(), config)

        checkpointer = MemoryCheckpointer()
        # Interrupt partway through the second object.
        total_calls = CountingBackend()
        texture_scene(scene, total_calls, NullScorer(), config)
        fail_at = int(total_calls.calls * 0.6)
        failing = FailingBackend(fail_at)
        with pytest.raises(RuntimeError):
            texture_scene(
                scene, failing, NullScorer(), config, checkpointer=checkpointer
            )
        assert checkpointer.state is not None

        resumed = texture_scene(
            scene, MockPainter(), NullScorer(), config,
            checkpointer=checkpointer, resume=True,
        )
        for owner in reference.clouds:
            assert clouds_equal(reference.clouds[owner], resumed.clouds[owner])

    def test_empty_scene_accounting(self):
        scene = assemble_scene(RoomSpec(4, 4, 3), style_prompt="s")
        ts = texture_scene(scene, MockPainter(), NullScorer(), small_config())
        assert set(ts.clouds) == {"room"}
        pano_pixels = int(ts.coarse.room_depth.finite_mask().sum())
        patch_pixels = sum(p.mask.count() for p in ts.coarse.patches)
        assert len(ts.clouds["room"]) == pano_pixels + patch_pixels

    def test_percent_monotone(self):
        scene = two_box_scene()
        events = []
        texture_scene(scene, MockPainter(), NullScorer(), small_config(), emit=events.append)
        percents = [e.percent for e in events if e.stage != "audit"]
        assert percents == sorted(percents)
        assert percents[-1] == 100.0


class TestRegionEdit:
    def make_ts(self):
        scene = assemble_scene(RoomSpec(4, 4, 3), style_prompt="s")
        return texture_scene(scene, MockPainter(), NullScorer(), small_config())

    def floor_cmd(self, ts, seed=0):
        overhead, _ = refinement_views(ts.scene.room, resolution=ts.config.persp_resolution)
        soup = TriangleSoup.from_meshes(ts.scene.all_meshes())
        render = render_persp_depth(soup, overhead)
        from scenepaint.core.mesh import Surface

        mask = render.label_mask(Surface.FLOOR)
        return EditCommand(
            kind="repaint-region", camera=overhead, mask=mask,
            prompt="marble tiles", seed=seed,
        )

    def test_empty_mask_is_noop(self):
        ts = self.make_ts()
        cam = PerspCamera(position=(0, 0, 1.5), target=(1, 0, 1), resolution=96)
        cmd = EditCommand(
            kind="repaint-region", camera=cam, mask=BitMask.full((96, 96)), prompt="x"
        )
        assert apply_region_edit(ts, cmd, MockPainter(), NullScorer()) is ts

    def test_floor_repaint_accounting(self):
        ts = self.make_ts()
        cmd = self.floor_cmd(ts)
        before = ts.total_points()
        out = apply_region_edit(ts, cmd, MockPainter(), NullScorer())

        # Independent recount of the points whose splat lands in the mask.
        cam, mask = cmd.camera, cmd.mask.values
        full = ts.full_cloud()
        u, v, _, ok = cam.project(full.points)
        px, py = np.rint(u).astype(int), np.rint(v).astype(int)
        res = cam.resolution
        inside = ok & (px >= 0) & (px < res) & (py >= 0) & (py < res)
        landed = np.zeros(len(full), dtype=bool)
        landed[inside] = mask[py[inside], px[inside]]

        soup = TriangleSoup.from_meshes(ts.scene.all_meshes())
        gt = render_persp_depth(soup, cam).depth
        paintable = int((mask & gt.finite_mask()).sum())
        assert out.total_points() == before - int(landed.sum()) + paintable
        assert out.revision == ts.revision + 1

    def test_identical_edit_is_idempotent(self):
        # Radius-0 splats and an interior mask keep the pixels sourced by the
        # repaint identical across runs, making the replay exact.
        scene = assemble_scene(RoomSpec(4, 4, 3), style_prompt="s")
        ts = texture_scene(
            scene, MockPainter(), NullScorer(), small_config(splat_radius=0)
        )
        overhead, _ = refinement_views(ts.scene.room, resolution=ts.config.persp_resolution)
        mask = np.zeros(overhead.shape, dtype=bool)
        mask[30:60, 30:60] = True  # strictly inside the floor region
        cmd = EditCommand(
            kind="repaint-region", camera=overhead, mask=BitMask(mask),
            prompt="marble tiles", seed=9,
        )
        once = apply_region_edit(ts, cmd, MockPainter(), NullScorer())
        twice = apply_region_edit(once, cmd, MockPainter(), NullScorer())
        assert once.total_points() == twice.total_points()
        # Compare positions/colors as sets per owner (edit order stable).
        for owner in once.clouds:
            a, b = once.clouds[owner], twice.clouds[owner]
            pa = np.lexsort(a.points.T)
            pb = np.lexsort(b.points.T)
            assert np.array_equal(a.points[pa], b.points[pb])
            assert np.array_equal(a.colors[pa], b.colors[pb])


@pytest.fixture(scope="module")
def textured():
    scene = two_box_scene()
    return texture_scene(scene, MockPainter(), NullScorer(), small_config())


class TestObjectEdits:

    def test_translate_round_trip(self, textured):
        delta = np.array([0.3, -0.2, 0.1])
        fwd = apply_object_edit(textured, EditCommand(kind="translate", target_id="alpha",
                                                      translation=delta))
        back = apply_object_edit(fwd, EditCommand(kind="translate", target_id="alpha",
                                                  translation=-delta))
        np.testing.assert_allclose(
            back.clouds["alpha"].points, textured.clouds["alpha"].points, atol=1e-9
        )

    def test_out_of_room_translate_rejected(self, textured):
        with pytest.raises(PlacementError):
            apply_object_edit(
                textured,
                EditCommand(kind="translate", target_id="alpha",
                            translation=np.array([5.0, 0, 0])),
            )

    def test_remove_decrements_exactly(self, textured):
        owned = len(textured.clouds["bravo"])
        out = apply_object_edit(textured, EditCommand(kind="remove", target_id="bravo"))
        assert out.total_points() == textured.total_points() - owned
        assert "bravo" not in out.clouds
        assert all(o.object_id != "bravo" for o in out.scene.objects)

    def test_duplicate_is_rigid_copy(self, textured):
        delta = np.array([-0.4, 0.9, 0.0])
        out = apply_object_edit(
            textured, EditCommand(kind="duplicate", target_id="alpha", translation=delta)
        )
        copies = [o for o in out.scene.objects if o.object_id.startswith("alpha-copy")]
        assert len(copies) == 1
        src = textured.clouds["alpha"]
        dup = out.clouds[copies[0].object_id]
        assert len(dup) == len(src)
        rng = np.random.default_rng(0)
        idx = rng.integers(0, len(src), size=(64, 2))
        d_src = np.linalg.norm(src.points[idx[:, 0]] - src.points[idx[:, 1]], axis=1)
        d_dup = np.linalg.norm(dup.points[idx[:, 0]] - dup.points[idx[:, 1]], axis=1)
        np.testing.assert_allclose(d_src, d_dup, atol=1e-9)

    def test_rotate_rescale_valid(self, textured):
        out = apply_object_edit(
            textured, EditCommand(kind="rotate", target_id="alpha", angle=np.pi / 2)
        )
        assert len(out.clouds["alpha"]) == len(textured.clouds["alpha"])
        out2 = apply_object_edit(out, EditCommand(kind="rescale", target_id="alpha", scale=0.5))
        lo1, hi1 = out.scene.object_by_id("alpha").aabb()
        lo2, hi2 = out2.scene.object_by_id("alpha").aabb()
        np.testing.assert_allclose(hi2 - lo2, (hi1 - lo1) * 0.5, atol=1e-9)

    def test_add_textures_new_object(self, textured):
        new = ObjectInstance(
            "charlie", box_mesh((0.5, 0.5, 0.5)), translation=np.array([0.2, 1.2, 0.25]),
            description="a crate",
        )
        out = apply_object_edit(
            textured, EditCommand(kind="add", new_object=new),
            backend=MockPainter(), scorer=NullScorer(),
        )
        assert "charlie" in out.clouds
        assert len(out.clouds["charlie"]) > 0
        assert out.owner_registry[-1] == "charlie"
        assert clouds_equal(out.clouds["alpha"], textured.clouds["alpha"])

    def test_add_without_backend_rejected(self, textured):
        new = ObjectInstance("d", box_mesh((0.4, 0.4, 0.4)), translation=np.array([0, 1.4, 0.2]))
        with pytest.raises(ValidationError):
            apply_object_edit(textured, EditCommand(kind="add", new_object=new))
