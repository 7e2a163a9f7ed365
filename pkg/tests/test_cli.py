import numpy as np

from scenepaint.cli import main
from scenepaint.storage import import_ply, load_mesh_ply, load_project


class TestCli:
    def test_generate_room(self, tmp_path):
        out = tmp_path / "room.ply"
        code = main([
            "generate-room", "--width", "4", "--depth", "4", "--height", "3",
            "--door", "0,1.5,1.0,2.0", "--ceiling", "star-inset", "--out", str(out),
        ])
        assert code == 0
        mesh = load_mesh_ply(out)
        assert mesh.num_triangles > 12
        assert mesh.labels is not None

    def test_init_texture_export_round_trip(self, tmp_path, capsys):
        project_dir = tmp_path / "proj"
        assert main([
            "init", "--project", str(project_dir),
            "--width", "4", "--depth", "4", "--height", "3",
            "--add-box", "alpha,0.8,0.8,0.8,1.0,0.3,0.4,a storage box",
            "--style", "plain style", "--seed", "11",
            "--pano-width", "128", "--resolution", "96", "--candidates", "2",
        ]) == 0
        project = load_project(project_dir)
        assert project.job_config.seed == 11
        assert len(project.scene.objects) == 1

        assert main(["texture", "--project", str(project_dir), "--backend", "mock"]) == 0
        output = capsys.readouterr().out
        assert "100.0%" in output

        ply_out = tmp_path / "scene.ply"
        pano_out = tmp_path / "pano.png"
        assert main([
            "export", "--project", str(project_dir),
            "--ply", str(ply_out), "--panorama", str(pano_out),
        ]) == 0
        cloud = import_ply(ply_out)
        assert len(cloud) > 0
        assert pano_out.exists()

    def test_export_without_texture_fails(self, tmp_path):
        project_dir = tmp_path / "proj"
        main([
            "init", "--project", str(project_dir),
            "--width", "4", "--depth", "4", "--height", "3",
        ])
        assert main(["export", "--project", str(project_dir), "--ply", "x.ply"]) == 1

    def test_invalid_room_flags_error(self, tmp_path, capsys):
        code = main([
            "generate-room", "--width", "-1", "--depth", "4", "--height", "3",
            "--out", str(tmp_path / "x.ply"),
        ])
        assert code == 2
        assert "width" in capsys.readouterr().err
