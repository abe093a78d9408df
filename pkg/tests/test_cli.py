import io
import json
import os

import numpy as np
import pytest

from surfelastic.cli import main
from surfelastic.driver import run
from surfelastic.errors import ConfigError, InvertedCellError
from surfelastic.io.config import parse_config, parse_config_text
from surfelastic.io.vtu import read_vtu

SMALL = """
subsection Mesh
  set generator  = box
  set parameters = lx=2, nx=4, ny=2, nz=2
end
subsection Surface material
  set lambda = 0.3
  set mu     = 0.2
  set gamma  = 0.05
end
subsection Boundary conditions
  set energetic = 2 3 4 5
  set dirichlet = 0 xyz; 1 x {stretch}
end
subsection Time
  set steps = 2
end
subsection Output
  set monitor = 2 0.5 0.5
  set quadrature data = true
end
"""


def write_prm(tmp_path, stretch=0.2, name="run.prm"):
    path = tmp_path / name
    path.write_text(SMALL.format(stretch=stretch))
    return str(path)


class TestDriver:
    def test_run_outputs(self, tmp_path):
        cfg = parse_config(write_prm(tmp_path))
        buf = io.StringIO()
        res = run(cfg, out=buf)
        np.testing.assert_allclose(res.monitors[-1, 0, 0], 0.2, atol=1e-12)
        assert len(res.energy_norms) == 2 and res.energy_norms[-1][1] > 0
        out = tmp_path / "output"
        names = sorted(os.listdir(out))
        assert "solution-volume-0002.vtu" in names and "solution-surface.pvd" in names
        events = [json.loads(l)["event"] for l in (out / "run.jsonl").read_text().splitlines()]
        assert events[0] == "setup" and events[-1] == "finished"
        assert events.count("step") == 2
        assert "Total wallclock time" in buf.getvalue()
        surf = read_vtu(str(out / "solution-surface-0002.vtu"))
        assert len(surf["cells"]) == res.system.surf.n_cells

    def test_missing_boundary_id(self):
        cfg = parse_config_text(SMALL.format(stretch=0.1).replace("energetic = 2 3 4 5", "energetic = 9"))
        with pytest.raises(ConfigError, match="do not exist"):
            run(cfg, out=None, write_output=False)

    def test_failure_logged(self, tmp_path):
        cfg = parse_config(write_prm(tmp_path, stretch=-2.5))
        with pytest.raises(InvertedCellError):
            run(cfg, out=None)
        last = json.loads((tmp_path / "output" / "run.jsonl").read_text().splitlines()[-1])
        assert last["event"] == "error" and last["type"] == "InvertedCellError"
        assert last["step"] == 1


class TestCommandLine:
    def test_run_success(self, tmp_path, capsys):
        assert main(["run", write_prm(tmp_path), "--quiet", "--output", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "run.jsonl").exists()

    def test_physics_failure_exit_1(self, tmp_path, capsys):
        assert main(["run", write_prm(tmp_path, stretch=-2.5), "--quiet"]) == 1
        err = capsys.readouterr().err.strip().splitlines()
        info = json.loads(err[-1])
        assert info["error"] == "InvertedCellError"
        assert {"cell", "step", "iteration"} <= set(info)

    def test_config_error_exit_2(self, tmp_path, capsys):
        p = tmp_path / "bad.prm"
        p.write_text("subsection Mesh\n set generator = box\nend\nsubsection Time\n set steps = 0\nend\n")
        assert main(["run", str(p)]) == 2
        info = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert info["error"] == "ConfigError" and info["line"] == 5

    def test_usage_exit_2(self, capsys):
        assert main([]) == 2
        assert main(["generate", "teapot"]) == 2
        assert main(["--help"]) == 0

    def test_verify(self, capsys):
        assert main(["verify", "--samples", "10"]) == 0
        out = capsys.readouterr().out
        assert "suites passed" in out and "FAIL" not in out

    @pytest.mark.parametrize("name", ["cook", "nanowire", "bridge", "rough-plate"])
    def test_generate(self, tmp_path, name, capsys):
        assert main(["generate", name, "--out", str(tmp_path)]) == 0
        cfg = parse_config(str(tmp_path / f"{name}.prm"))
        assert os.path.isfile(cfg.mesh_path())

    def test_generate_bridge_ramp(self, tmp_path, capsys):
        main(["generate", "bridge", "--out", str(tmp_path)])
        cfg = parse_config(str(tmp_path / "bridge.prm"))
        assert cfg.time.steps == 20 and cfg.surface.gamma == 100.0
        assert cfg.surface.ramp_surface_tension

    def test_generate_rejects_options(self, tmp_path, capsys):
        assert main(["generate", "bridge", "--ratio", "1", "--out", str(tmp_path)]) == 2
        assert main(["generate", "nanowire", "--refine", "1", "--out", str(tmp_path)]) == 2

    def test_generated_cook_runs(self, tmp_path, capsys):
        main(["generate", "cook", "--out", str(tmp_path)])
        assert main(["run", str(tmp_path / "cook.prm"), "--quiet"]) == 0
