import textwrap

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfelastic.benchmarks import BENCHMARKS
from surfelastic.errors import ConfigError
from surfelastic.io.config import (
    BoundaryConfig,
    DirichletSpec,
    MeshConfig,
    OutputConfig,
    RunConfig,
    SolverConfig,
    SurfaceConfig,
    TimeConfig,
    VolumeConfig,
    config_fields,
    parse_config,
    parse_config_text,
    serialize_config,
)

MINIMAL = """
subsection Mesh
  set generator = box
end
"""


def parse(text):
    return parse_config_text(textwrap.dedent(text))


class TestParsing:
    def test_defaults(self):
        cfg = parse(MINIMAL)
        assert cfg.volume == VolumeConfig(1.5, 1.0)
        assert cfg.time == TimeConfig(1, 1.0)
        assert cfg.solver.tol_nl == 1e-9 and cfg.solver.tol_lin == 1e-6
        assert cfg.solver.max_newton == 15 and cfg.solver.divergence_count == 3
        assert cfg.surface_moduli() == (0.0, 0.0)

    def test_full_file(self):
        cfg = parse("""
            # Cook membrane
            subsection Mesh
              set generator  = cook
              set parameters = nx=4, ny=4, thickness=2.5
            end
            subsection Surface Material          # case is irrelevant
              set ratio mode = true
              set ratio      = 0.5
            end
            subsection Boundary conditions
              set energetic = 1 2 3
              set dirichlet = 0 xyz; 1 z 0.25
              set traction  = 1 0 0.05 0
            end
            subsection Output
              set monitor = 48 60 5; 0 0 0
            end
        """)
        assert cfg.mesh.parameters == {"nx": 4, "ny": 4, "thickness": 2.5}
        assert cfg.surface_moduli() == (0.75, 0.5)
        assert cfg.boundary.energetic == (1, 2, 3)
        assert cfg.boundary.dirichlet == (DirichletSpec(0, "xyz", 0.0), DirichletSpec(1, "z", 0.25))
        assert cfg.boundary.traction == ((1, (0.0, 0.05, 0.0)),)
        assert cfg.output.monitor == ((48.0, 60.0, 5.0), (0.0, 0.0, 0.0))
        assert cfg.referenced_ids() == [0, 1, 2, 3]

    def test_mesh_path_relative_to_file(self, tmp_path):
        p = tmp_path / "run.prm"
        p.write_text("subsection Mesh\n set file = m.mesh\nend\n")
        cfg = parse_config(str(p))
        assert cfg.mesh_path() == str(tmp_path / "m.mesh")

    def test_grammar_listing(self):
        fields = config_fields()
        assert "ratio mode" in fields["Surface material"]
        assert list(fields) == ["Mesh", "Volume material", "Surface material", "Boundary conditions",
                                "Time", "Solver", "Output"]


class TestErrors:
    @pytest.mark.parametrize(
        "text, line, fragment",
        [
            (MINIMAL + "subsection Bogus\nend\n", 5, "unknown subsection"),
            (MINIMAL + "subsection Time\n set stesp = 2\nend\n", 6, "unknown key"),
            (MINIMAL + "subsection Time\n set steps = 0\nend\n", 6, ">= 1"),
            (MINIMAL + "subsection Time\n set steps = two\nend\n", 6, "invalid value"),
            (MINIMAL + "subsection Time\n set steps = 2\n set steps = 3\nend\n", 7, "twice"),
            (MINIMAL + "subsection Mesh\nend\n", 5, "given twice"),
            ("subsection Mesh\n subsection Time\n", 2, "nested"),
            ("set steps = 1\n", 1, "outside"),
            ("subsection Mesh\n set generator = torus\nend\n", 2, "invalid value"),
            ("subsection Mesh\n set file = a.mesh\n set parameters = nx=2\nend\n", 3, "only applies"),
            (MINIMAL + "subsection Surface material\n set ratio mode = true\n set mu = 1\nend\n", 7,
             "ratio mode"),
            (MINIMAL + "subsection Surface material\n set ratio = 1\nend\n", 6, "requires"),
            (MINIMAL + "subsection Solver\n set nonlinear tolerance = 0\nend\n", 6, "positive"),
            (MINIMAL + "subsection Solver\n set linear solver = gmres\nend\n", 6, "cg"),
            (MINIMAL + "subsection Boundary conditions\n set dirichlet = 0 xw\nend\n", 6, "invalid value"),
            (MINIMAL + "subsection Output\n set write vtu = maybe\nend\n", 6, "invalid value"),
            (MINIMAL + "garbage\n", 5, "cannot parse"),
        ],
    )
    def test_line_numbers(self, text, line, fragment):
        with pytest.raises(ConfigError) as info:
            parse_config_text(text, "x.prm")
        assert info.value.line == line
        assert fragment in str(info.value)
        assert f"x.prm:{line}" in str(info.value)

    def test_no_mesh(self):
        with pytest.raises(ConfigError, match="exactly one"):
            parse_config_text("subsection Time\n set steps = 2\nend\n")

    def test_unclosed(self):
        with pytest.raises(ConfigError, match="not closed"):
            parse_config_text("subsection Mesh\n set generator = box\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            parse_config(str(tmp_path / "nope.prm"))


floats = st.floats(0.01, 1e3, allow_nan=False).map(lambda x: float(f"{x:.6g}"))


@st.composite
def run_configs(draw):
    if draw(st.booleans()):
        mesh = MeshConfig(file=draw(st.sampled_from(["a.mesh", "sub/b.mesh"])))
    else:
        mesh = MeshConfig(generator=draw(st.sampled_from(["box", "cook", "shell cylinder"])),
                          parameters=draw(st.dictionaries(st.sampled_from(["nx", "ny", "radius"]),
                                                          st.integers(1, 9), max_size=2)))
    ratio_mode = draw(st.booleans())
    surface = SurfaceConfig(
        lam=0.0 if ratio_mode else draw(floats),
        mu=0.0 if ratio_mode else draw(floats),
        gamma=draw(floats),
        ratio_mode=ratio_mode,
        ratio=draw(floats) if ratio_mode else 0.0,
        ramp_surface_tension=draw(st.booleans()),
    )
    ids = st.integers(0, 7)
    boundary = BoundaryConfig(
        energetic=tuple(sorted(draw(st.sets(ids, max_size=4)))),
        dirichlet=tuple(DirichletSpec(b, c, v) for b, c, v in draw(st.lists(
            st.tuples(ids, st.sampled_from(["x", "yz", "xyz"]), floats), max_size=3))),
        traction=tuple((b, (x, y, z)) for b, x, y, z in draw(st.lists(
            st.tuples(ids, floats, floats, floats), max_size=2))),
        body_force=draw(st.none() | st.tuples(floats, floats, floats)),
    )
    return RunConfig(
        mesh=mesh,
        volume=VolumeConfig(draw(floats), draw(floats)),
        surface=surface,
        boundary=boundary,
        time=TimeConfig(draw(st.integers(1, 50)), draw(floats)),
        solver=SolverConfig(tol_nl=draw(st.sampled_from([1e-9, 1e-8, 3.5e-10])),
                            linear_solver=draw(st.sampled_from(["cg", "direct"])),
                            threads=draw(st.integers(1, 4))),
        output=OutputConfig(directory=draw(st.sampled_from(["out", "results"])),
                            write_vtu=draw(st.booleans()),
                            monitor=tuple(draw(st.lists(st.tuples(floats, floats, floats), max_size=2)))),
    )


class TestRoundTrip:
    @settings(max_examples=60, deadline=None)
    @given(run_configs())
    def test_serialize_parse(self, cfg):
        assert parse_config_text(serialize_config(cfg)) == cfg

    @pytest.mark.parametrize("name", sorted(BENCHMARKS))
    def test_benchmark_configs(self, name):
        cfg = BENCHMARKS[name]()
        assert parse_config_text(serialize_config(cfg)) == cfg
