import os
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfelastic.assembly import SurfaceElasticSystem
from surfelastic.constitutive import SurfaceMaterial, VolumeMaterial
from surfelastic.errors import MeshError
from surfelastic.io.generators import (
    COOK_POINT_A,
    PlateSpec,
    build_generator_mesh,
    generate_box,
    generate_cook,
    generate_extruded_polygon,
    generate_rough_plate,
    generate_shell_cylinder,
    generator_parameters,
)
from surfelastic.io.mesh_io import read_mesh, write_mesh
from surfelastic.io.rough_surface import RoughSurfaceSpec, rough_surface_heights
from surfelastic.io.vtu import VTK_HEXAHEDRON, VTK_QUAD, read_vtu, write_pvd, write_step, write_vtu
from surfelastic.mesh import DofMap, exterior_faces, extract_boundary_mesh
from surfelastic.fem_basis import gauss_rule, reinit_material


def total_volume(tri):
    X = tri.vertices[tri.cells]
    return reinit_material(X, np.zeros_like(X), gauss_rule(3)).JxW.sum()


def assert_watertight_and_tagged(tri):
    assert tri.validate()
    ext = {tuple(f) for f in exterior_faces(tri.cells)}
    tagged = {tuple(f) for f in tri.boundary_faces[:, :2]}
    assert ext == tagged


class TestGenerators:
    @pytest.mark.parametrize(
        "tri",
        [
            generate_box(1, 2, 3, 2, 3, 4),
            generate_cook(5, 4, 2),
            generate_extruded_polygon(5, 1.0, 5.0, 2, 4),
            generate_shell_cylinder(2.5, 0.1, 3.0, 24, 4, 2),
            generate_rough_plate(RoughSurfaceSpec(divisions=40), PlateSpec(nx=8, ny=8, nz=2)),
        ],
        ids=["box", "cook", "nanowire", "shell", "rough"],
    )
    def test_valid_watertight_tagged(self, tri):
        assert_watertight_and_tagged(tri)

    def test_cook_geometry(self):
        tri = generate_cook(10, 10, 2)
        assert tri.n_cells == 200
        # trapezoid area (44 + 16) / 2 * 48 times thickness 10
        assert total_volume(tri) == pytest.approx(0.5 * (44 + 16) * 48 * 10)
        assert np.any(np.all(np.isclose(tri.vertices, COOK_POINT_A()), axis=1))

    def test_pentagonal_prism(self):
        tri = generate_extruded_polygon(5, 1.0, 5.0, 4, 20)
        assert tri.n_cells == 5 * 16 * 20
        area = 2.5 * np.sin(2 * np.pi / 5)
        assert total_volume(tri) == pytest.approx(area * 5.0, rel=1e-12)
        assert sorted(tri.boundary_ids) == list(range(7))

    def test_shell_cylinder(self):
        tri = generate_shell_cylinder(2.5, 0.1, 3.0, 64, 4, 1)
        r = np.hypot(tri.vertices[:, 0], tri.vertices[:, 1])
        np.testing.assert_allclose(np.sort(np.unique(r.round(12))), [2.4, 2.5])
        assert extract_boundary_mesh(tri, [1]).n_cells == 64 * 4
        assert tri.n_vertices == 64 * 5 * 2    # periodic seam merged

    def test_flat_rough_plate_is_box(self):
        plate = PlateSpec(nx=4, ny=4, nz=2)
        tri = generate_rough_plate(RoughSurfaceSpec(rms=0.0), plate)
        box = generate_box(8, 8, 1, 4, 4, 2)
        np.testing.assert_array_equal(tri.vertices, box.vertices)
        np.testing.assert_array_equal(tri.boundary_faces, box.boundary_faces)

    def test_rough_plate_deterministic(self):
        plate = PlateSpec(nx=6, ny=6, nz=2)
        a = generate_rough_plate(RoughSurfaceSpec(divisions=30, seed=4), plate)
        b = generate_rough_plate(RoughSurfaceSpec(divisions=30, seed=4), plate)
        c = generate_rough_plate(RoughSurfaceSpec(divisions=30, seed=5), plate)
        np.testing.assert_array_equal(a.vertices, b.vertices)
        assert not np.array_equal(a.vertices, c.vertices)
        np.testing.assert_allclose(a.vertices[a.vertices[:, 2] < 1e-12, 2], 0.0)

    def test_invalid_parameters(self):
        with pytest.raises(MeshError):
            generate_box(0.0)
        with pytest.raises(MeshError):
            generate_extruded_polygon(sides=2)
        with pytest.raises(MeshError, match="no parameter"):
            build_generator_mesh("box", {"nq": 2})
        with pytest.raises(MeshError, match="integer"):
            build_generator_mesh("box", {"nx": 1.5})
        with pytest.raises(MeshError, match="unknown generator"):
            build_generator_mesh("torus", {})

    def test_named_generator(self):
        tri = build_generator_mesh("box", {"nx": 2.0, "lx": 3})
        assert tri.n_cells == 2
        assert "n_theta" in generator_parameters("shell cylinder")


class TestRoughSurface:
    def test_statistics_over_seeds(self):
        # default generator grid: 100 divisions over length 2, lag = correlation length
        spec0 = RoughSurfaceSpec()
        dx = spec0.length / spec0.divisions
        lag = spec0.correlation_length / dx            # 12.5 grid steps
        lo, hi = int(np.floor(lag)), int(np.ceil(lag))
        var, cov_lo, cov_hi = [], [], []
        for seed in range(24):
            h = rough_surface_heights(RoughSurfaceSpec(seed=seed), unscaled=True)
            var.append(np.mean(h**2))                 # the field has zero mean by construction
            cov_lo.append(0.5 * (np.mean(h[lo:] * h[:-lo]) + np.mean(h[:, lo:] * h[:, :-lo])))
            cov_hi.append(0.5 * (np.mean(h[hi:] * h[:-hi]) + np.mean(h[:, hi:] * h[:, :-hi])))
        sigma2 = spec0.rms**2
        rms = np.sqrt(np.mean(var))
        assert abs(rms - spec0.rms) < 0.15 * spec0.rms
        cov = np.mean(cov_lo) + (lag - lo) * (np.mean(cov_hi) - np.mean(cov_lo))
        assert abs(cov - sigma2 * np.exp(-1.0)) < 0.25 * sigma2 * np.exp(-1.0)

    def test_scaling(self):
        spec = RoughSurfaceSpec(divisions=20, seed=3)
        np.testing.assert_allclose(rough_surface_heights(spec), spec.scale * rough_surface_heights(spec, unscaled=True))
        assert rough_surface_heights(spec).shape == (21, 21)

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            RoughSurfaceSpec(rms=-1.0)


class TestMeshFile:
    @settings(max_examples=10, deadline=None)
    @given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 2))
    def test_round_trip(self, nx, ny, nz):
        import tempfile

        tri = generate_cook(nx, ny, nz)
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "m.mesh")
            write_mesh(path, tri)
            back = read_mesh(path)
        np.testing.assert_array_equal(back.vertices, tri.vertices)
        np.testing.assert_array_equal(back.cells, tri.cells)
        np.testing.assert_array_equal(back.boundary_faces, tri.boundary_faces)

    @pytest.mark.parametrize(
        "edit, fragment",
        [
            (lambda s: s.replace("NODES 8", "NODES 9"), ":11: NODES row needs 4 fields"),
            (lambda s: s.replace("\n3 0 1 1\n", "\n4 0 1 1\n"), ":6: node indices"),
            (lambda s: s.replace("\n0 0 4 2 6 1 5 3 7\n", "\n0 0 4 2 6 1 5 3\n"), ":12: HEX8 row needs 9 fields"),
            (lambda s: s.replace("BOUNDARY 6", "BOUNDARY 7"), "truncated"),
            (lambda s: s.replace("\n0 0 4 2 6 1 5 3 7\n", "\n0 4 0 6 2 5 1 7 3\n"), "Jacobian"),
            (lambda s: s + "extra\n", "unexpected content"),
        ],
    )
    def test_malformed(self, tmp_path, edit, fragment):
        path = tmp_path / "m.mesh"
        write_mesh(str(path), generate_box())
        path.write_text(edit(path.read_text()))
        with pytest.raises(MeshError, match=fragment):
            read_mesh(str(path))


class TestVtu:
    def test_round_trip_and_ordering(self, tmp_path):
        tri = generate_box(1, 1, 1, 2, 1, 1)
        u = np.arange(tri.n_vertices * 3, dtype=float).reshape(-1, 3)
        path = write_vtu(str(tmp_path / "a.vtu"), tri.vertices, tri.cells, VTK_HEXAHEDRON,
                         {"displacement": u}, {"id": np.arange(2.0)})
        data = read_vtu(path)
        np.testing.assert_array_equal(data["cells"], tri.cells)
        np.testing.assert_array_equal(data["point_data"]["displacement"], u)
        np.testing.assert_array_equal(data["types"], [12, 12])
        root = ET.parse(path).getroot()
        assert root.get("byte_order") == "LittleEndian"

    def solved_system(self, F):
        tri = generate_box(1, 1, 1, 2, 2, 2)
        sysm = SurfaceElasticSystem(tri, DofMap(tri.n_vertices), VolumeMaterial(1.5, 1.0),
                                    SurfaceMaterial(0.2, 0.1, 0.0), energetic_ids=[4, 5])
        u = (tri.vertices @ (F - np.eye(3)).T).ravel()
        sysm.update_points(u, 1.0)
        return sysm, u

    def test_reference_state_zero(self, tmp_path):
        sysm, u = self.solved_system(np.eye(3))
        vol, surf = write_step(str(tmp_path), 0, sysm, u, quadrature_data=True)
        v = read_vtu(vol)
        np.testing.assert_array_equal(v["point_data"]["displacement"], 0.0)
        np.testing.assert_allclose(v["cell_data"]["J"], 1.0)
        s = read_vtu(surf)
        assert len(s["cells"]) == sysm.surf.n_cells == 8
        np.testing.assert_array_equal(s["types"], VTK_QUAD)

    def test_uniform_stretch(self, tmp_path):
        F = np.diag([1.2, 1.1, 0.9])
        sysm, u = self.solved_system(F)
        vol, surf = write_step(str(tmp_path), 3, sysm, u, quadrature_data=True)
        assert os.path.basename(vol) == "solution-volume-0003.vtu"
        np.testing.assert_allclose(read_vtu(vol)["cell_data"]["J"], np.linalg.det(F))
        np.testing.assert_allclose(read_vtu(surf)["cell_data"]["J_hat"], 1.2 * 1.1)
        disp = read_vtu(surf)["point_data"]["displacement"]
        np.testing.assert_allclose(disp, sysm.surf.vertices @ (F - np.eye(3)).T, atol=1e-14)

    def test_pvd(self, tmp_path):
        p = write_pvd(str(tmp_path / "c.pvd"), [(0.5, str(tmp_path / "a.vtu")), (1.0, str(tmp_path / "b.vtu"))])
        sets = ET.parse(p).getroot().findall("Collection/DataSet")
        assert [s.get("file") for s in sets] == ["a.vtu", "b.vtu"]
        assert float(sets[1].get("timestep")) == 1.0
