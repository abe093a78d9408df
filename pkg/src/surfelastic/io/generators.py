"""Benchmark mesh generators.

Boundary ids per generator:

========================  ===================================================
generator                 ids
========================  ===================================================
box                       0 -x, 1 +x, 2 -y, 3 +y, 4 -z, 5 +z
cook                      0 left (clamped), 1 right (loaded), 2 bottom,
                          3 top, 4 back (z = 0), 5 front (z = thickness)
extruded_polygon          0 front (z = 0), 1 back (z = length), 2 + k side k
                          (side k joins polygon vertices k and k + 1)
shell_cylinder            0 inner, 1 outer, 2 end z = 0, 3 end z = length
rough_plate               as box; the rough face is +z (id 5)
========================  ===================================================
"""

import inspect
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.spatial import cKDTree

from ..errors import MeshError
from ..mesh import Triangulation
from .rough_surface import RoughSurfaceSpec, rough_surface_heights

__all__ = [
    "structured_hex",
    "generate_box",
    "generate_cook",
    "generate_extruded_polygon",
    "generate_shell_cylinder",
    "generate_rough_plate",
    "merge_duplicate_vertices",
    "COOK_POINT_A",
    "GENERATORS",
    "build_generator_mesh",
    "generator_parameters",
]

# cell-local face of each logical side of a structured block
_SIDES = {"-x": 0, "+x": 1, "-y": 2, "+y": 3, "-z": 4, "+z": 5}


def _require_positive(**kwargs):
    for name, v in kwargs.items():
        if not v > 0:
            raise MeshError(f"{name} must be positive (got {v!r})")


def structured_hex(coords, side_ids, index=None):
    """Hexahedral mesh of a logically structured block.

    Parameters
    ----------
    coords : ndarray (nx+1, ny+1, nz+1, 3)
        Vertex positions; used directly unless ``index`` is given.
    side_ids : dict
        Logical side (``"-x"``, ``"+x"``, ...) to boundary id; sides not in
        the dict get no boundary faces.
    index : ndarray (nx+1, ny+1, nz+1) of int, optional
        Vertex numbering into ``coords.reshape(-1, 3)`` (used for periodic
        directions where two grid positions share a vertex).
    """
    coords = np.asarray(coords, dtype=float)
    nx, ny, nz = (s - 1 for s in coords.shape[:3])
    if index is None:
        vertices = coords.reshape(-1, 3)
        index = np.arange(len(vertices)).reshape(coords.shape[:3])
    else:
        vertices = coords.reshape(-1, 3)
    i, j, k = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    i, j, k = i.ravel(), j.ravel(), k.ravel()
    corners = [
        index[i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1)] for a in range(8)
    ]
    cells = np.stack(corners, axis=1)
    cell_id = np.arange(len(cells))

    bf = []
    for side, bid in side_ids.items():
        if bid is None:
            continue
        axis = "xyz".index(side[1])
        last = (nx, ny, nz)[axis] - 1 if side[0] == "+" else 0
        sel = (i, j, k)[axis] == last
        bf.append(np.column_stack([cell_id[sel], np.full(sel.sum(), _SIDES[side]), np.full(sel.sum(), bid)]))
    bf = np.concatenate(bf) if bf else np.zeros((0, 3), dtype=int)

    used = np.unique(cells)
    if len(used) != len(vertices):
        remap = -np.ones(len(vertices), dtype=np.int64)
        remap[used] = np.arange(len(used))
        vertices = vertices[used]
        cells = remap[cells]
    return Triangulation(vertices, cells, bf)


def merge_duplicate_vertices(tri, tol=None):
    """Merge geometrically coincident vertices (tolerance relative to size)."""
    if tol is None:
        tol = 1e-10 * max(tri.bounding_box_diagonal(), 1e-300)
    tree = cKDTree(tri.vertices)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    rep = np.arange(tri.n_vertices)
    # union-find on the coincident pairs
    def find(a):
        while rep[a] != a:
            rep[a] = rep[rep[a]]
            a = rep[a]
        return a
    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            rep[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(a) for a in range(tri.n_vertices)])
    used, new_index = np.unique(roots, return_inverse=True)
    return Triangulation(tri.vertices[used], new_index[tri.cells], tri.boundary_faces)


def generate_box(lx=1.0, ly=1.0, lz=1.0, nx=1, ny=1, nz=1, origin=(0.0, 0.0, 0.0)):
    """Axis-aligned box ``[0, lx] x [0, ly] x [0, lz]`` shifted by ``origin``."""
    _require_positive(lx=lx, ly=ly, lz=lz, nx=nx, ny=ny, nz=nz)
    x = np.linspace(0.0, lx, nx + 1) + origin[0]
    y = np.linspace(0.0, ly, ny + 1) + origin[1]
    z = np.linspace(0.0, lz, nz + 1) + origin[2]
    coords = np.stack(np.meshgrid(x, y, z, indexing="ij"), axis=-1)
    return structured_hex(coords, {s: b for b, s in enumerate(_SIDES)})


def cook_plan(s, t, scale=1.0):
    """Classical Cook panel: corners (0,0), (48,44), (48,60), (0,44)."""
    X = 48.0 * s
    Y = (1.0 - t) * 44.0 * s + t * (44.0 + 16.0 * s)
    return scale * X, scale * Y


def generate_cook(nx=10, ny=10, nz=1, thickness=10.0, scale=1.0):
    """Tapered Cook membrane extruded in z (non-affine cells)."""
    _require_positive(nx=nx, ny=ny, nz=nz, thickness=thickness, scale=scale)
    s, t, r = np.meshgrid(
        np.linspace(0, 1, nx + 1), np.linspace(0, 1, ny + 1), np.linspace(0, 1, nz + 1), indexing="ij"
    )
    X, Y = cook_plan(s, t, scale)
    Z = scale * thickness * r
    coords = np.stack([X, Y, Z], axis=-1)
    return structured_hex(coords, {"-x": 0, "+x": 1, "-y": 2, "+y": 3, "-z": 4, "+z": 5})


def COOK_POINT_A(thickness=10.0, scale=1.0):
    """Material position of point A: top-right edge, midway through the thickness."""
    return np.array([48.0 * scale, 60.0 * scale, 0.5 * thickness * scale])


def generate_extruded_polygon(sides=5, radius=1.0, length=5.0, divisions=4, length_divisions=20):
    """Prism with a regular polygonal cross-section along z.

    The polygon (circumradius ``radius``) is split into one quadrilateral
    sector per vertex (centre, two edge midpoints, vertex), each meshed with
    ``divisions x divisions`` cells.
    """
    _require_positive(radius=radius, length=length, divisions=divisions, length_divisions=length_divisions)
    if sides < 3:
        raise MeshError("a polygon needs at least 3 sides")
    n, nz = int(divisions), int(length_divisions)
    ang = 2.0 * np.pi * np.arange(sides) / sides + np.pi / 2.0
    verts = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    mids = 0.5 * (verts + np.roll(verts, -1, axis=0))     # mids[k] on edge (k, k+1)
    a = np.linspace(0.0, 1.0, n + 1)
    z = np.linspace(0.0, length, nz + 1)

    blocks = []
    for k in range(sides):
        c00 = np.zeros(2)
        c10 = mids[k - 1]           # on edge (k-1, k)
        c01 = mids[k]               # on edge (k, k+1)
        c11 = verts[k]
        s, t = np.meshgrid(a, a, indexing="ij")
        plan = (
            ((1 - s) * (1 - t))[..., None] * c00
            + (s * (1 - t))[..., None] * c10
            + ((1 - s) * t)[..., None] * c01
            + (s * t)[..., None] * c11
        )
        coords = np.concatenate(
            [np.repeat(plan[:, :, None, :], nz + 1, axis=2), np.broadcast_to(z, (n + 1, n + 1, nz + 1))[..., None]],
            axis=-1,
        )
        side_ids = {"-z": 0, "+z": 1, "+x": 2 + (k - 1) % sides, "+y": 2 + k}
        blocks.append(structured_hex(coords, side_ids))

    offset = 0
    vertices, cells, bfs = [], [], []
    ncell = 0
    for b in blocks:
        vertices.append(b.vertices)
        cells.append(b.cells + offset)
        bf = b.boundary_faces.copy()
        bf[:, 0] += ncell
        bfs.append(bf)
        offset += b.n_vertices
        ncell += b.n_cells
    tri = Triangulation(np.concatenate(vertices), np.concatenate(cells), np.concatenate(bfs))
    return merge_duplicate_vertices(tri)


def generate_shell_cylinder(radius=1.0, thickness=0.1, length=1.0, n_theta=32, n_length=8, n_wall=1):
    """Thin-walled circular tube along z; ``radius`` is the outer radius."""
    _require_positive(radius=radius, thickness=thickness, length=length, n_theta=n_theta, n_length=n_length, n_wall=n_wall)
    if thickness >= radius:
        raise MeshError("wall thickness must be smaller than the radius")
    r = np.linspace(radius - thickness, radius, n_wall + 1)
    th = 2.0 * np.pi * np.arange(n_theta + 1) / n_theta
    z = np.linspace(0.0, length, n_length + 1)
    R, TH, Z = np.meshgrid(r, th, z, indexing="ij")
    coords = np.stack([R * np.cos(TH), R * np.sin(TH), Z], axis=-1)
    index = np.arange(R.size).reshape(R.shape)
    index[:, -1, :] = index[:, 0, :]           # periodic in theta
    return structured_hex(coords, {"-x": 0, "+x": 1, "-z": 2, "+z": 3}, index=index)


@dataclass(frozen=True)
class PlateSpec:
    length: float = 8.0
    width: float = 8.0
    thickness: float = 1.0
    nx: int = 20
    ny: int = 20
    nz: int = 2


def generate_rough_plate(spec=None, plate=None):
    """Box plate whose top face carries a Gaussian random height field.

    The field is synthesised on the generator grid of ``spec`` (``divisions``
    intervals over ``length``), scaled uniformly to ``spec.scaled_length`` and
    bilinearly sampled at the top-face vertices.  Vertex heights below are
    blended linearly to the flat bottom face.
    """
    spec = spec or RoughSurfaceSpec()
    plate = plate or PlateSpec()
    tri = generate_box(plate.length, plate.width, plate.thickness, plate.nx, plate.ny, plate.nz)
    if spec.rms == 0.0:
        return tri
    h = rough_surface_heights(spec)
    g = np.linspace(0.0, spec.scaled_length, spec.divisions + 1)
    interp = RegularGridInterpolator((g, g), h, bounds_error=False, fill_value=None)
    V = tri.vertices.copy()
    xy = np.clip(V[:, :2], 0.0, spec.scaled_length)
    V[:, 2] += interp(xy) * (V[:, 2] / plate.thickness)
    out = Triangulation(V, tri.cells, tri.boundary_faces)
    try:
        out.validate()
    except MeshError as exc:
        raise MeshError(f"roughness inverts cells of the plate: {exc}") from exc
    return out


def _rough_plate_from_params(
    divisions=100, length=2.0, rms=0.05, correlation_length=0.25, seed=0,
    scaled_length=8.0, thickness=1.0, nx=20, ny=20, nz=2,
):
    """Flat-parameter front end of :func:`generate_rough_plate` (plate edge = scaled length)."""
    spec = RoughSurfaceSpec(int(divisions), length, rms, correlation_length, int(seed), scaled_length)
    plate = PlateSpec(scaled_length, scaled_length, thickness, int(nx), int(ny), int(nz))
    return generate_rough_plate(spec, plate)


GENERATORS = {
    "box": generate_box,
    "cook": generate_cook,
    "nanowire": generate_extruded_polygon,
    "shell cylinder": generate_shell_cylinder,
    "rough plate": _rough_plate_from_params,
}


def generator_parameters(name):
    """Accepted parameter names and defaults of a named generator."""
    sig = inspect.signature(GENERATORS[name])
    return {k: p.default for k, p in sig.parameters.items()}


def build_generator_mesh(name, params):
    """Run a named generator; unknown parameter names raise :class:`MeshError`."""
    if name not in GENERATORS:
        raise MeshError(f"unknown generator {name!r}")
    allowed = generator_parameters(name)
    bad = sorted(set(params) - set(allowed))
    if bad:
        raise MeshError(f"generator {name!r} has no parameter(s) {', '.join(bad)}; accepted: {', '.join(allowed)}")
    kwargs = {}
    for k, v in params.items():
        default = allowed[k]
        if isinstance(default, int) and not isinstance(default, bool):
            if float(v) != int(v):
                raise MeshError(f"generator parameter {k!r} must be an integer (got {v!r})")
            v = int(v)
        kwargs[k] = v
    return GENERATORS[name](**kwargs)
