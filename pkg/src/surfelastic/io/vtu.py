"""VTK XML unstructured-grid (``.vtu``) output.

Layout of every file written here:

* ``<VTKFile type="UnstructuredGrid" version="1.0" byte_order="LittleEndian"
  header_type="UInt32">`` with one ``<Piece>``.
* All ``DataArray`` elements use ``format="binary"``: the payload is the
  base64 encoding of a little-endian ``UInt32`` byte count followed by the
  raw little-endian array bytes (C order).
* Points are the material (reference) vertex positions, ``Float64``;
  connectivity and offsets are ``Int64``, cell types ``UInt8``.
* Hexahedra are written as ``VTK_HEXAHEDRON`` (12) and quadrilaterals as
  ``VTK_QUAD`` (9); the lexicographic vertex order is permuted to the VTK
  counter-clockwise order.

Point data: ``displacement`` (3 components).  Optional cell data (enabled by
the quadrature-data switch): ``J`` and ``energy`` for volume cells, ``J_hat``
and ``energy_hat`` for surface cells, each the average over the cell's
quadrature points.
"""

import base64
import os
import struct
import xml.etree.ElementTree as ET

import numpy as np

__all__ = ["write_vtu", "read_vtu", "write_step", "write_pvd", "VTK_HEXAHEDRON", "VTK_QUAD"]

VTK_HEXAHEDRON = 12
VTK_QUAD = 9
_TO_VTK = {VTK_HEXAHEDRON: [0, 1, 3, 2, 4, 5, 7, 6], VTK_QUAD: [0, 1, 3, 2]}
_VTK_TYPES = {
    np.dtype("<f8"): "Float64",
    np.dtype("<f4"): "Float32",
    np.dtype("<i8"): "Int64",
    np.dtype("<i4"): "Int32",
    np.dtype("u1"): "UInt8",
}
_NP_TYPES = {v: k for k, v in _VTK_TYPES.items()}


def _encode(arr):
    raw = np.ascontiguousarray(arr).tobytes()
    return base64.b64encode(struct.pack("<I", len(raw)) + raw).decode("ascii")


def _data_array(parent, name, arr, ncomp=1):
    arr = np.asarray(arr)
    dtype = arr.dtype.newbyteorder("<") if arr.dtype.itemsize > 1 else arr.dtype
    arr = arr.astype(dtype, copy=False)
    el = ET.SubElement(
        parent,
        "DataArray",
        type=_VTK_TYPES[np.dtype(dtype)],
        Name=name,
        NumberOfComponents=str(ncomp),
        format="binary",
    )
    el.text = _encode(arr)
    return el


def write_vtu(path, points, cells, cell_type, point_data=None, cell_data=None):
    """Write one unstructured grid.

    Parameters
    ----------
    points : ndarray (n, 3)
    cells : ndarray (m, k) in lexicographic vertex order
    cell_type : int
        ``VTK_HEXAHEDRON`` or ``VTK_QUAD``.
    point_data, cell_data : dict of name -> ndarray (n,) / (n, c)
    """
    points = np.asarray(points, dtype=float)
    cells = np.asarray(cells, dtype=np.int64)
    conn = cells[:, _TO_VTK[cell_type]]
    root = ET.Element(
        "VTKFile", type="UnstructuredGrid", version="1.0", byte_order="LittleEndian", header_type="UInt32"
    )
    grid = ET.SubElement(root, "UnstructuredGrid")
    piece = ET.SubElement(grid, "Piece", NumberOfPoints=str(len(points)), NumberOfCells=str(len(cells)))
    for tag, data in (("PointData", point_data), ("CellData", cell_data)):
        el = ET.SubElement(piece, tag)
        for name, arr in (data or {}).items():
            arr = np.asarray(arr, dtype=float)
            _data_array(el, name, arr, 1 if arr.ndim == 1 else arr.shape[1])
    _data_array(ET.SubElement(piece, "Points"), "Points", points, 3)
    cl = ET.SubElement(piece, "Cells")
    _data_array(cl, "connectivity", conn.ravel())
    _data_array(cl, "offsets", np.arange(1, len(cells) + 1, dtype=np.int64) * cells.shape[1])
    _data_array(cl, "types", np.full(len(cells), cell_type, dtype=np.uint8))
    ET.ElementTree(root).write(path, xml_declaration=True, encoding="utf-8")
    return path


def _decode(el):
    raw = base64.b64decode(el.text.strip())
    (nbytes,) = struct.unpack("<I", raw[:4])
    arr = np.frombuffer(raw[4 : 4 + nbytes], dtype=_NP_TYPES[el.get("type")])
    ncomp = int(el.get("NumberOfComponents", "1"))
    return arr.reshape(-1, ncomp) if ncomp > 1 else arr


def read_vtu(path):
    """Read a file written by :func:`write_vtu` back into arrays.

    Returns a dict with ``points``, ``cells`` (lexicographic order),
    ``types``, ``point_data`` and ``cell_data``.
    """
    root = ET.parse(path).getroot()
    piece = root.find("UnstructuredGrid/Piece")
    out = {"point_data": {}, "cell_data": {}}
    for tag, key in (("PointData", "point_data"), ("CellData", "cell_data")):
        for el in piece.find(tag):
            out[key][el.get("Name")] = _decode(el)
    out["points"] = _decode(piece.find("Points/DataArray"))
    arrays = {el.get("Name"): _decode(el) for el in piece.find("Cells")}
    types = arrays["types"]
    width = int(arrays["offsets"][0]) if len(types) else 0
    conn = arrays["connectivity"].reshape(-1, width) if width else np.zeros((0, 0), dtype=np.int64)
    if len(types):
        order = np.argsort(_TO_VTK[int(types[0])])
        conn = conn[:, order]
    out["cells"] = conn
    out["types"] = types
    return out


def _cell_mean(a):
    return a.mean(axis=1)


def write_step(directory, step, system, u, quadrature_data=False, prefix="solution"):
    """Volume and surface files for one converged step.

    The continuum points of ``system`` must be up to date with ``u``.
    Returns the two paths written.
    """
    os.makedirs(directory, exist_ok=True)
    tri, surf = system.tri, system.surf
    u = np.asarray(u, dtype=float).reshape(-1, 3)
    vol_path = os.path.join(directory, f"{prefix}-volume-{step:04d}.vtu")
    surf_path = os.path.join(directory, f"{prefix}-surface-{step:04d}.vtu")

    cd = None
    if quadrature_data:
        vp = system.volume_points
        cd = {"J": _cell_mean(vp.J), "energy": _cell_mean(vp.psi)}
    write_vtu(vol_path, tri.vertices, tri.cells, VTK_HEXAHEDRON, {"displacement": u}, cd)

    cd = None
    if quadrature_data and surf.n_cells:
        sp = system.surface_points
        cd = {"J_hat": _cell_mean(sp.J), "energy_hat": _cell_mean(sp.psi)}
    us = u[system.svert_vol] if surf.n_cells else np.zeros((0, 3))
    write_vtu(surf_path, surf.vertices, surf.cells, VTK_QUAD, {"displacement": us}, cd)
    return vol_path, surf_path


def write_pvd(path, entries):
    """ParaView collection ``[(time, file), ...]`` (file paths relative to ``path``)."""
    root = ET.Element("VTKFile", type="Collection", version="0.1", byte_order="LittleEndian")
    coll = ET.SubElement(root, "Collection")
    base = os.path.dirname(os.path.abspath(path))
    for t, f in entries:
        ET.SubElement(coll, "DataSet", timestep=repr(float(t)), part="0", file=os.path.relpath(f, base))
    ET.ElementTree(root).write(path, xml_declaration=True, encoding="utf-8")
    return path
