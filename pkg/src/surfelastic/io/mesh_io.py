"""Plain-text hexahedral mesh format.

::

    # comment lines start with '#'
    NODES <n>
    <index> <x> <y> <z>          (n lines, index 0..n-1 in order)
    HEX8 <m>
    <index> <v0> ... <v7>        (m lines, lexicographic vertex order)
    BOUNDARY <k>
    <cell> <face> <id>           (k lines, face 0..5 = -x,+x,-y,+y,-z,+z)

Coordinates are written with 17 significant digits so that a write/read
round trip is exact.
"""

import numpy as np

from ..errors import MeshError
from ..mesh import Triangulation

__all__ = ["write_mesh", "read_mesh"]


def write_mesh(path, tri):
    with open(path, "w") as fh:
        fh.write("# surfelastic hexahedral mesh\n")
        fh.write(f"NODES {tri.n_vertices}\n")
        for i, (x, y, z) in enumerate(tri.vertices):
            fh.write(f"{i} {x:.17g} {y:.17g} {z:.17g}\n")
        fh.write(f"HEX8 {tri.n_cells}\n")
        for i, c in enumerate(tri.cells):
            fh.write(f"{i} " + " ".join(str(int(v)) for v in c) + "\n")
        fh.write(f"BOUNDARY {len(tri.boundary_faces)}\n")
        for c, f, b in tri.boundary_faces:
            fh.write(f"{int(c)} {int(f)} {int(b)}\n")


def _section(lines, pos, name, width, path):
    while pos < len(lines) and not lines[pos][1]:
        pos += 1
    if pos >= len(lines):
        raise MeshError(f"{path}: missing section {name}")
    lineno, tokens = lines[pos]
    if tokens[0] != name or len(tokens) != 2:
        raise MeshError(f"{path}:{lineno}: expected '{name} <count>', got {' '.join(tokens)!r}")
    try:
        count = int(tokens[1])
    except ValueError:
        raise MeshError(f"{path}:{lineno}: invalid count {tokens[1]!r}") from None
    rows = lines[pos + 1 : pos + 1 + count]
    if len(rows) < count:
        raise MeshError(f"{path}: section {name} is truncated")
    for ln, tok in rows:
        if len(tok) != width:
            raise MeshError(f"{path}:{ln}: {name} row needs {width} fields, got {len(tok)}")
    return [t for _, t in rows], [ln for ln, _ in rows], pos + 1 + count


def read_mesh(path):
    """Read a mesh written by :func:`write_mesh`; the result is validated."""
    with open(path) as fh:
        raw = fh.read().splitlines()
    lines = []
    for i, line in enumerate(raw, start=1):
        line = line.split("#", 1)[0].split()
        if line:
            lines.append((i, line))
    pos = 0
    nodes, nlines, pos = _section(lines, pos, "NODES", 4, path)
    hexes, hlines, pos = _section(lines, pos, "HEX8", 9, path)
    bnd, _, pos = _section(lines, pos, "BOUNDARY", 3, path)
    if pos != len(lines):
        raise MeshError(f"{path}:{lines[pos][0]}: unexpected content after BOUNDARY")
    try:
        idx = np.array([int(t[0]) for t in nodes], dtype=np.int64)
        vertices = np.array([[float(v) for v in t[1:]] for t in nodes]).reshape(-1, 3)
        cidx = np.array([int(t[0]) for t in hexes], dtype=np.int64)
        cells = np.array([[int(v) for v in t[1:]] for t in hexes], dtype=np.int64).reshape(-1, 8)
        faces = np.array([[int(v) for v in t] for t in bnd], dtype=np.int64).reshape(-1, 3)
    except ValueError as exc:
        raise MeshError(f"{path}: malformed number ({exc})") from None
    if np.any(idx != np.arange(len(idx))):
        k = int(np.argmax(idx != np.arange(len(idx))))
        raise MeshError(f"{path}:{nlines[k]}: node indices must run 0..n-1 in order")
    if np.any(cidx != np.arange(len(cidx))):
        k = int(np.argmax(cidx != np.arange(len(cidx))))
        raise MeshError(f"{path}:{hlines[k]}: cell indices must run 0..m-1 in order")
    tri = Triangulation(vertices, cells, faces)
    tri.validate()
    return tri
