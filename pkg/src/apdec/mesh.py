"""Interval and triangle meshes plus the Bernstein DoF lattice.

Both mesh kinds expose the same simplex view used by the assembly code:
``cell_coords`` (nE, dim+1, dim), ``cell_vertices`` (nE, dim+1) with
periodic identification already applied, ``interior_faces`` and
``boundary_faces``.  Face ``a`` of a cell is the facet opposite its local
vertex ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, MeshError

BOUNDARY_TAGS = ("outflow", "inflow", "wall")


@dataclass(frozen=True)
class FaceSet:
    """Interior facets shared by two cells.

    ``left``/``right`` are cell ids, ``left_face``/``right_face`` the local
    facet index in each cell, ``normal`` the unit normal pointing from the
    left cell into the right one and ``measure`` the facet measure (1 for
    points).  ``vertex_pairs`` holds the global vertex ids (P, Q) that fix a
    common parametrisation of the facet, or -1 in 1D.
    """

    left: np.ndarray
    right: np.ndarray
    left_face: np.ndarray
    right_face: np.ndarray
    normal: np.ndarray
    measure: np.ndarray
    vertex_pairs: np.ndarray

    def __len__(self) -> int:
        return len(self.left)


@dataclass(frozen=True)
class BoundaryFaceSet:
    cell: np.ndarray
    face: np.ndarray
    normal: np.ndarray
    measure: np.ndarray
    tags: tuple

    def __len__(self) -> int:
        return len(self.cell)

    def select(self, tag: str) -> "BoundaryFaceSet":
        keep = np.array([t == tag for t in self.tags], dtype=bool)
        return BoundaryFaceSet(
            self.cell[keep],
            self.face[keep],
            self.normal[keep],
            self.measure[keep],
            tuple(t for t in self.tags if t == tag),
        )


@dataclass(frozen=True)
class Mesh1D:
    a: float
    b: float
    n_cells: int
    periodic: bool
    cell_bounds: np.ndarray
    boundary_tag: str = "outflow"

    dim = 1

    @property
    def widths(self) -> np.ndarray:
        return self.cell_bounds[:, 1] - self.cell_bounds[:, 0]

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def n_vertices(self) -> int:
        return self.n_cells if self.periodic else self.n_cells + 1

    @property
    def cell_vertices(self) -> np.ndarray:
        i = np.arange(self.n_cells)
        right = (i + 1) % self.n_cells if self.periodic else i + 1
        return np.stack([i, right], axis=1)

    @property
    def cell_coords(self) -> np.ndarray:
        return self.cell_bounds[:, :, None].copy()

    @property
    def interior_faces(self) -> FaceSet:
        n = self.n_cells
        left = np.arange(n if self.periodic else n - 1)
        right = (left + 1) % n
        m = len(left)
        return FaceSet(
            left=left,
            right=right,
            # face opposite vertex 0 is the right end point of the cell
            left_face=np.zeros(m, dtype=int),
            right_face=np.ones(m, dtype=int),
            normal=np.ones((m, 1)),
            measure=np.ones(m),
            vertex_pairs=-np.ones((m, 2), dtype=int),
        )

    @property
    def boundary_faces(self) -> BoundaryFaceSet:
        if self.periodic:
            return BoundaryFaceSet(
                np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros((0, 1)),
                np.zeros(0), (),
            )
        return BoundaryFaceSet(
            cell=np.array([0, self.n_cells - 1]),
            face=np.array([1, 0]),
            normal=np.array([[-1.0], [1.0]]),
            measure=np.ones(2),
            tags=(self.boundary_tag, self.boundary_tag),
        )

    @property
    def diameters(self) -> np.ndarray:
        return self.widths

    @property
    def h_min(self) -> float:
        return float(self.widths.min())

    @property
    def h_max(self) -> float:
        return float(self.widths.max())

    @property
    def measure(self) -> float:
        return self.length


def build_uniform_1d(a: float, b: float, n: int, periodic: bool = True,
                     boundary_tag: str = "outflow") -> Mesh1D:
    """Uniform partition of [a, b] into ``n`` cells."""
    if int(n) != n or n < 1:
        raise ConfigError(f"cell count must be a positive integer, got {n!r}")
    if not b > a:
        raise ConfigError(f"empty interval [{a}, {b}]")
    if boundary_tag not in BOUNDARY_TAGS:
        raise ConfigError(f"unknown boundary tag {boundary_tag!r}")
    x = np.linspace(a, b, int(n) + 1)
    bounds = np.stack([x[:-1], x[1:]], axis=1)
    return Mesh1D(float(a), float(b), int(n), bool(periodic), bounds, boundary_tag)


@dataclass(frozen=True)
class Mesh2D:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_edge_tags: tuple
    edges: np.ndarray = field(repr=False)
    edge_cells: np.ndarray = field(repr=False)

    dim = 2

    @property
    def n_cells(self) -> int:
        return len(self.triangles)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def cell_vertices(self) -> np.ndarray:
        return self.triangles

    @property
    def cell_coords(self) -> np.ndarray:
        return self.vertices[self.triangles]

    @property
    def areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.triangles)

    @property
    def measure(self) -> float:
        return float(self.areas.sum())

    @property
    def diameters(self) -> np.ndarray:
        p = self.cell_coords
        d = [np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in ((0, 1), (1, 2), (2, 0))]
        return np.max(d, axis=0)

    @property
    def inradius_scale(self) -> np.ndarray:
        """Diameter of the inscribed circle, 4|K|/perimeter."""
        p = self.cell_coords
        per = sum(np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in ((0, 1), (1, 2), (2, 0)))
        return 4.0 * self.areas / per

    @property
    def h_min(self) -> float:
        return float(self.inradius_scale.min())

    @property
    def h_max(self) -> float:
        return float(self.diameters.max())

    def _face_of(self, cell: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        tri = self.triangles[cell]
        # local vertex that is neither p nor q
        other = (tri != p[:, None]) & (tri != q[:, None])
        return np.argmax(other, axis=1)

    def _normals(self, cell, face):
        tri = self.triangles[cell]
        a = self.vertices[tri[np.arange(len(cell)), (face + 1) % 3]]
        b = self.vertices[tri[np.arange(len(cell)), (face + 2) % 3]]
        t = b - a
        length = np.linalg.norm(t, axis=1)
        # counterclockwise cells: outward normal is the tangent rotated clockwise
        n = np.stack([t[:, 1], -t[:, 0]], axis=1) / length[:, None]
        return n, length

    @property
    def interior_faces(self) -> FaceSet:
        inner = self.edge_cells[:, 1] >= 0
        e = self.edges[inner]
        left, right = self.edge_cells[inner, 0], self.edge_cells[inner, 1]
        lf = self._face_of(left, e[:, 0], e[:, 1])
        rf = self._face_of(right, e[:, 0], e[:, 1])
        n, length = self._normals(left, lf)
        return FaceSet(left, right, lf, rf, n, length, e.copy())

    @property
    def boundary_faces(self) -> BoundaryFaceSet:
        outer = self.edge_cells[:, 1] < 0
        e = self.edges[outer]
        cell = self.edge_cells[outer, 0]
        face = self._face_of(cell, e[:, 0], e[:, 1])
        n, length = self._normals(cell, face)
        lookup = {tuple(sorted(be)): tag for be, tag in zip(self.boundary_edges.tolist(),
                                                             self.boundary_edge_tags)}
        tags = tuple(lookup.get(tuple(ed), "outflow") for ed in e.tolist())
        return BoundaryFaceSet(cell, face, n, length, tags)


def _signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]
    u = p[:, 1] - p[:, 0]
    v = p[:, 2] - p[:, 0]
    return 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])


def build_mesh_2d(vertices, triangles, boundary_edges=(), boundary_tags=()) -> Mesh2D:
    """Validate connectivity and derive the edge list.

    Raises
    ------
    MeshError
        On duplicate or inverted triangles, non-manifold edges, or boundary
        tags that do not refer to a boundary edge.
    """
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
    triangles = np.asarray(triangles, dtype=int).reshape(-1, 3)
    nv = len(vertices)
    if len(triangles) == 0:
        raise MeshError("mesh has no triangles")
    if triangles.min() < 0 or triangles.max() >= nv:
        raise MeshError("triangle references a vertex out of range")
    if np.any([len(set(t)) < 3 for t in triangles.tolist()]):
        raise MeshError("degenerate triangle with repeated vertex")
    keys = np.sort(triangles, axis=1)
    if len(np.unique(keys, axis=0)) != len(keys):
        raise MeshError("duplicate triangle")
    areas = _signed_areas(vertices, triangles)
    bad = np.flatnonzero(areas <= 0)
    if len(bad):
        raise MeshError(f"triangle {bad[0]} is inverted or degenerate (area {areas[bad[0]]:.3e})")

    local = np.array([[1, 2], [2, 0], [0, 1]])
    all_edges = np.sort(triangles[:, local].reshape(-1, 2), axis=1)
    owner = np.repeat(np.arange(len(triangles)), 3)
    edges, inverse, counts = np.unique(all_edges, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if counts.max() > 2:
        raise MeshError("non-manifold edge shared by more than two triangles")
    edge_cells = -np.ones((len(edges), 2), dtype=int)
    order = np.argsort(inverse, kind="stable")
    for idx in order:
        slot = 0 if edge_cells[inverse[idx], 0] < 0 else 1
        edge_cells[inverse[idx], slot] = owner[idx]

    boundary_edges = np.asarray(boundary_edges, dtype=int).reshape(-1, 2)
    boundary_tags = tuple(boundary_tags)
    if len(boundary_tags) != len(boundary_edges):
        raise MeshError("boundary edge and tag counts differ")
    is_boundary = {tuple(e) for e in edges[edge_cells[:, 1] < 0].tolist()}
    for be, tag in zip(boundary_edges.tolist(), boundary_tags):
        if tag not in BOUNDARY_TAGS:
            raise MeshError(f"unknown boundary tag {tag!r}")
        if tuple(sorted(be)) not in is_boundary:
            raise MeshError(f"tagged edge {be} is not a boundary edge")
    return Mesh2D(vertices, triangles, boundary_edges, boundary_tags, edges, edge_cells)


def load_mesh_2d(path) -> Mesh2D:
    """Read the ASCII mesh format ``nv nt nb`` / vertices / triangles / tagged edges."""
    try:
        tokens = Path(path).read_text().split()
        nv, nt, nb = (int(t) for t in tokens[:3])
        pos = 3
        verts = np.array(tokens[pos:pos + 2 * nv], dtype=float).reshape(nv, 2)
        pos += 2 * nv
        tris = np.array(tokens[pos:pos + 3 * nt], dtype=int).reshape(nt, 3)
        pos += 3 * nt
        rest = tokens[pos:]
        if len(rest) != 3 * nb:
            raise ValueError(f"expected {nb} boundary records, found {len(rest) / 3:g}")
        bedges = np.array([[int(rest[3 * i]), int(rest[3 * i + 1])] for i in range(nb)],
                          dtype=int).reshape(nb, 2)
        btags = tuple(rest[3 * i + 2] for i in range(nb))
    except (ValueError, IndexError) as exc:
        raise MeshError(f"malformed mesh file {path}: {exc}") from exc
    return build_mesh_2d(verts, tris, bedges, btags)


def write_mesh_2d(mesh: Mesh2D, path) -> None:
    lines = [f"{mesh.n_vertices} {mesh.n_cells} {len(mesh.boundary_edges)}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    lines += [f"{i} {j} {t}" for (i, j), t in zip(mesh.boundary_edges, mesh.boundary_edge_tags)]
    Path(path).write_text("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# DoF lattice

def lattice_indices(degree: int, n_bary: int) -> list[tuple[int, ...]]:
    """Barycentric multi-indices of total degree ``degree``.

    1D ordering is (d-i, i), i = 0..d, so local DoF i sits at x = i/d.
    """
    if n_bary == 2:
        return [(degree - i, i) for i in range(degree + 1)]
    out = []
    for k in range(degree + 1):
        for j in range(degree + 1 - k):
            out.append((degree - j - k, j, k))
    return out


@dataclass(frozen=True)
class DofMap:
    degree: int
    cell_dofs: np.ndarray
    n_dofs: int
    points: np.ndarray
    dof_cells: tuple = field(repr=False)

    def cells_of(self, dof: int) -> np.ndarray:
        return self.dof_cells[dof]


def build_dof_map(mesh, degree: int) -> DofMap:
    """Conforming global numbering of the degree-``degree`` Bernstein lattice.

    A lattice point is keyed by its (global vertex, multiplicity) pairs, so
    points on shared facets get the same id from every incident cell.
    Cell-interior points are keyed by the cell as well.
    """
    if degree not in (1, 2, 3):
        raise ConfigError(f"unsupported degree {degree}; expected 1, 2 or 3")
    nb = mesh.dim + 1
    alphas = lattice_indices(degree, nb)
    cv = mesh.cell_vertices
    coords = mesh.cell_coords
    ids: dict = {}
    cell_dofs = np.empty((mesh.n_cells, len(alphas)), dtype=int)
    points = []
    weights = np.array(alphas, dtype=float) / degree
    local_pts = np.einsum("la,eaj->elj", weights, coords)
    for e in range(mesh.n_cells):
        verts = cv[e]
        for l, alpha in enumerate(alphas):
            key = tuple(sorted((int(verts[a]), alpha[a]) for a in range(nb) if alpha[a]))
            if all(alpha):
                # cell-interior point; periodic cells can share all their vertices
                key = ("cell", e, l)
            g = ids.get(key)
            if g is None:
                g = len(ids)
                ids[key] = g
                points.append(local_pts[e, l])
            cell_dofs[e, l] = g
    n = len(ids)
    inverse = [[] for _ in range(n)]
    for e, row in enumerate(cell_dofs):
        for g in row:
            inverse[g].append(e)
    dof_cells = tuple(np.unique(np.array(c, dtype=int)) for c in inverse)
    return DofMap(degree, cell_dofs, n, np.array(points).reshape(n, mesh.dim), dof_cells)


# --------------------------------------------------------------------------
# Generators for the benchmark geometries

def disk_mesh(radius: float, n_rings: int, target_cells: int | None = None,
              tag: str = "outflow") -> Mesh2D:
    """Delaunay triangulation of concentric rings of points in a disk.

    Ring k carries about 6k points; with ``target_cells`` the outer ring is
    resized so the triangle count (2*sum(m_k) - m_outer) is hit exactly.
    """
    from scipy.spatial import Delaunay

    counts = [6 * k for k in range(1, n_rings + 1)]
    if target_cells is not None:
        scale = target_cells / (6.0 * n_rings ** 2)
        counts = [max(3, int(round(6 * k * scale))) for k in range(1, n_rings + 1)]
        inner = 2 * sum(counts[:-1])
        counts[-1] = target_cells - inner
        if counts[-1] < counts[-2]:
            raise ConfigError(f"cannot reach {target_cells} cells with {n_rings} rings")
    pts = [np.zeros((1, 2))]
    for k, m in enumerate(counts, start=1):
        r = radius * k / n_rings
        phase = 0.5 * (k % 2) * 2 * np.pi / m
        th = phase + 2 * np.pi * np.arange(m) / m
        pts.append(np.stack([r * np.cos(th), r * np.sin(th)], axis=1))
    pts = np.concatenate(pts)
    tri = Delaunay(pts).simplices.copy()
    tri = _orient_ccw(pts, tri)
    tri = tri[np.abs(_signed_areas(pts, tri)) > 1e-12 * radius ** 2]
    outer0 = len(pts) - counts[-1]
    m = counts[-1]
    bedges = np.array([[outer0 + i, outer0 + (i + 1) % m] for i in range(m)])
    return build_mesh_2d(pts, tri, bedges, (tag,) * m)


def polygon_mesh(polygon, spacing: float, edge_tags) -> Mesh2D:
    """Delaunay mesh of a convex polygon from a hexagonal point lattice.

    ``edge_tags[i]`` tags the polygon edge from vertex i to vertex i+1.
    """
    from scipy.spatial import Delaunay

    poly = np.asarray(polygon, dtype=float)
    nseg = len(poly)
    bpts, bseg = [], []
    for i in range(nseg):
        p, q = poly[i], poly[(i + 1) % nseg]
        n = max(1, int(np.ceil(np.linalg.norm(q - p) / spacing)))
        t = np.arange(n) / n
        bpts.append(p + t[:, None] * (q - p))
        bseg += [i] * n
    bpts = np.concatenate(bpts)
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    dy = spacing * np.sqrt(3) / 2
    rows = []
    for j, y in enumerate(np.arange(lo[1], hi[1] + dy, dy)):
        xs = np.arange(lo[0] + 0.5 * spacing * (j % 2), hi[0] + spacing, spacing)
        rows.append(np.stack([xs, np.full_like(xs, y)], axis=1))
    cand = np.concatenate(rows)
    # keep lattice points at least half a spacing inside every edge
    inside = np.ones(len(cand), dtype=bool)
    for i in range(nseg):
        p, q = poly[i], poly[(i + 1) % nseg]
        t = q - p
        nrm = np.array([t[1], -t[0]]) / np.linalg.norm(t)
        inside &= (cand - p) @ nrm < -0.5 * spacing
    pts = np.concatenate([bpts, cand[inside]])
    tri = _orient_ccw(pts, Delaunay(pts).simplices.copy())
    tri = tri[_signed_areas(pts, tri) > 1e-10 * spacing ** 2]
    nb = len(bpts)
    bedges = np.array([[i, (i + 1) % nb] for i in range(nb)])
    tags = tuple(edge_tags[s] for s in bseg)
    return build_mesh_2d(pts, tri, bedges, tags)


def _orient_ccw(pts, tri):
    tri = np.asarray(tri)
    flip = _signed_areas(pts, tri) < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    return tri
