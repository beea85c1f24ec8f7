"""Conforming simplicial triangulations of the unit square and a polygonal
unit disk, with the facet (edge) topology needed by HDG jump terms.

Meshes are immutable after construction: plain index arrays, no element
objects on hot paths. Facet orientation is fixed by global vertex order
(low index -> high index); for interior facets the adjacent element with
the smaller index is side 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Facet:
    """One mesh edge. ``adj_elements`` holds 1 (boundary) or 2 element ids,
    smaller element id first."""

    vertex_ids: tuple[int, int]  # global ids, low < high
    adj_elements: tuple[int, ...]
    h_F: float
    is_boundary: bool
    normal: np.ndarray  # outward unit normal of adj_elements[0]

    def unit_normal(self, element_id: int) -> np.ndarray:
        """Outward unit normal of the given adjacent element."""
        if element_id == self.adj_elements[0]:
            return self.normal
        if len(self.adj_elements) == 2 and element_id == self.adj_elements[1]:
            return -self.normal
        raise ValueError(f"element {element_id} not adjacent to this facet")


@dataclass(frozen=True)
class Element:
    """One triangle; vertex order is counterclockwise."""

    vertex_ids: tuple[int, int, int]
    signed_area: float
    h_tau: float
    local_facets: tuple[int, int, int]  # facet ids for edges (01, 12, 20)
    facet_signs: tuple[int, int, int]  # +1 if traversed low->high


class Mesh:
    """Immutable conforming triangulation with facet topology.

    Parameters
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counterclockwise (flipped if not)
    """

    def __init__(self, vertices, triangles, parents=None):
        vertices = np.asarray(vertices, dtype=float)
        triangles = np.array(triangles, dtype=np.int64)
        if not np.all(np.isfinite(vertices)):
            raise ValueError("mesh vertices must be finite")
        # Enforce counterclockwise orientation.
        v = vertices
        for t in triangles:
            a = _signed_area(v[t[0]], v[t[1]], v[t[2]])
            if a == 0.0:
                raise ValueError("degenerate (zero-area) triangle")
            if a < 0.0:
                t[1], t[2] = t[2], t[1]
        self.vertices = vertices
        self.triangles = triangles
        self.parents = parents  # optional parent element ids after refinement
        self._build_topology()
        self.vertices.setflags(write=False)
        self.triangles.setflags(write=False)

    def _build_topology(self):
        v = self.vertices
        tris = self.triangles
        edge_map: dict[tuple[int, int], int] = {}
        facet_verts: list[tuple[int, int]] = []
        facet_elems: list[list[int]] = []
        elem_facets = np.empty((len(tris), 3), dtype=np.int64)
        elem_signs = np.empty((len(tris), 3), dtype=np.int64)
        for e, t in enumerate(tris):
            for le, (a, b) in enumerate(((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))):
                key = (min(a, b), max(a, b))
                fid = edge_map.get(key)
                if fid is None:
                    fid = len(facet_verts)
                    edge_map[key] = fid
                    facet_verts.append(key)
                    facet_elems.append([])
                facet_elems[fid].append(e)
                elem_facets[e, le] = fid
                elem_signs[e, le] = 1 if a < b else -1
        for fid, elems in enumerate(facet_elems):
            if len(elems) not in (1, 2):
                raise ValueError(f"non-conforming facet {fid}: {len(elems)} elements")

        self.facet_vertices = np.array(facet_verts, dtype=np.int64)
        self.elem_facets = elem_facets
        self.elem_facet_signs = elem_signs
        self.facet_is_boundary = np.array(
            [len(e) == 1 for e in facet_elems], dtype=bool
        )
        self.facet_adj = [tuple(sorted(e)) for e in facet_elems]

        d = v[self.facet_vertices[:, 1]] - v[self.facet_vertices[:, 0]]
        self.facet_h = np.hypot(d[:, 0], d[:, 1])
        # Normal of side 1 (element facet_adj[f][0]): rotate the low->high
        # tangent and orient outward from that element's centroid.
        tang = d / self.facet_h[:, None]
        normal = np.column_stack([tang[:, 1], -tang[:, 0]])
        mids = 0.5 * (v[self.facet_vertices[:, 0]] + v[self.facet_vertices[:, 1]])
        first_elem = np.array([a[0] for a in self.facet_adj], dtype=np.int64)
        cents = v[tris[first_elem]].mean(axis=1)
        flip = np.einsum("ij,ij->i", normal, mids - cents) < 0.0
        normal[flip] *= -1.0
        self.facet_normals = normal

        p0 = v[tris[:, 0]]
        p1 = v[tris[:, 1]]
        p2 = v[tris[:, 2]]
        self.areas = 0.5 * np.abs(
            (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
            - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
        )
        self.h_elem = np.maximum(
            np.maximum(
                np.hypot(*(p1 - p0).T),
                np.hypot(*(p2 - p1).T),
            ),
            np.hypot(*(p0 - p2).T),
        )
        self.h_max = float(self.h_elem.max())

    # ---- accessors -------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_elements(self) -> int:
        return len(self.triangles)

    @property
    def n_facets(self) -> int:
        return len(self.facet_vertices)

    @property
    def n_boundary_facets(self) -> int:
        return int(self.facet_is_boundary.sum())

    def element(self, e: int) -> Element:
        t = self.triangles[e]
        return Element(
            vertex_ids=tuple(int(i) for i in t),
            signed_area=float(self.areas[e]),
            h_tau=float(self.h_elem[e]),
            local_facets=tuple(int(f) for f in self.elem_facets[e]),
            facet_signs=tuple(int(s) for s in self.elem_facet_signs[e]),
        )

    def facet(self, f: int) -> Facet:
        return Facet(
            vertex_ids=tuple(int(i) for i in self.facet_vertices[f]),
            adj_elements=self.facet_adj[f],
            h_F=float(self.facet_h[f]),
            is_boundary=bool(self.facet_is_boundary[f]),
            normal=self.facet_normals[f],
        )

    def facet_unit_normal(self, f: int, element_id: int) -> np.ndarray:
        if element_id == self.facet_adj[f][0]:
            return self.facet_normals[f]
        return -self.facet_normals[f]

    def content_hash(self) -> bytes:
        """Stable 8-byte digest of the geometry, for serialization headers."""
        import hashlib

        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.triangles).tobytes())
        return h.digest()[:8]


def _signed_area(p0, p1, p2) -> float:
    return 0.5 * (
        (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])
    )


def generate_square(n: int) -> Mesh:
    """Uniform triangulation of the unit square: n x n cells, each split
    along the (i,j)-(i+1,j+1) diagonal. h_max = sqrt(2)/n."""
    if n < 1:
        raise ValueError("subdivision count must be >= 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    xv, yv = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([xv.ravel(), yv.ravel()])
    tris = []
    for j in range(n):
        for i in range(n):
            v00 = j * (n + 1) + i
            v10 = v00 + 1
            v01 = v00 + (n + 1)
            v11 = v01 + 1
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return Mesh(vertices, tris)


def generate_polygonal_disk(levels: int, boundary_grading: float | None = None) -> Mesh:
    """Polygonal approximation of the unit disk: a fan of 6 triangles
    around the origin, red-refined ``levels`` times with boundary vertices
    projected onto the unit circle after each refinement.

    boundary_grading > 1 pulls vertices toward r = 1 (finer near the
    boundary) via the radial remap r -> r**(1/grading).
    """
    if levels < 0:
        raise ValueError("levels must be >= 0")
    ang = np.arange(6) * (np.pi / 3.0)
    vertices = np.vstack([[0.0, 0.0], np.column_stack([np.cos(ang), np.sin(ang)])])
    tris = [(0, 1 + i, 1 + (i + 1) % 6) for i in range(6)]
    m = Mesh(vertices, tris)
    for _ in range(levels):
        m = uniform_refine(m)
        m = _project_boundary_to_circle(m)
    if boundary_grading is not None:
        if boundary_grading <= 0:
            raise ValueError("boundary_grading must be positive")
        v = m.vertices.copy()
        r = np.hypot(v[:, 0], v[:, 1])
        mask = r > 0
        scale = np.ones_like(r)
        scale[mask] = r[mask] ** (1.0 / boundary_grading - 1.0)
        m = Mesh(v * scale[:, None], m.triangles.copy())
    return m


def _project_boundary_to_circle(m: Mesh) -> Mesh:
    v = m.vertices.copy()
    bmask = np.zeros(len(v), dtype=bool)
    for f in np.flatnonzero(m.facet_is_boundary):
        bmask[m.facet_vertices[f]] = True
    r = np.hypot(v[bmask, 0], v[bmask, 1])
    v[bmask] /= r[:, None]
    return Mesh(v, m.triangles.copy(), parents=m.parents)


def uniform_refine(m: Mesh) -> Mesh:
    """Red refinement: each triangle is split into 4 via edge midpoints."""
    v = m.vertices
    nv = len(v)
    mid_id = nv + np.arange(m.n_facets)
    mids = 0.5 * (v[m.facet_vertices[:, 0]] + v[m.facet_vertices[:, 1]])
    vertices = np.vstack([v, mids])
    tris = []
    parents = []
    for e, t in enumerate(m.triangles):
        f01, f12, f20 = m.elem_facets[e]
        m01, m12, m20 = mid_id[f01], mid_id[f12], mid_id[f20]
        tris.extend(
            [
                (t[0], m01, m20),
                (t[1], m12, m01),
                (t[2], m20, m12),
                (m01, m12, m20),
            ]
        )
        parents.extend([e, e, e, e])
    return Mesh(vertices, tris, parents=np.array(parents, dtype=np.int64))


def mesh_stats(m: Mesh) -> tuple[int, int, int, float]:
    """(n_elem, n_facet, n_boundary_facet, h_max)."""
    return (m.n_elements, m.n_facets, m.n_boundary_facets, m.h_max)


# ---- plain-text mesh format ---------------------------------------------
#
# Header line `hdgmesh 1`, then `V <count>` followed by vertex lines `x y`,
# then `T <count>` followed by element lines `v0 v1 v2` (0-based, CCW).


def write_mesh(m: Mesh, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("hdgmesh 1\n")
        fh.write(f"V {m.n_vertices}\n")
        for x, y in m.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        fh.write(f"T {m.n_elements}\n")
        for a, b, c in m.triangles:
            fh.write(f"{a} {b} {c}\n")


def read_mesh(path) -> Mesh:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "hdgmesh 1":
        raise ValueError("not a 'hdgmesh 1' file")
    pos = 1
    tag, count = lines[pos].split()
    if tag != "V":
        raise ValueError("expected vertex section")
    nv = int(count)
    pos += 1
    vertices = np.array(
        [[float(t) for t in lines[pos + i].split()] for i in range(nv)]
    )
    pos += nv
    tag, count = lines[pos].split()
    if tag != "T":
        raise ValueError("expected element section")
    nt = int(count)
    pos += 1
    tris = np.array(
        [[int(t) for t in lines[pos + i].split()] for i in range(nt)],
        dtype=np.int64,
    )
    return Mesh(vertices, tris)
