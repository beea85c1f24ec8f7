"""Build the two study meshes and inspect the discrete space sizes.

Run: python3 demos/01_mesh_and_space.py
"""

from galbrunhdg.fespace import HdgSpace
from galbrunhdg.mesh import generate_polygonal_disk, generate_square

for name, mesh in (
    ("unit square, n=8", generate_square(8)),
    ("polygonal disk, level 2", generate_polygonal_disk(2)),
    ("graded disk, level 2", generate_polygonal_disk(2, boundary_grading=1.5)),
):
    print(f"{name}: {mesh.n_elements} elements, {mesh.n_facets} facets, "
          f"h_max {mesh.h_max:.4f}")
    for k in (1, 2, 3):
        full = HdgSpace(mesh, k)
        red = HdgSpace(mesh, k, k_facet=k - 1, l_lift=k - 1) if k > 1 else None
        line = (f"  k={k}: {full.total_dofs} dofs, "
                f"{full.n_cdofs} skeleton dofs")
        if red is not None:
            line += f" (reduced: {red.n_cdofs})"
        print(line)
