import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from apdec.errors import ConfigError, MeshError
from apdec.mesh import (build_dof_map, build_mesh_2d, build_uniform_1d, disk_mesh,
                        load_mesh_2d, polygon_mesh, write_mesh_2d)

from conftest import unit_square_mesh_text


def test_uniform_widths():
    m = build_uniform_1d(0.0, 1.0, 4, periodic=True)
    np.testing.assert_allclose(m.widths, 0.25)


def test_uniform_bounds_nonperiodic():
    m = build_uniform_1d(-1.0, 1.0, 2, periodic=False)
    np.testing.assert_allclose(m.cell_bounds, [[-1, 0], [0, 1]])


@pytest.mark.parametrize("args", [(0, 1, 0), (0, 1, -3), (1, 1, 4), (2, 1, 4), (0, 1, 2.5)])
def test_uniform_rejects_bad_input(args):
    with pytest.raises(ConfigError):
        build_uniform_1d(*args)


@given(st.floats(-5, 5), st.floats(0.1, 10), st.integers(1, 300))
def test_widths_sum_to_length(a, length, n):
    m = build_uniform_1d(a, a + length, n)
    assert abs(m.widths.sum() - length) <= 1e-14 * max(1.0, abs(a) + length)
    assert np.all(m.widths > 0)


def test_load_two_triangle_square(tmp_path):
    path = tmp_path / "square.mesh"
    path.write_text(unit_square_mesh_text())
    m = load_mesh_2d(path)
    assert (m.n_vertices, m.n_cells, len(m.edges)) == (4, 2, 5)
    assert len(m.interior_faces) == 1
    assert sorted(m.boundary_faces.tags) == ["inflow", "outflow", "wall", "wall"]


def test_mesh_file_round_trip(tmp_path):
    m = disk_mesh(1.0, 3)
    write_mesh_2d(m, tmp_path / "disk.mesh")
    back = load_mesh_2d(tmp_path / "disk.mesh")
    np.testing.assert_array_equal(back.triangles, m.triangles)
    np.testing.assert_allclose(back.vertices, m.vertices)


@pytest.mark.parametrize("text, why", [
    ("4 3 0\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n0 1 2\n", "duplicate"),
    ("3 1 0\n0 0\n1 0\n0 1\n0 2 1\n", "inverted"),
    ("5 3 0\n0 0\n1 0\n0 1\n0 -1\n1 1\n0 1 2\n1 0 3\n0 1 4\n", "non-manifold"),
    ("3 1\n0 0\n1 0\n", "malformed"),
    ("3 1 1\n0 0\n1 0\n0 1\n0 1 2\n0 1 lava\n", "unknown tag"),
])
def test_load_rejects_bad_files(tmp_path, text, why):
    path = tmp_path / "bad.mesh"
    path.write_text(text)
    with pytest.raises(MeshError):
        load_mesh_2d(path)


def test_disk_mesh_hits_requested_count():
    m = disk_mesh(1.0, 24, target_cells=3576)
    assert m.n_cells == 3576
    assert np.all(m.areas > 0)
    assert abs(m.measure - np.pi) < 0.02


def test_polygon_mesh_tags_every_boundary_edge():
    poly = ((0, 0), (2, 0), (2, 1), (0, 1))
    m = polygon_mesh(poly, 0.2, ("wall", "outflow", "wall", "inflow"))
    bf = m.boundary_faces
    assert set(bf.tags) == {"wall", "outflow", "inflow"}
    assert abs(m.measure - 2.0) < 1e-12
    assert abs(bf.select("inflow").measure.sum() - 1.0) < 1e-12


@pytest.mark.parametrize("n, d, periodic, expected", [(2, 2, True, 4), (4, 1, False, 5),
                                                       (5, 3, True, 15), (5, 3, False, 16)])
def test_dof_counts_1d(n, d, periodic, expected):
    assert build_dof_map(build_uniform_1d(0, 1, n, periodic), d).n_dofs == expected


def test_single_triangle_cubic_has_ten_dofs():
    m = build_mesh_2d([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]])
    dm = build_dof_map(m, 3)
    assert dm.n_dofs == 10 and dm.cell_dofs.shape == (1, 10)


def test_unsupported_degree():
    with pytest.raises(ConfigError):
        build_dof_map(build_uniform_1d(0, 1, 3), 4)


def test_periodic_endpoints_share_one_dof():
    dm = build_dof_map(build_uniform_1d(0, 1, 6, periodic=True), 2)
    assert dm.cell_dofs[0, 0] == dm.cell_dofs[-1, -1]


@pytest.mark.parametrize("degree", [1, 2, 3])
def test_shared_edges_agree_and_inverse_map(degree):
    m = disk_mesh(1.0, 4)
    dm = build_dof_map(m, degree)
    faces = m.interior_faces
    from apdec.mesh import lattice_indices
    alphas = np.array(lattice_indices(degree, 3))
    for left, right, lf, rf in zip(faces.left, faces.right, faces.left_face, faces.right_face):
        on_l = set(dm.cell_dofs[left][alphas[:, lf] == 0])
        on_r = set(dm.cell_dofs[right][alphas[:, rf] == 0])
        assert on_l == on_r
    for dof in range(dm.n_dofs):
        for e in dm.cells_of(dof):
            assert dof in dm.cell_dofs[e]
    counts = np.bincount(dm.cell_dofs.ravel(), minlength=dm.n_dofs)
    assert np.all(counts >= 1)
    assert sum(len(dm.cells_of(g)) for g in range(dm.n_dofs)) == dm.cell_dofs.size
