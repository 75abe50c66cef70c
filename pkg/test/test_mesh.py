"""
Tests for the structured unit-square triangulation.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

import numpy as np
import pytest

from mesh import affine_map, build_unit_square, triangle_affine_map


def test_counts_single_cell():
    mesh = build_unit_square(1)
    assert mesh.n_vertices == 4
    assert mesh.n_triangles == 2
    assert mesh.n_edges == 5
    assert len(mesh.boundary_edges) == 4


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_counts_and_areas(n):
    mesh = build_unit_square(n)
    assert mesh.n_vertices == (n + 1) ** 2
    assert mesh.n_triangles == 2 * n * n
    assert mesh.n_edges == 3 * n * n + 2 * n
    assert len(mesh.boundary_edges) == 4 * n
    areas = mesh.signed_areas()
    assert np.all(areas > 0)
    assert areas.sum() == pytest.approx(1.0, abs=1e-14)
    assert mesh.h == pytest.approx(1.0 / n)


def test_rejects_empty_mesh():
    with pytest.raises(ValueError):
        build_unit_square(0)


def test_diagonal_runs_lower_left_to_upper_right():
    mesh = build_unit_square(1)
    lower, upper = mesh.triangles
    np.testing.assert_array_equal(lower, [0, 1, 3])
    np.testing.assert_array_equal(upper, [0, 3, 2])


def test_boundary_normals_are_unit_and_outward():
    mesh = build_unit_square(4)
    normals = mesh.boundary_normals
    np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-14)
    midpoints = mesh.edge_midpoints()[mesh.boundary_edges]
    assert np.all(np.einsum('ij,ij->i', normals, midpoints - 0.5) > 0)


def test_boundary_vertices():
    mesh = build_unit_square(3)
    expected = np.flatnonzero((mesh.vertices == 0.0).any(axis=1) | (mesh.vertices == 1.0).any(axis=1))
    np.testing.assert_array_equal(mesh.boundary_vertices(), expected)


def test_edge_owners():
    mesh = build_unit_square(3)
    interior = np.setdiff1d(np.arange(mesh.n_edges), mesh.boundary_edges)
    assert np.all(mesh.edge_owners[interior] >= 0)
    assert np.all(mesh.edge_owners[mesh.boundary_edges, 1] == -1)


def test_reference_triangle_maps_to_itself():
    jac, shift, det = triangle_affine_map([[0, 0], [1, 0], [0, 1]])
    np.testing.assert_allclose(jac, np.eye(2))
    np.testing.assert_allclose(shift, 0.0)
    assert det == pytest.approx(1.0)


def test_affine_map_det_is_twice_area():
    mesh = build_unit_square(4)
    _, _, det = affine_map(mesh, 5)
    assert det == pytest.approx(2 * mesh.signed_areas()[5])
    with pytest.raises(IndexError):
        affine_map(mesh, mesh.n_triangles)


def test_dump(tmp_path):
    mesh = build_unit_square(2)
    path = mesh.dump(tmp_path / "mesh.txt")
    lines = path.read_text().splitlines()
    assert len(lines) == mesh.n_vertices + mesh.n_triangles
    assert lines[-1].split() == [str(v) for v in mesh.triangles[-1]]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
