import numpy as np
import pytest

from sandpile.domain import (Configuration, Domain, cshape, create_domain,
                             disk, ellipse, punctured, read_pbm, rectangle,
                             rectangle_with_hole, write_pbm)


def test_rectangle_255_counts():
    d = rectangle(255, 255)
    assert d.num_vertices == 65025
    assert int(d.is_boundary.sum()) == 1016  # enumerated: degree < 4 cells


def test_single_vertex():
    d = rectangle(1, 1)
    assert d.num_vertices == 1
    assert d.degree[0] == 0
    assert d.is_boundary[0]


def test_full_rectangle_degrees():
    d = rectangle(6, 4)
    degrees = np.zeros((4, 6), int)
    degrees[d.cells[:, 0], d.cells[:, 1]] = d.degree
    corners = [degrees[0, 0], degrees[0, 5], degrees[3, 0], degrees[3, 5]]
    assert corners == [2, 2, 2, 2]
    assert degrees[0, 2] == 3 and degrees[2, 0] == 3
    assert degrees[1, 2] == 4


@pytest.mark.parametrize("n,m", [(2, 2), (5, 3), (1, 7), (4, 1), (1, 1)])
def test_boundary_count_formula(n, m):
    d = rectangle(n, m)
    expected = 2 * n + 2 * m - 4 if n >= 2 and m >= 2 else n * m
    assert int(d.is_boundary.sum()) == expected


def test_neighbor_symmetry_and_even_degree_sum():
    d = cshape(15, 15, -2, 4)
    for v in range(d.num_vertices):
        for u in d.nbr[v]:
            if u >= 0:
                assert v in d.nbr[u]
    assert int(d.degree.sum()) % 2 == 0


def test_disk_members():
    d = disk(255)
    i, j = d.lattice_i(), d.lattice_j()
    inside = (i * i + j * j) * 4 < 255 * 255
    assert np.array_equal(d.mask, inside)
    # boundary = cells with a missing neighbor
    assert (d.degree[d.is_boundary] < 4).all()


def test_origin_centering():
    assert rectangle(255, 255).origin == (127, 127)
    assert rectangle(4, 6).origin == (1, 2)
    d = punctured(5, 5)
    assert not d.mask[2, 2]
    assert d.origin == (2, 2)  # origin may be masked out


def test_empty_and_invalid():
    with pytest.raises(ValueError, match="empty domain"):
        Domain(np.zeros((3, 3), bool))
    with pytest.raises(ValueError):
        rectangle(0, 3)
    with pytest.raises(ValueError):
        create_domain("rect:0x5")
    with pytest.raises(ValueError):
        create_domain("blob:3")


def test_descriptors():
    assert create_domain("rect:7x5").num_vertices == 35
    assert create_domain("disk:9") == disk(9)
    hole = create_domain("recthole:9x9:3x3")
    assert hole == rectangle_with_hole(9, 9, 3, 3)
    assert hole.num_vertices == 81 - 9
    assert create_domain("punctured:5x5").num_vertices == 24
    c = create_domain("cshape:21x21:-3:5")
    i, j = c.lattice_i(), c.lattice_j()
    assert np.array_equal(c.mask, (i < -3) | (np.abs(j) > 5))
    e = create_domain("ellipse:31x31:0.2:12")
    assert e == ellipse(31, 31, "0.2", 12)


def test_lattice_coordinates():
    d = rectangle(5, 5)
    v = d.vertex_at(0, 0)
    assert d.cell_coords(v) == (0, 0)
    assert d.cells[v].tolist() == [2, 2]
    assert d.vertex_at(-3, 0) == -1
    assert d.vertex_at(2, -2) == d.vertex_index[0, 4]


def test_extension_ring_rectangle():
    d = rectangle(3, 3)
    ext_cells, pairs = d.extension()
    assert len(ext_cells) == 12  # one off each outward side, no diagonals
    assert len(pairs) == 12
    corner = d.vertex_index[0, 0]
    assert sum(1 for v, _, _ in pairs if v == corner) == 2


def test_extension_shared_cell_nonconvex():
    # u-shape: the notch creates an external cell serving two boundary cells
    mask = np.ones((2, 3), bool)
    mask[1, 1] = False
    d = Domain(mask)
    ext_cells, pairs = d.extension()
    keys = [tuple(e) for e in ext_cells]
    assert len(set(keys)) == len(keys)
    counts = {}
    for _, e, _ in pairs:
        counts[e] = counts.get(e, 0) + 1
    assert max(counts.values()) >= 2


def test_pbm_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    grid = rng.random((9, 7)) < 0.6
    grid[4, 3] = True
    path = tmp_path / "mask.pbm"
    write_pbm(path, grid)
    d = read_pbm(path)
    assert np.array_equal(d.mask, grid)
    d2 = create_domain(f"pbm:{path}")
    assert d2 == d


def test_pbm_p4(tmp_path):
    grid = np.zeros((4, 10), bool)
    grid[1, 2:7] = True
    grid[2, 0] = True
    packed = np.packbits(grid[::-1].astype(np.uint8), axis=1)
    path = tmp_path / "mask.p4"
    with open(path, "wb") as fh:
        fh.write(b"P4\n10 4\n" + packed.tobytes())
    d = read_pbm(path)
    assert np.array_equal(d.mask, grid)


def test_configuration_basics():
    d = rectangle(3, 2)
    c = Configuration.filled(d, 3)
    assert c.is_stable() and c.total() == 18
    c.grid[0, 0] = 4
    assert not c.is_stable()
    flat = c.flat()
    assert np.array_equal(Configuration.from_flat(d, flat).grid, c.grid)
    with pytest.raises(ValueError):
        Configuration(d, np.zeros((3, 3)))


def test_configuration_masked_cells_zeroed():
    d = punctured(3, 3)
    c = Configuration.filled(d, 2)
    assert c.grid[1, 1] == 0
    assert c.total() == 16
