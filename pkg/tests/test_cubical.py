import numpy as np
import pytest

from stabcheck.chains import (
    assemble_chain_complex,
    chain_complex_from_cells,
    chain_complex_from_present,
    dump_boundaries,
    reduce_unit_pivots,
)
from stabcheck.cubical import (
    CapacityError,
    Grid,
    cell_dim,
    cell_faces,
    close_top_cubes,
    collapse,
)
from stabcheck.homology import homology
from stabcheck.sigma import CubicalComplex

from helpers import random_top_mask


def test_grid_coordinates_put_origin_on_a_vertex():
    g = Grid(2, 8, 0.5)
    c = g.coords()
    assert c[4] == 0.0 and c[0] == -0.5 and c[-1] == 0.5
    # refinement nests exactly
    assert np.array_equal(Grid(2, 16, 0.5).coords()[::2], c)


def test_cell_dimension_and_faces():
    assert cell_dim((1, 2)) == 1 and cell_dim((1, 1, 0)) == 2
    assert cell_faces((1,)) == [((0,), -1), ((2,), 1)]
    square = dict(cell_faces((1, 1)))
    assert square == {(0, 1): -1, (2, 1): 1, (1, 0): 1, (1, 2): -1}


def test_single_edge_complex():
    cc = chain_complex_from_cells([(1,)], Grid(1, 1, 1.0))
    assert [len(c) for c in cc.cells] == [2, 1]
    assert sorted(cc.matrix(1).toarray().ravel().tolist()) == [-1, 1]


def test_single_square_boundary_squares_to_zero():
    cc = chain_complex_from_cells([(1, 1)], Grid(2, 1, 1.0))
    assert [len(c) for c in cc.cells] == [4, 4, 1]
    d1, d2 = cc.matrix(1).toarray(), cc.matrix(2).toarray()
    assert sorted(d2.ravel().tolist()) == [-1, -1, 1, 1]
    assert not d1.dot(d2).any()


@pytest.mark.parametrize("dim, size", [(2, 6), (3, 4), (4, 3)])
def test_boundary_of_boundary_vanishes(dim, size):
    rng = np.random.default_rng(dim)
    mask = random_top_mask(rng, dim, size, 0.5)
    cc = chain_complex_from_present(close_top_cubes(mask), Grid(dim, size, 1.0))
    for k in range(2, cc.top_dim + 1):
        assert not (cc.matrix(k - 1) @ cc.matrix(k)).toarray().any()
    for k in range(1, cc.top_dim + 1):
        assert set(np.unique(cc.matrix(k).toarray())) <= {-1, 0, 1}


def test_collapse_preserves_homology_and_shrinks():
    rng = np.random.default_rng(11)
    for _ in range(20):
        dim = int(rng.integers(2, 4))
        mask = random_top_mask(rng, dim, 5, rng.uniform(0.3, 0.8))
        if not mask.any():
            continue
        grid = Grid(dim, 5, 1.0)
        present = close_top_cubes(mask)
        small = collapse(present)
        assert not (small & ~present).any()
        full = homology(chain_complex_from_present(present, grid), reduce=False)
        red = homology(chain_complex_from_present(small, grid))
        assert full.betti == red.padded(full.top_dim).betti[:len(full.betti)]


def test_collapse_of_solid_box_is_a_point():
    present = close_top_cubes(np.ones((4, 4, 4), dtype=bool))
    assert collapse(present).sum() == 1


def test_unit_pivot_reduction_is_a_chain_map():
    rng = np.random.default_rng(2)
    mask = random_top_mask(rng, 3, 4, 0.6)
    grid = Grid(3, 4, 1.0)
    cc = chain_complex_from_present(close_top_cubes(mask), grid)
    red = reduce_unit_pivots(cc)
    small = red.complex
    for k in range(1, small.top_dim + 1):
        for cell in small.cells[k]:
            lhs = cc.boundary(red.embed(k, cell), k)
            rhs = red.embed_chain(k - 1, small.boundary({cell: 1}, k))
            assert lhs == rhs


def test_capacity_limit():
    g = Grid(3, 6, 1.0)
    c = CubicalComplex(g, np.ones((6, 6, 6), dtype=bool))
    with pytest.raises(CapacityError):
        assemble_chain_complex(c, max_cells=100)
    with pytest.raises(ValueError):
        assemble_chain_complex(CubicalComplex(g, np.zeros((6, 6, 6), dtype=bool)))


def test_boundary_dump(tmp_path):
    cc = chain_complex_from_cells([(1, 1)], Grid(2, 1, 1.0))
    path = tmp_path / "bd.txt"
    with open(path, "w") as fh:
        dump_boundaries(cc, fh)
    lines = path.read_text().splitlines()
    assert lines[0] == "# degree 1: 4 x 4"
    assert sum(1 for ln in lines if not ln.startswith("#")) == 8 + 4
