import numpy as np
import pytest
from hypothesis import given, strategies as st

from lsmlab.lattice import (GridFunction, LatticeFunction, grid_shape, integral, join, meet,
                            restrict_to_lattice)
from lsmlab.models import Gaussian, UniformBox

points = st.lists(st.integers(-5, 5), min_size=1, max_size=4)


def test_meet_join_examples():
    assert meet((1, 3), (2, 0)) == (1, 0)
    assert join((1, 3), (2, 0)) == (2, 3)


def test_meet_join_dimension_mismatch():
    with pytest.raises(ValueError):
        meet((1, 2), (1, 2, 3))


@given(points.flatmap(lambda p: st.tuples(st.just(p), st.lists(st.integers(-5, 5), min_size=len(p),
                                                                max_size=len(p)))))
def test_meet_join_lattice_laws(pair):
    x, y = pair
    m, j = np.array(meet(x, y)), np.array(join(x, y))
    assert np.all(m <= np.array(x)) and np.all(np.array(x) <= j)
    assert sorted(zip(m + j)) == sorted(zip(np.array(x) + np.array(y)))
    assert meet(x, x) == tuple(x)


def test_lattice_function_evaluates_zero_outside():
    f = LatticeFunction((-1, 0), np.arange(1.0, 7.0).reshape(2, 3))
    assert f((-1, 0)) == 1.0
    assert f((0, 2)) == 6.0
    assert f((5, 5)) == 0.0
    assert f.upper == (0, 2)


def test_lattice_function_rejects_negative_and_high_dimension():
    with pytest.raises(ValueError):
        LatticeFunction.from_values([1.0, -1.0])
    with pytest.raises(ValueError):
        LatticeFunction.from_values(np.ones((2,) * 5))


def test_values_are_read_only():
    f = LatticeFunction.from_values([1.0, 2.0])
    with pytest.raises(ValueError):
        f.values[0] = 3.0


def test_integral_uses_cell_volume():
    g = GridFunction((0.0, 0.0), 0.5, np.ones((3, 3)))
    assert integral(g) == pytest.approx(9 * 0.25)
    assert integral(LatticeFunction.from_values(np.ones((3, 3)))) == 9.0


def test_restrict_to_lattice_gaussian_mass():
    g = restrict_to_lattice(Gaussian.standard(2), [-8, -8], [8, 8], 0.1)
    assert integral(g) == pytest.approx(1.0, abs=1e-10)
    assert g.shape == (161, 161)


def test_restrict_uniform_box_mass():
    g = restrict_to_lattice(UniformBox([0.0], [1.0]), [-0.5], [1.5], 0.001)
    assert integral(g) == pytest.approx(1.0, abs=2e-3)


def test_grid_shape_validation():
    assert grid_shape([0, 0], [1, 2], 0.5) == (3, 5)
    with pytest.raises(ValueError):
        grid_shape([1], [0], 0.1)
