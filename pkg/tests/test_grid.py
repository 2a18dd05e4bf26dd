import numpy as np
import pytest

from plab.errors import DegenerateBallError, ParameterError, ResolutionError
from plab.grid import (BoxDomain, DyadicCube, GridFunction, ScaleWindow, ball_average, cube_geometry,
                       cube_labels, enumerate_cubes, load_grid, save_grid)


def test_box_validation():
    with pytest.raises(ParameterError):
        BoxDomain(1, 4.0, 1000)
    with pytest.raises(ParameterError):
        BoxDomain(3, 4.0, 64)
    with pytest.raises(ParameterError):
        BoxDomain(1, -1.0, 64)


def test_box_geometry():
    b = BoxDomain(1, 4.0, 4096)
    assert b.h == 2 ** -9
    assert b.finest_level() == 8
    assert b.covering_level() == -2
    assert b.axis()[0] == -4.0


def test_window_check():
    b = BoxDomain(1, 4.0, 1024)
    ScaleWindow(0, 6).check(b)
    with pytest.raises(ResolutionError):
        ScaleWindow(0, 8).check(b)
    with pytest.raises(ParameterError):
        ScaleWindow(3, 1)


def test_cube_geometry():
    corner, side, center = cube_geometry(DyadicCube(2, (1,)))
    assert side == 0.25
    assert np.allclose(corner, [0.25]) and np.allclose(center, [0.375])


def test_cubes_tile_the_box():
    b = BoxDomain(2, 2.0, 64)
    labels, ks = cube_labels(b, 1)
    counts = np.bincount(labels.ravel())
    assert len(ks) == 64 and np.all(counts == counts[0])
    cubes = enumerate_cubes(b, ScaleWindow(0, 1))
    assert len(cubes) == 16 + 64


def test_ball_average():
    b = BoxDomain(1, 4.0, 1024)
    f = GridFunction(b, np.ones(b.shape))
    assert ball_average(f, [0.0], 0.5, 2.0) == pytest.approx(1.0)
    with pytest.raises(DegenerateBallError):
        ball_average(f, [0.0], b.h / 4)


def test_grid_roundtrip(tmp_path):
    b = BoxDomain(2, 1.0, 16)
    v = np.random.default_rng(1).standard_normal(b.shape) + 1j
    save_grid(tmp_path / "g.bin", GridFunction(b, v))
    g = load_grid(tmp_path / "g.bin")
    assert g.domain == b and np.array_equal(g.values, v)


def test_grid_rejects_nonfinite():
    b = BoxDomain(1, 1.0, 8)
    with pytest.raises(ParameterError):
        GridFunction(b, np.full(8, np.nan))
