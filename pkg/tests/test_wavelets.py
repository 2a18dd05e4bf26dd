import numpy as np
import pytest

from plab.errors import HypothesisError, ParameterError
from plab.grid import BoxDomain, GridFunction, ScaleWindow
from plab.norms import SpaceSpec, make_battery, space_norm
from plab.spaces import Lebesgue
from plab.wavelets import (build_filters, coefficient_levels, filter_moment_residual, forward_transform,
                           holder_lower_bound, inverse_transform, wavelet_space_norm)
from plab.weights import smoothness_weight


@pytest.fixture(scope="module")
def box():
    return BoxDomain(1, 4.0, 1024)


@pytest.mark.parametrize("name", ["bior2.2", "bior4.4", "db2", "db10", "db32"])
def test_perfect_reconstruction(name, box):
    q = build_filters(name)
    assert q.pr_residual() < 1e-10
    f = GridFunction(box, np.random.default_rng(0).standard_normal(box.shape))
    for J in (1, 3, 5):
        g = inverse_transform(forward_transform(f, q, J), q)
        assert np.abs(g.values - f.values).max() < 1e-10
    assert filter_moment_residual(q) < 1e-10


def test_pr_2d():
    b = BoxDomain(2, 2.0, 64)
    q = build_filters("db4")
    f = GridFunction(b, np.random.default_rng(1).standard_normal(b.shape))
    c = forward_transform(f, q, 3)
    assert set(c.orientations()) == {"ad", "da", "dd"}
    assert np.abs(inverse_transform(c, q).values - f.values).max() < 1e-11


def test_budgets():
    q = build_filters("db4")
    assert (q.L, q.L_dual) == (3, 3)
    b = build_filters("bior2.2")
    assert b.L == 1 and b.L_dual == 1
    # db2 has Holder exponent ~0.55; the bound must be positive and not exceed it
    assert 0.2 < holder_lower_bound(None, daubechies_order=2) <= 0.5505


def test_family_selection_and_errors():
    spec = SpaceSpec("B", Lebesgue(2.0), smoothness_weight(1.0))
    q = build_filters(spec=spec, family="db")
    assert q.admissible(spec)
    with pytest.raises(HypothesisError):
        build_filters("db2", spec=spec)
    with pytest.raises(ParameterError):
        build_filters("nope")
    with pytest.raises(ParameterError):
        build_filters(family="nope")


def test_transform_shape_checks(box):
    q = build_filters("db2")
    f = GridFunction(box, np.ones(box.shape))
    with pytest.raises(ParameterError):
        forward_transform(f, q, 11)
    c = forward_transform(f, q, 2)
    with pytest.raises(ParameterError):
        inverse_transform(c, build_filters("db4"))
    # constants have no detail content
    assert max(np.abs(d["d"]).max() for d in c.details) < 1e-12


def test_coefficient_levels_normalisations(box):
    q = build_filters("db4")
    f = make_battery(box)[1][1]
    c = forward_transform(f, q, 4)
    amp = coefficient_levels(c, "amplitude")
    lit = coefficient_levels(c, "literal")
    j = c.j0 + 2
    assert np.allclose(amp["d"][j], lit["d"][j] * 2.0 ** (j / 2))
    with pytest.raises(ParameterError):
        coefficient_levels(c, "bogus")


def test_wavelet_norm_comparable(box):
    spec = SpaceSpec("B", Lebesgue(2.0), smoothness_weight(1.0), window=ScaleWindow(0, 6))
    bat = make_battery(box)[:4]
    r = [wavelet_space_norm(f, spec, family="db") / space_norm(f, spec) for _, f in bat]
    assert max(r) / min(r) < 10
