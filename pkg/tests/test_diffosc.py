import math

import numpy as np
import pytest

from plab.diffosc import (DiffOscConfig, binomial_difference, check_admissible, difference_field, difference_norm,
                          iterated_difference, oscillation, oscillation_field, oscillation_norm)
from plab.errors import AlignmentError, DegenerateBallError, HypothesisError, ParameterError
from plab.grid import BoxDomain, GridFunction, ScaleWindow
from plab.norms import SpaceSpec, make_battery, space_norm
from plab.spaces import Lebesgue
from plab.weights import smoothness_weight, yoneda_weight


@pytest.fixture(scope="module")
def box():
    return BoxDomain(1, 4.0, 1024)


def test_config_validation():
    with pytest.raises(ParameterError):
        DiffOscConfig(M=0)
    with pytest.raises(ParameterError):
        DiffOscConfig(M=1.5)
    with pytest.raises(ParameterError):
        DiffOscConfig(u=0.5)
    with pytest.raises(ParameterError):
        DiffOscConfig(C=0)


def test_differences_agree(box):
    f = GridFunction(box, np.sin(box.axis()) + box.axis() ** 2)
    h = 4 * box.h
    a = iterated_difference(f, h, 3).values
    b = binomial_difference(f, h, 3).values
    assert np.abs(a - b).max() < 1e-12
    with pytest.raises(AlignmentError):
        iterated_difference(f, box.h / 3, 1)


def test_difference_kills_polynomials(box):
    x = box.axis()
    f = GridFunction(box, x ** 2)
    d = iterated_difference(f, 2 * box.h, 3).values
    assert np.abs(d[10:-10]).max() < 1e-9


def test_oscillation_linear(box):
    f = GridFunction.from_callable(box, lambda x: x)
    # best constant for f = x on the grid ball {kh : |k| <= K}: the discrete rms of x
    K = round(0.5 / box.h)
    assert oscillation(f, [0.0], 0.5, 1, 2.0) == pytest.approx(box.h * math.sqrt(K * (K + 1) / 3), rel=1e-9)
    assert oscillation(f, [0.0], 0.5, 1, 2.0) == pytest.approx(0.5 / math.sqrt(3), rel=0.02)
    # degree-1 polynomials reproduce f exactly
    assert oscillation(f, [0.0], 0.5, 2, 2.0) < 1e-10
    assert oscillation(f, [0.0], 0.5, 2, 1.0) < 1e-8
    assert oscillation(f, [0.0], 0.5, 1, math.inf) == pytest.approx(0.5, rel=1e-2)
    with pytest.raises(DegenerateBallError):
        oscillation(f, [0.0], box.h / 2, 2, 2.0)


def test_oscillation_field_matches_pointwise(box):
    g = make_battery(box)[1][1]
    of = oscillation_field(g, 0.25, 2, 2.0)
    i = 512 + 37
    assert of[i] == pytest.approx(oscillation(g, [box.axis()[i]], 0.25, 2, 2.0), rel=1e-8)


def test_difference_field_nonnegative(box):
    g = make_battery(box)[0][1]
    d = difference_field(g, 0.1, 2, 2.0)
    assert d.shape == box.shape and np.all(d >= 0)


def test_admissibility():
    spec = SpaceSpec("B", Lebesgue(2.0), smoothness_weight(1.0), a=0.75, check_peetre=False)
    check_admissible(spec, DiffOscConfig(M=2, a=0.75))
    with pytest.raises(HypothesisError):
        check_admissible(spec, DiffOscConfig(M=1, a=0.75))
    with pytest.raises(HypothesisError):
        check_admissible(spec, DiffOscConfig(M=2, a=1.5))
    ys = SpaceSpec("B", Lebesgue(2.0), yoneda_weight(), a=0.75, check_peetre=False)
    with pytest.raises(HypothesisError):
        check_admissible(ys, DiffOscConfig(M=2, a=0.75))


def test_norms_comparable_to_default(box):
    spec = SpaceSpec("B", Lebesgue(2.0), smoothness_weight(1.0), a=0.75, check_peetre=False,
                     window=ScaleWindow(0, 6))
    cfg = DiffOscConfig(M=2, u=2.0, C=1.0, a=0.75)
    for _, f in make_battery(box)[:3]:
        base = space_norm(f, spec)
        for fn in (difference_norm, oscillation_norm):
            r = fn(f, spec, cfg) / base
            assert 0.05 < r < 20
