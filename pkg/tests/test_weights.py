import numpy as np
import pytest

from plab.errors import ParameterError
from plab.grid import BoxDomain, ScaleWindow
from plab.weights import (check_weight_class, derive_weight, make_weight, smoothness_weight, spatial_weight,
                          yoneda_weight)


def test_smoothness_weight_values():
    w = smoothness_weight(1.5)
    assert w.level_factor(2) == 2.0 ** 3
    assert (w.alpha1, w.alpha2, w.alpha3, w.star) == (1.5, 1.5, 0.0, True)
    with pytest.raises(ParameterError):
        smoothness_weight(-1.0, star=True)
    neg = smoothness_weight(-1.0)
    assert (neg.alpha1, neg.alpha2, neg.star) == (1.0, 0.0, False)


def test_make_weight():
    assert make_weight({"kind": "smoothness", "s": 2.0}).scale_exp == 2.0
    assert make_weight({"kind": "constant"}).scale_exp == 0.0
    with pytest.raises(ParameterError):
        make_weight({"kind": "bogus"})
    with pytest.raises(ParameterError):
        make_weight({"kind": "smoothness", "t": 1})


@pytest.mark.parametrize("w", [smoothness_weight(1.0), smoothness_weight(-0.5), yoneda_weight(),
                               spatial_weight(1.0, 0.5)])
def test_declared_class_certified(w):
    rep = check_weight_class(w, ScaleWindow(0, 8), BoxDomain(1, 4.0, 1024))
    assert rep.passed, rep
    assert rep.C_W1 <= 2.0 and rep.C_W2 <= 2.0


def test_understated_class_fails():
    w = smoothness_weight(2.0)
    bad = type(w)(**dict(w.__dict__, alpha2=0.5))
    rep = check_weight_class(bad, ScaleWindow(0, 8), BoxDomain(1, 4.0, 1024))
    assert not rep.passed


def test_derive_lift_and_collapse():
    w = smoothness_weight(1.0)
    lifted = derive_weight(w, "lift", s=1.0)
    assert lifted.scale_exp == 0.0
    assert derive_weight(w, "lift", s=0) is w
    c = derive_weight(w, "tau_collapse", tau=1.0, tau_tilde=0.5, dim=1)
    assert c.scale_exp == pytest.approx(1.5)
    s = derive_weight(w, "sobolev", tau=0.0, gamma=0.5, delta=0.0)
    assert s.scale_exp == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        derive_weight(w, "nope")


def test_spatial_weight_on_grid():
    box = BoxDomain(1, 4.0, 64)
    w = spatial_weight(1.0, 1.0)
    g = w.on_grid(box, 2)
    assert np.allclose(g, 4.0 * (1 + np.abs(box.axis())))
