import math

import numpy as np
import pytest

from plab.errors import ParameterError
from plab.grid import BoxDomain
from plab.norms import make_battery
from plab.weights import smoothness_weight
from plab.spaces import (Amalgam, GeneralizedMorrey, Herz, Lebesgue, Morrey, Orlicz, PathologicalSplit,
                         VariableLebesgue, WeightedLebesgue, fit_exponents, make_space, split_indicator,
                         split_maximal_sweep, verify_axioms, verify_peetre_compat)


@pytest.fixture(scope="module")
def box():
    return BoxDomain(1, 4.0, 1024)


def test_lebesgue_exact(box):
    x = box.axis()
    chi = ((x >= 0) & (x < 1)).astype(float)
    assert Lebesgue(2.0).norm(chi, box) == pytest.approx(1.0)
    g = np.exp(-x ** 2)
    assert Lebesgue(2.0).norm(g, box) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-10)


def test_orlicz_power_matches_lebesgue(box):
    g = np.exp(-box.axis() ** 2)
    assert Orlicz("power", 2.0).norm(g, box) == pytest.approx(Lebesgue(2.0).norm(g, box), rel=1e-9)


def test_morrey_indicator(box):
    x = box.axis()
    chi = ((x >= 0) & (x < 1)).astype(float)
    # p = u: Morrey reduces to L^u on the unit cube indicator
    assert Morrey(2.0, 2.0).norm(chi, box) == pytest.approx(1.0, rel=1e-9)


def test_herz_annuli(box):
    x = box.axis()
    chi = (np.abs(x) <= 2).astype(float)
    assert Herz(2.0, 2.0, 0.0).norm(chi, box) == pytest.approx(math.sqrt(2) + math.sqrt(2), rel=1e-2)


def test_split_indicator_norm(box):
    # exponent 1 below zero: the norm of chi_[-r, 0] is r (+ h for the closed endpoint sample)
    f = split_indicator(box, 0.25)
    assert PathologicalSplit().norm(f, box) == pytest.approx(0.25 + box.h, rel=1e-9)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        Lebesgue(0.0)
    with pytest.raises(ParameterError):
        Morrey(1.5, 2.0)
    with pytest.raises(ParameterError):
        make_space({"kind": "nope"})
    with pytest.raises(ParameterError):
        make_space({"kind": "lebesgue", "p": 2, "bogus": 1})
    assert make_space({"kind": "herz", "p": 2, "q": 1, "alpha": 0.25}).kind == "herz"


@pytest.mark.parametrize("space", [Lebesgue(2.0), Morrey(3.0, 2.0), GeneralizedMorrey(2.0, "power_log", 3.0),
                                   Orlicz("power_log", 2.0), VariableLebesgue(2.0, 1.0), PathologicalSplit(),
                                   WeightedLebesgue(2.0, -0.5), Amalgam(2.0, 2.0, -0.5), Herz(2.0, 2.0, 0.25)])
def test_axioms_L1_to_L5(space, box):
    bat = [g for _, g in make_battery(box)]
    rep = verify_axioms(space, bat)
    for k in ("L1", "L2", "L3", "L4", "L5"):
        assert rep.checks[k]["pass"], (k, rep.checks[k])


def test_morrey_gamma_fit(box):
    fit = fit_exponents(Morrey(2.0, 1.0), box)
    assert fit["gamma_hat"] == pytest.approx(0.5, rel=0.05)


def test_peetre_compat_lebesgue(box):
    bat = [g for _, g in make_battery(box)][:4]
    rep = verify_peetre_compat(Lebesgue(2.0), 1.0, 3.0, smoothness_weight(1.0), 2.0, bat, levels=range(0, 3), n_fields=2)
    assert rep.passed and rep.worst < rep.cap
    with pytest.raises(ParameterError):
        verify_peetre_compat(Lebesgue(2.0), 1.0, 1.5, smoothness_weight(1.0), 2.0, bat)


def test_split_sweep_small():
    d = split_maximal_sweep(BoxDomain(1, 2.0, 2048), exps=range(2, 5))
    assert d["increasing"] and len(d["r"]) == 3
    with pytest.raises(ParameterError):
        split_maximal_sweep(BoxDomain(1, 2.0, 64), exps=range(2, 9))
