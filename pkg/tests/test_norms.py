import math

import numpy as np
import pytest

from plab.errors import HypothesisError, ParameterError
from plab.grid import BoxDomain, GridFunction, ScaleWindow
from plab.kernels import build_lp_system
from plab.norms import (BATTERY_IDS, SpaceSpec, direct_besov, embedding_check, equivalence_report, fm_function,
                        fm_witness, lift_ratios, make_battery, snap_frequency, space_norm)
from plab.spaces import Lebesgue, Morrey
from plab.weights import smoothness_weight

WIN = ScaleWindow(0, 6)


@pytest.fixture(scope="module")
def box():
    return BoxDomain(1, 4.0, 1024)


@pytest.fixture(scope="module")
def battery(box):
    return make_battery(box)


def test_spec_validation():
    sp, w = Lebesgue(2.0), smoothness_weight(1.0)
    with pytest.raises(ParameterError):
        SpaceSpec("X", sp, w)
    with pytest.raises(ParameterError):
        SpaceSpec("B", sp, w, tau=-1)
    with pytest.raises(HypothesisError):
        SpaceSpec("B", sp, w, a=0.5)
    assert SpaceSpec("B", sp, w, a=0.5, check_peetre=False).a == 0.5
    assert SpaceSpec("F", sp, w).a == pytest.approx(sp.N0 + 1 + 1)


def test_battery_ids(battery):
    assert tuple(fid for fid, _ in battery) == BATTERY_IDS
    assert len(battery) == 12
    assert all(np.all(np.isfinite(f.values)) for _, f in battery)


def test_battery_seeded(box):
    a = dict(make_battery(box, seed=1))["random_band"].values
    b = dict(make_battery(box, seed=1))["random_band"].values
    c = dict(make_battery(box, seed=2))["random_band"].values
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_no_peetre_besov_matches_direct_sum(box, battery):
    sys = build_lp_system(box, WIN)
    spec = SpaceSpec("B", Lebesgue(2.0), smoothness_weight(1.0), window=WIN)
    for _, f in battery[:4]:
        ours = space_norm(f, spec, sys, a=np.inf)
        # the tau = 0 cube sup takes the largest orthant, so compare against both halves
        full = direct_besov(f, 1.0, 2.0, 2.0, sys)
        assert full / math.sqrt(2) * (1 - 1e-12) <= ours <= full * (1 + 1e-12)


def test_peetre_dominates_plain(box, battery):
    spec = SpaceSpec("F", Lebesgue(2.0), smoothness_weight(1.0), window=WIN)
    f = battery[1][1]
    assert space_norm(f, spec) >= space_norm(f, spec, a=np.inf)


def test_homogeneity(box, battery):
    spec = SpaceSpec("B", Morrey(2.0, 1.5), smoothness_weight(1.0), window=WIN)
    f = battery[0][1]
    g = GridFunction(box, -3.0 * f.values)
    assert space_norm(g, spec) == pytest.approx(3.0 * space_norm(f, spec), rel=1e-10)


def test_embedding_check(box, battery):
    spec = SpaceSpec("B", Lebesgue(2.0), smoothness_weight(1.0), tau=0.25, window=WIN)
    rep = embedding_check(battery[2][1], spec)
    assert rep.passed and len(rep.checks) == 13


def test_equivalence_report_small(box, battery):
    spec = SpaceSpec("B", Lebesgue(2.0), smoothness_weight(1.0), window=WIN)
    rep = equivalence_report(battery[:3], spec, ("default", "alt_system", "no_peetre"))
    assert rep.spreads["default"] == 1.0
    assert rep.spreads["alt_system"] < 10 and rep.spreads["no_peetre"] < 10
    assert rep.to_tsv().count("\n") == 1 + 9


def test_equivalence_records_hypothesis_errors(box, battery):
    spec = SpaceSpec("B", Lebesgue(2.0), smoothness_weight(1.0), window=WIN)
    from plab.norms import CharConfig
    rep = equivalence_report(battery[:1], spec, ("alt_system",), {"alt_system": CharConfig(options={"m": 1})})
    assert "alt_system" in rep.errors and "alt_system" not in rep.spreads


def test_lift_ratios_bounded(box, battery):
    spec = SpaceSpec("B", Lebesgue(2.0), smoothness_weight(1.0), window=WIN)
    r = lift_ratios(battery[:4], spec, 1.0)
    assert np.all(r > 0.2) and np.all(r < 5)


def test_fm_function_band_limited(box):
    with pytest.raises(ParameterError):
        fm_function(box, 2)
    big = BoxDomain(1, 64.0, 4096)
    f = fm_function(big, 2)
    F = np.abs(np.fft.fft(f.values))
    assert F[big.freq_radius() > 1.0 + 1e-9].max() <= 1e-12 * F.max()
    assert snap_frequency(box, 0.3) == pytest.approx(math.pi / 4)
    assert snap_frequency(box, 2.0) == pytest.approx(3 * math.pi / 4)


def test_fm_witness_small():
    rep = fm_witness(2, 2.0, box=BoxDomain(1, 512.0, 8192))
    assert rep.high_ratio <= 1e-8
    assert rep.rel_error < 0.15
