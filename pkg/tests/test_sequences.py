import math

import numpy as np
import pytest

from plab.errors import HypothesisError, ParameterError, ResolutionError
from plab.grid import BoxDomain, ScaleWindow
from plab.sequences import (SCALE_KIND, CoefficientField, MixKind, SequenceField, estimate_tau_tilde,
                            geometric_mix, mixed_norm, proper_subspace_witness, tau_collapse_compare)
from plab.spaces import Lebesgue, Morrey
from plab.weights import smoothness_weight


@pytest.fixture(scope="module")
def box():
    return BoxDomain(1, 4.0, 512)


def _field(box, J, seed=0):
    r = np.random.default_rng(seed)
    win = ScaleWindow(0, J)
    return SequenceField(box, win, {j: r.random(box.shape) for j in win.levels})


def test_field_validation(box):
    with pytest.raises(ParameterError):
        SequenceField(box, ScaleWindow(0, 2), {0: np.ones(box.shape)})
    with pytest.raises(ParameterError):
        SequenceField(box, ScaleWindow(0, 0), {0: np.full(box.shape, np.inf)})


def test_single_level_kinds_agree(box):
    # with one level the plain orders give the L-norm and the cube orders give the
    # largest orthant cube norm (dyadic cubes never straddle a coordinate hyperplane)
    G = _field(box, 0)
    sp, w = Lebesgue(2.0), smoothness_weight(0.0)
    full = sp.norm(G.levels[0], box)
    plain = [mixed_norm(G, k, sp, w, 0.0, 2.0) for k in (MixKind.Lw_lq, MixKind.lq_Lw)]
    cube = [mixed_norm(G, k, sp, w, 0.0, 2.0) for k in SCALE_KIND.values()]
    assert np.allclose(plain, full, rtol=1e-12)
    assert np.allclose(cube, cube[0], rtol=1e-12)
    assert full / math.sqrt(2) <= cube[0] <= full


def test_q_monotone_and_lattice(box):
    G = _field(box, 4)
    sp, w = Lebesgue(2.0), smoothness_weight(1.0)
    for kind in SCALE_KIND.values():
        v1, v2, vi = (mixed_norm(G, kind, sp, w, 0.25, q) for q in (1.0, 2.0, math.inf))
        assert v1 >= v2 >= vi
        assert mixed_norm(G.scaled(0.5), kind, sp, w, 0.25, 2.0) <= v2


def test_tau_rejected_for_plain_kinds(box):
    G = _field(box, 2)
    with pytest.raises(ParameterError):
        mixed_norm(G, MixKind.Lw_lq, Lebesgue(2.0), smoothness_weight(0.0), 0.5)
    with pytest.raises(ValueError):
        mixed_norm(G, "not_a_kind", Lebesgue(2.0), smoothness_weight(0.0))


def test_geometric_mix_identity_limit(box):
    G = _field(box, 3)
    H = geometric_mix(G, 60.0, 60.0)
    for j in G.window.levels:
        assert np.allclose(H.levels[j], G.levels[j], rtol=1e-15, atol=1e-15)


def test_sequence_field_roundtrip(tmp_path, box):
    G = _field(box, 2)
    G.save(tmp_path / "g")
    H = SequenceField.load(tmp_path / "g")
    assert all(np.array_equal(G.levels[j], H.levels[j]) for j in G.window.levels)


def test_coefficient_field(tmp_path, box):
    lam = CoefficientField.zeros(box, ScaleWindow(0, 3))
    lam.set(2, (1,), 2.5)
    assert lam.get(2, (1,)) == 2.5
    assert list(lam.nonzero()) == [(2, (1,), 2.5 + 0j)]
    lam.to_jsonl(tmp_path / "c.jsonl")
    back = CoefficientField.from_jsonl(tmp_path / "c.jsonl", box, ScaleWindow(0, 3))
    assert back.get(2, (1,)) == 2.5
    with pytest.raises(ParameterError):
        lam.set(2, (100,), 1.0)
    with pytest.raises(ResolutionError):
        CoefficientField.zeros(box, ScaleWindow(0, 9))


def test_tau_tilde_lebesgue_and_morrey():
    b = BoxDomain(1, 4.0, 4096)
    assert estimate_tau_tilde(Lebesgue(2.0), b) == pytest.approx(0.5, rel=0.02)
    assert estimate_tau_tilde(Morrey(2.0, 1.0), b) == pytest.approx(0.5, rel=0.02)


def test_tau_collapse_hypothesis(box):
    lam = CoefficientField.zeros(box, ScaleWindow(0, 2))
    with pytest.raises(HypothesisError):
        tau_collapse_compare(lam, Lebesgue(2.0), smoothness_weight(1.0), 0.25, 2.0, 2.0, 0.5)


def test_witness_b_norm_bounded():
    b = BoxDomain(1, 2.0, 1024)
    bn, nn = proper_subspace_witness(Lebesgue(1.0), smoothness_weight(0.0), 1.0, 1.0, 4, b, 10.0)
    assert 1 / 3 <= bn <= 3
    assert nn == pytest.approx(5.0, rel=0.05)
