import warnings

import numpy as np
import pytest

from kobalab import automorphisms as au
from kobalab.domains import WHP, Ball, Ellipse
from kobalab.dynamics import (
    classify, count_clusters, hyperbolic_from_sequence, limit_set_sample, north_south_check, orbit_table,
    parabolic_check, pingpong_witness, reduced_words, translated_almost_geodesic, translation_length,
)
from kobalab.errors import PreconditionError, SearchFailure

D, B2, E = Ball(1), Ball(2), Ellipse((1, 2))
h = au.h_a(0.5)


def scenarios():
    rot, par = au.rotation(np.pi / 7), au.cayley_translation(1.0)
    return [
        (D, rot, [0.3], "elliptic", None, None),
        (D, h, [0.0], "hyperbolic", [1], [-1]),
        (D, par, [0.0], "parabolic", [1], [1]),
        (B2, au.lift_to_ball(h, 2), [0.1, 0.3], "hyperbolic", [1, 0], [-1, 0]),
        (B2, au.lift_to_ball(par, 2), [0.1, 0.2j], "parabolic", [1, 0], [1, 0]),
        (E, au.webster_from_moebius(E, h), [0.2, 0.3], "hyperbolic", [1, 0], [-1, 0]),
        (E, au.webster_from_moebius(E, rot), [0.3, 0.2], "elliptic", None, None),
    ]


@pytest.mark.parametrize("dom,g,z0,label,lp,lm", scenarios())
def test_classify_scenarios(dom, g, z0, label, lp, lm):
    rep = classify(dom, g, z0)
    assert rep.classification == label
    if lp is not None:
        assert np.linalg.norm(rep.ell_plus - np.array(lp)) < 1e-6
        assert np.linalg.norm(rep.ell_minus - np.array(lm)) < 1e-6


def test_classify_json_shape():
    js = classify(D, h, [0]).to_json()
    assert js["classification"] == "hyperbolic"
    assert set(js) >= {"ell_plus", "ell_minus", "translation_length", "iterations_used", "evidence"}


def test_whp_translation_is_parabolic():
    S = WHP.siegel(2)
    assert classify(S, au.WHPFlow(S, "translation", 1.0)).classification == "parabolic"


def test_translation_length_oracle():
    L = translation_length(D, h, [0], n_max=200)
    assert abs(L.estimate - np.arctanh(0.5)) < 1e-3
    L2 = translation_length(D, au.power(h, 2), [0], n_max=200)
    assert abs(L2.estimate - 2 * L.estimate) < 1e-3
    with pytest.raises(PreconditionError):
        translation_length(D, au.rotation(0.3), [0])


def test_translated_geodesic():
    tg = translated_almost_geodesic(D, h, [0])
    assert tg.certificate == (1.05, 0.1)
    assert tg.equivariance_residual <= 1e-12
    assert max(tg.tail_diameter) < 1e-3


def test_north_south_and_parabolic():
    assert north_south_check(D, h, (0.5, 0.5))["N"] >= 1
    with pytest.raises(PreconditionError):
        north_south_check(D, au.cayley_translation(1.0))
    assert parabolic_check(D, au.cayley_translation(1.0), 0.5)["N"] >= 1


def test_reduced_word_count():
    words = list(reduced_words(2, 6))
    assert len(words) == sum(4 * 3 ** (L - 1) for L in range(1, 7)) == 1456
    assert len(set(words)) == len(words)


def test_pingpong():
    r = au.rotation(np.pi / 2)
    h2 = au.compose(au.compose(r, h), au.inverse(r))
    cert = pingpong_witness(D, h, h2, max_word_len=4)
    assert cert.words_checked == sum(4 * 3 ** (L - 1) for L in range(1, 5))
    assert cert.min_displacement > 1e-6
    with pytest.raises(PreconditionError):
        pingpong_witness(D, h, h)


def test_limit_set_on_ellipse():
    gens = [au.webster_from_moebius(E, h), au.webster_from_moebius(E, au.rotation(1.0))]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pts, info = limit_set_sample(E, gens, 200, seed=0)
    assert np.abs(np.abs(pts[:, 0]) - 1).max() < 1e-3 and np.abs(pts[:, 1]).max() < 1e-3
    assert info["seed"] == 0


def test_limit_set_of_cyclic_group_is_two_points():
    pts, _ = limit_set_sample(D, [h], 100, seed=0)
    assert count_clusters(pts, 0.1) == 2


def test_hyperbolic_from_sequence():
    i, rep = hyperbolic_from_sequence(D, [au.power(h, n) for n in range(1, 6)])
    assert i == 1 and rep.classification == "hyperbolic"
    with pytest.raises(SearchFailure):
        hyperbolic_from_sequence(D, [au.rotation(1 / n) for n in range(1, 5)])


def test_orbit_table_oracle():
    rows = orbit_table(D, h, [0], 3)
    # h^n(0) = tanh(n artanh 0.5)
    for n, row in enumerate(rows):
        assert row[1] == pytest.approx(np.tanh(n * np.arctanh(0.5)))
