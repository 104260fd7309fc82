import math

import numpy as np
import pytest

from finegrain.games import box_certainties, box_value, classical_value, make_chsh
from finegrain.models import (
    CHSH_STRINGS,
    NoSignallingBox,
    arc_overlap,
    deterministic_box,
    is_no_signalling,
    lhv_game_value,
    lhv_model,
    pr_box,
    uniform_box,
)
from finegrain.steering import Ensemble, ensembles_consistent
from finegrain.uncertainty import MeasurementSet, zeta

THETAS = np.linspace(0.0, math.pi, 100)


def sampled_overlap(a0, la, b0, lb, samples=200_000):
    """Quadrature oracle: fraction of a fine grid lying in both arcs."""
    grid = (np.arange(samples) + 0.5) * (2 * math.pi / samples)
    in_a = ((grid - a0) % (2 * math.pi)) < la
    in_b = ((grid - b0) % (2 * math.pi)) < lb
    return np.count_nonzero(in_a & in_b) * 2 * math.pi / samples


def test_pr_box_marginals_uniform():
    box = pr_box()
    np.testing.assert_array_equal(box.alice_marginals(), 0.5)
    np.testing.assert_array_equal(box.bob_marginals(), 0.5)


def test_pr_box_is_no_signalling():
    ok, violation = is_no_signalling(pr_box())
    assert ok and violation <= 1e-15


def test_pr_box_certainties():
    cert = box_certainties(make_chsh(), pr_box())
    assert sorted(cert.values()) == [1.0, 1.0, 1.0, 1.0]


def test_signalling_box_detected():
    # Bob's outcome copies Alice's setting
    table = np.zeros((2, 2, 2, 2))
    for s in range(2):
        for t in range(2):
            table[s, t, 0, s] = 1.0
    ok, violation = is_no_signalling(table)
    assert not ok
    assert violation == pytest.approx(1.0)


def test_alice_answer_equal_to_bob_setting_signals():
    table = np.zeros((2, 2, 2, 2))
    for s in range(2):
        for t in range(2):
            table[s, t, t, 0] = 1.0
    ok, violation = is_no_signalling(NoSignallingBox(table))
    assert not ok and violation == pytest.approx(1.0)


def test_local_deterministic_box_does_not_signal():
    # a = s, b = 0: Alice's answer depends on her own setting only
    table = np.zeros((2, 2, 2, 2))
    for s in range(2):
        for t in range(2):
            table[s, t, s, 0] = 1.0
    assert is_no_signalling(table) == (True, 0.0)


def test_malformed_tables():
    with pytest.raises(ValueError):
        is_no_signalling(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        NoSignallingBox(np.full((2, 2, 2, 2), 0.3))
    with pytest.raises(ValueError):
        NoSignallingBox(np.zeros((2, 2, 3, 2)))


def test_box_json_round_trip():
    box = pr_box()
    doc = box.to_json()
    assert doc["table"]["1,1"] == [[0.0, 0.5], [0.5, 0.0]]
    back = NoSignallingBox.from_json(doc)
    np.testing.assert_array_equal(back.table, box.table)


def test_uniform_and_deterministic_boxes():
    assert is_no_signalling(uniform_box(3, 2))[0]
    box = deterministic_box([1, 0], [0, 1, 1])
    assert box.p(1, 1, 0, 2) == 1.0
    assert is_no_signalling(box)[0]


@pytest.mark.parametrize("args", [
    (0.0, math.pi, 0.0, math.pi),
    (0.0, math.pi, math.pi, math.pi),
    (1.0, math.pi, 0.5, math.pi),
    (5.5, math.pi, 0.3, math.pi),
    (6.0, 2.0, 1.0, 0.5),
    (0.2, 2 * math.pi, 3.0, 1.0),
])
def test_arc_overlap_matches_quadrature(args):
    assert arc_overlap(*args) == pytest.approx(sampled_overlap(*args), abs=1e-4)


def test_lhv_value_closed_form():
    for theta in (0.0, math.pi / 2, math.pi):
        assert lhv_game_value(theta) == pytest.approx(0.75, abs=1e-15)
    with pytest.raises(ValueError):
        lhv_game_value(4.0)


@pytest.mark.parametrize("theta", THETAS[::11])
def test_lhv_model_box(theta):
    box, model = lhv_model(theta)
    assert box_value(make_chsh(), box).value == pytest.approx(0.75, abs=1e-12)
    ok, violation = is_no_signalling(box)
    assert ok and violation <= 1e-12
    assert box_value(make_chsh(), box).value <= classical_value(make_chsh()).value + 1e-12
    z = model.zetas
    assert z["00"] == pytest.approx(1 - theta / (2 * math.pi), abs=1e-15)
    assert z["11"] == pytest.approx(1 - theta / (2 * math.pi), abs=1e-15)
    assert z["01"] == pytest.approx(1 - (math.pi - theta) / (2 * math.pi), abs=1e-15)
    assert z["10"] == pytest.approx(1 - (math.pi - theta) / (2 * math.pi), abs=1e-15)


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.5])
def test_lhv_arcs_partition_circle(theta):
    _, model = lhv_model(theta)
    arcs = model.arcs
    for s in range(2):
        a0, a1 = arcs[(s, 0)], arcs[(s, 1)]
        assert a0[1] == pytest.approx(a1[0])
        assert arc_overlap(a0[0], math.pi, a1[0], math.pi) == pytest.approx(0.0, abs=1e-12)
    assert sum(model.cell_weights(0.0, 2 * math.pi)) == pytest.approx(1.0)


def test_lhv_rejects_out_of_range_theta():
    with pytest.raises(ValueError):
        lhv_model(-0.1)


@pytest.mark.parametrize("theta", [0.4, 1.3, 2.9])
def test_lhv_steered_states_consistent_and_certain(theta):
    _, model = lhv_model(theta)
    states = model.steered_states()
    ensembles = [Ensemble((0.5, 0.5), (states[(s, 0)], states[(s, 1)])) for s in range(2)]
    assert ensembles_consistent(ensembles).consistent
    # certainty of each steered hidden-variable state equals the arc formula
    meas = MeasurementSet(tuple(model.bob_effects()), [0.5, 0.5])
    for sa, x in CHSH_STRINGS.items():
        assert meas.certainty(states[sa], x) == pytest.approx(model.certainty(*sa), abs=1e-12)
        # the theory's unrestricted bound is at least as large as the steerable one
        assert zeta(meas, x, theory="classical")[0] >= model.certainty(*sa) - 1e-12
