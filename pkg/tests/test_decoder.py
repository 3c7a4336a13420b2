import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_memory.channel import SimpleErrorModel
from floquet_memory.circuit import run_trial
from floquet_memory.decoder import (CLASSES, RbimInstance, boundary, class_probabilities_exact,
                                    class_probabilities_rbim, matching_decode_color, ml_decode, ml_decode_color,
                                    ml_fidelity, rbim_instance, reference_string, sample_string)
from floquet_memory.lattice import COLORS, build_lattice, string_class, super_cycle, superlattice
from floquet_memory.statmech import nishimori_coupling


def random_defects(lat, color, rng):
    n = superlattice(lat, color).n_vertices
    k = 2 * int(rng.integers(0, n // 2 + 1))
    return set(int(x) for x in rng.choice(n, size=k, replace=False))


def test_reference_string_basics(lat22):
    assert reference_string(lat22, "B", set()) == set()
    sl = superlattice(lat22, "B")
    a, c = sl.superedge_ends[0]
    assert reference_string(lat22, "B", {a, c}) == {sl.superedges[0]}
    diff = reference_string(lat22, "B", {a, c}, (1, 0)) ^ reference_string(lat22, "B", {a, c})
    assert diff == set(super_cycle(lat22, 0, "B"))
    with pytest.raises(ValueError):
        reference_string(lat22, "B", {a})


@given(st.integers(0, 10 ** 6), st.sampled_from(COLORS), st.sampled_from([0.01, 0.05, 0.2]))
@settings(max_examples=20, deadline=None)
def test_reference_boundary_and_class_partition(seed, color, pt):
    lat = build_lattice(2, 2)
    d = random_defects(lat, color, np.random.default_rng(seed))
    assert boundary(lat, color, reference_string(lat, color, d)) == d
    probs = class_probabilities_exact(lat, color, d, pt)
    assert all(math.isfinite(v) for v in probs.log_probs.values())
    # recovery in the argmax class has the observed boundary
    kappa, rec, _ = ml_decode_color(lat, color, d, pt)
    assert boundary(lat, color, rec) == d


def test_exact_limits(lat22):
    probs = class_probabilities_exact(lat22, "B", set(), 1e-6)
    assert probs.ratios()[(0, 0)] > 1 - 1e-4
    rng = np.random.default_rng(3)
    for _ in range(5):
        r = class_probabilities_exact(lat22, "G", random_defects(lat22, "G", rng), 0.5).ratios()
        assert all(abs(v - 0.25) < 1e-12 for v in r.values())


@pytest.mark.parametrize("pt", [0.01, 0.05, 0.1, 0.3, 0.5])
def test_exact_equals_rbim(lat22, pt):
    rng = np.random.default_rng(int(pt * 1000))
    for k in range(4):
        color = COLORS[k % 3]
        d = random_defects(lat22, color, rng)
        a = class_probabilities_exact(lat22, color, d, pt).log_probs
        b = class_probabilities_rbim(lat22, color, d, pt).log_probs
        for kappa in CLASSES:
            assert abs(a[kappa] - b[kappa]) < 1e-10


def test_rbim_instance_limits():
    inst = RbimInstance([0, 1], [(0, 1)], [0], np.array([1.0]), 0.0)
    assert math.isclose(inst.log_partition(), 2 * math.log(2))
    j = 0.7
    plus = RbimInstance([0, 1], [(0, 1)], [0], np.array([1.0]), j).log_partition()
    assert math.isclose(plus, math.log(4 * math.cosh(j)))
    lat = build_lattice(2, 2)
    e = lat.edges_of_color("B")[0]
    flipped = rbim_instance(lat, "B", {e}, 0.1)
    assert flipped.coupling == nishimori_coupling(0.1)
    assert flipped.log_partition() < rbim_instance(lat, "B", set(), 0.1).log_partition()
    assert math.isclose(math.exp(-2 * nishimori_coupling(0.1)), 0.1 / 0.9)


def test_ml_decode_empty_and_history(lat22):
    assert ml_decode_color(lat22, "R", set(), 0.05)[0] == (0, 0)
    out = run_trial(lat22, SimpleErrorModel(0.0), 1, seed=0)
    assert all(k == (0, 0) and not rec for k, rec in ml_decode(lat22, out.history, 0.01).values())


def test_fidelity_limits(lat22):
    assert ml_fidelity(lat22, 0.0, 20, seed=1).fidelity == 1.0
    half = ml_fidelity(lat22, 0.5, 30, seed=2)
    assert abs(half.fidelity - 0.25) < 1e-12


def test_fidelity_monotone(lat22):
    grid = [0.0, 0.005, 0.01, 0.02, 0.05]
    ests = [ml_fidelity(lat22, p, 400, seed=5) for p in grid]
    for a, b in zip(ests, ests[1:]):
        assert b.fidelity <= a.ci[1] and a.fidelity >= b.ci[0]


def test_matching_adjacent_and_zero(lat22):
    sl = superlattice(lat22, "B")
    a, c = sl.superedge_ends[2]
    kappa, rec = matching_decode_color(lat22, "B", {a, c})
    assert rec == {sl.superedges[2]} and kappa == (0, 0)
    assert matching_decode_color(lat22, "B", set()) == ((0, 0), set())


@pytest.mark.slow
def test_matching_agrees_with_ml_far_below_threshold():
    lat = build_lattice(3, 3)
    rng = np.random.default_rng(11)
    agree = wins_ml = wins_mw = 0
    trials = 2000
    for _ in range(trials):
        s = sample_string(lat, "B", 0.01, rng)
        d = boundary(lat, "B", s)
        k_ml, rec_ml, probs = ml_decode_color(lat, "B", d, 0.01)
        k_mw, rec_mw = matching_decode_color(lat, "B", d)
        agree += string_class(lat, "B", rec_ml ^ rec_mw) == (0, 0)
        wins_ml += string_class(lat, "B", s ^ rec_ml) == (0, 0)
        wins_mw += string_class(lat, "B", s ^ rec_mw) == (0, 0)
    assert agree / trials > 0.95
    assert wins_ml >= wins_mw - 2 * math.sqrt(trials * 0.01)
