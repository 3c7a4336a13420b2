import math

import pytest
from hypothesis import given, settings, strategies as st

from floquet_memory.diagnostics import (DiagnosticsRequest, evaluate, phase_table, renyi_coherent_info,
                                        renyi_relative_entropy)

LOG2 = math.log(2)

# regression values, independently cross-checked against the Pauli-group oracle
FROZEN = [
    ((2, 2), 0.02, 2, 0.351528625042, -0.115934848572),
    ((2, 2), 0.02, 3, 0.199492814937, 0.606441797854),
    ((2, 2), 0.1, 2, 0.693123846033, -1.386294292046),
    ((1, 1), 0.02, 2, 0.374392951521, -0.681033364316),
]


@pytest.mark.parametrize("size,p,n,d,i", FROZEN)
def test_frozen_values(size, p, n, d, i):
    r = evaluate(DiagnosticsRequest(n, p, size))
    assert abs(r.d_em - d) < 1e-9
    assert abs(r.i_c - i) < 1e-9


def test_limits():
    r = evaluate(DiagnosticsRequest(2, 0.0, (2, 2)))
    assert abs(r.d_em) < 1e-12
    assert abs(r.i_c - 2 * LOG2) < 1e-12
    r = evaluate(DiagnosticsRequest(2, 0.5, (2, 2)))
    assert abs(r.d_em - LOG2) < 1e-12
    assert abs(r.i_c + 2 * LOG2) < 1e-12
    # the toric schedule never exchanges e and m
    assert abs(evaluate(DiagnosticsRequest(2, 0.0, (2, 2), "toric")).d_em - LOG2) < 1e-12
    t = evaluate(DiagnosticsRequest(3, 0.02, (1, 1), "toric"))
    assert abs(t.d_em - 0.627223083344) < 1e-9


def test_phase_table():
    t = phase_table(2, 0.0, 0.5)
    assert t["D_em"]["floquet"] == pytest.approx(0.0, abs=1e-12)
    assert t["D_em"]["toric"] == pytest.approx(LOG2)
    assert t["D_em"]["trivial"] == pytest.approx(LOG2)
    assert t["I_c"]["floquet"] == pytest.approx(2 * LOG2)
    assert t["I_c"]["trivial"] == pytest.approx(-2 * LOG2)


@given(st.floats(0.0, 0.49), st.floats(0.0, 0.49), st.sampled_from([2, 3]))
@settings(max_examples=10, deadline=None)
def test_monotone_in_p(p1, p2, n):
    lo, hi = sorted((p1, p2))
    a = DiagnosticsRequest(n, lo, (1, 1))
    b = DiagnosticsRequest(n, hi, (1, 1))
    assert renyi_relative_entropy(a) <= renyi_relative_entropy(b) + 1e-9
    assert renyi_coherent_info(a) >= renyi_coherent_info(b) - 1e-9
    assert -2 * LOG2 - 1e-9 <= renyi_coherent_info(b) <= 2 * LOG2 + 1e-9
    assert -1e-9 <= renyi_relative_entropy(b) <= LOG2 + 1e-9


def test_defect_free_energies_reported():
    r = evaluate(DiagnosticsRequest(2, 0.05, (2, 2)))
    assert set(r.log_z) == {"R1", "R2", "G1", "G2", "B1", "B2", "B3"}
    assert r.defect_free_energies["em:0"] == pytest.approx(0.0)
    assert r.defect_free_energies["em:1"] > 0


@pytest.mark.parametrize("kwargs", [dict(n=1), dict(p=0.6), dict(variant="color"), dict(rounds=6), dict(size=(0, 2))])
def test_validation(kwargs):
    base = dict(n=2, p=0.1, size=(2, 2))
    base.update(kwargs)
    with pytest.raises(ValueError):
        evaluate(DiagnosticsRequest(**base))
