import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_memory.channel import SimpleErrorModel
from floquet_memory.diagnostics import DiagnosticsRequest, evaluate
from floquet_memory.oracle import (WeightedPauliState, build_states_for_diagnostics, log_trace_power, moment,
                                   oracle_diagnostics, weight_multipliers)
from floquet_memory.pauli import PauliString
from floquet_memory.statmech import COEFFICIENTS, BudgetExceeded

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])


def kron(*ms):
    out = np.eye(1)
    for m in ms:
        out = np.kron(out, m)
    return out


def dense_letters(letters):
    return kron(*[{"I": I2, "X": X, "Z": Z}[c] for c in letters])


def dense_state(p, q):
    """Two system qubits, two outcome registers: measure ZZ, X and Z errors, measure XX."""
    rho = kron(np.eye(4) / 4, np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))

    def measure(op, flip):
        plus, minus = (np.eye(16) + op) / 2, (np.eye(16) - op) / 2
        return plus @ rho @ plus + flip @ minus @ rho @ minus @ flip

    rho = measure(dense_letters("ZZII"), dense_letters("IIXI"))
    for err, rate in ((dense_letters("XIII"), p), (dense_letters("IZII"), q)):
        rho = (1 - rate) * rho + rate * err @ rho @ err
    return measure(dense_letters("XXII"), dense_letters("IIIX"))


def oracle_state(p, q):
    s = WeightedPauliState.maximally_mixed(2, 2)
    n = s.n_qubits
    s.measure(PauliString(n, 0, 0b11))
    s.apply_error(PauliString(n, 0b01, 0), p)
    s.apply_error(PauliString(n, 0, 0b10), q)
    s.measure(PauliString(n, 0b11, 0))
    return s


@given(st.lists(st.floats(0.0, 0.5), min_size=4, max_size=4))
@settings(max_examples=20, deadline=None)
def test_moments_match_dense_density_matrices(rates):
    a, b = dense_state(*rates[:2]), dense_state(*rates[2:])
    sa, sb = oracle_state(*rates[:2]), oracle_state(*rates[2:])
    assert abs(moment([sa]).value - 1.0) < 1e-12
    assert abs(moment([sa, sa]).value - np.trace(a @ a)) < 1e-12
    assert abs(moment([sa, sb, sa]).value - np.trace(a @ b @ a)) < 1e-12
    assert abs(moment([sb, sa, sa, sb]).value - np.trace(b @ a @ a @ b)) < 1e-12
    assert np.trace(a @ a) <= 1 + 1e-12


def test_zero_rate_probes_leave_weights(lat11):
    states = build_states_for_diagnostics(lat11, SimpleErrorModel(0.0))
    for g in states.rho_qm.generators:
        assert states.rho_qm.weight(g) == 1.0
    # at p = 0 only uniformly random outcome records remain, so tr rho^3 = (tr rho^2)^2
    assert abs(log_trace_power(states.rho2, 3) - 2 * log_trace_power(states.rho2, 2)) < 1e-12


def test_weight_multipliers(lat22):
    assert weight_multipliers(lat22) == COEFFICIENTS


def test_budget(lat22):
    with pytest.raises(BudgetExceeded):
        states = build_states_for_diagnostics(lat22, SimpleErrorModel(0.1))
        moment([states.rho_qm] * 2, budget=2)


@pytest.mark.parametrize("size", [(1, 1), (2, 2)])
@pytest.mark.parametrize("p", [0.0, 0.02, 0.1, 0.3, 0.5])
def test_oracle_matches_statmech(size, p):
    from floquet_memory.lattice import build_lattice
    lat = build_lattice(*size)
    for n in (2, 3):
        got = oracle_diagnostics(lat, p, n)
        want = evaluate(DiagnosticsRequest(n, p, size))
        assert abs(got["D_em"] - want.d_em) < 1e-10
        assert abs(got["I_c"] - want.i_c) < 1e-10


def test_toric_oracle_small(lat11):
    got = oracle_diagnostics(lat11, 0.02, 3, "toric")
    assert abs(got["D_em"] - evaluate(DiagnosticsRequest(3, 0.02, (1, 1), "toric")).d_em) < 1e-10
    assert abs(oracle_diagnostics(lat11, 0.0, 2, "toric")["D_em"] - math.log(2)) < 1e-12
