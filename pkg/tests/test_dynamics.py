"""Hamiltonian, dissipator, master-equation and trajectory checks."""

import json
import math

import numpy as np
import pytest

from subradiant import rddi
from subradiant.dynamics import (
    Atom,
    FieldSpec,
    SystemModel,
    as_density,
    build_dissipator,
    build_hamiltonian,
    check_state,
    dimer_ket,
    evolve_conditional,
    evolve_lindblad,
    events_to_csv,
    monte_carlo_trajectories,
    no_decay,
    populations,
    state_from_json,
    state_to_json,
    two_dimer_ket,
)
from subradiant.exceptions import InvalidStateError, StiffnessError
from subradiant.geometry import dimer_model, two_dimer_model

ZETA = 0.02


def single_atom(fields=(), detuning=0.0):
    return SystemModel((Atom((0, 0, 0), detuning),), fields=tuple(fields))


def excited_pop(rho):
    return float(np.real(as_density(rho)[1, 1]))


# ---------------------------------------------------------------- Hamiltonian


def test_dimer_hamiltonian_spectrum():
    m = dimer_model(ZETA)
    h = build_hamiltonian(m)
    assert np.allclose(h, h.conj().T, atol=1e-12)
    d = rddi.coupling_coefficients(ZETA).delta
    ev = np.sort(np.linalg.eigvalsh(h))
    assert np.allclose(ev, [-d, 0, 0, d], rtol=1e-13, atol=1e-9)


def test_rabi_cycle_single_atom():
    om = 2.0
    m = single_atom([FieldSpec(om)])
    g = np.array([1, 0], dtype=complex)
    half = evolve_lindblad(g, m, math.pi / om, decay=no_decay(m))
    full = evolve_lindblad(g, m, 2 * math.pi / om, decay=no_decay(m))
    assert excited_pop(half) == pytest.approx(1.0, abs=1e-10)
    assert excited_pop(full) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("omega", [30.0, 2.5 - 1.0j])
def test_drive_matrix_elements_match_dimer_couplings(omega):
    m = dimer_model(ZETA).with_fields(FieldSpec(omega, k_hat=(1, 0, 0)))
    h = build_hamiltonian(m) - build_hamiltonian(dimer_model(ZETA))
    f = rddi.field_dimer_couplings(omega, ZETA, 0.0)
    g = dimer_ket("G")
    assert np.vdot(dimer_ket("+"), h @ g) == pytest.approx(f.omega_plus / 2, rel=1e-12)
    assert np.vdot(dimer_ket("-"), h @ g) == pytest.approx(f.omega_minus / 2, rel=1e-12)


def test_hamiltonian_hermitian_two_dimers():
    m = two_dimer_model(ZETA, 0.1, detunings=(3.0, -3.0)).with_fields(
        FieldSpec(30.0, detuning=1.0, k_hat=(0, 1, 0))
    )
    for t in (0.0, 0.37, 2.0):
        h = build_hamiltonian(m, t)
        assert np.max(np.abs(h - h.conj().T)) <= 1e-12 * np.max(np.abs(h))


# ---------------------------------------------------------------- dissipator


def test_dimer_channels():
    d = build_dissipator(dimer_model(ZETA))
    c = rddi.coupling_coefficients(ZETA)
    assert d.rates[0] == pytest.approx(c.gamma_minus, rel=1e-6)
    assert d.rates[1] == pytest.approx(c.gamma_plus, rel=1e-12)
    assert d.rates[0] == pytest.approx(8e-5, rel=0.05)


def test_far_dimer_channels_independent():
    d = build_dissipator(dimer_model(1e5))
    assert np.allclose(d.rates, [1.0, 1.0], atol=1e-4)


def test_two_dimer_rates_trace():
    d = build_dissipator(two_dimer_model(ZETA, 0.1))
    assert d.gamma_matrix.shape == (4, 4)
    assert np.sum(d.rates) == pytest.approx(4.0, rel=1e-12)
    assert np.all(d.rates >= -1e-12)


# ---------------------------------------------------------------- master equation


def test_single_atom_decay():
    e = np.array([0, 1], dtype=complex)
    m = single_atom()
    for t in (0.1, 1.0, 4.0):
        assert excited_pop(evolve_lindblad(e, m, t)) == pytest.approx(math.exp(-t), abs=1e-6)


def test_subradiant_decay_fit():
    m = dimer_model(ZETA)
    ts = np.linspace(0, 1e3, 11)
    rho = as_density(dimer_ket("-"))
    pops = [1.0]
    for a, b in zip(ts[:-1], ts[1:]):
        rho = evolve_lindblad(rho, m, b - a)
        pops.append(populations(rho, "dimer")["-"])
    rate = -np.polyfit(ts, np.log(pops), 1)[0]
    assert rate == pytest.approx(8e-5, rel=0.05)
    assert rate == pytest.approx(rddi.coupling_coefficients(ZETA).gamma_minus, rel=0.01)


def test_superradiant_decay():
    m = dimer_model(ZETA)
    rho = evolve_lindblad(dimer_ket("+"), m, 1.5)
    rate = -math.log(populations(rho, "dimer")["+"]) / 1.5
    assert rate == pytest.approx(rddi.coupling_coefficients(ZETA).gamma_plus, rel=1e-6)
    assert rate == pytest.approx(2.0, rel=1e-3)


@pytest.mark.parametrize(
    "model,state",
    [
        (
            dimer_model(ZETA, frame_frequency=-rddi.coupling_coefficients(ZETA).delta).with_fields(
                FieldSpec(60.0, -rddi.coupling_coefficients(ZETA).delta)
            ),
            dimer_ket("G"),
        ),
        (dimer_model(ZETA), (dimer_ket("-") + dimer_ket("E")) / math.sqrt(2)),
        (two_dimer_model(ZETA, 0.1), two_dimer_ket("-", "G")),
    ],
)
def test_trace_and_positivity(model, state):
    rho = as_density(state)
    for _ in range(4):
        rho = evolve_lindblad(rho, model, 250.0)
        assert abs(np.trace(rho).real - 1.0) <= 1e-9
        assert np.linalg.eigvalsh(rho)[0] >= -1e-10
        assert np.max(np.abs(rho - rho.conj().T)) <= 1e-12


def test_frame_invariance():
    # moving the reference frequency shifts frame, laser and atoms together
    def model(shift):
        atoms = (Atom((0, 0, 0), 0.3 + shift), Atom((-ZETA, 0, 0), -0.2 + shift))
        field = FieldSpec(3.0, 1.1 + shift, k_hat=(1, 0, 0))
        return SystemModel(atoms, (field,), frame_frequency=1.1 + shift, dipole=(0, 0, 1))

    psi = dimer_ket("-")
    a = populations(evolve_lindblad(psi, model(0.0), 3.0), "dimer")
    b = populations(evolve_lindblad(psi, model(-250.0), 3.0), "dimer")
    for k in a:
        assert a[k] == pytest.approx(b[k], abs=1e-9)


def test_time_dependent_path_matches_exact():
    # a field detuned from the frame takes the adaptive path; moving the
    # frame onto it makes the same physics static
    om, det = 1.5, 0.8
    td = single_atom([FieldSpec(om, det)])
    st = td.with_frame(det)
    g = np.array([1, 0], dtype=complex)
    a = evolve_lindblad(g, td, 5.0, tolerance=1e-11)
    b = evolve_lindblad(g, st, 5.0)
    assert excited_pop(a) == pytest.approx(excited_pop(b), abs=1e-8)


def test_stiffness_error():
    m = dimer_model(ZETA).with_fields(FieldSpec(30.0, 7.0))
    with pytest.raises(StiffnessError, match="frame"):
        evolve_lindblad(dimer_ket("G"), m, 10.0, max_steps=10_000)


def test_negative_duration_rejected():
    with pytest.raises(ValueError):
        evolve_lindblad(dimer_ket("G"), dimer_model(ZETA), -1.0)


# ---------------------------------------------------------------- conditional


def test_ground_is_dark():
    psi, surv = evolve_conditional(dimer_ket("G"), dimer_model(ZETA), 100.0)
    assert surv == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(psi, dimer_ket("G"))


@pytest.mark.parametrize("t", [10.0, 1e3, 1e4])
def test_subradiant_survival(t):
    _, surv = evolve_conditional(dimer_ket("-"), dimer_model(ZETA), t)
    assert surv == pytest.approx(math.exp(-rddi.coupling_coefficients(ZETA).gamma_minus * t), abs=1e-6)


# ---------------------------------------------------------------- trajectories


def test_ground_trajectories_silent():
    recs = monte_carlo_trajectories(dimer_ket("G"), dimer_model(ZETA), 50.0, 50, seed=1)
    assert all(not r.emission_events for r in recs)


def driven_atom(om=2.0):
    return single_atom([FieldSpec(om)])


def test_monte_carlo_matches_lindblad():
    m, t, n = driven_atom(), 2.3, 10_000
    g = np.array([1, 0], dtype=complex)
    recs = monte_carlo_trajectories(g, m, t, n, seed=11)
    pe = np.array([abs(r.final_state[1]) ** 2 / np.vdot(r.final_state, r.final_state).real for r in recs])
    want = excited_pop(evolve_lindblad(g, m, t))
    assert abs(pe.mean() - want) <= 3 * pe.std(ddof=1) / math.sqrt(n)


def test_no_jump_fraction_and_state():
    m, t, n = driven_atom(), 1.2, 10_000
    g = np.array([1, 0], dtype=complex)
    recs = monte_carlo_trajectories(g, m, t, n, seed=5)
    psi, surv = evolve_conditional(g, m, t)
    frac = np.mean([not r.emission_events for r in recs])
    assert abs(frac - surv) <= 3 * math.sqrt(surv * (1 - surv) / n)
    target = psi / np.linalg.norm(psi)
    silent = [r.final_state for r in recs if not r.emission_events]
    for s in silent[:20]:
        s = s / np.linalg.norm(s)
        assert abs(np.vdot(target, s)) ** 2 == pytest.approx(1.0, abs=1e-8)


def test_saturated_detection_rate():
    eta, om, t, n, burn = 0.5, 20.0, 120.0, 100, 20.0
    recs = monte_carlo_trajectories(np.array([1, 0], dtype=complex), driven_atom(om), t, n, seed=3, detector_efficiency=eta)
    counts = sum(sum(1 for (tt, _) in r.detected_events if tt > burn) for r in recs)
    rate = counts / (n * (t - burn))
    assert rate == pytest.approx(eta / 2, rel=0.05)


def test_trajectory_record_invariants():
    recs = monte_carlo_trajectories(np.array([1, 0], dtype=complex), driven_atom(5.0), 10.0, 40, seed=2, detector_efficiency=0.4)
    for r in recs:
        times = [t for t, _ in r.emission_events]
        assert all(b > a for a, b in zip(times, times[1:]))
        assert set(r.detected_events) <= set(r.emission_events)


def test_seed_reproducibility_and_parallel_agreement():
    args = (dimer_ket("-"), dimer_model(ZETA).with_fields(FieldSpec(10.0, rddi.coupling_coefficients(ZETA).delta)), 2.0, 30)
    m = args[1].with_frame(args[1].fields[0].detuning)
    a = monte_carlo_trajectories(args[0], m, args[2], args[3], seed=9, detector_efficiency=0.3)
    b = monte_carlo_trajectories(args[0], m, args[2], args[3], seed=9, detector_efficiency=0.3)
    c = monte_carlo_trajectories(args[0], m, args[2], args[3], seed=9, detector_efficiency=0.3, n_jobs=2)
    assert events_to_csv(a) == events_to_csv(b) == events_to_csv(c)
    d = monte_carlo_trajectories(args[0], m, args[2], args[3], seed=10, detector_efficiency=0.3)
    assert events_to_csv(a) != events_to_csv(d)


def test_events_csv_header():
    assert events_to_csv([]).splitlines()[0] == "trajectory_id,time,channel,detected"


# ---------------------------------------------------------------- states


def test_dimer_populations_examples():
    e1g2 = np.zeros(4, dtype=complex)
    e1g2[1] = 1.0
    p = populations(e1g2, "dimer")
    assert p["+"] == pytest.approx(0.5) and p["-"] == pytest.approx(0.5)
    minus = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    assert populations(minus, "dimer")["-"] == pytest.approx(1.0)
    p = populations(two_dimer_ket("+", "G"), "two_dimer")
    assert p["M"] == pytest.approx(0.5) and p["P"] == pytest.approx(0.5)


def test_populations_sum_to_trace(rng):
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    v *= 0.8 / np.linalg.norm(v)
    for basis in ("bare", "two_dimer", "dimer_product"):
        assert sum(populations(v, basis).values()) == pytest.approx(0.64)
        assert sum(populations(as_density(v), basis).values()) == pytest.approx(0.64)
    with pytest.raises(ValueError):
        populations(v, "dimer")


def test_state_validation():
    with pytest.raises(InvalidStateError):
        check_state(np.ones(3))
    with pytest.raises(InvalidStateError):
        check_state(np.array([1.0, 1.0]))
    with pytest.raises(InvalidStateError):
        check_state(np.diag([1.2, -0.2]))
    with pytest.raises(InvalidStateError):
        check_state(np.array([[0.5, 0.5], [0.0, 0.5]]))


def test_state_json_roundtrip():
    psi = (dimer_ket("-") + 1j * dimer_ket("G")) / math.sqrt(2)
    text = state_to_json(psi, "dimer")
    doc = json.loads(text)
    assert "labels" in json.dumps(doc) or "basis" in doc
    assert np.allclose(state_from_json(text), psi)
    rho = as_density(psi)
    assert np.allclose(state_from_json(state_to_json(rho)), rho)
