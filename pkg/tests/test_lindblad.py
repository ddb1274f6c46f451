import math

import numpy as np
import pytest
from conftest import random_density, random_hermitian

from atsim.linalg3 import NumericalError
from atsim.lindblad import (
    DecoherenceParams,
    LindbladOp,
    coherence_damping_matrix,
    dephasing_level_rates,
    dissipators_from_params,
    evolve_rk4,
    lindblad_rhs,
    make_dephasing,
    make_relaxation,
    real8_to_rho,
    real_ode_rhs,
    rho_to_real8,
    rk4_step,
    steady_state,
)
from atsim.model import DriveParams, probe_resonance, rotating_frame_hamiltonian

RHO0 = np.diag([1.0, 0.0, 0.0]).astype(complex)


def s5_decoherence():
    return DecoherenceParams(gamma1=0.0784, gamma2=0.0784, gamma3=0.1568)


# --- dissipator construction -------------------------------------------------


def test_make_dephasing_zero_rates_contribute_nothing():
    ops = make_dephasing([(0, 0.0), (1, 0.0), (2, 0.0)])
    rng = np.random.default_rng(1)
    rho = random_density(rng)
    np.testing.assert_allclose(
        lindblad_rhs(rho, np.zeros((3, 3)), ops), np.zeros((3, 3)), atol=1e-15
    )


def test_make_dephasing_rejects_negative_rate():
    with pytest.raises(ValueError, match="non-negative"):
        make_dephasing([(0, -0.1)])


def test_projector_dephasing_reproduces_coherence_damping():
    # D(sqrt(2 g_a)|a><a|) summed over levels damps rho_01 at g_a+g_b,
    # rho_02 at g_a+g_c, rho_12 at g_b+g_c, populations untouched.
    rng = np.random.default_rng(8)
    for _ in range(25):
        g = rng.uniform(0.0, 2.0, size=3)
        ops = make_dephasing(list(enumerate(g)))
        damping = coherence_damping_matrix(g[0] + g[1], g[0] + g[2], g[1] + g[2])
        rho = random_density(rng)
        via_ops = lindblad_rhs(rho, np.zeros((3, 3)), ops)
        direct = -damping * rho
        np.testing.assert_allclose(via_ops, direct, atol=1e-14)


def test_level_rate_decomposition():
    assert dephasing_level_rates(0.0784, 0.0784, 2 * 0.0784) == pytest.approx(
        (0.0, 0.0784, 0.0784)
    )
    assert dephasing_level_rates(1.0, 0.0, 0.0) is None  # triangle-infeasible


def test_infeasible_triple_warns_and_damps_directly():
    dec = DecoherenceParams(gamma1=1.0, gamma2=0.0, gamma3=0.0)
    with pytest.warns(UserWarning, match="per-level decomposition"):
        ops, damping = dissipators_from_params(dec)
    assert ops == []
    np.testing.assert_allclose(damping, coherence_damping_matrix(1.0, 0.0, 0.0))


def test_s5_rates_give_double_speed_12_coherence_decay():
    dec = s5_decoherence()
    ops, damping = dissipators_from_params(dec)
    assert damping is None  # factorizes into per-level projectors
    psi = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    rho = np.outer(psi, psi.conj())
    t = 5.0
    out = evolve_rk4(rho, np.zeros((3, 3)), ops, t_final=t, dt=0.01).matrix
    np.testing.assert_allclose(
        out[0, 1], rho[0, 1] * math.exp(-dec.gamma1 * t), rtol=1e-9
    )
    np.testing.assert_allclose(
        out[1, 2], rho[1, 2] * math.exp(-dec.gamma3 * t), rtol=1e-9
    )
    assert dec.gamma3 == pytest.approx(2 * dec.gamma1)


def test_lindblad_op_structure_validation():
    with pytest.raises(ValueError, match="kind"):
        LindbladOp(np.zeros((3, 3)), "collapse")
    m = np.zeros((3, 3), dtype=complex)
    m[0, 1] = 1.0
    with pytest.raises(ValueError, match="diagonal"):
        LindbladOp(m, "dephasing")
    m2 = np.zeros((3, 3), dtype=complex)
    m2[1, 1] = 1.0
    with pytest.raises(ValueError, match="between levels"):
        LindbladOp(m2, "relaxation")


def test_make_relaxation_ops():
    table = np.zeros((3, 3))
    table[1, 0] = 0.25  # |1> -> |0|
    (op,) = make_relaxation(table)
    assert op.kind == "relaxation"
    assert op.matrix[0, 1] == pytest.approx(0.5)
    assert op.rate() == pytest.approx(0.25)


def test_decoherence_params_validation():
    with pytest.raises(ValueError, match="gamma1"):
        DecoherenceParams(gamma1=-0.1)
    with pytest.raises(ValueError, match="contrast"):
        DecoherenceParams(contrast=1.4)
    with pytest.raises(ValueError, match="diagonal"):
        DecoherenceParams(relaxation=((1.0, 0, 0), (0, 0, 0), (0, 0, 0)))


# --- master-equation right-hand side ----------------------------------------


def test_rhs_zero_without_drive_or_dissipation():
    np.testing.assert_allclose(
        lindblad_rhs(RHO0, np.zeros((3, 3))), np.zeros((3, 3)), atol=0
    )


def test_rhs_traceless_and_hermitian_on_random_inputs():
    rng = np.random.default_rng(17)
    for _ in range(100):
        rho = random_density(rng)
        h = random_hermitian(rng, scale=3.0)
        dec = DecoherenceParams(gamma1=rng.uniform(0, 1), gamma2=rng.uniform(0, 1),
                                gamma3=rng.uniform(0, 1))
        damping = coherence_damping_matrix(dec.gamma1, dec.gamma2, dec.gamma3)
        out = lindblad_rhs(rho, h, (), damping=damping)
        assert abs(np.trace(out)) < 1e-12
        assert np.max(np.abs(out - out.conj().T)) < 1e-12


def test_maximally_mixed_is_stationary_under_dephasing():
    rng = np.random.default_rng(4)
    h = random_hermitian(rng, scale=5.0)
    ops = make_dephasing([(0, 0.3), (1, 0.1), (2, 0.7)])
    out = lindblad_rhs(np.eye(3) / 3.0, h, ops)
    np.testing.assert_allclose(out, np.zeros((3, 3)), atol=1e-14)


def test_pure_dephasing_coherence_decay_closed_form():
    ops = make_dephasing([(0, 0.05), (1, 0.15), (2, 0.4)])
    rng = np.random.default_rng(12)
    rho = random_density(rng)
    t = 4.0
    out = evolve_rk4(rho, np.zeros((3, 3)), ops, t_final=t, dt=0.01).matrix
    np.testing.assert_allclose(np.diag(out), np.diag(rho), rtol=1e-12)
    np.testing.assert_allclose(out[0, 1], rho[0, 1] * math.exp(-0.2 * t), rtol=1e-9)
    np.testing.assert_allclose(out[0, 2], rho[0, 2] * math.exp(-0.45 * t), rtol=1e-9)
    np.testing.assert_allclose(out[1, 2], rho[1, 2] * math.exp(-0.55 * t), rtol=1e-9)


# --- real 8-variable form -----------------------------------------------------


def test_real_ode_initially_stationary_populations_from_rest():
    d = DriveParams(omega_c=3.0, omega_p=0.0)
    y = rho_to_real8(RHO0)
    dy = real_ode_rhs(y, d, DecoherenceParams())
    assert dy[0] == 0.0 and dy[1] == 0.0
    assert dy[3] == pytest.approx(0.5 * d.omega_c)  # coherence starts building


def test_real_ode_matches_complex_rhs_on_random_states():
    rng = np.random.default_rng(23)
    d = DriveParams(omega_c=3.0, omega_p=1.0, delta_p=0.7)
    h = rotating_frame_hamiltonian(d)
    for _ in range(100):
        dec = DecoherenceParams(gamma1=rng.uniform(0, 1), gamma2=rng.uniform(0, 1),
                                gamma3=rng.uniform(0, 1))
        ops = ()
        damping = coherence_damping_matrix(dec.gamma1, dec.gamma2, dec.gamma3)
        rho = random_density(rng)
        dy_real = real_ode_rhs(rho_to_real8(rho), d, dec)
        dy_complex = rho_to_real8(lindblad_rhs(rho, h, ops, damping=damping))
        np.testing.assert_allclose(dy_real, dy_complex, atol=1e-12)


def test_real_ode_rejects_out_of_domain_inputs():
    y = rho_to_real8(RHO0)
    with pytest.raises(ValueError, match="delta_c"):
        real_ode_rhs(y, DriveParams(omega_c=1.0, omega_p=0.0, delta_c=0.5),
                     DecoherenceParams())
    with pytest.raises(ValueError, match="phases"):
        real_ode_rhs(y, DriveParams(omega_c=1.0, omega_p=0.0, phi_c=0.3),
                     DecoherenceParams())
    with pytest.raises(ValueError, match="dephasing only"):
        real_ode_rhs(y, DriveParams(omega_c=1.0, omega_p=0.0),
                     DecoherenceParams(relaxation=((0, 0.1, 0), (0, 0, 0), (0, 0, 0))))


def test_real8_roundtrip():
    rng = np.random.default_rng(6)
    rho = random_density(rng)
    np.testing.assert_allclose(real8_to_rho(rho_to_real8(rho)), rho, atol=1e-15)


def test_real_ode_long_time_washout():
    # resonant two-tone drive plus dephasing drives rho00 to 1/3
    d = DriveParams(omega_c=5.0, omega_p=5.0 / 14.0)
    d = d.replace(delta_p=probe_resonance(d, +1))
    dec = s5_decoherence()
    y = rho_to_real8(RHO0)
    dt = 0.01
    for _ in range(30000):
        y = rk4_step(lambda v: real_ode_rhs(v, d, dec), y, dt)
    assert y[0] == pytest.approx(1.0 / 3.0, abs=1e-4)


# --- RK4 integration ----------------------------------------------------------


def test_evolve_matches_unitary_oracle():
    oc = 2 * math.pi * 4.73
    h = rotating_frame_hamiltonian(DriveParams(omega_c=oc, omega_p=oc / 14.0,
                                               delta_p=0.3))
    out = evolve_rk4(RHO0, h, (), t_final=10.0, dt=2.5e-4).matrix
    from atsim.linalg3 import propagator

    u = propagator(h, 10.0)
    ref = u @ RHO0 @ u.conj().T
    assert np.max(np.abs(out - ref)) < 1e-8


def test_evolve_zero_duration_returns_input():
    out = evolve_rk4(RHO0, np.zeros((3, 3)), (), t_final=0.0)
    np.testing.assert_allclose(out.matrix, RHO0, atol=0)


def test_evolve_step_validation():
    h = np.diag([0.0, 1.0, 2.0]).astype(complex)
    with pytest.raises(ValueError, match="positive"):
        evolve_rk4(RHO0, h, (), t_final=1.0, dt=-0.1)
    with pytest.raises(ValueError, match="exceeds t_final"):
        evolve_rk4(RHO0, h, (), t_final=1.0, dt=2.0)


def test_evolve_autoshrinks_oversized_step_with_warning():
    h = rotating_frame_hamiltonian(DriveParams(omega_c=50.0, omega_p=0.0))
    with pytest.warns(UserWarning, match="shrinking"):
        out = evolve_rk4(RHO0, h, (), t_final=1.0, dt=0.5)
    assert abs(np.trace(out.matrix).real - 1.0) < 1e-9


def test_evolve_fails_below_step_floor():
    h = rotating_frame_hamiltonian(DriveParams(omega_c=1e8, omega_p=0.0))
    with pytest.warns(UserWarning, match="shrinking"):
        with pytest.raises(NumericalError, match="floor"):
            evolve_rk4(RHO0, h, (), t_final=1.0, dt=0.5)


def test_evolve_sampling_grid():
    d = DriveParams(omega_c=2.0, omega_p=0.5, delta_p=0.3)
    h = rotating_frame_hamiltonian(d)
    times = np.array([0.0, 0.7, 1.4, 2.1])
    final, samples = evolve_rk4(RHO0, h, (), t_final=2.1, dt=0.01, sample_times=times)
    assert samples.shape == (4, 3, 3)
    np.testing.assert_allclose(samples[0], RHO0, atol=0)
    np.testing.assert_allclose(samples[-1], final.matrix, atol=1e-14)
    with pytest.raises(ValueError, match="ascending"):
        evolve_rk4(RHO0, h, (), t_final=2.0, dt=0.01, sample_times=[0.5, 0.4])
    with pytest.raises(ValueError, match="within"):
        evolve_rk4(RHO0, h, (), t_final=2.0, dt=0.01, sample_times=[0.5, 3.0])


def test_rk4_is_fourth_order():
    d = DriveParams(omega_c=2.0, omega_p=1.0, delta_p=0.4)
    h = rotating_frame_hamiltonian(d)
    ops, damping = dissipators_from_params(
        DecoherenceParams(gamma1=0.2, gamma2=0.2, gamma3=0.4)
    )
    dt0 = 0.04
    outs = [
        evolve_rk4(RHO0, h, ops, t_final=2.0, dt=dt0 / f, damping=damping).matrix
        for f in (1, 2, 8)
    ]
    e1 = np.linalg.norm(outs[0] - outs[2])
    e2 = np.linalg.norm(outs[1] - outs[2])
    assert 12.0 <= e1 / e2 <= 20.0


def test_relaxation_population_decay_closed_form():
    # drive-free T1 relaxation |1> -> |0>: rho11 decays exponentially and the
    # population lands in |0>
    gamma = 0.4
    ops = make_relaxation(((0, 0, 0), (gamma, 0, 0), (0, 0, 0)))
    rho = np.diag([0.2, 0.8, 0.0]).astype(complex)
    t = 3.0
    out = evolve_rk4(rho, np.zeros((3, 3)), ops, t_final=t, dt=0.01).matrix
    p11 = 0.8 * math.exp(-gamma * t)
    np.testing.assert_allclose(out[1, 1].real, p11, rtol=1e-9)
    np.testing.assert_allclose(out[0, 0].real, 1.0 - p11, rtol=1e-9)


def test_positivity_preserved_along_trajectory():
    d = DriveParams(omega_c=3.0, omega_p=1.0, delta_p=0.5)
    h = rotating_frame_hamiltonian(d)
    ops, damping = dissipators_from_params(s5_decoherence())
    times = np.linspace(0.0, 8.0, 17)
    _, samples = evolve_rk4(RHO0, h, ops, t_final=8.0, damping=damping,
                            sample_times=times)
    for rho in samples:
        assert np.min(np.linalg.eigvalsh(rho)) >= -1e-7
        assert abs(np.trace(rho).real - 1.0) < 1e-9


def test_dissipation_vanishing_limit_is_linear_in_gamma():
    d = DriveParams(omega_c=3.0, omega_p=1.0, delta_p=0.5)
    h = rotating_frame_hamiltonian(d)
    from atsim.linalg3 import propagator

    u = propagator(h, 4.0)
    ref = u @ RHO0 @ u.conj().T
    devs = []
    for g in (2e-3, 1e-3, 5e-4):
        ops, damping = dissipators_from_params(
            DecoherenceParams(gamma1=g, gamma2=g, gamma3=g)
        )
        out = evolve_rk4(RHO0, h, ops, t_final=4.0, damping=damping).matrix
        devs.append(np.linalg.norm(out - ref))
    assert devs[0] / devs[1] == pytest.approx(2.0, abs=0.3)
    assert devs[1] / devs[2] == pytest.approx(2.0, abs=0.3)


# --- steady state ---------------------------------------------------------------


def test_steady_state_washout_is_maximally_mixed():
    d = DriveParams(omega_c=2.0, omega_p=1.0, delta_p=0.4)
    h = rotating_frame_hamiltonian(d)
    ops, damping = dissipators_from_params(s5_decoherence())
    ss = steady_state(h, ops, damping)
    np.testing.assert_allclose(ss.matrix, np.eye(3) / 3.0, atol=1e-8)
    residual = np.linalg.norm(lindblad_rhs(ss.matrix, h, ops, damping))
    assert residual < 1e-10


def test_steady_state_probe_free_case_uses_initial_population():
    # |2> is decoupled, so its population is conserved; from |0><0| the
    # driven pair equilibrates to half each.
    d = DriveParams(omega_c=2.0, omega_p=0.0)
    h = rotating_frame_hamiltonian(d)
    ops, damping = dissipators_from_params(
        DecoherenceParams(gamma1=0.3, gamma2=0.3, gamma3=0.6)
    )
    ss = steady_state(h, ops, damping)
    np.testing.assert_allclose(np.diag(ss.matrix).real, [0.5, 0.5, 0.0], atol=1e-8)


def test_steady_state_agrees_with_long_time_integration():
    d = DriveParams(omega_c=2.0, omega_p=1.0, delta_p=-0.7)
    h = rotating_frame_hamiltonian(d)
    dec = DecoherenceParams(gamma1=0.3, gamma2=0.4, gamma3=0.5)
    ops, damping = dissipators_from_params(dec)
    ss = steady_state(h, ops, damping)
    t_long = 50.0 / 0.2
    evolved = evolve_rk4(RHO0, h, ops, t_final=t_long, damping=damping).matrix
    assert np.max(np.abs(evolved - ss.matrix)) < 1e-6


def test_steady_state_with_relaxation_table():
    # relaxation into |0> pins the populations away from 1/3
    d = DriveParams(omega_c=1.0, omega_p=0.5, delta_p=0.2)
    h = rotating_frame_hamiltonian(d)
    dec = DecoherenceParams(gamma1=0.2, gamma2=0.2, gamma3=0.4,
                            relaxation=((0, 0, 0), (1.0, 0, 0), (1.0, 0, 0)))
    ops, damping = dissipators_from_params(dec)
    ss = steady_state(h, ops, damping)
    assert ss.population(0) > 0.4
    residual = np.linalg.norm(lindblad_rhs(ss.matrix, h, ops, damping))
    assert residual < 1e-10


def test_steady_state_requires_dissipation():
    h = rotating_frame_hamiltonian(DriveParams(omega_c=2.0, omega_p=1.0))
    with pytest.raises(ValueError, match="rank defect"):
        steady_state(h, ())
