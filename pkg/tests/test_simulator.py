import math

import numpy as np
import pytest

from hqoc.circuit import (
    Circuit,
    ctrl_disp_p,
    disp_p,
    disp_q,
    qubit_gate,
    squeeze,
)
from hqoc.moments import circuit_params, circuit_window_trajectory, energy_upper_bound
from hqoc.simulator import (
    VACUUM_TAIL_RADIUS,
    GridError,
    GridMismatchError,
    GridOverflowError,
    HybridState,
    ResourceCapError,
    apply_circuit,
    apply_gate,
    auto_grid,
    centered_grid,
    energy_expectation,
    fidelity,
    homodyne_sample,
    inner_product,
    mode_moments,
    trace_distance,
    vacuum_state,
)

GRID = centered_grid(2048, 32.0 / 2048)


def make_vacuum(r=1):
    return vacuum_state(1, r, [GRID])


def test_vacuum_moments():
    v = make_vacuum()
    mom = mode_moments(v)
    assert mom["mean_q"] == pytest.approx(0.0, abs=1e-9)
    assert mom["mean_q2"] == pytest.approx(0.5, abs=1e-6)
    assert v.norm() == pytest.approx(1.0, abs=1e-12)
    energies, emax = energy_expectation(v)
    assert emax == pytest.approx(1.0, abs=1e-6)


def test_vacuum_rejects_tiny_grid():
    with pytest.raises(GridError):
        vacuum_state(1, 0, [centered_grid(16, 0.1)])


def test_displacement_shifts_mean():
    v = make_vacuum()
    out = apply_gate(v, disp_p(0, 1.375))
    assert mode_moments(out)["mean_q"] == pytest.approx(1.375, abs=1e-6)
    # roll path (integer cells) agrees with the FFT path
    t_cells = 64 * GRID.dx
    a = apply_gate(v, disp_p(0, t_cells))
    b = apply_gate(v, disp_p(0, t_cells + 1e-7))
    assert fidelity(a, b) > 1 - 1e-6


def test_phase_gate_leaves_density():
    v = make_vacuum()
    out = apply_gate(v, disp_q(0, math.pi))
    assert np.allclose(out.position_density(0), v.position_density(0), atol=1e-14)
    # momentum shifts by t: energy picks up theta^2 (vacuum mean p = 0)
    e0 = energy_expectation(v)[1]
    e1 = energy_expectation(out)[1]
    assert e1 - e0 == pytest.approx(math.pi ** 2, abs=1e-5)


def test_squeeze_rescales_moments():
    v = make_vacuum()
    out = apply_gate(v, squeeze(0, 2.0))
    mom = mode_moments(out)
    assert mom["mean_q2"] == pytest.approx(2.0, abs=1e-5)
    assert mom["mean_p2"] == pytest.approx(0.125, abs=1e-6)
    assert energy_expectation(out)[1] == pytest.approx(2.125, abs=1e-5)


def test_controlled_displacement_acts_on_branch():
    v = make_vacuum()
    v = apply_gate(v, qubit_gate("H", 0))
    out = apply_gate(v, ctrl_disp_p(0, 0, 2.0))
    dens0 = np.abs(out.amps[:, 0]) ** 2
    dens1 = np.abs(out.amps[:, 1]) ** 2
    xs = GRID.xs
    assert np.dot(dens0, xs) / dens0.sum() == pytest.approx(0.0, abs=1e-6)
    assert np.dot(dens1, xs) / dens1.sum() == pytest.approx(2.0, abs=1e-6)


def test_norm_preserved_by_gates():
    rng = np.random.default_rng(2)
    v = make_vacuum()
    gates = [disp_p(0, 0.7), disp_q(0, -1.3), squeeze(0, 1.4), qubit_gate("H", 0),
             ctrl_disp_p(0, 0, -0.8), qubit_gate("T", 0)]
    st = v
    for g in gates:
        st = apply_gate(st, g)
        assert st.norm() == pytest.approx(1.0, abs=1e-9)


def test_displacement_composition():
    v = make_vacuum()
    a = apply_gate(apply_gate(v, disp_p(0, 0.31)), disp_p(0, 0.47))
    b = apply_gate(v, disp_p(0, 0.78))
    assert fidelity(a, b) >= 1 - 1e-10


def test_fourier_round_trip():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=512) + 1j * rng.normal(size=512)
    back = np.fft.ifft(np.fft.fft(psi, norm="ortho"), norm="ortho")
    assert np.abs(back - psi).max() <= 1e-12


def test_qubit_gate_two_qubit():
    v = vacuum_state(1, 2, [GRID])
    st = apply_gate(v, qubit_gate("H", 0))
    st = apply_gate(st, qubit_gate("CNOT", (0, 1)))
    dens = np.abs(st.amps) ** 2
    lam = dens.sum(axis=0)
    assert lam[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert lam[1, 1] == pytest.approx(0.5, abs=1e-12)
    assert lam[0, 1] == pytest.approx(0.0, abs=1e-12)


def test_homodyne_statistics_and_determinism():
    v = make_vacuum()
    ys, zs = homodyne_sample(v, 100_000, seed=123)
    assert ys.shape == (100_000, 1)
    assert zs.shape == (100_000, 1)
    assert np.all(zs == 0)
    assert ys.var() == pytest.approx(0.5, abs=0.02)
    ys2, zs2 = homodyne_sample(v, 100_000, seed=123)
    assert np.array_equal(ys, ys2) and np.array_equal(zs, zs2)
    ys3, _ = homodyne_sample(v, 1000, seed=124)
    assert not np.array_equal(ys[:1000], ys3)


def test_homodyne_branch_dependence():
    v = make_vacuum()
    st = apply_gate(v, qubit_gate("H", 0))
    st = apply_gate(st, ctrl_disp_p(0, 0, 4.0))
    ys, zs = homodyne_sample(st, 4000, seed=9)
    y = ys[:, 0]
    z = zs[:, 0]
    assert abs(y[z == 0].mean()) < 0.1
    assert abs(y[z == 1].mean() - 4.0) < 0.1


def test_trace_distance_errors_on_grid_mismatch():
    a = make_vacuum()
    b = vacuum_state(1, 1, [centered_grid(2048, 30.0 / 2048)])
    with pytest.raises(GridMismatchError):
        trace_distance(a, b)


def test_auto_grid_empty_circuit():
    specs = auto_grid(Circuit(1, 0, ()), base_margin=0.25)
    g = specs[0]
    want = 2 * VACUUM_TAIL_RADIUS * 1.25
    assert g.extent == pytest.approx(want, rel=1e-9)
    assert g.p_max >= VACUUM_TAIL_RADIUS * 1.25


def test_auto_grid_squeeze_scales_windows():
    base = auto_grid(Circuit(1, 0, ()), base_margin=0.25)[0]
    squeezed = auto_grid(Circuit(1, 0, (squeeze(0, 2.0),)), base_margin=0.25)[0]
    # final grid after the M_2 rescale: extent doubles, Nyquist halves
    final_dx = squeezed.dx * 2.0
    assert squeezed.n_points * final_dx >= 2 * base.extent * 0.99
    assert math.pi / final_dx <= base.p_max / 2 * 1.01


def test_auto_grid_prep_circuit_resolution():
    from hqoc.pipeline import build_prep_circuit

    n, delta = 3, 0.04
    c = build_prep_circuit(n, delta)
    g = auto_grid(c, base_margin=0.3)[0]
    # net squeeze through the circuit is Delta, so the final dx is g.dx * Delta
    net = delta
    assert g.dx * net <= delta / 8  # resolves the Delta-wide peaks
    assert g.extent * net >= 2 * 2 ** (n - 1)  # covers the 2^n-peak comb


def test_auto_grid_memory_cap():
    c = Circuit(1, 0, ())
    with pytest.raises(ResourceCapError):
        auto_grid(c, mem_cap_mb=0.001)


def test_grid_overflow_reports_gate():
    v = vacuum_state(1, 0, [centered_grid(256, 24.0 / 256)])
    c = Circuit(1, 0, (disp_p(0, 9.0),))
    with pytest.raises(GridOverflowError, match="gate 1"):
        apply_circuit(v, c)


def test_inner_product_conjugate_symmetry():
    v = make_vacuum()
    a = apply_gate(v, disp_q(0, 0.3))
    b = apply_gate(v, disp_p(0, 0.2))
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)))


def test_analyzer_soundness_small():
    # compact version of the acceptance harness
    from hqoc.acceptance import random_circuit

    rng = np.random.default_rng(77)
    r0 = VACUUM_TAIL_RADIUS
    for _ in range(30):
        c = random_circuit(rng)
        bound = energy_upper_bound(circuit_params(c)).bound
        grids = auto_grid(c, base_margin=0.3, mem_cap_mb=512)
        traj = circuit_window_trajectory(c, (-r0, r0, -r0, r0))
        st = vacuum_state(1, 1, grids)

        def check(i, state):
            assert energy_expectation(state)[1] <= bound
            w = traj[i][0]
            xs = state.grids[0].xs
            out = state.position_density(0)[(xs < w[0]) | (xs > w[1])].sum()
            assert out <= 1e-6

        apply_circuit(st, c, callback=check)
