import math

import numpy as np
import pytest
from scipy.special import erfinv

from hqoc.bounds import (
    DiscreteDistribution,
    concentration_stats,
    conditioned_on_interval,
    corollary_scalings,
    diam_delta,
    distribution_from_arrays,
    donoho_stark_eigs,
    donoho_stark_kernel,
    donoho_stark_trace,
    energy_lower_bound_from_radius,
    minimal_interval,
    momentum_marginal,
    position_marginal,
    radius_dimension_bound,
    state_symradius,
    symradius_delta,
)
from hqoc.gkp import CombStateSpec, canonical_params, comb_wavefunction, default_comb_grid
from hqoc.simulator import centered_grid, energy_expectation, vacuum_state


def uniform_dist(lo, hi, k=4001):
    xs = np.linspace(lo, hi, k)
    return distribution_from_arrays(xs, np.full(k, 1.0 / k))


def test_symradius_point_mass():
    d = distribution_from_arrays([3.0], [1.0])
    assert symradius_delta(d, 0.1) == 3.0


def test_symradius_uniform():
    d = uniform_dist(-1.0, 1.0)
    assert symradius_delta(d, 0.5) == pytest.approx(0.5, abs=2e-3)


def test_symradius_vacuum_state():
    grid = centered_grid(4096, 24.0 / 4096)
    v = vacuum_state(1, 0, [grid])
    r = symradius_delta(position_marginal(v), 0.05)
    assert r == pytest.approx(float(erfinv(0.95)), abs=0.01)
    # the state-level radius agrees (position and momentum marginals coincide)
    assert state_symradius(v, 0.05) == pytest.approx(r, abs=0.01)


def test_diam_uniform():
    d = uniform_dist(0.0, 1.0)
    assert diam_delta(d, 0.2) == pytest.approx(0.8, abs=2e-3)


def test_diam_shift_invariance():
    rng = np.random.default_rng(4)
    vals = rng.normal(size=50)
    probs = rng.dirichlet(np.ones(50))
    d1 = distribution_from_arrays(vals, probs)
    d2 = distribution_from_arrays(vals + 17.3, probs)
    assert diam_delta(d1, 0.1) == pytest.approx(diam_delta(d2, 0.1), rel=1e-12)


def test_diam_at_most_twice_symradius():
    rng = np.random.default_rng(6)
    for _ in range(100):
        k = int(rng.integers(2, 40))
        d = distribution_from_arrays(rng.normal(size=k) * rng.uniform(0.1, 3),
                                     rng.dirichlet(np.ones(k)))
        delta = float(rng.uniform(0.05, 0.5))
        assert diam_delta(d, delta) <= 2 * symradius_delta(d, delta) + 1e-12


def test_concentration_lemmas_random():
    rng = np.random.default_rng(8)
    for _ in range(500):
        k = int(rng.integers(2, 60))
        d = distribution_from_arrays(
            rng.normal(scale=rng.uniform(0.1, 5.0), size=k) + rng.uniform(-3, 3),
            rng.dirichlet(np.ones(k)),
        )
        delta = float(rng.uniform(0.02, 0.5))
        stats = concentration_stats(d, delta)
        assert stats.diam <= 2 * stats.sigma / math.sqrt(delta) + 1e-12
        assert delta * stats.symradius ** 2 <= stats.second_moment + 1e-12


def test_popoviciu_conditioned_form():
    # on the minimal 1-delta interval, 2 sigma of the conditioned variable
    # is at most its width
    rng = np.random.default_rng(13)
    for _ in range(200):
        k = int(rng.integers(3, 50))
        d = distribution_from_arrays(rng.normal(size=k) * rng.uniform(0.2, 4),
                                     rng.dirichlet(np.ones(k)))
        delta = float(rng.uniform(0.05, 0.4))
        lo, hi = minimal_interval(d, delta)
        cond = conditioned_on_interval(d, lo, hi)
        assert 2 * cond.sigma <= (hi - lo) + 1e-12
        assert hi - lo == pytest.approx(diam_delta(d, delta))


def test_energy_lower_bound_direction_vacuum():
    grid = centered_grid(4096, 24.0 / 4096)
    v = vacuum_state(1, 0, [grid])
    per_mode, total = energy_lower_bound_from_radius(v, 0.05)
    assert per_mode == pytest.approx(0.05 * erfinv(0.95) ** 2, abs=0.01)
    assert per_mode <= energy_expectation(v)[1]


def test_energy_lower_bound_comb_state():
    spec = CombStateSpec(params=canonical_params(1 / 16, 4), j=0)
    st = comb_wavefunction(spec, default_comb_grid(spec))
    per_mode, _ = energy_lower_bound_from_radius(st, 0.01)
    assert per_mode <= energy_expectation(st)[1]


def test_radius_dimension_examples():
    assert radius_dimension_bound(2, 1, 0, 1 / 36) == pytest.approx(math.sqrt(math.pi) / 2)
    got = radius_dimension_bound(16, 2, 3, 0.01)
    want = math.sqrt(math.pi / 4) * (16 * 0.7 / 8) ** 0.25
    assert got == pytest.approx(want, rel=1e-12)
    assert got == pytest.approx(0.9640, abs=5e-4)


def test_radius_dimension_delta_guard():
    with pytest.raises(ValueError):
        radius_dimension_bound(4, 1, 0, 0.2)


def test_comb_family_beats_radius_bound():
    params = canonical_params(1 / 16, 4)
    grid = default_comb_grid(CombStateSpec(params=params, j=0))
    radii = [state_symradius(comb_wavefunction(CombStateSpec(params=params, j=j), grid), 0.01)
             for j in range(4)]
    assert max(radii) >= radius_dimension_bound(4, 1, 0, 0.01)


def test_corollary_scalings():
    out = corollary_scalings(8, 2, 0)
    assert out["log2_radius_scaling"] == pytest.approx(2.0)
    assert out["energy_lower_bound"] > 0


def test_donoho_stark_trace_values():
    tr, _ = donoho_stark_trace(1.0, 1024)
    assert tr == pytest.approx(4 / math.pi, rel=0.005)
    tr2, _ = donoho_stark_trace(2.0, 1024)
    assert tr2 == pytest.approx(16 / math.pi, rel=0.005)


def test_donoho_stark_spectrum():
    for R in (1.0, 5.0):
        eigs = donoho_stark_eigs(R, 512)
        assert eigs[0] >= -1e-9
        assert eigs[-1] <= 1 + 1e-6


def test_donoho_stark_kernel_symmetry():
    kern = donoho_stark_kernel(1.5, 128)
    assert np.allclose(kern.matrix, kern.matrix.T)
    assert kern.matrix.shape == (128, 128)
    # diagonal of the raw kernel is 2R/pi
    i = 64
    raw = kern.matrix[i, i] / kern.weights[i]
    assert raw == pytest.approx(2 * 1.5 / math.pi, rel=1e-12)


def test_donoho_stark_validation():
    with pytest.raises(ValueError):
        donoho_stark_trace(-1.0, 256)
    with pytest.raises(ValueError):
        donoho_stark_trace(1.0, 32)


def test_momentum_marginal_of_squeezed_state():
    from hqoc.circuit import squeeze
    from hqoc.simulator import apply_gate

    grid = centered_grid(4096, 40.0 / 4096)
    v = vacuum_state(1, 0, [grid])
    st = apply_gate(v, squeeze(0, 2.0))
    mom = momentum_marginal(st)
    assert mom.second_moment == pytest.approx(0.125, abs=1e-6)


def test_distribution_validation():
    with pytest.raises(ValueError):
        DiscreteDistribution(np.array([1.0, 0.0]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        DiscreteDistribution(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        distribution_from_arrays([0.0], [-1.0])
