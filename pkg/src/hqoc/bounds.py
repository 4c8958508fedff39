"""Concentration quantities and energy lower bounds.

For a real random variable (here: discrete distributions or homodyne
marginals of simulated states):

* ``diam_delta``: width of a minimal interval carrying mass >= 1 - delta;
* ``symradius_delta``: smallest R with mass >= 1 - delta in [-R, R];
* ``delta * symradius^2 <= E[X^2]`` lower-bounds second moments, hence for
  states ``delta * symradius^2 / m <= energy`` per mode;
* the radius-dimension theorem lower-bounds the max symmetric radius of any
  orthonormal family via the trace of the kernel
  ``k(x, y) = sin(2R(x-y)) / (pi (x-y))`` restricted to ``[-R, R]^2``
  (a product of projectors, so PSD with eigenvalues <= 1 and trace
  ``4 R^2 / pi``).

Distributions are sorted ``(value, mass)`` arrays; interval infima are found
by exact two-pointer sweeps, no continuous optimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .simulator import HybridState


@dataclass(frozen=True)
class DiscreteDistribution:
    values: np.ndarray  # sorted ascending
    probs: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if v.ndim != 1 or v.shape != p.shape or v.size == 0:
            raise ValueError("distribution needs matching non-empty 1-d arrays")
        if np.any(np.diff(v) < 0):
            raise ValueError("values must be sorted ascending")
        if np.any(p < 0) or p.sum() <= 0:
            raise ValueError("probabilities must be non-negative with positive total")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p / p.sum())

    @property
    def mean(self) -> float:
        return float(np.dot(self.probs, self.values))

    @property
    def second_moment(self) -> float:
        return float(np.dot(self.probs, self.values ** 2))

    @property
    def sigma(self) -> float:
        return math.sqrt(max(0.0, self.second_moment - self.mean ** 2))


def distribution_from_arrays(values, probs) -> DiscreteDistribution:
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    order = np.argsort(values, kind="stable")
    return DiscreteDistribution(values[order], probs[order])


def position_marginal(state: HybridState, mode: int = 0) -> DiscreteDistribution:
    return distribution_from_arrays(state.grids[mode].xs, state.position_density(mode))


def momentum_marginal(state: HybridState, mode: int = 0) -> DiscreteDistribution:
    ps = state.grids[mode].momenta
    return distribution_from_arrays(ps, state.momentum_density(mode))


def symradius_delta(dist, delta: float) -> float:
    """Smallest R with P(|X| <= R) >= 1 - delta (states: max over Q/P, all modes)."""
    if isinstance(dist, HybridState):
        return state_symradius(dist, delta)
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    absv = np.abs(dist.values)
    order = np.argsort(absv, kind="stable")
    cum = np.cumsum(dist.probs[order])
    k = int(np.searchsorted(cum, 1.0 - delta - 1e-15, side="left"))
    k = min(k, absv.size - 1)
    return float(absv[order][k])


def diam_delta(dist: DiscreteDistribution, delta: float) -> float:
    """Width of a minimal interval with mass >= 1 - delta (two-pointer sweep)."""
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    v, p = dist.values, dist.probs
    target = 1.0 - delta - 1e-15
    best = v[-1] - v[0]
    acc = 0.0
    lo = 0
    for hi in range(v.size):
        acc += p[hi]
        while acc - p[lo] >= target:
            acc -= p[lo]
            lo += 1
        if acc >= target:
            best = min(best, v[hi] - v[lo])
    return float(best)


def minimal_interval(dist: DiscreteDistribution, delta: float) -> tuple[float, float]:
    """One minimal-width interval achieving mass >= 1 - delta."""
    v, p = dist.values, dist.probs
    target = 1.0 - delta - 1e-15
    best = (v[0], v[-1])
    acc = 0.0
    lo = 0
    for hi in range(v.size):
        acc += p[hi]
        while acc - p[lo] >= target:
            acc -= p[lo]
            lo += 1
        if acc >= target and v[hi] - v[lo] < best[1] - best[0]:
            best = (v[lo], v[hi])
    return best


def conditioned_on_interval(dist: DiscreteDistribution, lo: float, hi: float) -> DiscreteDistribution:
    mask = (dist.values >= lo) & (dist.values <= hi)
    return DiscreteDistribution(dist.values[mask], dist.probs[mask])


@dataclass(frozen=True)
class ConcentrationStats:
    delta: float
    diam: float
    symradius: float
    sigma: float
    second_moment: float


def concentration_stats(dist: DiscreteDistribution, delta: float) -> ConcentrationStats:
    return ConcentrationStats(
        delta=delta,
        diam=diam_delta(dist, delta),
        symradius=symradius_delta(dist, delta),
        sigma=dist.sigma,
        second_moment=dist.second_moment,
    )


def state_symradius(state: HybridState, delta: float) -> float:
    """Symmetric delta-radius of a state: product projectors over all modes."""
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    r_pos = _joint_abs_quantile(state, delta, momentum=False)
    r_mom = _joint_abs_quantile(state, delta, momentum=True)
    return max(r_pos, r_mom)


def _joint_abs_quantile(state: HybridState, delta: float, momentum: bool) -> float:
    if momentum:
        amps = state.amps
        for a in range(state.m):
            amps = np.fft.fft(amps, axis=a, norm="ortho")
        dens = np.abs(amps) ** 2
        coords = [state.grids[a].momenta for a in range(state.m)]
    else:
        dens = np.abs(state.amps) ** 2
        coords = [state.grids[a].xs for a in range(state.m)]
    dens = dens.sum(axis=tuple(range(state.m, dens.ndim))) if dens.ndim > state.m else dens
    # distribution of max_alpha |coordinate_alpha|
    maxabs = np.zeros(dens.shape)
    for a in range(state.m):
        shape = [1] * state.m
        shape[a] = len(coords[a])
        maxabs = np.maximum(maxabs, np.abs(coords[a]).reshape(shape))
    flat = distribution_from_arrays(maxabs.ravel(), dens.ravel())
    cum = np.cumsum(flat.probs)
    k = int(np.searchsorted(cum, 1.0 - delta - 1e-15, side="left"))
    return float(flat.values[min(k, flat.values.size - 1)])


def energy_lower_bound_from_radius(state_or_stats, delta: float, m: int | None = None):
    """(per-mode bound, total bound): delta * symradius^2 / m <= energy."""
    if isinstance(state_or_stats, HybridState):
        radius = state_symradius(state_or_stats, delta)
        m = state_or_stats.m
    elif isinstance(state_or_stats, ConcentrationStats):
        radius = state_or_stats.symradius
        m = 1 if m is None else m
    else:
        radius = symradius_delta(state_or_stats, delta)
        m = 1 if m is None else m
    total = delta * radius ** 2
    return total / m, total


def radius_dimension_bound(d: int, m: int, r: int, delta: float) -> float:
    """sqrt(pi/4) (d (1 - 3 sqrt(delta)) / 2^r)^{1/(2m)} for delta in (0, 1/9)."""
    if not (0 < delta < 1.0 / 9.0):
        raise ValueError("delta must lie in (0, 1/9)")
    if d < 1 or m < 1 or r < 0:
        raise ValueError("invalid family parameters")
    return math.sqrt(math.pi / 4.0) * (d * (1.0 - 3.0 * math.sqrt(delta)) / 2 ** r) ** (
        1.0 / (2.0 * m)
    )


def corollary_scalings(n: int, m: int, r: int, delta: float = 1.0 / 36.0) -> dict:
    """The derived family-size scalings s(n) = Omega(2^{n/2m}), E(n) = Omega(2^{n/m}/m)."""
    radius = radius_dimension_bound(2 ** n, m, r, delta)
    return {
        "radius_lower_bound": radius,
        "log2_radius_scaling": n / (2.0 * m),
        "energy_lower_bound": delta * radius ** 2 / m,
        "log2_energy_scaling": n / m - math.log2(m) if m > 0 else math.nan,
    }


# -- Donoho-Stark kernel --------------------------------------------------------------


@dataclass(frozen=True)
class DonohoStarkKernel:
    R: float
    grid: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray  # symmetrized W^{1/2} K W^{1/2}


def donoho_stark_kernel(R: float, n_quad: int) -> DonohoStarkKernel:
    """Trapezoid discretization of k(x,y) = sin(2R(x-y))/(pi(x-y)) on [-R,R]^2."""
    if R <= 0:
        raise ValueError("R must be positive")
    if n_quad < 64:
        raise ValueError("n_quad must be >= 64")
    xs = np.linspace(-R, R, n_quad)
    w = np.full(n_quad, xs[1] - xs[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    diff = xs[:, None] - xs[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        K = np.sin(2.0 * R * diff) / (math.pi * diff)
    np.fill_diagonal(K, 2.0 * R / math.pi)  # removable singularity
    sw = np.sqrt(w)
    A = sw[:, None] * K * sw[None, :]
    A = 0.5 * (A + A.T)
    return DonohoStarkKernel(R=R, grid=xs, weights=w, matrix=A)


def donoho_stark_trace(R: float, n_quad: int) -> tuple[float, float]:
    """(quadrature trace, max eigenvalue); trace -> 4R^2/pi, eigenvalues in [0, 1]."""
    kern = donoho_stark_kernel(R, n_quad)
    trace = float(np.trace(kern.matrix))
    eigs = np.linalg.eigvalsh(kern.matrix)
    return trace, float(eigs[-1])


def donoho_stark_eigs(R: float, n_quad: int) -> np.ndarray:
    return np.linalg.eigvalsh(donoho_stark_kernel(R, n_quad).matrix)
