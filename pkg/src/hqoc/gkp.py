"""Rectangular-envelope truncated GKP comb states.

The base comb ``|Sha^eps_{L,Delta}>`` is ``1/sqrt(L)`` times a sum of ``L``
truncated, individually normalized Gaussians of width ``Delta`` centered at
the integers ``-L/2 .. L/2-1`` (truncation at ``|x| <= eps``).  The code
state of logical index ``j`` in dimension ``d`` is

    ``|Sha^eps_{L,Delta}(j)_d> = e^{-i sqrt(2 pi / d) j P} M_{sqrt(2 pi d)} |Sha^eps_{L,Delta}>``

so its peaks sit at ``sqrt(2 pi d) z + sqrt(2 pi / d) j`` with Gaussian width
``sqrt(2 pi d) Delta`` and half-support ``sqrt(2 pi d) eps``.  For the
canonical truncation ``eps = 1/(2d)``, states of distinct ``j`` have disjoint
supports and form an orthonormal family.

States are constructed analytically (sampled closed form, renormalized on the
grid), which makes them an oracle independent of the preparation circuits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .moments import ceil_log2
from .simulator import GridError, GridSpec, HybridState, centered_grid


@dataclass(frozen=True)
class GkpParams:
    """(Delta, d, eps, L) of one comb-state family; ``L = 2**n_peaks_exp``."""

    delta: float
    d: int
    ell: int | None
    eps: float
    L: int
    n_peaks_exp: int

    def __post_init__(self):
        if not (0 < self.delta < 0.25):
            raise ValueError("delta must lie in (0, 1/4)")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if not (0 < self.eps <= 1.0 / (2 * self.d)):
            raise ValueError("eps must lie in (0, 1/(2d)]")
        if self.L % 2 or self.L < 2:
            raise ValueError("L must be a positive even integer")


def canonical_params(delta: float, d: int) -> GkpParams:
    """Canonical choice eps = 1/(2d), L = 2^{2(ceil(log2 1/Delta) - floor(log2 d))}."""
    if not (0 < delta < 0.25):
        raise ValueError("delta must lie in (0, 1/4)")
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise ValueError("d must be an integer >= 2")
    floor_log2_d = int(d).bit_length() - 1
    n_exp = 2 * (ceil_log2(1.0 / delta) - floor_log2_d)
    if n_exp < 1:
        raise ValueError("delta too large for this code dimension (L < 2)")
    ell = floor_log2_d if d == 2 ** floor_log2_d else None
    return GkpParams(
        delta=float(delta), d=int(d), ell=ell, eps=1.0 / (2 * d),
        L=2 ** n_exp, n_peaks_exp=n_exp,
    )


def aux_params(delta: float, ell: int) -> GkpParams:
    """Auxiliary qubit code: d = 2 with eps = 2^-(ell+1) and L = L_{Delta, 2^ell}."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    n_exp = 2 * (ceil_log2(1.0 / delta) - ell)
    if n_exp < 1:
        raise ValueError("delta too large for this ell (L < 2)")
    return GkpParams(
        delta=float(delta), d=2, ell=1, eps=2.0 ** -(ell + 1),
        L=2 ** n_exp, n_peaks_exp=n_exp,
    )


@dataclass(frozen=True)
class CombStateSpec:
    """One comb state: family parameters plus the logical index j."""

    params: GkpParams
    j: int

    def __post_init__(self):
        if not (0 <= self.j < self.params.d):
            raise ValueError("logical index j out of range")

    @property
    def scale(self) -> float:
        return math.sqrt(2 * math.pi * self.params.d)

    @property
    def shift(self) -> float:
        return math.sqrt(2 * math.pi / self.params.d) * self.j

    @property
    def peak_centers(self) -> np.ndarray:
        zs = np.arange(-self.params.L // 2, self.params.L // 2)
        return self.scale * zs + self.shift

    @property
    def peak_sigma(self) -> float:
        return self.scale * self.params.delta

    @property
    def half_support(self) -> float:
        return self.scale * self.params.eps


def comb_spec(delta: float, d: int, j: int) -> CombStateSpec:
    return CombStateSpec(params=canonical_params(delta, d), j=j)


def support_set(spec: CombStateSpec) -> list[tuple[float, float]]:
    """The L closed support intervals (pairwise disjoint across distinct j)."""
    h = spec.half_support
    return [(c - h, c + h) for c in spec.peak_centers]


def _check_grid(spec: CombStateSpec, grid: GridSpec, samples_per_sigma: float = 8.0) -> None:
    if grid.dx > spec.peak_sigma / samples_per_sigma * (1 + 1e-9):
        raise GridError(
            f"grid too coarse: dx={grid.dx:.4g} > peak_sigma/{samples_per_sigma:g}"
            f"={spec.peak_sigma / samples_per_sigma:.4g}"
        )
    lo = spec.peak_centers[0] - spec.half_support
    hi = spec.peak_centers[-1] + spec.half_support
    if grid.x0 > lo - 2 * grid.dx or grid.x0 + grid.extent < hi + 2 * grid.dx:
        raise GridError("grid too small: comb support escapes the grid")


def comb_wavefunction(
    spec: CombStateSpec, grid: GridSpec, samples_per_sigma: float = 8.0
) -> HybridState:
    """Sampled, renormalized closed-form comb state on one mode.

    The default resolution requirement (8 samples per peak sigma) suits
    decoding and quadrature use; oracles comparing against Nyquist-sized
    simulation grids may lower ``samples_per_sigma`` when the truncation
    edges are negligible (``delta << eps``).
    """
    _check_grid(spec, grid, samples_per_sigma)
    delta, eps, L = spec.params.delta, spec.params.eps, spec.params.L
    u = (grid.xs - spec.shift) / spec.scale
    z = np.rint(u)
    w = u - z
    inside = (np.abs(w) < eps) & (z >= -L // 2) & (z <= L // 2 - 1)
    psi = np.where(inside, np.exp(-w ** 2 / (2 * delta ** 2)), 0.0)
    if not psi.any():
        raise GridError("comb support does not intersect the grid")
    amps = psi.astype(complex)
    amps /= np.linalg.norm(amps)
    return HybridState(1, 0, (grid,), amps)


def untruncated_comb_wavefunction(
    L: int, delta: float, grid: GridSpec, scale: float = 1.0, shift: float = 0.0
) -> HybridState:
    """``|Sha_{L,Delta}>``: full (untruncated) Gaussians at L integer centers."""
    u = (grid.xs - shift) / scale
    psi = np.zeros(grid.n_points)
    for z in range(-L // 2, L // 2):
        psi += np.exp(-((u - z) ** 2) / (2 * delta ** 2))
    amps = psi.astype(complex)
    nrm = np.linalg.norm(amps)
    if nrm == 0:
        raise GridError("comb support does not intersect the grid")
    amps /= nrm
    return HybridState(1, 0, (grid,), amps)


def default_comb_grid(
    spec: CombStateSpec, samples_per_sigma: int = 8, pad_sigmas: float = 12.0
) -> GridSpec:
    """Dyadic grid with peak centers exactly on cell centers.

    ``dx = sqrt(2 pi / d) / 2^k`` with k minimal such that the peak Gaussian
    is sampled at least ``samples_per_sigma`` times per sigma.
    """
    fine = math.sqrt(2 * math.pi / spec.params.d)
    k = max(0, ceil_log2(samples_per_sigma * fine / spec.peak_sigma))
    dx = fine / 2 ** k
    top = spec.scale * (spec.params.L // 2) + spec.scale  # covers shifts for all j < d
    reach = top + spec.half_support + pad_sigmas * spec.peak_sigma
    n = 1 << max(8, math.ceil(math.log2(2.0 * reach / dx)))
    return centered_grid(n, dx)


def overlap_check(delta: float, eps: float, L: int) -> tuple[float, float]:
    """Numeric |<Sha, Sha^eps>|^2 against the bound 1 - 16 Delta^2 - 2 e^{-(eps/Delta)^2}."""
    if not (0 < eps < 0.5):
        raise ValueError("eps must lie in (0, 1/2)")
    if not (0 < delta < 0.25):
        raise ValueError("delta must lie in (0, 1/4)")
    dx = delta / 16.0
    reach = L / 2 + 1.0 + 12.0 * delta
    n = 1 << math.ceil(math.log2(2 * reach / dx))
    grid = centered_grid(n, dx)
    full = untruncated_comb_wavefunction(L, delta, grid)
    u = grid.xs
    z = np.rint(u)
    w = u - z
    inside = (np.abs(w) < eps) & (z >= -L // 2) & (z <= L // 2 - 1)
    trunc = np.where(inside, np.exp(-w ** 2 / (2 * delta ** 2)), 0.0).astype(complex)
    trunc /= np.linalg.norm(trunc)
    overlap_sq = abs(np.vdot(full.amps, trunc)) ** 2
    bound = 1.0 - 16.0 * delta ** 2 - 2.0 * math.exp(-((eps / delta) ** 2))
    return float(overlap_sq), float(bound)


def truncated_peak_norm_constant(delta: float, eps: float) -> float:
    """Normalization of one truncated peak, exact via the error function."""
    return (math.pi * delta ** 2) ** -0.25 / math.sqrt(float(erf(eps / delta)))
