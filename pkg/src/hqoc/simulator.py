"""Grid state-vector simulation of hybrid qubit-oscillator circuits.

A :class:`HybridState` holds the complex amplitudes of ``m`` oscillator modes
(position grids, one axis per mode) tensored with ``r`` qubits (trailing axes
of size 2).  Amplitudes are stored so that ``sum |amps|^2 = 1``; the
wavefunction value at a cell is ``amp / sqrt(dx)``.

Gate kernels:

* ``e^{itQ}``: pointwise phase ``e^{itx}``;
* ``e^{-itP}``: exact roll when ``t`` is an integer number of cells, otherwise
  a phase multiply in the discrete Fourier domain (exact for band-limited
  states on a periodic grid, wraparound guarded by a boundary-mass check);
* ``M_alpha``: exact grid-metadata rescale ``dx -> alpha dx`` (no
  interpolation; legal because the gate set has no controlled squeezing, so
  ``dx`` is global per mode);
* qubit gates: dense 2x2 / 4x4 action on the qubit axes;
* controlled displacements act on the control-bit-1 qubit branches only.

Vacuum convention: ``psi(x) = pi^{-1/4} e^{-x^2/2}``, i.e.
``<Q^2> = <P^2> = 1/2`` and energy ``<Q^2 + P^2> = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .circuit import Circuit, Gate, gate_matrix, target_modes
from .moments import AnalysisError, Window, circuit_window_trajectory, generator_mlf

# Radius containing all but <= 1e-12 of the vacuum's position/momentum mass.
VACUUM_TAIL_RADIUS = 5.1

BOUNDARY_MASS_TOL = 1e-8


class GridError(ValueError):
    """Grid is inadequate for the requested construction."""


class GridOverflowError(GridError):
    """State mass reached the grid boundary (wraparound would corrupt it)."""


class GridMismatchError(ValueError):
    """Binary operation on states living on different grids."""


class ResourceCapError(RuntimeError):
    """Requested allocation exceeds the configured memory cap."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform position grid: ``n_points`` cells at spacing ``dx`` from ``x0``."""

    n_points: int
    dx: float
    x0: float

    def __post_init__(self):
        if self.n_points < 2 or self.n_points & (self.n_points - 1):
            raise GridError("n_points must be a power of two >= 2")
        if not (self.dx > 0):
            raise GridError("dx must be positive")

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n_points)

    @property
    def extent(self) -> float:
        return self.n_points * self.dx

    @property
    def p_max(self) -> float:
        """Nyquist momentum pi/dx."""
        return math.pi / self.dx

    @property
    def momenta(self) -> np.ndarray:
        """Momentum values in FFT ordering."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, d=self.dx)


def centered_grid(n_points: int, dx: float) -> GridSpec:
    """Grid whose cell ``n_points/2`` sits exactly at x = 0."""
    return GridSpec(n_points=n_points, dx=dx, x0=-(n_points // 2) * dx)


def _next_pow2(n: float) -> int:
    return 1 << max(1, math.ceil(math.log2(max(2.0, n)) - 1e-12))


class HybridState:
    """Amplitudes of ``m`` modes and ``r`` qubits on per-mode grids."""

    def __init__(self, m: int, r: int, grids, amps: np.ndarray):
        self.m = m
        self.r = r
        self.grids = tuple(grids)
        expected = tuple(g.n_points for g in self.grids) + (2,) * r
        if amps.shape != expected:
            raise ValueError(f"amplitude shape {amps.shape} != expected {expected}")
        self.amps = np.asarray(amps, dtype=complex)

    def copy(self) -> "HybridState":
        return HybridState(self.m, self.r, self.grids, self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalize(self) -> "HybridState":
        self.amps /= np.linalg.norm(self.amps)
        return self

    def position_density(self, mode: int = 0) -> np.ndarray:
        """Marginal |psi|^2 * dx per cell of one mode (sums to 1)."""
        dens = np.abs(self.amps) ** 2
        axes = tuple(ax for ax in range(dens.ndim) if ax != mode)
        return dens.sum(axis=axes)

    def joint_position_density(self) -> np.ndarray:
        """Joint cell probabilities over all mode axes (qubits traced out)."""
        dens = np.abs(self.amps) ** 2
        return dens.sum(axis=tuple(range(self.m, dens.ndim)))

    def momentum_amps(self, mode: int) -> np.ndarray:
        """Amplitudes in the momentum basis of one mode (FFT ordering)."""
        return np.fft.fft(self.amps, axis=mode, norm="ortho")

    def momentum_density(self, mode: int = 0) -> np.ndarray:
        amps_p = self.momentum_amps(mode)
        dens = np.abs(amps_p) ** 2
        axes = tuple(ax for ax in range(dens.ndim) if ax != mode)
        return dens.sum(axis=axes)

    def boundary_mass(self, cells: int = 2) -> float:
        """Largest per-mode probability mass within ``cells`` of a grid edge."""
        worst = 0.0
        for a in range(self.m):
            dens = self.position_density(a)
            worst = max(worst, float(dens[:cells].sum() + dens[-cells:].sum()))
        return worst


def vacuum_state(m: int, r: int, grids) -> HybridState:
    """Product of vacuum Gaussians, qubits at |0...0>."""
    grids = tuple(grids)
    if len(grids) != m:
        raise GridError(f"need {m} grids, got {len(grids)}")
    amps = np.ones((), dtype=complex)
    for g in grids:
        psi = np.exp(-g.xs ** 2 / 2.0).astype(complex)
        psi /= np.linalg.norm(psi)
        amps = np.multiply.outer(amps, psi)
    if r:
        qubits = np.zeros((2,) * r, dtype=complex)
        qubits[(0,) * r] = 1.0
        amps = np.multiply.outer(amps, qubits)
    state = HybridState(m, r, grids, amps.reshape(tuple(g.n_points for g in grids) + (2,) * r))
    if state.boundary_mass() > BOUNDARY_MASS_TOL:
        raise GridError("grid too small to hold the vacuum state")
    return state


def _qubit_axis(state: HybridState, q: int) -> int:
    return state.m + q


def _apply_qubit_matrix(amps: np.ndarray, mat: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Apply a 2^k x 2^k matrix on the given qubit axes (first axis slowest)."""
    k = len(axes)
    moved = np.moveaxis(amps, axes, range(amps.ndim - k, amps.ndim))
    lead = moved.shape[: amps.ndim - k]
    flat = moved.reshape(lead + (2 ** k,))
    flat = flat @ mat.T
    return np.moveaxis(flat.reshape(moved.shape), range(amps.ndim - k, amps.ndim), axes)


def _shift_mode(amps: np.ndarray, grid: GridSpec, mode_axis: int, t: float) -> np.ndarray:
    """Translate one mode by t: exact roll on integer cells, else FFT phase."""
    cells = t / grid.dx
    nearest = round(cells)
    if abs(cells - nearest) < 1e-9 and abs(nearest) < grid.n_points:
        return np.roll(amps, nearest, axis=mode_axis)
    p = grid.momenta
    shape = [1] * amps.ndim
    shape[mode_axis] = grid.n_points
    phase = np.exp(-1j * t * p).reshape(shape)
    spec = np.fft.fft(amps, axis=mode_axis, norm="ortho")
    return np.fft.ifft(spec * phase, axis=mode_axis, norm="ortho")


def apply_gate(state: HybridState, g: Gate) -> HybridState:
    """Apply one elementary gate, returning a new state (blackboxes rejected)."""
    if g.kind == "blackbox":
        raise AnalysisError("blackbox nodes cannot be simulated")
    amps = state.amps
    grids = list(state.grids)

    if g.kind == "qubit_gate":
        mat = gate_matrix(g)
        axes = tuple(_qubit_axis(state, q) for q in g.qubits)
        amps = _apply_qubit_matrix(amps, mat, axes)
        return HybridState(state.m, state.r, grids, amps)

    grid = grids[g.mode]
    if g.kind == "squeeze":
        grids[g.mode] = replace(grid, dx=grid.dx * g.alpha, x0=grid.x0 * g.alpha)
        return HybridState(state.m, state.r, grids, amps.copy())

    if g.kind == "disp_q":
        shape = [1] * amps.ndim
        shape[g.mode] = grid.n_points
        phase = np.exp(1j * g.t * grid.xs).reshape(shape)
        return HybridState(state.m, state.r, grids, amps * phase)

    if g.kind == "disp_p":
        out = _shift_mode(amps, grid, g.mode, g.t)
        new = HybridState(state.m, state.r, grids, out)
        _check_overflow(new)
        return new

    if g.kind in ("ctrl_disp_q", "ctrl_disp_p"):
        out = amps.copy()
        sl = [slice(None)] * amps.ndim
        sl[_qubit_axis(state, g.qubit)] = 1
        sl = tuple(sl)
        branch = amps[sl]
        if g.kind == "ctrl_disp_q":
            shape = [1] * branch.ndim
            shape[g.mode] = grid.n_points
            out[sl] = branch * np.exp(1j * g.t * grid.xs).reshape(shape)
        else:
            out[sl] = _shift_mode(branch, grid, g.mode, g.t)
        new = HybridState(state.m, state.r, grids, out)
        if g.kind == "ctrl_disp_p":
            _check_overflow(new)
        return new

    raise ValueError(f"cannot simulate gate kind {g.kind!r}")


def _check_overflow(state: HybridState) -> None:
    mass = state.boundary_mass()
    if mass > BOUNDARY_MASS_TOL:
        raise GridOverflowError(
            f"grid overflow: boundary mass {mass:.3e} exceeds {BOUNDARY_MASS_TOL}"
        )


def apply_circuit(state: HybridState, c: Circuit, callback=None) -> HybridState:
    """Apply all gates in order; ``callback(i, state)`` runs after gate i (1-based)."""
    if c.m != state.m or c.r != state.r:
        raise ValueError("circuit and state shapes disagree")
    for i, g in enumerate(c.gates, start=1):
        try:
            state = apply_gate(state, g)
        except GridOverflowError as exc:
            raise GridOverflowError(f"{exc} at gate {i}") from exc
        if callback is not None:
            callback(i, state)
    return state


# -- observables -------------------------------------------------------------------


def energy_expectation(state: HybridState) -> tuple[list[float], float]:
    """Per-mode ``<Q^2 + P^2>`` by position/Fourier quadrature, and the max."""
    energies = []
    for a in range(state.m):
        xs = state.grids[a].xs
        q2 = float(np.dot(state.position_density(a), xs ** 2))
        p = state.grids[a].momenta
        p2 = float(np.dot(state.momentum_density(a), p ** 2))
        energies.append(q2 + p2)
    return energies, max(energies) if energies else 0.0


def mode_moments(state: HybridState, mode: int = 0) -> dict:
    xs = state.grids[mode].xs
    dens = state.position_density(mode)
    ps = state.grids[mode].momenta
    dens_p = state.momentum_density(mode)
    return {
        "mean_q": float(np.dot(dens, xs)),
        "mean_q2": float(np.dot(dens, xs ** 2)),
        "mean_p": float(np.dot(dens_p, ps)),
        "mean_p2": float(np.dot(dens_p, ps ** 2)),
    }


def inner_product(a: HybridState, b: HybridState) -> complex:
    """Quadrature inner product <a, b>; requires matching grids."""
    _check_same_grids(a, b)
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: HybridState, b: HybridState) -> float:
    return abs(inner_product(a, b)) ** 2


def trace_distance(a: HybridState, b: HybridState) -> float:
    """Pure-state trace distance 2 sqrt(1 - |<a,b>|^2)."""
    ov = min(1.0, abs(inner_product(a, b)) ** 2)
    return 2.0 * math.sqrt(1.0 - ov)


def _check_same_grids(a: HybridState, b: HybridState) -> None:
    if a.m != b.m or a.r != b.r:
        raise GridMismatchError("state shapes differ")
    for ga, gb in zip(a.grids, b.grids):
        if ga.n_points != gb.n_points:
            raise GridMismatchError("grid sizes differ")
        if not (
            math.isclose(ga.dx, gb.dx, rel_tol=1e-9)
            and math.isclose(ga.x0, gb.x0, rel_tol=1e-9, abs_tol=1e-9 * ga.dx)
        ):
            raise GridMismatchError("grid geometries differ")


# -- homodyne sampling ----------------------------------------------------------


def homodyne_sample(
    state: HybridState, shots: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sample (y, z): qubit bits from their marginal, positions cell-wise.

    Returns ``(ys, zs)`` with shapes ``(shots, m)`` and ``(shots, r)``;
    positions are reported at cell centers.  The stream is a deterministic
    function of the seed.
    """
    rng = np.random.default_rng(seed)
    dens = np.abs(state.amps) ** 2
    dens /= dens.sum()
    qubit_axes = tuple(range(state.m, dens.ndim))
    lam = dens.sum(axis=tuple(range(state.m))) if state.r else None

    ys = np.empty((shots, state.m))
    zs = np.empty((shots, state.r), dtype=np.int64)
    if state.r:
        flat_lam = lam.reshape(-1)
        z_idx = rng.choice(flat_lam.size, size=shots, p=flat_lam / flat_lam.sum())
        bits = np.stack(np.unravel_index(z_idx, lam.shape), axis=1)
        zs[:] = bits
    else:
        z_idx = np.zeros(shots, dtype=np.int64)

    # group shots by qubit outcome and sample mode cells from that branch
    for z in np.unique(z_idx):
        mask = z_idx == z
        take = int(mask.sum())
        if state.r:
            branch = dens[(Ellipsis,) + tuple(np.unravel_index(z, (2,) * state.r))]
        else:
            branch = dens
        branch = branch / branch.sum()
        idx = _sample_cells(branch, take, rng)
        for a in range(state.m):
            ys[mask, a] = state.grids[a].xs[idx[a]]
    return ys, zs


def _sample_cells(density: np.ndarray, shots: int, rng) -> list[np.ndarray]:
    """Sample joint cell indices, mode by mode via conditionals."""
    if density.ndim == 1:
        cdf = np.cumsum(density)
        cdf /= cdf[-1]
        idx = np.searchsorted(cdf, rng.random(shots), side="right")
        return [np.minimum(idx, density.size - 1)]
    # first-axis marginal, then recurse on conditional slices
    marg = density.sum(axis=tuple(range(1, density.ndim)))
    cdf = np.cumsum(marg)
    cdf /= cdf[-1]
    first = np.minimum(
        np.searchsorted(cdf, rng.random(shots), side="right"), density.shape[0] - 1
    )
    rest = [np.empty(shots, dtype=np.int64) for _ in range(density.ndim - 1)]
    for i in np.unique(first):
        mask = first == i
        sub = _sample_cells(density[i] / density[i].sum(), int(mask.sum()), rng)
        for k, arr in enumerate(sub):
            rest[k][mask] = arr
    return [first] + rest


# -- automatic grid sizing --------------------------------------------------------


def auto_grid(
    c: Circuit,
    base_margin: float = 0.25,
    mem_cap_mb: float = 1024.0,
    min_points: int = 256,
) -> list[GridSpec]:
    """Size per-mode grids from the analyzer's window trajectory.

    Starting from the vacuum's effective window (radius covering all but
    1e-12 of the mass), the exact generator maps are composed through every
    prefix; the grid extent covers the largest position window and ``dx``
    keeps the largest momentum window inside the Nyquist band, both with the
    requested margin.  ``dx`` additionally resolves the smallest predicted
    feature: 8 samples per vacuum sigma, a ratio squeezers preserve since
    they rescale the grid along with the state.  Returned grids refer to
    t=0 (squeezers rescale ``dx`` during simulation, which the constraints
    here account for).
    """
    r0 = VACUUM_TAIL_RADIUS
    init: Window = (-r0, r0, -r0, r0)
    traj = circuit_window_trajectory(c, init)
    feature_dx = (1.0 / math.sqrt(2.0)) / 8.0  # vacuum sigma / 8

    # per-mode cumulative squeeze factor at each prefix
    specs = []
    for a in range(c.m):
        scale = 1.0
        scales = [1.0]
        for g in c.gates:
            if g.kind == "squeeze" and g.mode == a:
                scale *= g.alpha
            scales.append(scale)
        dx0 = feature_dx
        n_req = 0.0
        for windows, s in zip(traj, scales):
            w = windows[a]
            mom = max(abs(w[2]), abs(w[3]))
            if mom > 0:
                dx0 = min(dx0, math.pi / ((1.0 + base_margin) * mom * s))
        for windows, s in zip(traj, scales):
            w = windows[a]
            pos = max(abs(w[0]), abs(w[1]))
            n_req = max(n_req, 2.0 * pos * (1.0 + base_margin) / (dx0 * s))
        n = max(min_points, _next_pow2(n_req))
        # shrink dx to land the extent exactly on the target (margins intact)
        specs.append(centered_grid(n, dx0 * n_req / n))

    total_cells = 2 ** c.r
    for g in specs:
        total_cells *= g.n_points
    mb = total_cells * 16 / 1e6
    if mb > mem_cap_mb:
        raise ResourceCapError(
            f"grid needs {mb:.0f} MB > cap {mem_cap_mb:.0f} MB"
        )
    return specs


def state_dump(state: HybridState) -> dict:
    """JSON-ready dump of a one-mode state: (x, Re psi, Im psi) per qubit branch."""
    if state.m != 1:
        raise ValueError("state dumps are defined for one-mode states")
    grid = state.grids[0]
    xs = grid.xs
    scale = 1.0 / math.sqrt(grid.dx)
    branches = {}
    flat = state.amps.reshape(grid.n_points, -1)
    for b in range(flat.shape[1]):
        label = format(b, f"0{state.r}b") if state.r else "0"
        psi = flat[:, b] * scale
        branches[label] = [
            [float(x), float(v.real), float(v.imag)] for x, v in zip(xs, psi)
        ]
    return {
        "grid": {"n_points": grid.n_points, "dx": grid.dx, "x0": grid.x0},
        "branches": branches,
    }
