"""Energy-versus-modes trade-off calculators.

The headline sampling bound is

    ``||p - q||_1 <= 2^46 (s+m)^2 2^{24 n/m} energy^{-1/42}``

inverted by ``required_energy``.  Quantities routinely exceed the float range
(values like 2^995), so everything is carried in log2 form; linear values are
reported alongside whenever they are representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG2_C = 46.0
SIZE_EXPONENT = 2.0
MODE_EXPONENT = 24.0
ENERGY_EXPONENT = 1.0 / 42.0


@dataclass(frozen=True)
class TradeoffInput:
    n: int
    m: int
    s: int
    energy: float | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if min(self.n, self.m, self.s) < 1:
            raise ValueError("n, m, s must be positive")
        if self.epsilon is not None and not (0 < self.epsilon <= 2):
            raise ValueError("epsilon must lie in (0, 2]")


def _to_linear(log2_value: float) -> float:
    return 2.0 ** log2_value if log2_value < 1024 else math.inf


def log2_sampling_error_bound(n: int, m: int, s: int, log2_energy: float) -> float:
    return (
        LOG2_C
        + SIZE_EXPONENT * math.log2(s + m)
        + MODE_EXPONENT * n / m
        - ENERGY_EXPONENT * log2_energy
    )


def sampling_error_bound(
    n: int, m: int, s: int, energy: float | None = None, log2_energy: float | None = None
) -> float:
    """min(2, 2^46 (s+m)^2 2^{24 n/m} energy^{-1/42})."""
    if log2_energy is None:
        if energy is None or energy <= 0:
            raise ValueError("provide energy > 0 or log2_energy")
        log2_energy = math.log2(energy)
    return min(2.0, _to_linear(log2_sampling_error_bound(n, m, s, log2_energy)))


def log2_required_energy(n: int, m: int, s: int, epsilon: float) -> float:
    if not (0 < epsilon <= 2):
        raise ValueError("epsilon must lie in (0, 2]")
    return 42.0 * (
        LOG2_C
        + SIZE_EXPONENT * math.log2(s + m)
        + MODE_EXPONENT * n / m
        - math.log2(epsilon)
    )


def required_energy(n: int, m: int, s: int, epsilon: float) -> tuple[float, float]:
    """(log2 energy, linear energy or inf) achieving L1 error epsilon."""
    log2_e = log2_required_energy(n, m, s, epsilon)
    return log2_e, _to_linear(log2_e)


# Constants of the corollary form energy = C (2^{n/m})^delta (s, eps powers),
# derived by expanding the 42nd power of the inverted main bound.
DERIVED_CONSTANTS = {
    "log2_C": 42.0 * LOG2_C,  # 1932
    "delta": 42.0 * MODE_EXPONENT,  # 1008
    "mu_size": 42.0 * SIZE_EXPONENT,  # 84, applied to (s + m)
    "mu_eps": 42.0,  # inverse-error power
}


# -- implementation-side bounds -----------------------------------------------------


@dataclass(frozen=True)
class ImplementationEnergy:
    """log2-form evaluation of the compiled-scheme energy bound."""

    log2_energy: float
    energy: float
    xi_bar_wtot: float  # 72 s 2^ell + 10 log2(1/Delta)
    log2_g_bar_wtot: float  # log2(1024 2^{148 ell} / Delta^3)
    log2_xi_wu: float
    log2_g_wu: float


def implementation_energy_bound(s: int, ell: int, delta: float) -> ImplementationEnergy:
    """energy(W_tot) <= s^3 2^{891 ell + 62} / Delta^21, with the composite parameters."""
    if s < 1 or ell < 1:
        raise ValueError("s and ell must be positive")
    if not (0 < delta < 2.0 ** -(ell + 1)) and delta != 2.0 ** -(ell + 1):
        raise ValueError("hypothesis requires delta <= 2^-(ell+1)")
    log2_inv_delta = -math.log2(delta)
    log2_energy = 3.0 * math.log2(s) + 891.0 * ell + 62.0 + 21.0 * log2_inv_delta
    return ImplementationEnergy(
        log2_energy=log2_energy,
        energy=_to_linear(log2_energy),
        xi_bar_wtot=72.0 * s * 2.0 ** ell + 10.0 * log2_inv_delta,
        log2_g_bar_wtot=10.0 + 148.0 * ell + 3.0 * log2_inv_delta,
        log2_xi_wu=math.log2(72.0 * s) + ell,
        log2_g_wu=8.0 + 148.0 * ell,
    )


def log2_delta_max(s: int, ell: int, log2_energy: float) -> float:
    """log2 of min{2^-(ell+1), s^{3/21} 2^{(891 ell + 62)/21} energy^{-1/21}}."""
    return min(
        -(ell + 1.0),
        (3.0 * math.log2(s) + 891.0 * ell + 62.0 - log2_energy) / 21.0,
    )


# -- regime table --------------------------------------------------------------------


@dataclass(frozen=True)
class RegimeRow:
    label: str
    n_values: tuple[int, ...]
    log2_energy: tuple[float, ...]
    fitted_exponent: float
    growth_class: str


def _fit_power_exponent(ns, ys) -> float:
    """Least-squares exponent beta of y ~ a + b n^beta."""
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)

    def residual(beta: float) -> float:
        x = ns ** beta
        A = np.stack([np.ones_like(x), x], axis=1)
        coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        return float(np.sum((A @ coef - ys) ** 2))

    betas = np.linspace(0.02, 1.4, 277)
    errs = [residual(b) for b in betas]
    best = betas[int(np.argmin(errs))]
    # local refinement
    lo, hi = max(0.01, best - 0.01), best + 0.01
    for _ in range(40):
        mid1 = lo + (hi - lo) / 3
        mid2 = hi - (hi - lo) / 3
        if residual(mid1) < residual(mid2):
            hi = mid2
        else:
            lo = mid1
    return float((lo + hi) / 2)


def classify_growth(beta: float) -> str:
    if beta >= 0.85:
        return "exponential"
    if beta <= 0.25:
        return "polynomial"
    return "subexponential"


def regime_table(n_values, s_fn, eps_fn, m_fns=None) -> list[RegimeRow]:
    """Required-energy growth for mode counts m in {1, ceil(sqrt n), n}.

    Growth classes are for the ENERGY as a function of n: a log2-energy
    fitted power ~1 means exponential energy, ~1/2 subexponential, and a
    sublinear/logarithmic log2-energy means polynomial energy.
    """
    if m_fns is None:
        m_fns = {
            "m=1": lambda n: 1,
            "m=ceil(sqrt(n))": lambda n: math.ceil(math.sqrt(n)),
            "m=n": lambda n: n,
        }
    rows = []
    for label, m_fn in m_fns.items():
        log2s = tuple(
            log2_required_energy(n, m_fn(n), s_fn(n), eps_fn(n)) for n in n_values
        )
        beta = _fit_power_exponent(n_values, log2s)
        rows.append(
            RegimeRow(
                label=label,
                n_values=tuple(n_values),
                log2_energy=log2s,
                fitted_exponent=beta,
                growth_class=classify_growth(beta),
            )
        )
    return rows
