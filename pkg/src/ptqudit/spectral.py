"""
Certifying the order of the exceptional point.

Two independent signatures are fitted: the ``delta**(1/n)`` splitting of the
spectrum under a small perturbation, and the algebraic growth of occupations
at the EP. The exponential rate in the broken phase is fitted for contrast.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import TimeSeries
from .errors import DomainError
from .linalg import eigenvalues
from .model import Phase, PTHamiltonian, classify_phase

__all__ = [
    "PowerLawFit",
    "PuiseuxFit",
    "RateFit",
    "default_delta_grid",
    "fit_power_law",
    "growth_exponent_fit",
    "growth_rate_fit",
    "nilpotency_index",
    "perturbed_hamiltonian",
    "puiseux_fit",
]

ACCEPT_R_SQUARED = 0.99
GROWTH_WINDOW = (2.0, 4.5)


def _r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    sst = float(np.sum((y - y.mean()) ** 2))
    sse = float(np.sum((y - fitted) ** 2))
    if sst == 0.0:
        return 1.0 if sse == 0.0 else 0.0
    return min(1.0, max(0.0, 1.0 - sse / sst))


@dataclass(frozen=True)
class PowerLawFit:
    """
    Least-squares line through ``(log x, log y)``.

    ``intercept`` is the natural log of the prefactor, so
    ``y ~ exp(intercept) * x**exponent``.
    """

    exponent: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    accepted: bool = True
    diagnostic: str = ""


def fit_power_law(x, y, threshold: float = ACCEPT_R_SQUARED) -> PowerLawFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("x and y must be 1-d arrays of equal length")
    if x.size < 3:
        raise DomainError(f"need at least 3 points, got {x.size}")
    if np.any(y <= 0) or np.any(x <= 0):
        raise DomainError("power-law fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    r2 = _r_squared(ly, slope * lx + intercept)
    ok = r2 >= threshold
    note = "" if ok else f"rSquared {r2:.4f} below {threshold}; data do not follow a power law"
    return PowerLawFit(float(slope), float(intercept), r2, (float(x.min()), float(x.max())), ok, note)


# ---------------------------------------------------------------------------
# Puiseux splitting
# ---------------------------------------------------------------------------

def perturbed_hamiltonian(h: PTHamiltonian, delta: float) -> np.ndarray:
    """``H(gamma = J) + i J delta |1><1|``."""
    if classify_phase(h) is not Phase.EXCEPTIONAL_POINT:
        raise DomainError(f"perturbation is defined at the EP; got gamma/J = {h.gamma / h.coupling}")
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta}")
    m = np.array(h.matrix)
    m[0, 0] += 1j * h.coupling * delta
    return m


def default_delta_grid() -> np.ndarray:
    """12 points per decade over ``[1e-4, 1e-1]``."""
    return np.logspace(-4, -1, 37)


@dataclass(frozen=True)
class PuiseuxFit:
    """
    Fits of the largest real and imaginary eigenvalue parts against delta.

    A part that vanishes identically over the grid (the d = 2 spectrum is
    purely imaginary) has no fit and is ``None``.
    """

    real: PowerLawFit | None
    imag: PowerLawFit | None
    deltas: np.ndarray
    spectra: np.ndarray

    def fits(self) -> dict[str, PowerLawFit]:
        return {k: v for k, v in (("real", self.real), ("imag", self.imag)) if v is not None}


def puiseux_fit(h: PTHamiltonian, deltas=None, workers: int = 1) -> PuiseuxFit:
    """Fit ``max|Re lambda|`` and ``max|Im lambda|`` of the perturbed spectrum against delta."""
    grid = default_delta_grid() if deltas is None else np.asarray(deltas, dtype=float)
    if grid.size < 10 or grid.max() / grid.min() < 100:
        raise DomainError("delta grid must hold >= 10 points spanning >= 2 decades")

    def spectrum(delta: float) -> np.ndarray:
        return eigenvalues(perturbed_hamiltonian(h, delta))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = np.array(list(pool.map(spectrum, grid)))
    else:
        spectra = np.array([spectrum(d) for d in grid])
    floor = 1e-12 * float(np.max(np.abs(spectra)))
    parts = []
    for part in (spectra.real, spectra.imag):
        peak = np.max(np.abs(part), axis=1)
        parts.append(fit_power_law(grid, peak) if np.all(peak > floor) else None)
    return PuiseuxFit(parts[0], parts[1], grid, spectra)


# ---------------------------------------------------------------------------
# Growth laws
# ---------------------------------------------------------------------------

def _window_data(series: TimeSeries, key: str, window: tuple[float, float]):
    sub = series.window(*window)
    if len(sub) < 3:
        raise DomainError(f"window {window} holds {len(sub)} samples; need >= 3")
    y = np.asarray(sub[key], dtype=float)
    if np.any(y <= 0):
        raise DomainError(f"observable {key!r} is not positive throughout window {window}")
    return sub.times, y


def growth_exponent_fit(
    series: TimeSeries, key: str = "trace", window: tuple[float, float] = GROWTH_WINDOW
) -> PowerLawFit:
    """Algebraic growth exponent of ``series[key]`` over ``window``."""
    t, y = _window_data(series, key, window)
    return fit_power_law(t, y)


@dataclass(frozen=True)
class RateFit:
    """Slope of ``log y`` against ``t``; ``y ~ exp(intercept + rate * t)``."""

    rate: float
    intercept: float
    r_squared: float
    window: tuple[float, float]

    def __float__(self) -> float:
        return self.rate


def growth_rate_fit(
    series: TimeSeries, key: str = "trace", window: tuple[float, float] = GROWTH_WINDOW
) -> RateFit:
    t, y = _window_data(series, key, window)
    ly = np.log(y)
    slope, intercept = np.polyfit(t, ly, 1)
    return RateFit(float(slope), float(intercept), _r_squared(ly, slope * t + intercept),
                   (float(t[0]), float(t[-1])))


def nilpotency_index(h, tol: float = 1e-10) -> int | None:
    """Smallest ``m <= d`` with ``||H^m|| <= tol ||H||^m``, or ``None``."""
    m = h.matrix if isinstance(h, PTHamiltonian) else np.asarray(h, dtype=complex)
    nrm = np.linalg.norm(m, 2)
    if nrm == 0.0:
        return 1
    power = np.eye(m.shape[0], dtype=complex)
    for k in range(1, m.shape[0] + 1):
        power = power @ m
        if np.linalg.norm(power, 2) <= tol * nrm**k:
            return k
    return None
