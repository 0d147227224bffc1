"""
Entropies, two-qubit reductions and Bloch coordinates of the qudit state.

At ``d = 4`` the modes factor as ``|1> = |00>, |2> = |01>, |3> = |10>,
|4> = |11>``. The first factor selects the sector (gain modes 1-2 versus
loss modes 3-4), the second the internal level inside a sector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import EvolvedDensity, TimeSeries
from .errors import DimensionError, DomainError, NumericalFailure
from .linalg import eig
from .model import Phase, PTHamiltonian, classify_phase

__all__ = [
    "BlochPoint",
    "Factor",
    "SpectralExpansion",
    "SteadyStateFit",
    "bloch_vector",
    "entropy",
    "expansion_occupations",
    "partial_trace",
    "shannon_bits",
    "steady_state_fit",
    "subsystem_entropies",
]

TRACE_TOL = 1e-10
ZERO_EIGENVALUE = 1e-12
NEGATIVE_CLAMP = 1e-10
EXPANSION_CONDITION_LIMIT = 1e8


def _as_normalized(rho) -> np.ndarray:
    if isinstance(rho, EvolvedDensity):
        return rho.normalized()
    return np.asarray(rho, dtype=complex)


def shannon_bits(weights) -> float:
    """``-sum w log2 w`` over a probability vector, with ``0 log 0 = 0``."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < -NEGATIVE_CLAMP):
        raise DomainError(f"negative weight {w.min():.3g} beyond round-off")
    w = w[w > ZERO_EIGENVALUE]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def entropy(rho) -> float:
    """
    Von Neumann entropy in bits of a unit-trace density matrix.

    Accepts an array or an :class:`EvolvedDensity`, whose normalized form is
    used. Eigenvalues below ``1e-12`` count as zero.
    """
    m = _as_normalized(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"density must be square, got shape {m.shape}")
    tr = np.trace(m)
    if abs(tr - 1) > TRACE_TOL:
        raise DomainError(f"density trace {tr:.12g} is not 1")
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return min(shannon_bits(w), math.log2(m.shape[0]))


class Factor(enum.Enum):
    """Tensor factor kept by :func:`partial_trace`."""

    SECTOR = "sector"
    INTERNAL = "internal"


def partial_trace(rho, keep: Factor) -> np.ndarray:
    """Reduce a 4x4 density matrix to the ``keep`` qubit."""
    m = _as_normalized(rho)
    if m.shape != (4, 4):
        raise DomainError(f"partial trace needs a 4x4 density, got shape {m.shape}")
    r = m.reshape(2, 2, 2, 2)
    if Factor(keep) is Factor.SECTOR:
        return np.einsum("aibi->ab", r)
    return np.einsum("iaib->ab", r)


def subsystem_entropies(rho) -> tuple[float, float]:
    """``(S_gain, S_loss)``: entropies of the sector and internal reductions."""
    m = _as_normalized(rho)
    return entropy(partial_trace(m, Factor.SECTOR)), entropy(partial_trace(m, Factor.INTERNAL))


@dataclass(frozen=True)
class BlochPoint:
    x: float
    y: float
    z: float

    @property
    def radius(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)


def bloch_vector(sigma) -> BlochPoint:
    s = np.asarray(sigma, dtype=complex)
    if s.shape != (2, 2):
        raise DimensionError(f"expected a 2x2 density, got shape {s.shape}")
    if np.max(np.abs(s - s.conj().T)) > 1e-10:
        raise DomainError("qubit density is not Hermitian")
    if abs(np.trace(s) - 1) > TRACE_TOL:
        raise DomainError(f"qubit density trace {np.trace(s):.12g} is not 1")
    return BlochPoint(
        float(2 * s[0, 1].real),
        float(2 * s[1, 0].imag),
        float((s[0, 0] - s[1, 1]).real),
    )


# ---------------------------------------------------------------------------
# Eigenvector-expansion pathway
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralExpansion:
    """
    Occupations of the evolved density computed from the spectrum of ``H``.

    With ``rho(0) = sum_i alphas[i] |v_i><v_i|``, ``|v_i> = sum_k betas[i, k]
    |z_k>`` over right eigenvectors of ``H`` and ``|z_k> = sum_l kappas[k, l]
    |f_l>`` over the eigenbasis of ``rho(t)``, the eigenvalues of ``rho(t)``
    are ``occupations * exp(log_scale)``.
    """

    time: float
    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    alphas: np.ndarray
    initial_vectors: np.ndarray
    betas: np.ndarray
    kappas: np.ndarray
    occupations: np.ndarray
    log_scale: float
    imaginary_residue: float

    @property
    def fractional(self) -> np.ndarray:
        return self.occupations / self.occupations.sum()

    def entropy(self) -> float:
        return shannon_bits(self.fractional)

    def reconstruct_initial(self) -> np.ndarray:
        """``sum_{k,j,i} alpha_i beta_ik conj(beta_ij) |z_k><z_j|``."""
        c = self.betas.T @ np.diag(self.alphas) @ self.betas.conj()
        return self.right_vectors @ c @ self.right_vectors.conj().T


def expansion_occupations(rho0, h: PTHamiltonian, t: float) -> SpectralExpansion:
    """
    Occupation eigenvalues of ``rho(t)`` from the eigen-expansion of ``H``.

    No matrix exponential is involved: each right eigenvector picks up the
    phase ``exp(-i lambda_k t)``, so coherences evolve with
    ``exp(-i (lambda_k - conj(lambda_j)) t)``. For a real spectrum this is
    the familiar ``exp(-i (lambda_k - lambda_j) t)``. Requires a complete
    eigenbasis; at or near the exceptional point this raises.
    """
    if classify_phase(h) is Phase.EXCEPTIONAL_POINT:
        raise NumericalFailure("eigenvectors coalesce at the exceptional point; use evolve_density")
    m0 = _as_normalized(rho0)
    if m0.shape != (h.dim, h.dim):
        raise DimensionError(f"density shape {m0.shape} does not match d = {h.dim}")
    dec = eig(h.matrix)
    if dec.condition >= EXPANSION_CONDITION_LIMIT:
        raise NumericalFailure(
            f"eigenvector condition number {dec.condition:.3g} too large; use evolve_density"
        )
    lam = dec.values
    z = dec.vectors

    w, ups = np.linalg.eigh(0.5 * (m0 + m0.conj().T))
    order = np.argsort(w)[::-1]
    w, ups = w[order], ups[:, order]
    if np.any(w < -NEGATIVE_CLAMP):
        raise DomainError("initial density is not positive semidefinite")
    alphas = np.clip(w, 0.0, None)
    alphas = alphas / alphas.sum()
    betas = np.linalg.solve(z, ups).T

    exponent = -1j * lam * t
    shift = float(np.max(exponent.real))
    phase = np.exp(exponent - shift)
    bt = betas * phase
    coeff = bt.T @ np.diag(alphas) @ bt.conj()
    rho_t = z @ coeff @ z.conj().T
    rho_t = 0.5 * (rho_t + rho_t.conj().T)

    _, phis = np.linalg.eigh(rho_t)
    kappas = (phis.conj().T @ z).T
    p = np.einsum("kj,kl,jl->l", coeff, kappas, kappas.conj())
    residue = float(np.max(np.abs(p.imag)) / max(np.max(np.abs(p.real)), np.finfo(float).tiny))
    if residue > 1e-9:
        raise NumericalFailure(f"occupations have imaginary residue {residue:.3g}")
    occ = np.clip(p.real, 0.0, None)
    return SpectralExpansion(
        time=float(t),
        eigenvalues=lam,
        right_vectors=z,
        alphas=alphas,
        initial_vectors=ups,
        betas=betas,
        kappas=kappas,
        occupations=occ,
        log_scale=2 * shift,
        imaginary_residue=residue,
    )


# ---------------------------------------------------------------------------
# Steady-state approach
# ---------------------------------------------------------------------------

POLYNOMIAL = "polynomial"
EXPONENTIAL = "exponential"
MIN_WINDOW_POINTS = 8


@dataclass(frozen=True)
class SteadyStateFit:
    """
    Best fit of ``a + b * g(t)`` with ``g = t**-rate`` (polynomial) or
    ``exp(-rate * t)`` (exponential).
    """

    form: str
    asymptote: float
    amplitude: float
    rate: float
    r_squared: float
    alternative_r_squared: float
    window: tuple[float, float]


def _linear_in_shape(t: np.ndarray, y: np.ndarray, g: np.ndarray) -> tuple[float, float, float]:
    design = np.column_stack([np.ones_like(t), g])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    sse = float(np.sum((design @ coef - y) ** 2))
    return float(coef[0]), float(coef[1]), sse


def _fit_form(t: np.ndarray, y: np.ndarray, form: str) -> tuple[float, float, float, float]:
    if form == POLYNOMIAL:
        shape = lambda r: t ** (-r)  # noqa: E731
        bounds = (0.05, 20.0)
    else:
        shape = lambda r: np.exp(-r * (t - t[0]))  # noqa: E731
        bounds = (0.01, 30.0)
    grid = np.geomspace(*bounds, 200)
    sse = [_linear_in_shape(t, y, shape(r))[2] for r in grid]
    i = int(np.argmin(sse))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(lambda r: _linear_in_shape(t, y, shape(r))[2],
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    rate = float(res.x) if res.fun <= sse[i] else float(grid[i])
    a, b, err = _linear_in_shape(t, y, shape(rate))
    if form == EXPONENTIAL:
        b *= math.exp(rate * t[0])
    return a, b, rate, err


def steady_state_fit(
    series: TimeSeries,
    key: str = "S_total",
    form: str | None = None,
    window: tuple[float, float] = (2.0, 4.5),
) -> SteadyStateFit:
    """
    Classify how ``series[key]`` approaches its late-time value.

    Both decay forms are fitted on ``window``; ``form=None`` reports the one
    with the smaller residual, otherwise the requested form is reported.
    """
    if form not in (None, POLYNOMIAL, EXPONENTIAL):
        raise DomainError(f"unknown form {form!r}")
    sub = series.window(*window)
    if len(sub) < MIN_WINDOW_POINTS:
        raise DomainError(f"need >= {MIN_WINDOW_POINTS} points in window {window}, got {len(sub)}")
    t = sub.times
    y = np.asarray(sub[key], dtype=float)
    sst = float(np.sum((y - y.mean()) ** 2))

    def r2(sse: float) -> float:
        if sst == 0.0:
            return 1.0 if sse == 0.0 else 0.0
        return min(1.0, max(0.0, 1 - sse / sst))

    fits = {f: _fit_form(t, y, f) for f in (POLYNOMIAL, EXPONENTIAL)}
    if form is None:
        form = min(fits, key=lambda f: fits[f][3])
    other = EXPONENTIAL if form == POLYNOMIAL else POLYNOMIAL
    a, b, rate, sse = fits[form]
    return SteadyStateFit(form, a, b, rate, r2(sse), r2(fits[other][3]), (float(t[0]), float(t[-1])))
