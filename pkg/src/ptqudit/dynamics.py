"""
Non-unitary propagation of pure states and density matrices.

Norms are not preserved by ``exp(-i H t)`` once ``gamma > 0``. States carry
a natural-log scale factor next to their stored amplitudes (or matrix) so
that the exponential growth in the broken phase never overflows.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, InvalidValueError, NumericalFailure
from .linalg import mat_exp
from .model import Phase, PTHamiltonian, classify_phase, passive_hamiltonian

__all__ = [
    "DEFAULT_OBSERVABLES",
    "EvolvedDensity",
    "OBSERVABLES",
    "PureState",
    "TimeSeries",
    "default_tmax",
    "evolve_density",
    "evolve_state",
    "lossy_propagator",
    "mode_occupations",
    "propagator",
    "sample_trajectory",
]

# Largest |t| * ||H||_2 accepted by a single propagator call.
OVERFLOW_GUARD = 500.0
RENORMALIZE_ABOVE = 1e100
HERMITICITY_DRIFT = 1e-8
DEFAULT_STEPS = 201


def propagator(h: PTHamiltonian, t: float) -> np.ndarray:
    """``U(t) = exp(-i H t)``; raises past the overflow guard."""
    if not np.isfinite(t):
        raise InvalidValueError(f"time must be finite, got {t}")
    load = abs(t) * np.linalg.norm(h.matrix, 2)
    if load > OVERFLOW_GUARD:
        raise NumericalFailure(
            f"|t|*||H|| = {load:.4g} exceeds {OVERFLOW_GUARD:g}; "
            "use evolve_density/evolve_state, which track a log scale"
        )
    return mat_exp(h.matrix, -1j * t)


def lossy_propagator(h: PTHamiltonian, t: float) -> np.ndarray:
    """Passive propagator ``exp(-i H_L t)``; forward time only."""
    if not np.isfinite(t):
        raise InvalidValueError(f"time must be finite, got {t}")
    if t < 0:
        raise DomainError("the loss-only propagator is defined for t >= 0 only")
    hl = passive_hamiltonian(h)
    load = t * np.linalg.norm(hl, 2)
    if load > OVERFLOW_GUARD:
        raise NumericalFailure(f"|t|*||H_L|| = {load:.4g} exceeds {OVERFLOW_GUARD:g}")
    return mat_exp(hl, -1j * t)


def _chunks(h: PTHamiltonian, t: float) -> tuple[int, float]:
    load = abs(t) * np.linalg.norm(h.matrix, 2)
    n = max(1, math.ceil(load / OVERFLOW_GUARD))
    return n, t / n


# ---------------------------------------------------------------------------
# Pure states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PureState:
    """
    Unnormalized state vector ``exp(log_scale / 2) * amplitudes``.

    ``norm_squared`` is the squared norm of the stored amplitudes; the
    physical squared norm is ``exp(log_scale) * norm_squared``.
    """

    amplitudes: np.ndarray
    log_scale: float = 0.0
    norm_squared: float = field(init=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 2:
            raise DimensionError(f"state must be a vector of length >= 2, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise InvalidValueError("state contains NaN or Inf")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "norm_squared", float(np.vdot(amps, amps).real))

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex)
        nrm = np.linalg.norm(amps)
        if nrm == 0:
            raise DomainError("cannot normalize the zero vector")
        return cls(amps / nrm)

    @classmethod
    def basis(cls, k: int, dim: int) -> "PureState":
        """Computational basis state ``|k>`` with ``k`` counted from 1."""
        if not 1 <= k <= dim:
            raise DomainError(f"mode {k} outside 1..{dim}")
        amps = np.zeros(dim, dtype=complex)
        amps[k - 1] = 1.0
        return cls(amps)

    @classmethod
    def symmetric(cls, dim: int) -> "PureState":
        return cls(np.full(dim, 1 / np.sqrt(dim), dtype=complex))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def total_weight(self) -> float:
        return math.exp(self.log_scale) * self.norm_squared

    def density(self) -> "EvolvedDensity":
        """Projector onto this state, carrying the same log scale."""
        return EvolvedDensity(np.outer(self.amplitudes, self.amplitudes.conj()), self.log_scale)


def evolve_state(psi0: PureState, h: PTHamiltonian, t: float) -> PureState:
    """``U(t) |psi0>``, not renormalized except for overflow bookkeeping."""
    if psi0.dim != h.dim:
        raise DimensionError(f"state dimension {psi0.dim} != Hamiltonian dimension {h.dim}")
    if psi0.norm_squared == 0:
        raise DomainError("initial state is the zero vector")
    n, dt = _chunks(h, t)
    u = propagator(h, dt)
    amps = np.array(psi0.amplitudes)
    log_scale = psi0.log_scale
    for _ in range(n):
        amps = u @ amps
        ns = float(np.vdot(amps, amps).real)
        if not math.isfinite(ns):
            raise NumericalFailure(f"state norm overflowed at t={t}")
        if ns > RENORMALIZE_ABOVE:
            amps /= math.sqrt(ns)
            log_scale += math.log(ns)
    return PureState(amps, log_scale)


def mode_occupations(psi: PureState) -> np.ndarray:
    """Scaled occupations ``|<k|psi>|^2``; their sum exceeds 1 under gain."""
    return math.exp(psi.log_scale) * np.abs(psi.amplitudes) ** 2


# ---------------------------------------------------------------------------
# Density matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolvedDensity:
    """Unnormalized density matrix ``exp(log_scale) * matrix``."""

    matrix: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise DimensionError(f"density must be square with d >= 2, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidValueError("density contains NaN or Inf")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.conj().T)) > 1e-10 * scale:
            raise DomainError("density matrix is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_weights(cls, weights) -> "EvolvedDensity":
        """Diagonal mixture over the computational basis, normalized to unit trace."""
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
            raise DomainError(f"weights must be finite, non-negative, not all zero: {weights}")
        return cls(np.diag(w / w.sum()).astype(complex))

    @classmethod
    def reference_mixed(cls) -> "EvolvedDensity":
        """``0.925 |1><1| + 0.025 (|2><2| + |3><3| + |4><4|)``."""
        return cls.from_weights([0.925, 0.025, 0.025, 0.025])

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return math.exp(self.log_scale) * float(np.trace(self.matrix).real)

    def effective(self) -> np.ndarray:
        return math.exp(self.log_scale) * self.matrix

    def normalized(self) -> np.ndarray:
        tr = float(np.trace(self.matrix).real)
        if not tr > 0:
            raise NumericalFailure(f"density trace {tr!r} cannot be normalized")
        return self.matrix / tr

    def occupations(self) -> np.ndarray:
        return math.exp(self.log_scale) * np.diag(self.matrix).real.copy()


def evolve_density(rho0: EvolvedDensity, h: PTHamiltonian, t: float) -> EvolvedDensity:
    """
    ``U(t) rho0 U(t)^H`` with the growth absorbed into ``log_scale``.

    The stored matrix is kept with trace in ``[1e-2, 1e2]``.
    """
    if rho0.dim != h.dim:
        raise DimensionError(f"density dimension {rho0.dim} != Hamiltonian dimension {h.dim}")
    n, dt = _chunks(h, t)
    u = propagator(h, dt)
    c = float(np.max(np.abs(u)))
    u_scaled = u / c
    rho = np.array(rho0.matrix)
    log_scale = rho0.log_scale
    for _ in range(n):
        rho = u_scaled @ rho @ u_scaled.conj().T
        log_scale += 2 * math.log(c)
        drift = float(np.max(np.abs(rho - rho.conj().T)))
        ref = float(np.max(np.abs(rho)))
        if drift > HERMITICITY_DRIFT * max(ref, np.finfo(float).tiny):
            raise NumericalFailure(f"Hermiticity drift {drift:.3g} at t={t}")
        rho = 0.5 * (rho + rho.conj().T)
        tr = float(np.trace(rho).real)
        if tr == 0.0 or not np.isfinite(tr):
            raise NumericalFailure(f"density trace underflowed to {tr!r} at t={t}")
        if not 1e-2 <= tr <= 1e2:
            rho /= tr
            log_scale += math.log(tr)
    return EvolvedDensity(rho, log_scale)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeSeries:
    """Observable columns sampled on a strictly increasing time grid."""

    times: np.ndarray
    columns: dict[str, np.ndarray]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or np.any(np.diff(times) <= 0):
            raise DomainError("times must be a strictly increasing 1-d grid")
        cols = {k: np.asarray(v) for k, v in self.columns.items()}
        for key, col in cols.items():
            if col.shape[0] != times.size:
                raise DimensionError(f"column {key!r} has {col.shape[0]} rows, expected {times.size}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "columns", cols)

    def __getitem__(self, key: str) -> np.ndarray:
        return self.columns[key]

    def __len__(self) -> int:
        return self.times.size

    def keys(self) -> list[str]:
        return list(self.columns)

    def window(self, tmin: float, tmax: float) -> "TimeSeries":
        mask = (self.times >= tmin) & (self.times <= tmax)
        return TimeSeries(self.times[mask], {k: v[mask] for k, v in self.columns.items()})

    def records(self) -> list[dict[str, float]]:
        keys = self.keys()
        return [
            {"t": float(t), **{k: float(self.columns[k][i]) for k in keys}}
            for i, t in enumerate(self.times)
        ]


OBSERVABLES = ("occupations", "trace", "entropy", "subsystem_entropies", "bloch", "propagator_norm")
DEFAULT_OBSERVABLES = frozenset({"occupations", "trace"})


def default_tmax(h: PTHamiltonian) -> float:
    """Two anti-periods in the unbroken phase, ``4.5 / J`` otherwise."""
    if classify_phase(h) is Phase.UNBROKEN:
        return 2 * h.period
    return 4.5 / h.coupling


def _column_names(observables: Iterable[str], dim: int) -> list[str]:
    names = []
    if "occupations" in observables:
        names += [f"P{k}" for k in range(1, dim + 1)]
    if "trace" in observables:
        names.append("trace")
    if "entropy" in observables:
        names.append("S_total")
    if "subsystem_entropies" in observables:
        names += ["S_gain", "S_loss"]
    if "bloch" in observables:
        names += ["gx", "gy", "gz", "lx", "ly", "lz"]
    if "propagator_norm" in observables:
        names.append("U_norm_sq")
    return names


def _point_evaluator(initial, h: PTHamiltonian, observables: frozenset) -> Callable[[float], list[float]]:
    from . import information as info
    from .linalg import singular_values

    def evaluate(t: float) -> list[float]:
        try:
            return _evaluate(t)
        except NumericalFailure as exc:
            raise NumericalFailure(f"at t={t:.12g}: {exc}") from exc

    def _evaluate(t: float) -> list[float]:
        if isinstance(initial, PureState):
            psi = evolve_state(initial, h, t)
            occ = mode_occupations(psi)
            trace = psi.total_weight
            need_rho = observables & {"entropy", "subsystem_entropies", "bloch"}
            rho = np.outer(psi.amplitudes, psi.amplitudes.conj()) / psi.norm_squared if need_rho else None
        else:
            state = evolve_density(initial, h, t)
            occ = state.occupations()
            trace = state.trace
            rho = state.normalized()
        row: list[float] = []
        if "occupations" in observables:
            row += [float(x) for x in occ]
        if "trace" in observables:
            row.append(float(trace))
        if "entropy" in observables:
            row.append(info.entropy(rho))
        if "subsystem_entropies" in observables:
            row += list(info.subsystem_entropies(rho))
        if "bloch" in observables:
            g = info.bloch_vector(info.partial_trace(rho, info.Factor.SECTOR))
            l = info.bloch_vector(info.partial_trace(rho, info.Factor.INTERNAL))
            row += [g.x, g.y, g.z, l.x, l.y, l.z]
        if "propagator_norm" in observables:
            row.append(float(singular_values(propagator(h, t))[0] ** 2))
        return row

    return evaluate


def sample_trajectory(
    initial: PureState | EvolvedDensity,
    h: PTHamiltonian,
    tmax: float | None = None,
    steps: int = DEFAULT_STEPS,
    observables: Iterable[str] = DEFAULT_OBSERVABLES,
    workers: int = 1,
    times: Sequence[float] | None = None,
) -> TimeSeries:
    """
    Evaluate observables on a uniform grid ``0..tmax`` (``steps`` points).

    Every grid point is propagated from ``t = 0`` with its own ``U(t)``, so
    errors do not compound along the grid. With ``workers > 1`` points are
    evaluated on a thread pool; results are assembled in grid order and are
    identical to the serial run. An explicit ``times`` grid overrides
    ``tmax``/``steps``.
    """
    obs = frozenset(observables)
    unknown = obs - set(OBSERVABLES)
    if unknown:
        raise DomainError(f"unknown observables: {sorted(unknown)}")
    if obs & {"subsystem_entropies", "bloch"} and h.dim != 4:
        raise DomainError("subsystem observables need d = 4")
    if initial.dim != h.dim:
        raise DimensionError(f"initial state dimension {initial.dim} != {h.dim}")
    if times is None:
        if tmax is None:
            tmax = default_tmax(h)
        if not (np.isfinite(tmax) and tmax > 0):
            raise DomainError(f"tmax must be positive and finite, got {tmax}")
        if int(steps) != steps or steps < 2:
            raise DomainError(f"steps must be an integer >= 2, got {steps}")
        grid = np.linspace(0.0, float(tmax), int(steps))
    else:
        grid = np.asarray(times, dtype=float)

    evaluate = _point_evaluator(initial, h, obs)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, grid))
    else:
        rows = [evaluate(t) for t in grid]

    names = _column_names(obs, h.dim)
    table = np.array(rows, dtype=float).reshape(len(grid), len(names))
    return TimeSeries(grid, {name: table[:, i] for i, name in enumerate(names)})
