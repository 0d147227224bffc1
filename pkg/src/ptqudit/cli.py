"""
Command-line scenario runner.

    ptqudit evolve --preset fig2a --out fig2a.csv
    ptqudit entropy --gamma-ratio 1.2 --initial paper-mixed --format json
    ptqudit puiseux

Settings resolve in the order defaults < preset < config file < flags.
Exit codes: 0 success, 2 invalid arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .dynamics import (
    DEFAULT_STEPS,
    EvolvedDensity,
    PureState,
    TimeSeries,
    default_tmax,
    sample_trajectory,
)
from .errors import NumericalFailure, PTQuditError
from .linalg import eig
from .model import Phase, PTHamiltonian, build_hamiltonian, classify_phase, spectrum_closed_form
from .output import render
from .spectral import GROWTH_WINDOW, growth_exponent_fit, growth_rate_fit, puiseux_fit

OUTPUT_DIR_ENV = "PTQUDIT_OUTPUT_DIR"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

# gamma/J and initial state for each figure panel.
PRESETS: dict[str, dict[str, str]] = {
    "fig2a": {"gamma-ratio": "0", "initial": "mode1"},
    "fig2b": {"gamma-ratio": "0.2", "initial": "symmetric"},
    "fig2c": {"gamma-ratio": "1", "initial": "symmetric"},
    "fig2d": {"gamma-ratio": "1.2", "initial": "symmetric"},
    "fig3-pure-hermitian": {"gamma-ratio": "0", "initial": "symmetric"},
    "fig3-pure-unbroken": {"gamma-ratio": "0.2", "initial": "symmetric"},
    "fig3-pure-ep": {"gamma-ratio": "1", "initial": "symmetric"},
    "fig3-pure-broken": {"gamma-ratio": "1.2", "initial": "symmetric"},
    "fig3-mixed-hermitian": {"gamma-ratio": "0", "initial": "paper-mixed"},
    "fig3-mixed-unbroken": {"gamma-ratio": "0.2", "initial": "paper-mixed"},
    "fig3-mixed-ep": {"gamma-ratio": "1", "initial": "paper-mixed"},
    "fig3-mixed-broken": {"gamma-ratio": "1.2", "initial": "paper-mixed"},
}

CONFIG_KEYS = {
    "j-coupling", "gamma", "gamma-ratio", "dim", "tmax", "steps", "initial",
    "format", "out", "preset", "workers", "delta-min", "delta-max",
}

COMMANDS = ("spectrum", "evolve", "entropy", "bloch", "puiseux", "fit-growth", "fit-rate")


class UsageError(PTQuditError):
    """Invalid command-line or configuration input (exit code 2)."""


@dataclass(frozen=True)
class ScenarioConfig:
    command: str
    coupling: float = 1.0
    gamma: float = 0.0
    dim: int = 4
    tmax: float | None = None
    steps: int = DEFAULT_STEPS
    initial: str = "symmetric"
    fmt: str = "csv"
    out: str | None = None
    workers: int = 1
    delta_min: float = 1e-4
    delta_max: float = 1e-1

    def hamiltonian(self) -> PTHamiltonian:
        return build_hamiltonian(self.coupling, self.gamma, self.dim)


# ---------------------------------------------------------------------------
# Initial-state grammar
# ---------------------------------------------------------------------------

def _parse_complex(token: str) -> complex:
    tok = token.strip().replace(" ", "")
    if not tok or "j" in tok:
        raise UsageError(f"cannot parse amplitude {token!r}; expected a+bi")
    try:
        return complex(tok.replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"cannot parse amplitude {token!r}; expected a+bi") from exc


def parse_initial(spec: str, dim: int) -> PureState | EvolvedDensity:
    """
    Parse an initial-state spec.

    ``pure:a+bi,...`` and ``mixed:w1,...`` are normalized on ingest; the
    presets are ``symmetric``, ``paper-mixed`` and ``modeK`` (basis state K).
    """
    text = spec.strip()
    if text == "symmetric":
        return PureState.symmetric(dim)
    if text == "paper-mixed":
        if dim != 4:
            raise UsageError("paper-mixed is a d = 4 state")
        return EvolvedDensity.reference_mixed()
    m = re.fullmatch(r"mode(\d+)", text)
    if m:
        k = int(m.group(1))
        if not 1 <= k <= dim:
            raise UsageError(f"mode{k} outside 1..{dim}")
        return PureState.basis(k, dim)
    kind, _, body = text.partition(":")
    if kind not in ("pure", "mixed") or not body:
        raise UsageError(f"unknown initial state {spec!r}")
    tokens = body.split(",")
    if len(tokens) != dim:
        raise UsageError(f"initial state has {len(tokens)} entries, dimension is {dim}")
    if kind == "pure":
        amps = np.array([_parse_complex(t) for t in tokens])
        if np.linalg.norm(amps) == 0:
            raise UsageError("pure initial state is the zero vector")
        return PureState.normalized(amps)
    try:
        weights = [float(t) for t in tokens]
    except ValueError as exc:
        raise UsageError(f"cannot parse mixed weights {body!r}") from exc
    if any(not math.isfinite(w) or w < 0 for w in weights) or sum(weights) <= 0:
        raise UsageError("mixed weights must be finite, non-negative and not all zero")
    return EvolvedDensity.from_weights(weights)


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

Table = tuple[list[str], list[list]]


def _trajectory(cfg: ScenarioConfig, observables: set[str]) -> TimeSeries:
    h = cfg.hamiltonian()
    initial = parse_initial(cfg.initial, cfg.dim)
    tmax = cfg.tmax if cfg.tmax is not None else default_tmax(h)
    return sample_trajectory(initial, h, tmax, cfg.steps, observables, workers=cfg.workers)


def _series_table(series: TimeSeries, keys: list[str]) -> Table:
    rows = [[float(t)] + [float(series[k][i]) for k in keys] for i, t in enumerate(series.times)]
    return ["t"] + keys, rows


def run_evolve(cfg: ScenarioConfig) -> Table:
    series = _trajectory(cfg, {"occupations", "trace"})
    return _series_table(series, [f"P{k}" for k in range(1, cfg.dim + 1)] + ["trace"])


def run_entropy(cfg: ScenarioConfig) -> Table:
    if cfg.dim == 4:
        series = _trajectory(cfg, {"entropy", "subsystem_entropies"})
        return _series_table(series, ["S_total", "S_gain", "S_loss"])
    series = _trajectory(cfg, {"entropy"})
    return _series_table(series, ["S_total"])


def run_bloch(cfg: ScenarioConfig) -> Table:
    if cfg.dim != 4:
        raise UsageError("bloch needs --dim 4")
    series = _trajectory(cfg, {"bloch"})
    return _series_table(series, ["gx", "gy", "gz", "lx", "ly", "lz"])


def _sorted_pairs(values: np.ndarray) -> list[tuple[float, float]]:
    rounded = [(round(v.real, 12) + 0.0, round(v.imag, 12) + 0.0) for v in values]
    return sorted(rounded)


def run_spectrum(cfg: ScenarioConfig) -> Table:
    h = cfg.hamiltonian()
    numeric = _sorted_pairs(eig(h.matrix).values)
    closed = _sorted_pairs(spectrum_closed_form(h))
    rows = [[k + 1, n[0], n[1], c[0], c[1]] for k, (n, c) in enumerate(zip(numeric, closed))]
    return ["k", "re", "im", "closed_re", "closed_im"], rows


def run_puiseux(cfg: ScenarioConfig) -> Table:
    h = cfg.hamiltonian()
    if classify_phase(h) is not Phase.EXCEPTIONAL_POINT:
        raise UsageError("puiseux requires gamma = J (use --gamma-ratio 1)")
    if not 0 < cfg.delta_min < cfg.delta_max <= 1:
        raise UsageError("need 0 < delta-min < delta-max <= 1")
    decades = math.log10(cfg.delta_max / cfg.delta_min)
    grid = np.logspace(math.log10(cfg.delta_min), math.log10(cfg.delta_max), int(round(12 * decades)) + 1)
    fit = puiseux_fit(h, grid, workers=cfg.workers)
    rows = []
    for part, f in (("real", fit.real), ("imag", fit.imag)):
        if f is None:
            rows.append([part, math.nan, math.nan, math.nan, float(grid[0]), float(grid[-1]), False])
        else:
            rows.append([part, f.exponent, f.intercept, f.r_squared, f.window[0], f.window[1], f.accepted])
    return ["part", "exponent", "intercept", "rSquared", "window_min", "window_max", "accepted"], rows


def _fit_window(cfg: ScenarioConfig) -> tuple[float, float]:
    return GROWTH_WINDOW[0] / cfg.coupling, GROWTH_WINDOW[1] / cfg.coupling


def run_fit_growth(cfg: ScenarioConfig) -> Table:
    series = _trajectory(cfg, {"trace"})
    f = growth_exponent_fit(series, "trace", _fit_window(cfg))
    return (["observable", "exponent", "intercept", "rSquared", "window_min", "window_max", "accepted"],
            [["trace", f.exponent, f.intercept, f.r_squared, f.window[0], f.window[1], f.accepted]])


def run_fit_rate(cfg: ScenarioConfig) -> Table:
    series = _trajectory(cfg, {"trace"})
    f = growth_rate_fit(series, "trace", _fit_window(cfg))
    return (["observable", "rate", "intercept", "rSquared", "window_min", "window_max"],
            [["trace", f.rate, f.intercept, f.r_squared, f.window[0], f.window[1]]])


RUNNERS = {
    "spectrum": run_spectrum,
    "evolve": run_evolve,
    "entropy": run_entropy,
    "bloch": run_bloch,
    "puiseux": run_puiseux,
    "fit-growth": run_fit_growth,
    "fit-rate": run_fit_rate,
}

# Commands that default to the exceptional point when gamma is not given.
_EP_DEFAULT = {"puiseux", "fit-growth"}
_BROKEN_DEFAULT = {"fit-rate"}


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def read_config_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: expected key=value with a known key, got {raw!r}")
        values[key] = value.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--j-coupling", help="coupling J (default 1.0)")
    gamma = common.add_mutually_exclusive_group()
    gamma.add_argument("--gamma", help="absolute gain/loss strength")
    gamma.add_argument("--gamma-ratio", help="gain/loss as a multiple of J")
    common.add_argument("--dim", help="qudit dimension d (default 4)")
    common.add_argument("--tmax", help="end of the time grid, units 1/J")
    common.add_argument("--steps", help=f"number of grid points (default {DEFAULT_STEPS})")
    common.add_argument("--initial", help="symmetric | paper-mixed | modeK | pure:a+bi,... | mixed:w1,...")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--preset", choices=sorted(PRESETS), help="figure preset")
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--workers", help="threads for grid evaluation (default 1)")
    common.add_argument("--delta-min", help="puiseux: smallest perturbation (default 1e-4)")
    common.add_argument("--delta-max", help="puiseux: largest perturbation (default 1e-1)")

    parser = argparse.ArgumentParser(prog="ptqudit", description="PT-symmetric qudit scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _number(settings: dict[str, str], key: str, kind=float):
    raw = settings[key]
    try:
        value = kind(raw)
    except ValueError as exc:
        raise UsageError(f"--{key}: cannot parse {raw!r}") from exc
    if kind is float and not math.isfinite(value):
        raise UsageError(f"--{key} must be finite")
    return value


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    """Merge preset, config file and flags into a validated ScenarioConfig."""
    flags = {k.replace("_", "-"): v for k, v in vars(args).items()
             if v is not None and k not in ("command", "config")}
    file_values = read_config_file(args.config) if args.config else {}
    preset = flags.get("preset") or file_values.get("preset")
    settings: dict[str, str] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise UsageError(f"unknown preset {preset!r}")
        settings.update(PRESETS[preset])
    for source in (file_values, flags):
        if "gamma" in source or "gamma-ratio" in source:
            settings.pop("gamma", None)
            settings.pop("gamma-ratio", None)
        settings.update(source)
    if "gamma" in settings and "gamma-ratio" in settings:
        raise UsageError("give either gamma or gamma-ratio, not both")

    command = args.command
    cfg = ScenarioConfig(command)
    if "j-coupling" in settings:
        cfg = replace(cfg, coupling=_number(settings, "j-coupling"))
    if cfg.coupling <= 0:
        raise UsageError("--j-coupling must be positive")
    if "gamma" in settings:
        gamma = _number(settings, "gamma")
    elif "gamma-ratio" in settings:
        gamma = _number(settings, "gamma-ratio") * cfg.coupling
    elif command in _EP_DEFAULT:
        gamma = cfg.coupling
    elif command in _BROKEN_DEFAULT:
        gamma = 1.2 * cfg.coupling
    else:
        gamma = 0.0
    if gamma < 0:
        raise UsageError("gamma must be >= 0")
    cfg = replace(cfg, gamma=gamma)
    if "dim" in settings:
        cfg = replace(cfg, dim=_number(settings, "dim", int))
    if cfg.dim < 2:
        raise UsageError("--dim must be >= 2")
    if "tmax" in settings:
        tmax = _number(settings, "tmax")
        if tmax <= 0:
            raise UsageError("--tmax must be positive")
        cfg = replace(cfg, tmax=tmax)
    elif command in ("fit-growth", "fit-rate"):
        cfg = replace(cfg, tmax=GROWTH_WINDOW[1] / cfg.coupling)
    if "steps" in settings:
        cfg = replace(cfg, steps=_number(settings, "steps", int))
    if cfg.steps < 2:
        raise UsageError("--steps must be >= 2")
    if "workers" in settings:
        cfg = replace(cfg, workers=_number(settings, "workers", int))
    if cfg.workers < 1:
        raise UsageError("--workers must be >= 1")
    if "initial" in settings:
        cfg = replace(cfg, initial=settings["initial"])
    if "format" in settings:
        if settings["format"] not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        cfg = replace(cfg, fmt=settings["format"])
    if "out" in settings:
        cfg = replace(cfg, out=settings["out"])
    if "delta-min" in settings:
        cfg = replace(cfg, delta_min=_number(settings, "delta-min"))
    if "delta-max" in settings:
        cfg = replace(cfg, delta_max=_number(settings, "delta-max"))
    # Fail on a bad initial state before any computation.
    if command not in ("spectrum", "puiseux"):
        parse_initial(cfg.initial, cfg.dim)
    return cfg


def output_path(out: str) -> Path:
    path = Path(out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        columns, rows = RUNNERS[cfg.command](cfg)
    except NumericalFailure as exc:
        print(f"ptqudit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PTQuditError as exc:
        print(f"ptqudit: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(columns, rows, cfg.fmt)
    if cfg.out:
        path = output_path(cfg.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
