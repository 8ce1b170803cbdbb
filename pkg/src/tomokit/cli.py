"""Command-line front end.

One verb per workflow: simulate tomogram slices of a state, reconstruct
phases from a slice bundle, evolve the classical oscillator pair (with
optional initial-tomogram recovery), and measure completeness of a slice
set.  Slices and trajectories are CSV, reports and manifests JSON; every
failure exits nonzero with a single "ERROR <code>: ..." line on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import completeness, core, dynamics, io, reconstruct, transform
from .errors import (InconsistentTomogramsError, InsufficientDataError,
                     InvalidArgumentError, OutOfRangeError, TomokitError,
                     UnsupportedError)

_DEFAULT_GRID = "-12,12,2048"


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of calling sys.exit."""

    def error(self, message):
        raise InvalidArgumentError(message)


@dataclass(frozen=True)
class RunConfig:
    """Validated bundle of everything one command invocation needs."""

    command: str
    grid: core.SpatialGrid
    output: str
    state: str | None = None
    directions: tuple = ()
    in_dir: str | None = None
    breakpoints: tuple = ()
    method: str = "nodes"
    truth: str | None = None
    omega: str | None = None
    force: str = "constant:0"
    t_max: float | None = None
    dt: float | None = None
    recover_at: tuple = ()
    assume_pure: bool = False
    noise: float = 0.0
    seed: int = 0


def _parse_grid(text: str) -> core.SpatialGrid:
    parts = text.split(",")
    if len(parts) != 3:
        raise InvalidArgumentError(
            f"--grid wants x_min,x_max,n_points, got {text!r}")
    try:
        x_min, x_max, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InvalidArgumentError(f"malformed --grid value {text!r}") from None
    return core.make_grid(x_min, x_max, n)


def _parse_direction(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise InvalidArgumentError(f"--direction wants mu,nu, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise InvalidArgumentError(
            f"malformed --direction value {text!r}") from None


def _parse_float_list(text: str, flag: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise InvalidArgumentError(f"malformed {flag} value {text!r}") from None


def _split_rate(text: str, flag: str):
    name, _, rest = text.partition(":")
    try:
        params = [float(p) for p in rest.split(",")] if rest else []
    except ValueError:
        raise InvalidArgumentError(f"malformed {flag} value {text!r}") from None
    return name, params


def _parse_rate(text: str, flag: str):
    name, params = _split_rate(text, flag)
    return dynamics.rate_preset(name, params)


def _resolve_state(spec: str | None, grid: core.SpatialGrid) -> core.WaveFunction:
    if spec is None:
        raise InvalidArgumentError("this command needs --state")
    name, _, rest = spec.partition(":")
    if name == "vacuum" and not rest:
        return core.sample_state(core.GaussianPreset(), grid)
    if name == "gaussian":
        params = _parse_float_list(rest, "--state gaussian") if rest else ()
        if len(params) != 3:
            raise InvalidArgumentError(
                "--state gaussian wants gaussian:x0,p0,sigma")
        return core.sample_state(core.GaussianPreset(*params), grid)
    if name == "fock":
        try:
            n = int(rest)
        except ValueError:
            raise InvalidArgumentError("--state fock wants fock:n") from None
        return core.sample_state(core.FockPreset(n), grid)
    if os.path.isfile(spec):
        return io.read_wavefunction_csv(spec)
    raise InvalidArgumentError(
        f"state {spec!r} is neither a preset (vacuum, gaussian:x0,p0,sigma, "
        "fock:n) nor an existing file")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    def opt(attr, default=None):
        return getattr(ns, attr, default)

    seed = opt("seed", 0)
    if seed < 0:
        raise InvalidArgumentError("--seed must be nonnegative")
    noise = opt("noise", 0.0)
    if noise < 0.0:
        raise InvalidArgumentError("--noise must be nonnegative")
    in_dir = opt("in_dir")
    if in_dir is not None and not os.path.isdir(in_dir):
        raise InvalidArgumentError(f"input directory {in_dir!r} does not exist")
    truth = opt("truth")
    if truth is not None and not os.path.isfile(truth):
        raise InvalidArgumentError(f"truth state file {truth!r} does not exist")
    directions = tuple(_parse_direction(d) for d in opt("direction") or [])
    breakpoints = (_parse_float_list(ns.breakpoints, "--breakpoints")
                   if opt("breakpoints") else ())
    recover_at = (_parse_float_list(ns.recover_at, "--recover-at")
                  if opt("recover_at") else ())
    return RunConfig(
        command=ns.command,
        grid=_parse_grid(opt("grid", _DEFAULT_GRID) or _DEFAULT_GRID),
        output=opt("out", "."),
        state=opt("state"),
        directions=directions,
        in_dir=in_dir,
        breakpoints=breakpoints,
        method=opt("method", "nodes"),
        truth=truth,
        omega=opt("omega"),
        force=opt("force", "constant:0") or "constant:0",
        t_max=opt("t_max"),
        dt=opt("dt"),
        recover_at=recover_at,
        assume_pure=bool(opt("assume_pure", False)),
        noise=noise,
        seed=seed,
    )


def _ensure_outdir(path: str) -> None:
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise InvalidArgumentError(f"output directory {path!r} is not writable")


def _worker_count(n_jobs: int) -> int:
    raw = os.environ.get("TOMOKIT_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        raise InvalidArgumentError(
            f"TOMOKIT_THREADS must be an integer, got {raw!r}") from None
    if cap < 0:
        raise InvalidArgumentError("TOMOKIT_THREADS must be >= 0")
    if cap == 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def _run_indexed(job, n: int) -> list:
    """Run job(0..n-1), possibly in parallel, collecting in index order."""
    if n == 0:
        return []
    workers = _worker_count(n)
    if workers == 1:
        return [job(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, range(n)))


def _write_manifest(outdir: str, command: str, names, extra: dict | None = None) -> None:
    payload = {
        "command": command,
        "files": {n: io.sha256_of(os.path.join(outdir, n)) for n in sorted(names)},
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        payload.update(extra)
    io.write_json(os.path.join(outdir, "manifest.json"), payload)


def _noisy(s: transform.TomogramSlice, rel: float, seed: int,
           index: int) -> transform.TomogramSlice:
    rng = np.random.default_rng([seed, index])
    d = s.density * (1.0 + rel * rng.standard_normal(s.density.size))
    return transform.TomogramSlice(s.mu, s.nu, s.grid,
                                   np.where(d < 0.0, 0.0, d), renormalize=True)


def cmd_simulate(config: RunConfig) -> None:
    if not config.directions:
        raise InvalidArgumentError("simulate needs at least one --direction")
    _ensure_outdir(config.output)
    psi = _resolve_state(config.state, config.grid)

    def one(i: int) -> str:
        mu, nu = config.directions[i]
        s = transform.tomogram(psi, mu, nu)
        if config.noise > 0.0:
            s = _noisy(s, config.noise, config.seed, i)
        name = f"slice_{i:03d}.csv"
        io.write_slice_csv(os.path.join(config.output, name), s)
        return name

    names = _run_indexed(one, len(config.directions))
    _write_manifest(config.output, "simulate", names, {
        "directions": [[float(m), float(n)] for m, n in config.directions]})


def _load_slices(directory: str) -> list[transform.TomogramSlice]:
    names = sorted(n for n in os.listdir(directory)
                   if n.startswith("slice") and n.endswith(".csv"))
    return [io.read_slice_csv(os.path.join(directory, n)) for n in names]


def cmd_reconstruct(config: RunConfig) -> None:
    if config.in_dir is None:
        raise InvalidArgumentError("reconstruct needs --in")
    _ensure_outdir(config.output)
    position = None
    extras = []
    for s in _load_slices(config.in_dir):
        if position is None and abs(s.mu - 1.0) <= 1e-12 and abs(s.nu) <= 1e-12:
            position = s
        else:
            extras.append(s)
    if position is None:
        raise InvalidArgumentError(
            "no position slice (mu, nu) = (1, 0) in the input directory")
    if config.breakpoints:
        bps = np.asarray(config.breakpoints, dtype=float)
    elif config.method == "nodes":
        bps = reconstruct.detect_nodes(position)
    else:
        raise InvalidArgumentError("--method piecewise needs --breakpoints")
    report_path = os.path.join(config.output, "reconstruction.json")
    try:
        if config.method == "nodes":
            result = reconstruct.recover_phases_nodes(position, extras, bps)
        else:
            result = reconstruct.recover_phases_piecewise(bps, position, extras)
    except (InsufficientDataError, InconsistentTomogramsError) as exc:
        io.write_json(report_path, {"phases": [], "residual": None,
                                    "condition_estimate": None,
                                    "status": exc.code})
        raise
    payload = {"phases": [float(p) for p in result.phases],
               "residual": result.residual,
               "condition_estimate": result.condition_estimate,
               "status": result.status}
    if config.truth is not None:
        truth = io.read_wavefunction_csv(config.truth)
        if truth.grid != position.grid:
            raise InvalidArgumentError(
                "truth state and slices live on different grids")
        rebuilt = reconstruct.assemble_state(
            reconstruct.piecewise_from_position(bps, position, result.phases),
            position.grid)
        payload["fidelity"] = float(abs(truth.inner(rebuilt)) ** 2)
    io.write_json(report_path, payload)
    _write_manifest(config.output, "reconstruct", ["reconstruction.json"])


def _recovery_omega(config: RunConfig) -> float:
    """Recovery synthesizes the position history itself, which needs a
    closed-form propagator: constant frequency, no driving force."""
    name, params = _split_rate(config.omega, "--omega")
    if name != "constant":
        raise UnsupportedError(
            "--recover-at supports only a constant --omega preset")
    fname, fparams = _split_rate(config.force, "--force")
    if fname != "constant" or any(p != 0.0 for p in fparams):
        raise UnsupportedError("--recover-at supports only zero --force")
    return params[0]


def cmd_evolve(config: RunConfig) -> None:
    if config.omega is None:
        raise InvalidArgumentError("evolve needs --omega")
    if config.t_max is None or config.dt is None:
        raise InvalidArgumentError("evolve needs --t-max and --dt")
    _ensure_outdir(config.output)
    spec = dynamics.OscillatorSpec(_parse_rate(config.omega, "--omega"),
                                   _parse_rate(config.force, "--force"),
                                   config.t_max, config.dt)
    traj = dynamics.solve_epsilon_delta(spec)
    io.write_trajectory_csv(os.path.join(config.output, "trajectory.csv"), traj)
    names = ["trajectory.csv"]
    recovered = []
    if config.recover_at:
        omega_value = _recovery_omega(config)
        psi = _resolve_state(config.state, config.grid)
        times = sorted(set(config.recover_at))
        if times[0] < 0.0 or times[-1] > config.t_max:
            raise OutOfRangeError(
                f"--recover-at times must lie in [0, {config.t_max!r}]")
        history = dynamics.harmonic_position_history(psi, times, omega_value)
        for i, t in enumerate(times):
            s = dynamics.initial_tomogram_from_oscillator(history, traj, t)
            name = f"recovered_{i:03d}.csv"
            io.write_slice_csv(os.path.join(config.output, name), s)
            names.append(name)
            recovered.append({"file": name, "time": t})
    _write_manifest(config.output, "evolve", names, {"recovered": recovered})


def cmd_measure(config: RunConfig) -> None:
    if config.in_dir is None:
        raise InvalidArgumentError("measure needs --in")
    _ensure_outdir(config.output)
    slices = _load_slices(config.in_dir)
    if not slices:
        raise InvalidArgumentError(
            f"no slice_*.csv files in {config.in_dir!r}")
    report = completeness.gaussian_completeness(
        completeness.MeasurementSet(tuple(slices)),
        purity_assumed=config.assume_pure)
    io.write_json(os.path.join(config.output, "completeness.json"),
                  report.payload())
    _write_manifest(config.output, "measure", ["completeness.json"])


_COMMANDS = {
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "evolve": cmd_evolve,
    "measure": cmd_measure,
}


def build_parser() -> _Parser:
    parser = _Parser(prog="tomokit",
                     description="Symplectic tomograms of 1D wavefunctions: "
                                 "simulate, reconstruct, evolve, measure.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write tomogram slice CSVs")
    sim.add_argument("--state", required=True,
                     help="vacuum | gaussian:x0,p0,sigma | fock:n | CSV path")
    sim.add_argument("--grid", default=_DEFAULT_GRID, help="x_min,x_max,n_points")
    sim.add_argument("--direction", action="append", default=[],
                     metavar="MU,NU", help="repeatable measurement direction")
    sim.add_argument("--noise", type=float, default=0.0,
                     help="relative multiplicative noise level")
    sim.add_argument("--seed", type=int, default=0, help="noise RNG seed")
    sim.add_argument("--out", default=".", help="output directory")

    rec = sub.add_parser("reconstruct", help="recover segment phases from slices")
    rec.add_argument("--in", dest="in_dir", required=True,
                     help="directory holding slice_*.csv")
    rec.add_argument("--breakpoints", help="comma-separated cut positions")
    rec.add_argument("--method", choices=("nodes", "piecewise"),
                     default="nodes")
    rec.add_argument("--truth", help="wavefunction CSV to score fidelity against")
    rec.add_argument("--out", default=".", help="output directory")

    evo = sub.add_parser("evolve", help="integrate the oscillator pair")
    evo.add_argument("--omega", required=True,
                     help="constant:w | linear-ramp:start,slope | "
                          "cosine-modulated:base,depth,rate")
    evo.add_argument("--force", default="constant:0", help="same presets")
    evo.add_argument("--t-max", dest="t_max", type=float, required=True)
    evo.add_argument("--dt", type=float, required=True)
    evo.add_argument("--recover-at", dest="recover_at", metavar="T1,T2,...",
                     help="recover the initial tomogram at these times")
    evo.add_argument("--state", help="initial state for recovery")
    evo.add_argument("--grid", default=_DEFAULT_GRID, help="x_min,x_max,n_points")
    evo.add_argument("--out", default=".", help="output directory")

    mea = sub.add_parser("measure", help="report completeness of a slice set")
    mea.add_argument("--in", dest="in_dir", required=True,
                     help="directory holding slice_*.csv")
    mea.add_argument("--assume-pure", dest="assume_pure", action="store_true")
    mea.add_argument("--out", default=".", help="output directory")
    return parser


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        config = config_from_args(ns)
        _COMMANDS[config.command](config)
    except TomokitError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


def entry() -> None:
    sys.exit(main())
