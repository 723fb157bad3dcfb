"""Command-line front end.

Subcommands: simulate, spectrum, conditions, scan, verify-cycle,
potential-map, switches, scaling.  Data goes to files (or stdout for JSON
reports); diagnostics go to stderr.  Exit codes: 0 success, 1 analysis
failure (for example an uncertified cycle), 2 usage or configuration error.

The worker pool for scan cells and scaling repetitions is capped by the
HETSYNC_THREADS environment variable (0 or unset = automatic).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as hio
from .conditions import CYCLE_LABELS, check_conditions, cycle_report, scan_regions
from .errors import ConfigError, HetsyncError
from .integrate import integrate_em, integrate_rk4
from .model import CO_ROTATING, Params, lift
from .observables import (
    detect_switches,
    instantaneous_frequencies,
    order_parameters,
    transition_scaling,
)
from .region import potential_map, verify_connection
from .spectral import equilibrium_point, numeric_spectrum

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_USAGE = 2

_ANGLE_RE = re.compile(r"^(-?)(\d+(?:\.\d+)?)?\s*pi(?:\s*/\s*(\d+(?:\.\d+)?))?$")


def parse_angle(text) -> float:
    """Angle in radians; accepts plain numbers and literals like pi, pi/2."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower().replace(" ", "")
    m = _ANGLE_RE.match(s)
    if m:
        sign = -1.0 if m.group(1) else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        div = float(m.group(3)) if m.group(3) else 1.0
        return sign * coef * np.pi / div
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}") from None


def parse_grid_spec(text, angle: bool = False):
    """'start:stop:count' -> linspace; a bare value -> one-point grid."""
    parts = str(text).split(":")
    conv = parse_angle if angle else float
    if len(parts) == 1:
        return [conv(parts[0])]
    if len(parts) != 3:
        raise ConfigError(f"grid spec must be 'start:stop:count', got {text!r}")
    try:
        start, stop, count = conv(parts[0]), conv(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {text!r}: {exc}") from None
    if count < 1:
        raise ConfigError(f"grid count must be >= 1 in {text!r}")
    return list(np.linspace(start, stop, count))


def worker_count() -> Optional[int]:
    raw = os.environ.get("HETSYNC_THREADS", "0")
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"HETSYNC_THREADS must be an integer, got {raw!r}")
    if val < 0:
        raise ConfigError(f"HETSYNC_THREADS must be >= 0, got {val}")
    if val == 0:
        return min(8, os.cpu_count() or 1)
    return val


@dataclass(frozen=True)
class RunConfig:
    params: Params
    dt: float
    T: float
    stride: int
    seed: int
    initial_label: Optional[str]
    jitter: float
    initial_phases: Optional[tuple]
    outputs: dict


_REQUIRED_KEYS = {"M", "N", "alpha2", "alpha4", "r", "K", "omega", "eta",
                  "dt", "T", "stride", "seed", "initial"}
_OPTIONAL_KEYS = {"a2", "delta_sym", "delta_asym", "g2_terms", "g4_terms", "outputs"}
_OUTPUT_KEYS = {"trajectory", "unwrapped", "observables", "events"}


def _need(doc, key, kinds, label=None):
    name = label or key
    if key not in doc:
        raise ConfigError(f"missing key '{name}'")
    val = doc[key]
    if kinds is not None and not isinstance(val, kinds) or isinstance(val, bool):
        raise ConfigError(f"key '{name}' has the wrong type")
    return val


def parse_config(document) -> RunConfig:
    """Validate a simulation configuration document (dict or JSON text)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(document) - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")

    m = _need(document, "M", int)
    n = _need(document, "N", int)
    omega = document.get("omega")
    if omega is None:
        raise ConfigError("missing key 'omega'")
    if isinstance(omega, str):
        if omega != CO_ROTATING:
            raise ConfigError(f"key 'omega' must be a number or '{CO_ROTATING}'")
    elif not isinstance(omega, (int, float)) or isinstance(omega, bool):
        raise ConfigError("key 'omega' has the wrong type")

    def angle(key):
        val = _need(document, key, (int, float, str))
        return parse_angle(val)

    terms = {}
    for key in ("g2_terms", "g4_terms"):
        if key in document:
            raw = document[key]
            if (not isinstance(raw, list) or
                    any(not isinstance(t, list) or len(t) != 3 for t in raw)):
                raise ConfigError(f"key '{key}' must be a list of [amp, harmonic, phase]")
            terms[key] = tuple((float(a), int(h), parse_angle(p)) for a, h, p in raw)

    try:
        params = Params(
            M=m, N=n,
            alpha2=angle("alpha2"), alpha4=angle("alpha4"),
            r=float(_need(document, "r", (int, float))),
            K=float(_need(document, "K", (int, float))),
            omega=omega,
            a2=float(document.get("a2", 1.0)),
            delta_sym=float(document.get("delta_sym", 0.0)),
            delta_asym=float(document.get("delta_asym", 0.0)),
            eta=float(_need(document, "eta", (int, float))),
            g2_terms=terms.get("g2_terms"),
            g4_terms=terms.get("g4_terms"),
        )
        if params.g2_terms is None:
            params.g2_harmonics()  # reject N without a preset early
    except (ValueError, HetsyncError) as exc:
        raise ConfigError(str(exc)) from None

    dt = float(_need(document, "dt", (int, float)))
    T = float(_need(document, "T", (int, float)))
    stride = _need(document, "stride", int)
    seed = _need(document, "seed", int)
    if dt <= 0:
        raise ConfigError("key 'dt' must be > 0")
    if T <= 0:
        raise ConfigError("key 'T' must be > 0")
    if stride < 1:
        raise ConfigError("key 'stride' must be >= 1")

    initial = _need(document, "initial", dict)
    label = phases = None
    jitter = 0.0
    if "phases" in initial:
        if set(initial) != {"phases"}:
            raise ConfigError("key 'initial' with phases takes no other entries")
        phases = tuple(float(x) for x in initial["phases"])
        if len(phases) != params.dim:
            raise ConfigError(f"key 'initial.phases' must have length {params.dim}")
    else:
        if set(initial) - {"label", "jitter"}:
            raise ConfigError("key 'initial' must hold label/jitter or phases")
        label = _need(initial, "label", str, label="initial.label")
        if len(label) != m or any(c not in "SD" for c in label.upper()):
            raise ConfigError(f"key 'initial.label' must be a length-{m} word over S/D")
        jitter = float(initial.get("jitter", 0.0))
        if jitter < 0:
            raise ConfigError("key 'initial.jitter' must be >= 0")

    outputs = document.get("outputs", {})
    if not isinstance(outputs, dict) or set(outputs) - _OUTPUT_KEYS:
        raise ConfigError(f"key 'outputs' accepts {sorted(_OUTPUT_KEYS)}")

    return RunConfig(params=params, dt=dt, T=T, stride=stride, seed=seed,
                     initial_label=None if label is None else label.upper(),
                     jitter=jitter, initial_phases=phases,
                     outputs={k: str(v) for k, v in outputs.items()})


def initial_state(cfg: RunConfig) -> np.ndarray:
    if cfg.initial_phases is not None:
        return np.asarray(cfg.initial_phases, dtype=float)
    theta0 = lift(equilibrium_point(cfg.initial_label, cfg.params.N), cfg.params.N)
    if cfg.jitter > 0:
        rng = np.random.default_rng([cfg.seed, 1])  # separate stream from the noise
        theta0 = theta0 + cfg.jitter * rng.standard_normal(cfg.params.dim)
    return theta0


def _params_from_flags(args, need_eta: bool = False) -> Params:
    kw = dict(M=args.m, N=args.n,
              alpha2=parse_angle(args.alpha2), alpha4=parse_angle(args.alpha4),
              r=args.r, K=args.k, a2=args.a2)
    if need_eta:
        kw["eta"] = args.eta
    try:
        return Params(**kw)
    except (ValueError, HetsyncError) as exc:
        raise ConfigError(str(exc)) from None


def _emit_json(payload: dict, out: Optional[str]):
    text = hio.write_json(out, payload)
    if out is None:
        print(text)


def cmd_simulate(args) -> int:
    try:
        cfg = parse_config(Path(args.config).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    out_dir = Path(args.out_dir)
    paths = {
        "trajectory": out_dir / "trajectory.csv",
        "unwrapped": out_dir / "trajectory_unwrapped.csv",
        "observables": out_dir / "observables.csv",
        "events": out_dir / "events.csv",
    }
    paths.update({k: Path(v) for k, v in cfg.outputs.items()})

    theta0 = initial_state(cfg)
    if cfg.params.eta > 0:
        traj = integrate_em(theta0, cfg.params, cfg.dt, cfg.T, cfg.stride, seed=cfg.seed)
    else:
        traj = integrate_rk4(theta0, cfg.params, cfg.dt, cfg.T, cfg.stride)

    R, arg = order_parameters(traj.states, cfg.params)
    freqs = instantaneous_frequencies(traj)
    events = detect_switches(traj.times, R, args.low, args.high)

    hio.write_trajectory_csv(paths["trajectory"], traj)
    hio.write_trajectory_csv(paths["unwrapped"], traj, unwrapped=True)
    hio.write_observables_csv(paths["observables"], traj.times, R, arg, freqs)
    hio.write_events_csv(paths["events"], events)
    if args.plot:
        from .plots import plot_simulation

        plot_simulation(traj, R, arg, freqs, out_dir / "simulation.png")
    print(f"wrote {paths['trajectory']} ({traj.n_samples} samples, "
          f"{len(events)} events)", file=sys.stderr)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    params = _params_from_flags(args)
    report = numeric_spectrum(args.label.upper(), params, source=args.source)
    _emit_json(report.to_dict(), args.out)
    return EXIT_OK


def cmd_conditions(args) -> int:
    params = _params_from_flags(args)
    report = check_conditions(params)
    _emit_json(report.to_dict(), args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    rows = scan_regions(
        parse_grid_spec(args.alpha2, angle=True),
        parse_grid_spec(args.r),
        parse_grid_spec(args.k),
        alpha4=parse_angle(args.alpha4),
        n=args.n,
        max_workers=worker_count(),
    )
    hio.write_regions_csv(args.out, rows)
    if args.plot:
        from .plots import plot_regions

        plot_regions(rows, Path(args.out).with_suffix(".png"))
    print(f"wrote {args.out} ({len(rows)} rows)", file=sys.stderr)
    return EXIT_OK


def cmd_verify_cycle(args) -> int:
    params = _params_from_flags(args)
    chain = cycle_report(params)
    if args.n == 2:
        edges = list(zip(CYCLE_LABELS, CYCLE_LABELS[1:] + CYCLE_LABELS[:1]))
    else:
        edges = [("DSS", "DDS"), ("DDS", "SDS")]  # orbit representatives
    evidence = []
    for a, b in edges:
        ev = verify_connection(a, b, params, tol=args.tol, Tmax=args.tmax)
        evidence.append(ev.to_dict())
    payload = {"chain": chain.to_dict(), "connections": evidence}
    _emit_json(payload, args.out)
    return EXIT_OK


def cmd_potential_map(args) -> int:
    params = _params_from_flags(args)
    rows = potential_map(params, n=args.grid)
    hio.write_potential_map_csv(args.out, rows)
    if args.plot:
        from .plots import plot_potential_map

        plot_potential_map(rows, Path(args.out).with_suffix(".png"))
    print(f"wrote {args.out} ({len(rows)} rows)", file=sys.stderr)
    return EXIT_OK


def cmd_switches(args) -> int:
    times, states, m, n = hio.read_trajectory_csv(args.input)
    z = np.exp(1j * states).reshape(states.shape[0], m, n).mean(axis=2)
    events = detect_switches(times, np.abs(z), args.low, args.high)
    hio.write_events_csv(args.out, events)
    print(f"wrote {args.out} ({len(events)} events)", file=sys.stderr)
    return EXIT_OK


def cmd_scaling(args) -> int:
    params = _params_from_flags(args)
    etas = [float(x) for x in args.etas.split(",") if x]
    result = transition_scaling(params, etas, repetitions=args.reps,
                                seed_base=args.seed_base, T=args.t, dt=args.dt,
                                initial_label="D" + "S" * (args.m - 1),
                                max_workers=worker_count())
    hio.write_scaling_csv(args.out, result)
    if args.plot:
        from .plots import plot_scaling

        plot_scaling(result, Path(args.out).with_suffix(".png"))
    if result.r_squared is not None:
        print(f"wrote {args.out} (R^2 = {result.r_squared:.4f})", file=sys.stderr)
    else:
        print(f"wrote {args.out} (insufficient events for a fit)", file=sys.stderr)
    return EXIT_OK


def _add_model_flags(p, include_eta=False):
    p.add_argument("--n", type=int, required=True, help="oscillators per population")
    p.add_argument("--m", type=int, default=3, help="population count (default 3)")
    p.add_argument("--r", type=float, required=True, help="higher-harmonic amplitude")
    p.add_argument("--k", type=float, required=True, help="inter-population coupling")
    p.add_argument("--alpha2", default="pi/2", help="within-population phase lag (accepts pi literals)")
    p.add_argument("--alpha4", default="pi", help="between-population phase lag")
    p.add_argument("--a2", type=float, default=1.0, help="second-harmonic weight (N=3)")
    if include_eta:
        p.add_argument("--eta", type=float, default=0.0, help="noise strength")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetsync",
        description="Simulate and analyze heteroclinic switching of localized "
                    "frequency synchrony in coupled phase-oscillator populations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one run and emit trajectory/observables")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.add_argument("--low", type=float, default=0.4, help="episode open threshold")
    p.add_argument("--high", type=float, default=0.9, help="episode close threshold")
    p.add_argument("--plot", action="store_true", help="render simulation.png")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="eigenvalues at a labeled equilibrium")
    _add_model_flags(p)
    p.add_argument("--label", required=True, help="S/D word, e.g. DSS")
    p.add_argument("--source", choices=("reduced", "full"), default="reduced")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("conditions", help="existence/dissipativity condition report")
    _add_model_flags(p)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_conditions)

    p = sub.add_parser("scan", help="classify a parameter grid")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha2", required=True, help="grid spec start:stop:count or value")
    p.add_argument("--r", required=True, help="grid spec start:stop:count or value")
    p.add_argument("--k", required=True, help="grid spec start:stop:count or value")
    p.add_argument("--alpha4", default="pi")
    p.add_argument("--out", required=True, help="regions CSV path")
    p.add_argument("--plot", action="store_true", help="render a window map PNG")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify-cycle", help="chain report plus connection evidence")
    _add_model_flags(p)
    p.add_argument("--tol", type=float, default=1e-6, help="arrival ball radius")
    p.add_argument("--tmax", type=float, default=1e3, help="integration horizon per edge")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_verify_cycle)

    p = sub.add_parser("potential-map", help="region potential/ratio table (N=3)")
    p.add_argument("--n", type=int, default=3, help=argparse.SUPPRESS)
    p.add_argument("--m", type=int, default=3, help=argparse.SUPPRESS)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--alpha2", default="pi/2")
    p.add_argument("--alpha4", default="pi")
    p.add_argument("--a2", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=200, help="mesh points per axis")
    p.add_argument("--out", required=True, help="potential map CSV path")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_potential_map)

    p = sub.add_parser("switches", help="detect desynchronization episodes in a trajectory CSV")
    p.add_argument("--input", required=True, help="trajectory CSV (wrapped phases)")
    p.add_argument("--low", type=float, default=0.4)
    p.add_argument("--high", type=float, default=0.9)
    p.add_argument("--out", required=True, help="events CSV path")
    p.set_defaults(func=cmd_switches)

    p = sub.add_parser("scaling", help="mean residence time versus noise strength")
    _add_model_flags(p)
    p.add_argument("--etas", required=True, help="comma-separated noise strengths")
    p.add_argument("--reps", type=int, default=2, help="repetitions per eta")
    p.add_argument("--t", type=float, default=2000.0, help="horizon per run")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--out", required=True, help="scaling CSV path")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_scaling)

    return parser


def dispatch(argv) -> int:
    """Run one CLI invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HetsyncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
