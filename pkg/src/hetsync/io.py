"""Delimited and JSON emission.

Every CSV has a header row; floating-point values are written with 17
significant digits so repeated runs with the same configuration are
byte-identical and round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .conditions import ConditionReport
from .integrate import Trajectory
from .observables import SwitchingEvent


def fmt(x: float) -> str:
    return "%.17g" % float(x)


def _write_lines(path, lines):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")


def write_trajectory_csv(path, traj: Trajectory, unwrapped: bool = False):
    m, n = traj.params.M, traj.params.N
    header = "t," + ",".join(f"theta_{s + 1}_{k + 1}" for s in range(m) for k in range(n))
    data = traj.states_unwrapped if unwrapped else traj.states
    lines = [header]
    for t, row in zip(traj.times, data):
        lines.append(",".join([fmt(t)] + [fmt(v) for v in row]))
    _write_lines(path, lines)


def read_trajectory_csv(path):
    """Returns (times, states, M, N) parsed from the documented header."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if header[0] != "t" or not all(c.startswith("theta_") for c in header[1:]):
        raise ValueError(f"{path}: not a trajectory table (header {header[:3]}...)")
    pops = [tuple(int(x) for x in c.split("_")[1:]) for c in header[1:]]
    m = max(s for s, _ in pops)
    n = max(k for _, k in pops)
    if len(pops) != m * n:
        raise ValueError(f"{path}: expected {m * n} phase columns, got {len(pops)}")
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return raw[:, 0], raw[:, 1:], m, n


def write_observables_csv(path, times, R, args, freqs):
    m = R.shape[1]
    header = ("t,"
              + ",".join(f"R_{s + 1}" for s in range(m)) + ","
              + ",".join(f"arg_{s + 1}" for s in range(m)) + ","
              + ",".join(f"f_{s + 1}" for s in range(m)))
    lines = [header]
    for i, t in enumerate(times):
        vals = [fmt(t)] + [fmt(v) for v in R[i]] + [fmt(v) for v in args[i]] \
            + [fmt(v) for v in freqs[i]]
        lines.append(",".join(vals))
    _write_lines(path, lines)


def write_events_csv(path, events: Sequence[SwitchingEvent]):
    lines = ["idx,population,t_enter,t_exit,duration"]
    for i, ev in enumerate(events):
        lines.append(",".join([str(i), str(ev.population), fmt(ev.t_enter),
                               fmt(ev.t_exit), fmt(ev.duration)]))
    _write_lines(path, lines)


def write_regions_csv(path, rows: List[dict]):
    lines = ["alpha2,r,K,c_omega,c_lambda,c_nu,c_psi,window"]
    for row in rows:
        rep: ConditionReport = row["report"]
        c_psi = "" if rep.c_psi is None else str(int(rep.c_psi))
        lines.append(",".join([
            fmt(row["alpha2"]), fmt(row["r"]), fmt(row["K"]),
            str(int(rep.c_omega)), str(int(rep.c_lambda)), str(int(rep.c_nu)),
            c_psi, str(int(rep.window)),
        ]))
    _write_lines(path, lines)


def write_potential_map_csv(path, rows: List[dict]):
    lines = ["psi1,psi2,V,Q,R,vdot_DpS,vdot_pDS"]
    for row in rows:
        r_field = "" if row["R"] is None else fmt(row["R"])
        lines.append(",".join([
            fmt(row["psi1"]), fmt(row["psi2"]), fmt(row["V"]), fmt(row["Q"]),
            r_field, fmt(row["vdot_DpS"]), fmt(row["vdot_pDS"]),
        ]))
    _write_lines(path, lines)


def write_scaling_csv(path, result):
    lines = ["eta,mean_residence,n_events,status"]
    for p in result.points:
        mean = "" if p.mean_residence is None else fmt(p.mean_residence)
        lines.append(",".join([fmt(p.eta), mean, str(p.n_events), p.status]))
    _write_lines(path, lines)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(path: Optional[str], payload: dict) -> str:
    text = json.dumps(payload, indent=2, sort_keys=False, default=_json_default)
    if path is not None:
        _write_lines(path, [text])
    return text
