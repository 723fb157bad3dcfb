"""Synchrony and frequency observables, switching detection, noise scaling.

The per-population Kuramoto order parameter Z_sigma = (1/N) sum_j
exp(i theta_{sigma,j}) has magnitude 1 at full synchrony and 0 at splay, so
a desynchronization episode of population sigma is read off R_sigma with a
hysteresis pair: the episode opens when R falls below the low threshold
and closes when it recovers above the high one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .integrate import Trajectory, integrate_em
from .model import Params, lift
from .spectral import equilibrium_point

LOW_THRESHOLD = 0.4
HIGH_THRESHOLD = 0.9


def order_parameters(theta, params: Params):
    """Per-population order parameter magnitude and argument.

    Accepts a single state (length M*N) or a batch (samples, M*N); returns
    (R, arg) with matching leading shape and one column per population.
    """
    th = np.asarray(theta, dtype=float)
    single = th.ndim == 1
    th = np.atleast_2d(th)
    if th.shape[1] != params.dim:
        raise ValueError(f"state length {th.shape[1]} != M*N = {params.dim}")
    z = np.exp(1j * th).reshape(th.shape[0], params.M, params.N).mean(axis=2)
    R, arg = np.abs(z), np.angle(z)
    if single:
        return R[0], arg[0]
    return R, arg


def average_frequencies(traj: Trajectory, window: Tuple[float, float]):
    """Finite-window estimate of the per-population average frequencies.

    Uses the unwrapped phases accumulated by the integrator:
    (theta(t1) - theta(t0)) / (t1 - t0) per oscillator, averaged within each
    population.  Returns (freqs, spread) where spread is the max
    within-population disagreement (a diagnostic for frequency synchrony).
    """
    t0, t1 = window
    times = traj.times
    if t0 < times[0] - 1e-12 or t1 > times[-1] + 1e-12 or t1 <= t0:
        raise ValueError(f"window {window} outside trajectory span "
                         f"[{times[0]}, {times[-1]}]")
    i0 = int(np.searchsorted(times, t0 - 1e-12))
    i1 = int(np.searchsorted(times, t1 + 1e-12) - 1)
    if i1 - i0 < 10:
        raise ValueError("window too short: fewer than 10 samples")
    dt_eff = times[i1] - times[i0]
    per_osc = (traj.states_unwrapped[i1] - traj.states_unwrapped[i0]) / dt_eff
    per_pop = per_osc.reshape(traj.params.M, traj.params.N)
    freqs = per_pop.mean(axis=1)
    spread = float(np.max(per_pop.max(axis=1) - per_pop.min(axis=1)))
    return freqs, spread


def instantaneous_frequencies(traj: Trajectory):
    """Per-population mean phase velocity between consecutive samples
    (centered differences in the interior, one-sided at the ends)."""
    u = traj.states_unwrapped.reshape(traj.n_samples, traj.params.M, traj.params.N)
    pop = u.mean(axis=2)
    return np.gradient(pop, traj.times, axis=0)


@dataclass(frozen=True)
class SwitchingEvent:
    population: int      # 1-based
    t_enter: float
    t_exit: float

    @property
    def duration(self) -> float:
        return self.t_exit - self.t_enter

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t_enter + self.t_exit)


def detect_switches(times, R, low: float = LOW_THRESHOLD,
                    high: float = HIGH_THRESHOLD) -> List[SwitchingEvent]:
    """Desynchronization episodes from per-population order parameters.

    An episode for population sigma opens when R_sigma drops below low
    (including at the first sample) and closes when it recovers above high;
    episodes still open at the end of the series are discarded.  Events are
    sorted chronologically by entry time.
    """
    if not low < high:
        raise ValueError(f"need low < high, got {low} >= {high}")
    times = np.asarray(times, dtype=float)
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != times.size:
        raise ValueError("R must be (samples, populations)")
    events = []
    for sig in range(R.shape[1]):
        open_t = None
        for t, r in zip(times, R[:, sig]):
            if open_t is None and r < low:
                open_t = t
            elif open_t is not None and r > high:
                events.append(SwitchingEvent(population=sig + 1,
                                             t_enter=float(open_t), t_exit=float(t)))
                open_t = None
    events.sort(key=lambda e: (e.t_enter, e.population))
    return events


def episode_argument_gaps(times, R, args, events: Sequence[SwitchingEvent],
                          low: float = LOW_THRESHOLD) -> List[float]:
    """Min circular gap between the arguments of the two synchronized
    populations during each episode.

    Only samples where the event's population is the sole one below the low
    threshold contribute (during saddle transitions two populations can be
    desynchronized at once, leaving no well-defined synchronized pair).
    Returns one value per event; events with no usable samples yield nan.
    """
    times = np.asarray(times)
    R = np.asarray(R)
    args = np.asarray(args)
    m = R.shape[1]
    out = []
    for ev in events:
        sel = (times >= ev.t_enter) & (times <= ev.t_exit)
        others = [s for s in range(m) if s != ev.population - 1]
        solo = sel & np.all(R[:, others] >= low, axis=1)
        if not np.any(solo) or len(others) != 2:
            out.append(float("nan"))
            continue
        gap = args[solo, others[0]] - args[solo, others[1]]
        gap = np.abs(np.mod(gap + np.pi, 2 * np.pi) - np.pi)
        out.append(float(np.min(gap)))
    return out


def residence_times(events: Sequence[SwitchingEvent]) -> np.ndarray:
    """Gaps between successive episode midpoints (all populations pooled)."""
    mids = sorted(e.midpoint for e in events)
    return np.diff(mids)


@dataclass(frozen=True)
class ScalingPoint:
    eta: float
    mean_residence: Optional[float]
    n_events: int
    status: str                  # "ok" | "insufficient events"


@dataclass(frozen=True)
class ScalingResult:
    points: Tuple[ScalingPoint, ...]
    slope: Optional[float]       # residence vs ln(1/eta)
    intercept: Optional[float]
    r_squared: Optional[float]

    def to_dict(self) -> dict:
        return {
            "points": [{"eta": p.eta, "mean_residence": p.mean_residence,
                        "n_events": p.n_events, "status": p.status}
                       for p in self.points],
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def transition_scaling(params: Params, etas: Sequence[float], repetitions: int,
                       seed_base: int, T: float = 2000.0, dt: float = 1e-3,
                       stride: int = 100, initial_label: str = "DSS",
                       jitter: float = 0.01,
                       max_workers: Optional[int] = None) -> ScalingResult:
    """Mean residence time per noise strength plus a log-linear fit.

    Each (eta, repetition) pair runs with its own derived seed; exit times
    near attracting heteroclinic cycles grow like ln(1/eta), so the means
    are regressed against ln(1/eta).  Noise strengths with fewer than 3
    detected events are flagged and excluded from the fit.
    """
    etas = list(etas)
    if any(e <= 0 for e in etas):
        raise ValueError("every eta must be > 0")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")

    rng = np.random.default_rng(seed_base)
    psi0 = equilibrium_point(initial_label, params.N)
    theta0 = lift(psi0, params.N) + jitter * rng.standard_normal(params.dim)

    jobs = [(i, k) for i in range(len(etas)) for k in range(repetitions)]

    def one(job):
        i, k = job
        from dataclasses import replace

        p = replace(params, eta=etas[i])
        traj = integrate_em(theta0, p, dt=dt, T=T, stride=stride,
                            seed=seed_base + 1000 * i + k)
        R, _ = order_parameters(traj.states, p)
        return i, residence_times(detect_switches(traj.times, R))

    if max_workers is not None and max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(one, jobs))
    else:
        outcomes = [one(j) for j in jobs]

    gaps_per_eta = [[] for _ in etas]
    events_per_eta = [0] * len(etas)
    for i, gaps in outcomes:
        gaps_per_eta[i].extend(gaps)
        events_per_eta[i] += len(gaps) + 1 if len(gaps) else 0

    points = []
    xs, ys = [], []
    for eta, gaps, n_ev in zip(etas, gaps_per_eta, events_per_eta):
        if n_ev < 3:
            points.append(ScalingPoint(eta=eta, mean_residence=None,
                                       n_events=n_ev, status="insufficient events"))
            continue
        mean = float(np.mean(gaps))
        points.append(ScalingPoint(eta=eta, mean_residence=mean,
                                   n_events=n_ev, status="ok"))
        xs.append(np.log(1.0 / eta))
        ys.append(mean)

    slope = intercept = r2 = None
    if len(xs) >= 2:
        slope, intercept = np.polyfit(xs, ys, 1)
        resid = np.array(ys) - (slope * np.array(xs) + intercept)
        ss_tot = float(np.sum((np.array(ys) - np.mean(ys)) ** 2))
        r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
        slope, intercept = float(slope), float(intercept)
    return ScalingResult(points=tuple(points), slope=slope,
                         intercept=intercept, r_squared=r2)
