"""Fixed-step time integration: deterministic RK4 and Euler-Maruyama.

Reproducibility of the stochastic integrator: noise increments are standard
normals drawn from numpy's PCG64 bit generator through
numpy.random.Generator.standard_normal (ziggurat algorithm), one
(steps, M*N) block per internal chunk in step order.  Identical
(seed, params, dt, T, stride, theta0) therefore reproduce trajectories
bit for bit.

Integration runs on unwrapped phase accumulators; recorded states are
provided both wrapped to [0, 2*pi) and unwrapped (for frequency
estimation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import IntegrationError, ReductionUnavailableError
from .model import Params, _packed, as_phase_state, as_reduced_state, wrap_angles

_CHUNK_TARGET = 65536  # steps per kernel call, rounded to a stride multiple


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Strided samples of one integration run.

    times has uniform spacing dt*stride except for a possible shorter final
    interval when the step count is not a stride multiple; the final time is
    always within dt of the requested horizon.
    """

    times: np.ndarray
    states: np.ndarray            # wrapped to [0, 2*pi), shape (n_samples, M*N)
    states_unwrapped: np.ndarray  # same shape, unwrapped accumulators
    params: Params
    dt: float
    stride: int
    seed: Optional[int] = None

    def __post_init__(self):
        if self.times.ndim != 1 or self.states.shape != (self.times.size, self.params.dim):
            raise ValueError("inconsistent trajectory shapes")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def n_samples(self) -> int:
        return self.times.size


def _plan(dt: float, T: float, stride: int):
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if T <= 0:
        raise ValueError(f"T must be > 0, got {T}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    n_steps = max(1, int(round(T / dt)))
    rec_steps = list(range(stride, n_steps + 1, stride))
    if not rec_steps or rec_steps[-1] != n_steps:
        rec_steps.append(n_steps)  # keep the final time within dt of T
    return n_steps, rec_steps


def _run_chunks(step_chunk, y, n_steps, stride, dim):
    """Drive a chunked kernel; returns recorded rows (one per stride step plus
    a final off-grid row when n_steps is not a stride multiple)."""
    n_rows_total = n_steps // stride + (1 if n_steps % stride else 0)
    rec = np.empty((n_rows_total, dim))
    chunk_cap = max(stride, (_CHUNK_TARGET // stride) * stride)
    done = 0
    row = 0
    while done < n_steps:
        n_aligned = ((n_steps - done) // stride) * stride
        n_chunk = min(n_aligned, chunk_cap) if n_aligned else n_steps - done
        n_rows = n_chunk // stride
        bad = step_chunk(y, n_chunk, rec[row:row + n_rows])
        if bad >= 0:
            raise IntegrationError(f"non-finite state at step {done + bad}")
        done += n_chunk
        row += n_rows
    if row < n_rows_total:
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at step {n_steps}")
        rec[row] = y
    return rec


def _assemble(theta0, rec, rec_steps, dt, params, stride, seed):
    times = np.concatenate(([0.0], np.asarray(rec_steps, dtype=float) * dt))
    unwrapped = np.vstack([theta0[None, :], rec])
    return Trajectory(
        times=times,
        states=wrap_angles(unwrapped),
        states_unwrapped=unwrapped,
        params=params,
        dt=dt,
        stride=stride,
        seed=seed,
    )


def integrate_rk4(theta0, params: Params, dt: float, T: float, stride: int = 1) -> Trajectory:
    """Classical 4th-order Runge-Kutta on the deterministic field (eta ignored)."""
    theta0 = as_phase_state(theta0, params)
    n_steps, rec_steps = _plan(dt, T, stride)
    packed = _packed(params)
    y = theta0.copy()

    def step_chunk(y, n_chunk, rec):
        return _kernels.rk4_chunk(y, dt, n_chunk, stride, *packed, rec, False)

    rec = _run_chunks(step_chunk, y, n_steps, stride, params.dim)
    return _assemble(theta0, rec, rec_steps, dt, params, stride, None)


def integrate_em(theta0, params: Params, dt: float, T: float, stride: int = 1,
                 seed: int = 0) -> Trajectory:
    """Euler-Maruyama with additive noise of strength params.eta.

    theta <- theta + X(theta) dt + eta sqrt(dt) xi, xi i.i.d. standard
    normal per oscillator per step.  With eta = 0 this is explicit Euler and
    no random numbers are drawn.
    """
    theta0 = as_phase_state(theta0, params)
    n_steps, rec_steps = _plan(dt, T, stride)
    packed = _packed(params)
    noise_scale = params.eta * np.sqrt(dt)
    rng = np.random.Generator(np.random.PCG64(seed)) if noise_scale != 0.0 else None
    dummy = np.zeros((1, params.dim))
    y = theta0.copy()

    def step_chunk(y, n_chunk, rec):
        noise = rng.standard_normal((n_chunk, params.dim)) if rng is not None else dummy
        return _kernels.em_chunk(y, dt, noise_scale, noise, n_chunk, stride, *packed, rec)

    rec = _run_chunks(step_chunk, y, n_steps, stride, params.dim)
    return _assemble(theta0, rec, rec_steps, dt, params, stride, seed)


def integrate_reduced_rk4(psi0, params: Params, dt: float, T: float,
                          stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """RK4 on the phase-difference dynamics; returns (times, unwrapped states).

    Support routine for invariant-region analyses; valid only while the
    per-population phase-shift symmetry is intact.
    """
    if params.delta_sym != 0.0 or params.delta_asym != 0.0:
        raise ReductionUnavailableError("reduction unavailable with nonzero delta terms")
    psi0 = as_reduced_state(psi0, params)
    n_steps, rec_steps = _plan(dt, T, stride)
    packed = _packed(params)
    y = psi0.copy()

    def step_chunk(y, n_chunk, rec):
        return _kernels.rk4_chunk(y, dt, n_chunk, stride, *packed, rec, True)

    rec = _run_chunks(step_chunk, y, n_steps, stride, params.reduced_dim)
    times = np.concatenate(([0.0], np.asarray(rec_steps, dtype=float) * dt))
    return times, np.vstack([psi0[None, :], rec])
