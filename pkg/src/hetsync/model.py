"""Coupled phase-oscillator populations with nonpairwise inter-population coupling.

The network consists of M populations of N identical phase oscillators.
Oscillators within a population interact pairwise through a coupling
function g2, populations interact with their two cyclic neighbours through
the nonpairwise term

    G4(theta_tau; phi) = (1/N^2) sum_{m,n} g4(theta_{tau,m} - theta_{tau,n} + phi),

subtracted for the previous population and added for the next one, with
common strength K.  Two optional pairwise perturbations break the
per-population phase-shift symmetries: an all-to-all sine coupling
(delta_sym) and a nearest-neighbour chain in linear oscillator order
(delta_asym).

Coupling presets (selected by N, overridable with explicit harmonic lists):

    N=2:  g2(phi) = sin(phi + alpha2) - r sin(2(phi + alpha2))
    N=3:  g2(phi) = sin(phi + alpha2)
                    - r (a2 sin(2(phi + alpha2)) + sin(6(phi + alpha2)))
    any:  g4(phi) = sin(phi + alpha4)

All angles are radians.  State vectors are flat float arrays: a phase state
has length M*N indexed (sigma, k) -> sigma*N + k, a reduced state holds the
per-population phase differences psi_{sigma,k} = theta_{sigma,k+1} -
theta_{sigma,1} and has length M*(N-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .errors import ReductionUnavailableError, UnsupportedCouplingError
from . import _kernels

TWO_PI = 2.0 * np.pi

# (amplitude, harmonic, phase offset): amp * sin(harmonic * phi + phase)
HarmonicList = Tuple[Tuple[float, int, float], ...]

CO_ROTATING = "co-rotating"


@dataclass(frozen=True)
class Params:
    """Immutable network parameterization.

    omega is either an explicit frequency or the literal "co-rotating",
    meaning omega = -(N-1) * g2(0) so that a phase-synchronized population
    appears stationary when populations are uncoupled.
    """

    M: int
    N: int
    alpha2: float
    alpha4: float
    r: float
    K: float
    omega: float | str = CO_ROTATING
    a2: float = 1.0
    delta_sym: float = 0.0
    delta_asym: float = 0.0
    eta: float = 0.0
    g2_terms: Optional[HarmonicList] = None
    g4_terms: Optional[HarmonicList] = None

    def __post_init__(self):
        if self.M < 2 or self.N < 2:
            raise ValueError(f"need M >= 2 and N >= 2, got M={self.M}, N={self.N}")
        if self.K < 0:
            raise ValueError(f"K must be >= 0, got {self.K}")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        for name in ("alpha2", "alpha4", "r", "a2", "delta_sym", "delta_asym"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if isinstance(self.omega, str) and self.omega != CO_ROTATING:
            raise ValueError(f"omega must be a number or '{CO_ROTATING}'")
        if self.g2_terms is not None:
            object.__setattr__(self, "g2_terms", _normalize_terms(self.g2_terms))
        if self.g4_terms is not None:
            object.__setattr__(self, "g4_terms", _normalize_terms(self.g4_terms))

    @property
    def dim(self) -> int:
        return self.M * self.N

    @property
    def reduced_dim(self) -> int:
        return self.M * (self.N - 1)

    def g2_harmonics(self) -> HarmonicList:
        """Harmonic list of g2: explicit override or the preset keyed by N."""
        if self.g2_terms is not None:
            return self.g2_terms
        if self.N == 2:
            return ((1.0, 1, self.alpha2), (-self.r, 2, 2.0 * self.alpha2))
        if self.N == 3:
            return (
                (1.0, 1, self.alpha2),
                (-self.r * self.a2, 2, 2.0 * self.alpha2),
                (-self.r, 6, 6.0 * self.alpha2),
            )
        raise UnsupportedCouplingError(
            f"no g2 preset for N={self.N}; pass an explicit g2_terms harmonic list"
        )

    def g4_harmonics(self) -> HarmonicList:
        if self.g4_terms is not None:
            return self.g4_terms
        return ((1.0, 1, self.alpha4),)

    def omega_value(self) -> float:
        """Resolve the co-rotating sentinel to -(N-1)*g2(0)."""
        if self.omega == CO_ROTATING:
            g2_at_zero = sum(a * np.sin(p) for a, _, p in self.g2_harmonics())
            return -(self.N - 1) * g2_at_zero
        return float(self.omega)


def _normalize_terms(terms) -> HarmonicList:
    out = []
    for t in terms:
        a, m, p = t
        if int(m) < 1:
            raise ValueError(f"harmonic index must be >= 1, got {m}")
        out.append((float(a), int(m), float(p)))
    return tuple(out)


@lru_cache(maxsize=128)
def _packed(params: Params):
    """Kernel-ready parameter arrays, cached on the (hashable) Params."""
    g2 = np.asarray(params.g2_harmonics(), dtype=float).reshape(-1, 3)
    g4 = np.asarray(params.g4_harmonics(), dtype=float).reshape(-1, 3)
    return (
        params.M,
        params.N,
        np.ascontiguousarray(g2[:, 0]),
        np.ascontiguousarray(g2[:, 1]),
        np.ascontiguousarray(g2[:, 2]),
        np.ascontiguousarray(g4[:, 0]),
        np.ascontiguousarray(g4[:, 1]),
        np.ascontiguousarray(g4[:, 2]),
        params.K,
        params.omega_value(),
        params.delta_sym,
        params.delta_asym,
    )


def wrap_angles(x: np.ndarray) -> np.ndarray:
    """Wrap angles into [0, 2*pi)."""
    return np.mod(x, TWO_PI)


def as_phase_state(theta, params: Params) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != params.dim:
        raise ValueError(f"phase state must have length {params.dim}, got {theta.size}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("phase state contains non-finite entries")
    return theta


def as_reduced_state(psi, params: Params) -> np.ndarray:
    psi = np.asarray(psi, dtype=float).ravel()
    if psi.size != params.reduced_dim:
        raise ValueError(f"reduced state must have length {params.reduced_dim}, got {psi.size}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("reduced state contains non-finite entries")
    return psi


def eval_g2(phi, params: Params):
    """Within-population coupling function at angle(s) phi."""
    phi = np.asarray(phi, dtype=float)
    out = np.zeros_like(phi)
    for a, m, p in params.g2_harmonics():
        out = out + a * np.sin(m * phi + p)
    return out if out.shape else float(out)


def eval_g4(phi, params: Params):
    """Between-population coupling function at angle(s) phi."""
    phi = np.asarray(phi, dtype=float)
    out = np.zeros_like(phi)
    for a, m, p in params.g4_harmonics():
        out = out + a * np.sin(m * phi + p)
    return out if out.shape else float(out)


def eval_G4(theta_tau, phi: float, params: Params) -> float:
    """Nonpairwise interaction (1/N^2) sum_{m,n} g4(theta_m - theta_n + phi).

    The double sum includes the diagonal m = n terms.
    """
    theta_tau = np.asarray(theta_tau, dtype=float).ravel()
    if theta_tau.size != params.N:
        raise ValueError(f"population state must have length {params.N}, got {theta_tau.size}")
    diffs = theta_tau[:, None] - theta_tau[None, :]
    return float(np.sum(eval_g4(diffs + phi, params))) / params.N**2


def full_field(theta, params: Params) -> np.ndarray:
    """Deterministic vector field on the M*N-torus.

    theta_dot_{sigma,k} = omega
        + sum_{j != k} ( g2(theta_{sigma,j} - theta_{sigma,k})
                         - K * G4(theta_{sigma-1}; theta_{sigma,j} - theta_{sigma,k})
                         + K * G4(theta_{sigma+1}; theta_{sigma,j} - theta_{sigma,k}) )
        + delta_sym * Ysym_{sigma,k} + delta_asym * Yasym_{sigma,k}

    with population indices cyclic mod M, Ysym the normalized all-to-all sine
    coupling and Yasym the nearest-neighbour term in linear oscillator order.
    """
    theta = as_phase_state(theta, params)
    out = np.empty_like(theta)
    _kernels.rhs(theta, *_packed(params), out)
    return out


def lift(psi, n: int) -> np.ndarray:
    """Phase state with theta_{sigma,1} = 0 and theta_{sigma,k+1} = psi_{sigma,k}."""
    psi = np.asarray(psi, dtype=float).ravel()
    if n < 2 or psi.size % (n - 1) != 0:
        raise ValueError(f"reduced state length {psi.size} incompatible with N={n}")
    m = psi.size // (n - 1)
    theta = np.zeros((m, n))
    theta[:, 1:] = psi.reshape(m, n - 1)
    return theta.ravel()


def reduce(theta, n: int) -> np.ndarray:
    """Per-population phase differences psi_{sigma,k} = theta_{sigma,k+1} - theta_{sigma,1}."""
    theta = np.asarray(theta, dtype=float).ravel()
    if n < 2 or theta.size % n != 0:
        raise ValueError(f"phase state length {theta.size} incompatible with N={n}")
    th = theta.reshape(-1, n)
    return wrap_angles(th[:, 1:] - th[:, :1]).ravel()


def reduced_field(psi, params: Params) -> np.ndarray:
    """Phase-difference dynamics obtained by lifting and differencing full_field.

    Only defined while the per-population phase-shift symmetry is intact.
    """
    if params.delta_sym != 0.0 or params.delta_asym != 0.0:
        raise ReductionUnavailableError(
            "reduction unavailable: symmetry-breaking terms delta_sym/delta_asym are nonzero"
        )
    psi = as_reduced_state(psi, params)
    out = np.empty_like(psi)
    _kernels.rhs_reduced(psi, *_packed(params), out)
    return out
