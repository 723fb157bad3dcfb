"""Canonical-invariant-region analysis for three oscillators per population.

For a single free population with ordered phase differences
psi = (psi1, psi2), 0 < psi1 < psi2 < 2*pi, the region C is a triangle
whose boundary consists of partially synchronized states; full synchrony
S = (0, 0) sits in the corner and the splay configuration
D = (2*pi/3, 4*pi/3) is the centroid.  On the invariant subspaces where the
other two populations sit at splay/sync (branch "DpsiS") or sync/splay
(branch "psiDS") the reduced dynamics of the free population decompose at
(alpha2, alpha4) = (pi/2, pi), a2 = 1 into

    psi_dot = X0(psi) + r * Xr(psi) +/- K * XK(psi)

with the plus sign on DpsiS and the minus sign on psiDS.  The potential

    V(psi) = sin(psi1/2) sin(psi2/2) sin((psi2 - psi1)/2)

is conserved by X0, grows under +K*XK away from the boundary
(<grad V, XK> = V(psi) (1 - Q(psi)) with Q < 1 away from D), and the
competition with the higher-harmonic part is measured by the ratio
R = -<grad V, Xr> / <grad V, XK>, whose singularities on the boundary and
at D are removable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import (
    BoundaryStructureError,
    ConnectionFailure,
    IndeterminatePointError,
)
from .integrate import integrate_reduced_rk4
from .model import Params, reduced_field
from .spectral import (
    ZERO_EIG_TOL,
    equilibrium_point,
    jacobian_fd,
    numeric_spectrum,
    parse_label,
    population_target_sets,
)

TWO_PI = 2.0 * np.pi
D_POINT = np.array([2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0])
S_POINT = np.array([0.0, 0.0])

EXCLUSION_RADIUS = 1e-3          # indeterminate band around D and the boundary
SUBSPACE_DRIFT_TOL = 1e-8        # certified-subspace leave threshold
DEFAULT_EPS = 1e-4               # unstable-direction perturbation
DEFAULT_TOL = 1e-6               # arrival ball radius
DEFAULT_TMAX = 1e3

BRANCHES = ("DpsiS", "psiDS")
_BRANCH_SIGN = {"DpsiS": +1.0, "psiDS": -1.0}

_N3_GATE = "region decomposition holds at (alpha2, alpha4) = (pi/2, pi), a2 = 1 only"


def _check_gate(params: Params):
    if params.N != 3 or params.M != 3:
        raise ValueError("region analysis is defined for M = 3, N = 3")
    if (abs(params.alpha2 - np.pi / 2) > 1e-12 or abs(params.alpha4 - np.pi) > 1e-12
            or abs(params.a2 - 1.0) > 1e-12):
        raise ValueError(_N3_GATE)


def potential_V(psi1, psi2):
    """V = sin(psi1/2) sin(psi2/2) sin((psi2 - psi1)/2), positive inside C."""
    return np.sin(psi1 / 2) * np.sin(psi2 / 2) * np.sin((psi2 - psi1) / 2)


def grad_V(psi1, psi2):
    a, b, c = psi1 / 2, psi2 / 2, (psi2 - psi1) / 2
    d1 = 0.5 * np.cos(a) * np.sin(b) * np.sin(c) - 0.5 * np.sin(a) * np.sin(b) * np.cos(c)
    d2 = 0.5 * np.sin(a) * np.cos(b) * np.sin(c) + 0.5 * np.sin(a) * np.sin(b) * np.cos(c)
    return np.stack([d1, d2], axis=-1)


def field_decomposition(psi, params: Params):
    """(X0, XK, Xr) of the planar dynamics at a region point.

    X0 carries the first within-population harmonic, Xr the higher
    harmonics (weight r), XK the inter-population forcing (weight +/-K
    depending on the branch).
    """
    _check_gate(params)
    p1, p2 = np.asarray(psi, dtype=float).reshape(2)
    x0 = np.array([np.cos(p1 - p2) - np.cos(p2),
                   np.cos(p2 - p1) - np.cos(p1)])
    xk = np.array([np.sin(p1 - p2) + np.sin(p2) + 2 * np.sin(p1),
                   np.sin(p2 - p1) + 2 * np.sin(p2) + np.sin(p1)])
    xr = np.array([
        np.sin(6 * (p2 - p1)) + np.sin(2 * (p2 - p1)) - np.sin(6 * p2)
        - np.sin(2 * p2) - 2 * np.sin(6 * p1) - 2 * np.sin(2 * p1),
        np.sin(6 * (p1 - p2)) + np.sin(2 * (p1 - p2)) - 2 * np.sin(6 * p2)
        - 2 * np.sin(2 * p2) - np.sin(6 * p1) - np.sin(2 * p1),
    ])
    return x0, xk, xr


def planar_field(psi, params: Params, branch: str):
    """X0 + r*Xr +/- K*XK for the requested invariant-subspace branch."""
    x0, xk, xr = field_decomposition(psi, params)
    return x0 + params.r * xr + _BRANCH_SIGN[branch] * params.K * xk


def embed(psi, branch: str) -> np.ndarray:
    """Embed a region point into the 6-dimensional reduced state."""
    p = np.asarray(psi, dtype=float).reshape(2)
    splay = D_POINT
    if branch == "DpsiS":
        return np.concatenate([splay, p, S_POINT])
    if branch == "psiDS":
        return np.concatenate([p, splay, S_POINT])
    raise ValueError(f"branch must be one of {BRANCHES}")


def q_ratio(psi1, psi2):
    """Q = -2 cos(psi2 - psi1) - 2 cos(psi2) - 2 cos(psi1) - 2; max Q = Q(D) = 1.

    With r = 0 the potential drift on the DpsiS branch is
    K * V(psi) * (1 - Q(psi)), so its sign inside C is the sign of 1 - Q.
    """
    return -2 * np.cos(psi2 - psi1) - 2 * np.cos(psi2) - 2 * np.cos(psi1) - 2


def boundary_distance(psi1, psi2):
    """Euclidean distance to the closer of the three boundary sides."""
    return np.minimum(np.minimum(psi1, TWO_PI - psi2),
                      (psi2 - psi1) / np.sqrt(2.0))


def is_admissible(psi1, psi2, exclusion: float = EXCLUSION_RADIUS):
    """Interior points outside the exclusion bands around D and the boundary."""
    inside = (psi1 > 0) & (psi2 > psi1) & (psi2 < TWO_PI)
    clear_boundary = boundary_distance(psi1, psi2) > exclusion
    clear_centroid = np.hypot(psi1 - D_POINT[0], psi2 - D_POINT[1]) > exclusion
    return inside & clear_boundary & clear_centroid


def _inner_products(psi1, psi2):
    gv = grad_V(psi1, psi2)
    p1 = np.asarray(psi1, dtype=float)
    p2 = np.asarray(psi2, dtype=float)
    xk1 = np.sin(p1 - p2) + np.sin(p2) + 2 * np.sin(p1)
    xk2 = np.sin(p2 - p1) + 2 * np.sin(p2) + np.sin(p1)
    xr1 = (np.sin(6 * (p2 - p1)) + np.sin(2 * (p2 - p1)) - np.sin(6 * p2)
           - np.sin(2 * p2) - 2 * np.sin(6 * p1) - 2 * np.sin(2 * p1))
    xr2 = (np.sin(6 * (p1 - p2)) + np.sin(2 * (p1 - p2)) - 2 * np.sin(6 * p2)
           - 2 * np.sin(2 * p2) - np.sin(6 * p1) - np.sin(2 * p1))
    gk = gv[..., 0] * xk1 + gv[..., 1] * xk2
    gr = gv[..., 0] * xr1 + gv[..., 1] * xr2
    return gr, gk


def r_ratio(psi1, psi2, exclusion: float = EXCLUSION_RADIUS):
    """R = -<grad V, Xr> / <grad V, XK> at an admissible region point.

    Both inner products vanish on the boundary and at D at the same order,
    so the ratio is numerically indeterminate there; points inside the
    exclusion band are rejected.
    """
    if not np.all(is_admissible(np.asarray(psi1), np.asarray(psi2), exclusion)):
        raise IndeterminatePointError(
            f"indeterminate point: within {exclusion} of the boundary or centroid")
    gr, gk = _inner_products(psi1, psi2)
    return -gr / gk


def r_ratio_grid(n: int = 400, exclusion: float = EXCLUSION_RADIUS):
    """|R| over the admissible n-by-n mesh; returns (psi1, psi2, R) flat arrays."""
    h = TWO_PI / (n + 1)
    vals = h * np.arange(1, n + 1)
    P1, P2 = np.meshgrid(vals, vals, indexing="ij")
    mask = is_admissible(P1, P2, exclusion)
    p1, p2 = P1[mask], P2[mask]
    gr, gk = _inner_products(p1, p2)
    return p1, p2, -gr / gk


def r_sup_estimate(n: int = 400, exclusion: float = EXCLUSION_RADIUS) -> float:
    """Grid estimate of the sup norm of |R| over the admissible region."""
    _, _, R = r_ratio_grid(n, exclusion)
    return float(np.max(np.abs(R)))


def potential_drift(psi1, psi2, params: Params, branch: str):
    """V_dot = <grad V, X0 + r Xr +/- K XK> (the X0 part is identically 0)."""
    _check_gate(params)
    gr, gk = _inner_products(psi1, psi2)
    return params.r * gr + _BRANCH_SIGN[branch] * params.K * gk


def sample_admissible(count: int, rng, exclusion: float = EXCLUSION_RADIUS,
                      max_tries: int = 100):
    """Uniform admissible interior points, rejection-sampled."""
    out = np.empty((count, 2))
    filled = 0
    for _ in range(max_tries):
        need = count - filled
        if need == 0:
            break
        p1 = rng.uniform(0, TWO_PI, 2 * need)
        p2 = rng.uniform(0, TWO_PI, 2 * need)
        lo, hi = np.minimum(p1, p2), np.maximum(p1, p2)
        ok = is_admissible(lo, hi, exclusion)
        take = min(need, int(np.sum(ok)))
        out[filled:filled + take, 0] = lo[ok][:take]
        out[filled:filled + take, 1] = hi[ok][:take]
        filled += take
    if filled < count:
        raise RuntimeError("rejection sampling failed to fill the request")
    return out


@dataclass(frozen=True)
class BoundaryEquilibrium:
    """Nontrivial equilibrium on one boundary side of the region."""

    branch: str
    chi: float                 # position on the side psi1 = 0, psi2 = chi
    tangential_sign: int       # sign of the within-boundary eigenvalue
    transverse_sign: int       # sign of the eigenvalue transverse to the side


def boundary_rate(chi, params: Params, branch: str):
    """Within-boundary speed on the side psi1 = 0 parametrized by chi = psi2.

    This is the second component of the branch field restricted to the
    side; expanding the decomposition gives
    cos(chi) - 1 - 3 r (sin(6 chi) + sin(2 chi)) +/- 3 K sin(chi).
    """
    _check_gate(params)
    chi = np.asarray(chi, dtype=float)
    return (np.cos(chi) - 1.0 - 3.0 * params.r * (np.sin(6 * chi) + np.sin(2 * chi))
            + _BRANCH_SIGN[branch] * 3.0 * params.K * np.sin(chi))


def _bisect(f, a, b, tol=1e-10):
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError("bisection bracket does not change sign")
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def boundary_equilibria(params: Params, n_brackets: int = 4096) -> List[BoundaryEquilibrium]:
    """Nontrivial boundary equilibria on both branches with stability signs.

    Roots of the within-boundary rate on (0, 2*pi) are bracketed on a fine
    grid and bisected to 1e-10; the certified regime has exactly one root
    per side (per group orbit).  Stability signs come from the planar block
    of the finite-difference Jacobian at the embedded point: the side is
    invariant, so the block is triangular with the transverse eigenvalue
    d psi1_dot / d psi1 and the tangential one d chi_dot / d chi.
    """
    _check_gate(params)
    if params.K <= 0:
        raise ValueError("boundary equilibria require K > 0")
    out = []
    grid = np.linspace(0.0, TWO_PI, n_brackets + 1)[1:-1]
    for branch in BRANCHES:
        vals = boundary_rate(grid, params, branch)
        roots = []
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                roots.append(grid[i])
            elif vals[i] * vals[i + 1] < 0:
                roots.append(_bisect(lambda c: float(boundary_rate(c, params, branch)),
                                     grid[i], grid[i + 1]))
        if len(roots) != 1:
            raise BoundaryStructureError(
                f"boundary structure outside certified regime: {len(roots)} roots "
                f"on branch {branch}")
        chi = roots[0]
        point = embed(np.array([0.0, chi]), branch)
        J = jacobian_fd(lambda x: reduced_field(x, params), point)
        block = J[0:2, 0:2] if branch == "psiDS" else J[2:4, 2:4]
        transverse = block[0, 0]
        tangential = block[1, 1]
        out.append(BoundaryEquilibrium(
            branch=branch, chi=float(chi),
            tangential_sign=int(np.sign(tangential)),
            transverse_sign=int(np.sign(transverse))))
    return out


@dataclass(frozen=True)
class DirectionResult:
    angle: float                       # direction within the unstable plane
    arrival_time: float
    v_certificate_min: Optional[float]  # min sign-corrected dV/dt, N=3 only


@dataclass(frozen=True)
class ConnectionEvidence:
    from_label: str
    to_label: str
    moving_population: int             # 1-based index of the switching population
    directions: Tuple[DirectionResult, ...]

    @property
    def arrival_time(self) -> float:
        return max(d.arrival_time for d in self.directions)

    @property
    def v_certificate_min(self) -> Optional[float]:
        vals = [d.v_certificate_min for d in self.directions if d.v_certificate_min is not None]
        return min(vals) if vals else None

    def to_dict(self) -> dict:
        return {
            "from": self.from_label,
            "to": self.to_label,
            "moving_population": self.moving_population,
            "directions": [
                {"angle": d.angle, "arrival_time": d.arrival_time,
                 "v_certificate_min": d.v_certificate_min}
                for d in self.directions
            ],
        }


def _set_distances(states, sets, n):
    """Per-sample wrapped distance to a labeled product set."""
    m = len(sets)
    states = states.reshape(states.shape[0], m, n - 1)
    total = np.zeros(states.shape[0])
    for sig, reps in enumerate(sets):
        d = np.mod(states[:, sig, None, :] - reps[None, :, :] + np.pi, TWO_PI) - np.pi
        total += np.min(np.sum(d * d, axis=2), axis=1)
    return np.sqrt(total)


def _unstable_plane(from_label: str, params: Params):
    """Orthonormal basis of the unstable eigenspace, snapped to the moving
    population's coordinate plane (raising ConnectionFailure otherwise)."""
    rep = numeric_spectrum(from_label, params, source="reduced")
    expanding = [(re, im, m) for re, im, m in rep.numeric_eigs if re > ZERO_EIG_TOL]
    if not expanding:
        raise ConnectionFailure(f"no unstable direction at {from_label}")
    J = jacobian_fd(lambda x: reduced_field(x, params),
                    equilibrium_point(from_label, params.N))
    eigvals, eigvecs = np.linalg.eig(J)
    cols = []
    for i, lam in enumerate(eigvals):
        if lam.real <= ZERO_EIG_TOL or lam.imag < 0:
            continue  # keep one member of each conjugate pair
        cols.append(np.real(eigvecs[:, i]))
        if lam.imag > 0:
            cols.append(np.imag(eigvecs[:, i]))
    basis, _ = np.linalg.qr(np.array(cols).T)
    return basis  # (reduced_dim, u)


def verify_connection(from_label: str, to_label: str, params: Params,
                      tol: float = DEFAULT_TOL, Tmax: float = DEFAULT_TMAX,
                      eps: float = DEFAULT_EPS, dt: float = 1e-3,
                      n_directions: Optional[int] = None) -> ConnectionEvidence:
    """Integrate out of a saddle along its unstable eigenspace until the
    target set is reached.

    The moving population is the one whose letter changes between the two
    labels; the unstable eigenspace must coincide with its coordinate plane
    (tolerance 1e-6), and the trajectory must stay on the certified
    invariant subspace (fixed populations within 1e-8).  For two-dimensional
    unstable planes a fan of equally spaced directions is launched, offset
    by pi/8 so no direction starts inside a partial-synchrony plane; for
    one-dimensional ones both signs are used.  The N=3 evidence carries the
    min over the path of the sign-corrected potential drift (|V| increasing
    toward splay, decreasing toward sync), sampled outside tol-balls of the
    endpoints.
    """
    m, n = params.M, params.N
    from_label = parse_label(from_label, m)
    to_label = parse_label(to_label, m)
    moving = [i for i in range(m) if from_label[i] != to_label[i]]
    if len(moving) != 1:
        raise ValueError("labels must differ in exactly one population")
    mov = moving[0]

    basis = _unstable_plane(from_label, params)
    u = basis.shape[1]
    block = slice(mov * (n - 1), (mov + 1) * (n - 1))
    outside = basis.copy()
    outside[block, :] = 0.0
    if np.linalg.norm(outside) > 1e-6:
        raise ConnectionFailure(
            f"unstable manifold of {from_label} does not lie in the subspace "
            f"containing {to_label}")
    if u != (2 if n == 3 else 1):
        raise ConnectionFailure(
            f"unexpected unstable dimension {u} at {from_label}")

    from_point = equilibrium_point(from_label, n)
    target_sets = population_target_sets(to_label, n)
    fixed_sets = [population_target_sets(from_label, n)[i] if i != mov else None
                  for i in range(m)]

    if u == 1:
        angles = [0.0, np.pi]                      # both signs along the axis
        dirs = [np.array([np.cos(a)]) for a in angles]
    else:
        count = n_directions or 8
        angles = [np.pi / 8 + 2 * np.pi * j / count for j in range(count)]
        dirs = [np.array([np.cos(a), np.sin(a)]) for a in angles]

    toward_splay = to_label[mov] == "D"
    results = []
    for ang, d in zip(angles, dirs):
        psi0 = from_point.copy()
        psi0[block] = psi0[block] + eps * d
        res = _trace_one(psi0, params, mov, target_sets, fixed_sets, toward_splay,
                         tol, Tmax, dt, ang)
        results.append(res)
    return ConnectionEvidence(from_label=from_label, to_label=to_label,
                              moving_population=mov + 1,
                              directions=tuple(results))


def _trace_one(psi0, params, mov, target_sets, fixed_sets, toward_splay,
               tol, Tmax, dt, angle) -> DirectionResult:
    from .model import _packed
    from . import _kernels

    n = params.N
    m = params.M
    packed = _packed(params)
    check_stride = 100
    chunk_steps = 10000
    n_steps_max = int(round(Tmax / dt))
    y = psi0.copy()
    block = slice(mov * (n - 1), (mov + 1) * (n - 1))

    track_v = n == 3
    prev_absv = abs(float(potential_V(*psi0[block]))) if track_v else None
    vmin = np.inf
    sample_dt = dt * check_stride

    done = 0
    while done < n_steps_max:
        steps = min(chunk_steps, n_steps_max - done)
        steps = (steps // check_stride) * check_stride or steps
        rec = np.empty((steps // check_stride, psi0.size))
        bad = _kernels.rk4_chunk(y, dt, steps, check_stride, *packed, rec, True)
        if bad >= 0:
            raise ConnectionFailure(f"integration diverged at step {done + bad}")
        done += steps
        if rec.shape[0] == 0:
            continue
        dist = _set_distances(rec, target_sets, n)
        drift = np.zeros(rec.shape[0])
        for sig in range(m):
            if sig == mov:
                continue
            blk = rec[:, sig * (n - 1):(sig + 1) * (n - 1)]
            dd = np.mod(blk[:, None, :] - fixed_sets[sig][None, :, :] + np.pi,
                        TWO_PI) - np.pi
            drift = np.maximum(drift, np.sqrt(np.min(np.sum(dd * dd, axis=2), axis=1)))
        arrived = np.nonzero(dist < tol)[0]
        limit = arrived[0] + 1 if arrived.size else rec.shape[0]
        if np.any(drift[:limit] > SUBSPACE_DRIFT_TOL):
            raise ConnectionFailure(
                f"left certified subspace (drift {np.max(drift[:limit]):.2e})")
        if track_v:
            absv = np.abs(potential_V(rec[:limit, block][:, 0], rec[:limit, block][:, 1]))
            seq = np.concatenate(([prev_absv], absv))
            rates = np.diff(seq) / sample_dt
            if not toward_splay:
                rates = -rates
            # exclude samples inside the endpoint arrival ball
            ok = dist[:limit] >= tol
            if np.any(ok):
                vmin = min(vmin, float(np.min(rates[ok])))
            prev_absv = float(absv[-1])
        if arrived.size:
            t_arr = (done - steps + (arrived[0] + 1) * check_stride) * dt
            return DirectionResult(angle=angle, arrival_time=t_arr,
                                   v_certificate_min=(vmin if track_v else None))
    raise ConnectionFailure(f"Tmax exceeded without reaching the target "
                            f"(final distance {dist[-1]:.2e})")


def potential_map(params: Params, n: int = 200,
                  exclusion: float = EXCLUSION_RADIUS) -> List[dict]:
    """Grid rows for the potential-map table: V, Q, R and both branch drifts.

    Rows cover the closed triangle mesh (psi1 outer, psi2 inner); R is None
    inside the exclusion band where the ratio is indeterminate.
    """
    _check_gate(params)
    h = TWO_PI / (n + 1)
    rows = []
    for i in range(0, n + 2):
        p1 = i * h
        for j in range(i, n + 2):
            p2 = j * h
            admissible = bool(is_admissible(p1, p2, exclusion))
            gr, gk = _inner_products(p1, p2)
            rows.append({
                "psi1": p1,
                "psi2": p2,
                "V": float(potential_V(p1, p2)),
                "Q": float(q_ratio(p1, p2)),
                "R": float(-gr / gk) if admissible else None,
                "vdot_DpS": float(params.r * gr + params.K * gk),
                "vdot_pDS": float(params.r * gr - params.K * gk),
            })
    return rows


def conservation_drift(params: Params, psi_start, T: float = 100.0,
                       dt: float = 1e-3, branch: str = "DpsiS") -> float:
    """Max |V(t) - V(0)| along a reduced trajectory started on the branch."""
    _check_gate(params)
    psi0 = embed(psi_start, branch)
    times, states = integrate_reduced_rk4(psi0, params, dt=dt, T=T, stride=100)
    blk = slice(2, 4) if branch == "DpsiS" else slice(0, 2)
    v = potential_V(states[:, blk][:, 0], states[:, blk][:, 1])
    return float(np.max(np.abs(v - v[0])))
