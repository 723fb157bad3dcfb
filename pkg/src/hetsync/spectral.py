"""Linear stability at the sync/splay-word relative equilibria.

A length-M word over {S, D} names a relative equilibrium: population sigma
is fully phase synchronized (S) or in splay phase (D).  The reduced
(phase-difference) Jacobian at these points is computed by central finite
differences; closed-form spectra are available for three populations of two
oscillators at general angles and of three oscillators at
(alpha2, alpha4) = (pi/2, pi) with a2 = 1.

With c2 = 2 cos(alpha2), c4 = 2 K cos(alpha4), h2 = 4 r cos(2 alpha2):

  N=2, one-splay word:  { c2 + h2,  -c4 - c2 + h2,  c4 - c2 + h2 }
  N=2, two-splay word:  { -c4 + c2 + h2,  c4 + c2 + h2,  -c2 + h2 }
  N=3, one-splay word:  -15r +/- 1.5i, (-24r + 3K) x2, (-24r - 3K) x2
  N=3, two-splay word:  -15r + 1.5K +/- 1.5i, -15r - 1.5K +/- 1.5i, (-24r) x2

The saddle value nu = -Re(weakest contraction) / Re(strongest expansion)
classifies dissipativity: a saddle with nu > 1 contracts more than it
expands, and a cycle is dissipative when the product of its saddle values
exceeds one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import NoClosedFormError, NotASaddleError
from .model import Params, full_field, lift, reduced_field

Eig = Tuple[float, float, int]  # (real, imag, multiplicity)

ZERO_EIG_TOL = 1e-8       # group-orbit eigenvalue threshold
CLUSTER_TOL = 1e-6        # numeric multiplicity clustering
N3_ANGLES = (np.pi / 2, np.pi)


def parse_label(word: str, m: int) -> str:
    word = str(word).upper()
    if len(word) != m or any(c not in "SD" for c in word):
        raise ValueError(f"label must be a length-{m} word over {{S, D}}, got {word!r}")
    return word


def equilibrium_point(label: str, n: int) -> np.ndarray:
    """Reduced-state representative: S -> zeros, D -> (2*pi*k/N)_{k=1..N-1}."""
    splay = 2.0 * np.pi * np.arange(1, n) / n
    blocks = [splay if c == "D" else np.zeros(n - 1) for c in parse_label(label, len(label))]
    return np.concatenate(blocks)


def population_target_sets(label: str, n: int) -> List[np.ndarray]:
    """Per-population representatives of the labeled invariant set.

    For a splay population all within-population permutation images are
    listed (the splay set is the full permutation orbit); synchrony has the
    single representative 0.
    """
    import itertools

    splay_phases = 2.0 * np.pi * np.arange(n) / n
    splay_reps = set()
    for perm in itertools.permutations(range(n)):
        th = splay_phases[list(perm)]
        psi = np.mod(th[1:] - th[0], 2.0 * np.pi)
        splay_reps.add(tuple(np.round(psi, 12)))
    splay = np.array(sorted(splay_reps))
    sets = []
    for c in parse_label(label, len(label)):
        sets.append(splay.copy() if c == "D" else np.zeros((1, n - 1)))
    return sets


def jacobian_fd(field_fn: Callable[[np.ndarray], np.ndarray], point, h: float = 1e-6) -> np.ndarray:
    """Dense Jacobian by central finite differences."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    x = np.asarray(point, dtype=float).ravel()
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (np.asarray(field_fn(x + e)) - np.asarray(field_fn(x - e))) / (2 * h)
    return J


def eig_small(matrix) -> np.ndarray:
    """All eigenvalues of a small dense real matrix."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if A.shape[0] > 16:
        raise ValueError("eig_small is limited to dimension <= 16")
    return np.linalg.eigvals(A)


def cluster_eigs(eigs: Sequence[complex], tol: float = CLUSTER_TOL) -> List[Eig]:
    """Group eigenvalues within tol into (re, im, multiplicity) triples."""
    remaining = sorted(eigs, key=lambda z: (z.real, z.imag))
    clusters: List[List[complex]] = []
    for z in remaining:
        for c in clusters:
            if abs(z - c[0]) <= tol:
                c.append(z)
                break
        else:
            clusters.append([z])
    out = [(float(np.mean([z.real for z in c])),
            float(np.mean([z.imag for z in c])), len(c)) for c in clusters]
    return sorted(out, key=lambda t: (t[0], t[1]))


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Eigenvalues (with multiplicity) at a labeled relative equilibrium."""

    label: str
    source: str                      # "reduced" | "full"
    numeric_eigs: Tuple[Eig, ...]
    analytic_eigs: Optional[Tuple[Eig, ...]]
    zero_count: int
    saddle_value: Optional[float]
    params: Params = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "source": self.source,
            "eigs": [{"re": re, "im": im, "mult": m} for re, im, m in self.numeric_eigs],
            "analytic_eigs": None if self.analytic_eigs is None else
                [{"re": re, "im": im, "mult": m} for re, im, m in self.analytic_eigs],
            "zero_count": self.zero_count,
            "nu": self.saddle_value,
        }


def _n2_eigs(label: str, p: Params) -> List[Eig]:
    """Closed forms for three populations of two oscillators, general angles."""
    c2 = 2 * np.cos(p.alpha2)
    c4 = 2 * p.K * np.cos(p.alpha4)
    h2 = 4 * p.r * np.cos(2 * p.alpha2)
    n_splay = label.count("D")
    if n_splay == 0:     # all-sync: triple -2 g2'(0)
        lam = -c2 + h2
        return [(lam, 0.0, 3)]
    if n_splay == 3:     # all-splay: triple -2 g2'(pi)
        lam = c2 + h2
        return [(lam, 0.0, 3)]
    if n_splay == 1:     # orbit of the one-splay word
        lams = [c2 + h2, -c4 - c2 + h2, c4 - c2 + h2]
    else:                # orbit of the two-splay word
        lams = [-c4 + c2 + h2, c4 + c2 + h2, -c2 + h2]
    return cluster_eigs([complex(x, 0.0) for x in lams], tol=0.0)


def _n3_eigs(label: str, p: Params) -> List[Eig]:
    """Closed forms for three populations of three oscillators at (pi/2, pi)."""
    r, K = p.r, p.K
    n_splay = label.count("D")
    if n_splay == 0:
        return [(-24 * r, 0.0, 6)]
    if n_splay == 3:
        return cluster_eigs([complex(-15 * r, 1.5), complex(-15 * r, -1.5)] * 3, tol=0.0)
    if n_splay == 1:
        eigs = [complex(-15 * r, 1.5), complex(-15 * r, -1.5),
                complex(-24 * r + 3 * K, 0.0), complex(-24 * r + 3 * K, 0.0),
                complex(-24 * r - 3 * K, 0.0), complex(-24 * r - 3 * K, 0.0)]
    else:
        eigs = [complex(-15 * r + 1.5 * K, 1.5), complex(-15 * r + 1.5 * K, -1.5),
                complex(-15 * r - 1.5 * K, 1.5), complex(-15 * r - 1.5 * K, -1.5),
                complex(-24 * r, 0.0), complex(-24 * r, 0.0)]
    return cluster_eigs(eigs, tol=0.0)


def analytic_spectrum(label: str, params: Params) -> List[Eig]:
    """Closed-form reduced spectrum, where available.

    Supported: (M, N) = (3, 2) at general parameters and (M, N) = (3, 3) at
    (alpha2, alpha4) = (pi/2, pi) with a2 = 1 (within 1e-12).
    """
    label = parse_label(label, params.M)
    if params.M != 3 or params.g2_terms is not None or params.g4_terms is not None:
        raise NoClosedFormError(f"no closed form for M={params.M} with custom coupling")
    if params.N == 2:
        return _n2_eigs(label, params)
    if params.N == 3:
        if (abs(params.alpha2 - N3_ANGLES[0]) > 1e-12
                or abs(params.alpha4 - N3_ANGLES[1]) > 1e-12
                or abs(params.a2 - 1.0) > 1e-12):
            raise NoClosedFormError(
                "N=3 closed forms hold only at (alpha2, alpha4) = (pi/2, pi), a2 = 1")
        return _n3_eigs(label, params)
    raise NoClosedFormError(f"no closed form for N={params.N}")


def numeric_spectrum(label: str, params: Params, source: str = "reduced",
                     h: float = 1e-6) -> SpectrumReport:
    """Finite-difference spectrum at a labeled equilibrium, with the closed
    form attached when it exists."""
    label = parse_label(label, params.M)
    psi = equilibrium_point(label, params.N)
    if source == "reduced":
        J = jacobian_fd(lambda x: reduced_field(x, params), psi, h)
    elif source == "full":
        theta = lift(psi, params.N)
        J = jacobian_fd(lambda x: full_field(x, params), theta, h)
    else:
        raise ValueError(f"source must be 'reduced' or 'full', got {source!r}")
    eigs = eig_small(J)
    clustered = tuple(cluster_eigs(eigs))
    zero_count = int(sum(m for re, im, m in clustered
                         if abs(complex(re, im)) < ZERO_EIG_TOL))
    try:
        analytic = tuple(analytic_spectrum(label, params))
    except NoClosedFormError:
        analytic = None
    probe = SpectrumReport(label=label, source=source, numeric_eigs=clustered,
                           analytic_eigs=analytic, zero_count=zero_count,
                           saddle_value=None, params=params)
    try:
        nu = saddle_value(probe)
    except NotASaddleError:
        nu = None
    return SpectrumReport(label=label, source=source, numeric_eigs=clustered,
                          analytic_eigs=analytic, zero_count=zero_count,
                          saddle_value=nu, params=params)


def _eig_list(report: SpectrumReport, prefer: str) -> List[Eig]:
    if prefer == "analytic" and report.analytic_eigs is not None:
        return list(report.analytic_eigs)
    return list(report.numeric_eigs)


def saddle_value(report: SpectrumReport, prefer: str = "analytic") -> float:
    """nu = -Re(lambda_weakest_contracting) / Re(lambda_strongest_expanding).

    Group-orbit zero eigenvalues (|lambda| < 1e-8) are excluded for
    full-system reports.  Raises NotASaddleError without both expansion and
    contraction.
    """
    eigs = _eig_list(report, prefer)
    if report.source == "full":
        eigs = [e for e in eigs if abs(complex(e[0], e[1])) >= ZERO_EIG_TOL]
    elif any(abs(complex(re, im)) < ZERO_EIG_TOL for re, im, _ in eigs):
        raise NotASaddleError(f"{report.label}: not hyperbolic in the reduced system")
    res = [re for re, _, m in eigs for _ in range(m)]
    contracting = [re for re in res if re < 0]
    expanding = [re for re in res if re > 0]
    if not contracting or not expanding:
        raise NotASaddleError(
            f"{report.label}: not a saddle (contraction {len(contracting)}, "
            f"expansion {len(expanding)})")
    return -max(contracting) / max(expanding)


@dataclass(frozen=True)
class CycleDissipativity:
    """Saddle values along one cycle period and their products."""

    labels: Tuple[str, ...]
    values: Tuple[float, ...]
    pair_product: float   # product over one representative of each group orbit
    full_product: float   # product over the whole cycle

    @property
    def dissipative(self) -> bool:
        return self.full_product > 1.0


def cycle_dissipativity(labels: Sequence[str], params: Params,
                        prefer: str = "analytic") -> CycleDissipativity:
    """Product of saddle values over a heteroclinic cycle.

    By the cyclic population symmetry the distinct group orbits (the
    one-splay and two-splay words, for the built-in cycles) each contribute
    the same value at every visit, so the pair product over orbit
    representatives determines the full product.
    """
    values = []
    for lab in labels:
        rep = numeric_spectrum(lab, params, source="reduced")
        values.append(saddle_value(rep, prefer=prefer))
    orbit_reps = {}
    for lab, v in zip(labels, values):
        orbit_reps.setdefault(parse_label(lab, params.M).count("D"), v)
    pair = float(np.prod(list(orbit_reps.values())))
    return CycleDissipativity(labels=tuple(labels), values=tuple(values),
                              pair_product=pair,
                              full_product=float(np.prod(values)))
