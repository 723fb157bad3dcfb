"""Existence and dissipativity conditions for the heteroclinic cycles.

All inequalities are strict; each condition is reported together with its
real margin (positive slack = satisfied) so near-boundary parameter points
are visible.  For two oscillators per population the conditions are
evaluated from the closed-form eigenvalues at the given angles:

  frequency gap   |2 sin(alpha2)| - 2K > 0
  saddle ordering lam3 < 0 < lam2 at the one-splay word and
                  lam2 < 0 < lam1 at the two-splay word (primed variant),
                  with the stricter interleavings for dissipativity
  saddle values   nu > 1 at both words

At (alpha2, alpha4) = (pi/2, pi) the combined window reduces to
0 < K < 4r < 2K < 2.  For three oscillators per population the conditions
are hard-gated to (pi/2, pi):

  frequency gap   4K < 9
  saddles         0 < 10r < K
  connections     15r < K
  dissipativity   K < 18r

which hold simultaneously exactly for 0 < K/18 < r < K/15 < 3/20.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import NoCertifiedCycleError
from .model import Params

N3_ANGLE_TOL = 1e-12

# saddle visit order of the built-in heteroclinic cycle (M = 3)
CYCLE_LABELS = ("DSS", "DDS", "SDS", "SDD", "SSD", "DSD")


@dataclass(frozen=True)
class ConditionReport:
    n: int
    c_omega: bool
    c_lambda: bool
    c_nu: bool
    window: bool
    c_lambda_prime: Optional[bool] = None   # N=2 only
    c_psi: Optional[bool] = None            # N=3 only
    margins: Dict[str, float] = None

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "c_omega": self.c_omega,
            "c_lambda": self.c_lambda,
            "c_nu": self.c_nu,
            "window": self.window,
            "margins": self.margins,
        }
        if self.n == 2:
            out["c_lambda_prime"] = self.c_lambda_prime
        else:
            out["c_psi"] = self.c_psi
        return out


def _n2_lambdas(alpha2: float, alpha4: float, r: float, K: float):
    """Per-population closed-form eigenvalues at the one- and two-splay words."""
    c2 = 2 * np.cos(alpha2)
    c4 = 2 * K * np.cos(alpha4)
    h2 = 4 * r * np.cos(2 * alpha2)
    lam_dss = (c2 + h2, -c4 - c2 + h2, c4 - c2 + h2)
    lam_dds = (-c4 + c2 + h2, c4 + c2 + h2, -c2 + h2)
    return lam_dss, lam_dds


def check_conditions(params: Params) -> ConditionReport:
    """Evaluate every named condition with its margin (strict inequalities)."""
    if params.N == 2:
        return _check_n2(params.alpha2, params.alpha4, params.r, params.K)
    if params.N == 3:
        if (abs(params.alpha2 - np.pi / 2) > N3_ANGLE_TOL
                or abs(params.alpha4 - np.pi) > N3_ANGLE_TOL):
            raise ValueError(
                "N=3 conditions are only certified at (alpha2, alpha4) = (pi/2, pi)")
        return _check_n3(params.r, params.K)
    raise ValueError(f"conditions defined for N in {{2, 3}}, got N={params.N}")


def _check_n2(alpha2: float, alpha4: float, r: float, K: float) -> ConditionReport:
    (l1_dss, l2_dss, l3_dss), (l1_dds, l2_dds, l3_dds) = _n2_lambdas(alpha2, alpha4, r, K)
    m_omega = float(abs(2 * np.sin(alpha2)) - 2 * K)
    m_lambda_prime = float(min(-l3_dss, l2_dss, -l2_dds, l1_dds))
    m_lambda = float(min(m_lambda_prime, l1_dss - l3_dss, -l1_dss,
                         l3_dds - l2_dds, -l3_dds))
    margins = {
        "c_omega": m_omega,
        "c_lambda_prime": m_lambda_prime,
        "c_lambda": m_lambda,
    }
    c_omega = m_omega > 0
    c_lambda_prime = m_lambda_prime > 0
    c_lambda = m_lambda > 0
    if l2_dss > 0 and l1_dds > 0:
        nu_dss = -l1_dss / l2_dss
        nu_dds = -l3_dds / l1_dds
        m_nu = float(min(nu_dss - 1.0, nu_dds - 1.0))
    else:
        m_nu = float(min(l2_dss, l1_dds))  # no expansion, report the failing slack
    margins["c_nu"] = m_nu
    c_nu = m_nu > 0
    window = bool(c_omega and c_lambda and c_nu and K > 0)
    margins["window"] = float(min(m_omega, m_lambda, m_nu, K))
    return ConditionReport(n=2, c_omega=c_omega, c_lambda=c_lambda, c_nu=c_nu,
                           window=window, c_lambda_prime=c_lambda_prime,
                           margins=margins)


def _check_n3(r: float, K: float) -> ConditionReport:
    margins = {
        "c_omega": 9.0 - 4.0 * K,
        "c_lambda": min(10.0 * r, K - 10.0 * r),
        "c_psi": K - 15.0 * r,
        "c_nu": 18.0 * r - K,
    }
    flags = {k: v > 0 for k, v in margins.items()}
    window = all(flags.values())
    margins["window"] = min(margins.values())
    return ConditionReport(n=3, c_omega=flags["c_omega"], c_lambda=flags["c_lambda"],
                           c_nu=flags["c_nu"], window=window, c_psi=flags["c_psi"],
                           margins=margins)


def scan_regions(alpha2_values: Sequence[float], r_values: Sequence[float],
                 k_values: Sequence[float], alpha4: float, n: int,
                 max_workers: Optional[int] = None) -> List[dict]:
    """Classify a parameter grid; rows ordered alpha2-outer, r-middle, K-inner.

    Rows are independent, so the grid may be evaluated by a worker pool; the
    output ordering is fixed regardless of schedule (see cli for the pool).
    """
    alpha2_values = list(alpha2_values)
    r_values = list(r_values)
    k_values = list(k_values)
    if not alpha2_values or not r_values or not k_values:
        raise ValueError("empty scan grid")

    if n == 3:
        for a2 in alpha2_values:
            if abs(a2 - np.pi / 2) > N3_ANGLE_TOL or abs(alpha4 - np.pi) > N3_ANGLE_TOL:
                raise ValueError(
                    "N=3 scans are only certified at (alpha2, alpha4) = (pi/2, pi)")
    elif n != 2:
        raise ValueError(f"scan defined for n in {{2, 3}}, got {n}")

    cells = [(a2, r, k) for a2 in alpha2_values for r in r_values for k in k_values]

    def one(cell):
        a2, r, k = cell
        rep = _check_n2(a2, alpha4, r, k) if n == 2 else _check_n3(r, k)
        return {"alpha2": a2, "r": r, "K": k, "report": rep}

    if max_workers is not None and max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(one, cells))
    return [one(c) for c in cells]


@dataclass(frozen=True)
class ChainReport:
    """Quotient connection graph of the cycle and its classification flags."""

    vertices: Tuple[str, ...]
    edges: Tuple[Tuple[str, str, int], ...]   # (from, to, connection dimension)
    cyclic: bool
    equable: bool
    almost_complete: bool
    complete: bool
    closed: bool
    boundary_saddles: Dict[str, float] = None  # vertex -> boundary angle chi

    def to_dict(self) -> dict:
        out = {
            "vertices": list(self.vertices),
            "edges": [{"from": a, "to": b, "dim": d} for a, b, d in self.edges],
            "flags": {
                "cyclic": self.cyclic,
                "equable": self.equable,
                "almost_complete": self.almost_complete,
                "complete": self.complete,
                "closed": self.closed,
            },
        }
        if self.boundary_saddles:
            out["boundary_saddles"] = self.boundary_saddles
        return out


def cycle_report(params: Params) -> ChainReport:
    """Heteroclinic chain structure inside the certified window.

    For two oscillators per population the chain is closed: the quotient
    graph has the two saddle orbits joined by one-dimensional connections.
    For three the unstable manifolds are two-dimensional and almost all of
    each ends at the next saddle; the leftover measure-zero part ends at
    boundary equilibria, whose locations corroborate the graph below.
    """
    rep = check_conditions(params)
    if not rep.window:
        failing = [k for k, v in rep.margins.items() if v <= 0 and k != "window"]
        raise NoCertifiedCycleError(f"no certified cycle: conditions failed {failing}")
    if params.N == 2:
        return ChainReport(
            vertices=("DSS", "DDS"),
            edges=(("DSS", "DDS", 1), ("DDS", "DSS", 1)),
            cyclic=True, equable=True, almost_complete=True, complete=True,
            closed=True, boundary_saddles=None)
    from .region import boundary_equilibria

    saddles = {f"xi_{b.branch}": b.chi for b in boundary_equilibria(params)}
    return ChainReport(
        vertices=("DSS", "DDS", "xi_DpsiS", "xi_psiDS"),
        edges=(("DSS", "DDS", 2), ("DDS", "DSS", 2),
               ("DSS", "xi_DpsiS", 1), ("xi_DpsiS", "DDS", 1),
               ("DDS", "xi_psiDS", 1), ("xi_psiDS", "DSS", 1)),
        cyclic=True, equable=True, almost_complete=True, complete=False,
        closed=False, boundary_saddles=saddles)
