"""Numba-compiled evaluation and integration cores.

The nonpairwise term is evaluated through the exact identity

    sum_{m,n} sin(h*(theta_m - theta_n) + c) = |sum_m exp(i h theta_m)|^2 sin(c),

so G4(theta_tau; phi) costs O(N) per population instead of O(N^2) per
oscillator pair.  Equality with the literal double sum is pinned by tests.
"""

import numba
import numpy as np

_SIG = numba.types.int64(
    numba.float64[::1],
    numba.int64,
    numba.int64,
    numba.float64[::1], numba.float64[::1], numba.float64[::1],
    numba.float64[::1], numba.float64[::1], numba.float64[::1],
    numba.float64,
    numba.float64,
    numba.float64,
    numba.float64,
    numba.float64[::1],
)


@numba.njit(cache=True, nogil=True, inline="always")
def _rhs_core(theta, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, out):
    MN = M * N
    H2 = g2a.shape[0]
    H4 = g4a.shape[0]

    # squared harmonic order parameters per population, |sum_m e^{i h theta}|^2 / N^2
    r2 = np.empty((M, H4))
    for tau in range(M):
        for h in range(H4):
            cre = 0.0
            cim = 0.0
            for m in range(N):
                ang = g4m[h] * theta[tau * N + m]
                cre += np.cos(ang)
                cim += np.sin(ang)
            r2[tau, h] = (cre * cre + cim * cim) / (N * N)

    zre = 0.0
    zim = 0.0
    if dsym != 0.0:
        for i in range(MN):
            zre += np.cos(theta[i])
            zim += np.sin(theta[i])

    for sig in range(M):
        prev = (sig - 1) % M
        nxt = (sig + 1) % M
        for k in range(N):
            i = sig * N + k
            acc = omega
            for j in range(N):
                if j == k:
                    continue
                d = theta[sig * N + j] - theta[i]
                for h in range(H2):
                    acc += g2a[h] * np.sin(g2m[h] * d + g2p[h])
                for h in range(H4):
                    acc += K * (r2[nxt, h] - r2[prev, h]) * g4a[h] * np.sin(g4m[h] * d + g4p[h])
            if dsym != 0.0:
                acc += dsym * (zim * np.cos(theta[i]) - zre * np.sin(theta[i])) / MN
            if dasym != 0.0:
                inext = (i + 1) % MN
                acc += dasym * np.sin(theta[inext] - theta[i]) / MN
            out[i] = acc
    return 0


@numba.njit(_SIG, cache=True, nogil=True)
def rhs(theta, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, out):
    return _rhs_core(theta, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, out)


@numba.njit(cache=True, nogil=True, inline="always")
def _lift_into(psi, M, N, theta):
    for sig in range(M):
        theta[sig * N] = 0.0
        for k in range(N - 1):
            theta[sig * N + 1 + k] = psi[sig * (N - 1) + k]


@numba.njit(_SIG, cache=True, nogil=True)
def rhs_reduced(psi, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, out):
    theta = np.empty(M * N)
    x = np.empty(M * N)
    _lift_into(psi, M, N, theta)
    _rhs_core(theta, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, x)
    for sig in range(M):
        for k in range(N - 1):
            out[sig * (N - 1) + k] = x[sig * N + 1 + k] - x[sig * N]
    return 0


@numba.njit(cache=True, nogil=True, inline="always")
def _rk4_step(y, dt, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym,
              k1, k2, k3, k4, tmp):
    n = y.shape[0]
    _rhs_core(y, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, k1)
    for i in range(n):
        tmp[i] = y[i] + 0.5 * dt * k1[i]
    _rhs_core(tmp, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, k2)
    for i in range(n):
        tmp[i] = y[i] + 0.5 * dt * k2[i]
    _rhs_core(tmp, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, k3)
    for i in range(n):
        tmp[i] = y[i] + dt * k3[i]
    _rhs_core(tmp, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, k4)
    for i in range(n):
        y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@numba.njit(cache=True, nogil=True)
def rk4_chunk(y, dt, n_steps, stride, M, N, g2a, g2m, g2p, g4a, g4m, g4p,
              K, omega, dsym, dasym, rec, reduced):
    """Advance n_steps RK4 steps in place, recording every stride-th state.

    rec must have n_steps // stride rows.  With reduced=True the state is a
    reduced (phase-difference) state and the lifted field is used.  Returns
    the 1-based local step at which a non-finite recorded state was first
    seen, or -1.
    """
    dim = y.shape[0]
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    tmp = np.empty(dim)
    full_dim = M * N
    theta = np.empty(full_dim)
    x = np.empty(full_dim)
    row = 0
    for s in range(1, n_steps + 1):
        if reduced:
            _rhs_step_reduced(y, dt, M, N, g2a, g2m, g2p, g4a, g4m, g4p,
                              K, omega, dsym, dasym, k1, k2, k3, k4, tmp, theta, x)
        else:
            _rk4_step(y, dt, M, N, g2a, g2m, g2p, g4a, g4m, g4p,
                      K, omega, dsym, dasym, k1, k2, k3, k4, tmp)
        if s % stride == 0 and row < rec.shape[0]:
            ok = True
            for i in range(dim):
                rec[row, i] = y[i]
                if not np.isfinite(y[i]):
                    ok = False
            row += 1
            if not ok:
                return s
    return -1


@numba.njit(cache=True, nogil=True, inline="always")
def _reduced_rhs_into(psi, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym,
                      out, theta, x):
    _lift_into(psi, M, N, theta)
    _rhs_core(theta, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, x)
    for sig in range(M):
        for k in range(N - 1):
            out[sig * (N - 1) + k] = x[sig * N + 1 + k] - x[sig * N]


@numba.njit(cache=True, nogil=True, inline="always")
def _rhs_step_reduced(y, dt, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym,
                      k1, k2, k3, k4, tmp, theta, x):
    n = y.shape[0]
    _reduced_rhs_into(y, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, k1, theta, x)
    for i in range(n):
        tmp[i] = y[i] + 0.5 * dt * k1[i]
    _reduced_rhs_into(tmp, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, k2, theta, x)
    for i in range(n):
        tmp[i] = y[i] + 0.5 * dt * k2[i]
    _reduced_rhs_into(tmp, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, k3, theta, x)
    for i in range(n):
        tmp[i] = y[i] + dt * k3[i]
    _reduced_rhs_into(tmp, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, k4, theta, x)
    for i in range(n):
        y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@numba.njit(cache=True, nogil=True)
def em_chunk(y, dt, noise_scale, noise, n_steps, stride, M, N, g2a, g2m, g2p,
             g4a, g4m, g4p, K, omega, dsym, dasym, rec):
    """Euler-Maruyama chunk: y <- y + X(y) dt + noise_scale * noise[s].

    noise holds one row of standard normals per step (ignored, and allowed
    to be a dummy, when noise_scale is 0); rec gets every stride-th state.
    Returns the 1-based local step of the first non-finite recorded state,
    or -1.
    """
    dim = y.shape[0]
    x = np.empty(dim)
    row = 0
    for s in range(1, n_steps + 1):
        _rhs_core(y, M, N, g2a, g2m, g2p, g4a, g4m, g4p, K, omega, dsym, dasym, x)
        if noise_scale != 0.0:
            for i in range(dim):
                y[i] += dt * x[i] + noise_scale * noise[s - 1, i]
        else:
            for i in range(dim):
                y[i] += dt * x[i]
        if s % stride == 0 and row < rec.shape[0]:
            ok = True
            for i in range(dim):
                rec[row, i] = y[i]
                if not np.isfinite(y[i]):
                    ok = False
            row += 1
            if not ok:
                return s
    return -1
