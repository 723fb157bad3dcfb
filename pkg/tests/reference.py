"""Independent brute-force reference implementations used as test oracles.

Everything here follows the defining sums literally (no mean-field
identities, no compiled kernels) so it stays an independent check on the
production code paths.
"""

import numpy as np


def g2_ref(phi, params):
    a2, r, al2 = params.a2, params.r, params.alpha2
    if params.N == 2:
        return np.sin(phi + al2) - r * np.sin(2 * (phi + al2))
    if params.N == 3:
        return np.sin(phi + al2) - r * (a2 * np.sin(2 * (phi + al2)) + np.sin(6 * (phi + al2)))
    raise ValueError("reference coupling defined for N in {2, 3} only")


def g4_ref(phi, params):
    return np.sin(phi + params.alpha4)


def G4_ref(theta_tau, phi, params):
    """Literal double sum over oscillator pairs, diagonal included."""
    N = len(theta_tau)
    total = 0.0
    for m in range(N):
        for n in range(N):
            total += g4_ref(theta_tau[m] - theta_tau[n] + phi, params)
    return total / N**2


def full_field_ref(theta, params):
    """Literal evaluation of the network vector field, term by term."""
    M, N = params.M, params.N
    th = np.asarray(theta, dtype=float).reshape(M, N)
    omega = params.omega_value()
    out = np.zeros((M, N))
    flat = th.ravel()
    MN = M * N
    for sig in range(M):
        prev = th[(sig - 1) % M]
        nxt = th[(sig + 1) % M]
        for k in range(N):
            acc = omega
            for j in range(N):
                if j == k:
                    continue
                d = th[sig, j] - th[sig, k]
                acc += g2_ref(d, params)
                acc -= params.K * G4_ref(prev, d, params)
                acc += params.K * G4_ref(nxt, d, params)
            i = sig * N + k
            if params.delta_sym != 0.0:
                acc += params.delta_sym * sum(
                    np.sin(flat[l] - flat[i]) for l in range(MN)
                ) / MN
            if params.delta_asym != 0.0:
                acc += params.delta_asym * np.sin(flat[(i + 1) % MN] - flat[i]) / MN
            out[sig, k] = acc
    return out.ravel()


def pairwise_field_n2_ref(theta, params):
    """Two-oscillator-per-population form with the deduplicated nonpairwise
    term Gtilde4(theta_tau; phi) = (g4(d+phi) + g4(-d+phi)) / 4."""
    assert params.N == 2
    M = params.M
    th = np.asarray(theta, dtype=float).reshape(M, 2)
    omega = params.omega_value()

    def gt4(tau, phi):
        d = th[tau, 0] - th[tau, 1]
        return (g4_ref(d + phi, params) + g4_ref(-d + phi, params)) / 4.0

    out = np.zeros((M, 2))
    for sig in range(M):
        prev, nxt = (sig - 1) % M, (sig + 1) % M
        for k in range(2):
            d = th[sig, 1 - k] - th[sig, k]
            out[sig, k] = (omega + g2_ref(d, params)
                           - params.K * gt4(prev, d) + params.K * gt4(nxt, d))
    return out.ravel()


def reduced_field_n2_closed(psi, params):
    """Closed-form phase-difference dynamics for N = 2:

    psi_dot_sigma = 2 g2h(psi_sigma)
        - (K/2) (g4h(psi_{sigma-1} + psi_sigma) + g4h(psi_sigma - psi_{sigma-1}))
        + (K/2) (g4h(psi_{sigma+1} + psi_sigma) + g4h(psi_sigma - psi_{sigma+1}))

    with the odd parts gh(x) = (g(-x) - g(x)) / 2.
    """
    assert params.N == 2
    M = params.M
    psi = np.asarray(psi, dtype=float).ravel()

    def g2h(x):
        return 0.5 * (g2_ref(-x, params) - g2_ref(x, params))

    def g4h(x):
        return 0.5 * (g4_ref(-x, params) - g4_ref(x, params))

    out = np.zeros(M)
    for sig in range(M):
        pm, pp = psi[(sig - 1) % M], psi[(sig + 1) % M]
        out[sig] = (2 * g2h(psi[sig])
                    - 0.5 * params.K * (g4h(pm + psi[sig]) + g4h(psi[sig] - pm))
                    + 0.5 * params.K * (g4h(pp + psi[sig]) + g4h(psi[sig] - pp)))
    return out


def reduced_field_ref(psi, params):
    """Lift-and-difference reduction of the literal field."""
    M, N = params.M, params.N
    psi = np.asarray(psi, dtype=float).reshape(M, N - 1)
    th = np.zeros((M, N))
    th[:, 1:] = psi
    X = full_field_ref(th.ravel(), params).reshape(M, N)
    return (X[:, 1:] - X[:, :1]).ravel()
