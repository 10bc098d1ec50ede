"""Independent oracles shared by the unit and acceptance tests.

Everything here is built from first principles (exact integer arithmetic,
explicit state amplitudes, closed-form eigenvalues) so it never shares a
code path with the implementation it checks.
"""

import math
from fractions import Fraction

import numpy as np


def exact_residue_weights(n, m):
    """2**-n * sum_d C(n, w + d*m) via exact integer arithmetic."""
    out = []
    for w in range(m):
        total = sum(math.comb(n, w + d * m) for d in range((n - w) // m + 1)) if w <= n else 0
        out.append(float(Fraction(total, 2**n)))
    return np.array(out)


def state_vector(x, n, m):
    """Residue-basis amplitudes of an n-photon pulse polarized along x."""
    theta = 2.0 * math.pi / m
    q = exact_residue_weights(n, m)
    w = np.arange(m)
    return np.exp(1j * w * x * theta) * np.sqrt(q)


def mixture_state(y, n, m):
    """Brute-force Eve state: outcome-weighted mixture of the pure projectors."""
    theta = 2.0 * math.pi / m
    rho = np.zeros((m, m), dtype=complex)
    for x in range(m):
        weight = (1.0 - math.cos((x - y) * theta)) / m
        vec = state_vector(x, n, m)
        rho += weight * np.outer(vec, vec.conj())
    return rho


def eig2_closed_form(h):
    """Eigenvalues of a 2x2 Hermitian matrix from the quadratic formula."""
    a = h[0, 0].real
    d = h[1, 1].real
    off = abs(h[0, 1])
    mid = 0.5 * (a + d)
    rad = math.sqrt((0.5 * (a - d)) ** 2 + off**2)
    return np.array([mid + rad, mid - rad])


def eig3_closed_form(h):
    """Eigenvalues of a 3x3 Hermitian matrix via the trigonometric cubic formula."""
    p1 = abs(h[0, 1]) ** 2 + abs(h[0, 2]) ** 2 + abs(h[1, 2]) ** 2
    q = (h[0, 0].real + h[1, 1].real + h[2, 2].real) / 3.0
    if p1 == 0.0:
        return np.sort(np.array([h[0, 0].real, h[1, 1].real, h[2, 2].real]))[::-1]
    p2 = sum((h[i, i].real - q) ** 2 for i in range(3)) + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    b = (h - q * np.eye(3)) / p
    det = (
        b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
        - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
        + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
    )
    r = max(-1.0, min(1.0, det.real / 2.0))
    phi = math.acos(r) / 3.0
    big = q + 2.0 * p * math.cos(phi)
    small = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    return np.array([big, 3.0 * q - big - small, small])


def chi34_closed_form():
    """Holevo information for the 3-photon class at m = 4.

    Eve keeps two photons: the unconditional state diag(1/4, 1/2, 1/4, 0)
    has entropy 3/2; the conditional state splits into eigenvalues
    {3/8 +- sqrt(5)/8, 1/4, 0}.
    """
    lam = [3.0 / 8.0 + math.sqrt(5.0) / 8.0, 3.0 / 8.0 - math.sqrt(5.0) / 8.0, 0.25]
    s_cond = -sum(v * math.log2(v) for v in lam)
    return 1.5 - s_cond


def random_plane_unitary(dim, rng, rotations=12):
    """Product of complex plane rotations, an independently built unitary."""
    u = np.eye(dim, dtype=complex)
    for _ in range(rotations):
        i, j = rng.choice(dim, size=2, replace=False)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        phase = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        g = np.eye(dim, dtype=complex)
        g[i, i] = math.cos(theta)
        g[j, j] = math.cos(theta)
        g[i, j] = -math.sin(theta) * np.conj(phase)
        g[j, i] = math.sin(theta) * phase
        u = g @ u
    return u


def random_density_matrix(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def greedy_lp_oracle(m, mu, transmission):
    """Eve's minimum keyrate as a linear program (scipy HiGHS).

    Variables are the blocked and PNS fractions per class; the blocking
    budget is an equality constraint and each class obeys
    p_n >= 1 - b_n / (1 - P_delta).
    """
    from scipy.optimize import linprog

    from siftless.attacks import irud_success_probability, pulse_class_keyrate
    from siftless.strategies import poisson_cutoff, poisson_pmf

    n_max = poisson_cutoff(mu)
    probs = np.array([poisson_pmf(n, mu) for n in range(n_max + 1)])
    p_delta = np.array([irud_success_probability(n, m) for n in range(n_max + 1)])
    keyrates = np.array([0.0] + [pulse_class_keyrate(n, m) for n in range(1, n_max + 1)])

    nv = n_max  # b_1..b_N then p_1..p_N; the vacuum class is fully blocked
    cost = np.concatenate([np.zeros(nv), (probs * keyrates)[1:]])
    a_ub = np.zeros((nv, 2 * nv))
    for i in range(1, n_max + 1):
        a_ub[i - 1, i - 1] = -1.0 / (1.0 - p_delta[i])
        a_ub[i - 1, nv + i - 1] = -1.0
    b_ub = -np.ones(nv)
    a_eq = np.zeros((1, 2 * nv))
    a_eq[0, :nv] = probs[1:]
    b_eq = [math.exp(-transmission * mu) - probs[0]]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0.0, 1.0)] * (2 * nv), method="highs")
    assert res.status == 0, f"LP failed at m={m}, mu={mu}, T={transmission}: {res.message}"
    return float(res.fun)


def random_feasible_keyrates(m, mu, transmission, n_samples, rng):
    """Keyrates of random attack allocations that exactly spend the budget."""
    from siftless.attacks import irud_success_probability, pulse_class_keyrate
    from siftless.strategies import poisson_cutoff, poisson_pmf

    n_max = poisson_cutoff(mu)
    probs = np.array([poisson_pmf(n, mu) for n in range(1, n_max + 1)])
    p_delta = np.array([irud_success_probability(n, m) for n in range(1, n_max + 1)])
    keyrates = np.array([pulse_class_keyrate(n, m) for n in range(1, n_max + 1)])
    budget = math.exp(-transmission * mu) - poisson_pmf(0, mu)

    b = rng.uniform(size=(n_samples, n_max))
    scale = budget / (b @ probs)
    b = np.clip(b * scale[:, None], 0.0, 1.0)
    for _ in range(200):
        deficit = budget - b @ probs
        if np.max(np.abs(deficit)) < 1e-12:
            break
        room = (1.0 - b) @ probs
        adjust = np.where(room > 0.0, deficit / np.where(room > 0, room, 1.0), 0.0)
        b = np.clip(b + (1.0 - b) * adjust[:, None], 0.0, 1.0)
    assert np.max(np.abs(budget - b @ probs)) < 1e-9
    pns = np.clip((1.0 - p_delta - b) / (1.0 - p_delta), 0.0, None)
    return pns @ (probs * keyrates)
