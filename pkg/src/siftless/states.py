"""Probability structure of the m-state protocol in the residue basis.

An n-photon pulse polarized along x*theta_m (theta_m = 2*pi/m) decomposes,
after grouping Fock terms by Hamming weight w modulo m, into m orthogonal
components whose squared amplitudes are the probabilities of a
Binomial(n, 1/2) draw falling in residue class w mod m.  Everything Eve
can see of such pulses therefore lives in an m-dimensional space, and this
module builds the objects defined there:

* ``residue_binomial_weights``  -- the residue-class probabilities q[w],
* ``conditional_probability``   -- Bob's outcome distribution P(y|x),
* ``mutual_information``        -- I(X:Y) between Alice and Bob in bits,
* ``shifted_diagonal_matrix``   -- the off-diagonal building blocks M_D,
* ``eve_unconditional_state`` / ``eve_conditional_state`` -- Eve's density
  matrices before/after conditioning on Bob's outcome.

Density matrices are plain complex numpy arrays (Hermitian, unit trace);
all functions are pure and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProtocolParams",
    "ConditionalDistribution",
    "residue_binomial_weights",
    "conditional_probability",
    "conditional_distribution",
    "mutual_information",
    "shifted_diagonal_matrix",
    "eve_unconditional_state",
    "eve_conditional_state",
]


@dataclass(frozen=True)
class ProtocolParams:
    """Parameters of one protocol instance.

    Attributes
    ----------
    m : int
        Number of polarization states, at least 3.
    mu : float
        Mean photon number of the weak coherent pulses.
    transmission : float
        Channel power transmission T in [0, 1].
    """

    m: int
    mu: float
    transmission: float

    def __post_init__(self):
        if self.m < 3 or int(self.m) != self.m:
            raise ValueError(f"m must be an integer >= 3, got {self.m}")
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if not 0.0 <= self.transmission <= 1.0:
            raise ValueError(f"transmission must lie in [0, 1], got {self.transmission}")

    @property
    def theta(self) -> float:
        """Angular spacing 2*pi/m between neighbouring states."""
        return 2.0 * math.pi / self.m


@dataclass(frozen=True)
class ConditionalDistribution:
    """Bob's outcome distribution P(y|x) for one (m, visibility) pair.

    ``table[x, y]`` holds P(y|x); rows are normalized and the distribution
    is circulant: P(y|x) depends only on (y - x) mod m.  Visibility
    V = 1 - 2*epsilon, so V = 1 makes the outcome y = x impossible and
    V = 0 makes all outcomes uniform.
    """

    m: int
    visibility: float
    table: np.ndarray

    def row(self, x: int = 0) -> np.ndarray:
        return self.table[x]


def _check_m(m: int):
    if m < 3:
        raise ValueError(f"need at least 3 states, got m={m}")


def residue_binomial_weights(n: int, m: int) -> np.ndarray:
    """Probabilities q[w] of Binomial(n, 1/2) mod m, w = 0..m-1.

    q[w] = 2**-n * sum_d C(n, w + d*m).  For n < m there is no residue
    aliasing and the exact binomial values are used directly, which keeps
    structural zeros (and the IRUD thresholds built on them) exact.  For
    n >= m the sum is evaluated with a roots-of-unity filter,

        q[w] = (1/m) * sum_j Re[ w_m^(-j*w) * ((1 + w_m^j)/2)**n ],

    where w_m = exp(2i*pi/m); the base has modulus <= 1, so the filter
    stays stable for n in the hundreds where 2**-n * C(n, k) would
    under/overflow term by term.
    """
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got n={n}")
    _check_m(m)
    if n < m:
        q = np.zeros(m)
        for w in range(n + 1):
            q[w] = math.ldexp(float(math.comb(n, w)), -n)
        return q
    j = np.arange(m)
    base = (1.0 + np.exp(2j * math.pi * j / m)) / 2.0
    q = np.fft.fft(base**n).real / m
    # rounding can leave ~1e-17 negatives in place of structural zeros
    return np.maximum(q, 0.0)


def conditional_probability(x: int, y: int, m: int, epsilon: float = 0.0) -> float:
    """P(y|x) = (1/m) * (1 - (1 - 2*epsilon) * cos((y - x) * 2*pi/m)).

    epsilon = 0 is the clean channel (outcome y = x impossible);
    epsilon = 1/2 gives uniform outcomes.  epsilon is clamped to [0, 1/2].
    """
    _check_m(m)
    if not (0 <= x < m and 0 <= y < m):
        raise IndexError(f"state/outcome indices must lie in [0, {m - 1}], got x={x}, y={y}")
    v = 1.0 - 2.0 * min(max(epsilon, 0.0), 0.5)
    p = (1.0 - v * math.cos((y - x) * 2.0 * math.pi / m)) / m
    return max(p, 0.0)


def conditional_distribution(m: int, epsilon: float = 0.0) -> ConditionalDistribution:
    """Full m-by-m table of ``conditional_probability`` values."""
    _check_m(m)
    eps = min(max(epsilon, 0.0), 0.5)
    v = 1.0 - 2.0 * eps
    k = np.arange(m)
    row = np.maximum((1.0 - v * np.cos(2.0 * math.pi * k / m)) / m, 0.0)
    x = np.arange(m)
    table = row[(k[None, :] - x[:, None]) % m]
    return ConditionalDistribution(m=m, visibility=v, table=table)


def mutual_information(m: int, epsilon: float = 0.0) -> float:
    """I(X:Y) in bits for uniform inputs: log2(m) - H(Y|X).

    Decreases from log2(3/2) = 0.5850 bits at m = 3 towards 0.4427 bits in
    the continuous limit; equals exactly 1/2 bit at m = 4.
    """
    row = conditional_distribution(m, epsilon).row(0)
    nz = row[row > 0.0]
    h_cond = float(-np.sum(nz * np.log2(nz)))
    return math.log2(m) - h_cond


def shifted_diagonal_matrix(D: int, m: int, n: int) -> np.ndarray:
    """Shifted diagonal M_D with entries sqrt(q[w] * q[w + D]) at (w, w + D).

    The column index w + D is a literal integer offset and is *not* wrapped
    modulo m; only the binomial symbols inside q are residue-reduced.  D = 0
    gives the diagonal density matrix diag(q); M_D for D != 0 is one of the
    off-diagonal stripes of the pure-state projectors.
    """
    _check_m(m)
    if abs(D) >= m:
        raise ValueError(f"shift must satisfy |D| <= m-1, got D={D} for m={m}")
    q = residue_binomial_weights(n, m)
    out = np.zeros((m, m))
    lo = max(0, -D)
    hi = min(m, m - D)
    for w in range(lo, hi):
        out[w, w + D] = math.sqrt(q[w] * q[w + D])
    return out


def eve_unconditional_state(n: int, m: int) -> np.ndarray:
    """Eve's state for an n-photon pulse averaged over Alice's choice.

    Equals diag(residue_binomial_weights(n, m)): the phase factors
    exp(i*w*x*theta) average to zero off the diagonal.
    """
    return np.diag(residue_binomial_weights(n, m)).astype(complex)


def eve_conditional_state(y: int, n: int, m: int) -> np.ndarray:
    """Eve's n-photon state conditioned on Bob's clean-channel outcome y.

    Mixing the pure-state projectors with weights (1/m)(1 - cos((x-y)theta))
    leaves only four off-diagonal stripes:

        rho_y = M_0 - (e^{-iy*theta}/2) (M_{+1} + M_{1-m})
                    - (e^{+iy*theta}/2) (M_{-1} + M_{m-1}).

    (The sum over x kills every stripe whose literal offset is not
    congruent to +-1 modulo m; the e^{-iy*theta} factor lands on the
    offsets congruent to +1.)  Hermitian with unit trace; its spectrum
    does not depend on y (the states for different y are conjugate by the
    diagonal unitary diag(exp(i*w*y*theta))).
    """
    _check_m(m)
    if not 0 <= y < m:
        raise IndexError(f"outcome index must lie in [0, {m - 1}], got y={y}")
    theta = 2.0 * math.pi / m
    phase = np.exp(-1j * y * theta)
    rho = np.diag(residue_binomial_weights(n, m)).astype(complex)
    rho -= 0.5 * phase * (shifted_diagonal_matrix(1, m, n) + shifted_diagonal_matrix(1 - m, m, n))
    rho -= 0.5 * np.conj(phase) * (shifted_diagonal_matrix(-1, m, n) + shifted_diagonal_matrix(m - 1, m, n))
    return rho
