"""Eigenvalue and entropy primitives for small dense Hermitian matrices.

All logarithms are base 2; entropies are in bits.  Matrices are expected
to be Hermitian within 1e-10 and of dimension at most 512; density-matrix
inputs must have unit trace and eigenvalues no lower than -1e-10 (rounding
noise below zero is clamped, anything worse is treated as a construction
bug and raised).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "hermitian_eigenvalues",
    "von_neumann_entropy",
    "binary_entropy",
    "shannon_entropy",
]

HERMITICITY_TOL = 1e-10
EIGENVALUE_CLAMP = -1e-10
TRACE_TOL = 1e-8


def hermitian_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, descending.

    Raises ValueError if the input deviates from Hermiticity by more than
    1e-10 (relative to the largest entry) or exceeds dimension 512.
    """
    h = np.asarray(matrix)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] > 512:
        raise ValueError(f"dimension {h.shape[0]} exceeds the supported 512")
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    defect = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if defect > HERMITICITY_TOL * scale:
        raise ValueError(f"matrix is not Hermitian within tolerance (defect {defect:.3e})")
    ev = np.linalg.eigvalsh(h)
    return ev[::-1].copy()


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -sum(lambda * log2(lambda)) with 0*log(0) := 0, in bits.

    ``rho`` must be a density matrix: trace within 1e-8 of one, positive
    semidefinite up to the -1e-10 rounding window.
    """
    ev = hermitian_eigenvalues(rho)
    trace = float(np.sum(ev))
    if abs(trace - 1.0) > TRACE_TOL:
        raise ValueError(f"trace {trace!r} deviates from 1 by more than {TRACE_TOL}")
    low = float(np.min(ev))
    if low < EIGENVALUE_CLAMP:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {low:.3e})")
    ev = np.clip(ev, 0.0, None)
    nz = ev[ev > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def binary_entropy(p: float) -> float:
    """h(p) = -p*log2(p) - (1-p)*log2(1-p) for p in [0, 1]."""
    if p < 0.0 or p > 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def shannon_entropy(dist) -> float:
    """H(dist) in bits for a probability vector summing to 1 within 1e-9."""
    d = np.asarray(dist, dtype=float)
    if d.size and float(np.min(d)) < 0.0:
        raise ValueError(f"negative probability {float(np.min(d))!r}")
    total = float(np.sum(d))
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total!r}, expected 1")
    nz = d[d > 0.0]
    return float(-np.sum(nz * np.log2(nz)))
