"""Seeded random problem instances for property tests and demos.

Everything takes a numpy Generator so streams are reproducible and can
be derived per test case.
"""

from __future__ import annotations

import numpy as np

from .linalg import dagger, hermitian_part
from .states import StateFamily
from .variational import LocalMeasurement


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(dim: int, rng: np.random.Generator, min_eig: float = 0.05) -> np.ndarray:
    """Full-rank random density matrix with spectrum bounded away from 0."""
    u = haar_unitary(dim, rng)
    raw = rng.random(dim) + min_eig * dim
    lam = raw / raw.sum()
    return hermitian_part((u * lam) @ dagger(u))


def random_traceless_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = hermitian_part(g)
    return h - np.trace(h).real / dim * np.eye(dim)


def random_linear_family(
    dim: int, n: int, rng: np.random.Generator, classical: bool = False
) -> StateFamily:
    """Random full-rank linear family at x = 0.

    With ``classical`` both the state and all generators are diagonal in
    the computational basis, so every logarithmic derivative commutes.
    """
    if classical:
        raw = rng.random(dim) + 0.3
        rho0 = np.diag(raw / raw.sum()).astype(np.complex128)
        gens = []
        for _ in range(n):
            v = rng.standard_normal(dim)
            v -= v.mean()
            gens.append(np.diag(v).astype(np.complex128))
    else:
        rho0 = random_density(dim, rng)
        gens = [random_traceless_hermitian(dim, rng) for _ in range(n)]
    return StateFamily.linear(rho0, gens)


def random_povm(dim: int, rng: np.random.Generator, rank_one: int | None = None) -> list[np.ndarray]:
    """Random POVM: weighted rank-1 pieces on distinct Haar unitary columns
    plus the completing element (PSD since every weight is < 1)."""
    rank_one = dim if rank_one is None else min(rank_one, dim)
    u = haar_unitary(dim, rng)
    weights = rng.uniform(0.2, 0.9, size=rank_one)
    elements = []
    total = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(rank_one):
        col = u[:, i]
        m = weights[i] * np.outer(col, np.conj(col))
        elements.append(m)
        total += m
    elements.append(hermitian_part(np.eye(dim) - total))
    return elements


def random_measurement(
    dim: int, n: int, rng: np.random.Generator, rank_one: int | None = None
) -> LocalMeasurement:
    """Random POVM with Gaussian per-outcome estimate vectors."""
    elements = random_povm(dim, rng, rank_one)
    estimates = rng.standard_normal((len(elements), n))
    return LocalMeasurement(elements=tuple(elements), estimates=estimates)
