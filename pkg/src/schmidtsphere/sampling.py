"""Seeded random generators for unitaries, Hamiltonians, states and points."""

from __future__ import annotations

import numpy as np

from .states import BipartiteState, Kind, SchmidtPoint, as_kind, state_of_matrix


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(d1: int, d2: int, rng) -> np.ndarray:
    return (rng.standard_normal((d1, d2)) + 1j * rng.standard_normal((d1, d2))) / np.sqrt(2)


def haar_unitary(d: int, rng) -> np.ndarray:
    """Haar-distributed unitary via QR with the phases of ``diag(R)`` fixed."""
    q, r = np.linalg.qr(ginibre(d, d, rng))
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_hermitian(d: int, rng, scale: float = 1.0) -> np.ndarray:
    g = ginibre(d, d, rng)
    return scale * (g + g.conj().T) / 2


def random_local_unitary(kind, d1: int, d2: int, rng):
    """``(V, W)`` pair; ``W is V`` for indistinguishable kinds."""
    V = haar_unitary(d1, rng)
    if as_kind(kind).indistinguishable:
        return V, V
    return V, haar_unitary(d2, rng)


def random_state(kind, d1: int, d2: int | None, rng) -> BipartiteState:
    d2 = d1 if d2 is None else d2
    return state_of_matrix(kind, ginibre(d1, d2, rng), renormalize=True)


def random_sphere_point(n: int, rng) -> np.ndarray:
    x = rng.standard_normal(n)
    return x / np.linalg.norm(x)


def random_chamber_point(kind, n: int, rng, min_gap: float = 0.0, max_tries: int = 10000) -> SchmidtPoint:
    """Point in the Weyl chamber whose values (and gaps) all exceed ``min_gap``."""
    for _ in range(max_tries):
        x = -np.sort(-np.abs(random_sphere_point(n, rng)))
        gaps = np.append(-np.diff(x), x[-1])
        if gaps.min() > min_gap:
            return SchmidtPoint(x, kind)
    raise RuntimeError(f"no point with gap > {min_gap} found in {max_tries} tries")


def random_coupling(kind, d1: int, d2: int | None, rng, rank: int = 2, scale: float = 1.0):
    """Random non-local drift ``sum_k E_k (x) F_k``."""
    from .fields import CouplingHamiltonian

    kind = as_kind(kind)
    d2 = d1 if (d2 is None or kind.indistinguishable) else d2
    factors = [(random_hermitian(d1, rng, scale), random_hermitian(d2, rng)) for _ in range(rank)]
    return CouplingHamiltonian(kind, factors)


def random_local_coupling(kind, d1: int, d2: int | None, rng, scale: float = 1.0):
    """Random local drift ``E (x) 1 + 1 (x) F`` (symmetrized for identical particles)."""
    from .fields import CouplingHamiltonian

    kind = as_kind(kind)
    d2 = d1 if (d2 is None or kind.indistinguishable) else d2
    E = random_hermitian(d1, rng, scale)
    F = E if kind.indistinguishable else random_hermitian(d2, rng, scale)
    return CouplingHamiltonian(kind, [(E, np.eye(d2)), (np.eye(d1), F)])


__all__ = [
    "Kind",
    "ginibre",
    "haar_unitary",
    "random_chamber_point",
    "random_coupling",
    "random_hermitian",
    "random_local_coupling",
    "random_local_unitary",
    "random_sphere_point",
    "random_state",
    "rng_from",
]
