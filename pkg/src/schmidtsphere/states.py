"""Bipartite pure states, Schmidt points and the Weyl group.

A state ``|psi> = sum_ij psi_ij |i>|j>`` is stored as its coefficient matrix
``psi`` (shape ``d1 x d2``).  With the Kronecker identification the state
vector is ``psi.reshape(-1)`` (row-major), and a local unitary ``V (x) W``
acts as ``psi -> V @ psi @ W.T``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstraintError,
    DimensionError,
    EnumerationSizeError,
    KindError,
    NormalizationError,
)

DEFAULT_TOL = 1e-10
SQRT2 = math.sqrt(2.0)
MAX_ENUMERABLE = 6


class Kind(str, enum.Enum):
    DISTINGUISHABLE = "distinguishable"
    BOSONIC = "bosonic"
    FERMIONIC = "fermionic"

    @property
    def indistinguishable(self) -> bool:
        return self is not Kind.DISTINGUISHABLE


def as_kind(kind) -> Kind:
    try:
        return Kind(kind)
    except ValueError:
        raise KindError(f"unknown kind {kind!r}") from None


def schmidt_dim(kind, d1: int, d2: int | None = None) -> int:
    """Dimension ``n`` of the Schmidt sphere's ambient space."""
    kind = as_kind(kind)
    d2 = d1 if d2 is None else d2
    if kind is Kind.DISTINGUISHABLE:
        return min(d1, d2)
    if kind is Kind.BOSONIC:
        return d1
    return d1 // 2


def _values(p) -> np.ndarray:
    return np.asarray(getattr(p, "values", p), dtype=float)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Normalized pure state of a bipartite system.

    Use :func:`state_of_matrix` with ``renormalize=True`` to project an
    arbitrary matrix onto the constraint set instead of rejecting it.
    """

    kind: Kind
    coeffs: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        kind = as_kind(self.kind)
        psi = np.array(self.coeffs, dtype=complex)
        if psi.ndim != 2:
            raise DimensionError("coefficient matrix must be 2-dimensional")
        d1, d2 = psi.shape
        if d1 < 2 or d2 < 2:
            raise DimensionError(f"subsystem dimensions must be >= 2, got {psi.shape}")
        if kind.indistinguishable and d1 != d2:
            raise DimensionError(f"{kind.value} states need d1 == d2, got {psi.shape}")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > self.tol:
            raise NormalizationError(f"state norm is {norm!r}, expected 1")
        if kind is Kind.BOSONIC:
            defect = np.linalg.norm(psi - psi.T)
            if defect > self.tol:
                raise ConstraintError(f"bosonic state not symmetric: defect {defect:.3g}")
        elif kind is Kind.FERMIONIC:
            defect = np.linalg.norm(psi + psi.T)
            if defect > self.tol:
                raise ConstraintError(f"fermionic state not skew-symmetric: defect {defect:.3g}")
        psi.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "coeffs", psi)

    @property
    def d1(self) -> int:
        return self.coeffs.shape[0]

    @property
    def d2(self) -> int:
        return self.coeffs.shape[1]

    @property
    def d_min(self) -> int:
        return min(self.coeffs.shape)

    @property
    def n(self) -> int:
        return schmidt_dim(self.kind, self.d1, self.d2)

    @property
    def vector(self) -> np.ndarray:
        """State vector in the Kronecker basis, ``vec(psi.T)``."""
        return self.coeffs.reshape(-1).copy()

    @classmethod
    def from_vector(cls, kind, vec, d1: int, d2: int, **kwargs) -> "BipartiteState":
        return state_of_matrix(kind, np.asarray(vec).reshape(d1, d2), **kwargs)

    def apply_local(self, V, W=None) -> "BipartiteState":
        """Return ``(V (x) W)|psi>``; ``W`` defaults to ``V``."""
        W = V if W is None else W
        if self.kind.indistinguishable and W is not V and not np.allclose(V, W):
            raise KindError("indistinguishable states only admit V (x) V")
        return BipartiteState(self.kind, V @ self.coeffs @ np.asarray(W).T, self.tol)

    def inner(self, other) -> float:
        """Real inner product ``Re <self|other>``."""
        return inner(self.coeffs, getattr(other, "coeffs", other))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "d1": self.d1,
            "d2": self.d2,
            "re": self.coeffs.real.tolist(),
            "im": self.coeffs.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict, **kwargs) -> "BipartiteState":
        psi = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        if psi.shape != (data["d1"], data["d2"]):
            raise DimensionError(f"matrix shape {psi.shape} does not match d1, d2")
        return state_of_matrix(data["kind"], psi, **kwargs)


def inner(psi, phi) -> float:
    return float(np.real(np.vdot(psi, phi)))


def state_of_matrix(kind, psi, renormalize: bool = False, tol: float = DEFAULT_TOL) -> BipartiteState:
    """Build a state from its coefficient matrix.

    In renormalize mode the matrix is (anti)symmetrized according to ``kind``
    and rescaled to unit norm instead of being rejected.
    """
    kind = as_kind(kind)
    psi = np.asarray(psi, dtype=complex)
    if renormalize:
        if kind is Kind.BOSONIC:
            psi = (psi + psi.T) / 2
        elif kind is Kind.FERMIONIC:
            psi = (psi - psi.T) / 2
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise NormalizationError("cannot renormalize the zero matrix")
        psi = psi / norm
    return BipartiteState(kind, psi, tol)


def matrix_of_state(state: BipartiteState) -> np.ndarray:
    return np.array(state.coeffs)


def as_matrix(psi) -> np.ndarray:
    return np.asarray(getattr(psi, "coeffs", psi), dtype=complex)


@dataclass(frozen=True, eq=False)
class SchmidtPoint:
    """Point on the Schmidt sphere (singular values, or paired values ``xi``)."""

    values: np.ndarray
    kind: Kind = Kind.DISTINGUISHABLE
    tol: float = 1e-8

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > self.tol:
            raise NormalizationError(f"Schmidt point norm is {norm!r}, expected 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", as_kind(self.kind))

    @property
    def n(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.values.size


def embed_diag(sigma, d1: int, d2: int | None = None) -> np.ndarray:
    """Matrix with ``sigma`` on the diagonal (the state ``sum_i sigma_i |ii>``)."""
    sigma = _values(sigma)
    d2 = d1 if d2 is None else d2
    if sigma.size != min(d1, d2):
        raise DimensionError(f"need {min(d1, d2)} values for a {d1}x{d2} state, got {sigma.size}")
    out = np.zeros((d1, d2), dtype=complex)
    idx = np.arange(sigma.size)
    out[idx, idx] = sigma
    return out


def embed_qdiag(xi, d: int) -> np.ndarray:
    """Skew matrix with blocks ``xi_i / sqrt(2) * [[0, 1], [-1, 0]]``.

    For odd ``d`` the last row and column are zero.  The ``1/sqrt(2)`` makes
    the map an isometry onto its image.
    """
    xi = _values(xi)
    if xi.size != d // 2:
        raise DimensionError(f"need {d // 2} values for d={d}, got {xi.size}")
    out = np.zeros((d, d), dtype=complex)
    idx = 2 * np.arange(xi.size)
    out[idx, idx + 1] = xi / SQRT2
    out[idx + 1, idx] = -xi / SQRT2
    return out


def embed(p, kind, d1: int, d2: int | None = None) -> np.ndarray:
    """Embed a Schmidt point as its (quasi-)diagonal coefficient matrix."""
    kind = as_kind(kind)
    if kind is Kind.FERMIONIC:
        return embed_qdiag(p, d1)
    return embed_diag(p, d1, d1 if (d2 is None or kind is Kind.BOSONIC) else d2)


def embed_state(p: SchmidtPoint, d1: int, d2: int | None = None) -> BipartiteState:
    """The normalized state ``diag(p)`` / ``qdiag(p)`` for a Schmidt point."""
    kind = getattr(p, "kind", Kind.DISTINGUISHABLE)
    return BipartiteState(kind, embed(p, kind, d1, d2))


def _check_kind(psi, allowed, name):
    kind = getattr(psi, "kind", None)
    if kind is not None and kind not in allowed:
        raise KindError(f"{name} is not defined for {kind.value} states")


def project_sigma(psi) -> np.ndarray:
    """Orthogonal projection onto the real diagonal states, as a vector."""
    _check_kind(psi, (Kind.DISTINGUISHABLE, Kind.BOSONIC), "project_sigma")
    m = as_matrix(psi)
    return np.real(np.diagonal(m)[: min(m.shape)]).copy()


def project_xi(psi) -> np.ndarray:
    """Orthogonal projection onto the real quasi-diagonal states, as a vector."""
    _check_kind(psi, (Kind.FERMIONIC,), "project_xi")
    m = as_matrix(psi)
    idx = 2 * np.arange(m.shape[0] // 2)
    return SQRT2 * np.real(m[idx, idx + 1])


def project(psi, kind) -> np.ndarray:
    if as_kind(kind) is Kind.FERMIONIC:
        return project_xi(psi)
    return project_sigma(psi)


def singular_values(psi, kind) -> np.ndarray:
    """Weyl-chamber representative of a coefficient matrix (not necessarily normalized).

    Fermionic matrices keep one value per +/- pair, scaled by ``sqrt(2)``; the
    structural zero of odd ``d`` is dropped.
    """
    kind = as_kind(kind)
    s = np.linalg.svd(as_matrix(psi), compute_uv=False)
    if kind is Kind.FERMIONIC:
        d = s.size
        pairs = s[: 2 * (d // 2)].reshape(-1, 2)
        s = SQRT2 * pairs.mean(axis=1)
    s = np.abs(s)
    return -np.sort(-s, kind="stable")


def sing_sorted(state: BipartiteState) -> SchmidtPoint:
    """Sorted, non-negative (quasi-)singular values of a state."""
    return SchmidtPoint(singular_values(state.coeffs, state.kind), state.kind)


def weyl_sort(p) -> np.ndarray:
    """Map a point into the Weyl chamber: absolute values, non-increasing."""
    return -np.sort(-np.abs(_values(p)), kind="stable")


@dataclass(frozen=True)
class WeylElement:
    """Signed permutation acting as ``(w x)_i = signs[i] * x[perm[i]]``."""

    perm: tuple
    signs: tuple

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        signs = tuple(int(s) for s in self.signs)
        if sorted(perm) != list(range(len(perm))) or len(signs) != len(perm):
            raise ValueError(f"invalid Weyl element {perm}, {signs}")
        if any(s not in (-1, 1) for s in signs):
            raise ValueError("signs must be +1 or -1")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @property
    def n(self) -> int:
        return len(self.perm)

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[np.arange(self.n), self.perm] = self.signs
        return m

    def __matmul__(self, other: "WeylElement") -> "WeylElement":
        p1, s1 = np.array(self.perm), np.array(self.signs)
        p2, s2 = np.array(other.perm), np.array(other.signs)
        return WeylElement(tuple(p2[p1]), tuple(s1 * s2[p1]))

    def inverse(self) -> "WeylElement":
        inv = np.argsort(self.perm)
        return WeylElement(tuple(inv), tuple(np.array(self.signs)[inv]))

    @classmethod
    def identity(cls, n: int) -> "WeylElement":
        return cls(tuple(range(n)), (1,) * n)


def weyl_act(w: WeylElement, p):
    """Apply a Weyl element to a point; keeps SchmidtPoint-ness of the input."""
    v = _values(p)
    if v.size != w.n:
        raise DimensionError(f"Weyl element of size {w.n} applied to length {v.size}")
    out = np.array(w.signs) * v[list(w.perm)]
    if isinstance(p, SchmidtPoint):
        return SchmidtPoint(out, p.kind)
    return out


def weyl_enumerate(n: int) -> list[WeylElement]:
    """All ``2**n * n!`` signed permutations; only for ``n <= 6``."""
    if n > MAX_ENUMERABLE:
        raise EnumerationSizeError(f"Weyl group of rank {n} too large to enumerate; sample instead")
    return [
        WeylElement(perm, signs)
        for perm in itertools.permutations(range(n))
        for signs in itertools.product((1, -1), repeat=n)
    ]


def weyl_sample(n: int, rng: np.random.Generator) -> WeylElement:
    return WeylElement(tuple(rng.permutation(n)), tuple(rng.choice((-1, 1), size=n)))
