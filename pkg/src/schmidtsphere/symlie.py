"""Embeddings of the state spaces into symmetric Lie algebras AIII, CI and DIII.

Matrix realizations (``g = k + p``):

* AIII: ``p`` = Hermitian ``[[0, psi], [psi^*, 0]]``, ``k`` = traceless
  block-diagonal skew-Hermitian matrices; local unitaries act through
  ``K = diag(e^{i phi} V, e^{i phi} conj(W))``.
* CI: real ``2d x 2d``; ``p`` = ``[[C, D], [D, -C]]`` with ``C, D`` symmetric,
  ``k`` = ``[[A, B], [-B, A]]`` with ``A`` antisymmetric, ``B`` symmetric;
  ``V`` acts through ``[[Re V, Im V], [-Im V, Re V]]``.
* DIII: ``p`` = ``[[0, psi], [psi^*, 0]]`` with ``psi`` skew, ``k`` =
  ``diag(X, conj(X))`` with ``X`` skew-Hermitian; ``V`` acts through
  ``diag(V, conj(V))``.

The trace form ``<X, Y> = tr(XY) / 2`` on ``p`` matches ``Re tr(psi^* phi)``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .errors import KindError
from .fields import CouplingHamiltonian, induced_field
from .sampling import haar_unitary, random_coupling, random_hermitian, random_state, rng_from
from .states import Kind, as_kind, embed, schmidt_dim

LIE_TYPE = {Kind.DISTINGUISHABLE: "AIII", Kind.BOSONIC: "CI", Kind.FERMIONIC: "DIII"}


def _coeffs(state, kind: Kind | None = None):
    if hasattr(state, "coeffs"):
        if kind is not None and state.kind is not kind:
            raise KindError(f"expected a {kind.value} state, got {state.kind.value}")
        return np.asarray(state.coeffs)
    return np.asarray(state, dtype=complex)


def _offdiag(psi: np.ndarray) -> np.ndarray:
    d1, d2 = psi.shape
    out = np.zeros((d1 + d2, d1 + d2), dtype=complex)
    out[:d1, d1:] = psi
    out[d1:, :d1] = psi.conj().T
    return out


def trace_form(X, Y) -> float:
    return float(np.real(np.trace(X @ Y)) / 2)


def _ad(K: np.ndarray, X: np.ndarray) -> np.ndarray:
    return K @ X @ np.linalg.inv(K) if np.isrealobj(K) else K @ X @ K.conj().T


# -- AIII -------------------------------------------------------------------------


def embed_aiii(state) -> np.ndarray:
    return _offdiag(_coeffs(state, Kind.DISTINGUISHABLE))


def unembed_aiii(X: np.ndarray, d1: int) -> np.ndarray:
    return np.array(X[:d1, d1:])


def aiii_phase(V, W) -> float:
    """Principal ``phi`` with ``e^{i phi (d1 + d2)} = det W / det V``."""
    d1, d2 = V.shape[0], W.shape[0]
    return float(np.angle(np.linalg.det(W) / np.linalg.det(V)) / (d1 + d2))


def embed_aiii_group(V, W) -> np.ndarray:
    """``K = diag(e^{i phi} V, e^{i phi} conj(W))`` in ``S(U(d1) x U(d2))``."""
    V = np.asarray(V, dtype=complex)
    W = np.asarray(W, dtype=complex)
    ph = np.exp(1j * aiii_phase(V, W))
    d1, d2 = V.shape[0], W.shape[0]
    K = np.zeros((d1 + d2, d1 + d2), dtype=complex)
    K[:d1, :d1] = ph * V
    K[d1:, d1:] = ph * W.conj()
    return K


def embed_aiii_algebra(E, F) -> np.ndarray:
    """``diag(iE, conj(iF))`` shifted by a multiple of ``i 1`` to be traceless."""
    E = np.asarray(E, dtype=complex)
    F = np.asarray(F, dtype=complex)
    d1, d2 = E.shape[0], F.shape[0]
    k = np.zeros((d1 + d2, d1 + d2), dtype=complex)
    k[:d1, :d1] = 1j * E
    k[d1:, d1:] = np.conj(1j * F)
    return k - np.trace(k) / (d1 + d2) * np.eye(d1 + d2)


def compat_check_aiii(V, W, state) -> float:
    psi = _coeffs(state)
    lhs = _ad(embed_aiii_group(V, W), _offdiag(psi))
    return float(np.linalg.norm(lhs - _offdiag(V @ psi @ np.asarray(W).T)))


def in_k_aiii(X: np.ndarray, d1: int) -> float:
    off = np.linalg.norm(X[:d1, d1:]) + np.linalg.norm(X[d1:, :d1])
    return float(off + np.linalg.norm(X + X.conj().T) + abs(np.trace(X)))


def in_p_aiii(X: np.ndarray, d1: int) -> float:
    diag = np.linalg.norm(X[:d1, :d1]) + np.linalg.norm(X[d1:, d1:])
    return float(diag + np.linalg.norm(X - X.conj().T))


# -- CI ---------------------------------------------------------------------------


def embed_ci(state) -> np.ndarray:
    psi = _coeffs(state, Kind.BOSONIC)
    return np.block([[psi.real, -psi.imag], [-psi.imag, -psi.real]])


def unembed_ci(X: np.ndarray) -> np.ndarray:
    d = X.shape[0] // 2
    return X[:d, :d] - 1j * X[:d, d:]


def embed_ci_group(V) -> np.ndarray:
    V = np.asarray(V, dtype=complex)
    return np.block([[V.real, V.imag], [-V.imag, V.real]])


def embed_ci_algebra(E) -> np.ndarray:
    k = 1j * np.asarray(E, dtype=complex)
    return np.block([[k.real, k.imag], [-k.imag, k.real]])


def compat_check_ci(V, state) -> float:
    psi = _coeffs(state)
    V = np.asarray(V)
    lhs = _ad(embed_ci_group(V), embed_ci(psi))
    return float(np.linalg.norm(lhs - embed_ci(V @ psi @ V.T)))


def in_k_ci(X: np.ndarray) -> float:
    d = X.shape[0] // 2
    A, B, C, D = X[:d, :d], X[:d, d:], X[d:, :d], X[d:, d:]
    return float(np.linalg.norm(np.imag(X)) + np.linalg.norm(A - D) + np.linalg.norm(B + C)
                 + np.linalg.norm(A + A.T) + np.linalg.norm(B - B.T))


def in_p_ci(X: np.ndarray) -> float:
    d = X.shape[0] // 2
    A, B, C, D = X[:d, :d], X[:d, d:], X[d:, :d], X[d:, d:]
    return float(np.linalg.norm(np.imag(X)) + np.linalg.norm(A + D) + np.linalg.norm(B - C)
                 + np.linalg.norm(A - A.T) + np.linalg.norm(B - B.T))


# -- DIII -------------------------------------------------------------------------


def embed_diii(state) -> np.ndarray:
    return _offdiag(_coeffs(state, Kind.FERMIONIC))


def embed_diii_group(V) -> np.ndarray:
    V = np.asarray(V, dtype=complex)
    d = V.shape[0]
    K = np.zeros((2 * d, 2 * d), dtype=complex)
    K[:d, :d] = V
    K[d:, d:] = V.conj()
    return K


def embed_diii_algebra(E) -> np.ndarray:
    k = 1j * np.asarray(E, dtype=complex)
    d = k.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, :d] = k
    out[d:, d:] = k.conj()
    return out


def compat_check_diii(V, state) -> float:
    psi = _coeffs(state)
    V = np.asarray(V)
    lhs = _ad(embed_diii_group(V), _offdiag(psi))
    return float(np.linalg.norm(lhs - _offdiag(V @ psi @ V.T)))


def in_k_diii(X: np.ndarray) -> float:
    d = X.shape[0] // 2
    return float(np.linalg.norm(X[:d, d:]) + np.linalg.norm(X[d:, :d])
                 + np.linalg.norm(X[d:, d:] - X[:d, :d].conj()) + np.linalg.norm(X + X.conj().T))


def in_p_diii(X: np.ndarray) -> float:
    d = X.shape[0] // 2
    psi = X[:d, d:]
    return float(np.linalg.norm(X[:d, :d]) + np.linalg.norm(X[d:, d:])
                 + np.linalg.norm(X - X.conj().T) + np.linalg.norm(psi + psi.T))


# -- kind dispatch ------------------------------------------------------------------


def embed_state(state, kind=None) -> np.ndarray:
    kind = as_kind(kind if kind is not None else state.kind)
    if kind is Kind.DISTINGUISHABLE:
        return _offdiag(_coeffs(state))
    if kind is Kind.BOSONIC:
        psi = _coeffs(state)
        return np.block([[psi.real, -psi.imag], [-psi.imag, -psi.real]])
    return _offdiag(_coeffs(state))


def unembed_state(X: np.ndarray, kind, d1: int) -> np.ndarray:
    kind = as_kind(kind)
    if kind is Kind.BOSONIC:
        return unembed_ci(X)
    return unembed_aiii(X, d1)


def embed_group(kind, V, W=None) -> np.ndarray:
    kind = as_kind(kind)
    if kind is Kind.DISTINGUISHABLE:
        return embed_aiii_group(V, V if W is None else W)
    if kind is Kind.BOSONIC:
        return embed_ci_group(V)
    return embed_diii_group(V)


def embed_algebra(kind, E, F=None) -> np.ndarray:
    kind = as_kind(kind)
    if kind is Kind.DISTINGUISHABLE:
        return embed_aiii_algebra(E, E if F is None else F)
    if kind is Kind.BOSONIC:
        return embed_ci_algebra(E)
    return embed_diii_algebra(E)


def in_k(X, kind, d1: int) -> float:
    kind = as_kind(kind)
    if kind is Kind.DISTINGUISHABLE:
        return in_k_aiii(X, d1)
    return in_k_ci(X) if kind is Kind.BOSONIC else in_k_diii(X)


def in_p(X, kind, d1: int) -> float:
    kind = as_kind(kind)
    if kind is Kind.DISTINGUISHABLE:
        return in_p_aiii(X, d1)
    return in_p_ci(X) if kind is Kind.BOSONIC else in_p_diii(X)


def compat_residual(kind, V, W, psi) -> float:
    kind = as_kind(kind)
    if kind is Kind.DISTINGUISHABLE:
        return compat_check_aiii(V, W, psi)
    if kind is Kind.BOSONIC:
        return compat_check_ci(V, psi)
    return compat_check_diii(V, psi)


def infinitesimal_compat(kind, E, F, psi, h: float = 1e-5) -> tuple[float, float]:
    """Residuals of ``j_*(iH) i(psi) = i(iH psi)``: exact bracket and central difference."""
    kind = as_kind(kind)
    psi = np.asarray(psi, dtype=complex)
    F = E if kind.indistinguishable else F
    target = embed_state(1j * (E @ psi + psi @ F.T), kind)
    X = embed_state(psi, kind)
    k = embed_algebra(kind, E, F)
    exact = np.linalg.norm(k @ X - X @ k - target)

    def moved(t):
        V = expm(1j * t * E)
        W = expm(1j * t * F)
        return _ad(embed_group(kind, V, W), X)

    fd = (moved(h) - moved(-h)) / (2 * h)
    return float(exact), float(np.linalg.norm(fd - target))


def _a_basis(kind: Kind, d1: int, d2: int) -> list[np.ndarray]:
    n = schmidt_dim(kind, d1, d2)
    out = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        out.append(embed_state(embed(e, kind, d1, d2), kind))
    return out


def lie_induced_field(H0: CouplingHamiltonian, V, W=None) -> np.ndarray:
    """``-H_U`` assembled in the Lie picture.

    With ``X = -i o (i H0) o i^{-1}`` on ``p`` and ``K`` the group image of the
    local unitary, entry ``(i, j)`` is ``<a_i, Ad_K^{-1} X(Ad_K a_j)>`` where
    ``a_j`` is the embedded ``j``-th (quasi-)diagonal basis point.
    """
    kind = H0.kind
    d1, d2 = H0.d1, H0.d2
    W = V if W is None else W
    K = embed_group(kind, V, W)
    Kinv = np.linalg.inv(K)
    Hm = H0.matrix()

    def X(P):
        psi = unembed_state(P, kind, d1)
        moved = (1j * Hm @ psi.reshape(-1)).reshape(d1, d2)
        return -embed_state(moved, kind)

    basis = _a_basis(kind, d1, d2)
    n = len(basis)
    out = np.zeros((n, n))
    for j, aj in enumerate(basis):
        Y = Kinv @ X(K @ aj @ Kinv) @ K
        for i, ai in enumerate(basis):
            out[i, j] = trace_form(ai, Y)
    return out


def cartan_defects(kind, d1: int, d2: int, rng, trials: int = 10) -> dict:
    """Largest defects of ``[k,k] in k``, ``[k,p] in p``, ``[p,p] in k`` on random elements."""
    kind = as_kind(kind)
    worst = {"kk": 0.0, "kp": 0.0, "pp": 0.0}

    def rand_k():
        E = random_hermitian(d1, rng)
        F = E if kind.indistinguishable else random_hermitian(d2, rng)
        return embed_algebra(kind, E, F)

    def rand_p():
        return embed_state(random_state(kind, d1, d2, rng).coeffs, kind)

    for _ in range(trials):
        k1, k2, p1, p2 = rand_k(), rand_k(), rand_p(), rand_p()
        worst["kk"] = max(worst["kk"], in_k(k1 @ k2 - k2 @ k1, kind, d1))
        worst["kp"] = max(worst["kp"], in_p(k1 @ p1 - p1 @ k1, kind, d1))
        worst["pp"] = max(worst["pp"], in_k(p1 @ p2 - p2 @ p1, kind, d1))
    return worst


def verify_all(kind, d1: int, d2: int | None = None, trials: int = 100, seed=0) -> dict:
    """Run every Lie-picture check; returns ``{name: {"value", "tol", "pass"}}``."""
    kind = as_kind(kind)
    d2 = d1 if (d2 is None or kind.indistinguishable) else d2
    rng = rng_from(seed)
    iso = compat = infin = fd = image = field = 0.0
    abelian = 0.0
    n = schmidt_dim(kind, d1, d2)
    for _ in range(trials):
        psi = random_state(kind, d1, d2, rng).coeffs
        phi = random_state(kind, d1, d2, rng).coeffs
        A, B = embed_state(psi, kind), embed_state(phi, kind)
        iso = max(iso, abs(trace_form(A, B) - float(np.real(np.vdot(psi, phi)))))
        image = max(image, in_p(A, kind, d1))
        V = haar_unitary(d1, rng)
        W = V if kind.indistinguishable else haar_unitary(d2, rng)
        compat = max(compat, compat_residual(kind, V, W, psi))
        E = random_hermitian(d1, rng)
        F = E if kind.indistinguishable else random_hermitian(d2, rng)
        a, b = infinitesimal_compat(kind, E, F, psi)
        infin, fd = max(infin, a), max(fd, b)
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        P, Q = embed_state(embed(x, kind, d1, d2), kind), embed_state(embed(y, kind, d1, d2), kind)
        abelian = max(abelian, float(np.linalg.norm(P @ Q - Q @ P)))
    for _ in range(max(1, trials // 10)):
        H0 = random_coupling(kind, d1, d2, rng)
        V = haar_unitary(d1, rng)
        W = V if kind.indistinguishable else haar_unitary(d2, rng)
        direct = induced_field(H0, (V, W)).matrix
        field = max(field, float(np.max(np.abs(lie_induced_field(H0, V, W) - direct))))
    cart = cartan_defects(kind, d1, d2, rng, max(1, trials // 10))

    def entry(value, tol):
        return {"value": float(value), "tol": tol, "pass": bool(value <= tol)}

    return {
        "type": LIE_TYPE[kind],
        "isometry": entry(iso, 1e-12),
        "image_in_p": entry(image, 1e-12),
        "compatibility": entry(compat, 1e-10),
        "infinitesimal_compatibility": entry(infin, 1e-10),
        "infinitesimal_finite_difference": entry(fd, 1e-6),
        "abelian": entry(abelian, 1e-12),
        "induced_field": entry(field, 1e-10),
        "cartan_kk": entry(cart["kk"], 1e-12),
        "cartan_kp": entry(cart["kp"], 1e-12),
        "cartan_pp": entry(cart["pp"], 1e-12),
    }


__all__ = [
    "LIE_TYPE",
    "aiii_phase",
    "cartan_defects",
    "compat_check_aiii",
    "compat_check_ci",
    "compat_check_diii",
    "compat_residual",
    "embed_aiii",
    "embed_aiii_algebra",
    "embed_aiii_group",
    "embed_algebra",
    "embed_ci",
    "embed_ci_algebra",
    "embed_ci_group",
    "embed_diii",
    "embed_diii_algebra",
    "embed_diii_group",
    "embed_group",
    "embed_state",
    "in_k",
    "in_p",
    "infinitesimal_compat",
    "lie_induced_field",
    "trace_form",
    "unembed_state",
    "verify_all",
]
