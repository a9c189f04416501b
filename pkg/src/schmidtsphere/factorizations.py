"""Complex SVD, Autonne-Takagi and Hua factorizations, and regularity tests.

Takagi and Hua are both built on top of a plain SVD ``psi = U S W^*``.
For symmetric (skew) ``psi`` the column blocks belonging to one cluster of
equal singular values satisfy ``conj(W_c) = U_c Q_c`` with ``Q_c`` unitary
and symmetric (skew).  Factoring ``Q_c`` fixes the phases clusterwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, InputError
from .states import DEFAULT_TOL, _values

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _as_finite_matrix(psi) -> np.ndarray:
    psi = np.asarray(getattr(psi, "coeffs", psi), dtype=complex)
    if psi.ndim != 2:
        raise InputError("expected a matrix")
    if not np.all(np.isfinite(psi)):
        raise InputError("matrix has non-finite entries")
    return psi


def rect_diag(sigma, d1: int, d2: int) -> np.ndarray:
    out = np.zeros((d1, d2))
    k = len(sigma)
    out[np.arange(k), np.arange(k)] = sigma
    return out


def quasi_diag(xi, d: int) -> np.ndarray:
    """Real skew matrix with blocks ``xi_i * J`` (no normalization factor)."""
    out = np.zeros((d, d))
    for i, x in enumerate(_values(xi)):
        out[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = x * J2
    return out


def complex_svd(psi):
    """Return ``(V, sigma, W)`` with ``V @ psi @ W.conj().T`` real diagonal.

    ``sigma`` is non-negative and non-increasing, ``V`` and ``W`` are square
    unitaries, and ``psi == V^* diag(sigma) W``.
    """
    psi = _as_finite_matrix(psi)
    U, s, Vh = np.linalg.svd(psi)
    return U.conj().T, s, Vh


def _clusters(s: np.ndarray, tol: float) -> list[list[int]]:
    """Group sorted values into runs whose consecutive gaps are below ``tol``."""
    groups = [[0]] if s.size else []
    for i in range(1, s.size):
        if s[i - 1] - s[i] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _polar(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def _symmetric_unitary_root(Q: np.ndarray) -> np.ndarray:
    """Unitary ``R`` with ``R @ R.T == Q`` for symmetric unitary ``Q``.

    ``Re Q`` and ``Im Q`` are commuting real symmetric matrices; a common real
    orthogonal eigenbasis ``O`` gives ``Q = O diag(e^{i t}) O^T``.
    """
    m = Q.shape[0]
    if m == 1:
        return np.sqrt(Q / abs(Q[0, 0]))
    Q = _polar((Q + Q.T) / 2)
    A = (Q.real + Q.real.T) / 2
    B = (Q.imag + Q.imag.T) / 2
    a, O = np.linalg.eigh(A)
    for idx in _clusters(a[::-1], 1e-7):
        cols = m - 1 - np.array(idx)
        if cols.size > 1:
            Ob = O[:, cols]
            _, rot = np.linalg.eigh(Ob.T @ B @ Ob)
            O[:, cols] = Ob @ rot
    phases = np.angle(np.diagonal(O.T @ Q @ O))
    return O * np.exp(0.5j * phases)


def _skew_unitary_root(M: np.ndarray) -> np.ndarray:
    """Unitary ``R`` with ``R @ K @ R.T == M`` for skew unitary ``M``, ``K = J (+) J ...``.

    ``x -> M conj(x)`` is antiunitary and squares to ``-1``, so it pairs every
    unit vector ``r`` with the orthogonal partner ``-M conj(r)``.
    """
    m = M.shape[0]
    M = _polar((M - M.T) / 2)
    cols: list[np.ndarray] = []
    eye = np.eye(m, dtype=complex)
    for _ in range(m // 2):
        if cols:
            B = np.column_stack(cols)
            P = eye - B @ B.conj().T
        else:
            P = eye
        j = int(np.argmax(np.linalg.norm(P, axis=0)))
        x = P[:, j] / np.linalg.norm(P[:, j])
        y = -M @ x.conj()
        if cols:
            y = y - B @ (B.conj().T @ y)
        y = y - x * np.vdot(x, y)
        cols += [x, y / np.linalg.norm(y)]
    return np.column_stack(cols)


def _check_structure(psi, sign: int, tol: float, name: str):
    defect = np.linalg.norm(psi - sign * psi.T)
    if defect > tol * max(1.0, np.linalg.norm(psi)):
        raise ConstraintError(f"{name} requires a {'skew-' if sign < 0 else ''}symmetric matrix: defect {defect:.3g}")


def takagi(psi, tol: float = DEFAULT_TOL, cluster_tol: float = 1e-8):
    """Autonne-Takagi factorization of a complex symmetric matrix.

    Returns ``(V, sigma)`` with ``V`` unitary and ``V @ psi @ V.T ==
    diag(sigma)``, ``sigma`` the singular values in non-increasing order.
    Singular values closer than ``cluster_tol * ||psi||`` are treated as one
    degenerate cluster.
    """
    psi = _as_finite_matrix(psi)
    _check_structure(psi, 1, tol, "takagi")
    U, s, Vh = np.linalg.svd(psi)
    Wc = Vh.T  # conj(W) with W = Vh^*
    scale = max(np.linalg.norm(psi), np.finfo(float).tiny)
    T = np.array(U)
    for idx in _clusters(s, cluster_tol * scale):
        if s[idx[0]] <= cluster_tol * scale:
            continue
        Q = U[:, idx].conj().T @ Wc[:, idx]
        T[:, idx] = U[:, idx] @ _symmetric_unitary_root(Q)
    return T.conj().T, s


def hua(psi, tol: float = DEFAULT_TOL, cluster_tol: float = 1e-8):
    """Hua factorization of a complex skew-symmetric matrix.

    Returns ``(V, xi)`` with ``V @ psi @ V.T`` real quasi-diagonal with
    blocks ``xi_i * [[0, 1], [-1, 0]]`` (a trailing zero for odd size);
    ``xi`` has ``d // 2`` entries in non-increasing order.
    """
    psi = _as_finite_matrix(psi)
    _check_structure(psi, -1, tol, "hua")
    d = psi.shape[0]
    U, s, Vh = np.linalg.svd(psi)
    Wc = Vh.T
    scale = max(np.linalg.norm(psi), np.finfo(float).tiny)
    T = np.array(U)
    xi = []
    for idx in _clusters(s, cluster_tol * scale):
        vals = s[idx]
        if vals.min() <= cluster_tol * scale:
            # kernel (and numerically-zero pairs) go last, any basis works
            xi.extend([0.0] * (len(idx) // 2))
            continue
        if len(idx) % 2:
            raise ConstraintError("singular values of a skew matrix must pair up; increase cluster_tol")
        M = -(U[:, idx].conj().T @ Wc[:, idx])
        T[:, idx] = U[:, idx] @ _skew_unitary_root(M)
        xi.extend(vals.reshape(-1, 2).mean(axis=1))
    xi = np.array(xi[: d // 2], dtype=float)
    return T.conj().T, xi


@dataclass(frozen=True)
class Regularity:
    """Outcome of :func:`regularity`; ``indices`` are 0-based."""

    status: str
    indices: tuple = ()

    @property
    def is_regular(self) -> bool:
        return self.status == "regular"

    def __str__(self):
        if self.is_regular:
            return "regular"
        return f"{self.status}{{{', '.join(str(i) for i in self.indices)}}}"


def regularity(p, eps: float = 1e-8) -> Regularity:
    """Classify a point: values pairwise distinct (up to sign) and nonzero.

    A vanishing value takes precedence over a collision.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    v = np.abs(_values(p))
    zeros = tuple(int(i) for i in np.flatnonzero(v <= eps))
    if zeros:
        return Regularity("singular", zeros)
    colliding = set()
    for i in range(v.size):
        for j in range(i + 1, v.size):
            if abs(v[i] - v[j]) <= eps:
                colliding.update((i, j))
    if colliding:
        return Regularity("degenerate", tuple(sorted(colliding)))
    return Regularity("regular")


def min_gap(p) -> float:
    """Smallest of all values and pairwise gaps (in absolute value)."""
    v = np.abs(_values(p))
    gaps = [v.min()] if v.size else []
    for i in range(v.size):
        for j in range(i + 1, v.size):
            gaps.append(abs(v[i] - v[j]))
    return float(min(gaps)) if gaps else np.inf
