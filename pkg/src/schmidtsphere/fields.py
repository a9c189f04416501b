"""Induced vector fields on the Schmidt sphere, speed limits, stabilization.

For a drift ``H0 = sum_k E_k (x) F_k`` and a local unitary ``V (x) W`` the
singular values move with the real skew matrix

    -H_U = sum_k Im( (V^* E_k V) o (W^* F_k W) )        (Hadamard product)

restricted to the leading ``d_min x d_min`` block.  Identical particles use
``W = V``; fermions pair up rows and columns in ``2 x 2`` blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import ConstraintError, DimensionError, KindError, UnitarityError
from .states import Kind, as_kind, schmidt_dim, weyl_enumerate, _values
from .sampling import haar_unitary, random_local_unitary, rng_from

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10


def _hermitian_defect(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - m.conj().T))


def swap_operator(d: int) -> np.ndarray:
    """Permutation ``|i>|j> -> |j>|i>`` on ``C^d (x) C^d``."""
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


@dataclass(frozen=True, eq=False)
class CouplingHamiltonian:
    """Drift ``H0 = sum_k E_k (x) F_k`` stored as its list of factor pairs.

    For bosonic/fermionic systems a drift that is not swap-symmetric is
    replaced by its symmetrization ``(sum E (x) F + F (x) E) / 2`` unless
    ``symmetrize=False``, in which case it is rejected.
    """

    kind: Kind
    factors: tuple
    symmetrize: bool = True

    def __post_init__(self):
        kind = as_kind(self.kind)
        pairs = []
        for k, (E, F) in enumerate(self.factors):
            E = np.array(E, dtype=complex)
            F = np.array(F, dtype=complex)
            if E.ndim != 2 or E.shape[0] != E.shape[1] or F.ndim != 2 or F.shape[0] != F.shape[1]:
                raise DimensionError(f"factors[{k}] must be square matrices")
            for name, m in (("E", E), ("F", F)):
                defect = _hermitian_defect(m)
                if defect > HERMITIAN_TOL * max(1.0, np.linalg.norm(m)):
                    raise ConstraintError(f"factors[{k}].{name} not Hermitian: defect {defect:.3g}")
            pairs.append(((E + E.conj().T) / 2, (F + F.conj().T) / 2))
        if not pairs:
            raise DimensionError("need at least one factor pair (use zero matrices for H0 = 0)")
        shapes = {(E.shape[0], F.shape[0]) for E, F in pairs}
        if len(shapes) != 1:
            raise DimensionError(f"inconsistent factor dimensions {sorted(shapes)}")
        d1, d2 = shapes.pop()
        if d1 < 2 or d2 < 2:
            raise DimensionError("subsystem dimensions must be >= 2")
        if kind.indistinguishable:
            if d1 != d2:
                raise DimensionError(f"{kind.value} drift needs d1 == d2")
            H = sum(np.kron(E, F) for E, F in pairs)
            S = swap_operator(d1)
            defect = np.linalg.norm(S @ H @ S - H)
            if defect > 1e-10 * max(1.0, np.linalg.norm(H)):
                if not self.symmetrize:
                    raise ConstraintError(f"drift is not swap-symmetric: defect {defect:.3g}")
                pairs = [(E / 2, F) for E, F in pairs] + [(F / 2, E) for E, F in pairs]
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "factors", tuple(pairs))

    @property
    def d1(self) -> int:
        return self.factors[0][0].shape[0]

    @property
    def d2(self) -> int:
        return self.factors[0][1].shape[0]

    @property
    def n(self) -> int:
        return schmidt_dim(self.kind, self.d1, self.d2)

    @property
    def rank(self) -> int:
        return len(self.factors)

    def matrix(self) -> np.ndarray:
        return sum(np.kron(E, F) for E, F in self.factors)

    def local_part(self) -> np.ndarray:
        """Projection of ``H0`` onto ``E (x) 1 + 1 (x) F`` (Hilbert-Schmidt)."""
        d1, d2 = self.d1, self.d2
        H = self.matrix().reshape(d1, d2, d1, d2)
        A = np.einsum("ajbj->ab", H) / d2
        B = np.einsum("iaib->ab", H) / d1
        c = np.trace(A) / d1
        return np.kron(A, np.eye(d2)) + np.kron(np.eye(d1), B) - c * np.eye(d1 * d2)

    def is_local(self, tol: float = 1e-10) -> bool:
        H = self.matrix()
        return bool(np.linalg.norm(H - self.local_part()) <= tol * max(1.0, np.linalg.norm(H)))

    def to_dict(self) -> dict:
        def enc(m):
            return {"re": m.real.tolist(), "im": m.imag.tolist()}

        return {"kind": self.kind.value, "factors": [{"E": enc(E), "F": enc(F)} for E, F in self.factors]}


@dataclass(frozen=True, eq=False)
class InducedField:
    """Skew-symmetric generator ``-H_U`` acting on Schmidt points.

    ``matrix`` is exactly antisymmetrized; ``skew_defect`` records
    ``max |M + M^T|`` of the raw evaluation before that step.
    """

    matrix: np.ndarray
    kind: Kind
    skew_defect: float = 0.0
    raw: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def norm(self) -> float:
        """Spectral norm, i.e. the largest speed on the unit sphere."""
        if self.n == 0:
            return 0.0
        return float(np.linalg.norm(self.matrix, 2))

    def __call__(self, p) -> np.ndarray:
        return self.matrix @ _values(p)


def _check_unitary(U: np.ndarray, name: str):
    U = np.asarray(U, dtype=complex)
    defect = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
    if defect > UNITARY_TOL:
        raise UnitarityError(f"{name} is not unitary: defect {defect:.3g}")
    return U


def _finish(raw: np.ndarray, kind: Kind) -> InducedField:
    defect = float(np.max(np.abs(raw + raw.T))) if raw.size else 0.0
    return InducedField((raw - raw.T) / 2, kind, defect, raw)


def induced_field_dist(H0: CouplingHamiltonian, V, W, check: bool = True) -> InducedField:
    """Field of a distinguishable system under ``V (x) W``."""
    if H0.kind is not Kind.DISTINGUISHABLE:
        raise KindError("induced_field_dist needs a distinguishable drift")
    if check:
        V = _check_unitary(V, "V")
        W = _check_unitary(W, "W")
    m = min(H0.d1, H0.d2)
    raw = np.zeros((m, m))
    Vh, Wh = V.conj().T, W.conj().T
    for E, F in H0.factors:
        A = (Vh @ E @ V)[:m, :m]
        B = (Wh @ F @ W)[:m, :m]
        raw += np.imag(A * B)
    return _finish(raw, Kind.DISTINGUISHABLE)


def induced_field_bos(H0: CouplingHamiltonian, V, check: bool = True) -> InducedField:
    """Field of a bosonic system under ``V (x) V``."""
    if H0.kind is not Kind.BOSONIC:
        raise KindError("induced_field_bos needs a bosonic drift")
    if check:
        V = _check_unitary(V, "V")
    raw = np.zeros((H0.d1, H0.d1))
    Vh = V.conj().T
    for E, F in H0.factors:
        raw += np.imag((Vh @ E @ V) * (Vh @ F @ V))
    return _finish(raw, Kind.BOSONIC)


def induced_field_ferm(H0: CouplingHamiltonian, V, check: bool = True) -> InducedField:
    """Field of a fermionic system under ``V (x) V`` on the paired values ``xi``.

    Entry ``(i, j)`` is ``Im(A[2i,2j] B[2i+1,2j+1] - A[2i,2j+1] B[2i+1,2j])``
    summed over factors, with ``A = V^* E V`` and ``B = V^* F V``.
    """
    if H0.kind is not Kind.FERMIONIC:
        raise KindError("induced_field_ferm needs a fermionic drift")
    if check:
        V = _check_unitary(V, "V")
    n = H0.d1 // 2
    odd = 2 * np.arange(n)
    even = odd + 1
    raw = np.zeros((n, n))
    Vh = V.conj().T
    for E, F in H0.factors:
        A = Vh @ E @ V
        B = Vh @ F @ V
        raw += np.imag(A[np.ix_(odd, odd)] * B[np.ix_(even, even)] - A[np.ix_(odd, even)] * B[np.ix_(even, odd)])
    return _finish(raw, Kind.FERMIONIC)


def unitary_pair(U):
    """Normalize ``V``, ``(V,)`` or ``(V, W)`` into a ``(V, W)`` pair."""
    if isinstance(U, (tuple, list)):
        if len(U) == 1:
            return np.asarray(U[0]), np.asarray(U[0])
        V, W = U
        return np.asarray(V), np.asarray(V if W is None else W)
    return np.asarray(U), np.asarray(U)


def induced_field(H0: CouplingHamiltonian, U, check: bool = True) -> InducedField:
    """Dispatch on ``H0.kind``; ``U`` is ``V`` or ``(V, W)``."""
    V, W = unitary_pair(U)
    if H0.kind is Kind.DISTINGUISHABLE:
        return induced_field_dist(H0, V, W, check)
    if H0.kind is Kind.BOSONIC:
        return induced_field_bos(H0, V, check)
    return induced_field_ferm(H0, V, check)


def speed_limit_bound(H0: CouplingHamiltonian) -> float:
    """``sqrt(sum_k ||E_k||_F^2 ||F_k||_F^2)``, an upper bound on every ``||H_U||``."""
    total = sum(np.linalg.norm(E) ** 2 * np.linalg.norm(F) ** 2 for E, F in H0.factors)
    return math.sqrt(total)


def weyl_average(H0: CouplingHamiltonian, U) -> np.ndarray:
    """``(1/|W|) sum_w w H_U w^{-1}`` over the full Weyl group (``n <= 6``)."""
    M = induced_field(H0, U).matrix
    group = weyl_enumerate(M.shape[0])
    acc = np.zeros_like(M)
    for w in group:
        P = w.matrix
        acc += P @ M @ P.T
    return acc / len(group)


# -- strong stabilization ----------------------------------------------------


@dataclass
class StabilizationResult:
    """Best local unitary found and the residual ``||H_U sigma||``."""

    V: np.ndarray
    W: np.ndarray
    residual: float
    method: str
    field_norm: float


def _commuting(mats, tol=1e-10) -> bool:
    scale = max(1.0, max(np.linalg.norm(m) for m in mats))
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if np.linalg.norm(mats[i] @ mats[j] - mats[j] @ mats[i]) > tol * scale**2:
                return False
    return True


def simultaneous_eigenbasis(mats, rng=None, tries: int = 8) -> np.ndarray:
    """Unitary diagonalizing a commuting family of Hermitian matrices."""
    rng = rng_from(rng)
    d = mats[0].shape[0]
    scale = max(1.0, max(np.linalg.norm(m) for m in mats))
    best, best_off = None, np.inf
    for _ in range(tries):
        c = rng.standard_normal(len(mats))
        _, P = np.linalg.eigh(sum(ci * m for ci, m in zip(c, mats)))
        off = max(np.linalg.norm(P.conj().T @ m @ P - np.diag(np.diagonal(P.conj().T @ m @ P))) for m in mats)
        if off < best_off:
            best, best_off = P, off
        if off <= 1e-12 * scale:
            break
    return best if best is not None else np.eye(d)


def _local_step(V, G):
    return V @ expm(1j * G)


def _hermitian_basis(d: int) -> list[np.ndarray]:
    basis = []
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1
        basis.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = m[j, i] = 1 / np.sqrt(2)
            basis.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[i, j], m[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis.append(m)
    return basis


def strong_stab_search(
    H0: CouplingHamiltonian,
    sigma,
    samples: int = 16,
    iterations: int = 200,
    seed=0,
    tol: float = 1e-12,
) -> StabilizationResult:
    """Search a local unitary with ``H_U sigma = 0``.

    If all ``E_k`` (or all ``F_k``) commute, their common eigenbasis makes the
    field vanish identically.  Otherwise ``samples`` random restarts each run
    ``iterations`` geodesic gradient steps on ``||H_U sigma||^2`` with
    finite-difference gradients, and the best point is returned.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = rng_from(seed)
    sigma = _values(sigma)
    kind, d1, d2 = H0.kind, H0.d1, H0.d2
    Es = [E for E, _ in H0.factors]
    Fs = [F for _, F in H0.factors]

    def result(V, W, method):
        f = induced_field(H0, (V, W))
        return StabilizationResult(V, W, float(np.linalg.norm(f(sigma))), method, f.norm())

    if _commuting(Es):
        P = simultaneous_eigenbasis(Es, rng)
        return result(P, P if kind.indistinguishable else np.eye(d2, dtype=complex), "commuting-E")
    if _commuting(Fs):
        P = simultaneous_eigenbasis(Fs, rng)
        return result(P if kind.indistinguishable else np.eye(d1, dtype=complex), P, "commuting-F")

    def objective(V, W):
        r = induced_field(H0, (V, W), check=False)(sigma)
        return float(r @ r)

    basis_v = _hermitian_basis(d1)
    basis_w = [] if kind.indistinguishable else _hermitian_basis(d2)
    h = 1e-6
    best = None
    for _ in range(samples):
        V, W = random_local_unitary(kind, d1, d2, rng)
        f = objective(V, W)
        step = 0.5
        for _ in range(iterations):
            if f <= tol**2:
                break
            gv = np.array([(objective(_local_step(V, h * b), _local_step(W, h * b) if kind.indistinguishable else W)
                            - objective(_local_step(V, -h * b), _local_step(W, -h * b) if kind.indistinguishable else W))
                           / (2 * h) for b in basis_v])
            gw = np.array([(objective(V, _local_step(W, h * b)) - objective(V, _local_step(W, -h * b))) / (2 * h)
                           for b in basis_w])
            Gv = sum(g * b for g, b in zip(gv, basis_v))
            Gw = sum(g * b for g, b in zip(gw, basis_w)) if basis_w else None
            gnorm2 = float(gv @ gv + (gw @ gw if basis_w else 0.0))
            if gnorm2 == 0:
                break
            # Armijo backtracking along the geodesic
            while step > 1e-12:
                Vn = _local_step(V, -step * Gv)
                Wn = Vn if kind.indistinguishable else (_local_step(W, -step * Gw) if Gw is not None else W)
                fn = objective(Vn, Wn)
                if fn <= f - 1e-4 * step * gnorm2:
                    V, W, f = Vn, Wn, fn
                    step = min(step * 2, 4.0)
                    break
                step /= 2
            else:
                break
        if best is None or f < best[2]:
            best = (V, W, f)
    return result(best[0], best[1], "search")


__all__ = [
    "CouplingHamiltonian",
    "InducedField",
    "StabilizationResult",
    "haar_unitary",
    "induced_field",
    "induced_field_bos",
    "induced_field_dist",
    "induced_field_ferm",
    "simultaneous_eigenbasis",
    "speed_limit_bound",
    "strong_stab_search",
    "swap_operator",
    "unitary_pair",
    "weyl_average",
]
