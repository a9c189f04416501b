"""Exact lifts of reduced trajectories to the full Schrodinger equation.

Conventions: a state is a coefficient matrix ``psi`` (vector ``psi.reshape(-1)``),
``V (x) W`` acts as ``V psi W^T`` and the local Hamiltonian ``E (x) 1 + 1 (x) F``
acts as ``E psi + psi F^T``.  The infinitesimal local action at a
(quasi-)diagonal point is

    ad_p(E, F) = -i (E s + s conj(F)),      s = embed(p),

and ``ad_pinv`` is its Moore-Penrose inverse, so ``ad_p(ad_pinv(p, A)) == A``
for every ``A`` in the orthocomplement of the (quasi-)diagonal directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError, DimensionError, KindError, SingularityError
from .factorizations import complex_svd, hua, min_gap, regularity, takagi
from .fields import CouplingHamiltonian, induced_field
from .reduced import ControlSchedule, _segment_grid, integrate_reduced
from .sampling import random_hermitian, rng_from
from .states import (
    SQRT2,
    BipartiteState,
    Kind,
    as_kind,
    embed,
    sing_sorted,
    state_of_matrix,
    weyl_sort,
    _values,
)

HERMITIAN_TOL = 1e-12
CONSTRAINT_TOL = 1e-10
LIFT_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class LocalHamiltonian:
    """``E (x) 1 + 1 (x) F``; identical particles store a single ``E`` (``F = E``)."""

    kind: Kind
    E: np.ndarray
    F: np.ndarray | None = None

    def __post_init__(self):
        kind = as_kind(self.kind)
        E = np.array(self.E, dtype=complex)
        F = E if self.F is None else np.array(self.F, dtype=complex)
        for name, m in (("E", E), ("F", F)):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionError(f"{name} must be square")
            defect = np.linalg.norm(m - m.conj().T)
            if defect > HERMITIAN_TOL * max(1.0, np.linalg.norm(m)):
                raise ConstraintError(f"{name} not Hermitian: defect {defect:.3g}")
        if kind.indistinguishable:
            if E.shape != F.shape or np.linalg.norm(E - F) > HERMITIAN_TOL * max(1.0, np.linalg.norm(E)):
                raise KindError(f"{kind.value} local Hamiltonians need F == E")
            F = E
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "E", (E + E.conj().T) / 2)
        object.__setattr__(self, "F", (F + F.conj().T) / 2)

    @classmethod
    def zero(cls, kind, d1: int, d2: int | None = None) -> "LocalHamiltonian":
        d2 = d1 if d2 is None else d2
        kind = as_kind(kind)
        return cls(kind, np.zeros((d1, d1)), None if kind.indistinguishable else np.zeros((d2, d2)))

    @property
    def d1(self) -> int:
        return self.E.shape[0]

    @property
    def d2(self) -> int:
        return self.F.shape[0]

    def matrix(self) -> np.ndarray:
        return np.kron(self.E, np.eye(self.d2)) + np.kron(np.eye(self.d1), self.F)

    def act(self, psi: np.ndarray) -> np.ndarray:
        """``(E (x) 1 + 1 (x) F) psi`` in matrix form."""
        return self.E @ psi + psi @ self.F.T

    def traceless(self) -> "LocalHamiltonian":
        """Drop the multiple of the identity (a global phase)."""
        E = self.E - np.trace(self.E) / self.d1 * np.eye(self.d1)
        F = self.F - np.trace(self.F) / self.d2 * np.eye(self.d2)
        return LocalHamiltonian(self.kind, E, None if self.kind.indistinguishable else F)

    def conjugate(self, V, W=None) -> "LocalHamiltonian":
        """``(V E V^*, W F W^*)``."""
        V = np.asarray(V)
        W = V if W is None else np.asarray(W)
        E = V @ self.E @ V.conj().T
        if self.kind.indistinguishable:
            return LocalHamiltonian(self.kind, E)
        return LocalHamiltonian(self.kind, E, W @ self.F @ W.conj().T)

    def __add__(self, other: "LocalHamiltonian") -> "LocalHamiltonian":
        if self.kind.indistinguishable:
            return LocalHamiltonian(self.kind, self.E + other.E)
        return LocalHamiltonian(self.kind, self.E + other.E, self.F + other.F)

    def __neg__(self) -> "LocalHamiltonian":
        return LocalHamiltonian(self.kind, -self.E, None if self.kind.indistinguishable else -self.F)

    def norm(self) -> float:
        return float(np.hypot(np.linalg.norm(self.E), np.linalg.norm(self.F)))

    def to_dict(self) -> dict:
        def enc(m):
            return {"re": m.real.tolist(), "im": m.imag.tolist()}

        return {"kind": self.kind.value, "E": enc(self.E), "F": enc(self.F)}


# -- ad and its pseudoinverses ---------------------------------------------------


def ad_apply(p, h: LocalHamiltonian) -> np.ndarray:
    """Tangent matrix ``-i (E s + s conj(F))`` at ``s = embed(p)``."""
    if getattr(p, "kind", h.kind) is not h.kind:
        raise KindError("point and Hamiltonian kinds differ")
    s = embed(p, h.kind, h.d1, h.d2)
    return -1j * (h.E @ s + s @ h.F.conj())


def perp_project(A: np.ndarray, kind) -> np.ndarray:
    """Remove the (quasi-)diagonal real directions from a tangent matrix."""
    kind = as_kind(kind)
    out = np.array(A, dtype=complex)
    if kind is Kind.FERMIONIC:
        for i in range(out.shape[0] // 2):
            a = out[2 * i, 2 * i + 1] - out[2 * i + 1, 2 * i]
            c = a.real / 2
            out[2 * i, 2 * i + 1] -= c
            out[2 * i + 1, 2 * i] += c
    else:
        m = min(out.shape)
        idx = np.arange(m)
        out[idx, idx] = 1j * out[idx, idx].imag
    return out


def _constraint_defect(A: np.ndarray, kind: Kind) -> float:
    return float(np.linalg.norm(A - perp_project(A, kind)))


def _require(p, kind: Kind, eps: float) -> np.ndarray:
    v = _values(p)
    reg = regularity(v, eps)
    if not reg.is_regular:
        raise SingularityError(f"point is not regular: {reg}", gap=min_gap(v), indices=reg.indices)
    return v


def _check_A(A, kind, shape):
    A = np.asarray(A, dtype=complex)
    if A.shape != shape:
        raise DimensionError(f"tangent has shape {A.shape}, expected {shape}")
    defect = _constraint_defect(A, kind)
    if defect > CONSTRAINT_TOL * max(1.0, np.linalg.norm(A)):
        raise ConstraintError(f"tangent has a component along the (quasi-)diagonal: {defect:.3g}")
    return A


def ad_pinv_dist(sigma, A, eps: float = 1e-12) -> LocalHamiltonian:
    """Closed-form inverse of ``ad`` for distinguishable particles.

    ``A`` is ``d1 x d2`` with purely imaginary leading diagonal.  The gauge
    ``E_ii = F_ii`` fixes the identity shift; entries of ``E`` (``F``) with
    both indices past ``d2`` (``d1``) are zero.
    """
    s = _require(sigma, Kind.DISTINGUISHABLE, eps)
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or min(A.shape) != s.size:
        raise DimensionError(f"tangent shape {A.shape} does not fit {s.size} values")
    A = _check_A(A, Kind.DISTINGUISHABLE, A.shape)
    d1, d2 = A.shape
    m = s.size
    e = np.zeros((d1, d1), dtype=complex)  # i E
    f = np.zeros((d2, d2), dtype=complex)  # i F
    sa = A[:m, :m]
    si, sj = s[:, None], s[None, :]
    denom = si**2 - sj**2
    np.fill_diagonal(denom, 1.0)
    e_core = (sj * sa + si * sa.T.conj()) / denom
    f_core = (si * sa.conj() + sj * sa.T) / denom
    diag = -np.diagonal(sa) / (2 * s)
    np.fill_diagonal(e_core, diag)
    np.fill_diagonal(f_core, diag)
    e[:m, :m] = e_core
    f[:m, :m] = f_core
    if d1 > d2:
        # rows past d2: A_ij = -e_ij s_j
        e[m:, :m] = -A[m:, :m] / s[None, :]
        e[:m, m:] = -e[m:, :m].conj().T
    elif d2 > d1:
        # columns past d1: A_ij = s_i conj(f_ij)
        f[:m, m:] = A[:, m:].conj() / s[:, None]
        f[m:, :m] = -f[:m, m:].conj().T
    return LocalHamiltonian(Kind.DISTINGUISHABLE, -1j * e, -1j * f)


def ad_pinv_bos(sigma, A, eps: float = 1e-12) -> LocalHamiltonian:
    """Closed-form inverse of ``ad`` for bosons (``A`` symmetric, imaginary diagonal)."""
    s = _require(sigma, Kind.BOSONIC, eps)
    d = s.size
    A = _check_A(A, Kind.BOSONIC, (d, d))
    si, sj = s[:, None], s[None, :]
    dm = si - sj
    np.fill_diagonal(dm, 1.0)
    E = -A.imag / (si + sj) - 1j * A.real / dm
    np.fill_diagonal(E, 1j * np.diagonal(A) / (2 * s))
    E = (E + E.conj().T) / 2
    return LocalHamiltonian(Kind.BOSONIC, E)


def ad_pinv_ferm(xi, A, eps: float = 1e-12) -> LocalHamiltonian:
    """Closed-form inverse of ``ad`` for fermions.

    ``A`` is skew with purely imaginary quasi-diagonal block coefficients; the
    quasi-diagonal point has blocks ``(xi_i / sqrt 2) J``.  Odd ``d`` adds a
    last row/column built from the neighbouring pair entries.
    """
    x = _require(xi, Kind.FERMIONIC, eps)
    n = x.size
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] // 2 != n:
        raise DimensionError(f"tangent shape {A.shape} does not fit {n} values")
    d = A.shape[0]
    A = _check_A(A, Kind.FERMIONIC, (d, d))
    s = x / SQRT2
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    e = np.zeros((d, d), dtype=complex)  # i E
    for i in range(n):
        bi = slice(2 * i, 2 * i + 2)
        e[bi, bi] = -A[2 * i, 2 * i + 1] / (2 * s[i]) * np.eye(2)
        for j in range(n):
            if j == i:
                continue
            bj = slice(2 * j, 2 * j + 2)
            Aij = A[bi, bj]
            e[bi, bj] = (s[i] * J @ Aij.conj() + s[j] * Aij @ J) / (s[j] ** 2 - s[i] ** 2)
    if d % 2:
        L = d - 1
        for i in range(n):
            e[L, 2 * i] = -A[L, 2 * i + 1] / s[i]
            e[L, 2 * i + 1] = A[L, 2 * i] / s[i]
        e[:L, L] = -e[L, :L].conj()
    E = -1j * e
    return LocalHamiltonian(Kind.FERMIONIC, (E + E.conj().T) / 2)


def ad_pinv(p, A, kind=None, eps: float = 1e-12) -> LocalHamiltonian:
    kind = as_kind(kind if kind is not None else p.kind)
    if kind is Kind.DISTINGUISHABLE:
        return ad_pinv_dist(p, A, eps)
    if kind is Kind.BOSONIC:
        return ad_pinv_bos(p, A, eps)
    return ad_pinv_ferm(p, A, eps)


# -- compensating Hamiltonian ---------------------------------------------------


def _pair(H0: CouplingHamiltonian, U):
    if isinstance(U, (tuple, list)):
        V, W = (U[0], U[0]) if len(U) == 1 else U
    elif hasattr(U, "pair"):
        V, W = U.pair
    else:
        V, W = U, U
    V = np.asarray(V, dtype=complex)
    W = V if W is None else np.asarray(W, dtype=complex)
    if V.shape != (H0.d1, H0.d1) or W.shape != (H0.d2, H0.d2):
        raise DimensionError("local unitary does not match the drift dimensions")
    return V, W


class _FrameDrift:
    """Drift in the frame of a fixed local unitary, ``U^* (i H0) U`` applied to matrices."""

    def __init__(self, H0: CouplingHamiltonian, V, W):
        self.H0, self.V, self.W = H0, V, W
        Vh, Wh = V.conj().T, W.conj().T
        self.factors = [(Vh @ E @ V, Wh @ F @ W) for E, F in H0.factors]

    def G(self, s: np.ndarray) -> np.ndarray:
        return 1j * sum(E @ s @ F.T for E, F in self.factors)

    def compensator(self, p, eps, zero_tol=None) -> LocalHamiltonian:
        kind = self.H0.kind
        s = embed(p, kind, self.H0.d1, self.H0.d2)
        Gp = perp_project(self.G(s), kind)
        v = _values(p)
        if zero_tol is not None and not regularity(v, eps).is_regular:
            scale = max(1.0, sum(np.linalg.norm(E) * np.linalg.norm(F) for E, F in self.factors))
            if np.linalg.norm(Gp) <= zero_tol * scale:
                return LocalHamiltonian.zero(kind, self.H0.d1, self.H0.d2)
        h = ad_pinv(v, Gp, kind, eps)
        return h.conjugate(self.V, self.W)


def compensating_hamiltonian(H0: CouplingHamiltonian, U, sigma, Udot=None, eps: float = 1e-12) -> LocalHamiltonian:
    """Local ``H`` such that ``psi = U|sigma>`` with ``sigma' = -H_U sigma`` solves the full equation.

    ``U`` is ``V`` or ``(V, W)``; ``Udot`` (same shape) adds ``i U' U^{-1}``.
    Raises :class:`SingularityError` at non-regular ``sigma``.
    """
    V, W = _pair(H0, U)
    h = _FrameDrift(H0, V, W).compensator(sigma, eps)
    if Udot is not None:
        Vd, Wd = _pair(H0, Udot)
        extra = LocalHamiltonian(
            H0.kind,
            _herm(1j * Vd @ V.conj().T),
            None if H0.kind.indistinguishable else _herm(1j * Wd @ W.conj().T),
        )
        h = h + extra
    return h


def _herm(m):
    return (m + m.conj().T) / 2


# -- full propagation ------------------------------------------------------------


def _symmetrize(psi: np.ndarray, kind: Kind) -> np.ndarray:
    if kind is Kind.BOSONIC:
        return (psi + psi.T) / 2
    if kind is Kind.FERMIONIC:
        return (psi - psi.T) / 2
    return psi


def _drift_act(H0: CouplingHamiltonian, psi: np.ndarray) -> np.ndarray:
    return sum(E @ psi @ F.T for E, F in H0.factors)


@dataclass(eq=False)
class FullTrajectory:
    times: np.ndarray
    states: np.ndarray
    kind: Kind

    def singular_values(self) -> np.ndarray:
        return np.array([np.asarray(sing_sorted(state_of_matrix(self.kind, psi, renormalize=True))) for psi in self.states])


def _rk4_step(rhs, t, psi, h):
    k1 = rhs(t, psi)
    k2 = rhs(t + h / 2, psi + h / 2 * k1)
    k3 = rhs(t + h / 2, psi + h / 2 * k2)
    k4 = rhs(t + h, psi + h * k3)
    return psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_full(H0: CouplingHamiltonian, local, psi0, T: float, dt: float, symmetry_every: int = 100) -> FullTrajectory:
    """RK4 for ``psi' = -i (H0 + H_loc(t)) psi`` with per-step renormalization.

    ``local`` is ``None``, a :class:`LocalHamiltonian`, or a callable
    ``t -> LocalHamiltonian``.  The symmetry class is re-projected every
    ``symmetry_every`` steps.
    """
    if dt <= 0 or T < 0:
        raise ValueError("need dt > 0 and T >= 0")
    kind = H0.kind
    if isinstance(psi0, BipartiteState):
        if psi0.kind is not kind:
            raise KindError(f"state is {psi0.kind.value}, drift is {kind.value}")
        psi = np.array(psi0.coeffs)
    else:
        psi = np.array(state_of_matrix(kind, psi0).coeffs)
    if psi.shape != (H0.d1, H0.d2):
        raise DimensionError("state does not match the drift dimensions")
    if local is None:
        loc = lambda t: None  # noqa: E731
    elif isinstance(local, LocalHamiltonian):
        loc = lambda t: local  # noqa: E731
    else:
        loc = local

    def rhs(t, x):
        out = _drift_act(H0, x)
        h = loc(t)
        if h is not None:
            out = out + h.act(x)
        return -1j * out

    times = [0.0]
    states = [psi]
    grid = _segment_grid(0.0, T, dt) if T > 0 else []
    prev = 0.0
    for k, t in enumerate(grid, 1):
        psi = _rk4_step(rhs, prev, psi, t - prev)
        if k % symmetry_every == 0:
            psi = _symmetrize(psi, kind)
        psi = psi / np.linalg.norm(psi)
        times.append(float(t))
        states.append(psi)
        prev = t
    return FullTrajectory(np.array(times), np.array(states), kind)


# -- phase handling --------------------------------------------------------------


def phase_distance(psi, phi) -> float:
    """``min_theta ||psi - e^{i theta} phi||``: zero iff the states differ by a global phase."""
    a = np.asarray(getattr(psi, "coeffs", psi)).reshape(-1)
    b = np.asarray(getattr(phi, "coeffs", phi)).reshape(-1)
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def state_distance(psi, phi, phase_insensitive: bool = False) -> float:
    if phase_insensitive:
        return phase_distance(psi, phi)
    a = np.asarray(getattr(psi, "coeffs", psi))
    b = np.asarray(getattr(phi, "coeffs", phi))
    return float(np.linalg.norm(a - b))


# -- equivalence harness ---------------------------------------------------------


@dataclass
class EquivalenceReport:
    max_dev: float
    regular_fraction: float
    dt: float
    T: float
    max_state_dev: float = 0.0
    restarts: int = 0
    points: int = 0
    projection_residual: float | None = None
    phase_insensitive: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "max_dev": self.max_dev,
            "regular_fraction": self.regular_fraction,
            "dt": self.dt,
            "T": self.T,
            "max_state_dev": self.max_state_dev,
            "restarts": self.restarts,
            "points": self.points,
            "projection_residual": self.projection_residual,
            "phase_insensitive": self.phase_insensitive,
            "notes": list(self.notes),
        }


def _segment_sigma(M: np.ndarray, x0: np.ndarray):
    """Exact ``t -> exp(t M) x0`` for skew ``M`` via the eigendecomposition of ``iM``."""
    w, Q = np.linalg.eigh(1j * M)
    c = Q.conj().T @ x0

    def at(t):
        return np.real(Q @ (np.exp(-1j * w * t) * c))

    return at


def _local_state(H0, V, W, p) -> np.ndarray:
    return V @ embed(p, H0.kind, H0.d1, H0.d2) @ W.T


def frame_of_state(psi, kind):
    """Local unitary ``(V, W)`` and values ``p`` with ``psi = V embed(p) W^T``."""
    kind = as_kind(kind)
    psi = np.asarray(getattr(psi, "coeffs", psi))
    if kind is Kind.DISTINGUISHABLE:
        Vs, s, Ws = complex_svd(psi)
        return Vs.conj().T, Ws.T, s
    if kind is Kind.BOSONIC:
        V, s = takagi(psi, tol=1e-8)
        return V.conj().T, V.conj().T, s
    V, x = hua(psi, tol=1e-8)
    return V.conj().T, V.conj().T, x * SQRT2


def projection_check(H0: CouplingHamiltonian, psi0, T: float, samples: int = 8, seed=0, h: float = 1e-5, eps: float = 1e-4) -> float:
    """Full dynamics under random constant local controls; max ``|sigma' + H_U sigma|``.

    ``U(t)`` is read off a factorization of ``psi(t)``; ``sigma'`` comes from a
    central difference of the sorted singular values of the exact full flow.
    Non-regular sample points are skipped.
    """
    rng = rng_from(seed)
    kind = H0.kind
    d1, d2 = H0.d1, H0.d2
    E = random_hermitian(d1, rng)
    F = E if kind.indistinguishable else random_hermitian(d2, rng)
    Hloc = LocalHamiltonian(kind, E, None if kind.indistinguishable else F)
    Hfull = H0.matrix() + Hloc.matrix()
    w, Q = np.linalg.eigh(Hfull)
    v0 = np.asarray(getattr(psi0, "coeffs", psi0)).reshape(-1)
    c0 = Q.conj().T @ v0

    def psi_at(t):
        return (Q @ (np.exp(-1j * w * t) * c0)).reshape(d1, d2)

    def sv(t):
        return np.asarray(sing_sorted(state_of_matrix(kind, psi_at(t), renormalize=True)))

    worst = 0.0
    for t in np.linspace(0, T, samples + 2)[1:-1]:
        V, W, p = frame_of_state(psi_at(t), kind)
        if not regularity(p, eps).is_regular:
            continue
        M = induced_field(H0, (V, W), check=False).matrix
        fd = (sv(t + h) - sv(t - h)) / (2 * h)
        worst = max(worst, float(np.linalg.norm(fd - M @ p)))
    return worst


def equivalence_check(
    H0: CouplingHamiltonian,
    schedule: ControlSchedule,
    p0,
    T: float | None = None,
    dt: float = 1e-3,
    eps: float = LIFT_EPS,
    phase_insensitive: bool = False,
    projection: bool = False,
    seed=0,
) -> EquivalenceReport:
    """Compare the reduced trajectory with the full system driven by its exact lift.

    On each segment the full state starts at ``U_k|sigma(t_k)>`` (reached from
    the previous segment by an instantaneous local kick ``U_k U_{k-1}^{-1}``)
    and is integrated with RK4 under ``H0 + compensator(t)``.  At non-regular
    points the compensator is zero when the drift has no transverse component
    there; otherwise the segment is abandoned and the lift restarts at the
    next breakpoint.  Deviations are measured at regular grid points only.
    """
    if T is not None and T != schedule.T:
        schedule = schedule.with_horizon(T)
    T = schedule.T
    traj = integrate_reduced(H0, schedule, p0, dt)
    kind = H0.kind
    x = np.asarray(traj.points[0])
    psi = None
    prev_V = prev_W = None
    max_dev = 0.0
    max_state = 0.0
    regular = 0
    total = 0
    restarts = 0
    notes = []

    def check(t, sigma_t, psi_t, V, W):
        nonlocal max_dev, max_state, regular
        if regularity(sigma_t, eps).is_regular:
            regular += 1
            got = np.asarray(sing_sorted(state_of_matrix(kind, psi_t, renormalize=True)))
            max_dev = max(max_dev, float(np.linalg.norm(got - weyl_sort(sigma_t))))
            target = _local_state(H0, V, W, sigma_t)
            max_state = max(max_state, state_distance(psi_t, target, phase_insensitive))

    for k, (t0, t1, seg) in enumerate(schedule.intervals()):
        V, W = seg.pair
        M = traj.fields[k]
        sigma = _segment_sigma(M, x)
        frame = _FrameDrift(H0, V, W)
        if psi is None:
            psi = _local_state(H0, V, W, x)
            if k > 0:
                restarts += 1
        else:
            # instantaneous local kick between segment frames
            psi = (V @ prev_V.conj().T) @ psi @ (W @ prev_W.conj().T).T
        if k == 0:
            total += 1
            check(0.0, x, psi, V, W)

        def comp(t):
            h = frame.compensator(sigma(t - t0), eps, zero_tol=1e-12)
            return h.traceless() if phase_insensitive else h

        def rhs(t, y):
            return -1j * (_drift_act(H0, y) + comp(t).act(y))

        prev = t0
        grid = _segment_grid(t0, t1, dt)
        failed = False
        for step, t in enumerate(grid, 1):
            total += 1
            if failed:
                continue
            try:
                psi = _rk4_step(rhs, prev, psi, t - prev)
            except SingularityError as exc:
                failed = True
                notes.append(f"segment {k} abandoned at t={prev:.6g}: {exc}")
                continue
            if step % 100 == 0:
                psi = _symmetrize(psi, kind)
            psi = psi / np.linalg.norm(psi)
            check(t, sigma(t - t0), psi, V, W)
            prev = t
        x = sigma(t1 - t0)
        x = x / np.linalg.norm(x)
        if failed:
            psi = None
        prev_V, prev_W = V, W

    report = EquivalenceReport(
        max_dev=max_dev,
        regular_fraction=regular / total if total else 0.0,
        dt=dt,
        T=T,
        max_state_dev=max_state,
        restarts=restarts,
        points=total,
        phase_insensitive=phase_insensitive,
        notes=notes,
    )
    if projection:
        V0, W0 = schedule.segments[0].pair
        report.projection_residual = projection_check(H0, _local_state(H0, V0, W0, traj.points[0]), T, seed=seed)
    return report


def lift_schedule(H0: CouplingHamiltonian, schedule: ControlSchedule, p0, dt: float, eps: float = LIFT_EPS) -> list:
    """Compensating Hamiltonians along the reduced trajectory on the ``dt`` grid.

    Returns one record per grid point: ``{"t", "sigma", "H"}``.  Raises
    :class:`SingularityError` if the trajectory leaves the regular set where
    the compensator is needed.
    """
    traj = integrate_reduced(H0, schedule, p0, dt)
    seg_index = np.clip(np.searchsorted(schedule.breakpoints, traj.times, side="right") - 1, 0, len(schedule) - 1)
    frames = [_FrameDrift(H0, *seg.pair) for seg in schedule.segments]
    out = []
    for t, k, p in zip(traj.times, seg_index, traj.points):
        h = frames[k].compensator(p, eps, zero_tol=1e-12)
        out.append({"t": float(t), "segment": int(k), "sigma": [float(v) for v in p], "H": h.to_dict()})
    return out


__all__ = [
    "EquivalenceReport",
    "FullTrajectory",
    "LocalHamiltonian",
    "ad_apply",
    "ad_pinv",
    "ad_pinv_bos",
    "ad_pinv_dist",
    "ad_pinv_ferm",
    "compensating_hamiltonian",
    "equivalence_check",
    "frame_of_state",
    "integrate_full",
    "lift_schedule",
    "perp_project",
    "phase_distance",
    "projection_check",
    "state_distance",
]
