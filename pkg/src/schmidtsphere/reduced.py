"""Reduced dynamics on the Schmidt sphere and its operator lift.

Controls are piecewise constant: on each segment the local unitary is fixed,
so the induced field is a constant skew matrix ``M`` and the exact flow is
``exp(t M)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, KindError, UnitarityError
from .fields import CouplingHamiltonian, induced_field, speed_limit_bound
from .sampling import random_local_unitary, rng_from
from .states import Kind, SchmidtPoint

UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LocalControl:
    """Constant local unitary ``V (x) W`` (``W`` equals ``V`` for identical particles)."""

    V: np.ndarray
    W: np.ndarray | None = None
    generator: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        V = np.array(self.V, dtype=complex)
        W = V if self.W is None else np.array(self.W, dtype=complex)
        for name, U in (("V", V), ("W", W)):
            if U.ndim != 2 or U.shape[0] != U.shape[1]:
                raise DimensionError(f"{name} must be square")
            defect = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
            if defect > UNITARY_TOL:
                raise UnitarityError(f"{name} is not unitary: defect {defect:.3g}")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "W", W)

    @classmethod
    def from_generator(cls, E, F=None) -> "LocalControl":
        """``V = exp(-i E)``, ``W = exp(-i F)`` for Hermitian generators."""
        E = np.asarray(E, dtype=complex)
        F = None if F is None else np.asarray(F, dtype=complex)
        V = expm(-1j * E)
        return cls(V, None if F is None else expm(-1j * F), (E, E if F is None else F))

    @classmethod
    def identity(cls, d1: int, d2: int | None = None) -> "LocalControl":
        return cls(np.eye(d1), np.eye(d1 if d2 is None else d2))

    @property
    def pair(self):
        return self.V, self.W


@dataclass(frozen=True, eq=False)
class ControlSchedule:
    """Piecewise-constant controls: ``segments[k]`` acts on ``[t_k, t_{k+1})``."""

    breakpoints: np.ndarray
    segments: tuple

    def __post_init__(self):
        t = np.asarray(self.breakpoints, dtype=float)
        segs = tuple(s if isinstance(s, LocalControl) else LocalControl(*s) for s in self.segments)
        if t.ndim != 1 or t.size < 2:
            raise DimensionError("need at least two breakpoints")
        if t[0] != 0.0:
            raise ValueError("breakpoints must start at 0")
        if np.any(np.diff(t) <= 0) or not np.all(np.isfinite(t)):
            raise ValueError("breakpoints must be finite and strictly increasing")
        if len(segs) != t.size - 1:
            raise DimensionError(f"{t.size} breakpoints need {t.size - 1} segments, got {len(segs)}")
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, control: LocalControl, T: float) -> "ControlSchedule":
        return cls([0.0, T], [control])

    @property
    def T(self) -> float:
        return float(self.breakpoints[-1])

    def __len__(self):
        return len(self.segments)

    def intervals(self):
        for k, seg in enumerate(self.segments):
            yield float(self.breakpoints[k]), float(self.breakpoints[k + 1]), seg

    def with_horizon(self, T: float) -> "ControlSchedule":
        """Truncate at ``T`` or extend the last segment up to ``T``."""
        if T <= 0:
            raise ValueError("horizon must be positive")
        t = self.breakpoints
        if T >= t[-1]:
            return ControlSchedule(list(t[:-1]) + [T], self.segments)
        keep = max(int(np.searchsorted(t, T, side="left")), 1)
        bps = list(t[:keep]) + [T]
        return ControlSchedule(bps, self.segments[: len(bps) - 1])


@dataclass(eq=False)
class Trajectory:
    """Sampled solution; ``points[i]`` is the point (or lift matrix) at ``times[i]``."""

    times: np.ndarray
    points: np.ndarray
    kind: Kind
    schedule: ControlSchedule | None = field(default=None, repr=False)
    fields: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]


def _segment_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    steps = max(1, int(math.ceil((t1 - t0) / dt - 1e-9)))
    return np.minimum(t0 + dt * np.arange(1, steps + 1), t1)


def _check_point(H0: CouplingHamiltonian, p0):
    if isinstance(p0, SchmidtPoint) and p0.kind is not H0.kind:
        raise KindError(f"point is {p0.kind.value}, drift is {H0.kind.value}")
    x = np.asarray(p0, dtype=float).reshape(-1)
    if x.size != H0.n:
        raise DimensionError(f"point has {x.size} values, expected {H0.n}")
    if abs(np.linalg.norm(x) - 1) > 1e-8:
        raise ValueError("initial point must have unit norm")
    return x


def _check_schedule(H0: CouplingHamiltonian, schedule: ControlSchedule):
    for k, seg in enumerate(schedule.segments):
        if seg.V.shape[0] != H0.d1 or seg.W.shape[0] != H0.d2:
            raise DimensionError(f"segment {k} acts on {seg.V.shape[0]}x{seg.W.shape[0]}, drift on {H0.d1}x{H0.d2}")
        if H0.kind.indistinguishable and np.linalg.norm(seg.V - seg.W) > UNITARY_TOL:
            raise KindError(f"segment {k}: identical particles need W == V")


def _rk4_linear(M: np.ndarray, x: np.ndarray, h: float) -> np.ndarray:
    k1 = M @ x
    k2 = M @ (x + h / 2 * k1)
    k3 = M @ (x + h / 2 * k2)
    k4 = M @ (x + h * k3)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _flow(H0, schedule, x0, dt, method, renormalize):
    if dt <= 0:
        raise ValueError("dt must be positive")
    if method not in ("expm", "rk4"):
        raise ValueError(f"unknown method {method!r}")
    _check_schedule(H0, schedule)
    times = [0.0]
    states = [x0]
    fields = []
    x = x0
    for t0, t1, seg in schedule.intervals():
        M = induced_field(H0, seg.pair).matrix
        fields.append(M)
        grid = _segment_grid(t0, t1, dt)
        prev = t0
        cache = {}
        for t in grid:
            h = t - prev
            if method == "expm":
                key = round(h / dt, 12)
                if key not in cache:
                    cache[key] = expm(h * M)
                x = cache[key] @ x
            else:
                x = _rk4_linear(M, x, h)
            x = renormalize(x)
            times.append(float(t))
            states.append(x)
            prev = t
    return np.array(times), np.array(states), fields


def integrate_reduced(H0: CouplingHamiltonian, schedule: ControlSchedule, p0, dt: float, method: str = "expm") -> Trajectory:
    """Solve ``sigma' = -H_{U(t)} sigma`` on the grid ``dt`` (breakpoints included).

    ``method="expm"`` applies the exact segment propagator ``exp(dt M)``;
    ``method="rk4"`` uses the classical Runge-Kutta step.  Both renormalize.
    """
    x0 = _check_point(H0, p0)
    times, pts, fields = _flow(H0, schedule, x0, dt, method, lambda x: x / np.linalg.norm(x))
    return Trajectory(times, pts, H0.kind, schedule, fields)


def _reorthonormalize(R: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(R)
    return q * np.sign(np.diagonal(r))


def integrate_lift(H0: CouplingHamiltonian, schedule: ControlSchedule, dt: float, method: str = "expm") -> Trajectory:
    """Operator lift ``R' = -H_{U(t)} R``, ``R(0) = 1``; points are ``n x n`` orthogonal matrices."""
    R0 = np.eye(H0.n)
    times, mats, fields = _flow(H0, schedule, R0, dt, method, _reorthonormalize)
    return Trajectory(times, mats, H0.kind, schedule, fields)


# -- Lie algebra rank ----------------------------------------------------------


def _orthonormal_extend(basis: list, m: np.ndarray, tol: float) -> bool:
    v = m.reshape(-1).astype(float)
    for b in basis:
        v = v - (b @ v) * b
    for b in basis:  # second pass against cancellation
        v = v - (b @ v) * b
    nv = np.linalg.norm(v)
    if nv > tol:
        basis.append(v / nv)
        return True
    return False


def lie_closure_dim(generators, tol: float = 1e-9) -> int:
    """Dimension of the real Lie algebra generated by the given matrices."""
    gens = [np.asarray(g, dtype=float) for g in generators]
    if not gens:
        return 0
    n = gens[0].shape[0]
    scale = max(1.0, max(np.linalg.norm(g) for g in gens))
    basis: list = []
    for g in gens:
        _orthonormal_extend(basis, g / scale, tol)
    frontier = list(range(len(basis)))
    while frontier:
        new = []
        mats = [b.reshape(n, n) for b in basis]
        for i in frontier:
            for j in range(len(mats)):
                if i == j:
                    continue
                c = mats[i] @ mats[j] - mats[j] @ mats[i]
                if _orthonormal_extend(basis, c, tol):
                    new.append(len(basis) - 1)
        frontier = new
    return len(basis)


def lie_rank(H0: CouplingHamiltonian, samples: int = 20, seed=0, tol: float = 1e-9) -> int:
    """Dimension of the Lie algebra generated by ``samples`` random fields ``-H_U``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = rng_from(seed)
    fields = [induced_field(H0, random_local_unitary(H0.kind, H0.d1, H0.d2, rng)).matrix for _ in range(samples)]
    return lie_closure_dim(fields, tol)


# -- chamber geometry and time bounds -----------------------------------------


def chamber_distance(p, q) -> float:
    """Geodesic distance ``arccos(p . q)`` on the unit sphere."""
    c = float(np.dot(np.asarray(p, dtype=float), np.asarray(q, dtype=float)))
    return math.acos(min(1.0, max(-1.0, c)))


def chamber_diameter(n: int) -> float:
    """Diameter ``arccos(1/sqrt(n))`` of the Weyl chamber on the sphere."""
    if n < 1:
        raise ValueError("n must be positive")
    return math.acos(1 / math.sqrt(n))


def control_time_lower_bound(H0: CouplingHamiltonian) -> float:
    """``pi / (4 * speed bound)``; infinite for a drift with zero bound."""
    b = speed_limit_bound(H0)
    return math.inf if b == 0 else math.pi / (4 * b)


# -- reachable set sampling ----------------------------------------------------


def _reach_trial(H0, x0, T, segments, seed_seq):
    rng = np.random.default_rng(seed_seq)
    cuts = np.sort(rng.uniform(0, T, segments - 1))
    durations = np.diff(np.concatenate([[0.0], cuts, [T]]))
    x = x0
    for tau in durations:
        M = induced_field(H0, random_local_unitary(H0.kind, H0.d1, H0.d2, rng), check=False).matrix
        x = expm(tau * M) @ x
    return x / np.linalg.norm(x)


def reach_sample(H0: CouplingHamiltonian, p0, T: float, trials: int, seed=0, segments: int = 4, jobs: int = 1) -> np.ndarray:
    """Endpoints of ``trials`` random piecewise-constant schedules on ``[0, T]``.

    Durations are uniform (sorted uniform cut points), unitaries Haar.  Trial
    ``k`` draws from its own child seed, so results do not depend on ``jobs``.
    Returns an array of shape ``(trials, n)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if segments < 1:
        raise ValueError("segments must be >= 1")
    if T < 0:
        raise ValueError("T must be non-negative")
    x0 = _check_point(H0, p0)
    if T == 0:
        return np.tile(x0, (trials, 1))
    children = np.random.SeedSequence(seed if not isinstance(seed, np.random.SeedSequence) else seed.entropy).spawn(trials)
    if jobs <= 1:
        out = [_reach_trial(H0, x0, T, segments, s) for s in children]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(lambda s: _reach_trial(H0, x0, T, segments, s), children))
    return np.array(out)


__all__ = [
    "ControlSchedule",
    "LocalControl",
    "Trajectory",
    "chamber_diameter",
    "chamber_distance",
    "control_time_lower_bound",
    "integrate_lift",
    "integrate_reduced",
    "lie_closure_dim",
    "lie_rank",
    "reach_sample",
]
