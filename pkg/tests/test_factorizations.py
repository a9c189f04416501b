import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schmidtsphere import complex_svd, hua, regularity, takagi
from schmidtsphere.errors import ConstraintError, InputError
from schmidtsphere.factorizations import J2, min_gap, quasi_diag, rect_diag
from schmidtsphere.sampling import ginibre, haar_unitary
from schmidtsphere.states import embed_qdiag


def _unitarity(V):
    return np.linalg.norm(V.conj().T @ V - np.eye(V.shape[0]))


def test_svd_examples(rng):
    V, s, W = complex_svd(np.diag([3.0, 1.0]))
    assert np.allclose(s, [3, 1])
    _, s, _ = complex_svd(np.array([[0, 1], [1, 0]]))
    assert np.allclose(s, [1, 1])
    psi = ginibre(3, 5, rng)
    V, s, W = complex_svd(psi)
    assert np.linalg.norm(V.conj().T @ rect_diag(s, 3, 5) @ W - psi) <= 1e-10 * np.linalg.norm(psi)
    assert np.linalg.norm(V @ psi @ W.conj().T - rect_diag(s, 3, 5)) <= 1e-10 * np.linalg.norm(psi)
    assert _unitarity(V) <= 1e-12 and _unitarity(W) <= 1e-12
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)


def test_svd_rejects_nonfinite():
    with pytest.raises(InputError):
        complex_svd(np.array([[np.nan, 0], [0, 1]]))


def test_takagi_examples():
    V, s = takagi(np.diag([2, 1 + 0j]))
    assert np.allclose(s, [2, 1])
    assert np.allclose(V @ np.diag([2, 1]) @ V.T, np.diag([2, 1]))
    th = 0.7
    V, s = takagi(np.array([[np.exp(1j * th)]]))
    assert np.allclose(V, [[np.exp(-0.5j * th)]]) or np.allclose(V, [[-np.exp(-0.5j * th)]])
    assert np.allclose(s, [1])


def test_takagi_rejects_asymmetric():
    with pytest.raises(ConstraintError):
        takagi(np.array([[0, 1], [0, 0]]))


def test_hua_examples():
    c = 2 * np.exp(0.9j)
    V, xi = hua(c * J2)
    assert np.allclose(xi, [2])
    assert np.allclose(V @ (c * J2) @ V.T, 2 * J2)
    with pytest.raises(ConstraintError):
        hua(np.eye(2))


def test_hua_odd_kernel(rng):
    U = haar_unitary(3, rng)
    psi = U @ quasi_diag([1.5], 3) @ U.T
    V, xi = hua(psi)
    assert np.allclose(xi, [1.5])
    assert np.linalg.norm(V @ psi @ V.T - quasi_diag(xi, 3)) <= 1e-12


def _symmetric(d, rng):
    g = ginibre(d, d, rng)
    return (g + g.T) / 2


def _skew(d, rng):
    g = ginibre(d, d, rng)
    return (g - g.T) / 2


@pytest.mark.parametrize("d", [1, 2, 3, 4, 6, 8])
def test_takagi_random(rng, d):
    for _ in range(20):
        psi = _symmetric(d, rng)
        V, s = takagi(psi)
        assert np.linalg.norm(V @ psi @ V.T - np.diag(s)) <= 1e-8 * np.linalg.norm(psi)
        assert np.allclose(s, np.linalg.svd(psi, compute_uv=False), atol=1e-8)
        assert abs(abs(np.linalg.det(V)) - 1) <= 1e-10


@pytest.mark.parametrize("d", [2, 3, 5, 6, 8])
def test_hua_random(rng, d):
    for _ in range(20):
        psi = _skew(d, rng)
        V, xi = hua(psi)
        assert np.linalg.norm(V @ psi @ V.T - quasi_diag(xi, d)) <= 1e-8 * np.linalg.norm(psi)
        sv = np.linalg.svd(psi, compute_uv=False)
        assert np.allclose(np.repeat(xi, 2), sv[: 2 * (d // 2)], atol=1e-8)
        assert abs(abs(np.linalg.det(V)) - 1) <= 1e-10
        assert np.all(np.diff(xi) <= 1e-12)


def test_degenerate_clusters(rng):
    U = haar_unitary(4, rng)
    psi = U @ np.diag([1, 1, 0.5, 0.5]) @ U.T
    V, s = takagi(psi)
    assert np.linalg.norm(V @ psi @ V.T - np.diag(s)) <= 1e-12
    psi = U @ quasi_diag([1, 1], 4) @ U.T
    V, xi = hua(psi)
    assert np.linalg.norm(V @ psi @ V.T - quasi_diag(xi, 4)) <= 1e-12
    psi = U @ np.diag([1, 0.5, 0, 0]) @ U.T
    V, s = takagi(psi)
    assert np.linalg.norm(V @ psi @ V.T - np.diag(s)) <= 1e-12


def test_hua_on_quasi_diagonal_is_idempotent():
    psi = embed_qdiag([0.8, 0.6], 4)
    V, xi = hua(psi)
    assert np.allclose(xi * math.sqrt(2), [0.8, 0.6])
    assert np.linalg.norm(V @ psi @ V.T - quasi_diag(xi, 4)) <= 1e-12


def test_regularity_examples():
    r = regularity([1 / math.sqrt(2)] * 2)
    assert r.status == "degenerate" and r.indices == (0, 1) and str(r) == "degenerate{0, 1}"
    r = regularity([1, 0])
    assert r.status == "singular" and r.indices == (1,)
    assert regularity([0.8, 0.6]).is_regular
    # sign does not matter, vanishing takes precedence over collisions
    assert regularity([0.8, -0.8, 0]).status == "singular"
    assert regularity([0.6, -0.8]).is_regular
    with pytest.raises(ValueError):
        regularity([1, 0], eps=0)
    assert min_gap([0.8, 0.6]) == pytest.approx(0.2)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_property_takagi_hua(d, seed):
    rng = np.random.default_rng(seed)
    psi = _symmetric(d, rng)
    V, s = takagi(psi)
    assert np.linalg.norm(V @ psi @ V.T - np.diag(s)) <= 1e-8 * max(1, np.linalg.norm(psi))
    if d >= 2:
        psi = _skew(d, rng)
        V, xi = hua(psi)
        assert np.linalg.norm(V @ psi @ V.T - quasi_diag(xi, d)) <= 1e-8 * max(1, np.linalg.norm(psi))
