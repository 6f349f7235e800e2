from __future__ import annotations

import numpy as np
import pytest

from neilcone import linalg
from conftest import random_hermitian, random_psd, random_unitary


def test_herm_eig_hand_checked_2x2():
    w, v = linalg.herm_eig(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex))
    assert np.allclose(w, [-1.0, 1.0], atol=1e-12)
    assert linalg.op_norm(v.conj().T @ v - np.eye(2)) < 1e-12


def test_min_eig_hand_checked_2x2():
    h = np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex)
    assert abs(linalg.min_eig(h) - 1.0) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 5, 12, 40])
def test_herm_eig_residual_and_orthonormality(n):
    rng = np.random.default_rng(17 + n)
    h = random_hermitian(rng, n, scale=3.0)
    w, v = linalg.herm_eig(h)
    fro = np.linalg.norm(h)
    assert np.linalg.norm(h @ v - v * w[None, :]) <= 1e-11 * (1.0 + fro)
    assert linalg.op_norm(v.conj().T @ v - np.eye(n)) <= 1e-11
    assert np.all(np.diff(w) >= 0.0)


def test_herm_eig_matches_independent_solver():
    rng = np.random.default_rng(5)
    for n in (2, 3, 7, 15):
        h = random_hermitian(rng, n)
        w, _ = linalg.herm_eig(h)
        ref = np.linalg.eigvalsh(h)
        assert np.allclose(w, ref, atol=1e-11 * (1 + np.linalg.norm(h)))


def test_herm_eig_batch_matches_single():
    rng = np.random.default_rng(99)
    hs = np.stack([random_hermitian(rng, 6) for _ in range(5)])
    wb, vb = linalg.herm_eig_batch(hs)
    for k in range(5):
        w, v = linalg.herm_eig(hs[k])
        assert np.allclose(wb[k], w, atol=0.0)  # identical sweep order, identical bits
        assert np.array_equal(vb[k], v)


def test_herm_eig_deterministic():
    rng = np.random.default_rng(3)
    h = random_hermitian(rng, 9)
    w1, v1 = linalg.herm_eig(h)
    w2, v2 = linalg.herm_eig(h)
    assert np.array_equal(w1, w2) and np.array_equal(v1, v2)


def test_herm_eig_uses_lower_triangle_only():
    h = np.array([[1.0, 99.0], [2.0 - 1.0j, -1.0]], dtype=complex)
    w, _ = linalg.herm_eig(h)
    ref = np.linalg.eigvalsh(np.array([[1.0, 2.0 + 1.0j], [2.0 - 1.0j, -1.0]]))
    assert np.allclose(w, ref, atol=1e-12)


def test_op_norm_hand_checked():
    a = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex)
    assert abs(linalg.op_norm(a) - np.sqrt(2.0)) < 1e-12


def test_op_norm_unitary_invariance():
    rng = np.random.default_rng(21)
    a = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
    u = random_unitary(rng, 4)
    v = random_unitary(rng, 6)
    assert abs(linalg.op_norm(u @ a @ v) - linalg.op_norm(a)) < 1e-10


def test_op_norm_rectangular_both_orientations():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((3, 8)) + 1j * rng.standard_normal((3, 8))
    assert abs(linalg.op_norm(a) - linalg.op_norm(a.conj().T)) < 1e-11
    assert abs(linalg.op_norm(a) - np.linalg.svd(a, compute_uv=False)[0]) < 1e-10


def test_psd_project_hand_checked():
    h = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    assert np.allclose(linalg.psd_project(h), 0.5 * np.ones((2, 2)), atol=1e-12)
    assert np.allclose(linalg.psd_project(np.zeros((3, 3))), 0.0, atol=0.0)


def test_psd_project_fixes_psd_input_and_is_nearest():
    rng = np.random.default_rng(11)
    p = random_psd(rng, 5)
    assert np.linalg.norm(linalg.psd_project(p) - p) < 1e-10 * (1 + np.linalg.norm(p))
    h = random_hermitian(rng, 5)
    proj = linalg.psd_project(h)
    assert linalg.min_eig(proj) >= -1e-12
    d0 = np.linalg.norm(proj - h)
    for _ in range(40):
        cand = random_psd(rng, 5)
        cand *= np.trace(h).real / max(np.trace(cand).real, 1e-9)
        assert np.linalg.norm(cand - h) >= d0 - 1e-9


def test_rank_factor_hand_checked():
    e = linalg.rank_factor(np.eye(2), tol=1e-10)
    assert e.shape == (2, 2)
    assert np.allclose(e @ e.conj().T, np.eye(2), atol=1e-12)
    e = linalg.rank_factor(np.diag([4.0, 0.0]).astype(complex), tol=1e-10)
    assert e.shape == (2, 1)
    assert np.allclose(e, [[2.0], [0.0]], atol=1e-12)


def test_rank_factor_roundtrip_low_rank():
    rng = np.random.default_rng(7)
    for r in (1, 2, 4):
        h = random_psd(rng, 6, rank=r)
        e = linalg.rank_factor(h)
        assert e.shape[1] == r
        assert np.linalg.norm(e @ e.conj().T - h) <= 1e-9 * 6 * (1 + np.linalg.norm(h))


def test_rank_factor_rejects_indefinite():
    with pytest.raises(ValueError, match="indefinite"):
        linalg.rank_factor(np.diag([-1.0, 5.0]).astype(complex))


def test_align_isometries_roundtrip():
    rng = np.random.default_rng(13)
    for m, n in ((4, 4), (6, 2), (9, 5)):
        v = np.linalg.qr(rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))[0]
        w = np.linalg.qr(rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))[0]
        u = linalg.align_isometries(v, w)
        assert linalg.op_norm(u @ v - w) <= 1e-9
        assert linalg.op_norm(u.conj().T @ u - np.eye(m)) <= 1e-10


def test_align_isometries_rejects_non_isometry():
    v = np.ones((3, 2), dtype=complex)
    w = np.eye(3, 2, dtype=complex)
    with pytest.raises(ValueError, match="isometry"):
        linalg.align_isometries(v, w)


def test_spectral_radius_cases():
    nil = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    assert linalg.spectral_radius(nil) == 0.0
    rng = np.random.default_rng(23)
    u = random_unitary(rng, 4)
    assert abs(linalg.spectral_radius(u) - 1.0) < 1e-10
    a = np.array([[0.5, 3.0], [0.0, -0.25]], dtype=complex)
    assert abs(linalg.spectral_radius(a) - 0.5) < 1e-8


def test_from_lower_builds_hermitian():
    a = np.array([[1.0 + 2.0j, 9.0], [3.0 - 4.0j, 5.0 + 6.0j]])
    h = linalg.from_lower(a)
    assert np.allclose(h, h.conj().T, atol=0.0)
    assert h[0, 0] == 1.0 and h[1, 1] == 5.0
    assert h[0, 1] == np.conj(h[1, 0]) == 3.0 + 4.0j
