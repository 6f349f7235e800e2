"""Self-contained dense complex linear algebra on small Hermitian matrices.

Everything is built on a cyclic Jacobi eigensolver: pivots are visited in a
fixed row-major order, so a given input always produces bit-for-bit the same
output.  Matrices here are small (dimension a few hundred at most) and many
of them are processed at once, so the solver works on a stacked batch and the
single-matrix routines are thin wrappers.

Only the lower triangle of a Hermitian argument is trusted; ``from_lower``
rebuilds the full matrix before any decomposition.
"""

from __future__ import annotations

import math

import numpy as np

# Default tolerances.  Routines take these as parameters; the constants only
# set defaults.
EIG_RESIDUAL_TOL = 1e-11
RANK_TOL = 1e-9
ALIGN_TOL = 1e-9
ISOMETRY_TOL = 1e-10
SWEEP_CAP = 60

# Sweep until the off-diagonal Frobenius norm drops below this multiple of
# the matrix norm; well below the 1e-11 contract so the residual bound holds
# with slack.
_OFF_TARGET = 1e-14
# Pivots below this relative size are skipped; n of them contribute less
# than _OFF_TARGET to the off-norm.
_PIVOT_SKIP = 1e-16


class ConvergenceError(RuntimeError):
    """Jacobi sweep cap reached before the off-diagonal target."""


def from_lower(h: np.ndarray) -> np.ndarray:
    """Rebuild a Hermitian matrix (or stack) from its lower triangle."""
    h = np.asarray(h, dtype=complex)
    lower = np.tril(h, -1)
    diag = np.real(np.diagonal(h, axis1=-2, axis2=-1))
    out = lower + lower.conj().swapaxes(-1, -2)
    idx = np.arange(h.shape[-1])
    out[..., idx, idx] = diag
    return out


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Average a matrix (or stack) with its conjugate transpose."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().swapaxes(-1, -2))


def _tournament_rounds(n: int):
    """Round-robin schedule: n-1 rounds of disjoint index pairs covering all
    (p, q).  Fixed schedule, so the sweep order is deterministic."""
    m = n if n % 2 == 0 else n + 1
    arr = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            p, q = arr[i], arr[m - 1 - i]
            if p > q:
                p, q = q, p
            if q < n:  # drop the bye of an odd-sized problem
                pairs.append((p, q))
        rounds.append(
            (np.array([p for p, _ in pairs]), np.array([q for _, q in pairs]))
        )
        arr = [arr[0], arr[-1]] + arr[1:-1]
    return rounds


def _jacobi_batch(h, want_vectors, sweep_cap, off_target=_OFF_TARGET):
    """Cyclic Jacobi on a stack of Hermitian matrices.

    One sweep visits every off-diagonal pair once, as n-1 tournament rounds
    of disjoint pairs; the rotations inside a round commute, so each round is
    applied as one vectorized two-sided update across the whole stack.
    h is modified in place and must already be exactly Hermitian with real
    diagonal.  Returns (w, v) with eigenvalues ascending; v is None when
    vectors are not requested.
    """
    b, n, _ = h.shape
    v = None
    if want_vectors:
        v = np.zeros((b, n, n), dtype=complex)
        v[:, np.arange(n), np.arange(n)] = 1.0
    if n == 1:
        w = np.real(np.diagonal(h, axis1=1, axis2=2)).copy()
        return w, v

    scale = np.sqrt(np.sum(np.abs(h) ** 2, axis=(1, 2)))
    # Zero matrices are already diagonal; keep their scale harmless.
    skip_at = _PIVOT_SKIP * np.where(scale > 0.0, scale, 1.0)
    target = (off_target * scale) ** 2

    idx = np.arange(n)

    def _off2():
        # Summing the off-diagonal entries directly avoids the cancellation
        # that a norm-minus-diagonal formula suffers near convergence.
        mag = np.abs(h) ** 2
        mag[:, idx, idx] = 0.0
        return np.sum(mag, axis=(1, 2))

    def _finish():
        w = np.real(h[:, idx, idx]).copy()
        order = np.argsort(w, axis=1, kind="stable")
        w = np.take_along_axis(w, order, axis=1)
        vv = np.take_along_axis(v, order[:, None, :], axis=2) if want_vectors else None
        return w, vv

    rounds = _tournament_rounds(n)
    for _ in range(sweep_cap):
        off2 = _off2()
        if np.all(off2 <= target):
            return _finish()
        # Freeze batch elements that are already converged: they get exact
        # identity rotations from here on, so a matrix decomposes to the same
        # bits whether it is solved alone or inside a larger stack.
        busy = off2 > target
        for pp, qq in rounds:
            g = h[:, pp, qq]
            absg = np.abs(g)
            live = (absg > skip_at[:, None]) & busy[:, None]
            if not np.any(live):
                continue
            safe = np.where(live, absg, 1.0)
            u = np.where(live, g / safe, 1.0)
            tau = (np.real(h[:, qq, qq]) - np.real(h[:, pp, pp])) / (2.0 * safe)
            t = np.sign(tau)
            t = np.where(t == 0.0, 1.0, t) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = np.where(live, 1.0 / np.sqrt(1.0 + t * t), 1.0)
            s = np.where(live, t * c, 0.0)
            su = s * u
            suc = s * np.conj(u)

            # H <- R* H R with R the identity outside the round's pairs and
            # R[[p,q],[p,q]] = [[c, s u],[-s conj(u), c]] on each pair; the
            # pairs are disjoint, so all of them apply in one update.
            hp = h[:, :, pp]
            hq = h[:, :, qq]
            h[:, :, pp] = hp * c[:, None, :] - hq * suc[:, None, :]
            h[:, :, qq] = hp * su[:, None, :] + hq * c[:, None, :]
            rp = h[:, pp, :]
            rq = h[:, qq, :]
            h[:, pp, :] = rp * c[:, :, None] - rq * su[:, :, None]
            h[:, qq, :] = rp * suc[:, :, None] + rq * c[:, :, None]
            # Exact zeros at the pivots; real diagonal by construction.
            h[:, pp, qq] = np.where(live, 0.0, h[:, pp, qq])
            h[:, qq, pp] = np.conj(h[:, pp, qq])
            h[:, pp, pp] = np.real(h[:, pp, pp])
            h[:, qq, qq] = np.real(h[:, qq, qq])
            if want_vectors:
                vp = v[:, :, pp]
                vq = v[:, :, qq]
                v[:, :, pp] = vp * c[:, None, :] - vq * suc[:, None, :]
                v[:, :, qq] = vp * su[:, None, :] + vq * c[:, None, :]
    off2 = _off2()
    if np.all(off2 <= target):
        return _finish()
    raise ConvergenceError(
        "cyclic Jacobi did not converge in %d sweeps (off-norm %.3e, target %.3e)"
        % (sweep_cap, float(np.max(np.sqrt(off2))), float(np.min(np.sqrt(target))))
    )


def herm_eig_batch(h, want_vectors: bool = True, sweep_cap: int = SWEEP_CAP,
                   sweep_tol: float = _OFF_TARGET):
    """Eigen-decompose a stack of Hermitian matrices, eigenvalues ascending.

    sweep_tol is the relative off-diagonal norm at which sweeping stops; the
    default is full precision.  Solver hot loops pass a looser value and
    re-verify their final answer at the default.
    """
    work = from_lower(h)
    if work.ndim != 3 or work.shape[-1] != work.shape[-2]:
        raise ValueError("expected a (batch, n, n) stack, got %r" % (work.shape,))
    return _jacobi_batch(work, want_vectors, sweep_cap, off_target=sweep_tol)


def herm_eigvals_batch(h, sweep_cap: int = SWEEP_CAP,
                       sweep_tol: float = _OFF_TARGET) -> np.ndarray:
    """Eigenvalues only for a stack of Hermitian matrices."""
    w, _ = herm_eig_batch(h, want_vectors=False, sweep_cap=sweep_cap,
                          sweep_tol=sweep_tol)
    return w


def herm_eig(h, sweep_cap: int = SWEEP_CAP):
    """Eigenvalues (ascending) and eigenvector matrix of one Hermitian matrix."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix, got %r" % (h.shape,))
    w, v = herm_eig_batch(h[None], want_vectors=True, sweep_cap=sweep_cap)
    return w[0], v[0]


def min_eig(h) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    w, _ = herm_eig_batch(np.asarray(h, dtype=complex)[None], want_vectors=False)
    return float(w[0, 0])


def min_eig_batch(h) -> np.ndarray:
    """Smallest eigenvalue of every matrix in a Hermitian stack."""
    return herm_eigvals_batch(h)[:, 0]


def op_norm(a) -> float:
    """Largest singular value, via the Gram matrix on the smaller side."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError("expected a matrix, got %r" % (a.shape,))
    if a.size == 0:
        return 0.0
    if a.shape[0] < a.shape[1]:
        gram = a @ a.conj().T
    else:
        gram = a.conj().T @ a
    w = herm_eigvals_batch(gram[None])[0]
    return math.sqrt(max(float(w[-1]), 0.0))


def op_norm_batch(a) -> np.ndarray:
    """Largest singular value of every matrix in a square stack."""
    a = np.asarray(a, dtype=complex)
    gram = a.conj().swapaxes(-1, -2) @ a
    w = herm_eigvals_batch(gram)
    return np.sqrt(np.maximum(w[:, -1], 0.0))


def psd_project(h) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix."""
    return psd_project_batch(np.asarray(h, dtype=complex)[None])[0]


def psd_project_batch(h) -> np.ndarray:
    """Frobenius-nearest PSD matrix for every matrix in a Hermitian stack."""
    w, v = herm_eig_batch(h, want_vectors=True)
    w = np.maximum(w, 0.0)
    out = (v * w[:, None, :]) @ v.conj().swapaxes(-1, -2)
    return from_lower(out)


def rank_factor(h, tol: float = RANK_TOL) -> np.ndarray:
    """Factor a PSD matrix as E E* with one column per eigenvalue above tol.

    tol is relative to the largest eigenvalue (absolute for a zero matrix).
    A matrix that is indefinite beyond the same threshold is rejected.
    """
    w, v = herm_eig(h)
    lam_max = max(float(w[-1]), 0.0)
    thresh = tol * lam_max if lam_max > 0.0 else tol
    if float(w[0]) < -thresh:
        raise ValueError(
            "matrix is indefinite: smallest eigenvalue %.6e is below -%.1e"
            % (float(w[0]), thresh)
        )
    keep = np.flatnonzero(w > thresh)[::-1]  # descending
    return v[:, keep] * np.sqrt(w[keep])[None, :]


def _complete_isometry(v: np.ndarray, tol: float) -> np.ndarray:
    """Extend an isometry's columns to an orthonormal basis (deterministic MGS)."""
    m, n = v.shape
    basis = [v[:, j].copy() for j in range(n)]
    for i in range(m):
        if len(basis) == m:
            break
        cand = np.zeros(m, dtype=complex)
        cand[i] = 1.0
        for _ in range(2):  # re-orthogonalize once for stability
            for b in basis:
                cand = cand - b * np.vdot(b, cand)
        nrm = float(np.linalg.norm(cand))
        if nrm > 1e-8:
            basis.append(cand / nrm)
    if len(basis) != m:
        raise ValueError("failed to complete isometry columns to a basis")
    return np.column_stack(basis[n:]) if m > n else np.zeros((m, 0), dtype=complex)


def align_isometries(v, w, tol: float = ISOMETRY_TOL) -> np.ndarray:
    """Unitary U with U v = w for two isometries with equal shapes.

    Both arguments must satisfy A* A = I within tol.  U acts as w v* on the
    range of v and maps a completion of v's range onto a completion of w's.
    """
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if v.shape != w.shape or v.ndim != 2:
        raise ValueError("isometries must share one (m, n) shape")
    m, n = v.shape
    if m < n:
        raise ValueError("an isometry needs at least as many rows as columns")
    eye = np.eye(n)
    for name, a in (("first", v), ("second", w)):
        defect = op_norm(a.conj().T @ a - eye)
        if defect > tol:
            raise ValueError(
                "%s argument is not an isometry: ||A*A - I|| = %.3e" % (name, defect)
            )
    v_perp = _complete_isometry(v, tol)
    w_perp = _complete_isometry(w, tol)
    u = np.column_stack([w, w_perp]) @ np.column_stack([v, v_perp]).conj().T
    return u


def spectral_radius(a, squarings: int = 40) -> float:
    """Spectral radius by Gelfand's formula with repeated squaring.

    Returns ||A^(2^J)||^(1/2^J) accumulated in log space; the overestimate
    decays like log(cond)/2^J, far below 1e-8 at the default J.
    """
    t = np.asarray(a, dtype=complex)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError("expected a square matrix, got %r" % (t.shape,))
    log_est = 0.0
    for j in range(squarings):
        c = op_norm(t)
        if c == 0.0:
            return 0.0
        log_est += math.log(c) / (2.0**j)
        t = t / c
        t = t @ t
    return math.exp(log_est)
