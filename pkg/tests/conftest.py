from __future__ import annotations

import numpy as np


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_psd(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    r = n if rank is None else rank
    e = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    return e @ e.conj().T


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def random_disk_points(rng: np.random.Generator, n: int, rmax: float = 0.9,
                       min_sep: float = 1e-2) -> list[complex]:
    pts: list[complex] = []
    while len(pts) < n:
        z = complex(rng.uniform(-rmax, rmax), rng.uniform(-rmax, rmax))
        if abs(z) >= rmax:
            continue
        if all(abs(z - p) >= min_sep for p in pts):
            pts.append(z)
    return pts
