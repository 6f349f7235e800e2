"""Quotient Hilbert spaces built from cone-positive functionals.

A positive semidefinite Gram matrix W on stacked sample values defines a
pre-inner product <f, g> = g^* W f on vector-valued functions over the
sample set.  Quotienting by the null space gives a finite-dimensional
Hilbert space on which pointwise multiplication acts; when W comes from a
separating certificate, the resulting representation is contractive on the
constrained algebra yet fails contractivity after matrix amplification.
This module builds the space, the multiplication operators, the amplified
deficiency number that witnesses the failure, and the commuting-pair model
generated by the squaring and cubing multipliers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .kernels import SampleSet, sigma_kernel

#: Relative eigenvalue cutoff separating the quotient from the null space.
NULL_TOL = 1e-9

#: Multiplication must leak at most this much out of the carrier subspace.
WELLDEF_TOL = 1e-6


@dataclass(frozen=True)
class GnsSpace:
    """The quotient space of a Gram functional, in orthonormal coordinates.

    ``factor`` has one column per retained eigenvalue of ``gram`` (largest
    first) and satisfies gram ~= factor @ factor^*.  A stacked value vector
    f maps to coordinates factor^* @ f; the coordinate inner product then
    reproduces g^* W f, so operator norms in coordinates are norms in the
    quotient space.
    """

    sample_set: SampleSet
    block_dim: int
    gram: np.ndarray
    factor: np.ndarray
    eigs: np.ndarray
    rank: int
    null_tol: float

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def coords(self, values: np.ndarray) -> np.ndarray:
        """Coordinates of a stacked value vector in the quotient space."""
        values = np.asarray(values, dtype=complex)
        if values.shape != (self.dim,):
            raise ValueError(
                "expected a stacked vector of length %d, got %r"
                % (self.dim, values.shape)
            )
        return self.factor.conj().T @ values


@dataclass(frozen=True)
class RepOperator:
    """A multiplication operator in quotient coordinates."""

    matrix: np.ndarray
    welldef_residual: float


def build_gns(w: np.ndarray, samples: SampleSet, block_dim: int = 1,
              null_tol: float = NULL_TOL) -> GnsSpace:
    """Quotient the stacked value space by the null vectors of ``w``.

    ``w`` must be positive semidefinite up to ``null_tol`` relative to its
    top eigenvalue; an indefinite matrix is rejected with the offending
    eigenvalue named.  Coordinates come from the spectral factorization
    rather than Cholesky because certificate Grams are often rank
    deficient by design.
    """
    w = linalg.from_lower(np.asarray(w, dtype=complex))
    n = len(samples) * block_dim
    if w.shape != (n, n):
        raise ValueError(
            "Gram matrix is %r but %d samples at block dimension %d need "
            "(%d, %d)" % (w.shape, len(samples), block_dim, n, n)
        )
    factor = linalg.rank_factor(w, tol=null_tol)
    eigs = np.real(np.sum(np.abs(factor) ** 2, axis=0))
    return GnsSpace(
        sample_set=samples,
        block_dim=block_dim,
        gram=w,
        factor=factor,
        eigs=eigs,
        rank=factor.shape[1],
        null_tol=null_tol,
    )


def _stacked_diag(space: GnsSpace, g_values) -> np.ndarray:
    g = np.asarray(g_values, dtype=complex)
    if g.shape != (len(space.sample_set),):
        raise ValueError(
            "expected one multiplier value per sample point (%d), got %r"
            % (len(space.sample_set), g.shape)
        )
    return np.repeat(g, space.block_dim)


def mult_operator(space: GnsSpace, g_values) -> RepOperator:
    """Matrix of pointwise multiplication by ``g_values`` on the quotient.

    The residual measures how much the multiplication moves the carrier
    subspace of the Gram matrix, scaled by the spread of the retained
    spectrum; beyond WELLDEF_TOL the operator is not well defined on the
    quotient and the functional is rejected rather than projected.
    """
    dg = _stacked_diag(space, g_values)
    if space.rank == 0:
        return RepOperator(matrix=np.zeros((0, 0), dtype=complex),
                           welldef_residual=0.0)
    e = space.factor
    basis = e / np.sqrt(space.eigs)[None, :]
    moved = dg[:, None] * basis
    leak = moved - basis @ (basis.conj().T @ moved)
    spread = math.sqrt(float(space.eigs[0] / space.eigs[-1]))
    residual = linalg.op_norm(leak) * spread
    if residual > WELLDEF_TOL:
        raise ValueError(
            "multiplication leaks %.3e out of the quotient carrier (tolerance "
            "%.1e); the functional does not define a representation"
            % (residual, WELLDEF_TOL)
        )
    matrix = (e.conj().T @ (dg[:, None] * e)) / space.eigs[None, :]
    return RepOperator(matrix=matrix, welldef_residual=residual)


def rep_norm(space: GnsSpace, op: RepOperator) -> float:
    """Operator norm of a multiplier; coordinates are orthonormal already."""
    if op.matrix.shape != (space.rank, space.rank):
        raise ValueError("operator does not act on this space")
    return linalg.op_norm(op.matrix)


def rep_norm_sweep(space: GnsSpace, values_batch) -> np.ndarray:
    """Multiplier norms for a whole family of functions at once.

    ``values_batch`` has one row of per-sample values per function.  Same
    well-definedness gate as mult_operator, applied to every row; the batch
    is rejected as soon as one member leaks out of the carrier.
    """
    vals = np.asarray(values_batch, dtype=complex)
    if vals.ndim != 2 or vals.shape[1] != len(space.sample_set):
        raise ValueError("need one value per sample point in every row")
    if space.rank == 0:
        return np.zeros(vals.shape[0])
    dg = np.repeat(vals, space.block_dim, axis=1)  # (K, n)
    e = space.factor
    basis = e / np.sqrt(space.eigs)[None, :]
    moved = dg[:, :, None] * basis[None, :, :]  # (K, n, r)
    leak = moved - basis[None] @ (basis.conj().T[None] @ moved)
    spread = math.sqrt(float(space.eigs[0] / space.eigs[-1]))
    residuals = linalg.op_norm_batch(leak) * spread
    worst = int(np.argmax(residuals))
    if residuals[worst] > WELLDEF_TOL:
        raise ValueError(
            "multiplication leaks %.3e out of the quotient carrier (tolerance "
            "%.1e) for sweep member %d" % (residuals[worst], WELLDEF_TOL, worst)
        )
    mats = (e.conj().T[None] @ moved) / np.sqrt(space.eigs)[None, None, :]
    return linalg.op_norm_batch(mats)


def amplified_deficiency(space: GnsSpace, f_values: np.ndarray) -> float:
    """Contractivity deficit of the transposed 2x2 multiplier amplification.

    Returns t = <(I - A^*A) h, h> where A is the block operator matrix of
    entrywise multiplication by the transposed matrix function and h stacks
    the coordinates of the two constant basis functions.  A negative t
    certifies that the amplified representation has norm above one.  It
    equals trace(W Sigma-hat) for the defect kernel of the function, which
    ties the number to the certificate's violation.
    """
    if space.block_dim != 2:
        raise ValueError("amplification needs block dimension 2")
    f = np.asarray(f_values, dtype=complex)
    n_samples = len(space.sample_set)
    if f.shape != (n_samples, 2, 2):
        raise ValueError(
            "expected %d sample values of a 2x2 function, got %r"
            % (n_samples, f.shape)
        )
    blocks = [[mult_operator(space, f[:, b, a]).matrix for b in range(2)]
              for a in range(2)]
    amp = np.block(blocks)
    e1 = np.tile(np.array([1.0, 0.0], dtype=complex), n_samples)
    e2 = np.tile(np.array([0.0, 1.0], dtype=complex), n_samples)
    h = np.concatenate([space.coords(e1), space.coords(e2)])
    image = amp @ h
    return float(np.real(np.vdot(h, h) - np.vdot(image, image)))


@dataclass(frozen=True)
class CommutingPairReport:
    """Diagnostics for the squaring/cubing multiplier pair."""

    x_norm: float
    y_norm: float
    commutator_norm: float
    relation_gap: float
    witness_norm: float
    rank: int

    def contractive(self, tol: float = 1e-8) -> bool:
        return self.x_norm <= 1.0 + tol and self.y_norm <= 1.0 + tol

    def relations_hold(self, tol: float = 1e-8) -> bool:
        return self.commutator_norm <= tol and self.relation_gap <= tol

    def norm_violated(self, delta: float = 1e-3) -> bool:
        return self.witness_norm >= 1.0 + delta


def build_noxy(samples: SampleSet, w: np.ndarray, witness_values,
               null_tol: float = NULL_TOL):
    """Commuting contractions X, Y with X^3 = Y^2 from a two-generator Gram.

    ``w`` should be positive for the squaring and cubing generators alone
    (the restricted cone); X and Y are then the multipliers of z^2 and z^3
    on the quotient.  They commute and satisfy X^3 = Y^2 because both sides
    multiply by z^6.  The report records their norms, the relation residuals,
    and the quotient norm of the scalar witness, which exceeds one exactly
    when the functional separates the witness's defect kernel from the
    restricted cone.  Returns (X, Y, report).
    """
    space = build_gns(w, samples, block_dim=1, null_tol=null_tol)
    pts = samples.array()
    x_op = mult_operator(space, pts ** 2)
    y_op = mult_operator(space, pts ** 3)
    f_op = mult_operator(space, np.asarray(witness_values, dtype=complex))
    x = x_op.matrix
    y = y_op.matrix
    report = CommutingPairReport(
        x_norm=rep_norm(space, x_op),
        y_norm=rep_norm(space, y_op),
        commutator_norm=linalg.op_norm(x @ y - y @ x),
        relation_gap=linalg.op_norm(
            x @ x @ x - y @ y
        ),
        witness_norm=rep_norm(space, f_op),
        rank=space.rank,
    )
    return x, y, report


def deficiency_matches_kernel(space: GnsSpace, f_values: np.ndarray) -> float:
    """Gap between the amplified deficiency and trace(W Sigma-hat).

    The two numbers agree by the chain of inner-product identities behind
    the amplification argument; the gap is exposed for direct checking.
    """
    f = np.asarray(f_values, dtype=complex)
    kern = sigma_kernel(f, space.sample_set)
    direct = float(np.real(np.trace(space.gram @ kern.flat)))
    return abs(amplified_deficiency(space, f) - direct)
