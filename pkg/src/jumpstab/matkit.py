"""Dense real linear-algebra kernel.

Kronecker products, column-stacking vectorization, spectral radii, matrix
norms, PSD hygiene, and the block-replication construction used by the
switched-system stability tests. Matrices are plain float64 ``numpy``
arrays; :func:`as_matrix` is the single entry point that enforces the
construction invariants (2-D, nonempty, all entries finite).

All functions are pure and hold no shared state; they are safe to call
concurrently from any number of threads.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "NumericalError",
    "as_matrix",
    "as_square",
    "kron",
    "vec",
    "unvec",
    "spectral_radius",
    "spectral_norm",
    "block_replicate",
    "symmetrize",
    "psd_project",
    "sqrtm_psd",
]

#: Default slack for symmetry / positive-semidefiniteness checks.
PSD_TOL = 1e-10


class NumericalError(RuntimeError):
    """A numerical routine failed (eigensolver breakdown, divergence, ...).

    Raised instead of returning garbage so callers can distinguish numeric
    failure from invalid input (which raises ``ValueError``).
    """


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a 2-D float64 array and validate it.

    Rejects empty matrices and any non-finite entry. ``name`` labels the
    offending argument in error messages.
    """
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.size == 0:
        raise ValueError(f"{name} must be nonempty, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_square(a, name: str = "matrix") -> np.ndarray:
    """Like :func:`as_matrix` but additionally requires a square shape."""
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices.

    Result has shape ``(a.rows * b.rows, a.cols * b.cols)`` and satisfies
    the mixed-product identity ``kron(A, B) @ kron(C, D) = kron(A @ C, B @ D)``
    for conformable factors.
    """
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def vec(m) -> np.ndarray:
    """Column-stacking vectorization.

    Columns of ``m`` are concatenated top to bottom into a 1-D array, so
    ``vec(A @ B @ C) == kron(C.T, A) @ vec(B)`` holds for conformable
    matrices, and ``vec(I) @ vec(S) == trace(S)``.
    """
    return as_matrix(m, "m").flatten(order="F")


def unvec(v, rows: int, cols: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a 1-D array to ``rows x cols``.

    ``cols`` defaults to ``rows`` (square result).
    """
    if cols is None:
        cols = rows
    x = np.asarray(v, dtype=float).reshape(-1)
    if x.size != rows * cols:
        raise ValueError(f"cannot unvec length {x.size} into {rows}x{cols}")
    return x.reshape((rows, cols), order="F")


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus of a square matrix.

    Uses a dense general (real-to-complex) eigensolver: spectra of the
    lifted matrices arising here are routinely complex or have tied
    moduli, so power iteration is not an option. Accuracy is that of
    LAPACK's QR algorithm, better than 1e-9 relative for well-conditioned
    inputs.

    Raises
    ------
    ValueError
        If the input is not square.
    NumericalError
        If the eigenvalue iteration fails to converge.
    """
    a = as_square(m, "m")
    try:
        eigs = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    return float(np.max(np.abs(eigs)))


def spectral_norm(m) -> float:
    """Induced 2-norm (largest singular value)."""
    try:
        return float(np.linalg.norm(as_matrix(m, "m"), 2))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular value computation failed: {exc}") from exc


def block_replicate(blocks) -> np.ndarray:
    """Stack square blocks into a matrix with identical block columns.

    Given ``m`` square ``n x n`` blocks ``X_1 .. X_m``, returns the
    ``nm x nm`` matrix whose ``(i, j)`` block equals ``X_i`` for every
    ``j``. Its nonzero eigenvalues coincide with those of
    ``X_1 + ... + X_m`` and its rank is at most ``n``.
    """
    mats = [as_square(b, f"blocks[{i}]") for i, b in enumerate(blocks)]
    if not mats:
        raise ValueError("blocks must be nonempty")
    n = mats[0].shape[0]
    for i, b in enumerate(mats):
        if b.shape != (n, n):
            raise ValueError(
                f"blocks[{i}] has shape {b.shape}, expected ({n}, {n})"
            )
    return np.tile(np.vstack(mats), (1, len(mats)))


def symmetrize(m) -> np.ndarray:
    """Symmetric part ``(m + m.T) / 2``."""
    a = as_square(m, "m")
    return (a + a.T) / 2.0


def psd_project(m, tol: float = PSD_TOL) -> np.ndarray:
    """Symmetrize and repair a nearly-PSD matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; any eigenvalue below
    ``-tol`` means the matrix is genuinely indefinite and raises.
    """
    s = symmetrize(m)
    try:
        w, v = np.linalg.eigh(s)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigendecomposition failed: {exc}") from exc
    if np.min(w) < -tol:
        raise ValueError(
            f"matrix is not PSD: smallest eigenvalue {np.min(w):.3e} < -{tol:.1e}"
        )
    if np.min(w) >= 0.0:
        return s
    w = np.clip(w, 0.0, None)
    return symmetrize((v * w) @ v.T)


def sqrtm_psd(m, tol: float = PSD_TOL) -> np.ndarray:
    """Unique symmetric PSD square root via spectral decomposition.

    Accepts symmetric PSD input up to ``tol`` slack (asymmetry is averaged
    away, eigenvalues in ``[-tol, 0)`` are clamped). Rank-deficient input
    is fine; indefinite input raises ``ValueError``.
    """
    s = psd_project(m, tol)
    try:
        w, v = np.linalg.eigh(s)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigendecomposition failed: {exc}") from exc
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return symmetrize(root)
