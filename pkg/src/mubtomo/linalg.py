"""Small dense complex linear algebra used throughout the package.

Everything here works on plain ``numpy`` arrays of shape ``(D, D)`` with
``D <= 8``. Eigendecompositions go through LAPACK (``numpy.linalg.eigh``);
the wrappers add the Hermiticity checks and eigenvalue clipping that the
fidelity and reconstruction code rely on.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    return a


def _check_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")


def dagger(m) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def hermiticity_error(m) -> float:
    a = np.asarray(m)
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(m)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and hermiticity_error(a) <= tol


def eig_hermitian(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Args:
        m: square Hermitian matrix.
        tol: maximum allowed entrywise ``|m - m^dagger|``.

    Returns:
        ``(eigenvalues, eigenvectors)`` with real eigenvalues sorted in
        descending order and the matching eigenvectors as columns, so that
        ``m == V @ diag(w) @ V^dagger``.

    Raises:
        ValueError: if ``m`` is not square.
        NotHermitianError: if ``m`` deviates from Hermitian by more than ``tol``.
    """
    a = as_matrix(m)
    _check_square(a)
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |m - m^H| = {err:.3e})")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def sqrt_psd(m, tol: float = PSD_TOL) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-tol, 0)`` are treated as round-off and clipped to zero.

    Raises:
        NotPSDError: if an eigenvalue is below ``-tol``.
    """
    w, v = eig_hermitian(m)
    if w[-1] < -tol:
        raise NotPSDError(f"matrix is not positive semidefinite (min eigenvalue {w[-1]:.3e})")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ v.conj().T


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def trace_product(a, b) -> complex:
    """``Tr[a @ b]`` computed as ``sum_ij a[i, j] * b[j, i]``."""
    a = as_matrix(a)
    b = as_matrix(b)
    _check_square(a)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.sum(a * b.T))


def project_to_physical(m) -> np.ndarray:
    """Nearest-in-spectrum density matrix.

    Hermitizes ``m``, clips negative eigenvalues to zero and rescales to unit
    trace. Raises ``ValueError`` when nothing positive survives the clipping.
    """
    a = as_matrix(m)
    _check_square(a)
    h = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 0.0:
        raise ValueError("matrix has no positive spectral weight; cannot normalize")
    out = (v * (w / total)) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def hermitian_basis(dim: int) -> np.ndarray:
    """Orthonormal basis of Hermitian ``dim x dim`` matrices.

    Element 0 is ``I / sqrt(dim)``; the remaining ``dim**2 - 1`` elements are
    traceless generalized Gell-Mann matrices normalized so that
    ``Tr[G_a G_b] = delta_ab``. Returned as an array of shape
    ``(dim**2, dim, dim)``.
    """
    mats = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    for j in range(dim):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            anti = np.zeros((dim, dim), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2)
            anti[k, j] = 1j / np.sqrt(2)
            mats.extend([sym, anti])
    for l in range(1, dim):
        diag = np.zeros(dim)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return np.array(mats)


def hermitian_coordinates(m, basis: np.ndarray | None = None) -> np.ndarray:
    """Real coordinates ``Tr[G_a m]`` of ``m`` in an orthonormal Hermitian basis."""
    a = as_matrix(m)
    if basis is None:
        basis = hermitian_basis(a.shape[0])
    return np.einsum("kij,ji->k", basis, a).real
