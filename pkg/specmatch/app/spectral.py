"""Dense symmetric spectral toolkit: eigendecomposition, resolvents, semicircle law"""
from typing import Iterable, Literal, Union

import numpy as np
from scipy import linalg
from sklearn.utils.validation import check_symmetric

from app.exceptions import (
    BranchCutViolation,
    DomainError,
    InvalidMatrix,
    NumericalFailure,
    SingularShift,
)
from app.schemas import EigenDecomp

ComplexLike = Union[complex, float, np.ndarray]

# Real spectral parameters closer than this to an eigenvalue are singular
SINGULAR_SHIFT_TOL = 1e-14


def as_sym_matrix(m) -> np.ndarray:
    """Validate a dense real symmetric matrix and return a read-only float64 copy"""
    try:
        arr = np.array(m, dtype=np.float64, copy=True)
    except (TypeError, ValueError) as exc:
        raise InvalidMatrix(f"not a real matrix: {exc}") from exc
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidMatrix(f"expected a nonempty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix("matrix has non-finite entries")
    try:
        arr = check_symmetric(arr, tol=1e-10, raise_exception=True)
    except ValueError as exc:
        raise InvalidMatrix(str(exc)) from exc
    # allclose also applies a relative tolerance
    if np.max(np.abs(arr - arr.T)) > 1e-10:
        raise InvalidMatrix("matrix is not symmetric within 1e-10")
    # exact symmetry from here on
    arr = np.triu(arr) + np.triu(arr, 1).T
    arr.setflags(write=False)
    return arr


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column positive; argmax keeps the lowest index on ties
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eig_sym(a) -> EigenDecomp:
    """Eigendecomposition A = sum_k lambda_k v_k v_k^T with ascending eigenvalues"""
    a = as_sym_matrix(a)
    try:
        eigenvalues, eigenvectors = linalg.eigh(a, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolver did not converge: {exc}") from exc
    return EigenDecomp(eigenvalues=eigenvalues, eigenvectors=_fix_signs(eigenvectors))


def spectral_norm(a) -> float:
    """Operator norm max_k |lambda_k|"""
    return float(np.max(np.abs(eig_sym(a).eigenvalues)))


def resolvent(a, z: complex) -> np.ndarray:
    """R_A(z) = (A - zI)^{-1} as a complex symmetric matrix"""
    a = as_sym_matrix(a)
    z = complex(z)
    n = a.shape[0]
    if z.imag == 0.0:
        gaps = np.abs(eig_sym(a).eigenvalues - z.real)
        if np.min(gaps) <= SINGULAR_SHIFT_TOL:
            raise SingularShift(f"z={z.real} coincides with an eigenvalue of A")
    shifted = a.astype(np.complex128) - z * np.eye(n)
    try:
        r = linalg.solve(shifted, np.eye(n, dtype=np.complex128), assume_a="sym", check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularShift(f"A - zI is singular at z={z}") from exc
    r = (r + r.T) / 2.0
    if not np.all(np.isfinite(r)):
        raise NumericalFailure(f"resolvent at z={z} is not finite")
    return r


def minor_resolvent(a, z: complex, removed: Iterable[int]) -> np.ndarray:
    """Resolvent of A with the rows and columns in `removed` zeroed out.

    The result is block diagonal: -1/z on the removed indices and the
    resolvent of the remaining minor elsewhere.
    """
    a = np.array(as_sym_matrix(a))
    idx = sorted(set(int(i) for i in removed))
    a[idx, :] = 0.0
    a[:, idx] = 0.0
    return resolvent(a, z)


def _sqrt_z2_minus_4(z: np.ndarray) -> np.ndarray:
    # principal roots give the branch cut on [-2, 2] and sqrt(z^2 - 4) ~ z at infinity
    return np.sqrt(z - 2.0) * np.sqrt(z + 2.0)


def stieltjes_m0(z: ComplexLike) -> ComplexLike:
    """Stieltjes transform of the semicircle law, m0(z) = (-z + sqrt(z^2 - 4)) / 2"""
    zs = np.asarray(z, dtype=np.complex128)
    on_cut = (zs.imag == 0.0) & (np.abs(zs.real) <= 2.0)
    if np.any(on_cut):
        raise BranchCutViolation("m0 is undefined on [-2, 2]; use m0_boundary")
    m = (-zs + _sqrt_z2_minus_4(zs)) / 2.0
    return complex(m) if m.ndim == 0 else m


def m0_boundary(x: float, side: Literal["plus", "minus"] = "plus") -> complex:
    """Continuous extension of m0 onto [-2, 2] from the upper or lower half plane"""
    x = float(x)
    if abs(x) > 2.0:
        raise DomainError(f"|x| = {abs(x)} > 2 is off the support of the semicircle")
    if side not in ("plus", "minus"):
        raise DomainError(f"side must be 'plus' or 'minus', got {side!r}")
    plus = complex(-x / 2.0, np.sqrt(max(4.0 - x * x, 0.0)) / 2.0)
    return plus if side == "plus" else plus.conjugate()


def semicircle_density(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """rho(x) = sqrt(4 - x^2) / (2 pi) on [-2, 2], zero elsewhere"""
    xs = np.asarray(x, dtype=np.float64)
    rho = np.sqrt(np.clip(4.0 - xs * xs, 0.0, None)) / (2.0 * np.pi)
    rho = np.where(np.abs(xs) <= 2.0, rho, 0.0)
    return float(rho) if rho.ndim == 0 else rho
