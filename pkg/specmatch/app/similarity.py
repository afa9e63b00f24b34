"""Spectral similarity matrices for graph matching.

All closed forms share one kernel evaluation: with eigenpairs (lambda_i, v_i)
of A and (mu_j, w_j) of B, D = V^T 1 and E = W^T 1, the similarity is
V K W^T for an n x n kernel K. Contour and KKT variants exist to
cross-check the closed forms.
"""
import logging
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg

from app.config import settings
from app.exceptions import (
    DimensionError,
    NormBoundViolated,
    NumericalFailure,
    ParamError,
    SizeError,
)
from app.schemas import ContourSpec, EigenDecomp, SimilarityMatrix
from app.spectral import as_sym_matrix, eig_sym, spectral_norm, stieltjes_m0

logger = logging.getLogger(__name__)

PANEL_NODES = 16
# |1^T R_B(z+i eta) 1 - 1^T R_B(z-i eta) 1| below this is a vanishing denominator
DENOMINATOR_FLOOR = 1e-12


def _check_inputs(a, b, eta: float) -> Tuple[np.ndarray, np.ndarray]:
    if not eta > 0.0:
        raise ParamError(f"eta must be positive, got {eta}")
    a = as_sym_matrix(a)
    b = as_sym_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"a has shape {a.shape} but b has shape {b.shape}")
    return a, b


def _gaps_sq(ea: EigenDecomp, eb: EigenDecomp, eta: float) -> np.ndarray:
    """(lambda_i - mu_j)^2 + eta^2"""
    diff = ea.eigenvalues[:, None] - eb.eigenvalues[None, :]
    return diff * diff + eta * eta


def _assemble(ea: EigenDecomp, eb: EigenDecomp, kernel: np.ndarray) -> np.ndarray:
    return ea.eigenvectors @ kernel @ eb.eigenvectors.T


def tau_weights(a, b, eta: float) -> np.ndarray:
    """Row normalizers tau_i = sum_j <w_j, 1>^2 / ((lambda_i - mu_j)^2 + eta^2), all positive"""
    a, b = _check_inputs(a, b, eta)
    ea, eb = eig_sym(a), eig_sym(b)
    return _tau_from(ea, eb, eta)


def _tau_from(ea: EigenDecomp, eb: EigenDecomp, eta: float) -> np.ndarray:
    e = eb.ones_overlap()
    return (e * e / _gaps_sq(ea, eb, eta)).sum(axis=1)


def grampa(a, b, eta: float) -> SimilarityMatrix:
    """X = sum_ij eta / ((lambda_i - mu_j)^2 + eta^2) <v_i,1><1,w_j> v_i w_j^T"""
    a, b = _check_inputs(a, b, eta)
    ea, eb = eig_sym(a), eig_sym(b)
    kernel = eta / _gaps_sq(ea, eb, eta) * np.outer(ea.ones_overlap(), eb.ones_overlap())
    return SimilarityMatrix(entries=_assemble(ea, eb, kernel), method="grampa", eta=eta)


def _rowqp_entries(ea: EigenDecomp, eb: EigenDecomp, eta: float, tau: np.ndarray) -> np.ndarray:
    kernel = np.outer(ea.ones_overlap() / tau, eb.ones_overlap()) / _gaps_sq(ea, eb, eta)
    return _assemble(ea, eb, kernel)


def rowqp(a, b, eta: float) -> SimilarityMatrix:
    """Minimizer of ||AX - XB||^2 + eta^2 ||X||^2 subject to X 1 = 1"""
    a, b = _check_inputs(a, b, eta)
    ea, eb = eig_sym(a), eig_sym(b)
    entries = _rowqp_entries(ea, eb, eta, _tau_from(ea, eb, eta))
    return SimilarityMatrix(entries=entries, method="rowqp", eta=eta)


def colqp(a, b, eta: float) -> SimilarityMatrix:
    """Column-constrained counterpart X^T 1 = 1, obtained by swapping the roles of A and B"""
    swapped = rowqp(b, a, eta)
    return SimilarityMatrix(entries=swapped.entries.T, method="colqp", eta=eta)


def rowqp_semicircle(a, b, eta: float) -> SimilarityMatrix:
    """Row-constrained form with tau_i replaced by its semicircle prediction (n / eta) Im m0(lambda_i + i eta)"""
    a, b = _check_inputs(a, b, eta)
    ea, eb = eig_sym(a), eig_sym(b)
    n = a.shape[0]
    tau = n / eta * np.imag(stieltjes_m0(ea.eigenvalues + 1j * eta))
    entries = _rowqp_entries(ea, eb, eta, tau)
    return SimilarityMatrix(entries=entries, method="rowqp_semicircle", eta=eta)


def common_structure(a, b, eta: float, s) -> SimilarityMatrix:
    """X = sum_ij eta / ((lambda_i - mu_j)^2 + eta^2) v_i v_i^T S w_j w_j^T.

    S = J gives grampa; S = m 1^T / eta with m = sum_i (<v_i,1> / tau_i) v_i
    gives rowqp.
    """
    a, b = _check_inputs(a, b, eta)
    s = np.asarray(s, dtype=np.float64)
    if s.shape != a.shape:
        raise DimensionError(f"S has shape {s.shape}, expected {a.shape}")
    if not np.all(np.isfinite(s)):
        raise ParamError("S has non-finite entries")
    ea, eb = eig_sym(a), eig_sym(b)
    projected = ea.eigenvectors.T @ s @ eb.eigenvectors
    kernel = eta / _gaps_sq(ea, eb, eta) * projected
    return SimilarityMatrix(entries=_assemble(ea, eb, kernel), method="common_structure", eta=eta)


def _rectangle_nodes(eta: float, spec: ContourSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and complex weights dz on the rectangle, counterclockwise"""
    r = spec.re_max
    h = spec.half_height(eta)
    corners = [complex(-r, -h), complex(r, -h), complex(r, h), complex(-r, h)]
    k = spec.points_per_side
    sizes = [PANEL_NODES] * (k // PANEL_NODES)
    if k % PANEL_NODES:
        sizes.append(k % PANEL_NODES)
    # side parameter on [0, 1]; each panel spans a share proportional to its node count
    ts, dts = [], []
    left = 0.0
    for size in sizes:
        x, w = leggauss(size)
        width = size / k
        ts.append(left + width * (x + 1.0) / 2.0)
        dts.append(width * w / 2.0)
        left += width
    t = np.concatenate(ts)
    dt = np.concatenate(dts)

    nodes, weights = [], []
    for side in range(4):
        start, end = corners[side], corners[(side + 1) % 4]
        nodes.append(start + (end - start) * t)
        weights.append((end - start) * dt)
    return np.concatenate(nodes), np.concatenate(weights)


def _resolvent_ones(m: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Rows R_M(z) 1 for every z in zs, solved in stacked batches"""
    n = m.shape[0]
    batch = max(1, min(64, (1 << 22) // (n * n)))
    ones = np.ones((n, 1), dtype=np.complex128)
    eye = np.eye(n)
    out = np.empty((zs.size, n), dtype=np.complex128)
    for start in range(0, zs.size, batch):
        chunk = zs[start:start + batch]
        shifted = m[None, :, :] - chunk[:, None, None] * eye[None, :, :]
        rhs = np.broadcast_to(ones, (chunk.size, n, 1))
        try:
            out[start:start + chunk.size] = np.linalg.solve(shifted, rhs)[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"resolvent solve failed on the contour: {exc}") from exc
    return out


def _contour_setup(a, b, eta: float, spec: ContourSpec):
    a, b = _check_inputs(a, b, eta)
    bound = settings.CONTOUR_NORM_BOUND
    norm_a = spectral_norm(a)
    if norm_a > bound:
        raise NormBoundViolated(f"||A|| = {norm_a:.6g} exceeds {bound}; rescale A first")
    if spec.re_max <= norm_a:
        raise ParamError(f"contour half-width {spec.re_max} does not enclose the spectrum of A")
    if spec.half_height(eta) >= eta:
        raise ParamError("contour half-height must be below eta")
    zs, dz = _rectangle_nodes(eta, spec)
    logger.debug("contour quadrature with %d nodes, n=%d", zs.size, a.shape[0])
    return a, b, zs, dz


def grampa_contour(a, b, eta: float, spec: ContourSpec = None) -> SimilarityMatrix:
    """X = (1 / 2 pi) Re of the contour integral of R_A(z) J R_B(z + i eta)"""
    spec = spec or ContourSpec(points_per_side=settings.CONTOUR_POINTS_PER_SIDE)
    a, b, zs, dz = _contour_setup(a, b, eta, spec)
    u = _resolvent_ones(a, zs)
    t = _resolvent_ones(b, zs + 1j * eta)
    integral = (u * dz[:, None]).T @ t
    entries = np.real(integral) / (2.0 * np.pi)
    return SimilarityMatrix(entries=entries, method="grampa_contour", eta=eta)


def rowqp_contour(a, b, eta: float, spec: ContourSpec = None) -> SimilarityMatrix:
    """Row-constrained form with the extra factor F(z) = 2i / (1^T R_B(z+i eta) 1 - 1^T R_B(z-i eta) 1)"""
    spec = spec or ContourSpec(points_per_side=settings.CONTOUR_POINTS_PER_SIDE)
    a, b, zs, dz = _contour_setup(a, b, eta, spec)
    u = _resolvent_ones(a, zs)
    t_plus = _resolvent_ones(b, zs + 1j * eta)
    t_minus = _resolvent_ones(b, zs - 1j * eta)
    denominator = t_plus.sum(axis=1) - t_minus.sum(axis=1)
    if np.min(np.abs(denominator)) < DENOMINATOR_FLOOR:
        raise NumericalFailure("F(z) denominator vanishes at a quadrature node")
    factor = 2j / denominator
    integral = (u * (factor * dz)[:, None]).T @ t_plus
    entries = np.real(integral) / (2.0 * np.pi)
    return SimilarityMatrix(entries=entries, method="rowqp_contour", eta=eta)


def _kkt_hessian(a: np.ndarray, b: np.ndarray, eta: float) -> np.ndarray:
    """L^T L + eta^2 I for L(X) = AX - XB acting on column-major vec(X)"""
    n = a.shape[0]
    if n > settings.ORACLE_MAX_N:
        raise SizeError(f"dense KKT oracle is limited to n <= {settings.ORACLE_MAX_N}, got {n}")
    if 2 * n > settings.ORACLE_MAX_N:
        logger.warning("dense KKT oracle at n=%d builds a %d x %d system", n, n * n, n * n)
    eye = np.eye(n)
    op = np.kron(eye, a) - np.kron(b.T, eye)
    return op.T @ op + eta * eta * np.eye(n * n)


def kkt_oracle_regqp(a, b, eta: float) -> SimilarityMatrix:
    """Dense solve of min ||AX - XB||^2 + eta^2 ||X||^2 subject to 1^T X 1 = n"""
    a, b = _check_inputs(a, b, eta)
    n = a.shape[0]
    hessian = _kkt_hessian(a, b, eta)
    try:
        x = linalg.solve(hessian, np.ones(n * n), assume_a="pos")
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f"KKT system is singular: {exc}") from exc
    x *= n / x.sum()
    return SimilarityMatrix(entries=x.reshape((n, n), order="F"), method="kkt_regqp", eta=eta)


def kkt_oracle_rowqp(a, b, eta: float) -> SimilarityMatrix:
    """Dense solve of min ||AX - XB||^2 + eta^2 ||X||^2 subject to X 1 = 1"""
    a, b = _check_inputs(a, b, eta)
    n = a.shape[0]
    hessian = _kkt_hessian(a, b, eta)
    # (C vec X)_i = sum_j X_ij
    constraints = np.kron(np.ones((1, n)), np.eye(n))
    system = np.block([
        [2.0 * hessian, constraints.T],
        [constraints, np.zeros((n, n))],
    ])
    rhs = np.concatenate([np.zeros(n * n), np.ones(n)])
    try:
        solution = linalg.solve(system, rhs, assume_a="sym")
    except linalg.LinAlgError as exc:
        raise NumericalFailure(f"KKT system is singular: {exc}") from exc
    x = solution[: n * n].reshape((n, n), order="F")
    return SimilarityMatrix(entries=x, method="kkt_rowqp", eta=eta)
