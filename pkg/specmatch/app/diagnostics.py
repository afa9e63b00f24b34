"""Diagnostics: diagonal dominance, predicted diagonal size, local-law errors"""
import logging
import math

import numpy as np

from app.exceptions import DimensionError, DomainError, ParamError
from app.models import permute_conjugate
from app.schemas import (
    CorrelatedPair,
    DominanceReport,
    LocalLawReport,
    Permutation,
    SimilarityMatrix,
)
from app.spectral import as_sym_matrix, resolvent, spectral_norm, stieltjes_m0

logger = logging.getLogger(__name__)

# ||A - Pi B Pi^T|| / sigma above this suggests the noise model is off
DIFFNORM_WARN_RATIO = 4.0


def dominance_report(
    x: SimilarityMatrix,
    truth: Permutation,
    sigma: float,
    constrained: bool = False,
) -> DominanceReport:
    """Compare true-pair scores X[k, pi(k)] against every impostor score and the predicted diagonal"""
    if x.n != truth.n:
        raise DimensionError(f"similarity has size {x.n}, truth has size {truth.n}")
    if not 0.0 <= sigma <= 1.0:
        raise ParamError(f"sigma must lie in [0, 1], got {sigma}")

    n = x.n
    rows = np.arange(n)
    true_scores = x.entries[rows, truth.targets]
    min_true = float(np.min(true_scores))
    if n > 1:
        impostors = np.ones((n, n), dtype=bool)
        impostors[rows, truth.targets] = False
        max_off = float(np.max(x.entries[impostors]))
        margin = min_true - max_off
    else:
        # no off-diagonal entries: dominance holds vacuously
        max_off = -math.inf
        margin = math.inf

    diag_mean = float(np.mean(true_scores))
    if constrained:
        diag_mean *= n
        pred_diag = 4.0 * (1.0 - sigma * sigma) / (math.pi * x.eta)
    else:
        pred_diag = (1.0 - sigma * sigma) / x.eta
    diag_rel_err = abs(diag_mean - pred_diag) / pred_diag if pred_diag > 0.0 else math.inf

    return DominanceReport(
        min_true=min_true,
        max_off=max_off,
        margin=margin,
        separated=margin > 0,
        pred_diag=pred_diag,
        diag_mean=diag_mean,
        diag_rel_err=diag_rel_err,
    )


def locallaw_report(a, z: complex) -> LocalLawReport:
    """Entrywise, row-sum and total-sum deviations of R_A(z) from the semicircle prediction"""
    z = complex(z)
    if abs(z.real) > 3.0 or not 0.0 < abs(z.imag) <= 1.0:
        raise DomainError(f"z = {z} is outside |Re z| <= 3, 0 < |Im z| <= 1")
    a = as_sym_matrix(a)
    n = a.shape[0]
    r = resolvent(a, z)
    m = stieltjes_m0(z)

    diag = np.diag(r)
    off = r - np.diag(diag)
    rowsums = r.sum(axis=1)
    return LocalLawReport(
        z=z,
        entrywise_off_max=float(np.max(np.abs(off))),
        entrywise_diag_max=float(np.max(np.abs(diag - m))),
        rowsum_max=float(np.max(np.abs(rowsums))),
        totalsum_err=float(abs(rowsums.sum() - n * m) / n),
    )


def trace_m0_check(a, z: complex) -> float:
    """|Tr R_A(z) / n - m0(z)|"""
    a = as_sym_matrix(a)
    r = resolvent(a, z)
    return float(abs(np.trace(r) / a.shape[0] - stieltjes_m0(complex(z))))


def qap_objective(a, b, perm: Permutation) -> float:
    """<A, Pi B Pi^T>, the quadratic assignment objective of a candidate"""
    a = as_sym_matrix(a)
    return float(np.sum(a * permute_conjugate(as_sym_matrix(b), perm)))


def qap_residual(a, b, perm: Permutation) -> float:
    """||A Pi - Pi B||_F^2"""
    a, b = as_sym_matrix(a), as_sym_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"a has shape {a.shape} but b has shape {b.shape}")
    pi = perm.matrix()
    if pi.shape != a.shape:
        raise DimensionError(f"permutation of size {perm.n} does not match n={a.shape[0]}")
    diff = a @ pi - pi @ b
    return float(np.sum(diff * diff))


def edge_correlation(pair: CorrelatedPair) -> float:
    """n * mean over i<j of a_ij b_pi(i)pi(j); close to 1 - sigma^2 for a centered pair"""
    aligned = permute_conjugate(pair.b, pair.truth)
    rows, cols = np.triu_indices(pair.n, 1)
    return float(pair.n * np.mean(pair.a[rows, cols] * aligned[rows, cols]))


def diffnorm_ratio(pair: CorrelatedPair) -> float:
    """||a - Pi b Pi^T|| / sigma_emp; zero-noise pairs give 0"""
    diff = spectral_norm(pair.a - permute_conjugate(pair.b, pair.truth))
    if pair.sigma_emp == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    ratio = diff / pair.sigma_emp
    if ratio > DIFFNORM_WARN_RATIO:
        logger.warning("noise norm ratio %.3f exceeds %.1f (n=%d, seed=%d)", ratio, DIFFNORM_WARN_RATIO, pair.n, pair.seed)
    return ratio
