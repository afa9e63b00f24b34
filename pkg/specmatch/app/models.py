"""Correlated random graph and Wigner matrix pair generators"""
import math
from typing import List, Literal, Tuple

import numpy as np

from app.exceptions import DimensionError, ModelParamError
from app.schemas import CorrelatedPair, Permutation, TruthMode


def _streams(seed: int) -> List[np.random.Generator]:
    """Independent counter-based generators for one instance.

    Roles are fixed (A draws, B draws, truth, parent graph) so every sample
    is keyed by (seed, role, position) regardless of which construction runs.
    """
    if seed < 0:
        raise ModelParamError(f"seed must be nonnegative, got {seed}")
    children = np.random.SeedSequence(seed).spawn(4)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def _symmetric_from_upper(n: int, values: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((n, n))
    rows, cols = np.triu_indices(n, k)
    out[rows, cols] = values
    out[cols, rows] = values
    return out


def _draw_truth(n: int, rng: np.random.Generator, truth_mode: TruthMode) -> Permutation:
    if truth_mode == "identity":
        return Permutation.identity(n)
    if truth_mode == "random":
        return Permutation(targets=rng.permutation(n))
    raise ModelParamError(f"unknown truth_mode {truth_mode!r}")


def noise_params(n: int, p: float, s: float) -> Tuple[float, float, float]:
    """Effective noise (sigma_emp, sigma_thm) and sparsity d = n p (1 - p).

    sigma_thm also carries the (ln n)^7 / d sparsity floor, with the
    unspecified absolute constant taken as 1.
    """
    if not 0.0 < p < 1.0:
        raise ModelParamError(f"p must lie in (0, 1), got {p}")
    if not 0.0 <= s <= 1.0:
        raise ModelParamError(f"s must lie in [0, 1], got {s}")
    d = n * p * (1.0 - p)
    sigma_emp_sq = (1.0 - s) / (1.0 - p)
    sigma_thm_sq = max(sigma_emp_sq, math.log(n) ** 7 / d)
    return math.sqrt(sigma_emp_sq), math.sqrt(sigma_thm_sq), d


def center_scale(raw, p: float) -> np.ndarray:
    """Center and rescale a 0/1 adjacency: (raw - p) / sqrt(n p (1 - p)), zero diagonal"""
    if not 0.0 < p < 1.0:
        raise ModelParamError(f"p must lie in (0, 1), got {p}")
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        raise DimensionError(f"adjacency must be square, got shape {raw.shape}")
    if np.any(np.diag(raw) != 0.0):
        raise ModelParamError("adjacency must have zero diagonal")
    if not np.all((raw == 0.0) | (raw == 1.0)):
        raise ModelParamError("adjacency entries must be 0 or 1")
    n = raw.shape[0]
    out = (raw - p) / math.sqrt(n * p * (1.0 - p))
    np.fill_diagonal(out, 0.0)
    return out


def permute_conjugate(m, perm: Permutation) -> np.ndarray:
    """Relabel both axes: result[i][j] = m[perm(i)][perm(j)]"""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape != (perm.n, perm.n):
        raise DimensionError(f"matrix shape {m.shape} does not match permutation of size {perm.n}")
    return m[np.ix_(perm.targets, perm.targets)]


def gen_er_pair(
    n: int,
    p: float,
    s: float,
    seed: int,
    truth_mode: TruthMode = "random",
    construction: Literal["conditional", "parent"] = "conditional",
) -> CorrelatedPair:
    """Correlated Erdos-Renyi pair with marginal edge density p and retention s"""
    if n < 2:
        raise ModelParamError(f"n must be at least 2, got {n}")
    if not 0.0 < p < 1.0:
        raise ModelParamError(f"p must lie in (0, 1), got {p}")
    if not 0.0 < s <= 1.0:
        raise ModelParamError(f"s must lie in (0, 1], got {s}")
    q_absent = p * (1.0 - s) / (1.0 - p)
    if q_absent > 1.0:
        raise ModelParamError(f"p(1-s)/(1-p) = {q_absent} exceeds 1")

    rng_a, rng_b, rng_truth, rng_parent = _streams(seed)
    pairs = n * (n - 1) // 2
    if construction == "conditional":
        a_edges = rng_a.random(pairs) < p
        u_b = rng_b.random(pairs)
        b_edges = np.where(a_edges, u_b < s, u_b < q_absent)
    elif construction == "parent":
        q_parent = p / s
        if q_parent > 1.0:
            raise ModelParamError(f"parent density p/s = {q_parent} exceeds 1")
        parent = rng_parent.random(pairs) < q_parent
        a_edges = parent & (rng_a.random(pairs) < s)
        b_edges = parent & (rng_b.random(pairs) < s)
    else:
        raise ModelParamError(f"unknown construction {construction!r}")

    truth = _draw_truth(n, rng_truth, truth_mode)
    a = center_scale(_symmetric_from_upper(n, a_edges.astype(np.float64), 1), p)
    b_prime = center_scale(_symmetric_from_upper(n, b_edges.astype(np.float64), 1), p)
    b = permute_conjugate(b_prime, truth.inverse())

    sigma_emp, sigma_thm, d = noise_params(n, p, s)
    return CorrelatedPair(
        a=a,
        b=b,
        truth=truth,
        model="erdos_renyi",
        n=n,
        p=p,
        s=s,
        sigma_emp=sigma_emp,
        sigma_thm=sigma_thm,
        d=d,
        seed=seed,
    )


def gen_gaussian_pair(
    n: int,
    sigma: float,
    seed: int,
    truth_mode: TruthMode = "random",
) -> CorrelatedPair:
    """Correlated Gaussian Wigner pair b' = (a + sigma z) / sqrt(1 + sigma^2), entry variance 1/n"""
    if n < 2:
        raise ModelParamError(f"n must be at least 2, got {n}")
    if not 0.0 <= sigma <= 1.0:
        raise ModelParamError(f"sigma must lie in [0, 1], got {sigma}")

    rng_a, rng_b, rng_truth, _ = _streams(seed)
    entries = n * (n + 1) // 2
    scale = 1.0 / math.sqrt(n)
    a_vals = rng_a.standard_normal(entries) * scale
    z_vals = rng_b.standard_normal(entries) * scale

    truth = _draw_truth(n, rng_truth, truth_mode)
    a = _symmetric_from_upper(n, a_vals, 0)
    b_prime = _symmetric_from_upper(n, (a_vals + sigma * z_vals) / math.sqrt(1.0 + sigma * sigma), 0)
    b = permute_conjugate(b_prime, truth.inverse())

    return CorrelatedPair(
        a=a,
        b=b,
        truth=truth,
        model="gaussian",
        n=n,
        p=None,
        s=None,
        sigma_emp=sigma,
        sigma_thm=sigma,
        d=float(n),
        seed=seed,
    )
