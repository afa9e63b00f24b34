"""Rounding a similarity matrix to a vertex correspondence"""
import itertools
import math
from typing import Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.config import settings
from app.exceptions import DimensionError, InvalidMatrix, SizeError
from app.schemas import Matching, Permutation, SimilarityMatrix

MatrixLike = Union[SimilarityMatrix, np.ndarray]


def _scores(x: MatrixLike) -> np.ndarray:
    entries = x.entries if isinstance(x, SimilarityMatrix) else np.asarray(x, dtype=np.float64)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise InvalidMatrix(f"expected a square score matrix, got shape {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise InvalidMatrix("score matrix has non-finite entries")
    return entries


def lap_round(x: MatrixLike) -> Matching:
    """Permutation maximizing sum_i X[i, pi(i)] (Jonker-Volgenant)"""
    scores = _scores(x)
    rows, cols = linear_sum_assignment(scores, maximize=True)
    mapping = np.empty(scores.shape[0], dtype=np.int64)
    mapping[rows] = cols
    return Matching(map=mapping, bijective=True)


def greedy_round(x: MatrixLike) -> Matching:
    """Take the largest remaining entry, retire its row and column, repeat"""
    scores = _scores(x)
    n = scores.shape[0]
    # stable sort on the negated row-major flattening: ties go to the lower row, then column
    order = np.argsort(-scores, axis=None, kind="stable")
    mapping = np.full(n, -1, dtype=np.int64)
    row_free = np.ones(n, dtype=bool)
    col_free = np.ones(n, dtype=bool)
    assigned = 0
    for flat in order:
        i, j = divmod(int(flat), n)
        if row_free[i] and col_free[j]:
            mapping[i] = j
            row_free[i] = col_free[j] = False
            assigned += 1
            if assigned == n:
                break
    return Matching(map=mapping, bijective=True)


def argmax_round(x: MatrixLike) -> Matching:
    """Row-wise argmax thresholding; may collide, in which case bijective is False"""
    scores = _scores(x)
    mapping = np.argmax(scores, axis=1).astype(np.int64)
    bijective = np.unique(mapping).size == mapping.size
    return Matching(map=mapping, bijective=bool(bijective))


def brute_force_round(x: MatrixLike) -> Matching:
    """Exhaustive maximum over all n! permutations, lexicographically smallest on ties"""
    scores = _scores(x)
    n = scores.shape[0]
    if n > settings.BRUTE_FORCE_MAX_N:
        raise SizeError(f"brute force is limited to n <= {settings.BRUTE_FORCE_MAX_N}, got {n}")
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    values = scores[np.arange(n)[None, :], perms].sum(axis=1)
    best = perms[int(np.argmax(values))]
    return Matching(map=best, bijective=True)


def assignment_value(x: MatrixLike, matching: Matching) -> float:
    """<X, Pi> for the matched pairs; unassigned rows contribute nothing"""
    scores = _scores(x)
    if matching.n != scores.shape[0]:
        raise DimensionError(f"matching has size {matching.n}, matrix has size {scores.shape[0]}")
    return math.fsum(float(scores[i, j]) for i, j in enumerate(matching.map) if j >= 0)


def overlap(candidate: Matching, truth: Permutation) -> float:
    """Fraction of rows matched to their true partner"""
    if candidate.n != truth.n:
        raise DimensionError(f"matching has size {candidate.n}, truth has size {truth.n}")
    return float(np.mean(candidate.map == truth.targets))
