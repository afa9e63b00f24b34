"""Similarity -> rounding -> diagnostics pipeline"""
import logging
import time
from typing import Callable, Dict, Optional

import numpy as np

from app.config import settings
from app.diagnostics import dominance_report, qap_objective
from app.exceptions import ParamError
from app.rounding import argmax_round, greedy_round, lap_round, overlap
from app.schemas import MatchReport, Matching, Permutation, SimilarityMatrix
from app import similarity

logger = logging.getLogger(__name__)

SIMILARITY_METHODS: Dict[str, Callable[..., SimilarityMatrix]] = {
    "grampa": similarity.grampa,
    "rowqp": similarity.rowqp,
    "colqp": similarity.colqp,
    "rowqp_semicircle": similarity.rowqp_semicircle,
    "grampa_contour": similarity.grampa_contour,
    "rowqp_contour": similarity.rowqp_contour,
    "kkt_regqp": similarity.kkt_oracle_regqp,
    "kkt_rowqp": similarity.kkt_oracle_rowqp,
}

ROUNDERS: Dict[str, Callable[[SimilarityMatrix], Matching]] = {
    "lap": lap_round,
    "greedy": greedy_round,
    "argmax": argmax_round,
}

# Methods whose rows are normalized to sum to one; their diagonal is compared after scaling by n
CONSTRAINED_METHODS = frozenset({"rowqp", "colqp", "rowqp_semicircle", "rowqp_contour", "kkt_rowqp"})


class MatchingPipeline:
    """Builds a similarity matrix for (A, B) and rounds it to a matching"""

    def __init__(self, method: str = "grampa", rounder: str = "lap", eta: Optional[float] = None):
        if method not in SIMILARITY_METHODS:
            raise ParamError(f"unknown method {method!r}; choose from {sorted(SIMILARITY_METHODS)}")
        if rounder not in ROUNDERS:
            raise ParamError(f"unknown rounder {rounder!r}; choose from {sorted(ROUNDERS)}")
        self.method = method
        self.rounder = rounder
        self.eta = settings.DEFAULT_ETA if eta is None else eta

    @property
    def constrained(self) -> bool:
        return self.method in CONSTRAINED_METHODS

    def similarity(self, a, b) -> SimilarityMatrix:
        """Similarity matrix for the configured method"""
        return SIMILARITY_METHODS[self.method](a, b, self.eta)

    def round(self, x: SimilarityMatrix, rounder: Optional[str] = None) -> Matching:
        return ROUNDERS[rounder or self.rounder](x)

    def report(
        self,
        a,
        b,
        x: SimilarityMatrix,
        matching: Matching,
        truth: Optional[Permutation] = None,
        sigma: float = 0.0,
    ) -> MatchReport:
        """Score a matching against the truth, or against itself when no truth is known"""
        reference = truth
        if reference is None and matching.bijective:
            reference = matching.as_permutation()

        dominance = None
        if reference is not None:
            dominance = dominance_report(x, reference, sigma, constrained=self.constrained)

        objective = qap_objective(a, b, matching.as_permutation()) if matching.bijective else None
        return MatchReport(
            similarity=x,
            matching=matching,
            overlap=overlap(matching, truth) if truth is not None else None,
            dominance=dominance,
            qap_objective=objective,
        )

    def run(self, a, b, truth: Optional[Permutation] = None, sigma: float = 0.0) -> MatchReport:
        """
        Full pipeline for one pair.
        Returns the similarity, the matching and its diagnostics.
        """
        start_time = time.perf_counter()
        x = self.similarity(a, b)
        matching = self.round(x)
        elapsed_ms = int(round((time.perf_counter() - start_time) * 1000))
        logger.debug("%s/%s on n=%d took %d ms", self.method, self.rounder, x.n, elapsed_ms)

        result = self.report(a, b, x, matching, truth=truth, sigma=sigma)
        return result.model_copy(update={"runtime_ms": elapsed_ms})


def matching_lines(matching: Matching) -> str:
    """`i j` per row, the CLI matching format"""
    return "\n".join(f"{i} {int(j)}" for i, j in zip(np.arange(matching.n), matching.map))
