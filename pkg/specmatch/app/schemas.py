"""Pydantic schemas for the domain types"""
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _frozen_array(value: Any, dtype) -> np.ndarray:
    arr = np.array(value, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class ArrayModel(BaseModel):
    """Base for frozen models carrying numpy payloads"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


SimilarityMethod = Literal[
    "grampa",
    "rowqp",
    "colqp",
    "rowqp_semicircle",
    "common_structure",
    "grampa_contour",
    "rowqp_contour",
    "kkt_regqp",
    "kkt_rowqp",
]
SweepMethod = Literal["grampa", "rowqp", "colqp", "rowqp_semicircle"]
Rounder = Literal["lap", "greedy", "argmax"]
ModelTag = Literal["erdos_renyi", "gaussian"]
TruthMode = Literal["identity", "random"]


class EigenDecomp(ArrayModel):
    """Eigenpairs of a symmetric matrix, eigenvalues ascending"""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @field_validator("eigenvalues")
    @classmethod
    def validate_eigenvalues(cls, v):
        return _frozen_array(v, np.float64)

    @field_validator("eigenvectors")
    @classmethod
    def validate_eigenvectors(cls, v):
        return _frozen_array(v, np.float64)

    @property
    def n(self) -> int:
        return int(self.eigenvalues.shape[0])

    def ones_overlap(self) -> np.ndarray:
        """Projections <v_k, 1> of the all-ones vector on each eigenvector"""
        return self.eigenvectors.sum(axis=0)


class Permutation(ArrayModel):
    """Bijection on {0..n-1}; targets[i] = pi(i)"""

    targets: np.ndarray

    @field_validator("targets", mode="before")
    @classmethod
    def validate_targets(cls, v):
        arr = _frozen_array(v, np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("targets must be a nonempty vector")
        if not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise ValueError("targets is not a bijection on {0..n-1}")
        return arr

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(targets=np.arange(n))

    @property
    def n(self) -> int:
        return int(self.targets.shape[0])

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.targets)
        inv[self.targets] = np.arange(self.n)
        return Permutation(targets=inv)

    def matrix(self) -> np.ndarray:
        """Permutation matrix with (P)_{i, pi(i)} = 1"""
        mat = np.zeros((self.n, self.n))
        mat[np.arange(self.n), self.targets] = 1.0
        return mat


class CorrelatedPair(ArrayModel):
    """A generated (A, B, truth) instance with its model metadata"""

    a: np.ndarray
    b: np.ndarray
    truth: Permutation
    model: ModelTag
    n: int = Field(..., ge=2)
    p: Optional[float] = None
    s: Optional[float] = None
    sigma_emp: float = Field(..., ge=0.0)
    sigma_thm: float = Field(..., ge=0.0)
    d: float = Field(..., gt=0.0)
    seed: int

    @field_validator("a", "b")
    @classmethod
    def validate_matrix(cls, v):
        return _frozen_array(v, np.float64)

    @model_validator(mode="after")
    def validate_shapes(self):
        shape = (self.n, self.n)
        if self.a.shape != shape or self.b.shape != shape or self.truth.n != self.n:
            raise ValueError("a, b and truth must all have dimension n")
        return self


class ContourSpec(BaseModel):
    """Rectangular contour with vertices +-re_max +- i*im_half"""

    re_max: float = Field(default=3.0, gt=0.0)
    im_half: Optional[float] = Field(default=None, gt=0.0)  # None means eta/2
    points_per_side: int = Field(default=256, ge=16)

    def half_height(self, eta: float) -> float:
        return self.im_half if self.im_half is not None else eta / 2.0


class SimilarityMatrix(ArrayModel):
    """Similarity score matrix with its provenance"""

    entries: np.ndarray
    method: SimilarityMethod
    eta: float = Field(..., gt=0.0)

    @field_validator("entries")
    @classmethod
    def validate_entries(cls, v):
        arr = _frozen_array(v, np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("similarity matrix must be square")
        if not np.all(np.isfinite(arr)):
            raise ValueError("similarity matrix has non-finite entries")
        return arr

    @model_validator(mode="after")
    def validate_feasibility(self):
        if self.method in ("rowqp", "kkt_rowqp"):
            if np.max(np.abs(self.entries.sum(axis=1) - 1.0)) > 1e-9:
                raise ValueError(f"{self.method} output violates the row-sum constraint")
        return self

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])


class Matching(ArrayModel):
    """Row-to-column correspondence; -1 marks an unassigned row"""

    map: np.ndarray
    bijective: bool

    @field_validator("map", mode="before")
    @classmethod
    def validate_map(cls, v):
        return _frozen_array(v, np.int64)

    @model_validator(mode="after")
    def validate_bijective(self):
        if self.bijective and not np.array_equal(np.sort(self.map), np.arange(self.map.size)):
            raise ValueError("bijective matching must be a permutation")
        return self

    @property
    def n(self) -> int:
        return int(self.map.shape[0])

    def as_permutation(self) -> Permutation:
        if not self.bijective:
            raise ValueError("matching is not bijective")
        return Permutation(targets=self.map)


class DominanceReport(BaseModel):
    """Diagonal dominance of X relabeled by the truth"""

    min_true: float
    max_off: float
    margin: float
    separated: bool
    pred_diag: float
    diag_mean: float
    diag_rel_err: float

    @model_validator(mode="after")
    def validate_separated(self):
        if self.separated != (self.margin > 0):
            raise ValueError("separated must equal (margin > 0)")
        return self


class LocalLawReport(BaseModel):
    """Empirical resolvent error statistics at one spectral parameter"""

    z: complex
    entrywise_off_max: float = Field(..., ge=0.0)
    entrywise_diag_max: float = Field(..., ge=0.0)
    rowsum_max: float = Field(..., ge=0.0)
    totalsum_err: float = Field(..., ge=0.0)


class ExperimentConfig(BaseModel):
    """Sweep configuration; unknown keys are rejected"""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(..., ge=2)
    p: float = Field(default=0.5, gt=0.0, lt=1.0)
    noise_grid: List[float] = Field(..., min_length=1)
    model: ModelTag = "erdos_renyi"
    eta: float = Field(default=0.2, gt=0.0)
    methods: List[SweepMethod] = Field(default_factory=lambda: ["grampa", "rowqp"], min_length=1)
    rounders: List[Rounder] = Field(default_factory=lambda: ["lap"], min_length=1)
    reps: int = Field(default=10, ge=1)
    base_seed: int = Field(default=0, ge=0, lt=2**64)
    truth_mode: TruthMode = "random"
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def validate_noise_grid(self):
        for value in self.noise_grid:
            if self.model == "gaussian":
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"gaussian sigma {value} outside [0, 1]")
            else:
                if not 0.0 < value <= 1.0:
                    raise ValueError(f"retention s {value} outside (0, 1]")
                if self.p * (1.0 - value) / (1.0 - self.p) > 1.0:
                    raise ValueError(f"retention s {value} too small for p={self.p}")
        return self


class TrialRecord(BaseModel):
    """One CSV row of a sweep"""

    method: str
    rounder: str
    n: int
    p: Optional[float]
    noise: float
    sigma_emp: float
    eta: float
    rep: int
    seed: int
    overlap: float = Field(..., ge=0.0, le=1.0)
    min_true: float
    max_off: float
    margin: float
    diag_rel_err: float
    separated: bool
    runtime_ms: int = 0


class CheckResult(BaseModel):
    """Outcome of one verification check"""

    name: str
    description: Optional[str] = None
    measurements: Dict[str, float]
    passed: bool
    failed_conditions: List[str] = Field(default_factory=list)


class SweepSummary(BaseModel):
    """Mean and sample standard deviation of overlap for one (noise, method, rounder) cell"""

    method: str
    rounder: str
    n: int
    p: Optional[float]
    noise: float
    sigma_emp: float
    eta: float
    mean_overlap: float
    std_overlap: float = Field(..., ge=0.0)
    reps: int = Field(..., ge=1)


class MatchReport(ArrayModel):
    """Everything one similarity -> rounding run produces"""

    similarity: SimilarityMatrix
    matching: Matching
    overlap: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    dominance: Optional[DominanceReport] = None
    qap_objective: Optional[float] = None
    runtime_ms: int = 0


class SweepResult(BaseModel):
    """Trial rows in canonical order plus their summaries; complete is False after an interrupt"""

    records: List[TrialRecord]
    summaries: List[SweepSummary]
    complete: bool = True
