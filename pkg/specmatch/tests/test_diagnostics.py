"""Tests for dominance and local-law diagnostics"""
import logging
import math

import numpy as np
import pytest

from app.diagnostics import (
    diffnorm_ratio,
    dominance_report,
    locallaw_report,
    qap_objective,
    qap_residual,
    trace_m0_check,
)
from app.exceptions import DimensionError, DomainError, ParamError
from app.models import gen_er_pair, gen_gaussian_pair, permute_conjugate
from app.schemas import Permutation, SimilarityMatrix
from app.similarity import grampa, rowqp
from app.spectral import stieltjes_m0


def _sim(entries, eta=0.2, method="grampa"):
    return SimilarityMatrix(entries=np.asarray(entries, dtype=float), method=method, eta=eta)


def test_dominance_scalar():
    """Test n=1: exact prediction, no off-diagonals, vacuous separation"""
    report = dominance_report(_sim([[5.0]]), Permutation.identity(1), 0.0)
    assert report.pred_diag == pytest.approx(5.0)
    assert report.diag_rel_err == pytest.approx(0.0)
    assert report.max_off == -math.inf
    assert report.margin == math.inf
    assert report.separated


def test_dominance_diagonal_closed_form(diag12):
    """Test the diag(1, 2) closed form at eta = 0.2"""
    report = dominance_report(grampa(diag12, diag12, 0.2), Permutation.identity(2), 0.0)
    assert report.min_true == pytest.approx(5.0)
    assert report.max_off == pytest.approx(0.2 / 1.04)
    assert report.separated
    assert report.margin == pytest.approx(5.0 - 0.2 / 1.04)


def test_dominance_constrained_prediction():
    """Test the constrained variant scales the diagonal by n and predicts 4(1-s^2)/(pi eta)"""
    x = _sim(np.full((4, 4), 0.25), eta=0.5, method="rowqp")
    report = dominance_report(x, Permutation.identity(4), 0.5, constrained=True)
    assert report.diag_mean == pytest.approx(1.0)
    assert report.pred_diag == pytest.approx(4.0 * 0.75 / (math.pi * 0.5))
    assert not report.separated


def test_dominance_full_noise_has_infinite_error():
    report = dominance_report(_sim(np.eye(3)), Permutation.identity(3), 1.0)
    assert report.pred_diag == 0.0
    assert report.diag_rel_err == math.inf


def test_dominance_relabeling_invariance(small_er_pair, rng):
    """Test reporting on (X P, truth o p) equals reporting on (X, truth)"""
    x = grampa(small_er_pair.a, small_er_pair.b, 0.2)
    base = dominance_report(x, small_er_pair.truth, 0.3)
    p = rng.permutation(small_er_pair.n)
    inverse = np.argsort(p)
    moved = _sim(x.entries[:, p])
    truth_moved = Permutation(targets=inverse[small_er_pair.truth.targets])
    report = dominance_report(moved, truth_moved, 0.3)
    assert report.separated == base.separated
    for key in ("min_true", "max_off", "margin", "diag_mean", "diag_rel_err"):
        assert getattr(report, key) == pytest.approx(getattr(base, key))


def test_dominance_errors():
    with pytest.raises(DimensionError):
        dominance_report(_sim(np.eye(3)), Permutation.identity(2), 0.0)
    with pytest.raises(ParamError):
        dominance_report(_sim(np.eye(2)), Permutation.identity(2), 1.5)


def test_zero_noise_dominance_is_separated():
    pair = gen_er_pair(200, 0.5, 1.0, seed=5)
    report = dominance_report(grampa(pair.a, pair.b, 0.2), pair.truth, 0.0)
    assert report.separated
    assert report.min_true > report.max_off
    # row-normalized form: every row still peaks on its true partner
    x = rowqp(pair.a, pair.b, 0.2).entries
    assert np.array_equal(np.argmax(x, axis=1), pair.truth.targets)


def test_locallaw_zero_matrix():
    """Test R = i I for the zero matrix at z = i"""
    report = locallaw_report(np.zeros((5, 5)), 1j)
    assert report.entrywise_off_max == 0.0
    assert report.entrywise_diag_max == pytest.approx(abs(1j - stieltjes_m0(1j)))
    assert report.rowsum_max == pytest.approx(1.0)
    assert report.totalsum_err == pytest.approx(abs(1j - stieltjes_m0(1j)))


def test_locallaw_permutation_invariant_totals(small_er_pair):
    """Test spectrum-only statistics survive relabeling"""
    z = 1.0 + 0.5j
    base = locallaw_report(small_er_pair.a, z)
    moved = locallaw_report(permute_conjugate(small_er_pair.a, small_er_pair.truth), z)
    assert moved.totalsum_err == pytest.approx(base.totalsum_err, abs=1e-12)
    assert moved.entrywise_off_max == pytest.approx(base.entrywise_off_max, abs=1e-12)
    assert moved.entrywise_diag_max == pytest.approx(base.entrywise_diag_max, abs=1e-12)


def test_locallaw_domain():
    with pytest.raises(DomainError):
        locallaw_report(np.zeros((2, 2)), 4.0 + 0.5j)
    with pytest.raises(DomainError):
        locallaw_report(np.zeros((2, 2)), 1.0)
    with pytest.raises(DomainError):
        locallaw_report(np.zeros((2, 2)), 1.0 + 2.0j)


def test_trace_m0_check():
    """Test the scalar closed form and agreement for large |z|"""
    assert trace_m0_check([[0.0]], 2j) == pytest.approx(abs(0.5 - (math.sqrt(2.0) - 1.0)), abs=1e-12)
    assert trace_m0_check([[0.3]], 1e4 + 1e4j) < 1e-7


def test_trace_m0_check_on_wigner():
    pair = gen_er_pair(400, 0.5, 1.0, seed=2)
    assert trace_m0_check(pair.a, 1.0 + 0.5j) <= 0.05


def test_qap_objective_and_residual():
    """Test QAP objective and residual agree with ||A||^2 + ||B||^2 - 2 <A, Pi B Pi^T>"""
    pair = gen_gaussian_pair(10, 0.3, seed=6)
    objective = qap_objective(pair.a, pair.b, pair.truth)
    residual = qap_residual(pair.a, pair.b, pair.truth)
    total = np.sum(pair.a ** 2) + np.sum(pair.b ** 2)
    assert residual == pytest.approx(total - 2.0 * objective)
    assert objective > 0.25 * total


def test_qap_residual_zero_for_exact_relabeling():
    pair = gen_gaussian_pair(12, 0.0, seed=9)
    assert qap_residual(pair.a, pair.b, pair.truth) == pytest.approx(0.0, abs=1e-24)


def test_diffnorm_ratio_warns(caplog):
    """Test a warning is logged when the noise norm ratio exceeds 4"""
    pair = gen_er_pair(200, 0.5, 0.9995, seed=1)
    with caplog.at_level(logging.WARNING, logger="app.diagnostics"):
        ratio = diffnorm_ratio(pair)
    assert ratio > 4.0
    assert "noise norm ratio" in caplog.text
    assert diffnorm_ratio(gen_er_pair(30, 0.5, 1.0, seed=1)) == 0.0
