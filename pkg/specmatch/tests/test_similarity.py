"""Tests for the similarity matrices"""
import itertools

import numpy as np
import pytest

from app.exceptions import DimensionError, NormBoundViolated, ParamError, SizeError
from app.models import gen_er_pair, gen_gaussian_pair, permute_conjugate
from app.rounding import lap_round, overlap
from app.schemas import ContourSpec, Permutation
from app.similarity import (
    colqp,
    common_structure,
    grampa,
    grampa_contour,
    kkt_oracle_regqp,
    kkt_oracle_rowqp,
    rowqp,
    rowqp_contour,
    _rectangle_nodes,
    rowqp_semicircle,
    tau_weights,
)
from app.spectral import eig_sym, resolvent, spectral_norm, stieltjes_m0


def _contour_pair():
    pair = gen_er_pair(20, 0.5, 0.9, seed=25)
    scale = 2.0 / spectral_norm(pair.a)
    return pair.a * scale, pair.b * scale


def test_grampa_scalar():
    """Test n=1 gives [1/eta]"""
    x = grampa([[0.0]], [[0.0]], 0.25)
    assert x.entries[0, 0] == pytest.approx(4.0)
    assert x.method == "grampa"


def test_grampa_diagonal_closed_form(diag12):
    """Test the 2x2 closed form for a = b = diag(1, 2)"""
    eta = 0.2
    x = grampa(diag12, diag12, eta).entries
    off = eta / (1.0 + eta ** 2)
    assert np.allclose(x, [[1.0 / eta, off], [off, 1.0 / eta]])


def test_grampa_symmetric_degeneracy():
    """Test the swap graph gives X = J / eta"""
    a = np.array([[0.0, 1.0], [1.0, 0.0]]) / np.sqrt(2.0)
    assert np.allclose(grampa(a, a, 0.5).entries, np.full((2, 2), 2.0))


def test_grampa_errors(diag12):
    with pytest.raises(ParamError):
        grampa(diag12, diag12, 0.0)
    with pytest.raises(DimensionError):
        grampa(diag12, np.eye(3), 0.2)


def test_grampa_equivariance(small_er_pair):
    """Test relabeling b permutes the columns of X"""
    perm = Permutation(targets=np.random.default_rng(1).permutation(small_er_pair.n))
    for method in (grampa, rowqp):
        x = method(small_er_pair.a, small_er_pair.b, 0.2).entries
        x_perm = method(small_er_pair.a, permute_conjugate(small_er_pair.b, perm), 0.2).entries
        assert np.max(np.abs(x_perm - x[:, perm.targets])) <= 1e-10


def test_grampa_recovers_zero_noise_truth():
    """Test LAP rounding of grampa recovers the truth at s=1"""
    pair = gen_er_pair(200, 0.5, 1.0, seed=17)
    matching = lap_round(grampa(pair.a, pair.b, 0.2))
    assert np.array_equal(matching.map, pair.truth.targets)


def test_tau_weights_positive_and_resolvent_form(small_er_pair):
    """Test tau_i > 0 and tau_i = Im(1^T R_B(lambda_i + i eta) 1) / eta"""
    eta = 0.3
    tau = tau_weights(small_er_pair.a, small_er_pair.b, eta)
    assert np.all(tau > 0)
    lam = eig_sym(small_er_pair.a).eigenvalues
    ones = np.ones(small_er_pair.n)
    for i in (0, 7, small_er_pair.n - 1):
        quad = ones @ resolvent(small_er_pair.b, lam[i] + 1j * eta) @ ones
        assert tau[i] == pytest.approx(quad.imag / eta, rel=1e-9)


def test_rowqp_scalar():
    """Test n=1 gives [1] and tau = 1/eta^2"""
    assert rowqp([[0.0]], [[0.0]], 0.5).entries[0, 0] == pytest.approx(1.0)
    assert tau_weights([[0.0]], [[0.0]], 0.5)[0] == pytest.approx(4.0)


def test_rowqp_row_sums(small_er_pair, small_gaussian_pair):
    """Test every row of the row-constrained solution sums to one"""
    for pair in (small_er_pair, small_gaussian_pair):
        for eta in (0.05, 0.2, 1.0):
            x = rowqp(pair.a, pair.b, eta).entries
            assert np.max(np.abs(x.sum(axis=1) - 1.0)) <= 1e-9


def test_colqp_column_sums(small_er_pair):
    x = colqp(small_er_pair.a, small_er_pair.b, 0.2)
    assert x.method == "colqp"
    assert np.max(np.abs(x.entries.sum(axis=0) - 1.0)) <= 1e-9


def test_rowqp_semicircle_tracks_rowqp():
    """Test the semicircle normalizer approximates tau and still recovers the truth"""
    pair = gen_gaussian_pair(300, 0.05, seed=4)
    eta = 1.0
    tau = tau_weights(pair.a, pair.b, eta)
    lam = eig_sym(pair.a).eigenvalues
    predicted = pair.n / eta * np.imag(stieltjes_m0(lam + 1j * eta))
    assert np.median(np.abs(predicted / tau - 1.0)) <= 0.3

    approx = rowqp_semicircle(pair.a, pair.b, 0.2)
    assert approx.method == "rowqp_semicircle"
    assert overlap(lap_round(approx), pair.truth) >= 0.95


def test_common_structure_reduces_to_grampa_and_rowqp(small_er_pair):
    """Test S = J gives grampa and S = m 1^T / eta gives rowqp"""
    a, b, eta = small_er_pair.a, small_er_pair.b, 0.2
    n = small_er_pair.n
    from_j = common_structure(a, b, eta, np.ones((n, n))).entries
    assert np.allclose(from_j, grampa(a, b, eta).entries, atol=1e-10)

    dec = eig_sym(a)
    tau = tau_weights(a, b, eta)
    m = dec.eigenvectors @ (dec.ones_overlap() / tau)
    from_m = common_structure(a, b, eta, np.outer(m, np.ones(n)) / eta).entries
    assert np.allclose(from_m, rowqp(a, b, eta).entries, atol=1e-10)


def test_common_structure_shape_check(diag12):
    with pytest.raises(DimensionError):
        common_structure(diag12, diag12, 0.2, np.ones((3, 3)))


def test_kkt_regqp_scalar_and_proportionality(diag12):
    """Test n=1 gives [1] and the 2x2 closed form is matched up to scale"""
    assert kkt_oracle_regqp([[0.0]], [[0.0]], 0.3).entries[0, 0] == pytest.approx(1.0)
    oracle = kkt_oracle_regqp(diag12, diag12, 0.5).entries
    direct = grampa(diag12, diag12, 0.5).entries
    ratio = oracle / direct
    assert np.allclose(ratio, ratio[0, 0])
    assert ratio[0, 0] > 0
    assert oracle.sum() == pytest.approx(2.0)


def test_kkt_regqp_cosine_with_grampa(random_symmetric):
    """Test grampa is a positive multiple of the dense QP solution"""
    for n, eta, _ in itertools.product(range(3, 9), (0.1, 0.3, 1.0), range(3)):
        a, b = random_symmetric(n), random_symmetric(n)
        direct = grampa(a, b, eta).entries.ravel()
        oracle = kkt_oracle_regqp(a, b, eta).entries.ravel()
        cosine = direct @ oracle / (np.linalg.norm(direct) * np.linalg.norm(oracle))
        assert cosine >= 1.0 - 1e-10
        assert direct @ oracle > 0


def test_kkt_rowqp_matches_rowqp(random_symmetric):
    """Test the closed-form row-constrained solution against the dense KKT solve"""
    assert kkt_oracle_rowqp([[0.0]], [[0.0]], 0.3).entries[0, 0] == pytest.approx(1.0)
    for n, eta, _ in itertools.product(range(3, 9), (0.1, 0.3, 1.0), range(3)):
        a, b = random_symmetric(n), random_symmetric(n)
        direct = rowqp(a, b, eta).entries
        oracle = kkt_oracle_rowqp(a, b, eta).entries
        assert np.max(np.abs(oracle.sum(axis=1) - 1.0)) <= 1e-10
        assert np.max(np.abs(direct - oracle)) <= 1e-8 * np.max(np.abs(direct))


def test_kkt_size_cap():
    big = np.zeros((65, 65))
    with pytest.raises(SizeError):
        kkt_oracle_regqp(big, big, 0.2)
    with pytest.raises(SizeError):
        kkt_oracle_rowqp(big, big, 0.2)


def test_contour_scalar():
    """Test the scalar contour integrals"""
    spec = ContourSpec(points_per_side=256)
    assert grampa_contour([[0.0]], [[0.0]], 0.5, spec).entries[0, 0] == pytest.approx(2.0, abs=1e-4)
    assert rowqp_contour([[0.0]], [[0.0]], 0.5, spec).entries[0, 0] == pytest.approx(1.0, abs=1e-4)


def test_grampa_contour_matches_closed_form():
    a, b = _contour_pair()
    direct = grampa(a, b, 0.3).entries
    quad = grampa_contour(a, b, 0.3, ContourSpec(points_per_side=512)).entries
    assert np.max(np.abs(quad - direct)) <= 1e-6 * np.max(np.abs(direct))


def test_rowqp_contour_matches_closed_form():
    a, b = _contour_pair()
    direct = rowqp(a, b, 0.3).entries
    quad = rowqp_contour(a, b, 0.3, ContourSpec(points_per_side=512)).entries
    assert np.max(np.abs(quad - direct)) <= 1e-5 * np.max(np.abs(direct))
    assert np.max(np.abs(quad.sum(axis=1) - 1.0)) <= 1e-4


def test_contour_error_decreases_with_nodes():
    """Test doubling points per side shrinks the deviation"""
    a, b = _contour_pair()
    direct = grampa(a, b, 0.3).entries
    errors = [
        np.max(np.abs(grampa_contour(a, b, 0.3, ContourSpec(points_per_side=k)).entries - direct))
        for k in (64, 128, 256)
    ]
    assert errors[0] > errors[1] > errors[2]


def test_contour_norm_bound():
    """Test the contour form rejects ||A|| > 2.5"""
    a = np.diag([0.0, 2.6])
    with pytest.raises(NormBoundViolated):
        grampa_contour(a, a, 0.3)
    with pytest.raises(NormBoundViolated):
        rowqp_contour(a, a, 0.3)


def test_contour_spec_validation():
    with pytest.raises(ValueError):
        ContourSpec(points_per_side=8)
    with pytest.raises(ValueError):
        ContourSpec(re_max=0.0)
    assert ContourSpec().half_height(0.4) == pytest.approx(0.2)


def test_rectangle_nodes_with_partial_panel():
    """Test a node count that is not a multiple of 16 gets a trailing shorter panel"""
    spec = ContourSpec(points_per_side=100)
    nodes, weights = _rectangle_nodes(0.3, spec)
    assert nodes.size == weights.size == 400
    # closed contour, perimeter 4 * re_max + 4 * half_height
    assert abs(weights.sum()) <= 1e-12
    assert np.abs(weights).sum() == pytest.approx(4 * 3.0 + 4 * 0.15)
    bottom = nodes[:100]
    assert np.all(np.diff(bottom.real) > 0)
    assert np.all(np.abs(bottom.imag + 0.15) <= 1e-12)


def test_contour_with_partial_panel_matches_closed_form():
    """Test 100 points per side still reproduce the closed forms"""
    a, b = _contour_pair()
    spec = ContourSpec(points_per_side=100)
    direct = grampa(a, b, 0.3).entries
    quad = grampa_contour(a, b, 0.3, spec).entries
    assert np.max(np.abs(quad - direct)) <= 1e-2 * np.max(np.abs(direct))
    assert grampa_contour([[0.0]], [[0.0]], 0.5, spec).entries[0, 0] == pytest.approx(2.0, abs=1e-3)
