"""Verification suite: analytic identities and oracle cross-checks at fixed sizes and seeds"""
import logging
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.integrate import simpson

from app.exceptions import SpecMatchError
from app.models import gen_er_pair, gen_gaussian_pair
from app.rounding import assignment_value, brute_force_round, lap_round
from app.schemas import CheckResult, ContourSpec
from app import similarity
from app.spectral import (
    eig_sym,
    m0_boundary,
    minor_resolvent,
    resolvent,
    semicircle_density,
    spectral_norm,
    stieltjes_m0,
)

logger = logging.getLogger(__name__)

SCHUR_Z = 1.0 + 1.0j
SCHUR_SIZES = range(3, 9)


class Check(BaseModel):
    """A named measurement and the condition its numbers must satisfy"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    description: Optional[str] = None
    measure: Callable[[], Dict[str, float]]
    condition: Dict[str, Any]


def _wigner(n: int, seed: int) -> np.ndarray:
    return np.array(gen_gaussian_pair(n, 0.5, seed, truth_mode="identity").a)


def _max_abs(m) -> float:
    return float(np.max(np.abs(m)))


def measure_ward() -> Dict[str, float]:
    """R(z) R(z)^* = Im R(z) / Im z"""
    worst = 0.0
    for n in SCHUR_SIZES:
        r = resolvent(_wigner(n, n), SCHUR_Z)
        worst = max(worst, _max_abs(r @ np.conj(r) - r.imag / SCHUR_Z.imag))
    return {"residual": worst}


def measure_conjugate_symmetry() -> Dict[str, float]:
    """R(conj z) = conj R(z)"""
    a = _wigner(6, 11)
    return {"residual": _max_abs(resolvent(a, np.conj(SCHUR_Z)) - np.conj(resolvent(a, SCHUR_Z)))}


def _schur_residuals(a: np.ndarray, z: complex) -> Dict[str, float]:
    n = a.shape[0]
    r = resolvent(a, z)
    out = {"Rjj": 0.0, "Rjk": 0.0, "eR1": 0.0, "Rkkinv": 0.0, "LOO": 0.0}
    for j in range(n):
        others = np.array([k for k in range(n) if k != j])
        rm = minor_resolvent(a, z, [j])[np.ix_(others, others)]
        a_j = a[j, others]
        r_jj = r[j, j]

        out["Rjj"] = max(out["Rjj"], abs(1.0 / r_jj - (a[j, j] - z - a_j @ rm @ a_j)))
        out["Rjk"] = max(out["Rjk"], _max_abs(r[others, j] + r_jj * (rm @ a_j)))
        row_sum = r[j].sum()
        out["eR1"] = max(out["eR1"], abs(row_sum - r_jj * (1.0 - a_j @ rm.sum(axis=1))))

        r_oj = r[others, j]
        loo = rm + np.outer(r_oj, r_oj) / r_jj
        out["LOO"] = max(out["LOO"], _max_abs(r[np.ix_(others, others)] - loo))
        r_kk = np.diag(r)[others]
        rm_kk = np.diag(rm)
        inv_gap = 1.0 / rm_kk - 1.0 / r_kk - r_oj * r_oj / (r_jj * r_kk * rm_kk)
        out["Rkkinv"] = max(out["Rkkinv"], _max_abs(inv_gap))
    return out


def measure_schur(identity: str) -> Callable[[], Dict[str, float]]:
    def measure() -> Dict[str, float]:
        worst = max(_schur_residuals(_wigner(n, 100 + n), SCHUR_Z)[identity] for n in SCHUR_SIZES)
        return {"residual": float(worst)}

    return measure


def measure_m0_quadratic() -> Dict[str, float]:
    """m0^2 + z m0 + 1 = 0 with Im m0 * Im z > 0 on a 10 x 10 grid mirrored into both half planes"""
    x, y = np.meshgrid(np.linspace(-3.0, 3.0, 10), np.linspace(0.05, 1.0, 10))
    upper = (x + 1j * y).ravel()
    z = np.concatenate([upper, upper.conj()])
    m = stieltjes_m0(z)
    return {"residual": _max_abs(m * m + z * m + 1.0), "min_imag_sign": float(np.min(m.imag * z.imag))}


def measure_m0_boundary() -> Dict[str, float]:
    """|m0+-(x)| = 1 and Im m0+(x) / pi = rho(x) on [-2, 2]"""
    worst = 0.0
    for x in np.linspace(-2.0, 2.0, 50):
        plus, minus = m0_boundary(x, "plus"), m0_boundary(x, "minus")
        worst = max(worst, abs(abs(plus) - 1.0), abs(abs(minus) - 1.0))
        worst = max(worst, abs(plus.imag / np.pi - semicircle_density(x)))
    return {"residual": worst}


def measure_semicircle_mass() -> Dict[str, float]:
    """Total mass of rho by Simpson's rule under x = 2 sin(theta)"""
    theta = np.linspace(-np.pi / 2.0, np.pi / 2.0, 10001)
    integrand = semicircle_density(2.0 * np.sin(theta)) * 2.0 * np.cos(theta)
    return {"residual": abs(simpson(integrand, x=theta) - 1.0)}


def measure_eig_reconstruction() -> Dict[str, float]:
    a = _wigner(12, 5)
    dec = eig_sym(a)
    v = dec.eigenvectors
    rebuilt = v @ np.diag(dec.eigenvalues) @ v.T
    return {
        "residual": _max_abs(rebuilt - a),
        "orthogonality": _max_abs(v.T @ v - np.eye(a.shape[0])),
    }


def measure_kkt_regqp() -> Dict[str, float]:
    """grampa is a positive multiple of the dense regularized QP solution"""
    pair = gen_gaussian_pair(5, 0.4, 21)
    direct = similarity.grampa(pair.a, pair.b, 0.4).entries.ravel()
    oracle = similarity.kkt_oracle_regqp(pair.a, pair.b, 0.4).entries.ravel()
    cosine = float(direct @ oracle / (np.linalg.norm(direct) * np.linalg.norm(oracle)))
    return {"residual": 1.0 - cosine, "scale": float(direct @ oracle)}


def measure_kkt_rowqp() -> Dict[str, float]:
    pair = gen_gaussian_pair(6, 0.4, 22)
    direct = similarity.rowqp(pair.a, pair.b, 0.3).entries
    oracle = similarity.kkt_oracle_rowqp(pair.a, pair.b, 0.3).entries
    return {"residual": _max_abs(direct - oracle) / _max_abs(direct)}


def measure_rowqp_row_sums() -> Dict[str, float]:
    pair = gen_er_pair(30, 0.5, 0.8, 23)
    x = similarity.rowqp(pair.a, pair.b, 0.2).entries
    return {"residual": _max_abs(x.sum(axis=1) - 1.0)}


def measure_lap_vs_brute_force() -> Dict[str, float]:
    rng = np.random.default_rng(24)
    worst = 0.0
    for _ in range(200):
        x = rng.standard_normal((7, 7))
        worst = max(worst, abs(assignment_value(x, brute_force_round(x)) - assignment_value(x, lap_round(x))))
    return {"residual": worst}


def _contour_pair():
    pair = gen_er_pair(20, 0.5, 0.9, 25)
    scale = 2.0 / spectral_norm(pair.a)
    return pair.a * scale, pair.b * scale


def measure_contour(kind: str) -> Callable[[], Dict[str, float]]:
    def measure() -> Dict[str, float]:
        a, b = _contour_pair()
        spec = ContourSpec(points_per_side=512)
        if kind == "grampa":
            direct = similarity.grampa(a, b, 0.3).entries
            quad = similarity.grampa_contour(a, b, 0.3, spec).entries
        else:
            direct = similarity.rowqp(a, b, 0.3).entries
            quad = similarity.rowqp_contour(a, b, 0.3, spec).entries
        return {"residual": _max_abs(quad - direct) / _max_abs(direct)}

    return measure


def _upper(field: str, bound: float) -> Dict[str, Any]:
    return {"field": field, "operator": "<=", "value": bound}


def default_checks() -> List[Check]:
    """The full identity and oracle suite"""
    checks = [
        Check(name="ward", description="Ward identity at z = 1+i", measure=measure_ward,
              condition=_upper("residual", 1e-8)),
        Check(name="conjugate_symmetry", measure=measure_conjugate_symmetry,
              condition=_upper("residual", 1e-12)),
    ]
    for identity in ("Rjj", "Rjk", "eR1", "Rkkinv", "LOO"):
        checks.append(Check(
            name=f"schur_{identity}",
            description="Schur complement identity with one index removed",
            measure=measure_schur(identity),
            condition=_upper("residual", 1e-8),
        ))
    checks.extend([
        Check(name="m0_quadratic", measure=measure_m0_quadratic,
              condition={"logic": "AND", "conditions": [
                  _upper("residual", 1e-12),
                  {"field": "min_imag_sign", "operator": ">", "value": 0.0},
              ]}),
        Check(name="m0_boundary", measure=measure_m0_boundary, condition=_upper("residual", 1e-12)),
        Check(name="semicircle_mass", measure=measure_semicircle_mass, condition=_upper("residual", 1e-8)),
        Check(name="eig_reconstruction", measure=measure_eig_reconstruction,
              condition={"logic": "AND", "conditions": [
                  _upper("residual", 1e-10),
                  _upper("orthogonality", 1e-10),
              ]}),
        Check(name="kkt_regqp", description="grampa vs dense regularized QP", measure=measure_kkt_regqp,
              condition={"logic": "AND", "conditions": [
                  _upper("residual", 1e-10),
                  {"field": "scale", "operator": ">", "value": 0.0},
              ]}),
        Check(name="kkt_rowqp", description="rowqp vs dense KKT solve", measure=measure_kkt_rowqp,
              condition=_upper("residual", 1e-8)),
        Check(name="rowqp_row_sums", measure=measure_rowqp_row_sums, condition=_upper("residual", 1e-9)),
        Check(name="lap_vs_brute_force", measure=measure_lap_vs_brute_force,
              condition=_upper("residual", 1e-12)),
        Check(name="grampa_contour", description="contour quadrature vs closed form",
              measure=measure_contour("grampa"), condition=_upper("residual", 1e-6)),
        Check(name="rowqp_contour", description="contour quadrature vs closed form",
              measure=measure_contour("rowqp"), condition=_upper("residual", 1e-5)),
    ])
    return checks


class CheckSuite:
    """Runs checks and evaluates their conditions against the measurements"""

    operators = {
        "==": lambda a, b: a == b,
        "!=": lambda a, b: a != b,
        ">": lambda a, b: a > b,
        ">=": lambda a, b: a >= b,
        "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b,
    }

    def __init__(self, checks: Optional[List[Check]] = None):
        self.checks: List[Check] = checks if checks is not None else default_checks()

    def evaluate_condition(self, condition: Dict[str, Any], measurements: Dict[str, float]) -> bool:
        """Evaluate a single condition against measured values"""
        field = condition.get("field")
        operator = condition.get("operator")
        value = condition.get("value")

        if field not in measurements or operator not in self.operators:
            return False
        measured = measurements[field]
        # NaN compares false everywhere, which fails the check
        try:
            return bool(self.operators[operator](measured, value))
        except (TypeError, ValueError):
            return False

    def evaluate_conditions(self, conditions: Dict[str, Any], measurements: Dict[str, float]) -> List[Dict[str, Any]]:
        """
        Evaluate a condition or an AND/OR group of conditions.
        Returns the conditions that failed (empty when the group holds).
        """
        if "logic" in conditions:
            logic = conditions.get("logic", "AND").upper()
            condition_list = conditions.get("conditions", [])
            failed = [c for c in condition_list if not self.evaluate_condition(c, measurements)]
            if logic == "AND":
                return failed
            if logic == "OR":
                return failed if len(failed) == len(condition_list) else []
            return list(condition_list)

        return [] if self.evaluate_condition(conditions, measurements) else [conditions]

    def run_check(self, check: Check) -> CheckResult:
        try:
            measurements = {k: float(v) for k, v in check.measure().items()}
        except SpecMatchError as exc:
            logger.warning("check %s raised %s: %s", check.name, type(exc).__name__, exc.detail)
            return CheckResult(
                name=check.name,
                description=check.description,
                measurements={},
                passed=False,
                failed_conditions=[f"{type(exc).__name__}: {exc.detail}"],
            )
        failed = self.evaluate_conditions(check.condition, measurements)
        return CheckResult(
            name=check.name,
            description=check.description,
            measurements=measurements,
            passed=not failed,
            failed_conditions=[f"{c['field']} {c['operator']} {c['value']!r}" for c in failed],
        )

    def run_all(self) -> List[CheckResult]:
        return [self.run_check(check) for check in self.checks]


def conditions_of(check: Check) -> List[Dict[str, Any]]:
    if "logic" in check.condition:
        return list(check.condition.get("conditions", []))
    return [check.condition]


def format_result(check: Check, result: CheckResult) -> List[str]:
    """`name residual op threshold PASS|FAIL` lines, one per condition"""
    if not result.measurements:
        return [f"{result.name} error FAIL ({'; '.join(result.failed_conditions)})"]
    lines = []
    for cond in conditions_of(check):
        measured = result.measurements.get(cond["field"], float("nan"))
        ok = CheckSuite.operators[cond["operator"]](measured, cond["value"])
        label = result.name if cond["field"] == "residual" else f"{result.name}.{cond['field']}"
        lines.append(f"{label} {measured:.3e} {cond['operator']} {cond['value']:.1e} {'PASS' if ok else 'FAIL'}")
    return lines
