"""
Identity suite

Runs the closed-form identities the toolkit is built on and records each as
a check dictionary with a "pass" or "fail" status. A check that raises is
recorded as failed with the error message; the suite never aborts halfway.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy import special

from utils import pelliptic
from utils.curves import (
    FlatCoreSpec,
    bending_energy,
    build_flat_core,
    el_residual,
    estimate_lambda,
    sample_wavelike,
)
from utils.errors import ConfigError, PElasticaError
from utils.hooked import (
    HookedProblem,
    build_hooked,
    make_branch,
    minimal_energy,
    verify_hooked_bc,
)

logger = logging.getLogger(__name__)

SUITE_P = [1.5, 2.0, 3.0, 4.0]
SUITE_Q = [0.1, 0.5, 0.9]
DEGENERATE_P = [3.0, 4.0, 8.0]


def beta_half(mu: float) -> float:
    """Integral of cos(t)^mu over [0, pi/2]"""
    return 0.5 * math.sqrt(math.pi) * special.gamma(0.5 * (mu + 1.0)) / special.gamma(0.5 * mu + 1.0)


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _check_periodicity() -> Dict[str, Any]:
    """cn_p has period 4K and sn_p flips sign after 2K"""
    worst = 0.0
    x = np.linspace(0.0, 3.0, 13)
    for p in SUITE_P:
        for q in (0.3, 0.7):
            K = pelliptic.K1p(p, q)
            worst = max(worst, float(np.max(np.abs(pelliptic.cnp(p, x + 4 * K, q) - pelliptic.cnp(p, x, q)))))
            worst = max(worst, float(np.max(np.abs(pelliptic.snp(p, x + 2 * K, q) + pelliptic.snp(p, x, q)))))
    return {
        "status": "pass" if worst <= 1e-10 else "fail",
        "message": f"largest periodicity defect {worst:.3e}",
        "max_error": worst,
    }


def _check_zero_set() -> Dict[str, Any]:
    worst = 0.0
    for p in SUITE_P:
        for q in SUITE_Q:
            K = pelliptic.K1p(p, q)
            zeros = pelliptic.cnp(p, np.array([K, 3 * K, 5 * K]), q)
            worst = max(worst, float(np.max(np.abs(zeros))))
    return {
        "status": "pass" if worst <= 1e-10 else "fail",
        "message": f"largest |cn_p| at odd multiples of K: {worst:.3e}",
        "max_error": worst,
    }


def _check_q_monotonicity() -> Dict[str, Any]:
    issues = []
    grid = np.linspace(0.05, 0.95, 19)
    for p in SUITE_P:
        values = np.array([pelliptic.Qp(p, q) for q in grid])
        if np.any(np.diff(values) >= 0.0):
            issues.append(f"Q_{p} not decreasing on the grid")
        if abs(pelliptic.Qp(p, 0.0) - 1.0) > 1e-10:
            issues.append(f"Q_{p}(0) = {pelliptic.Qp(p, 0.0)!r}")
    for p in DEGENERATE_P:
        limit = pelliptic.Qp(p, 1.0)
        if abs(limit + 1.0 / (p - 1.0)) > 1e-8:
            issues.append(f"Q_{p}(1) = {limit!r}, expected {-1.0 / (p - 1.0)!r}")
    return {
        "status": "pass" if not issues else "fail",
        "message": "Q_p decreasing with the expected endpoint values" if not issues else "; ".join(issues),
        "issues": issues,
    }


def _check_cn_power_identity() -> Dict[str, Any]:
    worst = 0.0
    for p in SUITE_P:
        for q in SUITE_Q:
            worst = max(worst, _relative(pelliptic.cn_power_integral(p, q), pelliptic.cn_power_closed_form(p, q)))
    return {
        "status": "pass" if worst <= 1e-8 else "fail",
        "message": f"largest relative gap between quadrature and closed form {worst:.3e}",
        "max_error": worst,
    }


def _check_beta_oracle() -> Dict[str, Any]:
    worst = 0.0
    for p in [1.5, 2.0, 3.0, 4.0, 8.0]:
        worst = max(worst, _relative(pelliptic.K1p(p, 0.0), beta_half(1.0 - 2.0 / p)))
        if p > 2.0:
            worst = max(worst, _relative(pelliptic.K1p(p, 1.0), beta_half(-2.0 / p)))
            worst = max(worst, _relative(pelliptic.E1p(p, 1.0), beta_half(2.0 - 2.0 / p)))
    return {
        "status": "pass" if worst <= 1e-9 else "fail",
        "message": f"largest relative gap to the Gamma closed forms {worst:.3e}",
        "max_error": worst,
    }


def _check_classical_reduction() -> Dict[str, Any]:
    worst = 0.0
    for q in np.linspace(0.1, 0.9, 9):
        m = q * q
        K = float(special.ellipk(m))
        worst = max(worst, _relative(pelliptic.K1p(2.0, q), K))
        worst = max(worst, _relative(pelliptic.E1p(2.0, q), float(special.ellipe(m))))
        x = np.linspace(0.0, 4.0 * K, 41)
        _, _, cn, _ = special.ellipj(x, m)
        worst = max(worst, float(np.max(np.abs(pelliptic.cnp(2.0, x, q) - cn))))
    return {
        "status": "pass" if worst <= 1e-8 else "fail",
        "message": f"largest deviation from the classical functions {worst:.3e}",
        "max_error": worst,
    }


def _check_flat_core_geometry() -> Dict[str, Any]:
    worst = 0.0
    for p in (3.0, 4.0):
        for N in (1, 2, 3):
            spec = FlatCoreSpec.uniform(p=p, N=N, signs=["+" if j % 2 == 0 else "-" for j in range(N)], r=0.6)
            curve = build_flat_core(spec)
            scale = spec.length
            gap = curve.displacement - np.array([-spec.ell, 0.0])
            worst = max(worst, float(np.max(np.abs(gap))) / scale)
            for index in (0, -1):
                worst = max(worst, float(np.max(np.abs(curve.tangent(index) - np.array([-1.0, 0.0])))))
            worst = max(worst, abs(curve.length - spec.length) / scale)
    return {
        "status": "pass" if worst <= 1e-6 else "fail",
        "message": f"largest relative defect in displacement, end tangents and length {worst:.3e}",
        "max_error": worst,
    }


def _check_hooked_energy() -> Dict[str, Any]:
    worst = 0.0
    issues = []
    for p, ratios in ((2.0, (0.2, 0.5, 0.8)), (4.0, (0.2, 0.4, 0.7))):
        for ratio in ratios:
            prob = HookedProblem(p=p, ell=ratio, L=1.0)
            curve = build_hooked(prob, make_branch(prob, 1))
            worst = max(worst, _relative(bending_energy(curve), minimal_energy(prob)))
            if not verify_hooked_bc(curve).passed:
                issues.append(f"boundary conditions fail for p={p}, ell/L={ratio}")
    if worst > 1e-6:
        issues.append(f"energy gap {worst:.3e}")
    return {
        "status": "pass" if not issues else "fail",
        "message": f"largest relative energy gap {worst:.3e}" if not issues else "; ".join(issues),
        "max_error": worst,
    }


def _check_el_residuals() -> Dict[str, Any]:
    curves = {
        "wavelike p=2": sample_wavelike(2.0, 0.6, 0.0, 4.0 * pelliptic.K1p(2.0, 0.6), 4000),
        "wavelike p=3": sample_wavelike(3.0, 0.6, 0.0, 4.0 * pelliptic.K1p(3.0, 0.6), 4000),
        "flatcore p=4": build_flat_core(FlatCoreSpec.uniform(p=4.0, N=2, signs="+-", r=0.6)),
    }
    residuals = {}
    for name, curve in curves.items():
        residuals[name] = el_residual(curve, estimate_lambda(curve))
    worst = max(residuals.values())
    return {
        "status": "pass" if worst <= 1e-5 else "fail",
        "message": f"largest weak residual {worst:.3e}",
        "residuals": residuals,
    }


CHECKS: Dict[str, Callable[[], Dict[str, Any]]] = {
    "periodicity": _check_periodicity,
    "zero_set": _check_zero_set,
    "q_monotonicity": _check_q_monotonicity,
    "cn_power_identity": _check_cn_power_identity,
    "beta_oracle": _check_beta_oracle,
    "classical_reduction": _check_classical_reduction,
    "flat_core_geometry": _check_flat_core_geometry,
    "hooked_energy": _check_hooked_energy,
    "el_residuals": _check_el_residuals,
}


def _run_identity_checks(names: List[str]) -> Dict[str, Any]:
    results = {}
    for name in names:
        logger.info(f"Running identity check {name}")
        try:
            results[name] = CHECKS[name]()
        except PElasticaError as e:
            logger.error(f"Identity check {name} raised: {e}")
            results[name] = {"status": "fail", "message": f"{type(e).__name__}: {e}"}
    return results


def _determine_suite_status(results: Dict[str, Any]) -> str:
    if any(result.get("status") == "fail" for result in results.values()):
        return "fail"
    return "pass"


def run_identity_suite(names: Optional[List[str]] = None) -> Dict[str, Any]:
    """Run the named checks (all by default) and summarise pass counts."""
    names = list(CHECKS) if names is None else list(names)
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown identity checks: {unknown}")
    results = _run_identity_checks(names)
    passed = sum(1 for result in results.values() if result["status"] == "pass")
    logger.info(f"Identity suite: {passed}/{len(results)} checks passed")
    return {
        "suite_status": _determine_suite_status(results),
        "passed": passed,
        "failed": len(results) - passed,
        "checks": results,
    }
