"""
Hooked p-elasticae: curves of length L whose horizontal displacement is ell
and whose terminal tangent is -e1.

Two branches exist. Wavelike curves cover p <= 2 and ell/L < 1/(p-1);
flat-core curves (p > 2, ell/L >= 1/(p-1)) are built from segments, full
loops and a closing half loop. Both are indexed by n >= 1, and n = 1 gives
the energy minimiser.
"""

import dataclasses
import logging
import math
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils import pelliptic
from utils.curves import (
    ArcCurve,
    CurvePiece,
    DEFAULT_SAMPLES,
    PlanarTransform,
    apply_transform,
    bending_energy,
    concat,
    mirror_hooked,
    sample_half_loop,
    sample_loop,
    sample_segment,
    sample_wavelike,
    sign_value,
    translate_to_origin,
)
from utils.errors import BranchError, DomainError, FlatCoreSumError

logger = logging.getLogger(__name__)

BranchKind = Literal["wavelike", "flatcore"]

_MODULUS_TOL = 1e-9
_FLAT_SUM_TOL = 1e-9
_BC_RELATIVE_TOL = 1e-6


class HookedProblem(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: float = Field(gt=1.0)
    ell: float
    L: float

    @model_validator(mode="after")
    def _check(self) -> "HookedProblem":
        if not (0.0 < self.ell < self.L):
            raise ValueError(f"need 0 < ell < L, got ell={self.ell}, L={self.L}")
        return self

    @property
    def ratio(self) -> float:
        return self.ell / self.L


class HookedBranch(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: BranchKind
    n: int = Field(1, ge=1)
    q: Optional[float] = None
    signs: Optional[Tuple[int, ...]] = None
    flat_lengths: Optional[Tuple[float, ...]] = None

    @field_validator("signs", mode="before")
    @classmethod
    def _parse_signs(cls, value):
        if value is None:
            return None
        if isinstance(value, str):
            value = list(value)
        return tuple(sign_value(v) for v in value)

    @model_validator(mode="after")
    def _check(self) -> "HookedBranch":
        if self.kind == "wavelike":
            if self.q is None or not (0.0 < self.q < 1.0):
                raise ValueError(f"wavelike branch needs q in (0, 1), got {self.q}")
        else:
            if self.signs is None or len(self.signs) != self.n:
                raise ValueError(f"flat-core branch needs {self.n} signs")
            if self.flat_lengths is None or len(self.flat_lengths) != self.n:
                raise ValueError(f"flat-core branch needs {self.n} flat lengths")
            if any(length < 0.0 for length in self.flat_lengths):
                raise ValueError("flat lengths must be nonnegative")
        return self


class BoundaryReport(BaseModel):
    """Finite-difference boundary data of a candidate hooked curve."""

    model_config = ConfigDict(populate_by_name=True)

    k0: float
    kL: float
    wprimeL: float
    tol: float
    passed: bool = Field(alias="pass")
    mirrored: bool = False


def classify_branch(prob: HookedProblem) -> BranchKind:
    """Wavelike iff p <= 2 or ell/L < 1/(p-1); the boundary ratio is flat-core."""
    if prob.p <= 2.0 or prob.ratio < 1.0 / (prob.p - 1.0):
        return "wavelike"
    return "flatcore"


def required_hooked_flat_total(p: float, n: int, r: float) -> float:
    """(2n-1) (r - 1/(p-1)) / (1 - r) K_p(1)"""
    return (2 * n - 1) * (r - 1.0 / (p - 1.0)) / (1.0 - r) * pelliptic.K1p(p, 1.0)


def make_branch(prob: HookedProblem, n: int = 1, signs=None, flat_lengths=None) -> HookedBranch:
    """Canonical branch: solved modulus, or equal flat lengths and '+' loops."""
    kind = classify_branch(prob)
    if kind == "wavelike":
        return HookedBranch(kind=kind, n=n, q=pelliptic.solve_modulus(prob.p, prob.ratio))
    if signs is None:
        signs = [1] * n
    if flat_lengths is None:
        total = required_hooked_flat_total(prob.p, n, prob.ratio)
        flat_lengths = [total / n] * n
    return HookedBranch(kind=kind, n=n, signs=signs, flat_lengths=flat_lengths)


def hooked_alpha(prob: HookedProblem, branch: HookedBranch) -> float:
    """Dilation factor of the n-th branch."""
    if branch.kind == "wavelike":
        return (2 * branch.n - 1) * pelliptic.K1p(prob.p, branch.q) / prob.L
    p = prob.p
    return (2 * branch.n - 1) / (prob.L - prob.ell) * (p - 2.0) / (p - 1.0) * pelliptic.K1p(p, 1.0)


def _check_branch(prob: HookedProblem, branch: HookedBranch) -> None:
    expected = classify_branch(prob)
    if branch.kind != expected:
        raise BranchError(f"ell/L={prob.ratio} with p={prob.p} is {expected}, got a {branch.kind} branch")
    if branch.kind == "wavelike":
        mismatch = abs(pelliptic.Qp(prob.p, branch.q) + prob.ratio)
        if mismatch > _MODULUS_TOL:
            raise BranchError(f"q={branch.q} does not solve Q_p(q) = -ell/L (mismatch {mismatch:.3e})")
    else:
        target = required_hooked_flat_total(prob.p, branch.n, prob.ratio)
        total = sum(branch.flat_lengths)
        if abs(total - target) > _FLAT_SUM_TOL * max(1.0, abs(target)):
            raise FlatCoreSumError(f"sum-flatparts violated: flat lengths add to {total!r}, expected {target!r}")


def _gamma_n(p: float, branch: HookedBranch, M: int) -> ArcCurve:
    parts = []
    for j in range(branch.n):
        if branch.flat_lengths[j] > 0.0:
            parts.append(sample_segment(branch.flat_lengths[j], M, p=p))
        if j < branch.n - 1:
            parts.append(sample_loop(p, branch.signs[j], M))
        else:
            parts.append(sample_half_loop(p, branch.signs[j], M))
    return concat(parts)


def _wave_quarters(p: float, q: float, n: int, M: int) -> ArcCurve:
    K = pelliptic.K1p(p, q)
    quarters = 2 * n - 1
    raw = sample_wavelike(p, q, K, K + quarters * K, quarters * M)
    pieces = tuple(CurvePiece("wavelike", i * M, (i + 1) * M) for i in range(quarters))
    return dataclasses.replace(raw, pieces=pieces)


def build_hooked(prob: HookedProblem, branch: HookedBranch, M: int = DEFAULT_SAMPLES) -> ArcCurve:
    """Arclength-parametrised hooked curve of length L for the given branch.

    ``M`` is the number of intervals per quarter period (wavelike) or per
    constituent segment and loop (flat-core).
    """
    _check_branch(prob, branch)
    alpha = hooked_alpha(prob, branch)
    if branch.kind == "wavelike":
        raw = _wave_quarters(prob.p, branch.q, branch.n, M)
    else:
        raw = _gamma_n(prob.p, branch, M)

    curve = apply_transform(translate_to_origin(raw), PlanarTransform(rotation=math.pi, scale=1.0 / alpha))
    logger.info(f"Built hooked {branch.kind} curve n={branch.n} (alpha={alpha:.6g}, length={curve.length:.6g})")
    construction: Dict[str, Any] = {
        "family": "hooked",
        "branch": branch.kind,
        "n": branch.n,
        "p": prob.p,
        "ell": prob.ell,
        "L": prob.L,
        "alpha": alpha,
        "M": M,
    }
    if branch.kind == "wavelike":
        construction["q"] = branch.q
    else:
        construction["signs"] = list(branch.signs)
        construction["flat_lengths"] = list(branch.flat_lengths)
    return dataclasses.replace(curve, construction=construction)


def _one_sided_derivative(w: np.ndarray, h: float, at_end: bool) -> float:
    # fourth-order one-sided stencil
    coeffs = np.array([25.0, -48.0, 36.0, -16.0, 3.0])
    if at_end:
        return float(np.dot(coeffs, w[::-1][:5]) / (12.0 * h))
    return float(-np.dot(coeffs, w[:5]) / (12.0 * h))


def verify_hooked_bc(curve: ArcCurve, mirrored: bool = False) -> BoundaryReport:
    """Check k = 0 at the free end, k != 0 and w' = 0 at the hooked end.

    ``mirrored`` swaps the ends, for curves of the mirrored class.
    """
    if len(curve.s) < 5:
        raise DomainError("boundary verification needs at least five samples")
    p = curve.p if curve.p is not None else 2.0
    k = curve.kappa
    w = np.sign(k) * np.abs(k) ** (p - 1.0)
    k_max = float(np.max(np.abs(k)))
    tol = _BC_RELATIVE_TOL * k_max

    if mirrored:
        k_free, k_hook = float(k[-1]), float(k[0])
        wprime = _one_sided_derivative(w, float(curve.s[1] - curve.s[0]), at_end=False)
    else:
        k_free, k_hook = float(k[0]), float(k[-1])
        wprime = _one_sided_derivative(w, float(curve.s[-1] - curve.s[-2]), at_end=True)

    scale = float(np.max(np.abs(np.gradient(w, curve.s)))) / k_max if k_max > 0.0 else 0.0
    passed = (
        k_max > 0.0
        and abs(k_free) <= tol
        and abs(k_hook) >= 10.0 * tol
        and abs(wprime) <= tol * scale
    )
    return BoundaryReport(k0=float(k[0]), kL=float(k[-1]), wprimeL=wprime, tol=tol,
                          passed=passed, mirrored=mirrored)


def flatcore_constant(p: float) -> float:
    """C_p = 2^p K_p(1)^(p-1) E_{1,p}(1) ((p-2)/(p-1))^(p-1)"""
    if p <= 2.0:
        raise DomainError(f"C_p needs p > 2, got {p}")
    K = pelliptic.K1p(p, 1.0)
    E = pelliptic.E1p(p, 1.0)
    return 2.0 ** p * K ** (p - 1.0) * E * ((p - 2.0) / (p - 1.0)) ** (p - 1.0)


def minimal_energy(prob: HookedProblem) -> float:
    """Closed-form minimum of the p-bending energy over the hooked class."""
    p, L = prob.p, prob.L
    if classify_branch(prob) == "flatcore":
        return flatcore_constant(p) / (L - prob.ell) ** (p - 1.0)
    q = pelliptic.solve_modulus(p, prob.ratio)
    K = pelliptic.K1p(p, q)
    return (2.0 * q) ** p * K ** (p - 1.0) * pelliptic.cn_power_closed_form(p, q) / L ** (p - 1.0)


def branch_energy(prob: HookedProblem, branch: HookedBranch) -> float:
    """Closed-form energy of the n-th branch: (2n-1)^p times the minimum."""
    p, n = prob.p, branch.n
    alpha = hooked_alpha(prob, branch)
    if branch.kind == "wavelike":
        quarter = pelliptic.cn_power_closed_form(p, branch.q)
        return (2.0 * branch.q) ** p * alpha ** (p - 1.0) * (2 * n - 1) * quarter
    return 2.0 ** p * alpha ** (p - 1.0) * (2 * n - 1) * pelliptic.E1p(p, 1.0)


def jensen_bound(p: float, N: int, L: float, ell: float) -> float:
    """Lower bound C_p N^p / (L - ell)^(p-1) on the summed energy of N hooked pieces."""
    if p <= 2.0:
        raise DomainError(f"the relaxation bound needs p > 2, got {p}")
    if not (0.0 < ell < L):
        raise DomainError(f"need 0 < ell < L, got ell={ell}, L={L}")
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    return flatcore_constant(p) * N ** p / (L - ell) ** (p - 1.0)


def build_hooked_report(prob: HookedProblem, n: int = 1, M: int = DEFAULT_SAMPLES,
                        signs=None, mirrored: bool = False) -> Tuple[Dict[str, Any], ArcCurve]:
    """Branch, closed-form and quadrature energies, and boundary checks for branch n."""
    branch = make_branch(prob, n, signs=signs)
    curve = build_hooked(prob, branch, M)
    if mirrored:
        curve = mirror_hooked(curve)
    report: Dict[str, Any] = {
        "branch": branch.kind,
        "n": n,
        "energy_closed_form": branch_energy(prob, branch),
        "energy_quadrature": bending_energy(curve),
        "bc_report": verify_hooked_bc(curve, mirrored=mirrored).model_dump(by_alias=True),
    }
    if branch.kind == "wavelike":
        report["q"] = branch.q
    return report, curve
