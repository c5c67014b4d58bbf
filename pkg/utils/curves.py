"""
Planar p-elastica curves: sampling, concatenation, similarity transforms,
bending energy and Euler-Lagrange checks.

Curves are stored as arclength-sampled arrays. A concatenation remembers
the index range of every piece so quadratures can run piecewise and
curvature kinks at junctions land on quadrature breakpoints.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.integrate import simpson

from utils import pelliptic
from utils.errors import DomainError, FlatCoreSumError, LambdaUndeterminedError
from utils.numerics import simpson_with_error

logger = logging.getLogger(__name__)

Sign = Union[int, str]
DEFAULT_SAMPLES = 1000


def sign_value(sign: Sign) -> int:
    """Map '+', '-', '−', 1 or -1 to +1 / -1."""
    if sign in ("+", 1, "1", "+1"):
        return 1
    if sign in ("-", "−", -1, "-1"):
        return -1
    raise DomainError(f"sign must be '+' or '-', got {sign!r}")


@dataclass(frozen=True)
class CurvePiece:
    """Node range [start, stop] (inclusive) of one constituent curve."""

    kind: str
    start: int
    stop: int
    sign: int = 0

    def shifted(self, offset: int) -> "CurvePiece":
        return dataclasses.replace(self, start=self.start + offset, stop=self.stop + offset)


@dataclass(frozen=True)
class ArcCurve:
    """Arclength-sampled planar curve with tangential angle and signed curvature."""

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    p: Optional[float]
    pieces: Tuple[CurvePiece, ...] = ()
    construction: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.s)
        if n < 2:
            raise DomainError("a curve needs at least two samples")
        for name in ("x", "y", "theta", "kappa"):
            if len(getattr(self, name)) != n:
                raise DomainError(f"curve array {name} has length {len(getattr(self, name))}, expected {n}")
        if self.s[0] != 0.0 or np.any(np.diff(self.s) <= 0.0):
            raise DomainError("arclength must start at 0 and increase strictly")
        for name in ("s", "x", "y", "theta", "kappa"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not self.pieces:
            object.__setattr__(self, "pieces", (CurvePiece("curve", 0, n - 1),))

    @property
    def length(self) -> float:
        return float(self.s[-1])

    @property
    def position(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    @property
    def displacement(self) -> np.ndarray:
        return np.array([self.x[-1] - self.x[0], self.y[-1] - self.y[0]])

    def tangent(self, index: int) -> np.ndarray:
        return np.array([math.cos(self.theta[index]), math.sin(self.theta[index])])

    @property
    def samples(self) -> List[Tuple[float, Tuple[float, float], float, float]]:
        return list(self.iter_samples())

    def iter_samples(self) -> Iterator[Tuple[float, Tuple[float, float], float, float]]:
        for s, x, y, th, k in zip(self.s, self.x, self.y, self.theta, self.kappa):
            yield float(s), (float(x), float(y)), float(th), float(k)

    def piece_slices(self) -> Iterator[Tuple[CurvePiece, slice]]:
        for piece in self.pieces:
            yield piece, slice(piece.start, piece.stop + 1)

    def with_kappa(self, kappa: np.ndarray) -> "ArcCurve":
        return dataclasses.replace(self, kappa=np.asarray(kappa, dtype=float))


class PlanarTransform(BaseModel):
    """Similarity applied as reflection, dilation, rotation, then translation."""

    model_config = ConfigDict(frozen=True)

    rotation: float = 0.0
    reflect: bool = False
    scale: float = Field(1.0, gt=0)
    translation: Tuple[float, float] = (0.0, 0.0)


class FlatCoreSpec(BaseModel):
    """Flat-core pinned p-elastica: N loops separated by N+1 straight parts."""

    model_config = ConfigDict(frozen=True)

    p: float
    N: int = Field(ge=1)
    signs: Tuple[int, ...]
    flat_lengths: Tuple[float, ...]
    r: float

    @field_validator("signs", mode="before")
    @classmethod
    def _parse_signs(cls, value):
        if isinstance(value, str):
            value = list(value)
        return tuple(sign_value(v) for v in value)

    @model_validator(mode="after")
    def _check(self) -> "FlatCoreSpec":
        if not math.isfinite(self.p) or self.p <= 2.0:
            raise ValueError(f"flat cores need p > 2, got {self.p}")
        if len(self.signs) != self.N:
            raise ValueError(f"expected {self.N} signs, got {len(self.signs)}")
        if len(self.flat_lengths) != self.N + 1:
            raise ValueError(f"expected {self.N + 1} flat lengths, got {len(self.flat_lengths)}")
        if any(length < 0.0 for length in self.flat_lengths):
            raise ValueError("flat lengths must be nonnegative")
        lower = 1.0 / (self.p - 1.0)
        if not (lower <= self.r < 1.0):
            raise ValueError(f"r must lie in [{lower}, 1), got {self.r}")
        return self

    @classmethod
    def uniform(cls, p: float, N: int, signs, r: float) -> "FlatCoreSpec":
        total = required_flat_total(p, N, r)
        return cls(p=p, N=N, signs=signs, flat_lengths=[total / (N + 1)] * (N + 1), r=r)

    @property
    def alternating(self) -> bool:
        return all(length > 0.0 for length in self.flat_lengths)

    @property
    def length(self) -> float:
        return 2 * self.N * pelliptic.K1p(self.p, 1.0) + sum(self.flat_lengths)

    @property
    def ell(self) -> float:
        return 2 * self.N * pelliptic.K1p(self.p, 1.0) / (self.p - 1.0) + sum(self.flat_lengths)


def required_flat_total(p: float, N: int, r: float) -> float:
    """Total flat length 2N (r - 1/(p-1)) / (1 - r) K_p(1)."""
    return 2 * N * (r - 1.0 / (p - 1.0)) / (1.0 - r) * pelliptic.K1p(p, 1.0)


def ratio_for_flat_lengths(p: float, N: int, flat_lengths: Sequence[float]) -> float:
    """The r at which the given flat lengths satisfy the flat-sum relation."""
    total = float(sum(flat_lengths))
    loops = 2 * N * pelliptic.K1p(p, 1.0)
    return (total + loops / (p - 1.0)) / (total + loops)


def loop_lambda(p: float) -> float:
    """Multiplier (p-1) 2^(p-1) of the unit loop and of flat-core curves."""
    return (p - 1.0) * 2.0 ** (p - 1.0)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _check_samples(M: int) -> int:
    if int(M) != M or M < 2:
        raise DomainError(f"sample count M must be an integer >= 2, got {M}")
    return int(M)


def sample_wavelike(p: float, q: float, s_lo: float, s_hi: float, M: int) -> ArcCurve:
    """Wavelike p-elastica on [s_lo, s_hi]: x = 2E(am(s)) - s, k = 2q cn_p(s)."""
    p, M = float(p), _check_samples(M)
    if not (0.0 < q < 1.0):
        raise DomainError(f"wavelike curves need q in (0, 1), got {q}")
    if not s_hi > s_lo:
        raise DomainError(f"empty parameter range [{s_lo}, {s_hi}]")

    s = np.linspace(0.0, s_hi - s_lo, M + 1)
    sample = pelliptic.elliptic_sample(p, s_lo + s, q)
    cn = sample.cn
    return ArcCurve(
        s=s,
        x=2.0 * sample.e_of_am - (s_lo + s),
        y=-q * p / (p - 1.0) * np.sign(cn) * np.abs(cn) ** (p - 1.0),
        theta=2.0 * np.arcsin(np.clip(q * sample.sn, -1.0, 1.0)),
        kappa=2.0 * q * cn,
        p=p,
        pieces=(CurvePiece("wavelike", 0, M),),
        construction={"family": "wavelike", "p": p, "q": q, "s_lo": s_lo, "s_hi": s_hi, "M": M},
    )


@lru_cache(maxsize=32)
def _loop_arrays(p: float, M: int, half: bool):
    K = pelliptic.K1p(p, 1.0)
    t = np.linspace(-K, 0.0 if half else K, M + 1)
    am = np.empty_like(t)
    cos_am = np.empty_like(t)
    tanh = np.empty_like(t)

    inner = slice(1, None) if half else slice(1, -1)
    sample = pelliptic.elliptic_sample(p, t[inner], 1.0)
    am[inner], cos_am[inner], tanh[inner] = sample.am, sample.cos_am, sample.e_of_am
    # endpoints at -K (and +K) are the zeros of sech_p
    E = pelliptic.E1p(p, 1.0)
    am[0], cos_am[0], tanh[0] = -pelliptic.HALF_PI, 0.0, -E
    if not half:
        am[-1], cos_am[-1], tanh[-1] = pelliptic.HALF_PI, 0.0, E

    sech = np.abs(cos_am) ** (2.0 / p)
    arrays = (
        t - t[0],
        2.0 * tanh - t,
        -p / (p - 1.0) * sech ** (p - 1.0),
        2.0 * am,
        2.0 * sech,
    )
    for arr in arrays:
        arr.setflags(write=False)
    logger.debug(f"Sampled {'half ' if half else ''}loop for p={p} with M={M}")
    return arrays


def _loop_curve(p: float, sign: Sign, M: int, half: bool) -> ArcCurve:
    p, M = float(p), _check_samples(M)
    if p <= 2.0:
        raise DomainError(f"loops exist only for p > 2, got p={p}")
    sigma = sign_value(sign)
    s, x, y, theta, kappa = _loop_arrays(p, M, half)
    kind = "half_loop" if half else "loop"
    return ArcCurve(
        s=s, x=x, y=sigma * y, theta=sigma * theta, kappa=sigma * kappa, p=p,
        pieces=(CurvePiece(kind, 0, M, sigma),),
        construction={"family": kind, "p": p, "sign": sigma, "M": M},
    )


def sample_loop(p: float, sign: Sign, M: int = DEFAULT_SAMPLES) -> ArcCurve:
    """Loop on [-K_p(1), K_p(1)]: (2 tanh_p s - s, -/+ p/(p-1) sech_p(s)^(p-1))."""
    return _loop_curve(p, sign, M, half=False)


def sample_half_loop(p: float, sign: Sign, M: int = DEFAULT_SAMPLES) -> ArcCurve:
    """First half of the loop, on [-K_p(1), 0], ending at the apex."""
    return _loop_curve(p, sign, M, half=True)


def sample_segment(L: float, M: int = DEFAULT_SAMPLES, p: Optional[float] = None) -> ArcCurve:
    """Straight piece (-s, 0) of length L."""
    M = _check_samples(M)
    if not L > 0.0:
        raise DomainError(f"segment length must be positive, got {L}")
    s = np.linspace(0.0, L, M + 1)
    zeros = np.zeros_like(s)
    return ArcCurve(
        s=s, x=-s, y=zeros, theta=np.full_like(s, math.pi), kappa=zeros, p=p,
        pieces=(CurvePiece("segment", 0, M),),
        construction={"family": "segment", "L": L, "M": M},
    )


# ---------------------------------------------------------------------------
# assembly and transforms
# ---------------------------------------------------------------------------

def concat(curves: Sequence[ArcCurve]) -> ArcCurve:
    """Arclength concatenation; junction nodes keep the left piece's curvature."""
    if not curves:
        raise DomainError("concat needs at least one curve")
    exponents = {c.p for c in curves if c.p is not None}
    if len(exponents) > 1:
        raise DomainError(f"cannot concatenate curves with different p: {sorted(exponents)}")
    if len(curves) == 1:
        return curves[0]

    first = curves[0]
    s, x, y = [first.s], [first.x], [first.y]
    theta, kappa = [first.theta], [first.kappa]
    pieces = list(first.pieces)
    nodes = len(first.s)

    for curve in curves[1:]:
        dx = x[-1][-1] - curve.x[0]
        dy = y[-1][-1] - curve.y[0]
        turns = round((theta[-1][-1] - curve.theta[0]) / (2.0 * math.pi))
        s.append(curve.s[1:] + s[-1][-1])
        x.append(curve.x[1:] + dx)
        y.append(curve.y[1:] + dy)
        theta.append(curve.theta[1:] + 2.0 * math.pi * turns)
        kappa.append(curve.kappa[1:])
        pieces.extend(piece.shifted(nodes - 1) for piece in curve.pieces)
        nodes += len(curve.s) - 1

    return ArcCurve(
        s=np.concatenate(s), x=np.concatenate(x), y=np.concatenate(y),
        theta=np.concatenate(theta), kappa=np.concatenate(kappa),
        p=exponents.pop() if exponents else None,
        pieces=tuple(pieces),
        construction={"family": "concat", "parts": [c.construction for c in curves]},
    )


def apply_transform(curve: ArcCurve, t: PlanarTransform) -> ArcCurve:
    x, y = curve.x, curve.y
    theta, kappa = curve.theta, curve.kappa
    if t.reflect:
        y, theta, kappa = -y, -theta, -kappa
    x, y, s = t.scale * x, t.scale * y, t.scale * curve.s
    kappa = kappa / t.scale
    c, sn = math.cos(t.rotation), math.sin(t.rotation)
    x, y = c * x - sn * y + t.translation[0], sn * x + c * y + t.translation[1]
    pieces = curve.pieces
    if t.reflect:
        pieces = tuple(dataclasses.replace(piece, sign=-piece.sign) for piece in pieces)
    return dataclasses.replace(curve, s=s, x=x, y=y, theta=theta + t.rotation, kappa=kappa,
                               pieces=pieces)


def translate_to_origin(curve: ArcCurve) -> ArcCurve:
    return apply_transform(curve, PlanarTransform(translation=(-curve.x[0], -curve.y[0])))


def reverse_curve(curve: ArcCurve) -> ArcCurve:
    """Same trace traversed from the other end."""
    last = len(curve.s) - 1
    pieces = tuple(
        CurvePiece(piece.kind, last - piece.stop, last - piece.start, -piece.sign)
        for piece in reversed(curve.pieces)
    )
    return dataclasses.replace(
        curve,
        s=curve.length - curve.s[::-1],
        x=curve.x[::-1], y=curve.y[::-1],
        theta=curve.theta[::-1] + math.pi,
        kappa=-curve.kappa[::-1],
        pieces=pieces,
        construction={**curve.construction, "reversed": not curve.construction.get("reversed", False)},
    )


def mirror_hooked(curve: ArcCurve) -> ArcCurve:
    """Hooked curve of the mirrored class: start tangent -e1, k vanishing at the end."""
    return apply_transform(reverse_curve(curve), PlanarTransform(rotation=math.pi, reflect=True))


def build_flat_core(spec: FlatCoreSpec, M_per_piece: int = DEFAULT_SAMPLES) -> ArcCurve:
    """Segments and loops alternating as in the pinned flat-core family."""
    target = required_flat_total(spec.p, spec.N, spec.r)
    total = sum(spec.flat_lengths)
    if abs(total - target) > 1e-9 * max(1.0, abs(target)):
        raise FlatCoreSumError(
            f"sum-flatparts violated: flat lengths add to {total!r}, expected {target!r}")

    parts: List[ArcCurve] = []
    for length, sigma in zip(spec.flat_lengths, spec.signs):
        if length > 0.0:
            parts.append(sample_segment(length, M_per_piece, p=spec.p))
        parts.append(sample_loop(spec.p, sigma, M_per_piece))
    if spec.flat_lengths[-1] > 0.0:
        parts.append(sample_segment(spec.flat_lengths[-1], M_per_piece, p=spec.p))

    curve = concat(parts)
    logger.info(f"Built flat-core curve p={spec.p}, N={spec.N}, length={curve.length:.6f}")
    return dataclasses.replace(curve, construction={
        "family": "flatcore",
        "p": spec.p,
        "N": spec.N,
        "signs": list(spec.signs),
        "flat_lengths": list(spec.flat_lengths),
        "r": spec.r,
        "M_per_piece": M_per_piece,
    })


def flat_core_curvature(spec: FlatCoreSpec, s: np.ndarray) -> np.ndarray:
    """Closed-form curvature sum_j sigma_j 2 sech_p(s - s_j)."""
    K = pelliptic.K1p(spec.p, 1.0)
    total = np.zeros_like(np.asarray(s, dtype=float))
    cumulative = 0.0
    for j, sigma in enumerate(spec.signs, start=1):
        cumulative += spec.flat_lengths[j - 1]
        centre = (2 * j - 1) * K + cumulative
        total = total + sigma * 2.0 * pelliptic.sechp(spec.p, np.asarray(s) - centre)
    return total


# ---------------------------------------------------------------------------
# energy and Euler-Lagrange
# ---------------------------------------------------------------------------

def _exponent(curve: ArcCurve) -> float:
    if curve.p is None:
        if np.any(curve.kappa != 0.0):
            raise DomainError("curve has no exponent p but nonzero curvature")
        return 2.0
    return curve.p


def bending_energy(curve: ArcCurve, with_error: bool = False):
    """Integral of |k|^p ds by composite Simpson on every piece."""
    p = _exponent(curve)
    energy, error = 0.0, 0.0
    for piece, sl in curve.piece_slices():
        if piece.kind == "segment":
            continue
        value, err = simpson_with_error(np.abs(curve.kappa[sl]) ** p, curve.s[sl])
        energy += value
        error += err
    return (energy, error) if with_error else energy


def _w(kappa: np.ndarray, p: float) -> np.ndarray:
    return np.sign(kappa) * np.abs(kappa) ** (p - 1.0)


def estimate_lambda(curve: ArcCurve) -> float:
    """Least-squares multiplier from  lambda k = p w'' + (p-1)|k|^p k,  w = |k|^(p-2) k.

    Only stencils where every node has |k| >= 0.1 max|k| contribute.
    """
    p = _exponent(curve)
    k_max = float(np.max(np.abs(curve.kappa)))
    if k_max == 0.0:
        raise LambdaUndeterminedError("lambda undetermined: curvature vanishes identically")
    floor = 0.1 * k_max

    numerator, denominator = 0.0, 0.0
    for piece, sl in curve.piece_slices():
        k = curve.kappa[sl]
        s = curve.s[sl]
        if len(k) < 5:
            continue
        h = (s[-1] - s[0]) / (len(s) - 1)
        w = _w(k, p)
        w2 = (-w[:-4] + 16.0 * w[1:-3] - 30.0 * w[2:-2] + 16.0 * w[3:-1] - w[4:]) / (12.0 * h * h)
        strong = np.abs(k) >= floor
        mask = strong[:-4] & strong[1:-3] & strong[2:-2] & strong[3:-1] & strong[4:]
        kc = k[2:-2][mask]
        residual = p * w2[mask] + (p - 1.0) * np.abs(kc) ** p * kc
        numerator += float(np.dot(kc, residual))
        denominator += float(np.dot(kc, kc))

    if denominator == 0.0:
        raise LambdaUndeterminedError("lambda undetermined: no samples above the curvature floor")
    return numerator / denominator


def _bump(s: np.ndarray, L: float, j: int):
    """sin^4(pi s/L) sin(j pi s/L) and its first two derivatives."""
    omega = math.pi / L
    a = omega * s
    S, C = np.sin(a), np.cos(a)
    sj, cj = np.sin(j * a), np.cos(j * a)
    phi = S ** 4 * sj
    dphi = omega * (4.0 * S ** 3 * C * sj + j * S ** 4 * cj)
    ddphi = omega ** 2 * ((12.0 * S ** 2 * C ** 2 - 4.0 * S ** 4 - j * j * S ** 4) * sj
                          + 8.0 * j * S ** 3 * C * cj)
    return phi, dphi, ddphi


def _piecewise_simpson(curve: ArcCurve, values: np.ndarray) -> float:
    return sum(float(simpson(values[sl], x=curve.s[sl])) for _, sl in curve.piece_slices())


def el_residual(curve: ArcCurve, lam: float, n_test: int = 8) -> float:
    """Largest weak Euler-Lagrange residual over normalised sine-bump test functions."""
    if n_test < 1:
        raise DomainError(f"n_test must be >= 1, got {n_test}")
    p = _exponent(curve)
    k = curve.kappa
    w = _w(k, p)
    worst = 0.0
    for j in range(1, n_test + 1):
        phi, dphi, ddphi = _bump(curve.s, curve.length, j)
        norm = _piecewise_simpson(curve, np.abs(phi) ** p + np.abs(dphi) ** p + np.abs(ddphi) ** p)
        norm = norm ** (1.0 / p)
        integrand = p * w * ddphi + (p - 1.0) * np.abs(k) ** p * k * phi - lam * k * phi
        worst = max(worst, abs(_piecewise_simpson(curve, integrand)) / norm)
    return worst
