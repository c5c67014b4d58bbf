"""
Discrete stability probe for pinned flat-core p-elasticae.

A pinned curve of length L is discretised into M chords of equal length h
with turning angles theta_0..theta_{M-1}. The discrete bending energy is
E_h = h sum |(theta_{i+1} - theta_i)/h|^p, and the pinned boundary condition
becomes the two scalar constraints h sum cos(theta) = dx, h sum sin(theta) = dy.

The probe relaxes the discretised curve, perturbs it with seeded low-frequency
noise (optionally after sliding it along itself, which unwinds a loop sitting
on an endpoint), descends again, and compares energies. Along the way it cuts each
iterate at loop apices and inner midpoints and checks the relaxation bound
on the summed energies of the hooked pieces.
"""

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Literal, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import solveh_banded

from utils.curves import ArcCurve, FlatCoreSpec, build_flat_core
from utils import pelliptic
from utils.errors import DomainError, PartitionUnavailableError, ProjectionError
from utils.hooked import jensen_bound

logger = logging.getLogger(__name__)

Verdict = Literal["stable-consistent", "instability-witness", "inconclusive"]
DescentStatus = Literal["converged", "max-iter", "line-search-failed", "unperturbed"]

PROJECTION_TOL = 1e-10
PROJECTION_MAX_ITER = 50
PERTURBATION_MODES = 10
ARMIJO_C = 1e-4
MAX_HALVINGS = 20
STEP_CAP = 0.05
# predicted decrease per step, relative to the energy, below which descent has stalled
STALL_TOL = 1e-10
APEX_DELTA = 0.05

ENERGY_TOL_FACTOR = 1e-3
WITNESS_MARGIN = 0.05
DEV_CAP = 0.1


@dataclass(frozen=True)
class DiscreteCurve:
    """Turning-angle state of a discretised curve.

    ``windows`` are arclength intervals known to contain one loop each,
    carried over from the construction when available.
    """

    thetas: np.ndarray
    h: float
    p: float
    windows: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        thetas = np.array(self.thetas, dtype=float)
        if thetas.ndim != 1 or len(thetas) < 3:
            raise DomainError(f"a discrete curve needs at least 3 angles, got {thetas.shape}")
        if not self.h > 0.0:
            raise DomainError(f"segment length h must be positive, got {self.h}")
        if not self.p > 1.0:
            raise DomainError(f"p must exceed 1, got {self.p}")
        thetas.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)

    @property
    def M(self) -> int:
        return len(self.thetas)

    @property
    def length(self) -> float:
        return self.M * self.h

    @property
    def stations(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) * self.h

    def displacement(self) -> np.ndarray:
        return self.h * np.array([np.sum(np.cos(self.thetas)), np.sum(np.sin(self.thetas))])

    def vertices(self) -> np.ndarray:
        steps = self.h * np.column_stack([np.cos(self.thetas), np.sin(self.thetas)])
        return np.vstack([np.zeros(2), np.cumsum(steps, axis=0)])

    def with_thetas(self, thetas: np.ndarray) -> "DiscreteCurve":
        return dataclasses.replace(self, thetas=thetas)


class PinnedConstraint(BaseModel):
    model_config = ConfigDict(frozen=True)

    dx: float
    dy: float

    @property
    def target(self) -> np.ndarray:
        return np.array([self.dx, self.dy])


class DescentResult(NamedTuple):
    curve: DiscreteCurve
    energy: float
    iterations: int
    status: DescentStatus
    history: List[float]


class PiecePartition(BaseModel):
    L: float
    ell: float
    energy: float


class BoundReport(BaseModel):
    """Apex/midpoint partition of a discrete curve and the relaxation bound."""

    cuts: List[int]
    apices: List[int]
    pieces: List[PiecePartition]
    total_energy: float
    bound: Optional[float]
    slack: Optional[float]
    ratios_ok: bool
    bound_ok: bool


class SeedOutcome(BaseModel):
    seed: int
    E_final: float = Field(ge=0.0)
    sup_dev: float
    iterations: int
    status: DescentStatus
    history: List[float] = Field(default_factory=list, exclude=True)
    bound_samples: List[Tuple[Optional[float], Optional[bool]]] = Field(default_factory=list, exclude=True)


class ProbeReport(BaseModel):
    p: float
    N: int
    signs: List[int]
    flat_lengths: List[float]
    alternating: bool
    eps: float
    slide: float = 0.0
    M: int
    E_ref: float
    E_closed_form: float
    reference_status: DescentStatus
    seeds: List[SeedOutcome]
    verdict: Verdict
    bound_checks: int = 0
    bound_failures: int = 0
    min_bound_slack: Optional[float] = None


# ---------------------------------------------------------------------------
# state, energy, constraints
# ---------------------------------------------------------------------------

def discretize(curve: ArcCurve, M: int) -> DiscreteCurve:
    """Angles at the chord midpoints (j + 1/2) h, interpolated with k = theta'."""
    if int(M) != M or M < 3:
        raise DomainError(f"M must be an integer >= 3, got {M}")
    if curve.p is None:
        raise DomainError("discretize needs a curve with an exponent p")
    h = curve.length / M
    stations = (np.arange(M) + 0.5) * h
    theta = CubicHermiteSpline(curve.s, curve.theta, curve.kappa)(stations)
    windows = tuple(
        (float(curve.s[piece.start]), float(curve.s[piece.stop]))
        for piece in curve.pieces
        if piece.kind in ("loop", "half_loop")
    )
    return DiscreteCurve(thetas=theta, h=h, p=float(curve.p), windows=windows)


def pinned_constraint_for(curve: ArcCurve) -> PinnedConstraint:
    dx, dy = curve.displacement
    return PinnedConstraint(dx=float(dx), dy=float(dy))


def discrete_energy_grad(dc: DiscreteCurve) -> Tuple[float, np.ndarray]:
    """E_h = h sum |kappa_i|^p with kappa_i = (theta_{i+1} - theta_i)/h, and its gradient."""
    p = dc.p
    kappa = np.diff(dc.thetas) / dc.h
    energy = dc.h * float(np.sum(np.abs(kappa) ** p))
    g = p * np.sign(kappa) * np.abs(kappa) ** (p - 1.0)
    grad = np.zeros(dc.M)
    grad[1:] += g
    grad[:-1] -= g
    return energy, grad


def _constraint_residual(thetas: np.ndarray, h: float, target: np.ndarray) -> np.ndarray:
    return h * np.array([np.sum(np.cos(thetas)), np.sum(np.sin(thetas))]) - target


def _constraint_jacobian(thetas: np.ndarray, h: float) -> np.ndarray:
    return h * np.vstack([-np.sin(thetas), np.cos(thetas)])


def project_constraints(dc: DiscreteCurve, c: PinnedConstraint,
                        tol: float = PROJECTION_TOL,
                        max_iter: int = PROJECTION_MAX_ITER) -> DiscreteCurve:
    """Nearest state (least squares in thetas) meeting the pinned displacement.

    Gauss-Newton on the two constraints; each step is the minimum-norm
    correction, so the iteration stays close to the input state.
    """
    target = c.target
    if float(np.hypot(*target)) >= dc.length:
        raise DomainError(f"endpoint gap {np.hypot(*target)} is not below the length {dc.length}")

    thetas = np.array(dc.thetas)
    residual = _constraint_residual(thetas, dc.h, target)
    if np.max(np.abs(residual)) <= tol:
        return dc
    for _ in range(max_iter):
        J = _constraint_jacobian(thetas, dc.h)
        step, *_ = np.linalg.lstsq(J, -residual, rcond=None)
        thetas = thetas + step
        residual = _constraint_residual(thetas, dc.h, target)
        if not np.all(np.isfinite(residual)):
            break
        if np.max(np.abs(residual)) <= tol:
            return dc.with_thetas(thetas)
    raise ProjectionError(
        f"constraint projection did not converge in {max_iter} iterations "
        f"(residual {np.max(np.abs(residual)):.3e})")


def perturb(dc: DiscreteCurve, eps: float, seed: int,
            constraint: Optional[PinnedConstraint] = None) -> DiscreteCurve:
    """Add seeded low-frequency noise with sup norm eps, then reproject.

    Without ``constraint`` the current displacement is kept.
    """
    if eps < 0.0:
        raise DomainError(f"eps must be nonnegative, got {eps}")
    if eps == 0.0:
        return dc
    if constraint is None:
        dx, dy = dc.displacement()
        constraint = PinnedConstraint(dx=float(dx), dy=float(dy))

    rng = np.random.default_rng(seed)
    u = dc.stations / dc.length
    modes = np.arange(1, PERTURBATION_MODES + 1)
    a = rng.standard_normal(PERTURBATION_MODES) / modes
    b = rng.standard_normal(PERTURBATION_MODES) / modes
    phase = math.pi * np.outer(u, modes)
    delta = np.sin(phase) @ a + np.cos(phase) @ b
    delta *= eps / float(np.max(np.abs(delta)))
    return project_constraints(dc.with_thetas(dc.thetas + delta), constraint)


def slide_along(dc: DiscreteCurve, stations: int, constraint: PinnedConstraint) -> DiscreteCurve:
    """Move the curve along itself by ``stations`` chords and restore the pin.

    A positive count drops angles at the start and repeats the last angle at
    the end; a negative count repeats the first angle and drops the end. The
    result is turned so its chord points at the target before reprojection.
    A flat core whose end segment is longer than the slide stays in its
    equal-energy family; a loop on the trimmed end is partly unwound.
    """
    k = int(stations)
    if abs(k) > dc.M - 3:
        raise DomainError(f"cannot slide {dc.M} angles by {k} stations")
    if k == 0:
        return dc

    thetas = dc.thetas
    if k > 0:
        moved = np.concatenate([thetas[k:], np.full(k, thetas[-1])])
    else:
        moved = np.concatenate([np.full(-k, thetas[0]), thetas[:k]])
    dx, dy = _constraint_residual(moved, dc.h, np.zeros(2))
    turn = math.remainder(math.atan2(constraint.dy, constraint.dx) - math.atan2(dy, dx), 2.0 * math.pi)

    shift = k * dc.h
    windows = tuple(
        (max(lo - shift, 0.0), min(hi - shift, dc.length))
        for lo, hi in dc.windows
        if min(hi - shift, dc.length) > max(lo - shift, 0.0)
    )
    moved_dc = dataclasses.replace(dc, thetas=moved + turn, windows=windows)
    return project_constraints(moved_dc, constraint)


# ---------------------------------------------------------------------------
# descent
# ---------------------------------------------------------------------------

def _preconditioner(dc: DiscreteCurve) -> np.ndarray:
    # banded upper form of D^T diag(c) D + delta I
    p = dc.p
    kappa = np.diff(dc.thetas) / dc.h
    curvature = p * (p - 1.0) * np.abs(kappa) ** (p - 2.0)
    top = float(np.max(curvature)) if len(curvature) else 0.0
    floor = 1e-2 * top if top > 0.0 else 1.0
    weights = (curvature + floor) / dc.h

    diag = np.zeros(dc.M)
    diag[:-1] += weights
    diag[1:] += weights
    diag += 1e-8 * float(np.max(diag))
    ab = np.zeros((2, dc.M))
    ab[0, 1:] = -weights
    ab[1, :] = diag
    return ab


def _search_direction(dc: DiscreteCurve, grad: np.ndarray) -> np.ndarray:
    ab = _preconditioner(dc)
    J = _constraint_jacobian(dc.thetas, dc.h)
    rhs = np.column_stack([grad, J.T])
    solved = solveh_banded(ab, rhs)
    p_grad, p_jac = solved[:, 0], solved[:, 1:]
    # multipliers keep the direction tangent to the constraint set
    mu = np.linalg.solve(J @ p_jac, -(J @ p_grad))
    return -(p_grad + p_jac @ mu)


def _projected_gradient(dc: DiscreteCurve, grad: np.ndarray) -> np.ndarray:
    J = _constraint_jacobian(dc.thetas, dc.h)
    mu = np.linalg.solve(J @ J.T, J @ grad)
    return grad - J.T @ mu


def descend(dc: DiscreteCurve, c: PinnedConstraint, max_iter: int = 2000, gtol: float = 1e-8,
            callback: Optional[Callable[[int, DiscreteCurve, float], None]] = None) -> DescentResult:
    """Constrained energy descent with Armijo backtracking and reprojection.

    Directions are gradients in the metric of the (regularised) energy
    Hessian. Steps start at 1, are capped at STEP_CAP in sup norm, and are
    halved at most MAX_HALVINGS times before the run stops with the
    ``line-search-failed`` flag. The run has converged once the projected
    gradient's sup norm is at most ``gtol * max(E, 1)`` or the first trial
    step predicts a decrease below STALL_TOL of the energy.
    ``callback(iteration, state, energy)`` sees every accepted iterate.
    """
    if max_iter < 0:
        raise DomainError(f"max_iter must be nonnegative, got {max_iter}")
    state = project_constraints(dc, c)
    energy, grad = discrete_energy_grad(state)
    history = [energy]
    status: DescentStatus = "max-iter"
    iteration = 0

    while iteration < max_iter:
        scale = max(abs(energy), 1.0)
        if float(np.max(np.abs(_projected_gradient(state, grad)))) <= gtol * scale:
            status = "converged"
            break
        direction = _search_direction(state, grad)
        slope = float(grad @ direction)
        step = min(1.0, STEP_CAP / float(np.max(np.abs(direction))))
        if -slope * step <= STALL_TOL * scale:
            status = "converged"
            break

        accepted = None
        for _ in range(MAX_HALVINGS + 1):
            try:
                trial = project_constraints(state.with_thetas(state.thetas + step * direction), c)
            except ProjectionError:
                step *= 0.5
                continue
            trial_energy, trial_grad = discrete_energy_grad(trial)
            if trial_energy <= energy + ARMIJO_C * step * slope:
                accepted = (trial, trial_energy, trial_grad)
                break
            step *= 0.5
        if accepted is None:
            status = "line-search-failed"
            logger.debug(f"Line search failed at iteration {iteration} (E={energy:.12g})")
            break

        state, energy, grad = accepted
        iteration += 1
        history.append(energy)
        if callback is not None:
            callback(iteration, state, energy)

    logger.debug(f"Descent finished: status={status}, iterations={iteration}, E={energy:.12g}")
    return DescentResult(state, energy, iteration, status, history)


# ---------------------------------------------------------------------------
# closed forms, partition and bound
# ---------------------------------------------------------------------------

def alternating_energy(spec: FlatCoreSpec) -> float:
    """Energy 2^(p+1) N E_{1,p}(1) of a flat core; equals C_p (2N)^p / (L - ell)^(p-1)."""
    return 2.0 ** (spec.p + 1.0) * spec.N * pelliptic.E1p(spec.p, 1.0)


def _apex_windows(dc: DiscreteCurve, psi: float) -> List[np.ndarray]:
    stations = dc.stations
    if dc.windows:
        windows = []
        for lo, hi in dc.windows:
            idx = np.nonzero((stations >= lo) & (stations <= hi))[0]
            if len(idx):
                windows.append(idx)
        return windows
    near = 1.0 + np.cos(dc.thetas - psi) < APEX_DELTA
    windows, start = [], None
    for i, flag in enumerate(near):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            windows.append(np.arange(start, i))
            start = None
    if start is not None:
        windows.append(np.arange(start, dc.M))
    return windows


def partition_and_bound(dc: DiscreteCurve, N: int, tol: Optional[float] = None) -> BoundReport:
    """Cut at N loop apices and the N-1 midpoints between them; check the bound.

    An apex is the station whose tangent is closest to the reverse chord
    direction within a loop window. Each cut c splits edges into [.., c) and
    [c, ..); the edge at an apex stays with the left piece. ``tol`` defaults
    to 1e-3 of the total discrete energy.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    dx, dy = dc.displacement()
    psi = math.atan2(dy, dx)
    alignment = 1.0 + np.cos(dc.thetas - psi)

    candidates = []
    for window in _apex_windows(dc, psi):
        best = int(window[np.argmin(alignment[window])])
        candidates.append((float(alignment[best]), best))
    if len(candidates) < N:
        raise PartitionUnavailableError(f"partition unavailable: found {len(candidates)} apex candidates, need {N}")
    apices = sorted(index for _, index in sorted(candidates)[:N])

    cuts = []
    for i, apex in enumerate(apices):
        cuts.append(apex + 1)
        if i + 1 < N:
            cuts.append((apex + apices[i + 1]) // 2 + 1)
    bounds = [0] + cuts + [dc.M]
    if any(b >= a for a, b in zip(bounds[1:], bounds[:-1])):
        raise PartitionUnavailableError("partition unavailable: apices too close to cut")

    p, h = dc.p, dc.h
    kappa_terms = h * np.abs(np.diff(dc.thetas) / h) ** p
    along = h * np.cos(dc.thetas - psi)
    pieces = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        # the difference across a cut belongs to the left piece
        energy = float(np.sum(kappa_terms[lo:min(hi, dc.M - 1)]))
        pieces.append(PiecePartition(L=(hi - lo) * h, ell=float(np.sum(along[lo:hi])), energy=energy))

    total = float(np.sum(kappa_terms))
    if tol is None:
        tol = ENERGY_TOL_FACTOR * total
    ratios_ok = all(piece.L / (p - 1.0) < piece.ell < piece.L for piece in pieces)
    sum_L = sum(piece.L for piece in pieces)
    sum_ell = sum(piece.ell for piece in pieces)
    bound = slack = None
    if p > 2.0 and 0.0 < sum_ell < sum_L:
        bound = jensen_bound(p, 2 * N, sum_L, sum_ell)
        slack = total - bound
    return BoundReport(
        cuts=cuts,
        apices=apices,
        pieces=pieces,
        total_energy=total,
        bound=bound,
        slack=slack,
        ratios_ok=ratios_ok,
        bound_ok=ratios_ok and slack is not None and slack >= -tol,
    )


# ---------------------------------------------------------------------------
# probe
# ---------------------------------------------------------------------------

def _sup_dev(a: DiscreteCurve, b: DiscreteCurve) -> float:
    return float(np.max(np.abs(np.angle(np.exp(1j * (a.thetas - b.thetas))))))


def _determine_verdict(E_ref: float, outcomes: List[SeedOutcome]) -> Verdict:
    if any(o.E_final <= E_ref * (1.0 - WITNESS_MARGIN) for o in outcomes):
        return "instability-witness"
    tol_E = ENERGY_TOL_FACTOR * E_ref
    if all(o.E_final >= E_ref - tol_E and o.sup_dev <= DEV_CAP for o in outcomes):
        return "stable-consistent"
    return "inconclusive"


def _slide_stations(seed: int, stations: int) -> int:
    # even seeds trim the start, odd seeds trim the end
    return stations if seed % 2 == 0 else -stations


def _run_seed(reference: DiscreteCurve, E_ref: float, constraint: PinnedConstraint, N: int,
              eps: float, stations: int, seed: int, max_iter: int, gtol: float,
              track_bound: bool) -> SeedOutcome:
    if eps == 0.0 and stations == 0:
        return SeedOutcome(seed=seed, E_final=E_ref, sup_dev=0.0, iterations=0, status="unperturbed",
                           history=[E_ref])

    samples: List[Tuple[Optional[float], Optional[bool]]] = []
    tol = ENERGY_TOL_FACTOR * E_ref

    def watch(iteration: int, state: DiscreteCurve, energy: float) -> None:
        try:
            report = partition_and_bound(state, N, tol=tol)
        except PartitionUnavailableError:
            samples.append((None, None))
            return
        samples.append((report.slack, report.bound_ok))

    start = slide_along(reference, _slide_stations(seed, stations), constraint)
    start = perturb(start, eps, seed, constraint)
    result = descend(start, constraint, max_iter=max_iter, gtol=gtol,
                     callback=watch if track_bound else None)
    logger.info(f"Seed {seed}: E_final={result.energy:.10g} after {result.iterations} iterations ({result.status})")
    return SeedOutcome(
        seed=seed,
        E_final=result.energy,
        sup_dev=_sup_dev(result.curve, reference),
        iterations=result.iterations,
        status=result.status,
        history=result.history,
        bound_samples=samples,
    )


def probe_stability(spec: FlatCoreSpec, eps: float, n_seeds: int, M: int,
                    max_iter: int = 2000, gtol: float = 1e-8, seed: int = 0,
                    workers: int = 1, track_bound: bool = True, slide: float = 0.0) -> ProbeReport:
    """Relax, perturb and descend a discretised flat core; report the verdict.

    Seeds are ``seed, seed + 1, ...``; results do not depend on ``workers``.
    ``slide`` is a fraction of the length: before the noise each seed slides
    the relaxed curve by that much, trimming the start on even seeds and the
    end on odd ones.
    """
    if eps < 0.0:
        raise DomainError(f"eps must be nonnegative, got {eps}")
    if n_seeds < 1:
        raise DomainError(f"n_seeds must be >= 1, got {n_seeds}")
    if not 0.0 <= slide < 0.5:
        raise DomainError(f"slide must lie in [0, 0.5), got {slide}")

    curve = build_flat_core(spec)
    constraint = pinned_constraint_for(curve)
    relaxed = descend(discretize(curve, M), constraint, max_iter=max_iter, gtol=gtol)
    E_ref = relaxed.energy
    logger.info(f"Reference energy {E_ref:.10g} ({relaxed.status} after {relaxed.iterations} iterations)")

    seeds = [seed + i for i in range(n_seeds)]
    stations = int(round(slide * M))

    def run(s: int) -> SeedOutcome:
        return _run_seed(relaxed.curve, E_ref, constraint, spec.N, eps, stations, s, max_iter, gtol,
                         track_bound)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, seeds))
    else:
        outcomes = [run(s) for s in seeds]

    samples = [sample for o in outcomes for sample in o.bound_samples if sample[1] is not None]
    slacks = [slack for slack, _ in samples if slack is not None]
    failures = sum(1 for _, ok in samples if not ok)
    verdict = _determine_verdict(E_ref, outcomes)
    logger.info(f"Probe verdict: {verdict} ({len(samples)} bound checks, {failures} failures)")
    return ProbeReport(
        p=spec.p,
        N=spec.N,
        signs=list(spec.signs),
        flat_lengths=list(spec.flat_lengths),
        alternating=spec.alternating,
        eps=eps,
        slide=slide,
        M=M,
        E_ref=E_ref,
        E_closed_form=alternating_energy(spec),
        reference_status=relaxed.status,
        seeds=outcomes,
        verdict=verdict,
        bound_checks=len(samples),
        bound_failures=failures,
        min_bound_slack=min(slacks) if slacks else None,
    )
