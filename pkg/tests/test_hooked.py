import math

import numpy as np
import pytest
from pydantic import ValidationError

from utils import pelliptic
from utils.curves import bending_energy, sample_segment, sample_wavelike
from utils.errors import BranchError, DomainError, FlatCoreSumError
from utils.hooked import (
    HookedBranch,
    HookedProblem,
    branch_energy,
    build_hooked,
    build_hooked_report,
    classify_branch,
    flatcore_constant,
    hooked_alpha,
    jensen_bound,
    make_branch,
    minimal_energy,
    required_hooked_flat_total,
    verify_hooked_bc,
)

ENERGY_CASES = [(2.0, 0.2), (2.0, 0.5), (2.0, 0.8), (4.0, 0.2), (4.0, 0.4), (4.0, 0.7)]


def test_problem_validation():
    assert HookedProblem(p=3.0, ell=1.0, L=2.0).ratio == 0.5
    with pytest.raises(ValidationError):
        HookedProblem(p=3.0, ell=2.0, L=2.0)
    with pytest.raises(ValidationError):
        HookedProblem(p=1.0, ell=0.5, L=2.0)


@pytest.mark.parametrize("p,ell,L,expected", [
    (2.0, 0.9, 1.0, "wavelike"),
    (1.5, 0.1, 1.0, "wavelike"),
    (4.0, 0.2, 1.0, "wavelike"),
    (4.0, 0.4, 1.0, "flatcore"),
    (4.0, 1.0, 3.0, "flatcore"),
])
def test_classify_branch(p, ell, L, expected):
    assert classify_branch(HookedProblem(p=p, ell=ell, L=L)) == expected


def test_make_branch_solves_modulus():
    prob = HookedProblem(p=2.0, ell=0.5, L=1.0)
    branch = make_branch(prob)
    assert branch.kind == "wavelike"
    assert pelliptic.Qp(2.0, branch.q) == pytest.approx(-0.5, abs=1e-10)


def test_make_branch_splits_flat_total():
    prob = HookedProblem(p=4.0, ell=0.7, L=1.0)
    branch = make_branch(prob, n=3, signs="+-+")
    assert branch.signs == (1, -1, 1)
    assert sum(branch.flat_lengths) == pytest.approx(required_hooked_flat_total(4.0, 3, 0.7))
    assert len(set(branch.flat_lengths)) == 1


def test_branch_validation():
    with pytest.raises(ValidationError):
        HookedBranch(kind="wavelike", q=1.0)
    with pytest.raises(ValidationError):
        HookedBranch(kind="flatcore", n=2, signs="+", flat_lengths=[0.1, 0.1])
    with pytest.raises(ValidationError):
        HookedBranch(kind="flatcore", n=1, signs="+", flat_lengths=[-0.1])


@pytest.mark.parametrize("p,ratio", ENERGY_CASES)
def test_minimal_energy_matches_quadrature(p, ratio):
    prob = HookedProblem(p=p, ell=ratio, L=1.0)
    curve = build_hooked(prob, make_branch(prob, 1))
    assert bending_energy(curve) == pytest.approx(minimal_energy(prob), rel=1e-6)
    assert verify_hooked_bc(curve).passed


@pytest.mark.parametrize("p,ratio", ENERGY_CASES)
def test_hooked_geometry(p, ratio):
    L = 2.5
    prob = HookedProblem(p=p, ell=ratio * L, L=L)
    curve = build_hooked(prob, make_branch(prob, 2), M=400)
    assert curve.length == pytest.approx(L, rel=1e-10)
    assert curve.x[-1] - curve.x[0] == pytest.approx(prob.ell, rel=1e-8)
    np.testing.assert_allclose(curve.tangent(-1), [-1.0, 0.0], atol=1e-10)
    assert curve.construction["n"] == 2


@pytest.mark.parametrize("p,ratio", [(2.0, 0.5), (4.0, 0.2), (4.0, 0.7), (3.0, 0.6)])
def test_branch_energies_grow_like_odd_powers(p, ratio):
    prob = HookedProblem(p=p, ell=ratio, L=1.0)
    energies = [branch_energy(prob, make_branch(prob, n)) for n in range(1, 6)]
    assert energies[0] == pytest.approx(minimal_energy(prob), rel=1e-12)
    for n, energy in enumerate(energies, start=1):
        assert energy / energies[0] == pytest.approx((2 * n - 1) ** p, rel=1e-8)
    assert all(b > a for a, b in zip(energies, energies[1:]))


def test_higher_branch_energy_matches_quadrature():
    prob = HookedProblem(p=4.0, ell=0.6, L=1.0)
    branch = make_branch(prob, 2, signs="+-")
    assert bending_energy(build_hooked(prob, branch)) == pytest.approx(branch_energy(prob, branch), rel=1e-6)


def test_flat_core_alpha():
    prob = HookedProblem(p=4.0, ell=0.6, L=1.0)
    branch = make_branch(prob)
    K = pelliptic.K1p(4.0, 1.0)
    assert hooked_alpha(prob, branch) == pytest.approx(K * (2.0 / 3.0) / 0.4)


def test_branch_mismatch_is_rejected():
    wavelike = HookedProblem(p=2.0, ell=0.5, L=1.0)
    with pytest.raises(BranchError):
        build_hooked(wavelike, HookedBranch(kind="flatcore", n=1, signs="+", flat_lengths=[0.1]))
    with pytest.raises(BranchError):
        build_hooked(wavelike, HookedBranch(kind="wavelike", q=0.3))


def test_flat_sum_is_enforced():
    prob = HookedProblem(p=4.0, ell=0.5, L=1.0)
    with pytest.raises(FlatCoreSumError):
        build_hooked(prob, HookedBranch(kind="flatcore", n=1, signs="+", flat_lengths=[0.123]))


def test_boundary_check_fails_without_curvature():
    report = verify_hooked_bc(sample_segment(1.0, 50, p=4.0))
    assert not report.passed
    assert report.model_dump(by_alias=True)["pass"] is False


def test_boundary_check_fails_on_wrong_end():
    prob = HookedProblem(p=4.0, ell=0.6, L=1.0)
    curve = build_hooked(prob, make_branch(prob))
    assert not verify_hooked_bc(curve, mirrored=True).passed


@pytest.mark.parametrize("ratio", [0.3, 0.6])
def test_mirrored_report(ratio):
    prob = HookedProblem(p=4.0, ell=ratio, L=1.0)
    report, curve = build_hooked_report(prob, n=1, M=800, mirrored=True)
    assert report["bc_report"]["pass"]
    assert report["bc_report"]["mirrored"]
    assert abs(curve.kappa[-1]) < 1e-12
    np.testing.assert_allclose(curve.tangent(0), [-1.0, 0.0], atol=1e-10)


def test_report_contents():
    report, _ = build_hooked_report(HookedProblem(p=2.0, ell=0.4, L=1.0), n=1, M=800)
    assert report["branch"] == "wavelike"
    assert 0.0 < report["q"] < 1.0
    assert report["energy_quadrature"] == pytest.approx(report["energy_closed_form"], rel=1e-6)
    assert set(report["bc_report"]) == {"k0", "kL", "wprimeL", "tol", "pass", "mirrored"}

    report, _ = build_hooked_report(HookedProblem(p=4.0, ell=0.5, L=1.0), n=2, M=400, signs="++")
    assert report["branch"] == "flatcore"
    assert "q" not in report


def test_flatcore_constant():
    assert flatcore_constant(4.0) == pytest.approx(74.69, rel=1e-3)
    with pytest.raises(DomainError):
        flatcore_constant(2.0)


def test_jensen_bound_value():
    value = jensen_bound(4.0, 2, 3.0, 1.0)
    assert value == pytest.approx(flatcore_constant(4.0) * 2.0 ** 4 / 2.0 ** 3)
    # equality on N identical minimal hooked pieces
    prob = HookedProblem(p=4.0, ell=0.6, L=1.0)
    assert jensen_bound(4.0, 3, 3.0, 1.8) == pytest.approx(3.0 * minimal_energy(prob))


@pytest.mark.parametrize("p,N,L,ell", [
    (2.0, 1, 1.0, 0.5),
    (4.0, 1, 1.0, 1.0),
    (4.0, 1, 1.0, 0.0),
    (4.0, 0, 1.0, 0.5),
    (4.0, 1.5, 1.0, 0.5),
])
def test_jensen_bound_domain(p, N, L, ell):
    with pytest.raises(DomainError):
        jensen_bound(p, N, L, ell)


def test_wavelike_minimum_for_p_two_matches_classical_form():
    prob = HookedProblem(p=2.0, ell=0.5, L=1.0)
    q = pelliptic.solve_modulus(2.0, 0.5)
    K = pelliptic.K1p(2.0, q)
    E = pelliptic.E1p(2.0, q)
    closed = 4.0 * K * (E + (q * q - 1.0) * K)
    assert minimal_energy(prob) == pytest.approx(closed, rel=1e-12)
    assert math.isfinite(closed)


@pytest.mark.parametrize("p", [3.0, 4.0, 8.0])
def test_split_minimal_energies_respect_relaxation_bound(p):
    for pieces in ([(1.0, 0.5), (2.0, 1.2)], [(1.0, 0.7), (3.0, 1.8)]):
        probs = [HookedProblem(p=p, ell=ell, L=L) for L, ell in pieces]
        assert all(classify_branch(prob) == "flatcore" for prob in probs)
        total = sum(minimal_energy(prob) for prob in probs)
        bound = jensen_bound(p, 2, sum(L for L, _ in pieces), sum(ell for _, ell in pieces))
        assert total > bound
    # equal free lengths attain the bound
    probs = [HookedProblem(p=p, ell=0.5, L=1.0), HookedProblem(p=p, ell=1.0, L=1.5)]
    assert sum(minimal_energy(prob) for prob in probs) == pytest.approx(jensen_bound(p, 2, 2.5, 1.5), rel=1e-12)


def test_wavelike_cut_off_the_apex_fails_boundary_check():
    prob = HookedProblem(p=4.0, ell=0.2, L=1.0)
    branch = make_branch(prob, 1)
    assert verify_hooked_bc(build_hooked(prob, branch)).passed
    K = pelliptic.K1p(4.0, branch.q)
    report = verify_hooked_bc(sample_wavelike(4.0, branch.q, K, 1.6 * K, 1000))
    assert not report.passed
    assert abs(report.wprimeL) > report.tol
