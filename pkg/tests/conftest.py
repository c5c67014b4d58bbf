"""
Shared fixtures and independent oracles for the test suite
"""

import math

import numpy as np
import pytest
from scipy import special

from utils.curves import FlatCoreSpec


def beta_half(mu: float) -> float:
    """Integral of cos(t)**mu over [0, pi/2] from the Gamma function"""
    return 0.5 * math.sqrt(math.pi) * special.gamma(0.5 * (mu + 1.0)) / special.gamma(0.5 * mu + 1.0)


def agm_complete(m: float, n_max: int = 40):
    """Classical K(m) and E(m) by the arithmetic-geometric mean"""
    a, b = 1.0, math.sqrt(1.0 - m)
    c_sum = 0.5 * m
    power = 0.5
    for _ in range(n_max):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        power *= 2.0
        c_sum += power * c * c
        if abs(c) < 1e-17:
            break
    K = 0.5 * math.pi / a
    return K, K * (1.0 - c_sum)


def agm_cn(u: np.ndarray, m: float, n_max: int = 40) -> np.ndarray:
    """Classical cn(u | m) by descending Landen (AGM) iteration"""
    a, b, c = [1.0], [math.sqrt(1.0 - m)], [math.sqrt(m)]
    for _ in range(n_max):
        a.append(0.5 * (a[-1] + b[-1]))
        c.append(0.5 * (a[-2] - b[-1]))
        b.append(math.sqrt(a[-2] * b[-1]))
        if abs(c[-1]) < 1e-17:
            break
    n = len(a) - 1
    phi = (2.0 ** n) * a[n] * np.asarray(u, dtype=float)
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[j] / a[j] * np.sin(phi)))
    return np.cos(phi)


@pytest.fixture
def beta_oracle():
    return beta_half


@pytest.fixture
def single_loop_spec():
    return FlatCoreSpec.uniform(p=4.0, N=1, signs="+", r=0.6)


@pytest.fixture
def double_loop_spec():
    return FlatCoreSpec.uniform(p=4.0, N=2, signs="+-", r=0.6)
