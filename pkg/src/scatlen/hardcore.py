"""Closed-form hard-core results and the modified Bessel functions K0, K1.

For a hard core of radius ``a`` the minimizer of the positive-temperature
functional is known explicitly: ``(a/r) exp(-(r-a)/sqrt(beta))`` in d=3 and
``K0(r/sqrt(beta)) / K0(a/sqrt(beta))`` in d=2 (both capped at 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potential import check_dimension

EULER_GAMMA = 0.57721566490153286061

_SERIES_MAX = 2.0
_EPS = 1e-16


@dataclass(frozen=True)
class HardCoreParams:
    a: float
    beta: float
    d: int

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError("hard-core radius must be positive and finite")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError("beta must be positive and finite")
        check_dimension(self.d)


def _k01_series(x: float) -> tuple[float, float]:
    # small-argument expansions with the logarithmic part
    y = 0.25 * x * x
    lg = math.log(0.5 * x)
    i0 = i1 = 0.0
    s0 = s1 = 0.0
    t0 = 1.0  # y^k / (k!)^2
    t1 = 0.5 * x  # (x/2) y^k / (k! (k+1)!)
    H = 0.0  # harmonic number H_k
    psi1 = -EULER_GAMMA  # psi(k+1)
    psi2 = 1.0 - EULER_GAMMA  # psi(k+2)
    k = 0
    while True:
        i0 += t0
        i1 += t1
        s0 += t0 * H
        s1 += t1 * (psi1 + psi2)
        k += 1
        t0 *= y / (k * k)
        t1 *= y / (k * (k + 1))
        H += 1.0 / k
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        if t0 * (1 + H) < _EPS * abs(i0) and t1 * (abs(psi1) + abs(psi2)) < _EPS * abs(i1):
            break
    k0 = -(lg + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + lg * i1 - 0.5 * s1
    return k0, k1


def _k01_cf(x: float) -> tuple[float, float]:
    # Steed's continued fraction CF2 (Temme's method) for order 0
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 100_000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise RuntimeError("K0/K1 continued fraction did not converge")
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k01(x: float) -> tuple[float, float]:
    if not x > 0:
        raise ValueError(f"K0/K1 need x > 0, got {x}")
    if x > 745.0:
        return 0.0, 0.0
    return _k01_series(x) if x <= _SERIES_MAX else _k01_cf(x)


def bessel_k(order: int, x):
    """Modified Bessel function of the second kind, order 0 or 1."""
    if order not in (0, 1):
        raise ValueError("only orders 0 and 1 are supported")
    arr = np.asarray(x, dtype=float)
    out = np.array([_k01(float(v))[order] for v in arr.ravel()]).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def log_derivative_ratio(t: float) -> float:
    """``-t K0'(t) / K0(t) = t K1(t) / K0(t)``."""
    k0, k1 = _k01(t)
    if k0 == 0.0:
        # large t: K1/K0 -> 1 + 1/(2t) + ...
        return t + 0.5 - 0.125 / t
    return t * k1 / k0


def ebeta_hardcore(p: HardCoreParams) -> float:
    """Exact ``e(beta)`` for the hard core of radius ``p.a``."""
    a, beta = p.a, p.beta
    if p.d == 3:
        return 8.0 * math.pi * a * (1.0 + a / math.sqrt(beta) + a * a / (3.0 * beta))
    t = a / math.sqrt(beta)
    return 4.0 * math.pi * log_derivative_ratio(t) + 2.0 * math.pi * a * a / beta


def hardcore_profile(p: HardCoreParams, r):
    """Minimizer of the positive-temperature functional for the hard core."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    a, sb = p.a, math.sqrt(p.beta)
    out = np.ones_like(r)
    m = r > a
    if p.d == 3:
        out[m] = a / r[m] * np.exp(-(r[m] - a) / sb)
    else:
        out[m] = np.asarray(bessel_k(0, r[m] / sb)) / bessel_k(0, a / sb)
    return float(out) if out.ndim == 0 else out
