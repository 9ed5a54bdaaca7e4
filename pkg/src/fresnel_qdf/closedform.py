"""Analytic J and Kirkwood distributions for number states and two-coherent-state cats.

Every function accepts either a :class:`PhasePoint` or broadcastable ``q, p``
arrays, so the same code evaluates single points and whole grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_laguerre

from .errors import DegenerateStateError, ParameterError
from .fock import PhasePoint, coherent_overlap

SQRT2 = math.sqrt(2.0)
PI = math.pi
# e^{i theta} = (2i - pi) / (2i + pi)
PHASE = (2j - PI) / (2j + PI)
# pi / (2i + pi), as one complex constant
GAUSS_RATE = PI * (PI - 2j) / (PI**2 + 4)


def _qp(q, p):
    if isinstance(q, PhasePoint):
        return q.q, q.p
    if p is None:
        raise TypeError("pass a PhasePoint or both q and p")
    return np.asarray(q, dtype=float), np.asarray(p, dtype=float)


def _scalar(v):
    return complex(v) if np.ndim(v) == 0 else v


def _normalized_hermite(n: int, x: np.ndarray) -> np.ndarray:
    """H_n(x) / sqrt(2^n n!) without forming either factor."""
    h_prev = np.zeros_like(x)
    h = np.ones_like(x)
    for m in range(n):
        h_prev, h = h, math.sqrt(2.0 / (m + 1)) * x * h - math.sqrt(m / (m + 1)) * h_prev
    return h


def _check_degree(n: int) -> None:
    if not 0 <= n <= 100:
        raise ParameterError("closed forms support 0 <= n <= 100")


def j_fock(n: int, q, p=None):
    _check_degree(n)
    q, p = _qp(q, p)
    r2 = q**2 + p**2
    val = PHASE**n / (2j + PI) * np.exp(-GAUSS_RATE * r2) * eval_laguerre(n, 2 * PI**2 * r2 / (4 + PI**2))
    return _scalar(val)


def kirkwood_fock(n: int, q, p=None):
    _check_degree(n)
    q, p = _qp(q, p)
    val = (
        1j**n
        / (PI * SQRT2)
        * np.exp(-(q**2) / 2 - p**2 / 2 + 1j * q * p)
        * _normalized_hermite(n, q)
        * _normalized_hermite(n, p)
    )
    return _scalar(val)


@dataclass(frozen=True)
class CatSpec:
    """(|alpha1> + sign |alpha2>) / sqrt(2 + 2 sign Re<alpha1|alpha2>)."""

    alpha1: complex
    alpha2: complex
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ParameterError("sign must be +1 or -1")
        if self.denominator < 1e-14:
            raise DegenerateStateError("cat normalization denominator vanishes")

    @property
    def denominator(self) -> float:
        return 2.0 + 2.0 * self.sign * coherent_overlap(self.alpha1, self.alpha2).real

    @property
    def q1(self) -> float:
        return SQRT2 * complex(self.alpha1).real

    @property
    def p1(self) -> float:
        return SQRT2 * complex(self.alpha1).imag

    @property
    def q2(self) -> float:
        return SQRT2 * complex(self.alpha2).real

    @property
    def p2(self) -> float:
        return SQRT2 * complex(self.alpha2).imag

    def swapped(self) -> "CatSpec":
        return CatSpec(self.alpha2, self.alpha1, self.sign)


def _overlap(a, b):
    """Vectorized <a|b> for coherent amplitudes."""
    return np.exp(-np.abs(a) ** 2 / 2 - np.abs(b) ** 2 / 2 + np.conj(a) * b)


def j_cat(spec: CatSpec, q, p=None):
    q, p = _qp(q, p)
    q1, p1, q2, p2 = spec.q1, spec.p1, spec.q2, spec.p2
    a1, a2 = complex(spec.alpha1), complex(spec.alpha2)
    alpha = (q + 1j * p) / SQRT2
    lobe1 = np.exp(-GAUSS_RATE * ((q - q1) ** 2 + (p - p1) ** 2))
    lobe2 = np.exp(-GAUSS_RATE * ((q - q2) ** 2 + (p - p2) ** 2))
    ph = 0.5 * (q * (p1 - p2) - p * (q1 - q2))
    cross21 = np.exp(1j * ph) * _overlap(a2 - alpha, PHASE * (a1 - alpha))
    cross12 = np.exp(-1j * ph) * _overlap(a1 - alpha, PHASE * (a2 - alpha))
    val = (lobe1 + lobe2 + spec.sign * (cross21 + cross12)) / ((2j + PI) * spec.denominator)
    return _scalar(val)


def kirkwood_cat(spec: CatSpec, q, p=None):
    q, p = _qp(q, p)
    q1, p1, q2, p2 = spec.q1, spec.p1, spec.q2, spec.p2

    # term structure: Gaussian factor in (qa, pb), phase factor in (qc, pc; qd, pd)
    def term(qa, pb, qc, pc, qd, pd):
        return np.exp(-(qa**2 + pb**2) / 2 + (q * qa - p * pb)) * np.exp(
            0.5j * qc * (pc + 2 * p) + 0.5j * pd * (qd - 2 * q)
        )

    common = np.exp(-(q**2) / 2 - p**2 / 2 + 1j * q * p) / (SQRT2 * PI * spec.denominator)
    val = common * (
        term(q1, p1, q1, p1, q1, p1)
        + term(q2, p2, q2, p2, q2, p2)
        + spec.sign * term(q1, p2, q2, p2, q1, p1)
        + spec.sign * term(q2, p1, q1, p1, q2, p2)
    )
    return _scalar(val)
