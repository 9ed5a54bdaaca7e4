"""Fractional Fourier transform by direct chirp-kernel quadrature.

The kernel

    K(x, x'; w) = (1/sqrt(2 pi i)) sqrt(e^{iw}/sin w)
                  exp[i (x^2 + x'^2) cot(w)/2 - i x x' csc(w)]

realizes exp(-i w n) on L^2(R) up to one global phase, which is measured from
the ground Gaussian (see :func:`global_phase`). Square roots take principal
branches. Transforms are O(M^2) trapezoid sums on uniform symmetric grids.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import OrderError, ParameterError
from .fields import CSV_FLOAT, _atomic_write
from .fock import hermite

MIN_SIN = 1e-6
EDGE_TOL = 1e-8


class EdgeDecayWarning(UserWarning):
    """Signal is not negligible at the grid edge, so the quadrature truncates it."""


@dataclass(frozen=True)
class SignalGrid:
    x_min: float
    step: float
    count: int

    def __post_init__(self):
        if self.count < 8:
            raise ParameterError("signal grid needs at least 8 points")
        if not self.step > 0:
            raise ParameterError("signal grid step must be positive")
        if abs(self.x_min + self.x_max) > 1e-9 * max(1.0, abs(self.x_min)):
            raise ParameterError("signal grid must be symmetric about 0")

    @classmethod
    def symmetric(cls, half_width: float, count: int) -> "SignalGrid":
        """``count`` points spanning [-half_width, half_width] inclusive."""
        if count < 2 or not half_width > 0:
            raise ParameterError("need half_width > 0 and count >= 2")
        return cls(-half_width, 2.0 * half_width / (count - 1), count)

    @property
    def x_max(self) -> float:
        return self.x_min + self.step * (self.count - 1)

    @property
    def xs(self) -> np.ndarray:
        # offsets from the centre keep x[k] == -x[count-1-k] exactly
        return self.step * (np.arange(self.count) - (self.count - 1) / 2)

    def weights(self) -> np.ndarray:
        w = np.full(self.count, self.step)
        w[0] = w[-1] = self.step / 2
        return w


@dataclass(frozen=True, eq=False)
class SampledSignal:
    samples: np.ndarray
    grid: SignalGrid

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.grid.count,):
            raise ParameterError(f"expected {self.grid.count} samples, got shape {s.shape}")
        object.__setattr__(self, "samples", s)

    @property
    def xs(self) -> np.ndarray:
        return self.grid.xs

    def norm(self) -> float:
        """Discrete L2 norm (trapezoid)."""
        return math.sqrt(float(np.sum(self.grid.weights() * np.abs(self.samples) ** 2)))

    def inner(self, other: "SampledSignal") -> complex:
        """<self|other> by the trapezoid rule on the shared grid."""
        if other.grid != self.grid:
            raise ParameterError("signals live on different grids")
        return complex(np.sum(self.grid.weights() * np.conj(self.samples) * other.samples))

    def edge_value(self) -> float:
        return float(max(abs(self.samples[0]), abs(self.samples[-1])))


def _check_order(omega: float) -> None:
    if not math.isfinite(omega):
        raise OrderError("order must be finite")
    if abs(math.sin(omega)) < MIN_SIN:
        raise OrderError(f"|sin(omega)| < {MIN_SIN:g}: order {omega!r} is too close to a multiple of pi")


def prefactor(omega: float) -> complex:
    _check_order(omega)
    return cmath.sqrt(cmath.exp(1j * omega) / math.sin(omega)) / cmath.sqrt(2j * math.pi)


def kernel(x, xp, omega: float):
    """K(x, x'; omega); broadcasts over ``x`` and ``xp``."""
    c = prefactor(omega)
    cot = math.cos(omega) / math.sin(omega)
    csc = 1.0 / math.sin(omega)
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    val = c * np.exp(0.5j * cot * (x**2 + xp**2) - 1j * csc * x * xp)
    return complex(val) if val.ndim == 0 else val


def apply(signal: SampledSignal, omega: float, out_grid: SignalGrid | None = None) -> SampledSignal:
    """Trapezoid quadrature of int K(x, x'; omega) psi(x') dx'.

    The output is sampled on ``out_grid`` (default: the input grid).
    """
    _check_order(omega)
    g = signal.grid
    if signal.edge_value() > EDGE_TOL:
        warnings.warn(
            f"signal is {signal.edge_value():.1e} at the grid edge; transform truncates it",
            EdgeDecayWarning,
            stacklevel=2,
        )
    out = g if out_grid is None else out_grid
    k = kernel(out.xs[:, None], g.xs[None, :], omega)
    return SampledSignal(k @ (g.weights() * signal.samples), out)


def hermite_gauss(n: int, grid: SignalGrid) -> SampledSignal:
    """Normalized H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi))."""
    if not 0 <= n <= 20:
        raise ParameterError("hermite_gauss supports 0 <= n <= 20")
    x = grid.xs
    log_norm = 0.5 * (n * math.log(2.0) + math.lgamma(n + 1) + 0.5 * math.log(math.pi))
    return SampledSignal(hermite(n, x) * np.exp(-(x**2) / 2 - log_norm), grid)


def global_phase(omega: float, grid: SignalGrid) -> float:
    """Phase phi0 with apply(HG_0, omega) = e^{i phi0} HG_0, measured by projection."""
    g0 = hermite_gauss(0, grid)
    return cmath.phase(g0.inner(apply(g0, omega)))


def mollified_delta(y: float, grid: SignalGrid) -> SampledSignal:
    """Unit-area Gaussian of width 4*step centred at ``y``."""
    sigma = 4.0 * grid.step
    x = grid.xs
    return SampledSignal(np.exp(-((x - y) ** 2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi)), grid)


def delta_roundtrip_check(y: float, omega: float, grid: SignalGrid) -> float:
    """Max deviation of F_{-omega} F_omega applied to a mollified delta at ``y``.

    The intermediate signal is spread over width ~ sin(omega)/sigma, so it is
    sampled on a wider grid with the same step before transforming back.
    """
    _check_order(omega)
    if not grid.x_min <= y <= grid.x_max:
        raise ParameterError(f"y={y} lies outside the grid")
    sigma = 4.0 * grid.step
    spread = math.sqrt((sigma * math.cos(omega)) ** 2 + (math.sin(omega) / sigma) ** 2)
    half = max(grid.x_max, abs(y * math.cos(omega)) + 8.0 * spread)
    wide = SignalGrid.symmetric(grid.step * math.ceil(half / grid.step), 2 * math.ceil(half / grid.step) + 1)
    delta = mollified_delta(y, grid)
    mid = apply(delta, omega, out_grid=wide)
    back = apply(mid, -omega, out_grid=grid)
    return float(np.max(np.abs(back.samples - delta.samples)))


def signal_to_csv(signal: SampledSignal) -> str:
    fmt = CSV_FLOAT.format
    lines = ["x,re,im"]
    lines += [f"{fmt(x)},{fmt(v.real)},{fmt(v.imag)}" for x, v in zip(signal.xs, signal.samples)]
    return "\n".join(lines) + "\n"


def write_signal(signal: SampledSignal, path) -> None:
    _atomic_write(path, signal_to_csv(signal))


def parse_signal(text: str) -> SampledSignal:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != ["x", "re", "im"]:
        raise ParameterError("signal CSV must have header x,re,im")
    body = np.array([r for r in rows[1:] if r], dtype=float)
    if body.ndim != 2 or body.shape[0] < 8:
        raise ParameterError("signal CSV needs at least 8 rows")
    x = body[:, 0]
    steps = np.diff(x)
    step = float(np.mean(steps))
    if np.max(np.abs(steps - step)) > 1e-6 * step:
        raise ParameterError("signal x column is not uniform")
    grid = SignalGrid(float(x[0]), step, x.size)
    samples = np.empty(x.size, dtype=complex)
    samples.real, samples.imag = body[:, 1], body[:, 2]
    return SampledSignal(samples, grid)


def read_signal(path) -> SampledSignal:
    with open(path, newline="") as fh:
        return parse_signal(fh.read())
