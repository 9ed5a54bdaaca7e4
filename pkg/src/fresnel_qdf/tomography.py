"""Ideal dispersive atom-field protocol that reads J off atomic polarizations.

A two-level atom prepared in (|g> + |e>)/sqrt(2) meets the displaced field
D^dag(alpha)|phi>.  Under U(t) = exp(-i chi t n sigma_z) the excited branch
picks up e^{-i chi t n} and the ground branch e^{+i chi t n}.  With
<e|g> = C/2, where C = <phi| D(alpha) e^{2i chi t n} D^dag(alpha) |phi>,
the readout sx = 2 Re<e|g>, sy = -2 Im<e|g> gives C = sx - i sy.  At
2 chi t = theta this is (pi + 2i) J(alpha).

The sign of the exponent in U(t) is a convention;
the opposite sign only relabels t -> -t.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .fields import ComplexField, PhaseGrid
from .fock import FockVector, PhasePoint, displacement_columns
from .qdf import J_PREFACTOR, theta

LEAK_TOL = 1e-13
MAX_DIM = 4096


@dataclass(frozen=True, eq=False)
class AtomFieldState:
    ground: np.ndarray
    excited: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.ground, dtype=complex)
        e = np.asarray(self.excited, dtype=complex)
        if g.shape != e.shape or g.ndim != 1:
            raise ParameterError("branches must be 1-d arrays of equal length")
        norm = float(np.vdot(g, g).real + np.vdot(e, e).real)
        if abs(norm - 1.0) > 1e-12:
            raise ParameterError(f"joint norm is {norm!r}, expected 1")
        object.__setattr__(self, "ground", g)
        object.__setattr__(self, "excited", e)

    @property
    def dim(self) -> int:
        return self.ground.size

    def norm(self) -> float:
        return math.sqrt(float(np.vdot(self.ground, self.ground).real + np.vdot(self.excited, self.excited).real))


@dataclass(frozen=True)
class DispersiveParams:
    chi: float
    t: float

    def __post_init__(self):
        if not self.chi > 0:
            raise ParameterError("chi must be > 0")
        if not self.t >= 0:
            raise ParameterError("t must be >= 0")


def reconstruction_time(chi: float) -> float:
    """t* = theta / (2 chi), so that e^{2i chi t*} = (2i - pi)/(2i + pi)."""
    if not chi > 0:
        raise ParameterError("chi must be > 0")
    return theta() / (2.0 * chi)


def _start_dim(phi: FockVector, alpha: complex) -> int:
    r = abs(alpha)
    return phi.dim + int(math.ceil(r * r + 10.0 * r + 16.0))


def displaced_field(phi: FockVector, alpha: complex) -> np.ndarray:
    """D^dag(alpha)|phi> in a basis grown until the dropped tail is below LEAK_TOL."""
    dim = _start_dim(phi, alpha)
    while True:
        cols = displacement_columns(np.array([-alpha]), dim, phi.dim)[0]
        psi = cols @ phi.coeffs
        leak = 1.0 - float(np.vdot(psi, psi).real)
        if leak < LEAK_TOL:
            return psi
        if dim >= MAX_DIM:
            raise ParameterError(f"displacement by {alpha} needs more than {MAX_DIM} levels")
        dim = min(2 * dim, MAX_DIM)


def prepare(phi: FockVector, alpha: complex) -> AtomFieldState:
    """Both branches equal D^dag(alpha)|phi>/sqrt(2)."""
    psi = displaced_field(phi, complex(alpha))
    psi = psi / math.sqrt(2.0 * float(np.vdot(psi, psi).real))
    return AtomFieldState(psi, psi.copy())


def evolve(state: AtomFieldState, params: DispersiveParams) -> AtomFieldState:
    n = np.arange(state.dim)
    phase = np.exp(1j * params.chi * params.t * n)
    return AtomFieldState(state.ground * phase, state.excited * phase.conj())


def polarizations(state: AtomFieldState) -> tuple[float, float]:
    """(<sigma_x>, <sigma_y>) with sx = 2 Re<e|g>, sy = -2 Im<e|g>."""
    c = np.vdot(state.excited, state.ground)
    return 2.0 * float(c.real), -2.0 * float(c.imag)


def _sweep_values(phi: FockVector, grid: PhaseGrid, params: DispersiveParams, workers: int):
    alphas = grid.alphas().reshape(-1)

    def one(a):
        return polarizations(evolve(prepare(phi, a), params))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(one, alphas))
    else:
        pairs = [one(a) for a in alphas]
    arr = np.array(pairs, dtype=float).reshape(grid.shape + (2,))
    return arr[..., 0], arr[..., 1]


def polarization_sweep(
    phi: FockVector, grid: PhaseGrid, chi: float, t: float, workers: int = 1
) -> tuple[ComplexField, ComplexField]:
    """Raw <sigma_x> and <sigma_y> maps at interaction time ``t``."""
    params = DispersiveParams(chi, t)
    sx, sy = _sweep_values(phi, grid, params, workers)
    meta = {"chi": chi, "t": t}
    return (
        ComplexField(sx, grid, "polarization-x", meta=dict(meta)),
        ComplexField(sy, grid, "polarization-y", meta=dict(meta)),
    )


def reconstruct_j(phi: FockVector, grid: PhaseGrid, chi: float = 1.0, workers: int = 1) -> ComplexField:
    """J_rec(alpha) = (sx - i sy)/(pi + 2i) at t = reconstruction_time(chi)."""
    t_star = reconstruction_time(chi)
    sx, sy = _sweep_values(phi, grid, DispersiveParams(chi, t_star), workers)
    return ComplexField(J_PREFACTOR * (sx - 1j * sy), grid, "reconstructed", meta={"chi": chi, "t_star": t_star})


def probe(phi: FockVector, point: PhasePoint, chi: float = 1.0) -> complex:
    """Single-point reconstruction, sx - i sy at t*."""
    sx, sy = polarizations(evolve(prepare(phi, point.alpha), DispersiveParams(chi, reconstruction_time(chi))))
    return complex(sx, -sy)
