"""Truncated Fock-space linear algebra and state factories.

Conventions used throughout the package::

    q = (a + a^dag) / sqrt(2),   p = i (a^dag - a) / sqrt(2),   alpha = (q + i p) / sqrt(2)

With these, ``exp(i v q - i u p) = D((u + i v) / sqrt(2))``.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import DegenerateStateError, DimensionError, ParameterError

MAX_POLY_DEGREE = 200
# Extra levels used when a matrix exponential is taken of truncated q, p.
EDGE_PAD = 16


class TruncationWarning(UserWarning):
    """Emitted when a state or operator is close to the basis edge."""


# ---------------------------------------------------------------------------
# special functions


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by three-term recurrence."""
    if n < 0 or n > MAX_POLY_DEGREE:
        raise ParameterError(f"hermite degree {n} outside [0, {MAX_POLY_DEGREE}]")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for m in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * m * h_prev
    return h if h.ndim else float(h)


def laguerre(n: int, k: int, x):
    """Associated Laguerre polynomial L_n^k(x); ``k = 0`` gives the plain L_n."""
    if n < 0 or n > MAX_POLY_DEGREE:
        raise ParameterError(f"laguerre degree {n} outside [0, {MAX_POLY_DEGREE}]")
    if k < 0:
        raise ParameterError("laguerre order k must be >= 0")
    x = np.asarray(x, dtype=float)
    l_prev = np.ones_like(x)
    if n == 0:
        return l_prev if l_prev.ndim else float(l_prev)
    l_cur = 1.0 + k - x
    for m in range(1, n):
        l_prev, l_cur = l_cur, ((2 * m + 1 + k - x) * l_cur - (m + k) * l_prev) / (m + 1)
    return l_cur if l_cur.ndim else float(l_cur)


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class FockVector:
    """Pure state as amplitudes c_0..c_{N-1} in the truncated number basis.

    ``tail_mass`` is the probability that was dropped by truncation before the
    vector was renormalized (zero for exactly representable states).
    """

    coeffs: np.ndarray
    tail_mass: float = 0.0
    label: str = ""

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size < 1:
            raise DimensionError("FockVector needs dim >= 1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        norm2 = float(np.vdot(c, c).real)
        if abs(norm2 - 1.0) > 1e-12:
            raise ParameterError(f"FockVector not normalized: sum |c|^2 = {norm2!r}")

    @property
    def dim(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite matrix in the number basis."""

    matrix: np.ndarray
    label: str = ""
    _key: str = field(init=False, repr=False, default="")

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ParameterError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > 1e-10:
            raise ParameterError(f"density matrix trace {tr!r} != 1")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ParameterError("density matrix has negative eigenvalues")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_key", hashlib.sha1(m.tobytes()).hexdigest())

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def key(self) -> str:
        """Content hash, used to cache state-dependent quadrature samples."""
        return self._key

    def support(self, cutoff: float = 1e-32) -> int:
        """Number of leading levels carrying population above ``cutoff``.

        Off-diagonal elements outside this block are bounded by
        sqrt(rho_mm rho_nn) and can be dropped along with the diagonal.
        """
        diag = self.matrix.diagonal().real
        idx = np.nonzero(diag > cutoff)[0]
        return int(idx[-1]) + 1 if idx.size else 1


@dataclass(frozen=True)
class PhasePoint:
    """A phase-space point; ``alpha`` is always derived from ``(q, p)``."""

    q: float
    p: float

    @property
    def alpha(self) -> complex:
        return complex(self.q, self.p) / math.sqrt(2.0)

    @classmethod
    def from_alpha(cls, alpha: complex) -> "PhasePoint":
        alpha = complex(alpha)
        return cls(math.sqrt(2.0) * alpha.real, math.sqrt(2.0) * alpha.imag)


# ---------------------------------------------------------------------------
# states


def fock_state(n: int, dim: int) -> FockVector:
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    if not 0 <= n < dim:
        raise DimensionError(f"Fock index {n} does not fit in dimension {dim}")
    c = np.zeros(dim, dtype=complex)
    c[n] = 1.0
    return FockVector(c, label=f"fock({n})")


def _coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Exact (unrenormalized) coherent-state amplitudes of the first ``dim`` levels."""
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def coherent_state(alpha: complex, dim: int) -> FockVector:
    alpha = complex(alpha)
    if abs(alpha) ** 2 > dim / 4:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds dim/4 = {dim / 4:.3g}",
            TruncationWarning,
            stacklevel=2,
        )
    c = _coherent_amplitudes(alpha, dim)
    norm2 = float(np.vdot(c, c).real)
    return FockVector(c / math.sqrt(norm2), tail_mass=max(0.0, 1.0 - norm2), label=f"coherent({alpha})")


def coherent_overlap(a1: complex, a2: complex) -> complex:
    """<a1|a2> for normalized coherent states."""
    a1, a2 = complex(a1), complex(a2)
    return complex(np.exp(-abs(a1) ** 2 / 2 - abs(a2) ** 2 / 2 + a1.conjugate() * a2))


def cat_state(a1: complex, a2: complex, sign: int, dim: int) -> FockVector:
    """(|a1> + sign |a2>) / sqrt(2 + 2 sign Re<a1|a2>), renormalized after truncation."""
    if sign not in (1, -1):
        raise ParameterError("sign must be +1 or -1")
    for a in (a1, a2):
        if abs(a) ** 2 > dim / 4:
            warnings.warn(f"|alpha|^2 = {abs(a) ** 2:.3g} exceeds dim/4", TruncationWarning, stacklevel=2)
    denom = 2.0 + 2.0 * sign * coherent_overlap(a1, a2).real
    if denom < 1e-14:
        raise DegenerateStateError("cat state has zero norm")
    v = _coherent_amplitudes(complex(a1), dim) + sign * _coherent_amplitudes(complex(a2), dim)
    norm2 = float(np.vdot(v, v).real)
    label = f"cat({complex(a1)},{complex(a2)},{'+' if sign > 0 else '-'})"
    return FockVector(v / math.sqrt(norm2), tail_mass=max(0.0, 1.0 - norm2 / denom), label=label)


def density_from_pure(psi: FockVector) -> DensityOperator:
    c = psi.coeffs
    return DensityOperator(np.outer(c, c.conj()), label=psi.label)


# ---------------------------------------------------------------------------
# operators


def _scaled_laguerre_rows(x: np.ndarray, dim: int, nmax: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(n, g)`` for n < nmax, with ``g[k] = sqrt(n!/(n+k)!) x^(k/2) e^(-x/2) L_n^k(x)``.

    ``g`` has shape ``(dim - n,) + x.shape``.  The normalized recurrence keeps
    everything O(1) so no factorials are formed explicitly.
    """
    k = np.arange(dim, dtype=float).reshape((dim,) + (1,) * x.ndim)
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = 0.5 * k * np.log(x) - 0.5 * x - 0.5 * gammaln(k + 1)
    expo = np.where(k == 0, -0.5 * x, expo)
    g = np.exp(expo)
    g_prev = np.zeros_like(g)
    for n in range(nmax):
        yield n, g
        kk = k[: dim - n - 1]
        g_next = ((2 * n + 1 + kk - x) * g[: dim - n - 1] - np.sqrt(n * (n + kk)) * g_prev[: dim - n - 1]) / np.sqrt(
            (n + 1) * (n + kk + 1)
        )
        g_prev, g = g[: dim - n - 1], g_next


def displacement_columns(alphas, dim: int, ncols: int | None = None) -> np.ndarray:
    """Exact matrix elements <m|D(alpha)|n> for m < dim, n < ncols.

    ``alphas`` may be any array shape; the result has shape
    ``alphas.shape + (dim, ncols)``.
    """
    alphas = np.asarray(alphas, dtype=complex)
    shape = alphas.shape
    a = alphas.reshape(-1)
    ncols = dim if ncols is None else min(ncols, dim)
    x = np.abs(a) ** 2
    phi = np.angle(a)
    kvec = np.arange(dim)
    up = np.exp(1j * np.outer(kvec, phi))  # e^{ik phi}
    down = (-1.0) ** kvec[:, None] * up.conj()  # (-e^{-i phi})^k
    out = np.zeros((a.size, dim, ncols), dtype=complex)
    for n, g in _scaled_laguerre_rows(x, dim, ncols):
        nk = dim - n
        out[:, n:, n] = (up[:nk] * g).T
        kmax = ncols - n
        if kmax > 1:
            out[:, n, n + 1 : ncols] = (down[1:kmax] * g[1:kmax]).T
    return out.reshape(shape + (dim, ncols))


def displacement_matrix(alpha: complex, dim: int) -> np.ndarray:
    """D(alpha) = exp(alpha a^dag - alpha^* a) restricted to the first ``dim`` levels.

    Elements are exact (they do not come from exponentiating a truncated
    generator), so only products of these matrices feel the truncation.
    """
    return displacement_columns(np.asarray([alpha]), dim)[0]


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def quadrature_operators(dim: int) -> tuple[np.ndarray, np.ndarray]:
    if dim < 2:
        raise DimensionError("quadrature operators need dim >= 2")
    a = annihilation(dim)
    ad = a.conj().T
    return (a + ad) / math.sqrt(2.0), 1j * (ad - a) / math.sqrt(2.0)


def number_phase_diag(theta: float, dim: int) -> np.ndarray:
    """diag(e^{i theta n}), n = 0..dim-1."""
    return np.diag(np.exp(1j * theta * np.arange(dim)))


def quadratic_phase_operator(cot_a: float, cot_b: float, dim: int, tol: float = 1e-10, max_work: int = 2048) -> np.ndarray:
    """exp(i (cot_b p^2 - cot_a q^2) / 2) restricted to the first ``dim`` levels.

    The exponential is taken at dim + EDGE_PAD levels and the working basis is
    doubled until the cropped block changes by less than ``tol`` (Frobenius).
    Unless cot_b = -cot_a the generator contains a^2 and a^dag^2 terms, so the
    operator squeezes and needs a working basis far larger than ``dim``.
    """
    if dim < 8:
        raise DimensionError("quadratic_phase_operator needs dim >= 8")

    def cropped(work: int) -> np.ndarray:
        q, p = quadrature_operators(work)
        return expm(0.5j * (cot_b * (p @ p) - cot_a * (q @ q)))[:dim, :dim]

    work = dim + EDGE_PAD
    cur = cropped(work)
    while work < max_work:
        work = min(2 * work, max_work)
        nxt = cropped(work)
        if np.linalg.norm(nxt - cur) < tol:
            return nxt
        cur = nxt
    warnings.warn(
        f"quadratic phase operator not converged at {max_work} working levels",
        TruncationWarning,
        stacklevel=2,
    )
    return cur
