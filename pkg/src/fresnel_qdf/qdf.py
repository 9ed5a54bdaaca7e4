"""Phase-space distributions: s-ordered family, Wigner, Kirkwood and the complex J distribution.

J is available through several numerically independent routes:

* ``j_integral``      chirped Fourier integral of the characteristic function
* ``j_trace``         displaced number-phase trace, a unimodular series
* ``j_multiplier``    chirp multiplier applied to the characteristic samples on a whole grid
* ``j_general``       the two-angle fractional-Fourier form with explicit operators
* ``j_wigner_fresnel`` Fresnel transform of the parity-form Wigner function

All integral routes share the variable map ``beta = (u + i v) / sqrt(2)`` and a
trapezoid product rule on ``[-L, L]^2``; the state-dependent part of every
integrand is independent of the output point, so it is sampled once and cached.
"""

from __future__ import annotations

import math
import threading
import warnings
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import expm
from scipy.special import gammaln

from . import fock
from .errors import ParameterError, SingularParameterError, TruncationError, UnsupportedParameterError
from .fields import ComplexField, PhaseGrid, QuadratureSpec
from .fock import DensityOperator, PhasePoint, _scaled_laguerre_rows, displacement_columns, displacement_matrix

PI = math.pi
SQRT2 = math.sqrt(2.0)
J_PREFACTOR = 1.0 / (PI + 2j)
CHUNK = 1024


class BoxEdgeWarning(UserWarning):
    """The integrand has not decayed at the edge of the quadrature box."""


def theta() -> float:
    """Angle with e^{i theta} = (2i - pi) / (2i + pi); lies in (pi/2, pi)."""
    return math.atan2(4 * PI, 4 - PI**2)


# ---------------------------------------------------------------------------
# sample cache


class _SampleCache:
    def __init__(self, maxsize: int = 48):
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()
        self._maxsize = maxsize

    def get(self, key, factory):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        value = factory()
        with self._lock:
            self._data[key] = value
            while len(self._data) > self._maxsize:
                self._data.popitem(last=False)
        return value

    def clear(self):
        with self._lock:
            self._data.clear()


_cache = _SampleCache()


def clear_cache() -> None:
    _cache.clear()


def _quad_key(quad: QuadratureSpec) -> tuple:
    return (quad.half_width, quad.points, quad.fock_dim, quad.tail_tol)


def _beta_plane(quad: QuadratureSpec):
    u, w = quad.nodes()
    uu, vv = np.meshgrid(u, u, indexing="ij")  # axis 0 is u, axis 1 is v
    return u, w, (uu + 1j * vv) / SQRT2


def _edge_note(samples: np.ndarray, tol: float, what: str) -> str | None:
    """Check decay at the 8 boundary probes (corners and edge midpoints)."""
    m = samples.shape[0]
    c, e = m // 2, m - 1
    probes = [samples[i, j] for i, j in ((0, c), (e, c), (c, 0), (c, e), (0, 0), (0, e), (e, 0), (e, e))]
    worst = max(abs(v) for v in probes)
    if worst > tol:
        return f"{what} is {worst:.2e} at the quadrature box edge (> {tol:.0e}); enlarge half_width"
    return None


def _fourier_point(samples: np.ndarray, u: np.ndarray, w: np.ndarray, q: float, p: float) -> complex:
    """(1/4pi^2) sum_ij w_i w_j e^{i u_i p - i v_j q} samples[i, j], fixed summation order."""
    left = w * np.exp(1j * u * p)
    right = w * np.exp(-1j * u * q)
    return complex(left @ samples @ right) / (4 * PI**2)


# ---------------------------------------------------------------------------
# characteristic function


def characteristic(rho: DensityOperator, beta: complex) -> complex:
    """Tr{rho D(beta)}."""
    n = rho.dim
    if abs(beta) ** 2 > n / 4:
        warnings.warn(f"|beta|^2 = {abs(beta) ** 2:.3g} > dim/4", fock.TruncationWarning, stacklevel=2)
    return complex(np.trace(rho.matrix @ displacement_matrix(beta, n)))


def characteristic_samples(rho: DensityOperator, betas) -> np.ndarray:
    """Vectorized Tr{rho D(beta)} accumulated directly from scaled Laguerre rows.

    Only the populated block of ``rho`` is touched, so low-energy states are cheap
    even in a large basis.  Matrix elements are exact, so large ``|beta|`` is fine.
    """
    betas = np.asarray(betas, dtype=complex)
    shape = betas.shape
    b = betas.reshape(-1)
    s = rho.support()
    r = rho.matrix[:s, :s]
    x = np.abs(b) ** 2
    k = np.arange(s)
    up = np.exp(1j * np.outer(k, np.angle(b)))
    down = (-1.0) ** k[:, None] * up.conj()
    chi = np.zeros(b.size, dtype=complex)
    for n, g in _scaled_laguerre_rows(x, s, s):
        kk = s - n
        lower = r[n, n:][:, None] * up[:kk]  # rho[n, n+k] <n+k|D|n>
        upper = r[n:, n][:, None] * down[:kk]  # rho[n+k, n] <n|D|n+k>
        upper[0] = 0.0
        chi += np.einsum("kp,kp->p", lower + upper, g)
    return chi.reshape(shape)


def _characteristic_by_matrices(rho: DensityOperator, betas: np.ndarray) -> np.ndarray:
    """Tr{rho D(beta)} as an explicit matrix trace per node (independent of the fused sampler)."""
    s = rho.support()
    r = rho.matrix[:s, :s]
    flat = betas.reshape(-1)
    out = np.empty(flat.size, dtype=complex)
    for start in range(0, flat.size, CHUNK):
        d = displacement_columns(flat[start : start + CHUNK], s, s)
        out[start : start + CHUNK] = np.einsum("pmn,nm->p", d, r)
    return out.reshape(betas.shape)


# ---------------------------------------------------------------------------
# displaced populations and the trace-type series


def _eig_factors(rho: DensityOperator):
    s = rho.support()
    lam, vec = np.linalg.eigh(rho.matrix[:s, :s])
    keep = lam > 1e-15
    return lam[keep], vec[:, keep], s


def displaced_populations(rho: DensityOperator, alphas, dim: int) -> np.ndarray:
    """P_k(alpha) = <k| D^dag(alpha) rho D(alpha) |k>, k < dim, for an array of alphas."""
    alphas = np.asarray(alphas, dtype=complex)
    flat = alphas.reshape(-1)
    lam, vec, s = _eig_factors(rho)
    if s > dim:
        raise TruncationError(f"state occupies {s} levels but only {dim} are available")
    out = np.empty((flat.size, dim))
    for start in range(0, flat.size, CHUNK):
        d = displacement_columns(-flat[start : start + CHUNK], dim, s)
        amp = d @ vec  # (P, dim, rank)
        out[start : start + CHUNK] = (np.abs(amp) ** 2) @ lam
    return out.reshape(alphas.shape + (dim,))


def _truncated_series(pops: np.ndarray, weights: np.ndarray, tol: float, ratio: float = 1.0):
    """sum_k weights_k pops_k up to the first k where the tail is provably below ``tol``.

    Returns ``(values, ok)``.  The cut is where the cumulative population first
    reaches ``1 - tol`` or, for |weights_k| = ratio^k, where ratio^k < tol.
    """
    cum = np.cumsum(pops, axis=-1)
    reached = cum >= 1.0 - tol
    kidx = np.arange(pops.shape[-1])
    if ratio < 1.0:
        with np.errstate(divide="ignore"):
            decayed = kidx * math.log(ratio) < math.log(tol) if ratio > 0 else kidx >= 1
        reached = reached | decayed
    ok = reached.any(axis=-1)
    cut = np.where(ok, np.argmax(reached, axis=-1), pops.shape[-1] - 1)
    mask = kidx <= cut[..., None]
    values = np.sum(np.where(mask, pops * weights, 0.0), axis=-1)
    return values, ok


def _j_trace_batch(rho: DensityOperator, alphas: np.ndarray, quad: QuadratureSpec):
    pops = displaced_populations(rho, alphas, quad.fock_dim)
    weights = np.exp(1j * theta() * np.arange(quad.fock_dim))
    vals, ok = _truncated_series(pops, weights, quad.tail_tol)
    return J_PREFACTOR * vals, ok


def j_trace(rho: DensityOperator, point: PhasePoint, quad: QuadratureSpec) -> complex:
    """(1/(2i+pi)) sum_k e^{i theta k} <k|D^dag(alpha) rho D(alpha)|k>."""
    vals, ok = _j_trace_batch(rho, np.array([point.alpha]), quad)
    if not ok[0]:
        raise TruncationError(f"displaced population did not reach 1 - {quad.tail_tol:g} within {quad.fock_dim} levels")
    return complex(vals[0])


def wigner_parity(rho: DensityOperator, point: PhasePoint, dim: int | None = None) -> float:
    """(1/pi) Tr{rho D(alpha) (-1)^n D^dag(alpha)}.

    The trace is formed from explicit matrices in a basis of ``dim`` levels
    (default: the state's own dimension) and its imaginary residue is checked.
    """
    dim = rho.dim if dim is None else dim
    if dim < rho.dim:
        raise ParameterError("dim must be at least the state dimension")
    r = np.zeros((dim, dim), dtype=complex)
    r[: rho.dim, : rho.dim] = rho.matrix
    d = displacement_matrix(point.alpha, dim)
    # displaced support columns must stay inside the basis
    leak = 1.0 - float(np.min(np.sum(np.abs(d[:, : rho.support()]) ** 2, axis=0)))
    if leak > 1e-10:
        raise TruncationError(f"displaced state leaks {leak:.1e} out of {dim} levels")
    val = np.trace(r @ d @ fock.number_phase_diag(PI, dim) @ d.conj().T) / PI
    if abs(val.imag) > 1e-6:
        raise TruncationError(f"Wigner trace has imaginary residue {val.imag:.2e}")
    return float(val.real)


def s_param(rho: DensityOperator, point: PhasePoint, s: float, dim: int | None = None, tail_tol: float = 1e-10) -> float:
    """s-ordered distribution (2/(pi(1-s))) sum_k ((s+1)/(s-1))^k <k|D^dag rho D|k>, for s <= 0."""
    if s == 1:
        raise SingularParameterError("s = 1 (Glauber-Sudarshan P) makes the prefactor singular")
    if s > 0:
        raise UnsupportedParameterError(f"s = {s} > 0: series weights have modulus >= 1 and do not converge")
    dim = rho.dim if dim is None else dim
    ratio = (s + 1) / (s - 1)
    pops = displaced_populations(rho, np.array([point.alpha]), dim)[0]
    k = np.arange(dim)
    with np.errstate(divide="ignore"):
        weights = np.where(k == 0, 1.0, ratio ** k.astype(float))
    val, ok = _truncated_series(pops, weights, tail_tol, ratio=abs(ratio))
    if not ok:
        raise TruncationError("s-ordered series tail not resolved within the basis")
    return float(2.0 / (PI * (1 - s)) * val)


# ---------------------------------------------------------------------------
# integral routes


def _chi_grid(rho: DensityOperator, quad: QuadratureSpec) -> np.ndarray:
    def build():
        _, _, betas = _beta_plane(quad)
        return characteristic_samples(rho, betas)

    return _cache.get(("chi", rho.key, _quad_key(quad)), build)


def _j_integral_samples(rho: DensityOperator, quad: QuadratureSpec):
    def build():
        u, _, _ = _beta_plane(quad)
        chi = _chi_grid(rho, quad)
        chirp = np.exp(-1j * (u[:, None] ** 2 + u[None, :] ** 2) / (2 * PI))
        return chirp * chi, _edge_note(chi, quad.tail_tol, "characteristic function")

    return _cache.get(("j_integral", rho.key, _quad_key(quad)), build)


def _warn(note: str | None) -> None:
    if note:
        warnings.warn(note, BoxEdgeWarning, stacklevel=3)


def j_integral(rho: DensityOperator, point: PhasePoint, quad: QuadratureSpec) -> complex:
    """(1/4pi^2) int du dv e^{iup - ivq} e^{-i(u^2+v^2)/2pi} Tr{rho e^{ivq - iup}}."""
    samples, note = _j_integral_samples(rho, quad)
    _warn(note)
    u, w = quad.nodes()
    return _fourier_point(samples, u, w, point.q, point.p)


def _kirkwood_samples(rho: DensityOperator, quad: QuadratureSpec):
    def build():
        u, _, _ = _beta_plane(quad)
        chi = _chi_grid(rho, quad)
        return np.exp(0.5j * u[:, None] * u[None, :]) * chi, _edge_note(chi, quad.tail_tol, "characteristic function")

    return _cache.get(("kirkwood", rho.key, _quad_key(quad)), build)


def kirkwood_integral(rho: DensityOperator, point: PhasePoint, quad: QuadratureSpec) -> complex:
    """(1/4pi^2) int du dv e^{iup - ivq} e^{iuv/2} Tr{rho e^{ivq - iup}}."""
    samples, note = _kirkwood_samples(rho, quad)
    _warn(note)
    u, w = quad.nodes()
    return _fourier_point(samples, u, w, point.q, point.p)


def j_multiplier(rho: DensityOperator, grid: PhaseGrid, quad: QuadratureSpec, chirp: bool = True) -> ComplexField:
    """Apply the Fourier-domain multiplier e^{-i|beta|^2/pi} to sampled chi and transform onto ``grid``.

    With ``chirp=False`` the multiplier is 1 and the result is the Wigner function.
    The characteristic samples come from explicit displacement-matrix traces and the
    transform is done for the whole grid at once as two dense matrix products.
    """
    u, w, betas = _beta_plane(quad)
    chi = _cache.get(("chi-matrix", rho.key, _quad_key(quad)), lambda: _characteristic_by_matrices(rho, betas))
    g = chi * np.exp(-1j * (u[:, None] ** 2 + u[None, :] ** 2) / (2 * PI)) if chirp else chi
    eq = w[None, :] * np.exp(-1j * np.outer(grid.qs, u))  # (n_q, v)
    ep = w[:, None] * np.exp(1j * np.outer(u, grid.ps))  # (u, n_p)
    values = eq @ (g.T @ ep) / (4 * PI**2)
    notes = [n for n in [_edge_note(chi, quad.tail_tol, "characteristic function")] if n]
    return ComplexField(
        values,
        grid,
        "multiplier" if chirp else "multiplier-identity",
        state={"label": rho.label},
        quad=quad,
        notes=notes,
        failed=not np.all(np.isfinite(values)),
        meta={"route": "j_multiplier", "params": {"chirp": chirp}, "quadrature": asdict(quad)},
    )


def _check_angles(cot_a: float, cot_b: float) -> None:
    for c in (cot_a, cot_b):
        if not math.isfinite(c) or abs(c) < 1e-6:
            raise ParameterError("cot values must be finite with |cot| >= 1e-6")


def _j_general_samples(rho: DensityOperator, cot_a: float, cot_b: float, quad: QuadratureSpec):
    def build():
        tan_a, tan_b = 1.0 / cot_a, 1.0 / cot_b
        u, _, _ = _beta_plane(quad)
        uu, vv = np.meshgrid(u, u, indexing="ij")
        # e^{i u tanB q - i v tanA p} = D(gamma)
        gammas = ((vv * tan_a + 1j * uu * tan_b) / SQRT2).reshape(-1)
        dim = quad.fock_dim
        omega = fock.quadratic_phase_operator(cot_a, cot_b, dim)
        lam, vec, s = _eig_factors(rho)
        if s > dim:
            raise TruncationError(f"state occupies {s} levels but only {dim} are available")
        trace = np.empty(gammas.size, dtype=complex)
        for start in range(0, gammas.size, CHUNK):
            d = displacement_columns(-gammas[start : start + CHUNK], dim, s)
            amp = d @ vec  # D^dag(gamma) |e_i>
            trace[start : start + CHUNK] = np.einsum("pki,kl,pli,i->p", amp.conj(), omega, amp, lam)
        trace = trace.reshape(uu.shape)
        phase = np.exp(-0.5j * uu**2 * tan_b + 0.5j * vv**2 * tan_a)
        return phase * trace, _edge_note(trace, 1e-6, "general-angle trace")

    return _cache.get(("general", rho.key, cot_a, cot_b, _quad_key(quad)), build)


def j_general(rho: DensityOperator, point: PhasePoint, cot_a: float, cot_b: float, quad: QuadratureSpec) -> complex:
    """Unnormalized two-angle J built from the quadratic-phase operator between displacements."""
    _check_angles(cot_a, cot_b)
    samples, note = _j_general_samples(rho, cot_a, cot_b, quad)
    _warn(note)
    u, w = quad.nodes()
    pre = np.exp(0.5j * point.q**2 * cot_a - 0.5j * point.p**2 * cot_b)
    return complex(pre * _fourier_point(samples, u, w, point.q, point.p))


def _wigner_fresnel_samples(rho: DensityOperator, quad: QuadratureSpec):
    def build():
        u, _, _ = _beta_plane(quad)
        uu, vv = np.meshgrid(u, u, indexing="ij")
        # W evaluated at (q, p) = (v/pi, -u/pi)
        alphas = (vv / PI - 1j * uu / PI) / SQRT2
        pops = displaced_populations(rho, alphas, quad.fock_dim)
        leak = 1.0 - float(np.min(np.sum(pops, axis=-1)))
        if leak > quad.tail_tol:
            raise TruncationError(
                f"Wigner samples at |alpha| <= {np.max(np.abs(alphas)):.2f} leak {leak:.1e} out of "
                f"{quad.fock_dim} levels; raise fock_dim or shrink half_width"
            )
        wig = (pops @ ((-1.0) ** np.arange(quad.fock_dim))) / PI
        chirp = np.exp(1j * (uu**2 + vv**2) / (2 * PI))
        return chirp * wig, _edge_note(wig, 1e-6, "Wigner function")

    return _cache.get(("wigner-fresnel", rho.key, _quad_key(quad)), build)


def j_wigner_fresnel(rho: DensityOperator, point: PhasePoint, quad: QuadratureSpec) -> complex:
    """(1/4pi i) e^{i pi (q^2+p^2)/2} int du dv e^{iup-ivq} e^{i(u^2+v^2)/2pi} W(v/pi, -u/pi).

    Carries the pre-normalization factor: the result is pi/2 times ``j_integral``.
    """
    samples, note = _wigner_fresnel_samples(rho, quad)
    _warn(note)
    u, w = quad.nodes()
    pre = np.exp(0.5j * PI * (point.q**2 + point.p**2)) / (4j * PI)
    return complex(pre * 4 * PI**2 * _fourier_point(samples, u, w, point.q, point.p))


# ---------------------------------------------------------------------------
# Kirkwood as an expectation value


def _squeeze_like(c: float, dim: int) -> np.ndarray:
    """exp(c a^dag^2) in the truncated basis; exact because a^dag^2 only raises.

    Element (n + 2j, n) is c^j / j! * sqrt((n + 2j)! / n!).
    """
    out = np.eye(dim)
    if c == 0:
        return out
    for n in range(dim):
        j = np.arange(1, (dim - 1 - n) // 2 + 1)
        m = n + 2 * j
        logmag = j * math.log(abs(c)) - gammaln(j + 1) + 0.5 * (gammaln(m + 1) - gammaln(n + 1))
        out[m, n] = np.sign(c) ** j * np.exp(logmag)
    return out


def kirkwood_expectation(psi: fock.FockVector, point: PhasePoint, cross_check: QuadratureSpec | None = None) -> complex:
    """(1/sqrt2 pi) e^{(q^2+p^2)/2 + iqp} <-i sqrt2 p| e^{a^2/2} rho e^{-a^dag^2/2} |sqrt2 q>.

    With ``cross_check`` the value is compared with ``kirkwood_integral`` through
    ``K_int = conj(K_exp) e^{2iqp}``, the relation between the two definitions
    under this package's quadrature convention.
    """
    q, p = point.q, point.p
    if abs(q) > 4 or abs(p) > 4:
        raise ParameterError("kirkwood_expectation is limited to |q|, |p| <= 4")
    dim = psi.dim
    if dim < 96:
        raise ParameterError("kirkwood_expectation needs a basis of at least 96 levels")
    c = psi.coeffs
    bra = _squeeze_like(0.5, dim) @ fock._coherent_amplitudes(-1j * SQRT2 * p, dim)
    ket = _squeeze_like(-0.5, dim) @ fock._coherent_amplitudes(SQRT2 * q + 0j, dim)
    val = np.vdot(bra, c) * np.vdot(c, ket)
    val = complex(np.exp((q**2 + p**2) / 2 + 1j * q * p) * val / (SQRT2 * PI))
    if cross_check is not None:
        ref = kirkwood_integral(fock.density_from_pure(psi), point, cross_check)
        mapped = val.conjugate() * np.exp(2j * q * p)
        if abs(mapped - ref) > 1e-3:
            raise TruncationError(f"expectation and integral Kirkwood disagree by {abs(mapped - ref):.2e}")
    return val


# ---------------------------------------------------------------------------
# operator identity


def gaussian_displacement_integral(quad: QuadratureSpec) -> np.ndarray:
    """(1/2pi^2) int d^2beta e^{-i|beta|^2/pi} D(beta), elementwise in a basis of quad.fock_dim levels.

    Here the box half-width bounds Re(beta) and Im(beta) directly, since beta
    is the integration variable.
    """
    x, w = quad.nodes()
    flat = (x[:, None] + 1j * x[None, :]).reshape(-1)
    weight = (np.outer(w, w) * np.exp(-1j * np.abs(flat.reshape(x.size, x.size)) ** 2 / PI)).reshape(-1)
    dim = quad.fock_dim
    acc = np.zeros((dim, dim), dtype=complex)
    for start in range(0, flat.size, CHUNK):
        d = displacement_columns(flat[start : start + CHUNK], dim)
        acc += np.einsum("p,pmn->mn", weight[start : start + CHUNK], d)
    return acc / (2 * PI**2)


def gaussian_displacement_identity(quad: QuadratureSpec, block: int = 10) -> float:
    """Frobenius distance between the Gaussian-weighted displacement integral and e^{i theta n}/(2i+pi)."""
    if quad.fock_dim < 20 or quad.half_width < 8:
        raise ParameterError("identity check needs fock_dim >= 20 and half_width >= 8")
    lhs = gaussian_displacement_integral(quad)[:block, :block]
    rhs = J_PREFACTOR * fock.number_phase_diag(theta(), block)
    return float(np.linalg.norm(lhs - rhs))


def _bch_operators(u: float, v: float, cot_a: float, cot_b: float, work_dim: int):
    if cot_a == 0 or cot_b == 0:
        raise SingularParameterError("BCH factorization needs nonzero cot_a and cot_b")
    q, p = fock.quadrature_operators(work_dim)
    ta, tb = 1.0 / cot_a, 1.0 / cot_b
    omega = 0.5j * (cot_b * (p @ p) - cot_a * (q @ q))
    shift_q = expm(1j * u * tb * q)
    shift_p = expm(-1j * v * ta * p)
    lhs9 = expm(1j * v * q - 1j * u * p + omega)
    rhs9 = (
        np.exp(-0.5j * u * u * tb + 0.5j * v * v * ta)
        * shift_q
        @ shift_p
        @ expm(omega)
        @ expm(1j * v * ta * p)
        @ expm(-1j * u * tb * q)
    )
    lhs11 = shift_q @ shift_p
    rhs11 = np.exp(0.5j * u * v * ta * tb) * expm(1j * u * tb * q - 1j * v * ta * p)
    return lhs9, rhs9, lhs11, rhs11


def bch_residuals(u: float, v: float, cot_a: float, cot_b: float, dim: int = 32, work_dim: int | None = None):
    """Frobenius residuals of the two factorizations behind the two-angle form.

    Returns ``(chirped, shift)``:

    * chirped: exp(i v q - i u p + i p^2 cot_b/2 - i q^2 cot_a/2) against
      e^{-i u^2 tan_b/2 + i v^2 tan_a/2} e^{i u tan_b q} e^{-i v tan_a p} Omega
      e^{i v tan_a p} e^{-i u tan_b q};
    * shift: e^{i u tan_b q} e^{-i v tan_a p} against
      e^{i u v tan_a tan_b/2} e^{i u tan_b q - i v tan_a p}.

    Every exponential is formed at ``work_dim`` (default 8 dim) levels and
    only the top ``dim/2`` block is compared.
    """
    if dim < 8:
        raise ParameterError("dim must be >= 8")
    work_dim = 8 * dim if work_dim is None else work_dim
    if work_dim < dim:
        raise ParameterError("work_dim must be at least dim")
    lhs9, rhs9, lhs11, rhs11 = _bch_operators(u, v, cot_a, cot_b, work_dim)
    b = dim // 2
    return float(np.linalg.norm((lhs9 - rhs9)[:b, :b])), float(np.linalg.norm((lhs11 - rhs11)[:b, :b]))


# ---------------------------------------------------------------------------
# grids


ROUTES = (
    "j_integral",
    "j_trace",
    "j_multiplier",
    "j_general",
    "j_wigner_fresnel",
    "kirkwood_integral",
    "wigner_parity",
    "s_param",
)


PROVENANCE = {
    "j_integral": "integral",
    "j_trace": "trace",
    "j_multiplier": "multiplier",
    "j_general": "general",
    "j_wigner_fresnel": "wigner-fresnel",
    "kirkwood_integral": "kirkwood-integral",
    "wigner_parity": "wigner-parity",
    "s_param": "s-param",
}


def _chunks(n: int, size: int):
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def grid_eval(
    route: str,
    rho: DensityOperator,
    grid: PhaseGrid,
    quad: QuadratureSpec,
    workers: int = 1,
    **params,
) -> ComplexField:
    """Evaluate ``route`` on every grid point.

    Points are split into fixed chunks; ``workers`` only changes how many chunks
    run at once, never the arithmetic, so output is identical for any worker count.
    Cells that fail are NaN and the field is marked ``failed``.
    """
    if route not in ROUTES:
        raise ParameterError(f"unknown route {route!r}; choose from {', '.join(ROUTES)}")
    if route == "j_multiplier":
        return j_multiplier(rho, grid, quad, chirp=params.get("chirp", True))

    q, p = grid.mesh()
    qf, pf = q.reshape(-1), p.reshape(-1)
    alphas = (qf + 1j * pf) / SQRT2
    notes: list[str] = []
    dtype = complex

    # warm the per-state sample cache once so worker threads only read it
    if route == "j_integral":
        _, note = _j_integral_samples(rho, quad)
        notes.append(note)
    elif route == "kirkwood_integral":
        _, note = _kirkwood_samples(rho, quad)
        notes.append(note)
    elif route == "j_general":
        _check_angles(params["cot_a"], params["cot_b"])
        _, note = _j_general_samples(rho, params["cot_a"], params["cot_b"], quad)
        notes.append(note)
    elif route == "j_wigner_fresnel":
        _, note = _wigner_fresnel_samples(rho, quad)
        notes.append(note)

    def pointwise(fn):
        def run(lo, hi):
            out = np.empty(hi - lo, dtype=dtype)
            for i in range(lo, hi):
                try:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", BoxEdgeWarning)
                        out[i - lo] = fn(PhasePoint(float(qf[i]), float(pf[i])))
                except (TruncationError, ArithmeticError):
                    out[i - lo] = np.nan
            return out

        return run

    if route == "j_trace":

        def run(lo, hi):
            vals, ok = _j_trace_batch(rho, alphas[lo:hi], quad)
            return np.where(ok, vals, np.nan)

        size = 256
    elif route == "j_integral":
        run, size = pointwise(lambda pt: j_integral(rho, pt, quad)), 64
    elif route == "kirkwood_integral":
        run, size = pointwise(lambda pt: kirkwood_integral(rho, pt, quad)), 64
    elif route == "j_general":
        ca, cb = params["cot_a"], params["cot_b"]
        run, size = pointwise(lambda pt: j_general(rho, pt, ca, cb, quad)), 64
    elif route == "j_wigner_fresnel":
        run, size = pointwise(lambda pt: j_wigner_fresnel(rho, pt, quad)), 64
    elif route == "wigner_parity":
        dim = max(rho.dim, quad.fock_dim)
        dtype = float
        run, size = pointwise(lambda pt: wigner_parity(rho, pt, dim)), 64
    else:  # s_param
        s = params["s"]
        if s == 1:
            raise SingularParameterError("s = 1 makes the prefactor singular")
        if s > 0:
            raise UnsupportedParameterError(f"s = {s} > 0 is not supported")
        dim = max(rho.dim, quad.fock_dim)
        dtype = float
        run, size = pointwise(lambda pt: s_param(rho, pt, s, dim, quad.tail_tol)), 64

    spans = _chunks(qf.size, size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda span: run(*span), spans))
    else:
        parts = [run(*span) for span in spans]
    values = np.concatenate(parts).reshape(grid.shape)
    failed = not np.all(np.isfinite(values))
    extra = {k: v for k, v in params.items()}
    return ComplexField(
        values,
        grid,
        PROVENANCE[route],
        state={"label": rho.label},
        quad=quad,
        notes=[n for n in notes if n],
        failed=failed,
        meta={"route": route, "params": extra, "quadrature": asdict(quad)},
    )


def field_integral(f: ComplexField):
    """Trapezoid double integral of the field over its grid."""
    if not np.all(np.isfinite(f.values)):
        raise TruncationError("field has non-finite values")
    val = trapezoid(trapezoid(f.values, f.grid.ps, axis=1), f.grid.qs)
    return complex(val) if np.iscomplexobj(f.values) else float(val)
