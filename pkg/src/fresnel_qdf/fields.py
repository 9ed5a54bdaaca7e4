"""Phase-space grids, quadrature settings and sampled fields, plus their CSV/JSON forms."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError

CSV_FLOAT = "{:.11e}"  # 12 significant digits


@dataclass(frozen=True)
class PhaseGrid:
    q_min: float
    q_max: float
    n_q: int
    p_min: float
    p_max: float
    n_p: int

    def __post_init__(self):
        for lo, hi, n, name in ((self.q_min, self.q_max, self.n_q, "q"), (self.p_min, self.p_max, self.n_p, "p")):
            if n < 1:
                raise ParameterError(f"n_{name} must be >= 1")
            # a single-node axis is allowed only as a degenerate point
            if n == 1 and hi != lo:
                raise ParameterError(f"single-point {name} axis needs {name}_min == {name}_max")
            if n >= 2 and not hi > lo:
                raise ParameterError(f"{name}_max must exceed {name}_min")

    @classmethod
    def square(cls, half_width: float, n: int) -> "PhaseGrid":
        return cls(-half_width, half_width, n, -half_width, half_width, n)

    @classmethod
    def parse(cls, text: str) -> "PhaseGrid":
        """Parse ``qmin,qmax,nq,pmin,pmax,np``."""
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 6:
            raise ParameterError("grid must be qmin,qmax,nq,pmin,pmax,np")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]), float(parts[3]), float(parts[4]), int(parts[5]))
        except ValueError as exc:
            raise ParameterError(f"bad grid spec {text!r}") from exc

    @property
    def qs(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_q, self.n_p)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.qs, self.ps, indexing="ij")

    def alphas(self) -> np.ndarray:
        q, p = self.mesh()
        return (q + 1j * p) / np.sqrt(2.0)


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls every numerical route.

    half_width: box half-width L for the u, v integration variables.
    points: nodes per axis (odd, so the origin is a node).
    fock_dim: number of Fock levels used for displaced populations.
    tail_tol: series tail / box-edge tolerance.
    """

    half_width: float = 12.0
    points: int = 201
    fock_dim: int = 64
    tail_tol: float = 1e-10

    def __post_init__(self):
        if not self.half_width > 0:
            raise ParameterError("quadrature half_width must be > 0")
        if self.points < 33 or self.points % 2 == 0:
            raise ParameterError("quadrature points must be odd and >= 33")
        if self.fock_dim < 8:
            raise ParameterError("fock_dim must be >= 8")
        if not 0 < self.tail_tol < 1e-2:
            raise ParameterError("tail_tol must lie in (0, 1e-2)")

    @classmethod
    def parse(cls, text: str) -> "QuadratureSpec":
        """Parse ``L,M,N,eps``."""
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 4:
            raise ParameterError("quad must be L,M,N,eps")
        try:
            return cls(float(parts[0]), int(parts[1]), int(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise ParameterError(f"bad quadrature spec {text!r}") from exc

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Trapezoid nodes and weights on [-L, L]."""
        u = np.linspace(-self.half_width, self.half_width, self.points)
        h = u[1] - u[0]
        w = np.full(self.points, h)
        w[0] = w[-1] = h / 2
        return u, w


def default_quadrature(max_amplitude: float = 0.0, fock_dim: int = 64) -> QuadratureSpec:
    # vacuum characteristic e^{-(u^2+v^2)/4} is then e^{-32} at the box corners
    return QuadratureSpec(half_width=2.0 * abs(max_amplitude) + 8.0, points=201, fock_dim=fock_dim, tail_tol=1e-10)


@dataclass
class ComplexField:
    """Values sampled on a PhaseGrid; ``values[i, j]`` sits at ``(qs[i], ps[j])``."""

    values: np.ndarray
    grid: PhaseGrid
    provenance: str
    state: dict = field(default_factory=dict)
    quad: QuadratureSpec | None = None
    notes: list[str] = field(default_factory=list)
    failed: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise ParameterError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def sidecar(self) -> dict:
        return {
            "provenance": self.provenance,
            "grid": asdict(self.grid),
            "quadrature": asdict(self.quad) if self.quad is not None else None,
            "state": self.state,
            "notes": list(self.notes),
            "failed": self.failed,
            "meta": self.meta,
        }


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def field_to_csv(f: ComplexField) -> str:
    """Row-major text with p varying fastest."""
    q, p = f.grid.mesh()
    lines = ["q,p,value" if f.is_real else "q,p,re,im"]
    fmt = CSV_FLOAT.format
    vals = f.values.reshape(-1)
    for qq, pp, v in zip(q.reshape(-1), p.reshape(-1), vals):
        if f.is_real:
            lines.append(f"{fmt(qq)},{fmt(pp)},{fmt(v)}")
        else:
            lines.append(f"{fmt(qq)},{fmt(pp)},{fmt(v.real)},{fmt(v.imag)}")
    return "\n".join(lines) + "\n"


def write_field(f: ComplexField, path, extra: dict | None = None) -> Path:
    """Write ``path`` (CSV) and ``path`` with ``.json`` suffix (sidecar); returns the sidecar path."""
    path = Path(path)
    _atomic_write(path, field_to_csv(f))
    side = f.sidecar()
    if extra:
        side.update(extra)
    side_path = path.with_suffix(".json")
    _atomic_write(side_path, json.dumps(side, indent=2, sort_keys=True, default=str) + "\n")
    return side_path


def _axis_from_column(col: np.ndarray) -> tuple[float, float, int]:
    vals = np.unique(col)
    return float(vals[0]), float(vals[-1]), int(vals.size)


def read_field(path) -> ComplexField:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    qmin, qmax, nq = _axis_from_column(body[:, 0])
    pmin, pmax, np_ = _axis_from_column(body[:, 1])
    grid = PhaseGrid(qmin, qmax, nq, pmin, pmax, np_)
    if header == ["q", "p", "value"]:
        values = body[:, 2].reshape(nq, np_)
    elif header == ["q", "p", "re", "im"]:
        values = np.empty(body.shape[0], dtype=complex)
        values.real, values.imag = body[:, 2], body[:, 3]  # keeps signed zeros
        values = values.reshape(nq, np_)
    else:
        raise ParameterError(f"unrecognised field header {header}")
    side = path.with_suffix(".json")
    provenance, state, quad, notes, failed, meta = "unknown", {}, None, [], False, {}
    if side.exists():
        d = json.loads(side.read_text())
        provenance = d.get("provenance", provenance)
        state = d.get("state") or {}
        quad = QuadratureSpec(**d["quadrature"]) if d.get("quadrature") else None
        notes = d.get("notes", [])
        failed = d.get("failed", False)
        meta = d.get("meta", {})
    return ComplexField(values, grid, provenance, state, quad, notes, failed, meta)
