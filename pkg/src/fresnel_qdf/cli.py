"""Command-line front end.

    qdf compute      --dist j --method trace --state '{"kind":"fock","n":3}' --grid -4,4,81,-4,4,81 --out j3.csv
    qdf verify       --suite identity
    qdf reconstruct  --state '{"kind":"fock","n":3}' --grid -3,3,41,-3,3,41 --chi 1 --out rec.csv
    qdf frft         --omega 0.7 --in signal.csv --out out.csv
    qdf replay       rec.json

Exit codes: 0 success, 2 bad parameters, 3 numerical failure.  Every CSV is
paired with a JSON manifest next to it (same stem) that ``replay`` can rerun.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, closedform, fock, frft, qdf, tomography
from .errors import ParameterError, TruncationError
from .fields import ComplexField, PhaseGrid, QuadratureSpec, _atomic_write, default_quadrature, write_field

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC = 0, 2, 3
ENV_DIM = "QDF_FOCK_DIM"

# --grid/--quad values may start with '-' and would otherwise look like flags
_VALUE_FLAGS = ("--grid", "--quad", "--omega", "--s", "--cota", "--cotb", "--chi")


# ---------------------------------------------------------------------------
# state specifications


def _complex(v, name: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        z = complex(v)
    elif isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        z = complex(v[0], v[1])
    else:
        raise ParameterError(f"{name} must be a number or an [re, im] pair")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ParameterError(f"{name} must be finite")
    return z


_KIND_FIELDS = {"fock": {"n"}, "coherent": {"alpha"}, "cat": {"alpha1", "alpha2", "sign"}}


@dataclass(frozen=True)
class StateSpec:
    kind: str
    n: int | None = None
    alpha: complex | None = None
    alpha1: complex | None = None
    alpha2: complex | None = None
    sign: int | None = None
    fock_dim: int | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise ParameterError("state must be a JSON object with a 'kind'")
        kind = d["kind"]
        if kind not in _KIND_FIELDS:
            raise ParameterError(f"unknown state kind {kind!r}; choose fock, coherent or cat")
        given = set(d) - {"kind", "fock_dim"}
        need = _KIND_FIELDS[kind]
        if given != need:
            raise ParameterError(f"{kind} state needs exactly {sorted(need)}, got {sorted(given)}")
        dim = d.get("fock_dim")
        if dim is not None and (not isinstance(dim, int) or isinstance(dim, bool) or dim < 2):
            raise ParameterError("fock_dim must be an integer >= 2")
        if kind == "fock":
            n = d["n"]
            if not isinstance(n, int) or isinstance(n, bool) or n < 0:
                raise ParameterError("n must be a non-negative integer")
            return cls(kind, n=n, fock_dim=dim)
        if kind == "coherent":
            return cls(kind, alpha=_complex(d["alpha"], "alpha"), fock_dim=dim)
        sign = {"+": 1, "-": -1, 1: 1, -1: -1}.get(d["sign"]) if not isinstance(d["sign"], bool) else None
        if sign is None:
            raise ParameterError("sign must be '+', '-', 1 or -1")
        return cls(kind, alpha1=_complex(d["alpha1"], "alpha1"), alpha2=_complex(d["alpha2"], "alpha2"), sign=sign, fock_dim=dim)

    @classmethod
    def parse(cls, text: str) -> "StateSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParameterError(f"state is not valid JSON: {exc.msg}") from exc

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "fock":
            out["n"] = self.n
        elif self.kind == "coherent":
            out["alpha"] = [self.alpha.real, self.alpha.imag]
        else:
            out["alpha1"] = [self.alpha1.real, self.alpha1.imag]
            out["alpha2"] = [self.alpha2.real, self.alpha2.imag]
            out["sign"] = "+" if self.sign == 1 else "-"
        if self.fock_dim is not None:
            out["fock_dim"] = self.fock_dim
        return out

    @property
    def amplitude(self) -> float:
        """Rough phase-space radius of the state, in |alpha| units."""
        if self.kind == "fock":
            return math.sqrt(self.n + 0.5)
        if self.kind == "coherent":
            return abs(self.alpha)
        return max(abs(self.alpha1), abs(self.alpha2))

    def min_dim(self) -> int:
        if self.kind == "fock":
            return self.n + 8
        a = self.amplitude
        return int(math.ceil(a * a + 10.0 * a + 20.0))

    def vector(self, dim: int) -> fock.FockVector:
        if self.kind == "fock":
            return fock.fock_state(self.n, dim)
        if self.kind == "coherent":
            return fock.coherent_state(self.alpha, dim)
        return fock.cat_state(self.alpha1, self.alpha2, self.sign, dim)

    def cat(self) -> closedform.CatSpec:
        """Coherent states are the a1 = a2 special case of the cat closed form."""
        if self.kind == "coherent":
            return closedform.CatSpec(self.alpha, self.alpha, 1)
        return closedform.CatSpec(self.alpha1, self.alpha2, self.sign)


def _env_dim() -> int | None:
    raw = os.environ.get(ENV_DIM)
    if raw is None or raw == "":
        return None
    try:
        dim = int(raw)
    except ValueError as exc:
        raise ParameterError(f"{ENV_DIM}={raw!r} is not an integer") from exc
    if dim < 8:
        raise ParameterError(f"{ENV_DIM} must be >= 8")
    return dim


def _grid_reach(grid: PhaseGrid) -> float:
    """Largest |alpha| on the grid."""
    q = max(abs(grid.q_min), abs(grid.q_max))
    p = max(abs(grid.p_min), abs(grid.p_max))
    return math.hypot(q, p) / math.sqrt(2.0)


def _auto_dim(state: StateSpec, grid: PhaseGrid | None) -> int:
    r = state.amplitude + (_grid_reach(grid) if grid is not None else 0.0)
    return max(64, state.min_dim(), int(math.ceil(r * r + 10.0 * r + 20.0)))


def resolve_quad(args, state: StateSpec, grid: PhaseGrid | None) -> QuadratureSpec:
    """--quad beats --fock-dim beats QDF_FOCK_DIM beats an automatic choice."""
    if getattr(args, "quad", None):
        return QuadratureSpec.parse(args.quad)
    dim = getattr(args, "fock_dim", None) or _env_dim() or _auto_dim(state, grid)
    return default_quadrature(state.amplitude * math.sqrt(2.0), dim)


def state_dim(state: StateSpec, quad: QuadratureSpec) -> int:
    dim = state.fock_dim or quad.fock_dim
    if dim > quad.fock_dim:
        raise ParameterError(f"state fock_dim {dim} exceeds quadrature fock_dim {quad.fock_dim}")
    return dim


# ---------------------------------------------------------------------------
# compute

_METHODS = {
    "j": {"integral": "j_integral", "trace": "j_trace", "multiplier": "j_multiplier", "general": "j_general",
          "wigner-fresnel": "j_wigner_fresnel", "closedform": None},
    "kirkwood": {"integral": "kirkwood_integral", "closedform": None},
    "wigner": {"trace": "wigner_parity"},
    "sparam": {"trace": "s_param"},
}
_DEFAULT_METHOD = {"j": "trace", "kirkwood": "integral", "wigner": "trace", "sparam": "trace"}


def closed_form_field(dist: str, state: StateSpec, grid: PhaseGrid) -> ComplexField:
    q, p = grid.mesh()
    if dist == "j":
        vals = closedform.j_fock(state.n, q, p) if state.kind == "fock" else closedform.j_cat(state.cat(), q, p)
    else:
        vals = closedform.kirkwood_fock(state.n, q, p) if state.kind == "fock" else closedform.kirkwood_cat(state.cat(), q, p)
    return ComplexField(np.asarray(vals, dtype=complex), grid, "closed-form", state=state.to_dict(), meta={"dist": dist})


def _compute_field(args) -> tuple[ComplexField, dict]:
    dist = args.dist
    method = args.method or _DEFAULT_METHOD[dist]
    if method not in _METHODS[dist]:
        raise ParameterError(f"method {method!r} is not available for --dist {dist}; choose {sorted(_METHODS[dist])}")
    state = StateSpec.parse(args.state)
    grid = PhaseGrid.parse(args.grid)
    record = {"dist": dist, "method": method, "state": state.to_dict(), "grid": asdict(grid)}
    route = _METHODS[dist][method]
    if route is None:
        return closed_form_field(dist, state, grid), record
    params: dict = {}
    if route == "j_general":
        if args.cota is None or args.cotb is None:
            raise ParameterError("--method general needs --cota and --cotb")
        params = {"cot_a": args.cota, "cot_b": args.cotb}
    if route == "s_param":
        if args.s is None:
            raise ParameterError("--dist sparam needs --s")
        params = {"s": args.s}
    quad = resolve_quad(args, state, grid)
    rho = fock.density_from_pure(state.vector(state_dim(state, quad)))
    f = qdf.grid_eval(route, rho, grid, quad, workers=args.workers, **params)
    f.state = state.to_dict()
    record.update(route=route, params=params, quadrature=asdict(quad))
    return f, record


def _manifest(command: str, args_record: dict, outputs: list[str], started: float, extra: dict | None = None) -> dict:
    m = {
        "command": command,
        "args": args_record,
        "outputs": outputs,
        "wall_time_s": round(time.perf_counter() - started, 6),
        "version": __version__,
    }
    if extra:
        m.update(extra)
    return m


def cmd_compute(args) -> int:
    started = time.perf_counter()
    f, record = _compute_field(args)
    out = Path(args.out)
    args_record = _replay_args(args, ("dist", "method", "state", "grid", "quad", "s", "cota", "cotb", "fock_dim"))
    if "quadrature" in record:
        args_record["quad"] = _quad_text(QuadratureSpec(**record["quadrature"]))
    write_field(f, out, extra={"manifest": _manifest("compute", args_record, [str(out)], started, {"run": record})})
    print(f"wrote {out} ({f.provenance}, {f.grid.n_q}x{f.grid.n_p})")
    for note in f.notes:
        print(f"note: {note}")
    if f.failed:
        print(f"error: {int(np.sum(~np.isfinite(f.values)))} cells failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _report(rows: list[tuple[str, float, float]]) -> int:
    width = max(len(r[0]) for r in rows)
    ok_all = True
    for name, value, tol in rows:
        ok = bool(np.isfinite(value) and value < tol)
        ok_all &= ok
        print(f"{name:<{width}}  {value:.3e}  < {tol:.1e}  {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok_all else EXIT_NUMERIC


def _suite_normalization(args) -> list:
    state = StateSpec.parse(args.state) if args.state else StateSpec("fock", n=0)
    extent = state.amplitude * math.sqrt(2.0)
    half = max(5.0, math.ceil(extent + 3.0))
    n = int(round(2 * half / 0.1)) + 1
    grid = PhaseGrid.square(half, n)
    quad = resolve_quad(args, state, grid)
    quad = QuadratureSpec(quad.half_width, quad.points, max(quad.fock_dim, _auto_dim(state, grid)), quad.tail_tol)
    rho = fock.density_from_pure(state.vector(state_dim(state, quad)))
    total = qdf.field_integral(qdf.grid_eval("j_trace", rho, grid, quad, workers=args.workers))
    tol = args.tol or 2e-3
    print(f"integral of J over [-{half:g},{half:g}]^2: {total.real:.10f}{total.imag:+.2e}i")
    return [("|int J - 1|", abs(total - 1.0), tol)]


def _suite_routes(args) -> list:
    state = StateSpec.parse(args.state) if args.state else StateSpec("fock", n=0)
    grid = PhaseGrid.square(3.0, 9)
    quad = QuadratureSpec.parse(args.quad) if args.quad else QuadratureSpec(12.0, 201, max(96, state.min_dim()), 1e-10)
    rho = fock.density_from_pure(state.vector(state_dim(state, quad)))
    fields = {r: qdf.grid_eval(r, rho, grid, quad, workers=args.workers).values for r in ("j_integral", "j_trace", "j_multiplier")}
    tol = args.tol or 1e-3
    names = list(fields)
    return [
        (f"{a} vs {b}", float(np.max(np.abs(fields[a] - fields[b]))), tol)
        for i, a in enumerate(names)
        for b in names[i + 1 :]
    ]


def _suite_identity(args) -> list:
    quad = QuadratureSpec.parse(args.quad) if args.quad else QuadratureSpec(8.0, 201, 24, 1e-10)
    return [("gaussian displacement identity (10x10)", qdf.gaussian_displacement_identity(quad), args.tol or 1e-3)]


def frft_checks(tol: float | None = None) -> list:
    grid = frft.SignalGrid.symmetric(8.0, 512)
    rows = []
    omega = 0.7
    phi0 = frft.global_phase(omega, grid)
    eig = 0.0
    for n in range(5):
        hg = frft.hermite_gauss(n, grid)
        out = frft.apply(hg, omega)
        eig = max(eig, float(np.max(np.abs(out.samples - np.exp(1j * (phi0 - n * omega)) * hg.samples))))
    rows.append(("hermite-gauss eigenrelation n<=4", eig, tol or 1e-5))
    x = grid.xs
    sig = frft.SampledSignal(np.exp(-((x - 1.0) ** 2) / 2 + 0.5j * x) + 0.5 * frft.hermite_gauss(3, grid).samples, grid)
    back = frft.apply(frft.apply(sig, omega), -omega)
    rows.append(("roundtrip F_-w F_w", float(np.max(np.abs(back.samples - sig.samples))), tol or 1e-5))
    direct = (grid.weights() * sig.samples) @ np.exp(-1j * np.outer(x, x)) / math.sqrt(2 * math.pi)
    phase = frft.prefactor(math.pi / 2) * math.sqrt(2 * math.pi)
    quarter = frft.apply(sig, math.pi / 2).samples
    rows.append(("omega=pi/2 vs Fourier quadrature", float(np.max(np.abs(quarter - phase * direct))), tol or 1e-8))
    for y, w in ((0.0, math.pi / 3), (2.0, math.pi / 2)):
        rows.append((f"delta roundtrip y={y:g} w={w:.4f}", frft.delta_roundtrip_check(y, w, grid), tol or 1e-4))
    return rows


BCH_SAMPLES = ((0.7, -0.3, 1.0, 2.0), (0.5, 0.4, math.pi, -math.pi), (-0.9, 0.6, 0.5, -1.5))


def bch_checks(tol: float | None = None) -> list:
    rows = []
    for u, v, ca, cb in BCH_SAMPLES:
        chirped, shift = qdf.bch_residuals(u, v, ca, cb, dim=32)
        tag = f"u={u:g} v={v:g} cotA={ca:.4g} cotB={cb:.4g}"
        rows.append((f"chirped factorization {tag}", chirped, tol or 1e-8))
        rows.append((f"shift factorization {tag}", shift, tol or 1e-8))
    return rows


_SUITES = {
    "normalization": _suite_normalization,
    "routes": _suite_routes,
    "identity": _suite_identity,
    "frft": lambda args: frft_checks(args.tol),
    "bch": lambda args: bch_checks(args.tol),
}


def cmd_verify(args) -> int:
    if args.tol is not None and not args.tol > 0:
        raise ParameterError("--tol must be positive")
    return _report(_SUITES[args.suite](args))


# ---------------------------------------------------------------------------
# reconstruct


def cmd_reconstruct(args) -> int:
    started = time.perf_counter()
    state = StateSpec.parse(args.state)
    grid = PhaseGrid.parse(args.grid)
    quad = resolve_quad(args, state, grid)
    if not args.quad:
        quad = QuadratureSpec(quad.half_width, quad.points, quad.fock_dim, 1e-12)
    phi = state.vector(state_dim(state, quad))
    rec = tomography.reconstruct_j(phi, grid, args.chi, workers=args.workers)
    rec.state = state.to_dict()
    ref = qdf.grid_eval("j_trace", fock.density_from_pure(phi), grid, quad, workers=args.workers)
    dev = float(np.max(np.abs(rec.values - ref.values))) if not ref.failed else float("nan")
    out = Path(args.out)
    outputs = [str(out)]
    if args.raw_polarizations:
        sx, sy = tomography.polarization_sweep(phi, grid, args.chi, tomography.reconstruction_time(args.chi), args.workers)
        for f, suffix in ((sx, "_sx"), (sy, "_sy")):
            path = out.with_name(out.stem + suffix + out.suffix)
            f.state = state.to_dict()
            write_field(f, path)
            outputs.append(str(path))
    rec.meta["max_dev_vs_trace"] = dev
    args_record = _replay_args(args, ("state", "grid", "chi", "quad", "fock_dim", "raw_polarizations"))
    args_record["quad"] = _quad_text(quad)
    write_field(rec, out, extra={"manifest": _manifest("reconstruct", args_record, outputs, started, {"quadrature_check": asdict(quad)})})
    print(f"wrote {', '.join(outputs)}")
    print(f"max |J_rec - J_trace| = {dev:.3e}")
    return EXIT_NUMERIC if ref.failed or not np.all(np.isfinite(rec.values)) else EXIT_OK


# ---------------------------------------------------------------------------
# frft


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_frft(args) -> int:
    started = time.perf_counter()
    src = Path(args.input)
    try:
        signal = frft.read_signal(src)
    except OSError as exc:
        raise ParameterError(f"cannot read {src}: {exc.strerror}") from exc
    out_sig = frft.apply(signal, args.omega)
    out = Path(args.out)
    frft.write_signal(out_sig, out)
    args_record = {"omega": args.omega, "input": str(src), "input_sha256": _sha256(src)}
    manifest = _manifest("frft", args_record, [str(out)], started)
    _atomic_write(out.with_suffix(".json"), json.dumps({"manifest": manifest}, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} ({signal.grid.count} samples, omega={args.omega:g})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# replay


def _quad_text(quad: QuadratureSpec) -> str:
    return f"{quad.half_width!r},{quad.points},{quad.fock_dim},{quad.tail_tol!r}"


def _replay_args(args, names) -> dict:
    return {k: getattr(args, k, None) for k in names}


def cmd_replay(args) -> int:
    path = Path(args.manifest)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read manifest {path}") from exc
    m = doc.get("manifest")
    if not m or "command" not in m:
        raise ParameterError(f"{path} has no run manifest")
    rec = dict(m["args"])
    command = m["command"]
    out = args.out or m["outputs"][0]
    ns = argparse.Namespace(workers=args.workers, out=out, **rec)
    if command == "compute":
        return cmd_compute(ns)
    if command == "reconstruct":
        return cmd_reconstruct(ns)
    if command == "frft":
        src = Path(rec["input"])
        if _sha256(src) != rec["input_sha256"]:
            raise ParameterError(f"input {src} changed since the manifest was written")
        return cmd_frft(argparse.Namespace(omega=rec["omega"], input=str(src), out=out))
    raise ParameterError(f"cannot replay command {command!r}")


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--quad", help="quadrature L,M,N,eps (half-width, points per axis, Fock levels, tail tolerance)")
    p.add_argument("--fock-dim", type=int, default=None, help=f"Fock truncation; overrides ${ENV_DIM}")
    p.add_argument("--workers", type=int, default=1, help="threads for grid evaluation (output does not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdf", description="Complex phase-space distributions and their reconstruction.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="evaluate a distribution on a grid")
    p.add_argument("--dist", required=True, choices=sorted(_METHODS))
    p.add_argument("--method", choices=sorted({m for d in _METHODS.values() for m in d}))
    p.add_argument("--state", required=True, help='JSON, e.g. {"kind":"cat","alpha1":[2.83,0],"alpha2":[-2.83,0],"sign":"+"}')
    p.add_argument("--grid", required=True, help="qmin,qmax,nq,pmin,pmax,np")
    p.add_argument("--out", required=True)
    p.add_argument("--s", type=float, help="ordering parameter for --dist sparam")
    p.add_argument("--cota", type=float)
    p.add_argument("--cotb", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="run a self-check suite")
    p.add_argument("--suite", required=True, choices=sorted(_SUITES))
    p.add_argument("--state")
    p.add_argument("--tol", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reconstruct", help="simulate the dispersive protocol and rebuild J")
    p.add_argument("--state", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.add_argument("--raw-polarizations", action="store_true", help="also write the <sigma_x>, <sigma_y> maps")
    _add_common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("frft", help="fractional Fourier transform of a sampled signal")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_frft)

    p = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write here instead of the recorded output path")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_replay)
    return parser


def _normalize_argv(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(_normalize_argv(argv))
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (TruncationError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
