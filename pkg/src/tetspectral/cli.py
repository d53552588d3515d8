"""Command-line driver for the convergence, eigenvalue, condition, sparsity and gap studies."""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import metadata
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy
import scipy.io
import scipy.linalg
from threadpoolctl import threadpool_limits

from .assembly import (
    MASS_BLOCK_OFFSETS,
    STIFFNESS_BLOCK_OFFSETS,
    assemble_mass_const,
    assemble_stiffness,
    band_violations,
)
from .geometry import PRESETS, Tetrahedron
from .problems import HeatProblem, get_example
from .reference import exact_TF_spectrum, gap_stats, reliable_fraction, weyl_prediction
from .solvers import TimeGrid, crank_nicolson, error_norms, solve_eigen, solve_source

LARGE_DEGREE = 40
Row = tuple[float, str, float]


class UsageError(ValueError):
    """Invalid combination of options."""


def parse_degrees(text: str) -> list[int]:
    """Parse "8,12,16" or "4:24:2" (inclusive stop) into a degree list."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise UsageError(f"bad degree range {text!r}")
        start, stop, step = parts[0], parts[1], parts[2] if len(parts) == 3 else 1
        degrees = list(range(start, stop + 1, step))
    else:
        degrees = [int(p) for p in text.split(",") if p]
    if not degrees:
        raise UsageError("empty degree list")
    return degrees


def resolve_geometry(preset: str | None, vertices: Sequence[float] | None) -> tuple[str, Tetrahedron]:
    if vertices is not None:
        if len(vertices) != 12:
            raise UsageError("--vertices needs 12 numbers")
        return "custom", Tetrahedron(np.reshape(np.asarray(vertices, dtype=float), (4, 3)))
    name = preset or "reference"
    return name, Tetrahedron.preset(name)


def check_degrees(degrees: Iterable[int], minimum: int, large: bool) -> None:
    for M in degrees:
        if M < minimum:
            raise UsageError(f"degree {M} is below the minimum {minimum}")
        if M > LARGE_DEGREE and not large:
            raise UsageError(f"degree {M} exceeds {LARGE_DEGREE}; pass --large to allow it")


def _sweep(fn: Callable[[int], list[Row]], degrees: Sequence[int], threads: int) -> list[Row]:
    """Run one task per degree; BLAS stays single-threaded so results do not depend on ``threads``."""
    with threadpool_limits(limits=1):
        if threads <= 1:
            chunks = [fn(M) for M in degrees]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunks = list(pool.map(fn, degrees))
    return [row for chunk in chunks for row in chunk]


def _slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# -------------------------------------------------------------------- studies


def run_convergence(args, tet: Tetrahedron) -> tuple[list[Row], dict]:
    problem = get_example(args.example)
    if isinstance(problem, HeatProblem):
        grid = TimeGrid.up_to(args.dt, args.tfinal)
        check_times = [t for t in (0.5, 1.0) if t <= grid.final_time + 1e-12]

        def one(M: int) -> list[Row]:
            traj = crank_nicolson(tet, M, problem.source, lambda x: problem.exact(x, 0.0), grid)
            rows = []
            for t in check_times:
                e_max, e_l2 = error_norms(traj.at_time(t), lambda x, t=t: problem.exact(x, t))
                rows += [(M, f"max_error_t{t:g}", e_max), (M, f"l2_error_t{t:g}", e_l2)]
            return rows

        return _sweep(one, args.degrees, args.threads), {"dt": args.dt, "tfinal": args.tfinal}

    def one(M: int) -> list[Row]:
        result = solve_source(tet, M, problem.source, problem.gamma, problem.boundary)
        e_max, e_l2 = error_norms(result, problem.exact)
        return [(M, "max_error", e_max), (M, "l2_error", e_l2)]

    return _sweep(one, args.degrees, args.threads), {}


def run_eigen_study(args, tet: Tetrahedron, geometry: str) -> tuple[list[Row], dict]:
    degrees = sorted(args.degrees)
    spectra = {M: solve_eigen(tet, M).values for M in degrees}
    if geometry == "fundamental":
        reference = exact_TF_spectrum(max(v.size for v in spectra.values()))
        source = "exact"
    else:
        reference = spectra[degrees[-1]]
        source = f"M={degrees[-1]}"
    rows: list[Row] = []
    for M, values in spectra.items():
        n = min(5, values.size)
        errors = np.abs(values[:n] - reference[:n]) / reference[:n]
        rows += [(M, f"rel_error_mu{i + 1}", float(e)) for i, e in enumerate(errors)]
        rows.append((M, "mu_max", float(values[-1])))
        if source == "exact" or M < degrees[-1]:
            rows.append((M, "reliable_fraction", reliable_fraction(values, reference, args.reliable_c / M)))
    top = spectra[degrees[-1]]
    k = np.arange(1, top.size + 1)
    weyl = weyl_prediction(k, tet.volume, tet.surface_area)
    rows += [(int(i), "mu_k", float(v)) for i, v in zip(k, top)]
    rows += [(int(i), "weyl", float(v)) for i, v in zip(k, weyl)]
    summary = {"reference": source, "reliable_c": args.reliable_c}
    if len(degrees) > 1:
        summary["mu_max_slope"] = _slope(degrees, [spectra[M][-1] for M in degrees])
    return rows, summary


def _cond(A: np.ndarray) -> float:
    ev = scipy.linalg.eigvalsh(A)
    return float(ev[-1] / ev[0])


def _diag_scaled(A: np.ndarray) -> np.ndarray:
    d = 1 / np.sqrt(np.diag(A))
    return A * d[:, None] * d[None, :]


def run_condition_study(args, tet: Tetrahedron) -> tuple[list[Row], dict]:
    def one(M: int) -> list[Row]:
        S = assemble_stiffness(tet, M).toarray()
        B = assemble_mass_const(tet, M).toarray()
        rows = []
        for name, A in (("S", S), ("M", B), ("S+M", S + B)):
            rows.append((M, f"cond_{name}", _cond(A)))
            rows.append((M, f"cond_{name}_diag_precond", _cond(_diag_scaled(A))))
        return rows

    rows = _sweep(one, args.degrees, args.threads)
    summary = {}
    if len(args.degrees) > 1:
        for metric in ("cond_S", "cond_S_diag_precond", "cond_S+M"):
            values = [v for _, m, v in rows if m == metric]
            summary[f"{metric}_slope"] = _slope(args.degrees, values)
    return rows, summary


def run_sparsity_export(args, tet: Tetrahedron, out: Path) -> tuple[list[Row], dict]:
    rows: list[Row] = []
    files = []
    for M in args.degrees:
        S = assemble_stiffness(tet, M)
        B = assemble_mass_const(tet, M)
        for name, A, offsets in (("S", S, STIFFNESS_BLOCK_OFFSETS), ("M", B, MASS_BLOCK_OFFSETS)):
            path = out / f"{name}_M{M}.mtx"
            scipy.io.mmwrite(str(path), A, symmetry="symmetric", precision=17)
            files.append(path.name)
            rows += [
                (M, f"nnz_{name}", float(A.nnz)),
                (M, f"band_violations_{name}", float(band_violations(A, M, offsets))),
            ]
    return rows, {"files": files}


def run_gaps(args, tet: Tetrahedron, geometry: str) -> tuple[list[Row], dict]:
    if args.degrees and geometry != "fundamental":
        values = solve_eigen(tet, max(args.degrees)).values[: args.count]
        source = f"numerical M={max(args.degrees)}"
    else:
        if geometry != "fundamental":
            raise UsageError("exact spectra exist only for the fundamental tetrahedron; pass --degrees")
        values = exact_TF_spectrum(args.count)
        source = "exact"
    stats = gap_stats(values, tet.volume)
    k = np.arange(1, values.size)
    rows: list[Row] = [(int(i), "delta_ave", float(v)) for i, v in zip(k, stats.average_gaps)]
    rows += [(int(i), "delta_norm", float(v)) for i, v in zip(k, stats.normalized_gaps)]
    centers = (stats.bin_edges[:-1] + stats.bin_edges[1:]) / 2
    rows += [(float(c), "level_spacing_density", float(h)) for c, h in zip(centers, stats.histogram)]
    summary = {
        "spectrum": source,
        "delta_ave_slope": _slope(k, stats.average_gaps),
        "fraction_normalized_gaps_below_0.25": stats.fraction_below(0.25),
    }
    return rows, summary


# ---------------------------------------------------------------------- main


class _Parser(argparse.ArgumentParser):
    """Argument errors become UsageError so they get the JSON error record."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tetspectral", description=__doc__)
    common = _Parser(add_help=False)
    geometry = common.add_mutually_exclusive_group()
    geometry.add_argument("--preset", choices=sorted(PRESETS))
    geometry.add_argument("--vertices", type=float, nargs=12, metavar="X")
    common.add_argument("--degrees", type=parse_degrees, default=None, help='e.g. "8,12,16" or "4:24:2"')
    common.add_argument("--out", type=Path, default=Path("results"))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--large", action="store_true", help=f"allow degrees above {LARGE_DEGREE}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convergence", parents=[common], help="error curves for the manufactured examples")
    p.add_argument("--example", default="example1", choices=["example1", "example2", "example3", "example4"])
    p.add_argument("--dt", type=float, default=2.0**-10)
    p.add_argument("--tfinal", type=float, default=1.0)

    p = sub.add_parser("eigen", parents=[common], help="Dirichlet eigenvalue study")
    p.add_argument("--reliable-c", type=float, default=1.0, help="reliable means relative error <= C/M")

    sub.add_parser("condition", parents=[common], help="condition numbers of S, M and S+M")
    sub.add_parser("sparsity", parents=[common], help="Matrix Market export and band report")

    p = sub.add_parser("gaps", parents=[common], help="gap statistics of a spectrum")
    p.add_argument("--count", type=int, default=3000)
    return parser


_DEFAULT_DEGREES = {
    "convergence": [4, 6, 8, 10, 12, 14, 16, 18, 20, 22],
    "eigen": [8, 12, 16, 20, 24],
    "condition": [8, 12, 16, 20, 24],
    "sparsity": [22],
    "gaps": [],
}


def _versions() -> dict:
    out = {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}
    try:
        out["artifact"] = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pass
    return out


def _write_csv(path: Path, rows: list[Row]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "metric", "value"])
        for index, metric, value in rows:
            writer.writerow([repr(index), metric, repr(float(value))])


def run(args) -> dict:
    if args.degrees is None:
        args.degrees = _DEFAULT_DEGREES[args.command]
    minimum = 1 if args.command == "convergence" and args.example == "example2" else 4
    check_degrees(args.degrees, minimum, args.large)
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    geometry, tet = resolve_geometry(args.preset, args.vertices)
    if args.command == "convergence" and geometry != "reference":
        raise UsageError("the manufactured examples are posed on the reference tetrahedron")
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    with threadpool_limits(limits=args.threads):
        if args.command == "convergence":
            rows, summary = run_convergence(args, tet)
        elif args.command == "eigen":
            rows, summary = run_eigen_study(args, tet, geometry)
        elif args.command == "condition":
            rows, summary = run_condition_study(args, tet)
        elif args.command == "sparsity":
            rows, summary = run_sparsity_export(args, tet, out)
        else:
            rows, summary = run_gaps(args, tet, geometry)
    elapsed = time.perf_counter() - start
    _write_csv(out / f"{args.command}.csv", rows)
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
    manifest = {
        "command": args.command,
        "geometry": geometry,
        "vertices": tet.vertices.tolist(),
        "config": config,
        "versions": _versions(),
        "seconds": elapsed,
        "rows": len(rows),
        "summary": summary,
    }
    (out / f"{args.command}.json").write_text(json.dumps(manifest, indent=2, default=float))
    return manifest


def _report(exc: Exception, command: str | None, out: Path | None) -> int:
    error = {"error": type(exc).__name__, "message": str(exc), "command": command}
    print(json.dumps(error), file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(json.dumps(error, indent=2))
        except OSError:
            pass
    return 2 if isinstance(exc, UsageError) else 1


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _report(exc, None, None)
    try:
        manifest = run(args)
    except Exception as exc:  # noqa: BLE001 - every failure becomes a machine-readable record
        return _report(exc, args.command, args.out)
    print(json.dumps({"command": manifest["command"], "rows": manifest["rows"], "summary": manifest["summary"]}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
