"""The ten acceptance criteria at their stated tolerances.

Each test records one PASS/FAIL line (shown in the pytest terminal summary)
and then asserts every sub-check.  Run this file directly to print the lines
without pytest.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pytest
from scipy import linalg

sys.path.insert(0, str(Path(__file__).parent))

from oracles import (  # noqa: E402
    identity_suite,
    loglog_slope,
    quadrature_mass,
    quadrature_stiffness,
    random_interior_points,
    random_tetrahedron,
)
from tetspectral.assembly import (  # noqa: E402
    MASS_BLOCK_OFFSETS,
    STIFFNESS_BLOCK_OFFSETS,
    assemble_mass_const,
    assemble_mass_variable,
    assemble_stiffness,
    band_violations,
)
from tetspectral.geometry import Tetrahedron  # noqa: E402
from tetspectral.koornwinder import DUBINER, MINUS_ONE, all_indices, dimension, tabulate  # noqa: E402
from tetspectral.modes import enumerate_modes, interior_modes  # noqa: E402
from tetspectral.problems import get_example  # noqa: E402
from tetspectral.recurrence import (  # noqa: E402
    OpCounter,
    build_generalized_inverse,
    build_recurrence,
    clenshaw_eval,
)
from tetspectral.reference import exact_TF_spectrum, gap_stats, reliable_fraction  # noqa: E402
from tetspectral.solvers import TimeGrid, crank_nicolson, error_norms, solve_eigen, solve_source  # noqa: E402

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # running as a script
    ACCEPTANCE_LINES = {}

# Errors below this level are round-off, not discretization error (unit-scale data).
ROUNDOFF_FLOOR = 1e-11


@dataclass
class Report:
    number: int
    title: str
    checks: list[tuple[str, bool, str]] = field(default_factory=list)
    start: float = field(default_factory=time.perf_counter)

    def check(self, name: str, passed: bool, detail: str) -> None:
        self.checks.append((name, bool(passed), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def finish(self) -> str:
        elapsed = time.perf_counter() - self.start
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{name} {'ok' if ok else 'FAILED'} ({detail})" for name, ok, detail in self.checks]
        line = f"criterion {self.number:2d} {status}: {self.title} [{elapsed:.1f}s] " + "; ".join(parts)
        ACCEPTANCE_LINES[self.number] = line
        print(line)
        return line

    def assert_all(self) -> None:
        self.finish()
        failed = [f"{name}: {detail}" for name, ok, detail in self.checks if not ok]
        assert not failed, "; ".join(failed)


def rel_max(A, B) -> float:
    A = A.toarray() if hasattr(A, "toarray") else A
    B = B.toarray() if hasattr(B, "toarray") else B
    return float(np.abs(A - B).max() / np.abs(B).max())


def decay_checks(errors: dict[int, float], start: int, ratio_from: int) -> tuple[bool, bool]:
    """Monotone decay from ``start`` and ratio < 0.5 from ``ratio_from``, above the round-off floor."""
    Ms = sorted(errors)
    monotone = all(
        errors[b] <= errors[a] or errors[b] <= ROUNDOFF_FLOOR for a, b in zip(Ms, Ms[1:]) if a >= start
    )
    fast = all(
        errors[b] < 0.5 * errors[a] or errors[b] <= ROUNDOFF_FLOOR for a, b in zip(Ms, Ms[1:]) if a >= ratio_from
    )
    return monotone, fast


def criterion_1() -> Report:
    r = Report(1, "expansion identities at random interior points, |l| <= 6, both families")
    worst = identity_suite(random_interior_points(np.random.default_rng(1), 60), M=6)
    for key in ("jacobi", "promotion", "three_term", "derivative"):
        r.check(key, worst[key] <= 1e-11, f"rel {worst[key]:.1e}")
    r.check("derivative_fd", worst["derivative_fd"] <= 1e-6, f"abs {worst['derivative_fd']:.1e}")
    r.check("runtime", time.perf_counter() - r.start < 60, "under 1 minute")
    return r


def criterion_2() -> Report:
    r = Report(2, "D_m A_m = I for m <= 20 and column sparsity of D_m")
    worst, heaviest = 0.0, 0
    for family in (MINUS_ONE, DUBINER):
        for m in range(21):
            A = build_recurrence(m, family).A
            D = build_generalized_inverse(m, family)
            worst = max(worst, float(np.abs((D @ A).toarray() - np.eye(A.shape[1])).max()))
            heaviest = max(heaviest, int(np.diff(D.tocsc().indptr).max()))
    r.check("left_inverse", worst <= 1e-12, f"max {worst:.1e}")
    r.check("column_nnz", heaviest <= 2, f"max nonzeros per column {heaviest}")
    return r


def criterion_3() -> Report:
    r = Report(3, "Clenshaw against naive summation and cubic operation count")
    rng = np.random.default_rng(3)
    points = random_interior_points(rng, 30)
    worst = 0.0
    for family in (MINUS_ONE, DUBINER):
        for M in range(1, 16):
            coeffs = rng.normal(size=dimension(M))
            naive = coeffs @ tabulate(all_indices(M), family, points)
            worst = max(worst, float(np.abs(clenshaw_eval(coeffs, family, points) - naive).max() / np.abs(naive).max()))
    r.check("naive", worst <= 1e-10, f"rel {worst:.1e}")
    counts = []
    for M in (8, 16, 32):
        counter = OpCounter()
        clenshaw_eval(np.ones(dimension(M)), DUBINER, points[:1], counter)
        counts.append(counter.count)
    slope = loglog_slope([8, 16, 32], counts)
    r.check("exponent", abs(slope - 3.0) <= 0.2, f"{slope:.3f} from counts {counts}")
    return r


def criterion_4() -> Report:
    r = Report(4, "exact assembly against quadrature, variable-coefficient recursion and its cost")
    rng = np.random.default_rng(4)
    tets = {"regular": Tetrahedron.preset("regular"), "random": Tetrahedron(random_tetrahedron(rng))}
    worst_s = worst_m = 0.0
    modes = enumerate_modes(6)
    for tet in tets.values():
        worst_s = max(worst_s, rel_max(assemble_stiffness(tet, 6, modes), quadrature_stiffness(tet, 6, modes)))
        worst_m = max(worst_m, rel_max(assemble_mass_const(tet, 6, 1.0, modes), quadrature_mass(tet, 6, modes)))
    r.check("stiffness", worst_s <= 1e-11, f"rel {worst_s:.1e}")
    r.check("mass", worst_m <= 1e-11, f"rel {worst_m:.1e}")

    def gamma(x):
        return np.exp(x.sum(axis=1) + 1)

    tet = tets["random"]
    oracle = quadrature_mass(tet, 8, interior_modes(8), gamma=gamma, Q=16)
    err_var = rel_max(assemble_mass_variable(tet, 8, gamma), oracle)
    r.check("variable_vs_quadrature", err_var <= 1e-8, f"rel {err_var:.1e}")
    err_const = rel_max(
        assemble_mass_variable(tet, 12, lambda x: np.full(len(x), 2.0)), assemble_mass_const(tet, 12, 2.0)
    )
    r.check("variable_vs_constant", err_const <= 1e-9, f"rel {err_const:.1e}")
    degrees, counts = (8, 12, 16, 20), []
    for M in degrees:
        counter = OpCounter()
        assemble_mass_variable(tet, M, gamma, counter=counter)
        counts.append(counter.count)
    slope = loglog_slope(degrees, counts)
    r.check("cost_exponent", abs(slope - 6.0) <= 0.5, f"{slope:.2f} over M={list(degrees)}")
    return r


def criterion_5() -> Report:
    r = Report(5, "sparsity pattern of S and M at M = 22")
    M = 22
    rng = np.random.default_rng(5)
    tets = [Tetrahedron.preset(n) for n in ("reference", "fundamental", "regular")]
    tets.append(Tetrahedron(random_tetrahedron(rng)))
    bad_s = sum(band_violations(assemble_stiffness(t, M), M, STIFFNESS_BLOCK_OFFSETS) for t in tets)
    bad_m = sum(band_violations(assemble_mass_const(t, M), M, MASS_BLOCK_OFFSETS) for t in tets)
    r.check("stiffness_penta_hepta", bad_s == 0, f"{bad_s} entries outside")
    r.check("mass_tri_hepta", bad_m == 0, f"{bad_m} entries outside")
    r.check("runtime", time.perf_counter() - r.start < 60, "under 1 minute")
    return r


def criterion_6() -> Report:
    r = Report(6, "exponential convergence of Examples 1-3 on the reference tetrahedron")
    tet = Tetrahedron.preset("reference")
    degrees = range(8, 23, 2)
    for name in ("example1", "example2", "example3"):
        problem = get_example(name)
        errs = {"max": {}, "l2": {}}
        for M in degrees:
            result = solve_source(tet, M, problem.source, problem.gamma, problem.boundary)
            errs["max"][M], errs["l2"][M] = error_norms(result, problem.exact)
        for kind, e in errs.items():
            monotone, fast = decay_checks(e, start=8, ratio_from=12)
            r.check(f"{name}_{kind}", monotone and fast and e[22] <= 1e-8,
                    f"M=8 {e[8]:.1e}, M=12 {e[12]:.1e}, M=22 {e[22]:.1e}")
    return r


def criterion_7() -> Report:
    r = Report(7, "heat equation: spatial decay at t = 1/2 and 1 with dt = 2^-10, temporal order")
    tet = Tetrahedron.preset("reference")
    problem = get_example("example4")

    def u0(x):
        return problem.exact(x, 0.0)

    grid = TimeGrid.up_to(2.0**-10, 1.0)
    errs = {0.5: {}, 1.0: {}}
    for M in range(4, 15, 2):
        traj = crank_nicolson(tet, M, problem.source, u0, grid)
        for t in errs:
            errs[t][M] = error_norms(traj.at_time(t), lambda x, t=t: problem.exact(x, t))[0]
    for t, e in errs.items():
        _, fast = decay_checks(e, start=4, ratio_from=4)
        r.check(f"spatial_t{t:g}", fast and min(e.values()) <= 1e-6,
                f"M=4 {e[4]:.1e}, M=14 {e[14]:.1e}")
    steps = [2.0**-n for n in range(4, 10)]
    l2 = []
    for dt in steps:
        traj = crank_nicolson(tet, 14, problem.source, u0, TimeGrid.up_to(dt, 1.0))
        l2.append(error_norms(traj.at_time(1.0), lambda x: problem.exact(x, 1.0))[1])
    slope = loglog_slope(steps, l2)
    r.check("temporal_slope", abs(slope - 2.0) <= 0.1, f"{slope:.3f}")
    return r


def criterion_8() -> Report:
    r = Report(8, "Dirichlet eigenvalues on the fundamental tetrahedron")
    tet = Tetrahedron.preset("fundamental")
    exact = exact_TF_spectrum(5000)
    first = solve_eigen(tet, 24, count=5).values
    err = float(np.abs(first - exact[:5]).max() / exact[0])
    r.check("first_five_M24", np.all(np.abs(first - exact[:5]) / exact[:5] <= 1e-8), f"rel {err:.1e}")
    degrees = (8, 12, 16, 20, 24)
    largest = []
    for M in degrees:
        S = assemble_stiffness(tet, M).toarray()
        B = assemble_mass_const(tet, M).toarray()
        largest.append(float(linalg.eigh(S, B, eigvals_only=True)[-1]))
    slope = loglog_slope(degrees, largest)
    r.check("largest_growth", abs(slope - 4.0) <= 0.4, f"{slope:.2f} over M={list(degrees)}")
    values = solve_eigen(tet, 32).values
    fraction = reliable_fraction(values, exact, 1.0 / 32)
    r.check("reliable_fraction_M32", 0.15 <= fraction <= 0.25, f"{fraction:.3f} with threshold 1/M")
    return r


def criterion_9() -> Report:
    r = Report(9, "condition number growth of S")
    degrees = (8, 12, 16, 20, 24)
    for name in ("reference", "fundamental", "regular"):
        tet = Tetrahedron.preset(name)
        conds = []
        for M in degrees:
            ev = linalg.eigvalsh(assemble_stiffness(tet, M).toarray())
            conds.append(ev[-1] / ev[0])
        slope = loglog_slope(degrees, conds)
        r.check(name, 3.5 <= slope <= 4.5, f"slope {slope:.2f}")
    return r


def criterion_10() -> Report:
    r = Report(10, "gap statistics of the exact spectrum (3000 values)")
    tet = Tetrahedron.preset("fundamental")
    stats = gap_stats(exact_TF_spectrum(3000), tet.volume)
    k = np.arange(1, 3000)
    slope = loglog_slope(k, stats.average_gaps)
    r.check("delta_ave_slope", abs(slope + 1 / 3) <= 0.05, f"{slope:.4f}")
    fraction = stats.fraction_below(0.25)
    r.check("small_gaps", fraction >= 0.5, f"{fraction:.3f} below 0.25")
    r.check("runtime", time.perf_counter() - r.start < 30, "seconds")
    return r


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_acceptance(criterion):
    criterion().assert_all()


if __name__ == "__main__":
    reports = [criterion() for criterion in CRITERIA]
    for report in reports:
        report.finish()
    sys.exit(0 if all(report.passed for report in reports) else 1)
