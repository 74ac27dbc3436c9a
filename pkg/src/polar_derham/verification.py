"""Verification suites for an assembled polar complex.

Aggregates every testable identity of the construction into a
deterministic, schema-versioned report: dimension formulas, DTA
compatibility, the complex property, the seven commutation identities,
cohomology dimensions with rank diagnostics, divergence surjectivity,
partition of unity and the polar-curve regularity probes.
"""

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .bsplines import is_dta_compatible
from .incidence import divergence_preimage, max_abs
from .torus import PolarComplex

__all__ = [
    "Tolerances",
    "VerificationReport",
    "run_verification",
    "inject_row_drop",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Tolerances:
    """Pass/fail thresholds of the verification suites."""

    residual: float = 1e-12          # complex property, commutation, PoU, probes
    probe_floor: float = 1e-10       # noise floor of the C1 probe decrease
    preimage: float = 1e-12          # relative divergence-preimage residual
    gap_ratio_min: float = 1e6       # SVD gap required at each rank decision
    dta: float = 1e-12
    negative_control_min: float = 1e-4


def _nonzero_row_rank_ok(matrix, tol=1e-12):
    dense = matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix, float)
    nz = dense[np.abs(dense).sum(axis=1) > tol]
    return int(np.linalg.matrix_rank(nz)), nz.shape[0]


def inject_row_drop(cx, name, row):
    """Zero the 1-based `row` of a named D- or E-matrix (fault injection).

    Returns a patched copy of the complex; a verifier that cannot fail is
    untrustworthy, so this plus the center-block perturbation provide the
    negative controls.
    """
    incidence_names = {"D0", "D1", "D2"}
    extraction_names = set(cx.extraction.names())
    if name not in incidence_names | extraction_names:
        raise ValueError(
            f"unknown matrix {name!r} for --drop-row; choose one of "
            f"{sorted(incidence_names | extraction_names)}"
        )
    target = (cx.incidence if name in incidence_names else cx.extraction)
    matrix = getattr(target, name)
    if not 1 <= row <= matrix.shape[0]:
        raise ValueError(f"row {row} out of range 1..{matrix.shape[0]} for {name}")
    patched = matrix.tolil(copy=True)
    patched[row - 1, :] = 0.0
    patched = patched.tocsr()
    patched.eliminate_zeros()
    incidence, extraction = cx.incidence, cx.extraction
    if name in incidence_names:
        incidence = dataclasses.replace(incidence, **{name: patched})
    else:
        extraction = dataclasses.replace(extraction, **{name: patched})
    return PolarComplex(
        cx.spec, cx.tensor, extraction, incidence, cx.polar_map, cx.geometry_map
    )


@dataclass
class VerificationReport:
    schema_version: int
    config: dict
    dims: dict
    suites: dict
    timings: dict
    passed: bool
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "dims": self.dims,
            "suites": self.suites,
            "timings": self.timings,
            "passed": self.passed,
            "failures": self.failures,
        }


def _timed(timings, name, fn):
    start = time.perf_counter()
    result = fn()
    timings[name] = time.perf_counter() - start
    return result


def run_verification(cx, tolerances=None, rank_tol=None, seed=20240,
                     num_points=200, eps_list=(1e-2, 1e-3, 1e-4),
                     probe_t=0.33, config_echo=None):
    """Run every suite on a built complex and collect a report.

    Deterministic for a fixed seed; timings are the only run-to-run
    variation in the output.
    """
    tol = tolerances or Tolerances()
    rng = np.random.default_rng(seed)
    c = cx.counts
    suites = {}
    timings = {}
    failures = []

    def gate(suite, ok, message):
        if not ok:
            failures.append(f"{suite}: {message}")
        return bool(ok)

    # ----- dimension formulas ------------------------------------------------
    def dims_suite():
        nr, ns, nt = c.nr, c.ns, c.nt
        nbar0 = nr * (ns - 2) + 3
        expected = {
            "n0": nt * nbar0,
            "n1": nt * (3 * nr * (ns - 2) + 5),
            "n2": nt * (2 * (nbar0 - 2) + nbar0 - 3),
            "n3": nt * (nbar0 - 3),
        }
        got = {"n0": c.n0, "n1": c.n1, "n2": c.n2, "n3": c.n3}
        ok = got == expected and c.alternating_sum == 0
        gate("dimensions", ok, f"count formulas: got {got}, expected {expected}, "
                               f"alternating sum {c.alternating_sum}")
        return {"pass": ok, "expected": expected, "got": got,
                "alternating_sum": c.alternating_sum}

    suites["dimensions"] = _timed(timings, "dimensions", dims_suite)

    # ----- DTA compatibility and row independence ----------------------------
    def dta_suite():
        results = {}
        ok = True
        for name, matrix in (
            ("E000", cx.extraction.E000),
            ("H0_r", cx.tensor.spaces[0].h0),
            ("H0_t", cx.tensor.spaces[2].h0),
        ):
            diag = is_dta_compatible(matrix, tol.dta)
            results[name] = {
                "ok": diag.ok,
                "rank": diag.rank,
                "min_entry": diag.min_entry,
                "max_column_sum_error": diag.max_column_sum_error,
                "max_row_support": diag.max_row_support,
                "violation": diag.violation,
            }
            ok = ok and diag.ok
        independence = {}
        for name in ("E100", "E010", "E001", "E011", "E101", "E110"):
            rank, count = _nonzero_row_rank_ok(getattr(cx.extraction, name))
            independence[name] = {"rank": rank, "nonzero_rows": count}
            ok = ok and rank == count
        gate("dta", ok, f"DTA or row-independence violation: {results} {independence}")
        return {"pass": ok, "dta": results, "nonzero_row_independence": independence}

    suites["dta"] = _timed(timings, "dta", dta_suite)

    # ----- complex property ---------------------------------------------------
    def complex_suite():
        r10 = max_abs(cx.incidence.D1 @ cx.incidence.D0)
        r21 = max_abs(cx.incidence.D2 @ cx.incidence.D1)
        ok = r10 <= tol.residual and r21 <= tol.residual
        gate("complex_property", ok, f"D1 D0 residual {r10:.3e}, D2 D1 residual {r21:.3e}")
        return {"pass": ok, "d1_d0": r10, "d2_d1": r21}

    suites["complex_property"] = _timed(timings, "complex_property", complex_suite)

    # ----- commutation ----------------------------------------------------------
    def commutation_suite():
        residuals = cx.commutation_residuals()
        worst = max(residuals.values())
        ok = worst <= tol.residual
        gate("commutation", ok, f"worst residual {worst:.3e} > {tol.residual:.0e}")
        return {"pass": ok, "residuals": residuals, "worst": worst}

    suites["commutation"] = _timed(timings, "commutation", commutation_suite)

    # ----- cohomology -----------------------------------------------------------
    def cohomology_suite():
        rep = cx.cohomology(rank_tol=rank_tol)
        expected_rank_d1 = c.nt * (c.nbar2 + c.nbar0 - 1)
        dims_ok = rep.dims == (1, 1, 0, 0)
        ranks_ok = rep.ranks[1] == expected_rank_d1 and rep.ranks[2] == c.n3
        gaps_ok = all(g >= tol.gap_ratio_min for g in rep.gap_ratios)
        m_worst = 0.0
        for _ in range(10):
            m = rng.standard_normal(c.n3)
            h = divergence_preimage(c, m)
            m_worst = max(
                m_worst,
                float(np.abs(cx.incidence.D2 @ h - m).max() / np.abs(m).max()),
            )
        preimage_ok = m_worst <= tol.preimage
        ok = dims_ok and ranks_ok and gaps_ok and preimage_ok
        gate("cohomology", ok,
             f"dims {rep.dims}, ranks {rep.ranks} (D1 expected {expected_rank_d1}, "
             f"D2 expected {c.n3}), gaps {rep.gap_ratios}, preimage {m_worst:.3e}")
        return {
            "pass": ok,
            "dims": list(rep.dims),
            "ranks": list(rep.ranks),
            "expected_rank_d1": expected_rank_d1,
            "expected_rank_d2": c.n3,
            "gap_ratios": [g if np.isfinite(g) else "inf" for g in rep.gap_ratios],
            "sv_bracket": [list(b) for b in rep.sv_bracket],
            "euler_ok": rep.euler_ok,
            "divergence_preimage_residual": m_worst,
            "warnings": rep.warnings,
        }

    suites["cohomology"] = _timed(timings, "cohomology", cohomology_suite)

    # ----- partition of unity ---------------------------------------------------
    def pou_suite():
        R, S, T = (sp.interval[1] for sp in cx.tensor.spaces)
        worst_sum = 0.0
        min_val = 0.0
        for _ in range(num_points):
            pt = (rng.uniform(0, R), rng.uniform(0, S), rng.uniform(0, T))
            vals = cx.reduced_basis_values(0, pt)
            worst_sum = max(worst_sum, abs(float(vals.sum()) - 1.0))
            min_val = min(min_val, float(vals.min()))
        ok = worst_sum <= tol.residual and min_val >= -tol.residual
        gate("partition_of_unity", ok,
             f"worst |sum-1| {worst_sum:.3e}, min value {min_val:.3e}")
        return {"pass": ok, "worst_sum_error": worst_sum, "min_value": min_val,
                "points": num_points}

    suites["partition_of_unity"] = _timed(timings, "partition_of_unity", pou_suite)

    # ----- polar-curve regularity -----------------------------------------------
    def probe_suite():
        rep = cx.basis_smoothness_probe(probe_t, eps_list)
        value_disc = float(rep.value_discrepancy.max())
        deltas = [d for _, d in rep.c1_table]
        mono = True
        for prev, nxt in zip(deltas, deltas[1:]):
            mono = mono and bool(
                np.all((nxt <= prev) | (nxt <= tol.probe_floor))
            )
        neg = cx.basis_smoothness_probe(probe_t, eps_list[:1], space="tensor")
        neg_disc = float(neg.value_discrepancy.max())
        ok = (value_disc <= tol.residual and mono
              and neg_disc > tol.negative_control_min)
        gate("smoothness_probe", ok,
             f"value discrepancy {value_disc:.3e}, monotone {mono}, "
             f"negative control {neg_disc:.3e}")
        return {
            "pass": ok,
            "value_discrepancy": value_disc,
            "c1_max_by_eps": {f"{eps:g}": float(d.max()) for eps, d in rep.c1_table},
            "c1_monotone": mono,
            "negative_control_discrepancy": neg_disc,
        }

    suites["smoothness_probe"] = _timed(timings, "smoothness_probe", probe_suite)

    passed = all(s["pass"] for s in suites.values())
    return VerificationReport(
        schema_version=SCHEMA_VERSION,
        config=config_echo if config_echo is not None else cx.dims_record(),
        dims=cx.dims_record(),
        suites=suites,
        timings=timings,
        passed=passed,
        failures=failures,
    )
