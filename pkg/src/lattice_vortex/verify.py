"""Randomized verification suites behind the `verify` CLI command.

Each suite builds its own instances from a seeded generator, so a run is
reproducible given (seed, sizes). Suites return a result record instead
of raising, and support deliberate fault injection where noted, so the
checks themselves can be shown to catch defects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import calculus, oracle
from .calculus import LatticeField, from_interior, green_identity_defect, laplacian
from .chern_simons import ModelParams, VortexConfig, max_principle_check, solve_domain
from .lattice import make_box
from .linsolve import interior_laplacian

__all__ = ["SuiteResult", "run_suites", "SUITE_NAMES"]

SUITE_NAMES = ("maximum_principle", "green_identity", "gns_ratio", "oracle_equivalence")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str


def random_interior_field(rng, domain, scale=1.0) -> LatticeField:
    return from_interior(domain, rng.uniform(-scale, scale, size=domain.n_interior))


def random_closure_field(rng, domain, scale=1.0) -> LatticeField:
    return LatticeField(domain, rng.uniform(-scale, scale, size=domain.n_closure))


def random_max_principle_instance(rng, domain):
    """Random (f, g) satisfying the comparison-principle hypotheses.

    g is a positive closure field; the damped-operator slack on the
    interior and the boundary data of f are drawn non-negative and
    non-positive respectively, and f is recovered by a direct solve.
    """
    n_int = domain.n_interior
    g_vals = rng.uniform(0.1, 4.0, size=domain.n_closure)
    slack = rng.uniform(0.0, 1.0, size=n_int)
    b_vals = -rng.uniform(0.0, 1.0, size=domain.n_closure - n_int)
    full_b = np.zeros(domain.n_closure)
    full_b[n_int:] = b_vals
    coupling = full_b[domain.interior_neighbors].sum(axis=1)
    matrix = sp.diags(g_vals[:n_int]) - interior_laplacian(domain)
    f_int = spla.spsolve(matrix.tocsc(), coupling - slack)
    f_vals = np.concatenate([f_int, b_vals])
    return LatticeField(domain, f_vals), LatticeField(domain, g_vals), slack


def max_principle_suite(rng, sizes, instances=100) -> SuiteResult:
    """Solve hypothesis-satisfying instances and assert non-positivity.

    Also injects hypothesis violations (a positive bump exceeding the
    damped-operator slack) and requires the checker to reject them.
    """
    domains = [make_box(2, hw) for hw in sizes] + [make_box(3, 2)]
    failures = []
    for i in range(instances):
        domain = domains[i % len(domains)]
        f, g, slack = random_max_principle_instance(rng, domain)
        if not max_principle_check(f, g):
            failures.append(f"instance {i}: positive value escaped")
    detected = 0
    probes = 5
    for i in range(probes):
        domain = domains[i % len(domains)]
        f, g, slack = random_max_principle_instance(rng, domain)
        corrupt = f.copy()
        corrupt.values[rng.integers(0, domain.n_interior)] += float(slack.max()) + 2.0
        try:
            max_principle_check(corrupt, g)
        except ValueError:
            detected += 1
    if detected != probes:
        failures.append(f"only {detected}/{probes} injected violations detected")
    detail = f"{instances} instances, {probes} fault probes"
    return SuiteResult("maximum_principle", not failures, "; ".join(failures) or detail)


def green_identity_suite(rng, sizes, pairs=100, laplacian_fn=laplacian) -> SuiteResult:
    """Summation-by-parts defect below 1e-10 on random pairs per domain."""
    domains = [make_box(2, hw) for hw in sizes] + [make_box(3, 2)]
    worst = 0.0
    failures = []
    for domain in domains:
        for _ in range(pairs):
            u = random_closure_field(rng, domain)
            v = random_interior_field(rng, domain)
            defect = green_identity_defect(u, v, laplacian_fn=laplacian_fn)
            worst = max(worst, defect)
            if defect >= 1e-10:
                failures.append(f"defect {defect:.3e} on {domain!r}")
                break
    detail = f"{pairs} pairs x {len(domains)} domains, worst defect {worst:.3e}"
    return SuiteResult("green_identity", not failures, "; ".join(failures) or detail)


def gns_ratio_suite(rng, fields=1000) -> SuiteResult:
    """Interpolation-ratio boundedness over random zero-extended fields."""
    combos = [(n, p) for n in (2, 3) for p in (0, 1, 2)]
    maxima = []
    failures = []
    for n, p in combos:
        domain = make_box(n, 4 if n == 2 else 2)
        worst = 0.0
        for _ in range(fields):
            u = random_interior_field(rng, domain, scale=rng.uniform(0.1, 10.0))
            ratio = calculus.gns_ratio(u, p)
            if not np.isfinite(ratio) or ratio <= 0.0:
                failures.append(f"degenerate ratio {ratio} at n={n}, p={p}")
                break
            worst = max(worst, ratio)
        maxima.append(f"n={n},p={p}: {worst:.4f}")
    detail = f"{fields} fields per combo; max ratios " + ", ".join(maxima)
    return SuiteResult("gns_ratio", not failures, "; ".join(failures) or detail)


def oracle_equivalence_suite(rng, instances=3) -> SuiteResult:
    """Monotone scheme vs damped Newton on small random instances."""
    failures = []
    worst = 0.0
    for i in range(instances):
        n = 2 if i % 2 == 0 else 3
        hw = 3 if n == 2 else 1
        domain = make_box(n, hw)
        point = tuple(int(rng.integers(-(hw - 1), hw)) for _ in range(n)) if hw > 1 else tuple(
            0 for _ in range(n)
        )
        vortices = VortexConfig(((point, int(rng.integers(1, 3))),))
        params = ModelParams(
            lam=float(rng.uniform(0.5, 2.0)),
            p=int(rng.integers(0, 2)),
            tol_nonlinear=1e-12,
            tol_residual=1e-10,
        )
        u_scheme, _ = solve_domain(domain, vortices, params)
        u_newton = oracle.newton_solve(domain, vortices, params)
        diff = float(np.abs(u_scheme.values - u_newton.values).max())
        worst = max(worst, diff)
        if diff >= 1e-7:
            failures.append(f"instance {i}: disagreement {diff:.3e}")
    detail = f"{instances} instances, worst disagreement {worst:.3e}"
    return SuiteResult("oracle_equivalence", not failures, "; ".join(failures) or detail)


def run_suites(seed: int, sizes, inject_fault: str | None = None) -> list[SuiteResult]:
    """Run all suites with one seeded generator; `inject_fault` corrupts a
    named suite's inputs to demonstrate the check trips."""
    rng = np.random.default_rng(seed)
    results = [max_principle_suite(rng, sizes)]
    if inject_fault == "green_identity":
        # A corrupted operator must make the defect check fail.
        def broken(u, x):
            return laplacian(u, x) + 1e-6

        results.append(green_identity_suite(rng, sizes, laplacian_fn=broken))
    else:
        results.append(green_identity_suite(rng, sizes))
    results.append(gns_ratio_suite(rng))
    results.append(oracle_equivalence_suite(rng))
    return results
