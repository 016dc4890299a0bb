"""Global solution estimates by solving over a growing chain of domains.

Each domain in the chain is solved independently from zero; the zero
extension of every solution must sit below its predecessor pointwise,
the gap between consecutive extensions must shrink, and the outermost
values of the final solution must be small. Those three finite checks
stand in for the pointwise limit over an infinite chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import LatticeField
from .chern_simons import IterationTrace, ModelParams, VortexConfig, solve_domain
from .lattice import LatticeDomain, LatticePoint, is_nested, make_ball, make_box

__all__ = [
    "ExhaustionFailure",
    "ExhaustionSchedule",
    "GlobalSolutionEstimate",
    "vortex_centroid",
    "doubling_radii",
    "null_extend",
    "restrict_field",
    "decay_profile",
    "tail_is_monotone",
    "verify_global_negativity",
    "run_exhaustion",
    "report_dict",
]

CHAIN_SLACK = 1e-9


class ExhaustionFailure(RuntimeError):
    """Raised when the inter-domain ordering breaks between two radii."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


def vortex_centroid(vortices: VortexConfig, dimension: int) -> LatticePoint:
    """Coordinate-wise median of the vortex points, rounded to the lattice."""
    if len(vortices) == 0:
        return tuple(0 for _ in range(dimension))
    pts = np.array(vortices.points, dtype=float)
    return tuple(int(round(v)) for v in np.median(pts, axis=0))


def doubling_radii(first: int, count: int) -> tuple[int, ...]:
    """Geometric radius chain: first, 2*first, 4*first, ..."""
    if first < 1 or count < 1:
        raise ValueError("first radius and count must be positive")
    return tuple(first * 2**i for i in range(count))


@dataclass
class ExhaustionSchedule:
    """Chain description: shape, strictly increasing radii, center, charges."""

    dimension: int
    shape: str
    radii: tuple[int, ...]
    vortices: VortexConfig
    center: LatticePoint | None = None

    def __post_init__(self):
        if self.shape not in ("box", "ball"):
            raise ValueError(f"shape must be 'box' or 'ball', got {self.shape!r}")
        self.radii = tuple(int(r) for r in self.radii)
        if not self.radii:
            raise ValueError("at least one radius required")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly increasing")
        if self.center is None:
            self.center = vortex_centroid(self.vortices, self.dimension)
        else:
            self.center = tuple(int(c) for c in self.center)
        if len(self.center) != self.dimension:
            raise ValueError("center dimension mismatch")
        smallest = self.build_domain(self.radii[0])
        for pt in self.vortices.points:
            if not smallest.is_interior(pt):
                raise ValueError(f"vortex {pt} is not interior to the smallest domain")

    def build_domain(self, radius: int) -> LatticeDomain:
        maker = make_box if self.shape == "box" else make_ball
        return maker(self.dimension, radius, self.center)


@dataclass
class GlobalSolutionEstimate:
    """Everything the chain run produced, plus the three finite certificates."""

    schedule: ExhaustionSchedule
    domains: list[LatticeDomain]
    solutions: list[LatticeField]
    traces: list[IterationTrace]
    inter_domain_gaps: list[float]
    decay: list[tuple[int, float]]
    gaps_strictly_decreasing: bool
    final_gap: float
    boundary_shell_sup: float
    tol_global: float
    decay_threshold: float
    chain_violation: float = 0.0

    @property
    def finest_field(self) -> LatticeField:
        return self.solutions[-1]

    @property
    def gaps_non_increasing(self) -> bool:
        return all(b <= a for a, b in zip(self.inter_domain_gaps, self.inter_domain_gaps[1:]))

    @property
    def success(self) -> bool:
        return (
            all(t.converged for t in self.traces)
            and self.gaps_non_increasing
            and self.final_gap < self.tol_global
            and self.boundary_shell_sup < self.decay_threshold
        )


def null_extend(u: LatticeField, larger: LatticeDomain) -> LatticeField:
    """Zero extension: copy interior values of u, zero everywhere else."""
    if not is_nested(u.domain, larger):
        raise ValueError("field's domain is not nested in the target domain")
    vals = np.zeros(larger.n_closure)
    for point, value in zip(u.domain.interior, u.interior):
        vals[larger.index_of[point]] = value
    return LatticeField(larger, vals, dirichlet_zero=bool(np.all(vals[larger.n_interior :] == 0.0)))


def restrict_field(u: LatticeField, smaller: LatticeDomain) -> LatticeField:
    """Values of u at the closure points of a nested domain."""
    if not is_nested(smaller, u.domain):
        raise ValueError("target domain is not nested in the field's domain")
    vals = np.array([u.values[u.domain.index_of[p]] for p in smaller.closure])
    return LatticeField(smaller, vals)


def decay_profile(u: LatticeField, center: LatticePoint) -> list[tuple[int, float]]:
    """Per-shell sup of |u|, shells indexed by graph distance from the center."""
    center_arr = np.asarray(center, dtype=np.int64)
    dist = np.abs(u.domain.coords - center_arr).sum(axis=1)
    mags = np.abs(u.values)
    return [(int(r), float(mags[dist == r].max())) for r in np.unique(dist)]


def tail_is_monotone(
    profile: list[tuple[int, float]], *, fraction: float = 0.5, slack: float = 1e-9
) -> bool:
    """Non-increasing check over the outer `fraction` of the shells."""
    start = int(len(profile) * (1.0 - fraction))
    tail = [s for _, s in profile[start:]]
    return all(b <= a + slack for a, b in zip(tail, tail[1:]))


def verify_global_negativity(u: LatticeField) -> bool:
    """True when the field never rises above rounding level."""
    return bool(np.all(u.values <= 1e-12))


def run_exhaustion(
    schedule: ExhaustionSchedule,
    params: ModelParams,
    *,
    backend: str = "cg",
    tol_global: float = 1e-5,
    decay_threshold: float = 1e-4,
    warm_start: bool = False,
) -> GlobalSolutionEstimate:
    """Solve the chain in order and assemble the global estimate.

    Per-domain solver failures propagate unchanged. A rise of one zero-
    extended solution above its predecessor (beyond rounding slack) aborts
    with the offending radius pair, since it falsifies the ordering the
    whole construction rests on.

    `warm_start` seeds each solve with the zero extension of the previous
    solution instead of zero. It is off by default and unverified: the
    decrease guarantee is proven from the zero start only, so warm runs
    rely entirely on the per-step monotonicity checks.
    """
    domains: list[LatticeDomain] = []
    solutions: list[LatticeField] = []
    traces: list[IterationTrace] = []
    gaps: list[float] = []
    worst_rise = -np.inf
    for radius in schedule.radii:
        dom = schedule.build_domain(radius)
        if domains and not is_nested(domains[-1], dom):
            raise ExhaustionFailure(f"domain of radius {radius} does not contain its predecessor")
        u_init = null_extend(solutions[-1], dom) if warm_start and solutions else None
        u, trace = solve_domain(dom, schedule.vortices, params, backend=backend, u_init=u_init)
        if domains:
            prev_dom, prev_u = domains[-1], solutions[-1]
            on_prev = np.array([u.values[dom.index_of[p]] for p in prev_dom.closure])
            rise = float((on_prev - prev_u.values).max())
            worst_rise = max(worst_rise, rise)
            if rise > CHAIN_SLACK:
                raise ExhaustionFailure(
                    f"solution on radius {radius} rises {rise:.3e} above radius "
                    f"{schedule.radii[len(domains) - 1]}",
                    pair=(schedule.radii[len(domains) - 1], radius),
                )
            gaps.append(
                float(np.abs(on_prev[: prev_dom.n_interior] - prev_u.interior).max())
            )
        domains.append(dom)
        solutions.append(u)
        traces.append(trace)
    profile = decay_profile(solutions[-1], schedule.center)
    # The very last shells of the closure hold boundary sites pinned to
    # zero; the decay certificate reads the outermost shell that still
    # contains interior sites.
    last = domains[-1]
    center_arr = np.asarray(schedule.center, dtype=np.int64)
    interior_dist = np.abs(last.coords[: last.n_interior] - center_arr).sum(axis=1)
    edge_radius = int(interior_dist.max())
    edge_sup = next(s for r, s in profile if r == edge_radius)
    strict = all(b < a for a, b in zip(gaps, gaps[1:]))
    return GlobalSolutionEstimate(
        schedule=schedule,
        domains=domains,
        solutions=solutions,
        traces=traces,
        inter_domain_gaps=gaps,
        decay=profile,
        gaps_strictly_decreasing=strict,
        final_gap=gaps[-1] if gaps else 0.0,
        boundary_shell_sup=edge_sup,
        tol_global=tol_global,
        decay_threshold=decay_threshold,
        chain_violation=max(worst_rise, 0.0) if len(schedule.radii) > 1 else 0.0,
    )


def report_dict(estimate: GlobalSolutionEstimate) -> dict:
    """Plain-data report mirroring the per-radius results and certificates."""
    per_radius = []
    for i, (radius, trace) in enumerate(zip(estimate.schedule.radii, estimate.traces)):
        per_radius.append(
            {
                "radius": radius,
                "iterations": trace.iterations,
                "J_final": trace.final.j_value,
                "residual": trace.final.residual_inf,
                "l2p2_norm": trace.final.l2p2_norm,
                "gap_to_previous": estimate.inter_domain_gaps[i - 1] if i > 0 else None,
            }
        )
    return {
        "shape": estimate.schedule.shape,
        "dimension": estimate.schedule.dimension,
        "radii": list(estimate.schedule.radii),
        "per_radius": per_radius,
        "final_gap": estimate.final_gap,
        "gaps_strictly_decreasing": estimate.gaps_strictly_decreasing,
        "boundary_shell_sup": estimate.boundary_shell_sup,
        "tol_global": estimate.tol_global,
        "decay_threshold": estimate.decay_threshold,
        "success": estimate.success,
    }
