"""Renormalized spectral counts from conjugate points.

The count of spectral values in a half-open window [lambda1, lambda2)
equals the number of conjugate points, with multiplicity, of the pair
(forward path at lambda1, backward path at lambda2) over x in (0, 1].
A conjugate point at x = 0 is recorded but never counted: as x
increases from 0 the corresponding eigenphases depart counterclockwise
and do not contribute.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionFailureError
from .flow import (
    CrossingRecord,
    crossing_direction,
    detect_crossings,
    eigenphase_path,
)
from .propagation import canonical_frames, default_grid
from .systems import (
    AssumptionReport,
    HamiltonianSystem,
    SeparatedBC,
    check_assumptions,
)

_LEFT_ENDPOINT_TOL = 1e-9


@dataclass
class SpectralCountReport:
    """Outcome of a renormalized count over one window.

    ``count`` sums multiplicities over conjugate points with x in
    (0, 1]; crossings at x = 0 appear in ``crossings`` with side
    'left-endpoint' but are excluded from the sum. ``direction_audits``
    holds the projected-difference signatures confirming monotone
    (counterclockwise) crossings.
    """

    count: int
    window: tuple
    crossings: list
    assumption_report: AssumptionReport
    method: str  # 'BC1' | 'BC2'
    direction_audits: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def lines(self):
        out = [
            f"method: {self.method}",
            f"window: [{self.window[0]:.12g}, {self.window[1]:.12g})",
            f"count: {self.count}",
            "crossings:",
        ]
        if not self.crossings:
            out.append("  (none)")
        for rec in self.crossings:
            mark = "" if rec.side != "left-endpoint" else "  [x=0, excluded]"
            out.append(
                f"  x={rec.location:.10f}  multiplicity={rec.multiplicity}"
                f"  direction={rec.direction:+d}{mark}"
            )
        for w in self.warnings:
            out.append(f"warning: {w}")
        return out


def counting_function(pair, sub_interval=None, angle_tol=None):
    """Sum of kernel dimensions of the pair over a parameter interval.

    Pure counting with no direction logic: conjugate points are located
    by a grid scan plus root refinement, multiplicities are read from
    the kernel dimension at the refined points, and a kernel that
    persists over an interval raises NonIsolatedIntersectionError.

    Returns ``(total, records)``.
    """
    epath = eigenphase_path(pair)
    if angle_tol is not None:
        epath.angle_tol = angle_tol
    _, records = detect_crossings(epath, point=-1.0, refine=True,
                                  forbid_plateaus=True)
    lo = epath.ts[0] if sub_interval is None else float(sub_interval[0])
    hi = epath.ts[-1] if sub_interval is None else float(sub_interval[1])
    picked = [r for r in records if lo <= r.location <= hi]
    return sum(r.multiplicity for r in picked), picked


def renormalized_count(sys: HamiltonianSystem, bc, lam1: float, lam2: float,
                       x_grid=None, force: bool = False,
                       with_directions: bool = True,
                       rtol=None, atol=None) -> SpectralCountReport:
    """Spectral count of [lambda1, lambda2) as a conjugate-point count.

    Scans x in (0, 1] for intersections of the forward path at lambda1
    with the backward path at lambda2, refines each crossing, and sums
    multiplicities. Structural assumptions are checked first; failures
    raise AssumptionFailureError unless ``force`` is set, in which case
    the report carries a warning and must not be silently trusted.
    """
    if not lam1 < lam2:
        raise ValueError("need lambda1 < lambda2")
    for lam in (lam1, lam2):
        if not sys.contains_lambda(lam):
            raise ValueError(f"lambda={lam} outside admissible interval {sys.interval}")
    if x_grid is None:
        x_grid = default_grid()

    report = check_assumptions(sys, bc, lam1, lam2)
    warnings = []
    if not report.ok:
        if not force:
            raise AssumptionFailureError(
                "assumption check failed:\n  " + "\n  ".join(report.lines()),
                report=report,
            )
        warnings.append("assumption check failed; results are not certified")

    kwargs = {}
    if rtol is not None:
        kwargs["rtol"] = rtol
    if atol is not None:
        kwargs["atol"] = atol
    path1, path2 = canonical_frames(sys, bc, lam1, lam2, grid=x_grid, **kwargs)
    epath = eigenphase_path((path1, path2))
    _, records = detect_crossings(epath, point=-1.0, refine=True,
                                  forbid_plateaus=True)

    counted = []
    total = 0
    for rec in records:
        if rec.location <= _LEFT_ENDPOINT_TOL:
            counted.append(CrossingRecord(
                location=rec.location, multiplicity=rec.multiplicity,
                direction=rec.direction, side="left-endpoint",
                contribution=0,
            ))
            continue
        counted.append(rec)
        total += rec.multiplicity

    audits = []
    if with_directions:
        flow_sys = path1.sys
        b1 = lambda x: flow_sys.eval_B(x, lam1)
        b2 = lambda x: flow_sys.eval_B(x, lam2)
        for rec in counted:
            if rec.side == "left-endpoint":
                continue
            audit = crossing_direction(
                b1, b2,
                path1.frame_at(rec.location), path2.frame_at(rec.location),
                rec.location,
            )
            audits.append(audit)
            if audit.m_minus > 0:
                warnings.append(
                    f"clockwise component at x={rec.location:.8f}; the pair is "
                    "not monotone, which contradicts the difference condition"
                )

    method = "BC1" if isinstance(bc, SeparatedBC) else "BC2"
    return SpectralCountReport(
        count=int(total),
        window=(float(lam1), float(lam2)),
        crossings=counted,
        assumption_report=report,
        method=method,
        direction_audits=audits,
        warnings=warnings,
    )
