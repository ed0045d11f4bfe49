"""Conjugate-pair curves over the spectral box, with file export.

A scan walks lambda-columns of the box [lambda1, lambda2] x [0, 1],
locates the x-values where the pair matrix has -1 in its spectrum, adds
the refined top-shelf crossings at x = 1, and links adjacent points
into polylines. Renormalized scans pair the moving forward path at each
column's lambda with the frozen backward path at lambda2; standard
scans pair it with the frozen plane spanned by J beta*.

Export writes a delimited CSV (full double precision), a standalone
SVG with one polyline per curve, and optionally a rendered matplotlib
figure next to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ResolutionTooCoarseError
from .flow import UnitaryPath, detect_crossings, eigenphase_path
from .propagation import canonical_frames, constant_path, integrate_frame
from .systems import GeneralBC, SeparatedBC, doubled_initial_frame


@dataclass
class CurvePoint:
    x: float
    lam: float
    multiplicity: int


@dataclass
class CurveSet:
    """Scan result: bare points, assembled polylines, and the box."""

    method: str
    points: list
    curves: list  # list of lists of CurvePoint
    box: tuple  # (lam1, lam2, x_lo, x_hi)
    top_crossings: list = field(default_factory=list)

    def curve_count(self) -> int:
        return len(self.curves)


def _column_crossings(path1, path2, x_grid):
    epath = eigenphase_path(UnitaryPath.from_frame_paths(path1, path2))
    _, records = detect_crossings(epath, point=-1.0, refine=True)
    return [(r.location, r.multiplicity) for r in records]


def _top_shelf_crossings(flow_sys, init_frame, target_frame, lam1, lam2,
                         lam_samples, rtol, atol):
    from .flow import maslov_index

    upath = UnitaryPath.from_lambda_shelf(
        flow_sys, init_frame, target_frame,
        np.linspace(lam1, lam2, lam_samples), rtol=rtol, atol=atol)
    epath = eigenphase_path(upath)
    result = maslov_index(epath)
    out = []
    for rec in result.crossings:
        out.extend([float(rec.location)] * rec.multiplicity)
    return sorted(out)


def scan_box(sys, bc, lam1: float, lam2: float, lam_samples: int = 41,
             x_samples: int = 801, method: str = "renormalized",
             rtol=None, atol=None, link: bool = True) -> CurveSet:
    """Trace conjugate pairs (x, lambda) over the box.

    Column scans locate kernel points in x by a grid scan plus root
    refinement; points in adjacent columns are linked greedily in
    scaled coordinates with a gap threshold of three column spacings,
    and ambiguous links split curves rather than guess.
    """
    if method not in ("renormalized", "standard"):
        raise ValueError("method must be 'renormalized' or 'standard'")
    x_grid = np.linspace(0.0, 1.0, x_samples)
    lams = np.linspace(lam1, lam2, lam_samples)
    kwargs = {}
    if rtol is not None:
        kwargs["rtol"] = rtol
    if atol is not None:
        kwargs["atol"] = atol

    if lam_samples < 3:
        raise ResolutionTooCoarseError("need at least 3 lambda columns to link curves")

    if method == "renormalized":
        _, path2 = canonical_frames(sys, bc, lam1, lam2, grid=x_grid, **kwargs)
        flow_sys = path2.sys
        init = (doubled_initial_frame(sys.n) if isinstance(bc, GeneralBC)
                else bc.left_frame())
        fixed = path2
        target_at_1 = path2.frames[-1]
    else:
        if not isinstance(bc, SeparatedBC):
            raise ValueError("standard scans need separated boundary conditions")
        flow_sys = sys
        init = bc.left_frame()
        fixed = constant_path(bc.right_frame(), x_grid)
        target_at_1 = bc.right_frame()

    def scan_column(lam):
        moving = integrate_frame(flow_sys, lam, init, 0.0, x_grid, **kwargs)
        return [CurvePoint(x=loc, lam=float(lam), multiplicity=mult)
                for loc, mult in _column_crossings(moving, fixed, x_grid)]

    columns = {float(lam): scan_column(lam) for lam in lams}

    # adaptively insert columns where linking loses a curve mid-box
    # (near-vertical sections); budgeted so pathological scans terminate
    budget = 4 * lam_samples
    min_spacing = (lam2 - lam1) / (lam_samples * 32.0)
    while budget > 0:
        ordered = sorted(columns)
        _, problems = _link_columns([columns[l] for l in ordered], ordered)
        inserts = [0.5 * (ordered[k] + ordered[k + 1]) for k in problems
                   if ordered[k + 1] - ordered[k] > min_spacing]
        if not inserts:
            break
        for lam in inserts[:budget]:
            columns[lam] = scan_column(lam)
        budget -= len(inserts)

    ordered = sorted(columns)
    curves, _ = _link_columns([columns[l] for l in ordered], ordered)

    tops = _top_shelf_crossings(flow_sys, init, target_at_1, lam1, lam2,
                                max(lam_samples, 41),
                                kwargs.get("rtol"), kwargs.get("atol"))
    curves = _attach_tops(curves, tops, ordered) if link else []

    points = [p for l in ordered for p in columns[l]]
    return CurveSet(method=method, points=points, curves=curves,
                    box=(float(lam1), float(lam2), 0.0, 1.0),
                    top_crossings=tops)


def _link_columns(columns, lams):
    """Greedy nearest-neighbor linking with ambiguity splits.

    Returns ``(curves, problems)`` where problems lists transition
    indices at which a curve died or was born away from the box edges
    (candidates for column refinement).
    """
    span = max(lams[-1] - lams[0], 1e-30)
    gap = 3.0 * max((b - a) / span for a, b in zip(lams, lams[1:])) \
        if len(lams) > 1 else 1.0

    def scaled(p):
        return np.array([(p.lam - lams[0]) / span, p.x])

    open_curves = []
    closed = []
    problems = set()
    for col_idx, pts in enumerate(columns):
        unmatched = list(pts)
        new_open = []
        heads = [c[-1] for c in open_curves]
        cands = []
        for hi, head in enumerate(heads):
            for pi, p in enumerate(unmatched):
                d = float(np.linalg.norm(scaled(head) - scaled(p)))
                if d <= gap:
                    cands.append((d, hi, pi))
        cands.sort()
        by_h, by_p = {}, {}
        for d, hi, pi in cands:
            by_h.setdefault(hi, []).append(pi)
            by_p.setdefault(pi, []).append(hi)
        ambiguous_h = {hi for hi, v in by_h.items() if len(v) > 1}
        ambiguous_p = {pi for pi, v in by_p.items() if len(v) > 1}
        used_h, used_p = set(), set()
        links = {}
        for d, hi, pi in cands:
            if hi in used_h or pi in used_p:
                continue
            if hi in ambiguous_h or pi in ambiguous_p:
                continue  # split rather than guess
            links[hi] = pi
            used_h.add(hi)
            used_p.add(pi)
        for hi, curve in enumerate(open_curves):
            if hi in links:
                curve.append(unmatched[links[hi]])
                new_open.append(curve)
            else:
                if 0.005 < curve[-1].x < 0.995:
                    problems.add(col_idx - 1)
                closed.append(curve)
        for pi, p in enumerate(unmatched):
            if pi not in used_p:
                if col_idx > 0 and 0.005 < p.x < 0.995:
                    problems.add(col_idx - 1)
                new_open.append([p])
        open_curves = new_open
    closed.extend(open_curves)
    closed.sort(key=lambda c: (c[0].lam, c[0].x))
    return [c for c in closed if c], sorted(problems)


def _attach_tops(curves, top_crossings, lams):
    """Attach refined top-shelf crossings to the curve end that reaches
    x = 1 there: appended where a curve exits through the top, prepended
    where one enters from it (standard scans)."""
    span = max(lams[-1] - lams[0], 1e-30)
    gap = 3.0 * max((b - a) / span for a, b in zip(lams, lams[1:])) \
        if len(lams) > 1 else 1.0
    for lam_top in sorted(top_crossings):
        best = None  # (distance, curve index, 'head' | 'tail')
        for k, curve in enumerate(curves):
            tail, head = curve[-1], curve[0]
            d_tail = np.hypot((lam_top - tail.lam) / span, 1.0 - tail.x)
            d_head = np.hypot((lam_top - head.lam) / span, 1.0 - head.x)
            if lam_top >= tail.lam - 1e-12 and (best is None or d_tail < best[0]):
                best = (float(d_tail), k, "tail")
            if lam_top <= head.lam + 1e-12 and (best is None or d_head < best[0]):
                best = (float(d_head), k, "head")
        if best is not None and best[0] <= 2.0 * gap:
            _, k, end = best
            mult = curves[k][-1 if end == "tail" else 0].multiplicity
            pt = CurvePoint(x=1.0, lam=lam_top, multiplicity=mult)
            if end == "tail":
                curves[k].append(pt)
            else:
                curves[k].insert(0, pt)
        else:
            curves.append([CurvePoint(x=1.0, lam=lam_top, multiplicity=1)])
    curves.sort(key=lambda c: (c[0].lam, c[0].x))
    return curves


def check_monotone(cs: CurveSet, tol: float = 1e-9) -> bool:
    """Renormalized curves climb: x never decreases as lambda increases."""
    for curve in cs.curves:
        for a, b in zip(curve, curve[1:]):
            if b.lam >= a.lam and b.x < a.x - tol:
                return False
    return True


def origin_shelves(cs: CurveSet):
    """Shelf of each curve's first (smallest-lambda) point.

    'left' for the lambda1 column, 'top'/'bottom' for x = 1 / x = 0,
    'interior' otherwise (possible for curves split at near-vertical
    sections).
    """
    lam1, lam2, _, _ = cs.box
    col_tol = 1e-9 * max(lam2 - lam1, 1.0)
    out = []
    for curve in cs.curves:
        first = min(curve, key=lambda p: p.lam)
        if abs(first.lam - lam1) <= col_tol:
            out.append("left")
        elif abs(first.lam - lam2) <= col_tol:
            out.append("right")
        elif first.x >= 1.0 - 1e-9:
            out.append("top")
        elif first.x <= 1e-9:
            out.append("bottom")
        else:
            out.append("interior")
    return out


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_curves(cs: CurveSet, fmt: str, path) -> None:
    """Write the curve set to ``path`` as 'csv' or 'svg'.

    CSV schema: header ``method,curve_id,x,lambda,multiplicity``, one
    row per point in curve order, UTF-8 with LF line endings and 17
    significant digits. SVG: box axes and one polyline per curve with
    the stroke width carrying multiplicity.
    """
    if fmt == "csv":
        _export_csv(cs, path)
    elif fmt == "svg":
        _export_svg(cs, path)
    else:
        raise ValueError(f"unknown export format {fmt!r}")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _export_csv(cs: CurveSet, path) -> None:
    lines = ["method,curve_id,x,lambda,multiplicity"]
    for cid, curve in enumerate(cs.curves):
        for p in curve:
            lines.append(
                f"{cs.method},{cid},{_fmt(p.x)},{_fmt(p.lam)},{p.multiplicity}"
            )
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("utf-8"))


_SVG_W, _SVG_H, _SVG_PAD = 640, 480, 40


def _export_svg(cs: CurveSet, path) -> None:
    lam1, lam2, x_lo, x_hi = cs.box
    span = max(lam2 - lam1, 1e-30)

    def to_px(p):
        u = (p.lam - lam1) / span
        v = (p.x - x_lo) / max(x_hi - x_lo, 1e-30)
        px = _SVG_PAD + u * (_SVG_W - 2 * _SVG_PAD)
        py = _SVG_H - _SVG_PAD - v * (_SVG_H - 2 * _SVG_PAD)
        return px, py

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" '
        f'height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect x="{_SVG_PAD}" y="{_SVG_PAD}" width="{_SVG_W - 2 * _SVG_PAD}" '
        f'height="{_SVG_H - 2 * _SVG_PAD}" fill="none" stroke="black"/>',
        f'<text x="{_SVG_W // 2}" y="{_SVG_H - 8}" text-anchor="middle" '
        f'font-size="12">lambda in [{_fmt(lam1)}, {_fmt(lam2)}]</text>',
        f'<text x="12" y="{_SVG_H // 2}" font-size="12" '
        f'transform="rotate(-90 12 {_SVG_H // 2})" text-anchor="middle">x</text>',
    ]
    for curve in cs.curves:
        width = max(p.multiplicity for p in curve)
        pts = " ".join("%.2f,%.2f" % to_px(p) for p in curve)
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="crimson" '
            f'stroke-width="{width}"/>'
        )
    parts.append("</svg>")
    with open(path, "wb") as fh:
        fh.write(("\n".join(parts) + "\n").encode("utf-8"))


def render_curves(curve_sets, path) -> None:
    """Render one or more curve sets to an image file with matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not isinstance(curve_sets, (list, tuple)):
        curve_sets = [curve_sets]
    fig, axes = plt.subplots(1, len(curve_sets),
                             figsize=(5.2 * len(curve_sets), 4.2),
                             squeeze=False)
    for ax, cs in zip(axes[0], curve_sets):
        lam1, lam2, x_lo, x_hi = cs.box
        for cid, curve in enumerate(cs.curves):
            xs = [p.lam for p in curve]
            ys = [p.x for p in curve]
            width = max(p.multiplicity for p in curve)
            ax.plot(xs, ys, "-", lw=width, color="crimson")
        ax.set_xlim(lam1, lam2)
        ax.set_ylim(x_lo, x_hi)
        ax.set_xlabel("lambda")
        ax.set_ylabel("x")
        ax.set_title(f"{cs.method} ({len(cs.curves)} curves)")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
