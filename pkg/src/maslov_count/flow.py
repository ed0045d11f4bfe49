"""Spectral-flow bookkeeping for pairs of Lagrangian paths.

Given two frame paths, the unitary pair matrix W(t) carries all
intersection data: eigenvalues of W(t) at -1 mark conjugate points, and
the Maslov index is the signed count of eigenvalue passages through -1.
This module tracks the eigenphases of W(t) continuously, applies the
arrival/departure endpoint conventions, resolves crossing directions
through the projected difference of the two Hamiltonian coefficients,
and assembles the four-shelf box audit.

Sign conventions. Counterclockwise passage of an eigenphase through the
target point increments the index; the increment happens on arrival
(including arrival at the right endpoint of the parameter interval).
Clockwise passage decrements on departure (including departure from the
left endpoint). A counterclockwise departure from the left endpoint and
a clockwise arrival at the right endpoint contribute nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    IndefiniteDirectionError,
    IndeterminateCrossingError,
    NonIsolatedIntersectionError,
    RefinementLimitError,
    ShelfMismatchError,
)
from .frames import (
    DEFAULT_ANGLE_TOL,
    LagrangianFrame,
    intersection_projector,
    kernel_dim_at,
    orthogonal_projector,
    rotate_target,
    symplectic_j,
    w_pair,
)

_MAX_STEP_JUMP = math.pi / 2
_REFINE_XTOL = 1e-12
_MIN_SAMPLE_SPACING = 1e-13


def _wrap(a):
    """Wrap angles to (-pi, pi]."""
    return -((-np.asarray(a) + np.pi) % (2 * np.pi) - np.pi)


@dataclass(eq=False)
class UnitaryPath:
    """Sampled path of unitary matrices with an optional evaluator.

    ``evaluator(t)`` must return the matrix at an arbitrary parameter
    value; without it the path cannot be refined between samples (the
    raw-path test seam).
    """

    ts: np.ndarray
    mats: list
    evaluator: object = None

    @classmethod
    def from_frame_paths(cls, path1, path2):
        if len(path1.grid) != len(path2.grid) or np.any(path1.grid != path2.grid):
            raise ValueError("frame paths must share the grid")
        mats = [w_pair(f1, f2) for f1, f2 in zip(path1.frames, path2.frames)]

        def evaluator(t):
            return w_pair(path1.frame_at(t), path2.frame_at(t))

        return cls(ts=np.asarray(path1.grid, dtype=float), mats=mats,
                   evaluator=evaluator)

    @classmethod
    def from_lambda_shelf(cls, sys, init_frame, target_frame, lam_grid,
                          rtol=None, atol=None):
        """Pair path along a lambda-shelf: the frame propagated to x = 1
        against a fixed target, sampled over ``lam_grid``."""
        from .propagation import DEFAULT_ATOL, DEFAULT_RTOL, integrate_frame

        rtol = DEFAULT_RTOL if rtol is None else rtol
        atol = DEFAULT_ATOL if atol is None else atol
        cache = {}

        def frame_at_lambda(lam):
            key = float(lam)
            if key not in cache:
                path = integrate_frame(sys, key, init_frame, 0.0,
                                       grid=np.array([0.0, 0.5, 1.0]),
                                       rtol=rtol, atol=atol)
                cache[key] = path.frames[-1]
            return cache[key]

        def evaluator(lam):
            return w_pair(frame_at_lambda(lam), target_frame)

        lam_grid = np.asarray(lam_grid, dtype=float)
        mats = [evaluator(lam) for lam in lam_grid]
        return cls(ts=lam_grid, mats=mats, evaluator=evaluator)

    def reversed(self):
        a, b = self.ts[0], self.ts[-1]
        ev = None
        if self.evaluator is not None:
            ev = lambda s: self.evaluator(a + b - s)
        return UnitaryPath(ts=(a + b) - self.ts[::-1], mats=self.mats[::-1],
                           evaluator=ev)


def _sorted_phases(mat):
    return np.sort(np.angle(np.linalg.eigvals(mat)))


def _step_deltas(prev_raw, next_sorted):
    """Minimal-motion matching of two eigenphase multisets on the circle.

    Returns per-track increments; the optimal non-crossing matching of
    circularly sorted multisets is a cyclic shift.
    """
    n = len(prev_raw)
    order = np.argsort(prev_raw)
    sorted_prev = prev_raw[order]
    best = None
    for s in range(n):
        d = _wrap(np.roll(next_sorted, -s) - sorted_prev)
        cost = np.abs(d).sum()
        if best is None or cost < best[0]:
            best = (cost, d)
    deltas = np.empty(n)
    deltas[order] = best[1]
    return deltas


@dataclass(eq=False)
class EigenphasePath:
    """Continuously tracked, unwrapped eigenphases of a unitary path.

    ``phases[k, j]`` is the unwrapped phase of track j at ``ts[k]``; the
    multiset exp(i phases[k]) reproduces the spectrum of ``mats[k]``.
    """

    ts: np.ndarray
    phases: np.ndarray
    mats: list
    source: UnitaryPath
    angle_tol: float = DEFAULT_ANGLE_TOL

    @property
    def n_tracks(self) -> int:
        return self.phases.shape[1]

    def max_step_jump(self) -> float:
        return float(np.abs(np.diff(self.phases, axis=0)).max()) if len(self.ts) > 1 else 0.0

    def phases_at(self, t: float) -> np.ndarray:
        """Unwrapped track phases at an arbitrary parameter value.

        Evaluates the matrix there and matches its eigenphases to the
        linear interpolation of the stored tracks.
        """
        if self.source.evaluator is None:
            raise RefinementLimitError("path has no evaluator for off-grid samples")
        predicted = np.array([np.interp(t, self.ts, self.phases[:, j])
                              for j in range(self.n_tracks)])
        actual_sorted = _sorted_phases(self.source.evaluator(t))
        deltas = _step_deltas(_wrap(predicted), actual_sorted)
        return predicted + deltas

    def kernel_dim(self, t: float, point: complex = -1.0) -> int:
        if self.source.evaluator is None:
            k = int(np.searchsorted(self.ts, t))
            k = min(max(k, 0), len(self.mats) - 1)
            return kernel_dim_at(self.mats[k], point, self.angle_tol)
        return kernel_dim_at(self.source.evaluator(t), point, self.angle_tol)


def eigenphase_path(source, angle_tol: float = DEFAULT_ANGLE_TOL,
                    max_jump: float = _MAX_STEP_JUMP,
                    max_samples: int = 200_000) -> EigenphasePath:
    """Track the eigenphases of a unitary path continuously.

    ``source`` is a UnitaryPath, a pair of FramePaths, or a tuple
    (ts, mats). Samples are inserted adaptively until every per-step
    matched phase motion is at most ``max_jump``; without an evaluator
    an oversized step raises RefinementLimitError.
    """
    if isinstance(source, tuple) and len(source) == 2 and not hasattr(source[0], "frames"):
        source = UnitaryPath(ts=np.asarray(source[0], dtype=float),
                             mats=list(source[1]))
    elif isinstance(source, tuple):
        source = UnitaryPath.from_frame_paths(*source)
    elif not isinstance(source, UnitaryPath):
        raise TypeError(f"cannot build a unitary path from {type(source)!r}")

    ts = list(map(float, source.ts))
    mats = list(source.mats)
    sorted_ph = [_sorted_phases(m) for m in mats]

    i = 0
    while i < len(ts) - 1:
        deltas = _step_deltas(sorted_ph[i], sorted_ph[i + 1])
        if np.abs(deltas).max() <= max_jump:
            i += 1
            continue
        if source.evaluator is None:
            raise RefinementLimitError(
                f"phase jump {np.abs(deltas).max():.3f} rad between samples "
                f"{ts[i]:.6g} and {ts[i + 1]:.6g} with no evaluator to refine"
            )
        if ts[i + 1] - ts[i] < _MIN_SAMPLE_SPACING or len(ts) >= max_samples:
            raise RefinementLimitError(
                f"cannot resolve phase motion near t={ts[i]:.6g}"
            )
        mid = 0.5 * (ts[i] + ts[i + 1])
        w = source.evaluator(mid)
        ts.insert(i + 1, mid)
        mats.insert(i + 1, w)
        sorted_ph.insert(i + 1, _sorted_phases(w))

    n = len(sorted_ph[0])
    phases = np.empty((len(ts), n))
    phases[0] = sorted_ph[0]
    raw = sorted_ph[0].copy()
    for k in range(len(ts) - 1):
        deltas = _step_deltas(raw, sorted_ph[k + 1])
        phases[k + 1] = phases[k] + deltas
        raw = _wrap(raw + deltas)
    return EigenphasePath(ts=np.asarray(ts), phases=phases, mats=mats,
                          source=source, angle_tol=angle_tol)


# ---------------------------------------------------------------------------
# events, crossings, and the index
# ---------------------------------------------------------------------------


@dataclass
class CrossingRecord:
    """One conjugate point of a tracked pair.

    ``direction`` is +1 for counterclockwise passage, -1 for clockwise,
    0 for a graze or mixed cluster; ``contribution`` is the (signed)
    amount the cluster adds to the Maslov index under the endpoint
    conventions; ``side`` is 'interior', 'left-endpoint', or
    'right-endpoint'.
    """

    location: float
    multiplicity: int
    direction: int
    side: str
    contribution: int


@dataclass
class MaslovResult:
    index: int
    crossings: list
    audit: dict = field(default_factory=dict)


_CONTRIBUTION = {
    (-1, +1): 1,   # arrives counterclockwise, continues: counts on arrival
    (+1, -1): -1,  # clockwise passage: counts on departure
    (-1, -1): 0,   # transient touch from below
    (+1, +1): 0,   # transient touch from above
    (None, +1): 0,   # departs left endpoint counterclockwise
    (None, -1): -1,  # departs left endpoint clockwise
    (-1, None): 1,   # arrives at right endpoint counterclockwise
    (+1, None): 0,   # arrives at right endpoint clockwise
    (None, None): 0,  # pinned at the point for the whole interval
}


@dataclass
class _TrackEvent:
    track: int
    level: float
    pre: object   # -1 below, +1 above, None = interval endpoint
    post: object
    k_lo: int
    k_hi: int
    location: float
    side: str
    plateau_span: float

    @property
    def contribution(self) -> int:
        return _CONTRIBUTION[(self.pre, self.post)]

    @property
    def direction(self) -> int:
        if self.pre == -1 and self.post in (+1, None):
            return +1
        if self.pre == +1 and self.post in (-1, None):
            return -1
        if self.pre is None and self.post == +1:
            return +1
        if self.pre is None and self.post == -1:
            return -1
        return 0


def _track_events(epath: EigenphasePath, track: int, target_angle: float,
                  angle_tol: float):
    u = epath.phases[:, track]
    events = []
    lo = math.floor((u.min() - target_angle - angle_tol) / (2 * np.pi))
    hi = math.ceil((u.max() - target_angle + angle_tol) / (2 * np.pi))
    for m in range(lo, hi + 1):
        c = target_angle + 2 * np.pi * m
        s = u - c
        state = np.where(s > angle_tol, 1, np.where(s < -angle_tol, -1, 0))
        k = 0
        while k < len(state):
            if state[k] == 0:
                a = k
                while k < len(state) and state[k] == 0:
                    k += 1
                b = k - 1
                pre = int(state[a - 1]) if a > 0 else None
                post = int(state[b + 1]) if b + 1 < len(state) else None
                if pre is None and post is None:
                    side = "interior"
                elif pre is None:
                    side = "left-endpoint"
                elif post is None:
                    side = "right-endpoint"
                else:
                    side = "interior"
                if side == "left-endpoint":
                    loc = float(epath.ts[0])
                elif side == "right-endpoint":
                    loc = float(epath.ts[-1])
                else:
                    loc = float(0.5 * (epath.ts[a] + epath.ts[b]))
                events.append(_TrackEvent(
                    track=track, level=c, pre=pre, post=post,
                    k_lo=max(a - 1, 0), k_hi=min(b + 1, len(state) - 1),
                    location=loc, side=side,
                    plateau_span=float(epath.ts[b] - epath.ts[a]),
                ))
            else:
                if k + 1 < len(state) and state[k + 1] != 0 and state[k + 1] != state[k]:
                    # transversal crossing between consecutive samples
                    events.append(_TrackEvent(
                        track=track, level=c, pre=int(state[k]), post=int(state[k + 1]),
                        k_lo=k, k_hi=k + 1,
                        location=float(0.5 * (epath.ts[k] + epath.ts[k + 1])),
                        side="interior", plateau_span=0.0,
                    ))
                k += 1
    return events


def _refine_event(epath: EigenphasePath, ev: _TrackEvent, xtol: float):
    """Sharpen an interior sign-change event location by root finding."""
    if epath.source.evaluator is None or ev.pre is None or ev.post is None:
        return
    if ev.pre == ev.post:  # graze: nothing to bracket
        return
    t_lo, t_hi = float(epath.ts[ev.k_lo]), float(epath.ts[ev.k_hi])

    def g(t):
        return epath.phases_at(t)[ev.track] - ev.level

    g_lo, g_hi = g(t_lo), g(t_hi)
    if g_lo == 0.0:
        ev.location = t_lo
        return
    if g_hi == 0.0:
        ev.location = t_hi
        return
    if np.sign(g_lo) == np.sign(g_hi):
        # the sampled states claim a passage but re-evaluation cannot
        # bracket it: the track grazes within tolerance and its
        # direction is not trustworthy
        raise IndeterminateCrossingError(
            f"track {ev.track} grazes the target near t={ev.location:.8g} "
            "but the passage cannot be bracketed after refinement"
        )
    ev.location = float(brentq(g, t_lo, t_hi, xtol=xtol))


def detect_crossings(epath: EigenphasePath, point: complex = -1.0,
                     refine: bool = True, xtol: float = _REFINE_XTOL,
                     forbid_plateaus: bool = False,
                     cluster_tol: float = 1e-9):
    """All events of the tracked path at a point of the unit circle.

    Returns ``(events, records)`` where records cluster coincident
    events into CrossingRecord entries with multiplicities read from
    the kernel dimension at the refined location. With
    ``forbid_plateaus`` a track resting at the point over a positive
    parameter span raises NonIsolatedIntersectionError (legitimate for
    conjugate-point counting, where intersections must be isolated).
    """
    target_angle = float(np.angle(complex(point)))
    events = []
    for j in range(epath.n_tracks):
        events.extend(_track_events(epath, j, target_angle, epath.angle_tol))

    if forbid_plateaus:
        span = float(epath.ts[-1] - epath.ts[0])
        spacing = span / max(len(epath.ts) - 1, 1)
        for ev in events:
            if ev.plateau_span > max(2.5 * spacing, 1e-6 * span):
                # a genuine persistent intersection is pinned at the
                # integration-noise level; a tangential departure drifts,
                # so probing at a much tighter tolerance separates them
                confirmed = True
                if epath.source.evaluator is not None:
                    tight = 1e-3 * epath.angle_tol
                    t_lo = epath.ts[ev.k_lo] + 0.1 * ev.plateau_span
                    probes = np.linspace(t_lo, t_lo + 0.8 * ev.plateau_span, 5)
                    confirmed = all(
                        abs(_wrap(epath.phases_at(t)[ev.track] - ev.level)) <= tight
                        for t in probes
                    )
                if confirmed:
                    raise NonIsolatedIntersectionError(
                        f"track {ev.track} rests at the target point over "
                        f"[{epath.ts[ev.k_lo]:.6g}, {epath.ts[ev.k_hi]:.6g}]"
                    )

    if refine:
        for ev in events:
            _refine_event(epath, ev, xtol)

    events.sort(key=lambda e: e.location)
    records = []
    for ev in events:
        if records and abs(ev.location - records[-1][0].location) <= cluster_tol \
                and ev.side == records[-1][0].side:
            records[-1].append(ev)
        else:
            records.append([ev])
    out = []
    for cluster in records:
        loc = cluster[0].location
        if epath.source.evaluator is not None and cluster[0].side == "interior":
            mult = epath.kernel_dim(loc, point)
            mult = max(mult, len(cluster))
        elif epath.source.evaluator is not None:
            k = 0 if cluster[0].side == "left-endpoint" else len(epath.mats) - 1
            mult = kernel_dim_at(epath.mats[k], point, epath.angle_tol)
        else:
            mult = len(cluster)
        dirs = {ev.direction for ev in cluster}
        out.append(CrossingRecord(
            location=loc,
            multiplicity=int(mult),
            direction=dirs.pop() if len(dirs) == 1 else 0,
            side=cluster[0].side,
            contribution=sum(ev.contribution for ev in cluster),
        ))
    return events, out


def maslov_index(path, point: complex = -1.0, refine: bool = True,
                 angle_tol: float = None) -> MaslovResult:
    """Maslov index of a tracked pair through a point of S^1.

    ``path`` may be an EigenphasePath, a UnitaryPath, a pair of frame
    paths, or a raw (ts, mats) tuple. The index sums the signed
    arrival/departure contributions of every eigenphase passage through
    the point, with multiplicities additive across tracks.
    """
    epath = path if isinstance(path, EigenphasePath) else eigenphase_path(path)
    if angle_tol is not None:
        epath.angle_tol = angle_tol
    events, records = detect_crossings(epath, point=point, refine=refine)
    index = sum(ev.contribution for ev in events)
    return MaslovResult(index=int(index), crossings=records,
                        audit={"events": events})


# ---------------------------------------------------------------------------
# crossing directions through the projected coefficient difference
# ---------------------------------------------------------------------------


@dataclass
class DirectionAudit:
    """Signature of the projected coefficient difference at a crossing.

    ``m_zero`` counts eigenvalue branches that vanish identically at the
    sampling tolerance; the quadratic-form test does not resolve those
    directions (degenerate compressions happen, for instance, where a
    window edge is itself a spectral value), and they contribute nothing
    to the index bound.
    """

    m_plus: int
    m_minus: int
    multiplicity: int
    delta: float
    eigenvalue_samples: np.ndarray
    mas_contribution: int
    location: float
    m_zero: int = 0


def crossing_direction(b1, b2, frame1: LagrangianFrame, frame2: LagrangianFrame,
                       t_star: float, domain=(0.0, 1.0), delta0: float = 1e-4,
                       max_shrink: int = 4) -> DirectionAudit:
    """Direction data of a conjugate point from the two coefficients.

    ``b1`` and ``b2`` map the path parameter to the self-adjoint
    coefficient matrices driving the two frames. The eigenvalues of the
    compression of b2(t) - b1(t) to the intersection of the two
    subspaces are sampled on a shrinking two-sided window around the
    crossing until every eigenvalue branch keeps a uniform sign; m_plus
    branches are positive (counterclockwise) and m_minus negative.
    The index contribution over a small window is m_plus - m_minus for
    an interior crossing, -m_minus at the left endpoint of the domain,
    +m_plus at the right endpoint.
    """
    pstar = intersection_projector(orthogonal_projector(frame1),
                                   orthogonal_projector(frame2))
    pstar = 0.5 * (pstar + pstar.conj().T)
    mult = int(round(float(np.trace(pstar).real)))
    if mult <= 0:
        raise ValueError(f"frames do not intersect at t={t_star}")
    vals, vecs = np.linalg.eigh(pstar)
    basis = vecs[:, vals > 0.5]
    if basis.shape[1] != mult:
        basis = vecs[:, np.argsort(vals)[-mult:]]

    lo, hi = float(domain[0]), float(domain[1])
    endpoint_tol = 1e-9 * max(1.0, hi - lo)
    at_left = abs(t_star - lo) <= endpoint_tol
    at_right = abs(t_star - hi) <= endpoint_tol

    scale = max(np.linalg.norm(b2(t_star) - b1(t_star), 2), 1e-30)
    sign_tol = 1e-13 * scale
    delta = float(delta0)
    samples = None
    for _ in range(max_shrink + 1):
        offsets = np.array([0.2, 0.45, 0.7, 0.95]) * delta
        ts = []
        if not at_left:
            ts.extend(t_star - offsets[::-1])
        if not at_right:
            ts.extend(t_star + offsets)
        ts = [t for t in ts if lo <= t <= hi]
        samples = np.array([
            np.sort(np.linalg.eigvalsh(
                basis.conj().T @ (b2(t) - b1(t)) @ basis).real)
            for t in ts
        ])
        pos = int(np.count_nonzero(samples.min(axis=0) > sign_tol))
        neg = int(np.count_nonzero(samples.max(axis=0) < -sign_tol))
        zero = int(np.count_nonzero(np.abs(samples).max(axis=0) <= sign_tol))
        if pos + neg + zero == mult:
            if at_left:
                contribution = -neg
            elif at_right:
                contribution = pos
            else:
                contribution = pos - neg
            return DirectionAudit(m_plus=pos, m_minus=neg, m_zero=zero,
                                  multiplicity=mult, delta=delta,
                                  eigenvalue_samples=samples,
                                  mas_contribution=int(contribution),
                                  location=float(t_star))
        delta /= 10.0
    raise IndefiniteDirectionError(
        f"an eigenvalue branch of the projected difference changes sign near "
        f"t={t_star} (last window {delta * 10:.1e})"
    )


def rotation_conjugation(w0: complex, n: int):
    """The pair (G, G^{-1}) with G = i(1 - w0) I - (1 + w0) J."""
    w0 = complex(w0)
    j = symplectic_j(n)
    eye = np.eye(2 * n)
    g = 1j * (1 - w0) * eye - (1 + w0) * j
    g_inv = (1j * (1 - w0) * eye + (1 + w0) * j) / (4 * w0)
    return g, g_inv


def rotated_direction(b1, b2, frame1: LagrangianFrame, frame2: LagrangianFrame,
                      t_star: float, w0: complex, domain=(0.0, 1.0),
                      delta0: float = 1e-4, max_shrink: int = 4) -> DirectionAudit:
    """Direction of an eigenvalue passing through an arbitrary w0 on S^1.

    Rotates the target so that w0 plays the role of -1: the rotated
    frame evolves under the conjugated coefficient G b2 G^{-1}, and the
    usual projected-difference test applies to the pair (frame1,
    rotated frame). Reduces to ``crossing_direction`` at w0 = -1.
    """
    g, g_inv = rotation_conjugation(w0, frame2.n)
    frame3 = rotate_target(frame2, w0)

    def b3(t):
        return g @ b2(t) @ g_inv

    return crossing_direction(b1, b3, frame1, frame3, t_star, domain=domain,
                              delta0=delta0, max_shrink=max_shrink)


# ---------------------------------------------------------------------------
# the four-shelf box audit
# ---------------------------------------------------------------------------


@dataclass
class ShelfReport:
    """Maslov indices on the four shelves of the parameter box.

    The natural-orientation indices (increasing parameter) must satisfy
    bottom = 0, right = 0, top = -left; the closed-loop sum follows the
    box contour (bottom, right, reversed top, reversed left) and must
    vanish by homotopy invariance.
    """

    bottom: MaslovResult
    right: MaslovResult
    top: MaslovResult
    left: MaslovResult
    loop_sum: int
    count: int
    right_shelf_pairing_drift: float
    window: tuple

    @property
    def consistent(self) -> bool:
        return (self.bottom.index == 0 and self.right.index == 0
                and self.top.index == -self.left.index and self.loop_sum == 0)

    def lines(self):
        return [
            f"bottom shelf (x=0, lambda rising)   Mas = {self.bottom.index}",
            f"right shelf  (lambda2, x rising)    Mas = {self.right.index}"
            f"   pairing drift {self.right_shelf_pairing_drift:.2e}",
            f"top shelf    (x=1, lambda rising)   Mas = {self.top.index}",
            f"left shelf   (lambda1, x rising)    Mas = {self.left.index}",
            f"closed-loop sum                     {self.loop_sum}",
            f"spectral count (= left shelf)       {self.count}",
        ]


def maslov_box_audit(sys, bc, lam1: float, lam2: float, x_grid=None,
                     lam_samples: int = 101, rtol=None, atol=None,
                     check: bool = True) -> ShelfReport:
    """Compute the Maslov index on all four shelves of the box.

    Raises ShelfMismatchError (carrying the report) when the shelf
    identities fail with ``check=True``.
    """
    from .propagation import (
        DEFAULT_ATOL,
        DEFAULT_RTOL,
        canonical_frames,
        constant_path,
        default_grid,
        integrate_frame,
    )
    from .systems import GeneralBC, SeparatedBC, doubled_initial_frame

    rtol = DEFAULT_RTOL if rtol is None else rtol
    atol = DEFAULT_ATOL if atol is None else atol
    if x_grid is None:
        x_grid = default_grid()
    lam_grid = np.linspace(lam1, lam2, lam_samples)

    path1, path2 = canonical_frames(sys, bc, lam1, lam2, grid=x_grid,
                                    rtol=rtol, atol=atol)
    flow_sys = path1.sys
    if isinstance(bc, SeparatedBC):
        init_frame = bc.left_frame()
    elif isinstance(bc, GeneralBC):
        init_frame = doubled_initial_frame(sys.n)
    else:
        raise TypeError(f"unsupported boundary-condition type {type(bc)!r}")

    # bottom shelf: both frames are lambda-independent at x = 0
    w0 = w_pair(path1.frames[0], path2.frames[0])
    bottom_path = UnitaryPath(ts=np.array([lam1, lam2]), mats=[w0, w0],
                              evaluator=lambda lam: w0)
    bottom = maslov_index(bottom_path)

    # right shelf: both paths at lambda2; the pairing matrix is constant
    path1_at2 = integrate_frame(flow_sys, lam2, init_frame, 0.0, x_grid,
                                rtol, atol)
    right_upath = UnitaryPath.from_frame_paths(path1_at2, path2)
    right_epath = eigenphase_path(right_upath)
    right = maslov_index(right_epath)
    # both right-shelf paths solve the same equation, so the raw pairing
    # matrix X1* J X2 is conserved; undo the stored QR renormalizations
    j = symplectic_j(flow_sys.n)
    pairings = [
        r1.conj().T @ (f1.data.conj().T @ j @ f2.data) @ r2
        for f1, f2, r1, r2 in zip(path1_at2.frames, path2.frames,
                                  path1_at2.basis_changes, path2.basis_changes)
    ]
    scale = max(float(np.linalg.norm(pairings[0], 2)), 1e-30)
    drift = max(float(np.linalg.norm(p - pairings[0], 2)) for p in pairings) / scale

    # top shelf: frames at x=1 against the fixed terminal target
    top_upath = UnitaryPath.from_lambda_shelf(
        flow_sys, init_frame, path2.frames[-1], lam_grid, rtol=rtol, atol=atol)
    top_epath = eigenphase_path(top_upath)
    top = maslov_index(top_epath)

    # left shelf: the canonical pair itself
    left_epath = eigenphase_path((path1, path2))
    left = maslov_index(left_epath)

    loop = (bottom.index + right.index
            + maslov_index(_reverse_epath(top_epath), refine=False).index
            + maslov_index(_reverse_epath(left_epath), refine=False).index)

    report = ShelfReport(bottom=bottom, right=right, top=top, left=left,
                         loop_sum=int(loop), count=int(left.index),
                         right_shelf_pairing_drift=drift,
                         window=(lam1, lam2))
    if check and not report.consistent:
        raise ShelfMismatchError(
            "Maslov-box shelves are inconsistent: " + "; ".join(report.lines()),
            report=report,
        )
    return report


def _reverse_epath(epath: EigenphasePath) -> EigenphasePath:
    a, b = epath.ts[0], epath.ts[-1]
    src = epath.source.reversed()
    return EigenphasePath(ts=(a + b) - epath.ts[::-1],
                          phases=epath.phases[::-1].copy(),
                          mats=epath.mats[::-1], source=src,
                          angle_tol=epath.angle_tol)
