"""Frame-path and fundamental-solution integration.

Solves J X' = B(x; lambda) X as X' = -J B X (J^{-1} = -J) with an
adaptive embedded Runge-Kutta 5(4) pair (dense output), orthonormalizing
the stored frame at every output point by a thin QR factorization. The
equation is linear, so right-multiplying by the recorded change of basis
leaves the subspace path exact up to integration tolerance; the raw
propagation is restarted from the orthonormalized frame whenever its
conditioning degrades.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepSizeUnderflowError, ToleranceNotMetError
from .frames import LagrangianFrame, symplectic_j, validate_frame
from .systems import (
    GeneralBC,
    HamiltonianSystem,
    SeparatedBC,
    double_system,
    doubled_initial_frame,
    general_bc_target,
)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

#: Condition threshold (smallest/largest singular value of the raw frame)
#: below which the integration is redone with per-point restarts.
_CONDITION_FLOOR = 1e-8


def default_grid(samples: int = 2001) -> np.ndarray:
    return np.linspace(0.0, 1.0, samples)


def _rhs(sys: HamiltonianSystem, lam: float, cols: int):
    j = symplectic_j(sys.n)

    def f(x, y):
        mat = y.reshape(2 * sys.n, cols)
        return (-j @ (sys.eval_B(x, lam) @ mat)).ravel()

    return f


def _solve_segment(sys, lam, y0, x_from, x_to, t_eval, rtol, atol):
    sol = solve_ivp(
        _rhs(sys, lam, y0.shape[1]),
        (x_from, x_to),
        y0.ravel().astype(complex),
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
        method="RK45",
    )
    if sol.status != 0 or not sol.success:
        msg = f"integration failed between x={x_from} and x={x_to}: {sol.message}"
        if "step size" in sol.message.lower():
            raise StepSizeUnderflowError(msg)
        raise ToleranceNotMetError(msg)
    return [sol.y[:, k].reshape(y0.shape) for k in range(sol.y.shape[1])]


@dataclass(eq=False)
class FramePath:
    """Lagrangian frame path over an x-grid at fixed spectral parameter.

    ``frames[k]`` is the orthonormalized frame at ``grid[k]``;
    ``basis_changes[k]`` is the upper-triangular factor relating it to
    the raw propagated matrix. ``frame_at`` re-integrates from the
    nearest stored point, so the path can be evaluated anywhere in
    [0, 1] at integration accuracy.
    """

    sys: HamiltonianSystem
    lam: float
    grid: np.ndarray
    frames: list
    direction: str  # 'forward' | 'backward'
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    basis_changes: list = field(default_factory=list)

    def frame_at(self, x: float) -> LagrangianFrame:
        x = float(x)
        k = int(np.searchsorted(self.grid, x))
        if k < len(self.grid) and abs(self.grid[k] - x) <= 1e-14:
            return self.frames[k]
        if k > 0 and abs(self.grid[k - 1] - x) <= 1e-14:
            return self.frames[k - 1]
        # integrate from the neighbor on the side the path came from
        if self.direction == "forward":
            k0 = max(k - 1, 0)
        else:
            k0 = min(k, len(self.grid) - 1)
        y0 = self.frames[k0].data
        mats = _solve_segment(self.sys, self.lam, np.asarray(y0), self.grid[k0], x,
                              [x], self.rtol, self.atol)
        q, _ = np.linalg.qr(mats[-1])
        return validate_frame(q, frame_tol=1e-6)

    def max_lagrangian_residual(self) -> float:
        return max(f.lagrangian_residual() for f in self.frames)

    def max_step_distance(self) -> float:
        from .frames import grassmann_distance

        return max(
            grassmann_distance(a, b) for a, b in zip(self.frames, self.frames[1:])
        )


def integrate_frame(sys: HamiltonianSystem, lam: float, init: LagrangianFrame,
                    x0: float, grid=None, rtol: float = DEFAULT_RTOL,
                    atol: float = DEFAULT_ATOL) -> FramePath:
    """Propagate a Lagrangian frame across [0, 1] from either endpoint.

    ``x0 = 0`` integrates forward, ``x0 = 1`` backward; the returned
    path is always indexed by the ascending grid. Stored frames are
    orthonormalized (thin QR) at every output point with the change of
    basis recorded; if the raw propagated frame loses conditioning the
    whole integration is redone restarting from the orthonormalized
    frame at each output point.
    """
    if grid is None:
        grid = default_grid()
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0.0 or grid[-1] != 1.0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must increase strictly from 0.0 to 1.0")
    if x0 not in (0.0, 1.0, 0, 1):
        raise ValueError("x0 must be 0 or 1")
    if not sys.contains_lambda(lam):
        raise ValueError(f"lambda={lam} outside admissible interval {sys.interval}")
    forward = x0 == 0

    t_eval = grid if forward else grid[::-1]
    raw = _solve_segment(sys, lam, init.data, t_eval[0], t_eval[-1], t_eval, rtol, atol)

    conds = [np.linalg.svd(m, compute_uv=False) for m in raw]
    if min(s[-1] / s[0] for s in conds) < _CONDITION_FLOOR:
        raw = _integrate_restarting(sys, lam, init, t_eval, rtol, atol)

    frames, rs = [], []
    for mat in raw:
        q, r = np.linalg.qr(mat)
        frames.append(validate_frame(q, frame_tol=max(1e-6, 1e4 * rtol)))
        rs.append(r)
    if not forward:
        frames.reverse()
        rs.reverse()
    return FramePath(sys=sys, lam=lam, grid=grid, frames=frames,
                     direction="forward" if forward else "backward",
                     rtol=rtol, atol=atol, basis_changes=rs)


def _integrate_restarting(sys, lam, init, t_eval, rtol, atol):
    """Per-output-point restart fallback used when conditioning degrades.

    Each segment starts from the orthonormalized frame of the previous
    output point; the subspace path is unchanged (the equation is
    linear), only the per-point basis is.
    """
    mats = [np.asarray(init.data, dtype=complex)]
    for a, b in zip(t_eval, t_eval[1:]):
        q, _ = np.linalg.qr(mats[-1])
        mats.append(_solve_segment(sys, lam, q, a, b, [b], rtol, atol)[-1])
    return mats


@dataclass(eq=False)
class FundamentalSolution:
    """Matrix solution of J Phi' = B(x; lambda) Phi with Phi(0) = I."""

    sys: HamiltonianSystem
    lam: float
    grid: np.ndarray
    matrices: list

    def conservation_residual(self) -> float:
        """max over the grid of ||Phi* J Phi - J||."""
        j = symplectic_j(self.sys.n)
        return max(
            float(np.linalg.norm(m.conj().T @ j @ m - j, 2)) for m in self.matrices
        )

    def blocks(self, k: int):
        n = self.sys.n
        m = self.matrices[k]
        return m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]


def fundamental_solution(sys: HamiltonianSystem, lam: float, grid=None,
                         rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> FundamentalSolution:
    """Propagate the full 2n x 2n fundamental solution (no renormalization)."""
    if grid is None:
        grid = default_grid()
    grid = np.asarray(grid, dtype=float)
    eye = np.eye(2 * sys.n, dtype=complex)
    mats = _solve_segment(sys, lam, eye, grid[0], grid[-1], grid, rtol, atol)
    return FundamentalSolution(sys=sys, lam=lam, grid=grid, matrices=mats)


class _ConstantFramePath(FramePath):
    def frame_at(self, x):
        return self.frames[0]


def constant_path(frame: LagrangianFrame, grid, sys=None, lam=None) -> FramePath:
    """Path holding a fixed subspace on the grid (used for fixed targets)."""
    grid = np.asarray(grid, dtype=float)
    return _ConstantFramePath(sys=sys, lam=lam, grid=grid,
                              frames=[frame] * len(grid), direction="forward")


def canonical_frames(sys: HamiltonianSystem, bc, lam1: float, lam2: float,
                     grid=None, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL):
    """The two frame paths whose conjugate points carry the spectral count.

    Separated conditions: the forward path at lam1 from J alpha* and the
    backward path at lam2 from J beta*. General conditions: both paths
    live in the doubled system, the forward one from the constant trace
    frame and the backward one from M J4n Theta*.
    """
    if grid is None:
        grid = default_grid()
    if isinstance(bc, SeparatedBC):
        if bc.n != sys.n:
            raise ValueError("boundary-condition size disagrees with the system")
        path1 = integrate_frame(sys, lam1, bc.left_frame(), 0.0, grid, rtol, atol)
        path2 = integrate_frame(sys, lam2, bc.right_frame(), 1.0, grid, rtol, atol)
        return path1, path2
    if isinstance(bc, GeneralBC):
        if bc.n != sys.n:
            raise ValueError("boundary-condition size disagrees with the system")
        dsys = double_system(sys)
        path1 = integrate_frame(dsys, lam1, doubled_initial_frame(sys.n), 0.0,
                                grid, rtol, atol)
        path2 = integrate_frame(dsys, lam2, general_bc_target(bc), 1.0,
                                grid, rtol, atol)
        return path1, path2
    raise TypeError(f"unsupported boundary-condition type {type(bc)!r}")
