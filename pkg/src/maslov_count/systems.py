"""Hamiltonian systems J y' = B(x; lambda) y on [0, 1].

Builders for the four supported coefficient families (Dirac,
Sturm-Liouville, block-weight, and differential-algebraic reductions),
self-adjoint boundary-condition containers, sampled assumption checks,
and the dimension-doubling construction used for general (coupled)
boundary conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatchError,
    MaslovCountError,
    WindowTouchesEssentialSpectrumError,
)
from .frames import LagrangianFrame, symplectic_j, validate_frame

_VALIDATION_XS = (0.0, 0.19, 0.5, 0.77, 1.0)
_HERMITIAN_TOL = 1e-10


def _as_matrix_map(value, size=None):
    """Normalize a constant matrix / scalar / callable to a callable x -> ndarray."""
    if callable(value):
        return lambda x: np.atleast_2d(np.asarray(value(x), dtype=complex))
    const = np.atleast_2d(np.asarray(value, dtype=complex))
    if size is not None and const.shape == (1, 1) and size > 1:
        const = const[0, 0] * np.eye(size)
    return lambda x: const


def _check_selfadjoint(name, m, x):
    if np.linalg.norm(m - m.conj().T, 2) > _HERMITIAN_TOL * max(1.0, np.linalg.norm(m, 2)):
        raise ValueError(f"{name}({x}) is not self-adjoint")


def _check_positive(name, m, x):
    _check_selfadjoint(name, m, x)
    if np.linalg.eigvalsh(m).min() <= 0:
        raise ValueError(f"{name}({x}) is not positive definite")


@dataclass(eq=False)
class HamiltonianSystem:
    """Evaluator bundle for J y' = B(x; lambda) y.

    Attributes
    ----------
    n : int
        Half-dimension; B(x, lam) is 2n x 2n.
    eval_B, eval_B_lambda : callable
        Maps (x, lam) -> self-adjoint 2n x 2n complex matrix; the second
        is the lambda-derivative of the first.
    interval : tuple
        Admissible lambda-range (lo, hi), possibly infinite.
    family : str
        One of 'dirac', 'sturm_liouville', 'block', 'dae', 'doubled',
        'custom'; drives oracle dispatch.
    coefficients : dict
        Family-specific coefficient maps kept for the oracle and the
        assumption checker.
    """

    n: int
    eval_B: Callable[[float, float], np.ndarray]
    eval_B_lambda: Callable[[float, float], np.ndarray]
    interval: tuple = (-math.inf, math.inf)
    family: str = "custom"
    coefficients: dict = field(default_factory=dict)

    def contains_lambda(self, lam: float) -> bool:
        return self.interval[0] <= lam <= self.interval[1]


@dataclass(eq=False)
class SeparatedBC:
    """Separated self-adjoint boundary data alpha y(0) = 0, beta y(1) = 0.

    Both blocks are n x 2n, full rank, and isotropic: alpha J alpha* = 0.
    """

    alpha: np.ndarray
    beta: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        self.alpha = np.atleast_2d(np.asarray(self.alpha, dtype=complex))
        self.beta = np.atleast_2d(np.asarray(self.beta, dtype=complex))
        for name, m in (("alpha", self.alpha), ("beta", self.beta)):
            rows, cols = m.shape
            if cols != 2 * rows:
                raise DimensionMismatchError(f"{name} must be n x 2n, got {m.shape}")
            if np.linalg.matrix_rank(m, tol=self.tol * max(1.0, np.linalg.norm(m, 2))) != rows:
                raise ValueError(f"{name} does not have full rank {rows}")
            residual = np.linalg.norm(m @ symplectic_j(rows) @ m.conj().T, 2)
            if residual > self.tol * max(1.0, np.linalg.norm(m, 2)) ** 2:
                raise ValueError(
                    f"{name} J {name}* residual {residual:.3e} exceeds tolerance; "
                    "boundary condition is not self-adjoint"
                )

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    def left_frame(self) -> LagrangianFrame:
        """Initial frame J alpha* for the forward path."""
        return validate_frame(symplectic_j(self.n) @ self.alpha.conj().T)

    def right_frame(self) -> LagrangianFrame:
        """Terminal frame J beta* for the backward path."""
        return validate_frame(symplectic_j(self.n) @ self.beta.conj().T)


def j_double(n: int) -> np.ndarray:
    """diag(-J, J) of size 4n x 4n, the symplectic form for traces."""
    j = symplectic_j(n)
    out = np.zeros((4 * n, 4 * n), dtype=complex)
    out[: 2 * n, : 2 * n] = -j
    out[2 * n :, 2 * n :] = j
    return out


@dataclass(eq=False)
class GeneralBC:
    """General self-adjoint boundary data Theta (y(0); y(1)) = 0.

    Theta is 2n x 4n, full rank, with Theta diag(-J, J) Theta* = 0.
    """

    theta: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=complex))
        rows, cols = self.theta.shape
        if cols != 2 * rows or rows % 2 != 0:
            raise DimensionMismatchError(f"theta must be 2n x 4n, got {self.theta.shape}")
        scale = max(1.0, np.linalg.norm(self.theta, 2))
        if np.linalg.matrix_rank(self.theta, tol=self.tol * scale) != rows:
            raise ValueError(f"theta does not have full rank {rows}")
        residual = np.linalg.norm(self.theta @ j_double(rows // 2) @ self.theta.conj().T, 2)
        if residual > self.tol * scale**2:
            raise ValueError(
                f"theta J4n theta* residual {residual:.3e} exceeds tolerance; "
                "boundary condition is not self-adjoint"
            )

    @property
    def n(self) -> int:
        return self.theta.shape[0] // 2


def separated_to_general(bc: SeparatedBC) -> GeneralBC:
    """Express separated conditions as a general Theta = diag(alpha, beta)."""
    n = bc.n
    theta = np.zeros((2 * n, 4 * n), dtype=complex)
    theta[:n, : 2 * n] = bc.alpha
    theta[n:, 2 * n :] = bc.beta
    return GeneralBC(theta)


# ---------------------------------------------------------------------------
# coefficient families
# ---------------------------------------------------------------------------


def make_dirac(Q, V) -> HamiltonianSystem:
    """Dirac-type system B(x; lam) = lam Q(x) + V(x).

    Q must be self-adjoint positive definite and V self-adjoint at the
    sampled validation points.
    """
    qm = _as_matrix_map(Q)
    vm = _as_matrix_map(V)
    dim = qm(0.0).shape[0]
    if dim % 2:
        raise DimensionMismatchError("Q must be 2n x 2n")
    for x in _VALIDATION_XS:
        _check_positive("Q", qm(x), x)
        _check_selfadjoint("V", vm(x), x)
        if vm(x).shape != (dim, dim):
            raise DimensionMismatchError("Q and V sizes disagree")

    def eval_b(x, lam):
        return lam * qm(x) + vm(x)

    def eval_b_lambda(x, lam):
        return qm(x)

    return HamiltonianSystem(
        n=dim // 2,
        eval_B=eval_b,
        eval_B_lambda=eval_b_lambda,
        family="dirac",
        coefficients={"Q": qm, "V": vm},
    )


def make_sturm_liouville(P, V, Q) -> HamiltonianSystem:
    """Sturm-Liouville system -(P phi')' + V phi = lam Q phi in first-order form.

    Variables are y1 = phi, y2 = P phi', giving
    B(x; lam) = [[lam Q - V, 0], [0, P^{-1}]] of half-dimension n.
    """
    pm = _as_matrix_map(P)
    vm = _as_matrix_map(V)
    qm = _as_matrix_map(Q)
    n = pm(0.0).shape[0]
    for x in _VALIDATION_XS:
        p = pm(x)
        _check_selfadjoint("P", p, x)
        if abs(np.linalg.det(p)) < 1e-14 * max(1.0, np.linalg.norm(p, 2)) ** n:
            raise ValueError(f"P({x}) is singular")
        _check_positive("Q", qm(x), x)
        _check_selfadjoint("V", vm(x), x)

    def eval_b(x, lam):
        b = np.zeros((2 * n, 2 * n), dtype=complex)
        b[:n, :n] = lam * qm(x) - vm(x)
        b[n:, n:] = np.linalg.inv(pm(x))
        return b

    def eval_b_lambda(x, lam):
        b = np.zeros((2 * n, 2 * n), dtype=complex)
        b[:n, :n] = qm(x)
        return b

    return HamiltonianSystem(
        n=n,
        eval_B=eval_b,
        eval_B_lambda=eval_b_lambda,
        family="sturm_liouville",
        coefficients={"P": pm, "V": vm, "Q": qm},
    )


def make_block(R, V, r: int) -> HamiltonianSystem:
    """Degenerate-weight system B = lam Q + V with Q = diag(R, 0), R r x r."""
    vm = _as_matrix_map(V)
    dim = vm(0.0).shape[0]
    if dim % 2:
        raise DimensionMismatchError("V must be 2n x 2n")
    if not 1 <= r <= dim:
        raise ValueError(f"need 1 <= r <= 2n = {dim}, got r = {r}")
    rm = _as_matrix_map(R, size=r)

    def qmap(x):
        q = np.zeros((dim, dim), dtype=complex)
        q[:r, :r] = rm(x)
        return q

    for x in _VALIDATION_XS:
        _check_positive("R", rm(x), x)
        _check_selfadjoint("V", vm(x), x)

    def eval_b(x, lam):
        return lam * qmap(x) + vm(x)

    def eval_b_lambda(x, lam):
        return qmap(x)

    return HamiltonianSystem(
        n=dim // 2,
        eval_B=eval_b,
        eval_B_lambda=eval_b_lambda,
        family="block",
        coefficients={"R": rm, "V": vm, "Q": qmap, "r": r},
    )


@dataclass(eq=False)
class DAEReduction:
    """Blocks of a differential-algebraic Sturm-Liouville system.

    The original unknown phi splits into a differential part of size m
    (with weight P11) and an algebraic part of size n - m coupled
    through V12 and V22.
    """

    m: int
    p11: Callable
    v11: Callable
    v12: Callable
    v22: Callable

    def __post_init__(self):
        self.p11 = _as_matrix_map(self.p11, size=self.m)
        self.v11 = _as_matrix_map(self.v11, size=self.m)
        self.v12 = _as_matrix_map(self.v12)
        self.v22 = _as_matrix_map(self.v22)
        k = self.v22(0.0).shape[0]
        if self.v12(0.0).shape != (self.m, k):
            raise DimensionMismatchError(
                f"V12 must be m x (n-m) = {self.m} x {k}, got {self.v12(0.0).shape}"
            )
        for x in _VALIDATION_XS:
            _check_selfadjoint("V11", self.v11(x), x)
            _check_selfadjoint("V22", self.v22(x), x)
            p = self.p11(x)
            _check_selfadjoint("P11", p, x)
            if abs(np.linalg.det(p)) < 1e-14:
                raise ValueError(f"P11({x}) is singular")

    @property
    def algebraic_dim(self) -> int:
        return self.v22(0.0).shape[0]

    @property
    def total_dim(self) -> int:
        return self.m + self.algebraic_dim

    def schur_v(self, x: float, lam: float) -> np.ndarray:
        """V(x; lam) = V11 + V12 (lam I - V22)^{-1} V12*."""
        v12 = self.v12(x)
        k = self.algebraic_dim
        resolvent = np.linalg.solve(lam * np.eye(k) - self.v22(x), v12.conj().T)
        return self.v11(x) + v12 @ resolvent

    def schur_v_lambda(self, x: float, lam: float) -> np.ndarray:
        """d/dlam of the Schur block: -V12 (lam I - V22)^{-2} V12*."""
        v12 = self.v12(x)
        k = self.algebraic_dim
        a = np.linalg.solve(lam * np.eye(k) - self.v22(x), v12.conj().T)
        return -(a.conj().T @ a)


def dae_essential_spectrum(red: DAEReduction, x_grid=None) -> list:
    """Per-branch ranges of the eigenvalues of V22(x), merged.

    Returns a list of closed intervals (lo, hi) whose union contains the
    essential spectrum of the algebraic block (sampled on the grid).
    """
    if x_grid is None:
        x_grid = np.linspace(0.0, 1.0, 401)
    branches = np.array([np.sort(np.linalg.eigvalsh(red.v22(x))) for x in x_grid])
    intervals = [(branches[:, k].min(), branches[:, k].max())
                 for k in range(branches.shape[1])]
    intervals.sort()
    merged = [intervals[0]]
    for lo, hi in intervals[1:]:
        if lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return [(float(lo), float(hi)) for lo, hi in merged]


def make_dae(red: DAEReduction, window) -> HamiltonianSystem:
    """Lambda-nonlinear reduced system of half-dimension m.

    B(x; lam) = [[lam I - V(x; lam), 0], [0, P11(x)^{-1}]] with the
    Schur block V = V11 + V12 (lam I - V22)^{-1} V12*. The window must
    stay clear of the essential spectrum of V22.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must satisfy lambda1 < lambda2")
    ess = dae_essential_spectrum(red)
    for a, b in ess:
        if lo <= b and a <= hi:
            raise WindowTouchesEssentialSpectrumError(
                f"window [{lo}, {hi}] meets essential-spectrum interval "
                f"[{a:.6g}, {b:.6g}]",
                intervals=ess,
            )
    m = red.m

    def eval_b(x, lam):
        b = np.zeros((2 * m, 2 * m), dtype=complex)
        b[:m, :m] = lam * np.eye(m) - red.schur_v(x, lam)
        b[m:, m:] = np.linalg.inv(red.p11(x))
        return b

    def eval_b_lambda(x, lam):
        b = np.zeros((2 * m, 2 * m), dtype=complex)
        b[:m, :m] = np.eye(m) - red.schur_v_lambda(x, lam)
        return b

    return HamiltonianSystem(
        n=m,
        eval_B=eval_b,
        eval_B_lambda=eval_b_lambda,
        interval=(lo, hi),
        family="dae",
        coefficients={"reduction": red, "essential_spectrum": ess},
    )


# ---------------------------------------------------------------------------
# dimension doubling for general boundary conditions
# ---------------------------------------------------------------------------


def trace_matrix(n: int) -> np.ndarray:
    """Constant reshuffle M taking (y(0); y(x)) to trace coordinates."""
    m = np.zeros((4 * n, 4 * n), dtype=complex)
    eye = np.eye(n)
    m[0:n, 0:n] = eye
    m[n : 2 * n, 2 * n : 3 * n] = eye
    m[2 * n : 3 * n, n : 2 * n] = -eye
    m[3 * n : 4 * n, 3 * n : 4 * n] = eye
    return m


def doubled_initial_frame(n: int) -> LagrangianFrame:
    """Constant frame (I; Phi(0)-blocks) starting the doubled forward path."""
    data = np.zeros((4 * n, 2 * n), dtype=complex)
    eye = np.eye(n)
    data[0:n, 0:n] = eye
    data[n : 2 * n, 0:n] = eye
    data[2 * n : 3 * n, n : 2 * n] = -eye
    data[3 * n : 4 * n, n : 2 * n] = eye
    return validate_frame(data)


def general_bc_target(bc: GeneralBC) -> LagrangianFrame:
    """Terminal frame M J4n Theta* for the doubled backward path."""
    n = bc.n
    return validate_frame(trace_matrix(n) @ j_double(n) @ bc.theta.conj().T)


def double_system(sys: HamiltonianSystem) -> HamiltonianSystem:
    """Doubled system of half-dimension 2n whose flow carries trace frames.

    The 4n x 4n coefficient matrix places the blocks of B in rows and
    columns 2 and 4 of the n x n block grid; block rows/columns 1 and 3
    are identically zero, so the first and third components of solutions
    are constant in x.
    """
    n = sys.n

    def lift(b):
        out = np.zeros((4 * n, 4 * n), dtype=complex)
        out[n : 2 * n, n : 2 * n] = b[:n, :n]
        out[n : 2 * n, 3 * n :] = b[:n, n:]
        out[3 * n :, n : 2 * n] = b[n:, :n]
        out[3 * n :, 3 * n :] = b[n:, n:]
        return out

    return HamiltonianSystem(
        n=2 * n,
        eval_B=lambda x, lam: lift(sys.eval_B(x, lam)),
        eval_B_lambda=lambda x, lam: lift(sys.eval_B_lambda(x, lam)),
        interval=sys.interval,
        family="doubled",
        coefficients={"base": sys},
    )


# ---------------------------------------------------------------------------
# assumption checks
# ---------------------------------------------------------------------------


@dataclass
class AssumptionCheck:
    name: str
    passed: object  # True / False / None (None = not numerically decidable)
    margin: float = math.nan
    worst: object = None
    note: str = ""


@dataclass
class AssumptionReport:
    checks: list
    lambda_window: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self):
        out = []
        for c in self.checks:
            if c.passed is None:
                status = "assumed"
            else:
                status = "pass" if c.passed else "FAIL"
            line = f"{c.name:<10} {status}"
            if not math.isnan(c.margin):
                line += f"  margin={c.margin:.3e}"
            if c.worst is not None:
                line += f"  worst at {c.worst}"
            if c.note:
                line += f"  ({c.note})"
            out.append(line)
        return out


def check_assumptions(sys: HamiltonianSystem, bc, lam1: float, lam2: float,
                      x_samples: int = 201) -> AssumptionReport:
    """Sampled verification of the structural hypotheses on a window.

    Checks, on a uniform x-grid:

    * non-negativity of B(x; lam2) - B(x; lam1) (difference condition),
    * positive definiteness of the cumulative flux integral
      int_0^x X1* B_lambda X1 (separated conditions) or the analogous
      integral with the fundamental solution (general conditions),
    * a sampled definiteness check on subinterval increments of the same
      integral (Atkinson-style, reported only),
    * window clearance from the algebraic essential spectrum for
      reduced differential-algebraic systems.

    The pointwise-uniqueness hypothesis is not decidable from samples
    and is reported as assumed.
    """
    from .propagation import fundamental_solution, integrate_frame

    if not lam1 < lam2:
        raise ValueError("need lambda1 < lambda2")
    xs = np.linspace(0.0, 1.0, x_samples)
    checks = []

    # difference condition: min eigenvalue of B(x;lam2) - B(x;lam1) over grid
    worst_x, worst_val = None, math.inf
    for x in xs:
        diff = sys.eval_B(x, lam2) - sys.eval_B(x, lam1)
        val = float(np.linalg.eigvalsh(diff).min())
        if val < worst_val:
            worst_val, worst_x = val, float(x)
    b1_tol = -1e-10 * max(1.0, abs(lam2 - lam1))
    checks.append(AssumptionCheck(
        name="B1",
        passed=bool(worst_val >= b1_tol),
        margin=worst_val,
        worst=f"x={worst_x:.4g}",
        note="min eig of B(x;l2)-B(x;l1) over grid",
    ))

    checks.append(AssumptionCheck(
        name="B2",
        passed=None,
        note="pointwise uniqueness of common solutions; not decidable from samples",
    ))

    # positivity of the cumulative flux integral
    lam_samples = (lam1, 0.5 * (lam1 + lam2), lam2)
    if isinstance(bc, SeparatedBC):
        name = "C1"
        def path_values(lam):
            path = integrate_frame(sys, lam, bc.left_frame(), 0.0,
                                   grid=np.linspace(0.0, 1.0, x_samples))
            return [f.data for f in path.frames]
    elif isinstance(bc, GeneralBC):
        name = "C2"
        def path_values(lam):
            sol = fundamental_solution(sys, lam, grid=np.linspace(0.0, 1.0, x_samples))
            return sol.matrices
    else:
        raise TypeError(f"unsupported boundary-condition type {type(bc)!r}")

    worst = None
    worst_val = math.inf
    increments_ok = True
    flux_failed = None
    for lam in lam_samples:
        try:
            mats = path_values(lam)
        except (MaslovCountError, np.linalg.LinAlgError) as exc:
            flux_failed = f"integration at lambda={lam:.6g} failed: {exc}"
            break
        integrand = [m.conj().T @ sys.eval_B_lambda(x, lam) @ m
                     for x, m in zip(xs, mats)]
        acc = np.zeros_like(integrand[0])
        cumulative = [acc]
        for k in range(1, len(xs)):
            acc = acc + 0.5 * (xs[k] - xs[k - 1]) * (integrand[k] + integrand[k - 1])
            cumulative.append(acc)
        for k in range(1, len(xs)):
            val = float(np.linalg.eigvalsh(cumulative[k]).min())
            if val < worst_val:
                worst_val, worst = val, f"x={xs[k]:.4g}, lambda={lam:.6g}"
        # Atkinson-style: increments over ~10 coarse subintervals
        step = max(1, (len(xs) - 1) // 10)
        for k in range(0, len(xs) - step, step):
            inc = cumulative[k + step] - cumulative[k]
            if np.linalg.eigvalsh(inc).min() <= 0:
                increments_ok = False
    if flux_failed is not None:
        # uninformative when the difference condition already failed,
        # otherwise an uncertifiable window must not pass the gate
        b1_failed = checks[0].passed is False
        checks.append(AssumptionCheck(name=name, passed=None if b1_failed else False,
                                      note=flux_failed))
        checks.append(AssumptionCheck(name="atkinson", passed=None, note=flux_failed))
    else:
        checks.append(AssumptionCheck(
            name=name,
            passed=bool(worst_val > 0),
            margin=worst_val,
            worst=worst,
            note="min eig of cumulative flux integral on (0,1]",
        ))
        checks.append(AssumptionCheck(
            name="atkinson",
            passed=bool(increments_ok),
            note="sampled subinterval definiteness; reported, not certified",
        ))

    if sys.family == "dae":
        ess = sys.coefficients.get("essential_spectrum", [])
        clear = all(hi < lam1 or lam2 < lo for lo, hi in ess)
        checks.append(AssumptionCheck(
            name="essential",
            passed=bool(clear),
            note=f"window vs algebraic spectrum {ess}",
        ))

    return AssumptionReport(checks=checks, lambda_window=(lam1, lam2))
