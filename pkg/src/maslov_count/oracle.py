"""Independent spectral counts for cross-validation.

Two routes that share nothing with the conjugate-point machinery:

* a dense Hermitian finite-difference eigensolver (central differences
  for second-order Sturm-Liouville and differential-algebraic forms, a
  midpoint box scheme for first-order Dirac forms), reported at two
  mesh sizes so near-endpoint eigenvalues can be flagged, and
* the classical fixed-target Maslov computation, which counts the same
  window as a difference of two indices against the frozen plane
  spanned by J beta* and needs no monotonicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import AmbiguousNearEndpointError, UnsupportedForOracleError
from .flow import UnitaryPath, crossing_direction, eigenphase_path, maslov_index
from .propagation import constant_path, default_grid, integrate_frame
from .systems import HamiltonianSystem, SeparatedBC

_DEFAULT_H = 1.0 / 200.0
_DIRICHLET_NORM_TOL = 1e-12
_ROBIN_MIN_SV = 1e-8
_MASS_NULL_CUTOFF = 1e-10


@dataclass
class OracleReport:
    """Finite-difference eigenvalue count over a window.

    ``count`` comes from the fine mesh (h/2); ``count_coarse`` from h.
    ``ambiguous`` lists eigenvalues sitting within ten times the
    mesh-to-mesh drift of a window endpoint.
    """

    count: int
    eigenvalues_in_window: np.ndarray
    h: float
    matrix_dim: int
    count_coarse: int
    ambiguous: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# boundary-condition normalization for the second-order scheme
# ---------------------------------------------------------------------------


def _bc_kind(block):
    """Classify (a1 a2) rows: 'dirichlet' (a2 = 0) or 'robin' (a2 invertible)."""
    m = block.shape[0]
    a1, a2 = block[:, :m], block[:, m:]
    scale = max(np.linalg.norm(block, 2), 1.0)
    if np.linalg.norm(a2, 2) <= _DIRICHLET_NORM_TOL * scale:
        return "dirichlet", None
    svals = np.linalg.svd(a2, compute_uv=False)
    if svals[-1] > _ROBIN_MIN_SV * scale:
        gamma = np.linalg.solve(a2, a1)
        gamma = 0.5 * (gamma + gamma.conj().T)  # exact by self-adjointness of the bc
        return "robin", gamma
    raise UnsupportedForOracleError(
        "finite-difference oracle needs the derivative block of a separated "
        "boundary condition to be zero or invertible"
    )


def _second_order_pencil(p_map, v_map, q_map, alpha, beta, n_steps, diff_dim):
    """Central-difference pencil for -(P phi')' + V phi = lambda Q phi.

    Nodes 0..N with trapezoid weights; Robin conditions enter as
    Hermitian boundary terms on the first ``diff_dim`` components,
    Dirichlet conditions eliminate those components at the end nodes.
    Returns (A, M) with A Hermitian and M Hermitian positive definite.
    """
    n_nodes = n_steps + 1
    h = 1.0 / n_steps
    xs = np.linspace(0.0, 1.0, n_nodes)
    size0 = q_map(0.0).shape[0]

    kind_a, gamma_a = _bc_kind(alpha)
    kind_b, gamma_b = _bc_kind(beta)

    dim = size0 * n_nodes
    a = np.zeros((dim, dim), dtype=complex)
    m = np.zeros((dim, dim), dtype=complex)

    def sl(j):
        return slice(size0 * j, size0 * (j + 1))

    for j in range(n_steps):
        pm = p_map(xs[j] + 0.5 * h)
        k = pm / h
        a[sl(j), sl(j)] += k
        a[sl(j + 1), sl(j + 1)] += k
        a[sl(j), sl(j + 1)] -= k
        a[sl(j + 1), sl(j)] -= k
    for j in range(n_nodes):
        w = h if 0 < j < n_steps else h / 2.0
        a[sl(j), sl(j)] += w * v_map(xs[j])
        m[sl(j), sl(j)] += w * q_map(xs[j])

    d = diff_dim
    if kind_a == "robin":
        a[:d, :d] -= gamma_a
    if kind_b == "robin":
        a[sl(n_steps), sl(n_steps)][:d, :d] += gamma_b

    keep = np.ones(dim, dtype=bool)
    if kind_a == "dirichlet":
        keep[:d] = False
    if kind_b == "dirichlet":
        keep[size0 * n_steps : size0 * n_steps + d] = False
    a = a[np.ix_(keep, keep)]
    m = m[np.ix_(keep, keep)]
    return 0.5 * (a + a.conj().T), 0.5 * (m + m.conj().T)


# ---------------------------------------------------------------------------
# midpoint box scheme for first-order forms
# ---------------------------------------------------------------------------


def _box_pencil(q_map, v_map, bc: SeparatedBC, n_steps):
    """Midpoint-scheme pencil for J y' = (lambda Q + V) y.

    Unknowns are nodal values with the endpoint values constrained to
    the boundary planes; the midpoint equations are tested against
    midpoint averages, which makes both matrices Hermitian on the
    constrained space (the boundary terms cancel exactly because the
    planes are Lagrangian). Pure alternating modes lie in the common
    kernel of the pencil and are deflated exactly.
    """
    from .frames import symplectic_j

    n2 = q_map(0.0).shape[0]
    n = n2 // 2
    j_mat = symplectic_j(n)
    h = 1.0 / n_steps
    n_nodes = n_steps + 1

    k_alpha = np.linalg.qr(bc.left_frame().data)[0]
    k_beta = np.linalg.qr(bc.right_frame().data)[0]

    # dof layout: [c0 (n), y_1 .. y_{N-1} (2n each), cN (n)]
    dof = n + (n_nodes - 2) * n2 + n

    def embed_cols(j):
        """Columns of the embedding matrix for node j, and its dof slice."""
        if j == 0:
            return k_alpha, slice(0, n)
        if j == n_steps:
            return k_beta, slice(dof - n, dof)
        start = n + (j - 1) * n2
        return np.eye(n2, dtype=complex), slice(start, start + n2)

    a = np.zeros((dof, dof), dtype=complex)
    m = np.zeros((dof, dof), dtype=complex)
    for jmid in range(n_steps):
        x = (jmid + 0.5) * h
        bv = v_map(x)
        bq = q_map(x)
        e_lo, s_lo = embed_cols(jmid)
        e_hi, s_hi = embed_cols(jmid + 1)
        # contributions of h * (J D - V S)(y), S(u) and h * (Q S)(y), S(u)
        blocks = ((s_lo, e_lo, -1.0), (s_hi, e_hi, 1.0))
        for (su, eu, _sgn_u) in blocks:
            for (sy, ey, sgn_y) in blocks:
                avg_u = 0.5 * eu
                diff_y = (sgn_y / h) * ey
                avg_y = 0.5 * ey
                a[su, sy] += h * avg_u.conj().T @ (j_mat @ diff_y - bv @ avg_y)
                m[su, sy] += h * avg_u.conj().T @ (bq @ avg_y)
    a = 0.5 * (a + a.conj().T)
    m = 0.5 * (m + m.conj().T)

    # exact deflation of the common kernel (alternating modes)
    vals, vecs = np.linalg.eigh(m)
    keep = vals > _MASS_NULL_CUTOFF * vals[-1]
    w = vecs[:, keep]
    return w.conj().T @ a @ w, w.conj().T @ m @ w


# ---------------------------------------------------------------------------
# dispatch and counting
# ---------------------------------------------------------------------------


def _spectrum(sys: HamiltonianSystem, bc: SeparatedBC, n_steps: int):
    fam = sys.family
    if fam == "sturm_liouville":
        c = sys.coefficients
        a, m = _second_order_pencil(c["P"], c["V"], c["Q"], bc.alpha, bc.beta,
                                    n_steps, sys.n)
    elif fam == "dae":
        red = sys.coefficients["reduction"]
        nt = red.total_dim
        mm = red.m

        def p_map(x):
            p = np.zeros((nt, nt), dtype=complex)
            p[:mm, :mm] = red.p11(x)
            return p

        def v_map(x):
            v = np.zeros((nt, nt), dtype=complex)
            v[:mm, :mm] = red.v11(x)
            v[:mm, mm:] = red.v12(x)
            v[mm:, :mm] = red.v12(x).conj().T
            v[mm:, mm:] = red.v22(x)
            return v

        a, m = _second_order_pencil(p_map, v_map,
                                    lambda x: np.eye(nt, dtype=complex),
                                    bc.alpha, bc.beta, n_steps, mm)
    elif fam == "dirac":
        c = sys.coefficients
        a, m = _box_pencil(c["Q"], c["V"], bc, n_steps)
    elif fam == "custom":
        # accept lambda-linear B = lambda Q + V with Q positive definite
        q_probe = sys.eval_B(0.5, 1.0) - sys.eval_B(0.5, 0.0)
        q_probe2 = sys.eval_B(0.5, 2.0) - sys.eval_B(0.5, 1.0)
        if np.linalg.norm(q_probe - q_probe2, 2) > 1e-10 * max(1.0, np.linalg.norm(q_probe, 2)) \
                or np.linalg.eigvalsh(q_probe).min() <= 0:
            raise UnsupportedForOracleError(
                "custom systems must be lambda-linear with positive definite weight"
            )
        a, m = _box_pencil(lambda x: sys.eval_B(x, 1.0) - sys.eval_B(x, 0.0),
                           lambda x: sys.eval_B(x, 0.0), bc, n_steps)
    else:
        raise UnsupportedForOracleError(
            f"no finite-difference oracle for family {fam!r}"
        )
    return np.sort(scipy.linalg.eigh(a, m, eigvals_only=True).real), a.shape[0]


def report_from_spectra(coarse, fine, lam1: float, lam2: float, h: float,
                        matrix_dim: int, strict: bool = True) -> OracleReport:
    """Assemble a window report from precomputed spectra at h and h/2."""
    coarse = np.asarray(coarse)
    fine = np.asarray(fine)
    inside = fine[(fine >= lam1) & (fine < lam2)]
    count_fine = int(inside.size)
    count_coarse = int(np.count_nonzero((coarse >= lam1) & (coarse < lam2)))

    span = lam2 - lam1
    near = fine[(fine >= lam1 - span) & (fine < lam2 + span)]
    ambiguous = []
    for ev in near:
        drift = float(np.abs(coarse - ev).min()) if coarse.size else np.inf
        if min(abs(ev - lam1), abs(ev - lam2)) < 10.0 * drift:
            ambiguous.append(float(ev))
    report = OracleReport(count=count_fine, eigenvalues_in_window=inside,
                          h=h / 2.0, matrix_dim=matrix_dim,
                          count_coarse=count_coarse, ambiguous=ambiguous)
    if strict and ambiguous:
        raise AmbiguousNearEndpointError(
            f"eigenvalues {ambiguous} are too close to the window endpoints "
            f"for mesh h={h:g}",
            eigenvalues=ambiguous,
        )
    return report


def fd_count(sys: HamiltonianSystem, bc: SeparatedBC, lam1: float, lam2: float,
             h: float = _DEFAULT_H, strict: bool = True) -> OracleReport:
    """Count eigenvalues in [lambda1, lambda2) by dense FD eigensolves.

    Solves the Hermitian (or generalized Hermitian with the system's
    weight) eigenproblem at mesh sizes h and h/2. An eigenvalue within
    ten times its mesh-to-mesh drift of a window endpoint raises
    AmbiguousNearEndpointError (or is reported with ``strict=False``).
    """
    if not isinstance(bc, SeparatedBC):
        raise UnsupportedForOracleError("the FD oracle handles separated conditions only")
    n_steps = int(round(1.0 / h))
    coarse, _ = _spectrum(sys, bc, n_steps)
    fine, dim = _spectrum(sys, bc, 2 * n_steps)
    return report_from_spectra(coarse, fine, lam1, lam2, h, dim, strict=strict)


def fd_spectrum(sys: HamiltonianSystem, bc: SeparatedBC, h: float = _DEFAULT_H):
    """Full sorted FD spectrum at mesh size h (helper for window design)."""
    evals, _ = _spectrum(sys, bc, int(round(1.0 / h)))
    return evals


def standard_maslov_count(sys: HamiltonianSystem, bc: SeparatedBC,
                          lam1: float, lam2: float, x_grid=None,
                          with_directions: bool = True):
    """Window count against the frozen target plane spanned by J beta*.

    Computes the Maslov index of the forward path against the fixed
    target at both window edges and returns their difference
    Mas(lambda1) - Mas(lambda2), which equals the spectral count of
    [lambda1, lambda2). Crossings here need not be monotone; each is
    audited through the projected difference with the zero coefficient
    standing in for the frozen target.

    Returns ``(count, details)``.
    """
    if not isinstance(bc, SeparatedBC):
        raise UnsupportedForOracleError(
            "the standard fixed-target count handles separated conditions only"
        )
    if x_grid is None:
        x_grid = default_grid()
    target = bc.right_frame()
    details = {}
    indices = {}
    zero = np.zeros((2 * sys.n, 2 * sys.n), dtype=complex)
    for tag, lam in (("lambda1", lam1), ("lambda2", lam2)):
        path = integrate_frame(sys, lam, bc.left_frame(), 0.0, x_grid)
        epath = eigenphase_path(UnitaryPath.from_frame_paths(
            path, constant_path(target, x_grid)))
        result = maslov_index(epath)
        audits = []
        if with_directions:
            b1 = lambda x, _lam=lam: sys.eval_B(x, _lam)
            b2 = lambda x: zero
            for rec in result.crossings:
                if rec.side == "left-endpoint" and rec.location <= 1e-12:
                    f1 = path.frames[0]
                else:
                    f1 = path.frame_at(rec.location)
                audits.append(crossing_direction(b1, b2, f1, target, rec.location))
        indices[tag] = result.index
        details[tag] = {"maslov": result, "direction_audits": audits}
    count = indices["lambda1"] - indices["lambda2"]
    details["count"] = int(count)
    return int(count), details
