"""Linear algebra on the Lagrangian Grassmannian of C^{2n}.

A Lagrangian subspace is represented by a frame: a 2n x n complex matrix
X = (X; Y) with linearly independent columns satisfying X*Y - Y*X = 0.
Everything downstream (spectral flow, conjugate-point counting) reduces to
a handful of operations on frames:

* the Cayley-type factors (X + iY)(X - iY)^{-1} and their mirror image,
* the unitary pair matrix W of two frames, whose eigenvalue at -1 detects
  intersections of the two subspaces,
* rotation of the target frame so that spectral flow through any point of
  the unit circle becomes flow through -1,
* orthogonal projectors, the projector onto an intersection of ranges,
  and the projector-gap metric on subspaces.

All operations are pure functions of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np



from .errors import (
    DimensionMismatchError,
    NotLagrangianError,
    RankDeficientError,
)

#: Default absolute tolerance on the Lagrangian residual ||X*Y - Y*X||.
DEFAULT_FRAME_TOL = 1e-8

#: Default relative tolerance on column independence (times ||data||).
DEFAULT_RANK_TOL = 1e-8

#: Default phase window (radians) for matching unitary eigenvalues to a
#: point of the unit circle.
DEFAULT_ANGLE_TOL = 1e-6

#: Relative cutoff for singular values in pseudoinverse computations.
PINV_CUTOFF = 1e-10


def symplectic_j(n: int) -> np.ndarray:
    """Standard symplectic matrix J = [[0, -I], [I, 0]] of size 2n x 2n."""
    j = np.zeros((2 * n, 2 * n), dtype=complex)
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    return j


@dataclass(frozen=True, eq=False)
class LagrangianFrame:
    """Frame for a Lagrangian subspace of C^{2n}.

    Attributes
    ----------
    n : int
        Half-dimension; ``data`` has shape (2n, n).
    data : ndarray
        Complex frame matrix, coordinatized as upper block X and lower
        block Y. Treated as immutable after construction.
    """

    n: int
    data: np.ndarray

    def __post_init__(self):
        self.data.setflags(write=False)

    @property
    def upper(self) -> np.ndarray:
        return self.data[: self.n, :]

    @property
    def lower(self) -> np.ndarray:
        return self.data[self.n :, :]

    def lagrangian_residual(self) -> float:
        """2-norm of X*Y - Y*X (zero for an exact frame)."""
        x, y = self.upper, self.lower
        return float(np.linalg.norm(x.conj().T @ y - y.conj().T @ x, 2))

    def right_multiplied(self, c: np.ndarray) -> "LagrangianFrame":
        """Same subspace in the basis ``data @ c`` (c invertible n x n)."""
        return LagrangianFrame(self.n, np.ascontiguousarray(self.data @ c))


def validate_frame(candidate, rank_tol=None, frame_tol=DEFAULT_FRAME_TOL) -> LagrangianFrame:
    """Validate a 2n x n matrix as a Lagrangian frame.

    Raises
    ------
    RankDeficientError
        If the smallest singular value of the candidate is at most
        ``rank_tol`` (default ``1e-8 * ||candidate||``).
    NotLagrangianError
        If ``||X*Y - Y*X|| > frame_tol``; the exception carries the
        residual matrix.
    """
    data = np.asarray(candidate, dtype=complex)
    if data.ndim != 2 or data.shape[0] % 2 != 0 or data.shape[0] != 2 * data.shape[1]:
        raise DimensionMismatchError(
            f"frame candidate must be 2n x n, got shape {data.shape}"
        )
    n = data.shape[1]
    svals = np.linalg.svd(data, compute_uv=False)
    if rank_tol is None:
        rank_tol = DEFAULT_RANK_TOL * (svals[0] if svals.size else 1.0)
    if svals.size == 0 or svals[-1] <= rank_tol:
        raise RankDeficientError(
            f"frame columns dependent: smallest singular value "
            f"{svals[-1] if svals.size else 0.0:.3e} <= {rank_tol:.3e}",
            smallest_singular_value=float(svals[-1]) if svals.size else 0.0,
        )
    x, y = data[:n], data[n:]
    residual = x.conj().T @ y - y.conj().T @ x
    res_norm = float(np.linalg.norm(residual, 2))
    if res_norm > frame_tol:
        raise NotLagrangianError(
            f"Lagrangian residual {res_norm:.3e} exceeds {frame_tol:.3e}",
            residual=residual,
        )
    return LagrangianFrame(n, np.ascontiguousarray(data))


def frame_from_unitary(u: np.ndarray) -> LagrangianFrame:
    """Frame of the Lagrangian plane corresponding to a unitary u.

    The map u -> span((u + I)/2 ; (u - I)/(2i)) realizes the standard
    diffeomorphism between U(n) and the Lagrangian Grassmannian.
    """
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    x = (u + np.eye(n)) / 2.0
    y = (u - np.eye(n)) / (2.0j)
    return validate_frame(np.vstack([x, y]))


def _inverse_gram(frame: LagrangianFrame) -> np.ndarray:
    """(X*X)^{-1} via a Hermitian eigendecomposition of the Gram matrix."""
    gram = frame.data.conj().T @ frame.data
    vals, vecs = np.linalg.eigh(gram)
    return (vecs / vals) @ vecs.conj().T


def cayley_factor(frame: LagrangianFrame, sign: str = "+") -> np.ndarray:
    """Unitary Cayley factor of a frame.

    ``sign='+'`` returns (X + iY)(X - iY)^{-1}; ``sign='-'`` returns
    (X - iY)(X + iY)^{-1}. The inversion uses the identity
    (X -+ iY)^{-1} = M^2 (X* +- iY*) with M^2 = (X*X)^{-1}, which is
    exact for Lagrangian frames and better conditioned than a generic
    LU solve.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    x, y = frame.upper, frame.lower
    m2 = _inverse_gram(frame)
    if sign == "+":
        # (X - iY)^{-1} = M^2 (X* + iY*)
        return (x + 1j * y) @ m2 @ (x.conj().T + 1j * y.conj().T)
    # (X + iY)^{-1} = M^2 (X* - iY*)
    return (x - 1j * y) @ m2 @ (x.conj().T - 1j * y.conj().T)


def w_pair(frame1: LagrangianFrame, frame2: LagrangianFrame) -> np.ndarray:
    """Unitary pair matrix W of two frames.

    W = -(X1 + iY1)(X1 - iY1)^{-1} (X2 - iY2)(X2 + iY2)^{-1}. Its
    eigenvalue -1 has multiplicity equal to dim(l1 n l2); it depends on
    the two subspaces only, not on the choice of frames.
    """
    if frame1.n != frame2.n:
        raise DimensionMismatchError(
            f"frames have different half-dimensions {frame1.n} and {frame2.n}"
        )
    return -cayley_factor(frame1, "+") @ cayley_factor(frame2, "-")


def kernel_dim_at(w: np.ndarray, point: complex = -1.0, angle_tol: float = DEFAULT_ANGLE_TOL) -> int:
    """Number of eigenvalues of the unitary ``w`` at a point of S^1.

    Eigenvalues are compared to ``point`` by phase distance on the unit
    circle; everything within ``angle_tol`` radians counts. Clustered
    eigenvalues at the point are counted with multiplicity.
    """
    w = np.asarray(w, dtype=complex)
    vals = np.linalg.eigvals(w)
    target = np.angle(complex(point))
    d = np.angle(vals * np.exp(-1j * target))
    return int(np.count_nonzero(np.abs(d) <= angle_tol))


def rotate_target(frame2: LagrangianFrame, w0: complex) -> LagrangianFrame:
    """Rotate the target plane so flow through ``w0`` becomes flow through -1.

    Returns the frame i(1 - w0) X2 - (1 + w0) J X2, which is again
    Lagrangian; the spectral flow of the pair matrix through ``w0``
    equals the flow of the pair (l1, rotated) through -1.
    """
    w0 = complex(w0)
    if abs(abs(w0) - 1.0) > 1e-10:
        raise ValueError(f"|w0| must be 1, got {abs(w0):.6f}")
    j = symplectic_j(frame2.n)
    data = 1j * (1 - w0) * frame2.data - (1 + w0) * (j @ frame2.data)
    return validate_frame(data)


def orthogonal_projector(frame: LagrangianFrame) -> np.ndarray:
    """Orthogonal projector X (X*X)^{-1} X* onto the frame's column span."""
    return frame.data @ _inverse_gram(frame) @ frame.data.conj().T


def intersection_projector(p1: np.ndarray, p2: np.ndarray, cutoff: float = PINV_CUTOFF) -> np.ndarray:
    """Orthogonal projector onto ran(p1) n ran(p2).

    Computed as 2 p1 (p1 + p2)^+ p2 with singular values below
    ``cutoff * sigma_max`` treated as zero in the pseudoinverse. An
    empty intersection yields the zero matrix.
    """
    p1 = np.asarray(p1, dtype=complex)
    p2 = np.asarray(p2, dtype=complex)
    if p1.shape != p2.shape:
        raise DimensionMismatchError(
            f"projectors have different shapes {p1.shape} and {p2.shape}"
        )
    pinv = np.linalg.pinv(p1 + p2, rcond=cutoff, hermitian=True)
    return 2.0 * p1 @ pinv @ p2


def grassmann_distance(frame1: LagrangianFrame, frame2: LagrangianFrame) -> float:
    """Projector-gap distance ||P1 - P2|| (operator 2-norm).

    Frame-choice independent, symmetric, and bounded by 1 for
    subspaces of equal dimension.
    """
    if frame1.n != frame2.n:
        raise DimensionMismatchError(
            f"frames have different half-dimensions {frame1.n} and {frame2.n}"
        )
    diff = orthogonal_projector(frame1) - orthogonal_projector(frame2)
    return float(np.linalg.norm(diff, 2))


def pairing_rank_deficiency(frame1: LagrangianFrame, frame2: LagrangianFrame,
                            rel_tol: float = 1e-8) -> int:
    """Numerical dim ker(X1* J X2) via SVD of the pairing matrix.

    The cutoff is scaled by the product of the frame norms (the natural
    bound on the pairing), not by the pairing's own largest singular
    value, so a fully degenerate pair reads as rank zero.
    """
    j = symplectic_j(frame1.n)
    pairing = frame1.data.conj().T @ j @ frame2.data
    svals = np.linalg.svd(pairing, compute_uv=False)
    if svals.size == 0:
        return 0
    scale = max(np.linalg.norm(frame1.data, 2) * np.linalg.norm(frame2.data, 2), 1e-300)
    return int(np.count_nonzero(svals <= rel_tol * scale))


def subspace_intersection_dim(frame1: LagrangianFrame, frame2: LagrangianFrame,
                              rel_tol: float = 1e-8) -> int:
    """dim(l1 n l2) from the SVD of the stacked orthonormal bases.

    Independent of the pair-matrix route: orthonormalize both frames,
    stack them side by side, and read the intersection dimension off the
    singular values at sqrt(2) (each common direction contributes one).
    """
    q1 = np.linalg.qr(frame1.data)[0]
    q2 = np.linalg.qr(frame2.data)[0]
    svals = np.linalg.svd(np.hstack([q1, q2]), compute_uv=False)
    # stacked basis has n + n columns in C^{2n}; rank loss = intersection dim
    return int(np.count_nonzero(svals <= rel_tol * max(svals[0], 1e-300)))


# ---------------------------------------------------------------------------
# random generators (used by the property and acceptance suites)
# ---------------------------------------------------------------------------


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary from the QR of a complex Ginibre matrix."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_lagrangian_frame(n: int, rng: np.random.Generator,
                            skew_basis: bool = True) -> LagrangianFrame:
    """Random Lagrangian frame of C^{2n}.

    Drawn through the unitary parametrization of the Grassmannian, then
    optionally right-multiplied by a random invertible matrix so the
    returned frame is not orthonormal.
    """
    frame = frame_from_unitary(random_unitary(n, rng))
    if skew_basis:
        c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        c += 3.0 * np.eye(n)  # keep comfortably invertible
        frame = validate_frame(frame.data @ c)
    return frame


def random_symplectic_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random 2n x 2n unitary commuting with J (maps Lagrangians to
    Lagrangians and preserves intersections)."""
    from scipy.linalg import expm

    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    k1 = (a - a.conj().T) / 2.0
    b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    k2 = (b + b.conj().T) / 2.0
    gen = np.block([[k1, -k2], [k2, k1]])
    return expm(gen)


def random_frame_pair_with_intersection(n: int, k: int, rng: np.random.Generator):
    """Pair of random Lagrangian frames whose subspaces intersect in
    exactly k dimensions (generically).

    Both planes contain the same k coordinate directions, their
    complements are independent random Lagrangian planes of the reduced
    problem, and the whole picture is conjugated by a random unitary
    commuting with J.
    """
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k == 0:
        return (random_lagrangian_frame(n, rng), random_lagrangian_frame(n, rng))
    frames = []
    for _ in range(2):
        data = np.zeros((2 * n, n), dtype=complex)
        data[:k, :k] = np.eye(k)
        if n - k:
            sub = random_lagrangian_frame(n - k, rng, skew_basis=False)
            data[k:n, k:] = sub.upper
            data[n + k :, k:] = sub.lower
        frames.append(data)
    u = random_symplectic_unitary(n, rng)
    c1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + 3.0 * np.eye(n)
    c2 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + 3.0 * np.eye(n)
    return (validate_frame(u @ frames[0] @ c1), validate_frame(u @ frames[1] @ c2))
