"""Bundled example systems.

Closed-form classics (scalar Sturm-Liouville and scalar Dirac) plus the
three oscillatory demonstration systems with trigonometric coefficients
that exercise every supported family, and a seeded factory of random
smooth instances for the cross-validation suites.
"""

from __future__ import annotations

import numpy as np

from .systems import (
    DAEReduction,
    SeparatedBC,
    make_dae,
    make_dirac,
    make_sturm_liouville,
)


def scalar_sturm_liouville():
    """-phi'' = lambda phi with Dirichlet ends; eigenvalues (k pi)^2."""
    sys = make_sturm_liouville(P=1.0, V=0.0, Q=1.0)
    bc = SeparatedBC(alpha=np.array([[1.0, 0.0]]), beta=np.array([[1.0, 0.0]]))
    return sys, bc


def scalar_dirac():
    """J y' = lambda y with y1 pinned at both ends; eigenvalues k pi, k in Z."""
    sys = make_dirac(Q=np.eye(2), V=np.zeros((2, 2)))
    bc = SeparatedBC(alpha=np.array([[1.0, 0.0]]), beta=np.array([[1.0, 0.0]]))
    return sys, bc


def _bump(x):
    return 0.7 * np.cos(6 * np.pi * x) / (2 + np.cos(6 * np.pi * x))


def _ripple(x):
    return np.cos(np.pi * x) / (2 + np.cos(4 * np.pi * x))


def dirac_demo():
    """Oscillatory 4x4 Dirac system with identity weight."""

    def v(x):
        return np.array([
            [0.13 + _bump(x), _ripple(x), 0.0, 0.0],
            [_ripple(x), 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ], dtype=complex)

    sys = make_dirac(Q=np.eye(4), V=v)
    alpha = np.hstack([np.zeros((2, 2)), np.eye(2)])
    bc = SeparatedBC(alpha=alpha, beta=alpha.copy())
    return sys, bc


def sturm_liouville_demo():
    """Coupled 2-component Sturm-Liouville system with Robin-type ends."""

    def v(x):
        off = -18.0 * np.sin(3 * x) + 0.0081 * x**2
        return np.array([[-2.7, off], [off, 0.0]], dtype=complex)

    sys = make_sturm_liouville(P=np.eye(2), V=v, Q=9.0 * np.eye(2))
    a = np.hstack([np.eye(2) / np.sqrt(2.0), np.eye(2) / (3.0 * np.sqrt(2.0))])
    bc = SeparatedBC(alpha=a, beta=a.copy())
    return sys, bc


def dae_demo(window=(-10.0, 0.0)):
    """Differential-algebraic example: 2 differential + 2 algebraic
    components; the algebraic block keeps its spectrum inside
    [1 - 0.8 sin 1, 1], so windows must stay to the left of it."""

    def v11(x):
        off = -_ripple(x)
        return np.array([[-8.0 - _bump(x), off], [off, 1.0]], dtype=complex)

    red = DAEReduction(
        m=2,
        p11=np.eye(2),
        v11=v11,
        v12=np.eye(2),
        v22=lambda x: (1.0 - 0.8 * x * np.sin(x)) * np.eye(2, dtype=complex),
    )
    sys = make_dae(red, window)
    alpha = np.hstack([np.zeros((2, 2)), np.eye(2)])
    bc = SeparatedBC(alpha=alpha, beta=alpha.copy())
    return sys, bc


# ---------------------------------------------------------------------------
# random smooth instances
# ---------------------------------------------------------------------------


def _random_selfadjoint_trig(n, rng, scale=1.0, waves=2):
    """Smooth self-adjoint matrix map built from a few Fourier modes."""
    coeffs = []
    for _ in range(waves + 1):
        a = rng.standard_normal((n, n))
        coeffs.append(scale * (a + a.T) / 2.0)

    def f(x):
        out = coeffs[0].astype(complex).copy()
        for k, c in enumerate(coeffs[1:], start=1):
            out += c * np.cos(k * np.pi * x + k)
        return out

    return f


def _random_spd_trig(n, rng, floor=0.5, scale=0.4):
    base = rng.standard_normal((n, n))
    base = base @ base.T / n + floor * np.eye(n)
    wob = rng.standard_normal((n, n))
    wob = scale * (wob + wob.T) / (2.0 * n)

    def f(x):
        return (base + wob * np.sin(2 * np.pi * x)).astype(complex)

    # keep the floor: shrink the wobble until positive on a sample grid
    while min(np.linalg.eigvalsh(f(x)).min() for x in np.linspace(0, 1, 11)) < 0.1:
        wob *= 0.5
    return f


def random_instance(seed: int):
    """One random smooth Sturm-Liouville or Dirac instance.

    Returns ``(label, sys, bc)``. Sturm-Liouville draws use Dirichlet or
    Robin ends (kept within what the finite-difference oracle supports);
    Dirac draws use a random Lagrangian boundary plane at each end.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3))
    if rng.random() < 0.5:
        q = _random_spd_trig(n, rng, floor=1.0)
        v = _random_selfadjoint_trig(n, rng, scale=2.0)
        sys = make_sturm_liouville(P=np.eye(n), V=v, Q=q)
        blocks = []
        for _ in range(2):
            if rng.random() < 0.5:
                blocks.append(np.hstack([np.eye(n), np.zeros((n, n))]))
            else:
                r = rng.standard_normal((n, n))
                blocks.append(np.hstack([(r + r.T) / 2.0, np.eye(n)]))
        bc = SeparatedBC(alpha=blocks[0], beta=blocks[1])
        return f"sl-random-{seed}", sys, bc
    q = _random_spd_trig(2 * n, rng, floor=1.0, scale=0.3)
    v = _random_selfadjoint_trig(2 * n, rng, scale=1.5)
    sys = make_dirac(Q=q, V=v)
    from .frames import random_lagrangian_frame, symplectic_j

    j = symplectic_j(n)
    planes = [random_lagrangian_frame(n, rng, skew_basis=False) for _ in range(2)]
    # rows of X* J annihilate exactly the plane spanned by X
    bc = SeparatedBC(alpha=planes[0].data.conj().T @ j,
                     beta=planes[1].data.conj().T @ j)
    return f"dirac-random-{seed}", sys, bc
