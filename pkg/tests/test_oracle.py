"""Finite-difference oracle and the standard fixed-target count."""

import numpy as np
import pytest

from maslov_count import catalog
from maslov_count.errors import AmbiguousNearEndpointError, UnsupportedForOracleError
from maslov_count.oracle import fd_count, fd_spectrum, standard_maslov_count
from maslov_count.propagation import default_grid
from maslov_count.systems import SeparatedBC, make_block

GRID = default_grid(801)


class TestFdSL:
    def test_classic_tridiagonal_spectrum(self):
        # scalar Dirichlet problem reproduces (2/h^2)(1 - cos(k pi h))
        sys, bc = catalog.scalar_sturm_liouville()
        h = 1.0 / 400.0
        evs = fd_spectrum(sys, bc, h=h)
        k = np.arange(1, 9)
        expect = (2.0 / h**2) * (1.0 - np.cos(k * np.pi * h))
        assert np.abs(evs[:8] - expect).max() < 1e-8

    def test_window_count(self):
        sys, bc = catalog.scalar_sturm_liouville()
        rep = fd_count(sys, bc, 0.0, 50.0, h=1.0 / 400.0)
        assert rep.count == rep.count_coarse == 2
        assert np.allclose(rep.eigenvalues_in_window,
                           [np.pi**2, 4 * np.pi**2], atol=1e-3)

    def test_convergence_second_order(self):
        sys, bc = catalog.scalar_sturm_liouville()
        errs = [abs(fd_spectrum(sys, bc, h=h)[0] - np.pi**2)
                for h in (1 / 100, 1 / 200)]
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_robin_demo_consistent_with_renormalized(self):
        from maslov_count.counting import renormalized_count

        sys, bc = catalog.sturm_liouville_demo()
        rep = fd_count(sys, bc, 0.5, 4.5)
        ren = renormalized_count(sys, bc, 0.5, 4.5, x_grid=GRID)
        assert rep.count == rep.count_coarse == ren.count


class TestFdDirac:
    def test_scalar_window(self):
        sys, bc = catalog.scalar_dirac()
        rep = fd_count(sys, bc, 0.5, 7.0, h=1.0 / 200.0)
        assert rep.count == rep.count_coarse == 2
        assert np.allclose(rep.eigenvalues_in_window, [np.pi, 2 * np.pi], atol=1e-3)

    def test_convergence_second_order(self):
        sys, bc = catalog.scalar_dirac()

        def nearest_pi(h):
            evs = fd_spectrum(sys, bc, h=h)
            return evs[np.argmin(np.abs(evs - np.pi))]

        errs = [abs(nearest_pi(h) - np.pi) for h in (1 / 100, 1 / 200)]
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_ambiguous_endpoint_flagged(self):
        sys, bc = catalog.scalar_dirac()
        # pi sits exactly on the window edge: drift exceeds the distance
        with pytest.raises(AmbiguousNearEndpointError):
            fd_count(sys, bc, np.pi, 7.0, h=1.0 / 100.0)
        rep = fd_count(sys, bc, np.pi, 7.0, h=1.0 / 100.0, strict=False)
        assert rep.ambiguous


class TestFdDAE:
    def test_block_form_agrees_with_reduced_count(self):
        from maslov_count.counting import renormalized_count

        sys, bc = catalog.dae_demo(window=(-10.0, 0.0))
        rep = fd_count(sys, bc, -10.0, 0.0)
        ren = renormalized_count(sys, bc, -10.0, 0.0, x_grid=GRID)
        assert rep.count == rep.count_coarse == ren.count

    def test_spectrum_shows_algebraic_cluster(self):
        sys, bc = catalog.dae_demo(window=(-10.0, 0.0))
        evs = fd_spectrum(sys, bc, h=1 / 100)
        lo, hi = sys.coefficients["essential_spectrum"][0]
        inside = evs[(evs >= lo - 1e-6) & (evs <= hi + 1e-6)]
        assert inside.size > 50  # dense discrete stand-in for the band


class TestOracleScope:
    def test_block_family_not_covered(self):
        sys = make_block(R=np.eye(1), V=np.zeros((4, 4)), r=1)
        bc = SeparatedBC(alpha=np.hstack([np.eye(2), np.zeros((2, 2))]),
                         beta=np.hstack([np.eye(2), np.zeros((2, 2))]))
        with pytest.raises(UnsupportedForOracleError):
            fd_count(sys, bc, 0.0, 1.0)


class TestStandardMaslovCount:
    def test_scalar_sl_window(self):
        sys, bc = catalog.scalar_sturm_liouville()
        count, details = standard_maslov_count(sys, bc, 0.0, 50.0, x_grid=GRID)
        assert count == 2
        # conjugate points against the frozen plane rotate clockwise here
        assert details["lambda1"]["maslov"].index == -1
        assert details["lambda2"]["maslov"].index == -3
        for audit in details["lambda2"]["direction_audits"]:
            assert audit.m_plus == 0

    def test_empty_window_indices_equal(self):
        sys, bc = catalog.scalar_sturm_liouville()
        count, details = standard_maslov_count(sys, bc, 50.0, 80.0, x_grid=GRID)
        assert count == 0
        assert details["lambda1"]["maslov"].index == details["lambda2"]["maslov"].index

    def test_agrees_with_renormalized_on_dirac_demo(self):
        from maslov_count.counting import renormalized_count

        sys, bc = catalog.dirac_demo()
        window = (-2.0, 4.5)
        count, _ = standard_maslov_count(sys, bc, *window, x_grid=GRID)
        ren = renormalized_count(sys, bc, *window, x_grid=GRID)
        fd = fd_count(sys, bc, *window)
        assert count == ren.count == fd.count
