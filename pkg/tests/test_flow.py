"""Spectral flow: endpoint conventions, directions, box audit."""

import numpy as np
import pytest

from maslov_count import catalog
from maslov_count.errors import (
    IndefiniteDirectionError,
    NonIsolatedIntersectionError,
    RefinementLimitError,
    ShelfMismatchError,
)
from maslov_count.flow import (
    UnitaryPath,
    crossing_direction,
    detect_crossings,
    eigenphase_path,
    maslov_box_audit,
    maslov_index,
    rotated_direction,
    rotation_conjugation,
)
from maslov_count.frames import (
    random_lagrangian_frame,
    random_unitary,
    validate_frame,
)
from maslov_count.propagation import canonical_frames, default_grid


def synthetic_phase_path(phase_fn, t_grid, n=1):
    """Raw unitary path with evaluator from prescribed scalar phases."""
    def w(t):
        return np.diag([np.exp(1j * phase_fn(t))] * n)

    return UnitaryPath(ts=np.asarray(t_grid), mats=[w(t) for t in t_grid],
                       evaluator=w)


class TestConventions:
    """The arrival/departure table on synthetic scalar paths."""

    def test_ccw_arrival_at_right_endpoint_counts(self):
        # phase pi/2 + t: reaches pi exactly at the right endpoint
        grid = np.linspace(0.0, np.pi / 2, 41)
        path = synthetic_phase_path(lambda t: np.pi / 2 + t, grid)
        assert maslov_index(path).index == 1

    def test_ccw_departure_from_left_endpoint_does_not_count(self):
        grid = np.linspace(0.0, np.pi / 2, 41)
        path = synthetic_phase_path(lambda t: np.pi + t, grid)
        assert maslov_index(path).index == 0

    def test_cw_departure_from_left_endpoint_decrements(self):
        grid = np.linspace(0.0, np.pi / 2, 41)
        path = synthetic_phase_path(lambda t: np.pi - t, grid)
        assert maslov_index(path).index == -1

    def test_cw_arrival_at_right_endpoint_does_not_count(self):
        grid = np.linspace(0.0, np.pi / 2, 41)
        path = synthetic_phase_path(lambda t: 3 * np.pi / 2 - t, grid)
        assert maslov_index(path).index == 0

    def test_interior_ccw_crossing(self):
        grid = np.linspace(0.0, 1.0, 41)
        path = synthetic_phase_path(lambda t: np.pi - 0.5 + t, grid)
        result = maslov_index(path)
        assert result.index == 1
        (rec,) = result.crossings
        assert rec.side == "interior"
        assert rec.direction == 1
        assert abs(rec.location - 0.5) < 1e-9

    def test_interior_transient_touch_nets_zero(self):
        grid = np.linspace(0.0, 1.0, 81)
        path = synthetic_phase_path(lambda t: np.pi - 2.0 * abs(t - 0.5), grid)
        assert maslov_index(path).index == 0

    def test_multiple_windings_counted_per_level(self):
        grid = np.linspace(0.0, 1.0, 201)
        path = synthetic_phase_path(lambda t: 4 * np.pi * t, grid)
        # phases sweep 0 .. 4pi: crosses pi and 3pi, both ccw
        assert maslov_index(path).index == 2

    def test_multiplicity_adds_across_tracks(self):
        grid = np.linspace(0.0, 1.0, 41)
        path = synthetic_phase_path(lambda t: np.pi - 0.5 + t, grid, n=3)
        result = maslov_index(path)
        assert result.index == 3
        assert result.crossings[0].multiplicity == 3

    def test_pinned_track_contributes_nothing(self):
        grid = np.linspace(0.0, 1.0, 11)

        def w(t):
            return np.diag([-1.0 + 0.0j, np.exp(1j * (0.2 + 0.1 * t))])

        path = UnitaryPath(ts=grid, mats=[w(t) for t in grid], evaluator=w)
        assert maslov_index(path).index == 0


class TestEigenphasePath:
    def test_constant_pair_constant_phases(self):
        rng = np.random.default_rng(5)
        f1 = random_lagrangian_frame(2, rng)
        f2 = random_lagrangian_frame(2, rng)
        from maslov_count.frames import w_pair

        w = w_pair(f1, f2)
        grid = np.linspace(0, 1, 11)
        epath = eigenphase_path((grid, [w] * 11))
        assert epath.max_step_jump() < 1e-12

    def test_linear_synthetic_phase_is_linear(self):
        grid = np.linspace(0, 1, 51)
        path = synthetic_phase_path(lambda t: -np.pi / 3 + 2.0 * t, grid)
        epath = eigenphase_path(path)
        fitted = np.polyfit(epath.ts, epath.phases[:, 0], 1)
        assert abs(fitted[0] - 2.0) < 1e-9

    def test_raw_path_with_big_jump_raises(self):
        grid = np.array([0.0, 1.0])
        mats = [np.eye(1), np.diag([np.exp(2.9j)])]
        with pytest.raises(RefinementLimitError):
            eigenphase_path((grid, mats))

    def test_refinement_inserts_samples_with_evaluator(self):
        grid = np.linspace(0.0, 1.0, 5)  # coarse: jumps of ~1.6 rad
        path = synthetic_phase_path(lambda t: 6.5 * t, grid)
        epath = eigenphase_path(path)
        assert len(epath.ts) > 5
        assert epath.max_step_jump() <= np.pi / 2 + 1e-12

    def test_left_shelf_phases_monotone_for_scalar_dirac(self):
        sys, bc = catalog.scalar_dirac()
        grid = default_grid(201)
        p1, p2 = canonical_frames(sys, bc, 0.0, 2.0, grid=grid)
        epath = eigenphase_path((p1, p2))
        diffs = np.diff(epath.phases[:, 0])
        assert np.all(diffs > -1e-10)


class TestDetectCrossings:
    def test_plateau_raises_when_forbidden(self):
        grid = np.linspace(0, 1, 21)
        path = synthetic_phase_path(lambda t: np.pi, grid)
        epath = eigenphase_path(path)
        with pytest.raises(NonIsolatedIntersectionError):
            detect_crossings(epath, forbid_plateaus=True)

    def test_plateau_tolerated_for_index(self):
        grid = np.linspace(0, 1, 21)
        path = synthetic_phase_path(lambda t: np.pi, grid)
        assert maslov_index(path).index == 0

    def test_refined_location_accuracy(self):
        grid = np.linspace(0, 1, 41)
        x_star = 0.613731
        path = synthetic_phase_path(lambda t: np.pi + np.tan(t - x_star), grid)
        epath = eigenphase_path(path)
        _, records = detect_crossings(epath)
        (rec,) = records
        assert abs(rec.location - x_star) < 1e-10


class TestCrossingDirection:
    def _intersecting_pair(self, n, rng):
        from maslov_count.frames import random_frame_pair_with_intersection

        return random_frame_pair_with_intersection(n, n, rng)

    def test_positive_definite_difference_all_ccw(self):
        rng = np.random.default_rng(11)
        f1, f2 = self._intersecting_pair(2, rng)
        b1 = lambda t: np.zeros((4, 4), dtype=complex)
        b2 = lambda t: np.eye(4, dtype=complex)
        audit = crossing_direction(b1, b2, f1, f2, 0.5)
        assert (audit.m_plus, audit.m_minus) == (2, 0)
        assert audit.mas_contribution == 2

    def test_negative_definite_difference_all_cw(self):
        rng = np.random.default_rng(12)
        f1, f2 = self._intersecting_pair(2, rng)
        b1 = lambda t: np.eye(4, dtype=complex)
        b2 = lambda t: np.zeros((4, 4), dtype=complex)
        audit = crossing_direction(b1, b2, f1, f2, 0.5)
        assert (audit.m_plus, audit.m_minus) == (0, 2)
        assert audit.mas_contribution == -2

    def test_endpoint_rules(self):
        rng = np.random.default_rng(13)
        f1, f2 = self._intersecting_pair(1, rng)
        b1 = lambda t: np.zeros((2, 2), dtype=complex)
        b2 = lambda t: np.eye(2, dtype=complex)
        left = crossing_direction(b1, b2, f1, f2, 0.0)
        right = crossing_direction(b1, b2, f1, f2, 1.0)
        assert left.mas_contribution == 0   # -m_minus
        assert right.mas_contribution == 1  # +m_plus

    def test_scalar_sl_crossing_is_simple_positive(self):
        # the projected window difference diag((l2-l1) q, 0) compresses
        # positively onto a one-dimensional crossing
        sys, bc = catalog.scalar_sturm_liouville()
        from maslov_count.counting import renormalized_count

        rep = renormalized_count(sys, bc, 0.0, 50.0)
        assert len(rep.direction_audits) == 2
        for audit in rep.direction_audits:
            assert (audit.m_plus, audit.m_minus) == (1, 0)

    def test_sign_flip_raises_indefinite(self):
        rng = np.random.default_rng(14)
        f1, f2 = self._intersecting_pair(1, rng)
        b1 = lambda t: np.zeros((2, 2), dtype=complex)
        b2 = lambda t: (t - 0.5) * np.eye(2, dtype=complex)
        with pytest.raises(IndefiniteDirectionError):
            crossing_direction(b1, b2, f1, f2, 0.5)


class TestRotatedDirection:
    @pytest.mark.parametrize("w0", [1j, np.exp(1j * np.pi / 4)])
    def test_conjugation_inverse(self, w0):
        g, g_inv = rotation_conjugation(w0, 2)
        assert np.linalg.norm(g @ g_inv - np.eye(4), 2) < 1e-13

    def test_minus_one_reduces_to_plain_direction(self):
        rng = np.random.default_rng(15)
        from maslov_count.frames import random_frame_pair_with_intersection

        f1, f2 = random_frame_pair_with_intersection(2, 2, rng)
        b1 = lambda t: np.zeros((4, 4), dtype=complex)
        b2 = lambda t: np.diag([2.0, 1.0, 3.0, 0.5]).astype(complex)
        plain = crossing_direction(b1, b2, f1, f2, 0.5)
        rotated = rotated_direction(b1, b2, f1, f2, 0.5, -1.0)
        assert (plain.m_plus, plain.m_minus) == (rotated.m_plus, rotated.m_minus)

    def test_monotone_dirac_positive_at_every_eigenvalue(self):
        # scalar dirac with the window weight: every eigenvalue of the
        # pair matrix rotates counterclockwise under a positive
        # difference, whichever point of the circle it sits at
        sys, bc = catalog.scalar_dirac()
        grid = default_grid(101)
        p1, p2 = canonical_frames(sys, bc, 0.0, 2.0, grid=grid)
        from maslov_count.frames import w_pair

        k = 50
        f1, f2 = p1.frames[k], p2.frames[k]
        w = w_pair(f1, f2)
        b1 = lambda t: sys.eval_B(t, 0.0)
        b2 = lambda t: sys.eval_B(t, 2.0)
        for w0 in np.linalg.eigvals(w):
            w0 /= abs(w0)
            audit = rotated_direction(b1, b2, f1, f2, grid[k], w0)
            assert audit.m_minus == 0
            assert audit.m_plus >= 1


class TestMaslovBoxAudit:
    def test_scalar_sl_window_with_two_eigenvalues(self):
        sys, bc = catalog.scalar_sturm_liouville()
        rep = maslov_box_audit(sys, bc, 0.0, 50.0, x_grid=default_grid(801),
                               lam_samples=61)
        assert rep.bottom.index == 0
        assert rep.right.index == 0
        assert rep.top.index == -2
        assert rep.left.index == 2
        assert rep.loop_sum == 0
        assert rep.count == 2
        assert rep.right_shelf_pairing_drift < 1e-6

    def test_empty_window_all_shelves_zero(self):
        sys, bc = catalog.scalar_sturm_liouville()
        rep = maslov_box_audit(sys, bc, 50.0, 80.0, x_grid=default_grid(801),
                               lam_samples=41)
        assert (rep.bottom.index, rep.right.index, rep.top.index, rep.left.index) \
            == (0, 0, 0, 0)

    def test_window_opening_exactly_on_eigenvalue_counts_it(self):
        sys, bc = catalog.scalar_sturm_liouville()
        lam1 = np.pi**2
        rep = maslov_box_audit(sys, bc, lam1, 20.0, x_grid=default_grid(801),
                               lam_samples=41)
        assert rep.count == 1
        # and nudging the window just past the eigenvalue drops it
        rep2 = maslov_box_audit(sys, bc, lam1 + 1e-4, 20.0,
                                x_grid=default_grid(801), lam_samples=41)
        assert rep2.count == 0

    def test_top_shelf_crossings_rotate_clockwise(self):
        sys, bc = catalog.scalar_sturm_liouville()
        rep = maslov_box_audit(sys, bc, 0.0, 50.0, x_grid=default_grid(801),
                               lam_samples=61)
        for rec in rep.top.crossings:
            assert rec.direction == -1


class TestPathProperties:
    def test_path_additivity_on_synthetic_paths(self):
        rng = np.random.default_rng(21)
        n = 3
        u = random_unitary(n, rng)
        rates = np.array([2.2, -1.3, 3.7])
        offsets = np.array([0.4, 2.9, -1.2])

        def w(t):
            return u @ np.diag(np.exp(1j * (offsets + rates * t))) @ u.conj().T

        grid = np.linspace(0.0, 1.0, 201)
        whole = maslov_index(UnitaryPath(ts=grid, mats=[w(t) for t in grid],
                                         evaluator=w)).index
        for split in (0.31, 0.5, 0.77):
            g1 = np.linspace(0.0, split, 101)
            g2 = np.linspace(split, 1.0, 101)
            m1 = maslov_index(UnitaryPath(ts=g1, mats=[w(t) for t in g1],
                                          evaluator=w)).index
            m2 = maslov_index(UnitaryPath(ts=g2, mats=[w(t) for t in g2],
                                          evaluator=w)).index
            assert m1 + m2 == whole

    def test_reversal_negates_interior_transversal_index(self):
        grid = np.linspace(0.0, 1.0, 101)
        path = synthetic_phase_path(lambda t: np.pi - 0.7 + 1.1 * t, grid)
        fwd = maslov_index(path).index
        rev = maslov_index(path.reversed()).index
        assert fwd == 1 and rev == -1
