"""Tests for fold geometry: second fundamental form, sectional curvature,
family scans, sufficient conditions and fold-to-table Hausdorff distances.

Closed-form oracles: the parabola fold's curvature at the origin, the unit
sphere as the disk fold at thickness 1, and the rational curvature defect of
the spherical half-space family.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from foldbilliards import ambient as am
from foldbilliards import fold as fd
from foldbilliards import table as tb
from foldbilliards.errors import (ConfigError, DegeneratePlaneError,
                                  InvalidInputError, OutsideTableError,
                                  PreconditionError)


def xi_defect(lam, x):
    """Oracle: curvature defect of the spherical half-space fold over x.

    Rational closed form in the table coordinates; the mixed-plane sectional
    curvature equals 1 + xi_defect.
    """
    poly = 3 * x[0] ** 2 - 1 - np.sum(x[1:] ** 2)
    return lam**2 * x[0] * poly / (4 * x[0] + lam**2) ** 2


class TestFoldBasics:
    def test_value_and_lift(self):
        f = fd.Fold(tb.disk_table(), am.euclidean(3), 0.5)
        q = fd.lift(f, [0.6, 0.0])
        assert q[2] == pytest.approx(0.5 * 0.8)
        assert f.value(q) == pytest.approx(0.0, abs=1e-15)
        q_minus = fd.lift(f, [0.6, 0.0], sign=-1)
        assert q_minus[2] == pytest.approx(-0.4)

    def test_lift_outside_table_rejected(self):
        f = fd.Fold(tb.disk_table(), am.euclidean(3), 0.5)
        with pytest.raises(OutsideTableError):
            fd.lift(f, [1.5, 0.0])

    def test_bad_lambda_rejected(self):
        with pytest.raises(InvalidInputError):
            fd.Fold(tb.disk_table(), am.euclidean(3), 0.0)
        with pytest.raises(InvalidInputError):
            fd.Fold(tb.disk_table(), am.euclidean(3), -0.2)

    def test_model_dimension_must_extend_table(self):
        with pytest.raises(InvalidInputError):
            fd.Fold(tb.disk_table(), am.euclidean(2), 0.5)

    def test_frame_rejects_off_fold_points(self):
        f = fd.Fold(tb.disk_table(), am.euclidean(3), 0.5)
        with pytest.raises(PreconditionError):
            fd.frame_at(f, np.array([0.0, 0.0, 0.3]))

    def test_frame_is_orthonormal_and_tangent(self, rng):
        f = fd.Fold(tb.disk_table(), am.hyperbolic(3), 0.7)
        for _ in range(10):
            x = rng.uniform(-0.6, 0.6, 2)
            q = fd.lift(f, x, sign=1 if rng.random() < 0.5 else -1)
            fr = fd.frame_at(f, q)
            g = fr.metric.g
            gram = fr.tangent_basis @ g @ fr.tangent_basis.T
            assert np.allclose(gram, np.eye(2), atol=1e-9)
            # tangent vectors annihilate dF
            dF = f.euclid_grad(q)
            assert np.abs(fr.tangent_basis @ dF).max() < 1e-9


class TestCurvatureOracles:
    @pytest.mark.parametrize("lam", [0.5, 0.25, 0.1])
    def test_parabola_fold_blows_up_like_minus_four_over_lambda_sq(self, lam):
        f = fd.Fold(tb.parabola_table(), am.euclidean(3), lam)
        sec = fd.sectional_curvature(f, np.zeros(3), [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
        assert sec == pytest.approx(-4.0 / lam**2, rel=1e-6)

    def test_parabola_second_fundamental_form_at_origin(self):
        lam = 0.5
        f = fd.Fold(tb.parabola_table(), am.euclidean(3), lam)
        q0 = np.zeros(3)
        assert fd.second_fundamental_form(f, q0, [1, 0, 0], [1, 0, 0]) == pytest.approx(-2.0)
        assert fd.second_fundamental_form(f, q0, [0, 0, 1], [0, 0, 1]) == pytest.approx(
            2.0 / lam**2)

    def test_unit_sphere_has_curvature_one(self, rng):
        # the disk fold at thickness 1 is the unit sphere
        f = fd.Fold(tb.disk_table(), am.euclidean(3), 1.0)
        worst = 0.0
        for _ in range(50):
            x = rng.uniform(-0.9, 0.9, 2)
            if tb.disk_table().f(x) < 0.05:
                continue
            q = fd.lift(f, x, 1 if rng.random() < 0.5 else -1)
            fr = fd.frame_at(f, q)
            v = rng.normal(size=2) @ fr.tangent_basis
            w = rng.normal(size=2) @ fr.tangent_basis
            worst = max(worst, abs(fd.sectional_curvature(f, q, v, w) - 1.0))
        assert worst < 1e-9

    def test_unit_sphere_shape_operator_is_identity(self):
        f = fd.Fold(tb.disk_table(), am.euclidean(3), 1.0)
        fr = fd.frame_at(f, np.array([1.0, 0.0, 0.0]))
        assert np.allclose(np.abs(fr.h), np.eye(2), atol=1e-9)

    @given(seed=st.integers(0, 10**6))
    def test_sectional_curvature_is_plane_dependent_only(self, seed):
        r = np.random.default_rng(seed)
        f = fd.Fold(tb.disk_table(), am.euclidean(3), 1.0)
        q = fd.lift(f, np.array([0.3, 0.2]))
        fr = fd.frame_at(f, q)
        v, w = fr.tangent_basis
        sec0 = fd.sectional_curvature(f, q, v, w)
        A = r.normal(size=(2, 2))
        if abs(np.linalg.det(A)) < 0.1:
            return
        v2 = A[0, 0] * v + A[0, 1] * w
        w2 = A[1, 0] * v + A[1, 1] * w
        assert fd.sectional_curvature(f, q, v2, w2) == pytest.approx(sec0, abs=1e-8)

    def test_sectional_rejects_parallel_vectors(self):
        f = fd.Fold(tb.disk_table(), am.euclidean(3), 1.0)
        q = np.array([1.0, 0.0, 0.0])
        with pytest.raises(DegeneratePlaneError):
            fd.sectional_curvature(f, q, [0.0, 1.0, 0.0], [0.0, 2.0, 0.0])

    def test_spherical_halfspace_gradient_at_base_point(self):
        lam = 0.5
        f = fd.Fold(tb.spherical_halfspace_table(), am.spherical(4), lam)
        fr = fd.frame_at(f, np.zeros(4))
        assert np.allclose(fr.grad_F, [-(lam**2) / 4.0, 0.0, 0.0, 0.0], atol=1e-12)

    @pytest.mark.parametrize("lam", [0.9, 0.1])
    def test_spherical_halfspace_matches_rational_defect(self, lam, rng):
        sph = tb.spherical_halfspace_table()
        f = fd.Fold(sph, am.spherical(4), lam)
        count = 0
        while count < 60:
            x = rng.uniform(-1, 1, 3)
            if x[0] <= 0 or not sph.region.contains(x) or sph.f(x) <= 0:
                continue
            count += 1
            q = fd.lift(f, x, 1 if rng.random() < 0.5 else -1)
            z = q[-1]
            # tangent plane spanned by the lifted normal direction and e2
            v1 = np.array([2 * z, 0.0, 0.0, lam**2])
            vj = np.array([0.0, 1.0, 0.0, 0.0])
            sec = fd.sectional_curvature(f, q, v1, vj)
            assert sec - 1.0 == pytest.approx(xi_defect(lam, x), abs=1e-8)
            # planes not meeting the fold direction keep the ambient curvature
            vk = np.array([0.0, 0.0, 1.0, 0.0])
            assert fd.sectional_curvature(f, q, vj, vk) >= 1.0 - 1e-9


class TestScan:
    def test_euclidean_disk_certified_nonnegative(self):
        rep = fd.scan_curvature(tb.disk_table(), am.euclidean(3),
                                [0.9, 0.5, 0.2, 0.05], kappa=0.0, n_grid=12)
        assert rep.verdict == "certified"
        assert rep.min_sec >= -1e-8
        assert rep.boundary_clause == "unverified"

    def test_hyperbolic_disk_certified_above_minus_one(self):
        rep = fd.scan_curvature(tb.disk_table(), am.hyperbolic(3),
                                [0.9, 0.5, 0.2, 0.05], kappa=-1.0, n_grid=12)
        assert rep.verdict == "certified"
        assert rep.min_sec >= -1.0 - 1e-6

    def test_parabola_violates_any_fixed_bound(self):
        rep = fd.scan_curvature(tb.parabola_table(), am.euclidean(3),
                                [0.1], kappa=-20.0, n_grid=12)
        assert rep.verdict == "violated"
        assert rep.min_sec < -300.0
        # the witness is recorded
        assert rep.argmin_lambda == 0.1
        assert len(rep.argmin_point) == 3

    def test_scan_is_deterministic_for_fixed_seed(self):
        a = fd.scan_curvature(tb.disk_table(), am.euclidean(3), [0.5], 0.0,
                              n_grid=8, seed=5)
        b = fd.scan_curvature(tb.disk_table(), am.euclidean(3), [0.5], 0.0,
                              n_grid=8, seed=5)
        assert a.min_sec == b.min_sec
        assert a.to_json() == b.to_json()

    def test_parallel_matches_serial(self):
        a = fd.scan_curvature(tb.disk_table(), am.euclidean(3), [0.5, 0.2], 0.0,
                              n_grid=8, seed=5, workers=1)
        b = fd.scan_curvature(tb.disk_table(), am.euclidean(3), [0.5, 0.2], 0.0,
                              n_grid=8, seed=5, workers=2)
        assert a.min_sec == b.min_sec
        assert a.min_sec_per_lambda == b.min_sec_per_lambda

    def test_empty_lambda_grid_rejected(self):
        with pytest.raises(ConfigError):
            fd.scan_curvature(tb.disk_table(), am.euclidean(3), [], 0.0)


class TestSufficientConditions:
    def test_disk_passes_in_both_certifiable_models(self):
        rep_e = fd.check_h_sufficient_conditions(tb.disk_table(), am.euclidean(3))
        assert rep_e.passed
        rep_h = fd.check_h_sufficient_conditions(tb.disk_table(), am.hyperbolic(3))
        assert rep_h.passed
        # 2f - x . Df is identically 2 on the disk
        assert rep_h.min_concavity_defect == pytest.approx(2.0, abs=1e-12)

    def test_parabola_fails_concavity(self):
        rep = fd.check_h_sufficient_conditions(tb.parabola_table(), am.euclidean(3))
        assert not rep.passed
        assert rep.max_hess_eigenvalue > 1.0

    def test_spherical_model_has_no_closed_form_condition(self):
        with pytest.raises(PreconditionError):
            fd.check_h_sufficient_conditions(tb.spherical_halfspace_table(),
                                             am.spherical(4))


class TestHausdorff:
    @pytest.mark.parametrize("lam", [0.4, 0.05])
    def test_disk_fold_sits_at_height_lambda(self, lam):
        hd = fd.hausdorff_distance(fd.Fold(tb.disk_table(), am.euclidean(3), lam))
        assert hd.sup_fold_to_table == pytest.approx(lam, abs=1e-3)
        assert hd.sup_table_to_fold == pytest.approx(lam, abs=1e-3)

    def test_one_sided_distances_below_scaling_bound(self):
        cases = [
            (tb.disk_table(), am.euclidean(3)),
            (tb.disk_table(), am.hyperbolic(3)),
            (tb.half_space_table(), am.euclidean(3)),
            (tb.parabola_table(), am.euclidean(3)),
            (tb.spherical_halfspace_table(), am.spherical(4)),
        ]
        for table, model in cases:
            hd = fd.hausdorff_distance(fd.Fold(table, model, 0.2), n_grid=41)
            assert hd.sup_fold_to_table <= hd.bound + 1e-3
            assert hd.sup_table_to_fold <= hd.bound + 1e-3

    def test_shrinks_linearly_in_lambda(self):
        sups = [fd.hausdorff_distance(
            fd.Fold(tb.disk_table(), am.euclidean(3), lam), n_grid=61).sup_fold_to_table
            for lam in (0.4, 0.2, 0.1)]
        assert sups[0] / sups[1] == pytest.approx(2.0, rel=1e-2)
        assert sups[1] / sups[2] == pytest.approx(2.0, rel=1e-2)
