"""Truncated-SVD solver semantics, the shifted-solve contrast, and the
conditioning study."""

import numpy as np
import pytest

from sggn.linalg import (
    BreakpointLayout,
    condition_reports_csv,
    condition_sweep,
    shifted_solve,
    truncated_svd_solve,
)


def random_spd(rng, dim, kappa):
    """SPD matrix Q diag(lams) Q' with condition number kappa."""
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    lams = np.geomspace(1.0, 1.0 / kappa, dim)
    return (Q * lams) @ Q.T, Q, lams


class TestTruncatedSvdSolve:
    def test_identity(self):
        report = truncated_svd_solve(np.eye(3), np.array([1.0, 2.0, 3.0]), 1e-12)
        np.testing.assert_allclose(report.solution, [1.0, 2.0, 3.0], atol=1e-14)
        assert report.numerical_rank == 3

    def test_tiny_direction_truncated_not_amplified(self):
        # the structural contrast to a shifted solve: the weak direction is
        # dropped, its component in the solution is exactly zero
        report = truncated_svd_solve(np.diag([1.0, 1e-20]), np.array([1.0, 1.0]), 1e-12)
        assert report.solution[0] == pytest.approx(1.0, rel=1e-12)
        assert report.solution[1] == 0.0
        assert report.numerical_rank == 1

    def test_random_spd_residual(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            M, _, _ = random_spd(rng, 8, 1e6)
            b = rng.normal(size=8)
            report = truncated_svd_solve(M, b, 1e-12)
            assert report.relative_residual <= 1e-9

    def test_exactness_against_inverse(self):
        rng = np.random.default_rng(1)
        for dim in range(2, 7):
            M, _, _ = random_spd(rng, dim, 1e3)
            b = rng.normal(size=dim)
            x_exact = np.linalg.inv(M) @ b
            report = truncated_svd_solve(M, b, 1e-12)
            err = np.linalg.norm(report.solution - x_exact) / np.linalg.norm(x_exact)
            assert err <= 1e-9

    def test_truncation_monotonicity(self):
        rng = np.random.default_rng(2)
        M, _, _ = random_spd(rng, 10, 1e12)
        b = rng.normal(size=10)
        ranks = [
            truncated_svd_solve(M, b, tol).numerical_rank
            for tol in [1e-14, 1e-10, 1e-6, 1e-3, 1e-1]
        ]
        assert all(r1 >= r2 for r1, r2 in zip(ranks, ranks[1:]))

    def test_kept_singular_values_respect_tolerance(self):
        rng = np.random.default_rng(3)
        M, _, _ = random_spd(rng, 9, 1e9)
        report = truncated_svd_solve(M, rng.normal(size=9), 1e-6)
        assert report.smallest_kept_singular_value >= 1e-6 * report.largest_singular_value
        assert report.numerical_rank <= 9

    def test_zero_rhs(self):
        report = truncated_svd_solve(np.eye(2), np.zeros(2), 1e-12)
        assert report.relative_residual == 0.0
        np.testing.assert_array_equal(report.solution, 0.0)

    def test_asymmetric_rejected(self):
        M = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="symmetric"):
            truncated_svd_solve(M, np.ones(2), 1e-12)

    def test_nonsquare_rejected(self):
        with pytest.raises(ValueError, match="square"):
            truncated_svd_solve(np.ones((2, 3)), np.ones(2), 1e-12)

    def test_bad_tolerance_rejected(self):
        with pytest.raises(ValueError, match="rel_tol"):
            truncated_svd_solve(np.eye(2), np.ones(2), 0.0)

    def test_equilibrated_solve_is_scale_invariant(self):
        # a wildly scaled but geometrically fine system solves exactly
        rng = np.random.default_rng(4)
        M0, _, _ = random_spd(rng, 6, 1e3)
        s = np.array([1e4, 1.0, 1e-4, 1.0, 1e3, 1.0])
        M = M0 * s[:, None] * s[None, :]
        M = np.tril(M) + np.tril(M, -1).T
        x_true = rng.normal(size=6)
        b = M @ x_true
        plain = truncated_svd_solve(M, b, 1e-12)
        scaled = truncated_svd_solve(M, b, 1e-12, equilibrate=True)
        assert scaled.numerical_rank == 6
        assert plain.numerical_rank < 6  # raw truncation loses directions here
        np.testing.assert_allclose(scaled.solution, x_true, rtol=1e-5)


class TestShiftedSolve:
    def test_lm_pathology(self):
        # singular direction amplified to g/lambda by the shift
        p = shifted_solve(np.diag([1.0, 0.0]), np.array([1.0, 1.0]), 1e-6)
        assert p[0] == pytest.approx(1.0, abs=1e-5)
        assert p[1] == pytest.approx(1e6, abs=1.0)

    def test_large_shift_approaches_scaled_gradient(self):
        rng = np.random.default_rng(5)
        M, _, _ = random_spd(rng, 5, 10.0)
        g = rng.normal(size=5)
        lam = 1e9
        p = shifted_solve(M, g, lam)
        np.testing.assert_allclose(p, g / lam, rtol=1e-6)


class TestConditionSweep:
    def test_mass_slope_near_four(self):
        ns = [8, 16, 32]
        reports = condition_sweep(ns)
        ks = [r.kappa2 for r in reports if r.tag == "mass"]
        slope = np.polyfit(np.log(ns), np.log(ks), 1)[0]
        assert 3.0 <= slope <= 4.5

    def test_clustered_worse_than_uniform(self):
        uniform = condition_sweep([8])
        clustered = condition_sweep([8], BreakpointLayout(placement="clustered"))
        for tag in ("mass", "layer_gn"):
            ku = next(r.kappa2 for r in uniform if r.tag == tag)
            kc = next(r.kappa2 for r in clustered if r.tag == tag)
            assert kc > ku

    def test_reports_shape_and_csv(self, tmp_path):
        reports = condition_sweep([8, 16])
        assert len(reports) == 4
        assert all(r.kappa2 >= 1.0 for r in reports)
        path = tmp_path / "sweep.csv"
        condition_reports_csv(reports, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "n,tag,kappa2,sigma_max,sigma_min"
        assert len(lines) == 5

    def test_small_n_rejected(self):
        with pytest.raises(ValueError, match="n >= 4"):
            condition_sweep([2])

    def test_unresolvable_clustered_layout_rejected(self):
        with pytest.raises(ValueError, match="too small to resolve"):
            condition_sweep([48], BreakpointLayout(placement="clustered"))
