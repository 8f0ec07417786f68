import numpy as np
import pytest

from conftest import make_diag_path
from specflow.sfpath import (
    EndpointCrossingError,
    OperatorPath,
    compare_paths,
    concat,
    crossing_form,
    classify_crossings,
    direct_sum,
    extended_sf,
    is_admissible,
    is_nondecreasing,
    locate_crossings,
    reverse,
    scan_path,
    sf_regular_sum,
    verify_axioms,
)


def diag_path(a, b, *entries_fns, smooth=True):
    d = len(entries_fns)

    def fn(lam):
        return np.diag([g(lam) for g in entries_fns])

    return OperatorPath.from_callable(a, b, d, fn, smooth=smooth)


class TestEvaluate:
    def test_affine_interpolation(self):
        p = OperatorPath.from_samples([0.0, 1.0], [np.diag([0.0, 0.0]), np.diag([2.0, 4.0])])
        np.testing.assert_allclose(p(0.5).entries, np.diag([1.0, 2.0]))

    def test_analytic_rule(self):
        p = OperatorPath.from_callable(0.0, 5.0, 2, lambda lam: lam * np.eye(2))
        np.testing.assert_allclose(p(3.0).entries, 3.0 * np.eye(2))

    def test_sample_point_exact(self):
        m = np.array([[1.0, 0.5], [0.5, -2.0]])
        p = OperatorPath.from_samples([0.0, 0.3, 1.0], [np.zeros((2, 2)), m, np.eye(2)])
        np.testing.assert_array_equal(p(0.3).entries, m)

    def test_outside_domain(self):
        p = OperatorPath.from_callable(0.0, 1.0, 1, lambda lam: np.array([[lam]]))
        with pytest.raises(ValueError, match="outside domain"):
            p(2.0)

    def test_grid_validation(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            OperatorPath.from_samples([0.0, 0.0], [np.eye(1), np.eye(1)])
        with pytest.raises(ValueError, match="at least two"):
            OperatorPath.from_samples([0.0], [np.eye(1)])
        with pytest.raises(ValueError, match="one dimension"):
            OperatorPath.from_samples([0.0, 1.0], [np.eye(1), np.eye(2)])


class TestAdmissible:
    def test_both_invertible(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        assert is_admissible(p) == (True, True)

    def test_singular_start(self):
        p = diag_path(0.0, 1.0, lambda l: l, lambda l: 1.0)
        assert is_admissible(p) == (False, True)

    def test_constant_identity(self):
        p = OperatorPath.from_callable(0.0, 1.0, 2, lambda l: np.eye(2))
        assert is_admissible(p) == (True, True)


class TestExtendedSf:
    def test_single_crossing(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        assert extended_sf(p).total_sf == 1

    def test_cancelling_pair(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: -l)
        assert extended_sf(p).total_sf == 0

    def test_constant_singular_endpoint(self):
        p = OperatorPath.from_callable(0.0, 1.0, 2, lambda l: np.diag([0.0, 1.0]))
        res = extended_sf(p)
        assert res.total_sf == 0
        assert res.admissible_start is False and res.admissible_end is False
        assert res.shift_delta > 0

    def test_eigenvalue_counting_oracle(self):
        # flow of lam*Id - K equals the multiplicity count of spec(K) in (c, d)
        rng = np.random.default_rng(11)
        for _ in range(50):
            m = int(rng.integers(2, 9))
            k = rng.normal(size=(m, m))
            k = (k + k.T) / 2
            eigs = np.linalg.eigvalsh(k)
            c, d = -4.0, 4.0
            assert np.all(np.abs(eigs - c) > 1e-6) and np.all(np.abs(eigs - d) > 1e-6)
            p = OperatorPath.from_samples([c, d], [c * np.eye(m) - k, d * np.eye(m) - k], smooth=True)
            expected = int(np.sum((eigs > c) & (eigs < d)))
            assert extended_sf(p).total_sf == expected


class TestLocateCrossings:
    def test_single_crossing_odd_grid(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        cr = locate_crossings(p, n_grid=101)
        assert len(cr) == 1
        assert abs(cr[0].lambda_est) < 1e-7
        assert cr[0].kernel_dim == 1 and cr[0].local_sf == 1

    def test_two_crossings(self):
        p = diag_path(-1.0, 1.0, lambda l: l - 0.25, lambda l: l + 0.25)
        cr = locate_crossings(p)
        assert len(cr) == 2
        assert abs(cr[0].lambda_est + 0.25) < 1e-7 and abs(cr[1].lambda_est - 0.25) < 1e-7
        assert [c.local_sf for c in cr] == [1, 1]
        assert sum(c.local_sf for c in cr) == extended_sf(p).total_sf == 2

    def test_constant_invertible_path(self):
        p = OperatorPath.from_callable(0.0, 1.0, 2, lambda l: np.eye(2))
        assert locate_crossings(p) == ()

    def test_zero_flow_crossing_between_samples(self):
        # crossing with cancelling branches, not on any sample of an even grid
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: -l)
        cr = locate_crossings(p, n_grid=256)
        assert len(cr) == 1
        assert abs(cr[0].lambda_est) < 1e-7
        assert cr[0].kernel_dim == 2 and cr[0].local_sf == 0

    def test_tangential_touch(self):
        p = diag_path(-1.0, 1.0, lambda l: l * l, lambda l: 1.0)
        cr = locate_crossings(p)
        assert len(cr) == 1
        assert cr[0].kernel_dim == 1 and cr[0].local_sf == 0

    def test_endpoint_singularity_rejected(self):
        p = diag_path(0.0, 1.0, lambda l: l, lambda l: 1.0)
        with pytest.raises(EndpointCrossingError):
            locate_crossings(p)

    def test_brackets_disjoint_and_consistent_random(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            d = int(rng.integers(2, 7))
            path, oracle = make_diag_path(rng, d)
            cr = locate_crossings(path)
            assert len(cr) == len(oracle)
            for got, (root, kdim, local) in zip(cr, oracle):
                assert abs(got.lambda_est - root) <= 1e-7
                assert got.kernel_dim == kdim
                assert got.local_sf == local
            for left, right in zip(cr, cr[1:]):
                assert left.bracket[1] < right.bracket[0]
            assert sum(c.local_sf for c in cr) == extended_sf(path).total_sf


class TestCrossingForm:
    def test_simple_positive(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        f = crossing_form(p, 0.0)
        np.testing.assert_allclose(f.matrix, [[1.0]], atol=1e-9)
        assert f.signature == 1 and f.regular

    def test_indefinite(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: -l)
        f = crossing_form(p, 0.0)
        assert f.signature == 0 and f.regular
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(f.matrix)), [-1.0, 1.0], atol=1e-9)

    def test_degenerate_touch(self):
        p = diag_path(-1.0, 1.0, lambda l: l * l, lambda l: 1.0)
        f = crossing_form(p, 0.0)
        assert not f.regular

    def test_requires_kernel(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        with pytest.raises(ValueError, match="not a crossing"):
            crossing_form(p, 0.5)

    def test_requires_smooth(self):
        p = OperatorPath.from_samples([-1.0, 1.0], [-np.eye(1), np.eye(1)], smooth=False)
        with pytest.raises(ValueError, match="smooth"):
            crossing_form(p, 0.0)


class TestRegularSum:
    def test_single(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        assert sf_regular_sum(p) == 1

    def test_cancelling(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: -l)
        assert sf_regular_sum(p) == 0

    def test_positive_path_counts_kernels(self):
        p = diag_path(0.0, 2.0, lambda l: l - 1.0, lambda l: l - 1.0)
        cr = locate_crossings(p)
        assert len(cr) == 1 and cr[0].kernel_dim == 2
        assert sf_regular_sum(p, cr) == 2 == sum(c.kernel_dim for c in cr)

    def test_refuses_degenerate(self):
        p = diag_path(-1.0, 1.0, lambda l: l * l, lambda l: 1.0)
        with pytest.raises(ValueError, match="degenerate crossing form"):
            sf_regular_sum(p)


class TestPathAlgebra:
    def test_concat_additivity(self):
        left = diag_path(-1.0, 0.0, lambda l: l, lambda l: 1.0)
        right = diag_path(0.0, 1.0, lambda l: l, lambda l: 1.0)
        whole = concat(left, right)
        assert extended_sf(left).total_sf + extended_sf(right).total_sf == extended_sf(whole).total_sf == 1

    def test_concat_grid_merge(self):
        p = OperatorPath.from_samples([0.0, 1.0], [np.eye(2), 2 * np.eye(2)])
        q = OperatorPath.from_samples([1.0, 2.0], [2 * np.eye(2), 3 * np.eye(2)])
        merged = concat(p, q)
        assert merged.is_grid and (merged.a, merged.b) == (0.0, 2.0)
        np.testing.assert_allclose(merged(1.5).entries, 2.5 * np.eye(2))

    def test_concat_junction_mismatch(self):
        p = OperatorPath.from_samples([0.0, 1.0], [np.eye(2), 2 * np.eye(2)])
        q = OperatorPath.from_samples([2.0, 3.0], [2 * np.eye(2), 3 * np.eye(2)])
        with pytest.raises(ValueError, match="junction mismatch"):
            concat(p, q)
        q2 = OperatorPath.from_samples([1.0, 2.0], [5 * np.eye(2), 3 * np.eye(2)])
        with pytest.raises(ValueError, match="disagree at the junction"):
            concat(p, q2)

    def test_reverse_flips_sign(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        assert extended_sf(reverse(p)).total_sf == -1

    def test_direct_sum(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        both = direct_sum(p, p)
        assert both.dim == 4
        assert extended_sf(both).total_sf == 2

    def test_direct_sum_domain_mismatch(self):
        p = diag_path(-1.0, 1.0, lambda l: l)
        q = diag_path(0.0, 1.0, lambda l: l)
        with pytest.raises(ValueError, match="domain mismatch"):
            direct_sum(p, q)


class TestMonotone:
    def test_increasing_scalar(self):
        p = OperatorPath.from_callable(0.0, 1.0, 2, lambda l: l * np.eye(2))
        assert is_nondecreasing(p)

    def test_indefinite_direction(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: -l)
        assert not is_nondecreasing(p)

    def test_constant(self):
        p = OperatorPath.from_callable(0.0, 1.0, 2, lambda l: np.eye(2))
        assert is_nondecreasing(p)

    def test_monotone_implies_nonnegative_flow(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            d = int(rng.integers(2, 6))
            l0 = rng.normal(size=(d, d))
            l0 = (l0 + l0.T) / 2
            g = rng.normal(size=(d, int(rng.integers(1, d + 1))))
            p = OperatorPath.from_samples([0.0, 1.0], [l0, l0 + g @ g.T])
            assert is_nondecreasing(p)
            assert extended_sf(p).total_sf >= 0


class TestComparePaths:
    def test_hypothesis_fails(self):
        left = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        right = diag_path(-1.0, 1.0, lambda l: l + 0.1, lambda l: 1.0)
        rep = compare_paths(left, right)
        assert rep.start_ordered and not rep.end_ordered and not rep.hypothesis

    def test_equal_paths(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        rep = compare_paths(p, p)
        assert rep.hypothesis and rep.sf_left == rep.sf_right and rep.comparison_holds

    def test_interior_dip(self):
        left = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        right = diag_path(
            -1.0, 1.0,
            lambda l: l - 0.05 * (1.0 - l) * (l + 1.0),
            lambda l: 1.0 - 0.05 * (1.0 - l) * (l + 1.0),
        )
        rep = compare_paths(left, right)
        assert rep.hypothesis
        # equal endpoints force equal endpoint Morse indices
        assert rep.sf_left == rep.sf_right and rep.comparison_holds


class TestVerifyAxioms:
    def test_small_run_passes(self):
        report = verify_axioms(seed=7, trials=40)
        assert report.all_passed
        assert set(report.passed) == {
            "normalization",
            "morse_index_formula",
            "direct_sum",
            "homotopy_invariance",
            "concatenation",
            "monotone_nonnegative",
            "reversal_antisymmetry",
        }

    def test_deterministic(self):
        r1 = verify_axioms(seed=3, trials=10)
        r2 = verify_axioms(seed=3, trials=10)
        assert r1.to_dict() == r2.to_dict()

    def test_rejects_bad_trials(self):
        with pytest.raises(ValueError):
            verify_axioms(seed=0, trials=0)


class TestScanPath:
    def test_combines_total_and_crossings(self):
        p = diag_path(-1.0, 1.0, lambda l: l - 0.25, lambda l: l + 0.25)
        res = scan_path(p)
        assert res.total_sf == 2
        assert len(res.crossings) == 2
        assert res.grid_points_used == 256

    def test_classify_enriches(self):
        p = diag_path(-1.0, 1.0, lambda l: l, lambda l: 1.0)
        cr = classify_crossings(p, locate_crossings(p))
        assert cr[0].crossing_form_signature == 1 and cr[0].regular
