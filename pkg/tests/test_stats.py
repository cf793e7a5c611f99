import math

import numpy as np
import pytest
import scipy.stats

from exprscore.stats import (
    InsufficientCoincidences,
    LengthMismatch,
    RatingMatrix,
    ZeroVariance,
    ZeroVarianceDifferences,
    krippendorff_alpha,
    paired_t_test,
    pearson,
    rankdata,
    spearman,
)


def pearson_bruteforce(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    den = math.sqrt(sum((a - mx) ** 2 for a in x) * sum((b - my) ** 2 for b in y))
    return num / den


def ranks_bruteforce(v):
    out = []
    for a in v:
        less = sum(1 for b in v if b < a)
        equal = sum(1 for b in v if b == a)
        out.append(less + (equal + 1) / 2.0)
    return out


def alpha_bruteforce(grid):
    """Literal pairwise Krippendorff with the interval metric."""
    units = []
    for col in range(grid.shape[1]):
        vals = [v for v in grid[:, col] if not np.isnan(v)]
        if len(vals) >= 2:
            units.append(vals)
    if not units:
        raise InsufficientCoincidences("nothing pairable")
    n = sum(len(u) for u in units)
    observed = 0.0
    for u in units:
        m = len(u)
        for i in range(m):
            for j in range(m):
                if i != j:
                    observed += (u[i] - u[j]) ** 2 / (m - 1)
    observed /= n
    pooled = [v for u in units for v in u]
    expected = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                expected += (pooled[i] - pooled[j]) ** 2
    expected /= n * (n - 1)
    if expected == 0.0:
        return 1.0
    return 1.0 - observed / expected


class TestPearson:
    def test_affine(self):
        x = list(range(1, 11))
        y = [2 * v + 1 for v in x]
        assert pearson(x, y) == pytest.approx(1.0)

    def test_negation(self):
        x = list(range(1, 11))
        assert pearson(x, [-v for v in x]) == pytest.approx(-1.0)

    def test_hand_computed(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)

    def test_symmetry_and_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.normal(size=10)
            y = rng.normal(size=10)
            assert pearson(x, y) == pytest.approx(pearson(y, x), abs=1e-15)
            assert abs(pearson(x, y)) <= 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            pearson([1, 2], [1, 2, 3])

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance):
            pearson([1, 1, 1], [1, 1, 1])

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n = int(rng.integers(3, 51))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            assert pearson(x, y) == pytest.approx(pearson_bruteforce(x, y), abs=1e-12)


class TestSpearman:
    def test_strictly_increasing(self):
        assert spearman([1, 5, 9], [2, 4, 100]) == pytest.approx(1.0)

    def test_reversed(self):
        assert spearman([1, 2, 3], [9, 5, 1]) == pytest.approx(-1.0)

    def test_table_of_system_scores(self):
        # benchmark fixture columns: rank both, 1 - 6*sum(d^2)/(n(n^2-1))
        auto = [65.4, 45.2, 31.1, 44.9, 29.3, 5.3, 7.0]
        human = [84.2, 80.8, 66.3, 56.1, 42.9, 41.2, 34.7]
        assert spearman(auto, human) == pytest.approx(0.9285714285714286, abs=1e-4)

    def test_rankdata_ties(self):
        assert list(rankdata([10, 20, 20, 30])) == [1.0, 2.5, 2.5, 4.0]
        rng = np.random.default_rng(2)
        for _ in range(100):
            v = rng.integers(0, 5, size=12).astype(float)
            assert list(rankdata(v)) == pytest.approx(ranks_bruteforce(v))

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        transforms = [
            lambda v: 3.0 * v + 1.0,
            lambda v: v**3,
            lambda v: np.exp(v),
            np.arctan,
        ]
        for _ in range(25):
            x = rng.normal(size=15)
            y = rng.normal(size=15)
            base = spearman(x, y)
            for f in transforms:
                assert spearman(f(x), y) == pytest.approx(base, abs=1e-12)
                assert spearman(x, f(y)) == pytest.approx(base, abs=1e-12)

    def test_matches_scipy(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(3, 40))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            ref = scipy.stats.spearmanr(x, y).statistic
            assert spearman(x, y) == pytest.approx(ref, abs=1e-12)


class TestKrippendorff:
    def test_perfect_agreement_exact_one(self):
        grid = np.array([[1.0, 4.0, 2.0], [1.0, 4.0, 2.0], [1.0, 4.0, 2.0]])
        assert krippendorff_alpha(grid) == 1.0

    def test_two_rater_crossed_disagreement(self):
        # hand-computed via the pairwise oracle: Do=1, De=2/3, alpha=-0.5
        grid = np.array([[1.0, 2.0], [2.0, 1.0]])
        assert krippendorff_alpha(grid) == pytest.approx(-0.5)
        assert alpha_bruteforce(grid) == pytest.approx(-0.5)

    def test_single_rating_items_only(self):
        grid = np.array([[1.0, np.nan], [np.nan, 2.0]])
        with pytest.raises(InsufficientCoincidences):
            krippendorff_alpha(grid)

    def test_missing_ratings_handled(self):
        grid = np.array([[1.0, 2.0, np.nan], [1.0, 2.0, 3.0], [np.nan, 2.0, 3.0]])
        assert krippendorff_alpha(grid) == pytest.approx(alpha_bruteforce(grid), abs=1e-12)

    def test_matches_bruteforce_random(self):
        rng = np.random.default_rng(5)
        checked = 0
        while checked < 200:
            raters = int(rng.integers(2, 5))
            items = int(rng.integers(2, 7))
            grid = rng.integers(1, 6, size=(raters, items)).astype(float)
            mask = rng.random(size=grid.shape) < 0.25
            grid[mask] = np.nan
            try:
                expected = alpha_bruteforce(grid)
            except InsufficientCoincidences:
                continue
            assert krippendorff_alpha(grid) == pytest.approx(expected, abs=1e-10)
            checked += 1

    def test_affine_rescaling_invariance(self):
        rng = np.random.default_rng(6)
        grid = rng.integers(1, 6, size=(3, 8)).astype(float)
        base = krippendorff_alpha(grid)
        assert krippendorff_alpha(2.5 * grid + 7.0) == pytest.approx(base, abs=1e-12)

    def test_rating_matrix_validation(self):
        with pytest.raises(ValueError):
            RatingMatrix(np.array([[1.0, 2.0]]), 1, 5)  # single rater
        with pytest.raises(ValueError):
            RatingMatrix(np.array([[1.0, 9.0], [2.0, 3.0]]), 1, 5)  # out of scale
        matrix = RatingMatrix(np.array([[1.0, 2.0], [1.0, 2.0]]), 1, 5)
        assert krippendorff_alpha(matrix) == 1.0

    def test_unsupported_metric(self):
        with pytest.raises(ValueError):
            krippendorff_alpha(np.ones((2, 2)), metric="nominal")


class TestPairedTTest:
    def test_identical_sequences_rejected(self):
        with pytest.raises(ZeroVarianceDifferences):
            paired_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])

    def test_hand_fixture_against_scipy(self):
        a = np.array([2.0, 3.0, 4.0, 5.0, 1.0])
        b = a - np.array([1.0, 1.0, 1.0, 1.0, -0.5])
        result = paired_t_test(a, b)
        ref = scipy.stats.ttest_rel(a, b)
        assert result.t == pytest.approx(ref.statistic, abs=1e-12)
        assert result.p_value == pytest.approx(ref.pvalue, rel=1e-10)
        # frozen values from the verified oracle
        assert result.t == pytest.approx(2.3333333333333335, abs=1e-12)
        assert result.p_value == pytest.approx(0.0799596465455818, abs=1e-9)

    def test_large_shift_tiny_p(self):
        rng = np.random.default_rng(7)
        b = rng.normal(size=30)
        a = b + 10.0 + rng.normal(scale=0.1, size=30)
        assert paired_t_test(a, b).p_value < 1e-10

    def test_antisymmetry(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=12)
        b = rng.normal(size=12)
        fwd = paired_t_test(a, b)
        rev = paired_t_test(b, a)
        assert fwd.t == pytest.approx(-rev.t, abs=1e-12)
        assert fwd.p_value == pytest.approx(rev.p_value, abs=1e-12)

    def test_p_values_match_scipy_broadly(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            n = int(rng.integers(3, 40))
            a = rng.normal(size=n)
            b = a + rng.normal(scale=rng.uniform(0.1, 2.0), size=n)
            if np.std(a - b, ddof=1) == 0:
                continue
            result = paired_t_test(a, b)
            ref = scipy.stats.ttest_rel(a, b)
            assert result.p_value == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-12)
