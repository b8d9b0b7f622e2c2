import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import grid_from_array
from nightgrid.errors import DegenerateCityError
from nightgrid.hotspots import (
    extract_hotspots,
    fractional_count,
    grid_stats,
    lorenz_threshold,
)

positive_grids = st.lists(
    st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=400
).filter(lambda vs: max(vs) > 0)


class TestLorenzThreshold:
    def test_uniform_is_zero(self):
        assert lorenz_threshold([5, 5, 5, 5]) == 0.0

    def test_single_peak(self):
        assert lorenz_threshold([1, 1, 1, 1, 6]) == pytest.approx(2 / 3, rel=1e-12)

    def test_with_zeros(self):
        assert lorenz_threshold([0, 0, 10]) == pytest.approx(2 / 3, rel=1e-12)

    def test_all_zero_degenerate(self):
        with pytest.raises(DegenerateCityError, match="no luminosity"):
            lorenz_threshold([0.0, 0.0])

    @settings(max_examples=100, deadline=None)
    @given(values=positive_grids)
    def test_range(self, values):
        f = lorenz_threshold(values)
        assert 0.0 <= f < 1.0


class TestFractionalCount:
    def test_single_peak(self):
        ct = fractional_count([1, 1, 1, 1, 6])
        assert ct == pytest.approx(10 / 6, rel=1e-12)
        assert ct / 5 == pytest.approx(2 / 6, rel=1e-12)  # = mean/max

    def test_uniform_equals_n(self):
        assert fractional_count([3.7] * 8) == pytest.approx(8.0, abs=1e-9)

    def test_only_max_contributes(self):
        assert fractional_count([10, 0, 0]) == 1.0

    @settings(max_examples=150, deadline=None)
    @given(values=positive_grids)
    def test_identity_with_threshold(self, values):
        # Ct/N == mean/max == 1 - F, the closed-form consistency of the
        # fractional count with the quantile threshold.
        arr = np.array(values)
        ct = fractional_count(arr)
        n = arr.size
        mu_over_rho = arr.mean() / arr.max()
        f = lorenz_threshold(arr)
        assert ct / n == pytest.approx(mu_over_rho, rel=1e-12)
        assert 1.0 - f == pytest.approx(mu_over_rho, rel=1e-12)
        assert 1.0 <= ct <= n


class TestExtractHotspots:
    def test_uniform_grid_selects_everything(self):
        grid = grid_from_array(np.full((3, 3), 4.2))
        hs = extract_hotspots(grid)
        assert hs.f_threshold == 0.0
        assert hs.count == 9

    def test_single_peak_selects_peak(self):
        grid = grid_from_array([[1, 1, 1], [1, 6, -9999]])
        hs = extract_hotspots(grid)
        assert hs.f_threshold == pytest.approx(2 / 3, rel=1e-12)
        assert hs.count == 1
        assert hs.values.tolist() == [6.0]

    def test_two_peaks(self):
        grid = grid_from_array([[9, 9, 1]])
        hs = extract_hotspots(grid)
        assert hs.f_threshold == pytest.approx(1 - (19 / 3) / 9, rel=1e-12)
        assert hs.count == 2
        assert hs.values.tolist() == [9.0, 9.0]

    def test_tie_break_row_major(self):
        # Four equal-valued cells at the cutoff; smaller row then column wins.
        grid = grid_from_array([[5, 5], [5, 5], [0, 0]])
        hs = extract_hotspots(grid)
        # mean/max = 4/6 -> k = floor(6 * 2/3) = 4
        assert hs.count == 4
        assert list(zip(hs.rows.tolist(), hs.cols.tolist())) == [
            (0, 0),
            (0, 1),
            (1, 0),
            (1, 1),
        ]

    def test_cells_property_matches_arrays(self):
        grid = grid_from_array([[9, 9, 1]])
        hs = extract_hotspots(grid)
        assert [(c.row, c.col, c.value) for c in hs.cells] == [(0, 0, 9.0), (0, 1, 9.0)]

    @settings(max_examples=60, deadline=None)
    @given(values=positive_grids, scale_exp=st.integers(-8, 8))
    def test_scale_invariance(self, values, scale_exp):
        # Power-of-two scaling keeps every ratio bit-exact.
        c = 2.0**scale_exp
        n = len(values)
        ncols = 1
        a = grid_from_array(np.array(values).reshape(n, ncols))
        b = grid_from_array(np.array(values).reshape(n, ncols) * c)
        ha, hb = extract_hotspots(a), extract_hotspots(b)
        assert ha.f_threshold == hb.f_threshold
        assert ha.count == hb.count
        assert ha.rows.tolist() == hb.rows.tolist()
        assert ha.fractional_count == hb.fractional_count

    def test_monotone_in_max(self):
        base = np.array([[1.0, 2.0, 3.0, 4.0, 10.0]])
        f_prev, k_prev = None, None
        for peak in (10.0, 20.0, 40.0, 80.0):
            arr = base.copy()
            arr[0, -1] = peak
            hs = extract_hotspots(grid_from_array(arr))
            if f_prev is not None:
                assert hs.f_threshold >= f_prev
                assert hs.count <= k_prev
            f_prev, k_prev = hs.f_threshold, hs.count

    @settings(max_examples=60, deadline=None)
    @given(values=positive_grids)
    def test_count_bounds_and_cutoff(self, values):
        grid = grid_from_array(np.array(values).reshape(len(values), 1))
        hs = extract_hotspots(grid)
        assert 1 <= hs.count <= len(values)
        assert hs.values.min() >= hs.density_cutoff
        excluded = sorted(values, reverse=True)[hs.count :]
        assert all(v <= hs.density_cutoff for v in excluded)

    def test_k_equals_n_iff_uniform(self):
        uniform = extract_hotspots(grid_from_array(np.full((4, 4), 3.0)))
        assert uniform.count == 16
        tilted = extract_hotspots(grid_from_array([[1.0, 1.0, 1.0, 2.0]]))
        assert tilted.count < 4


class TestGridStats:
    def test_values(self):
        s = grid_stats([1, 1, 1, 1, 6])
        assert s.n_valid == 5
        assert s.mean == 2.0
        assert s.max == 6.0
        assert s.total == 10.0
