import numpy as np
import pytest

from fractalspec import (
    BudgetError,
    SpectrumEnumeration,
    ValidationError,
    completeness_scan,
    enumerate_spectrum,
    make_system,
    orthogonality_matrix,
    q_partial,
    q_partial_many,
    scale_system,
    separation,
)
from tests.conftest import grid1d


class TestEnumeration:
    def test_depth_one(self, cantor4):
        spec = enumerate_spectrum(cantor4, 1)
        assert spec.elements.ravel().tolist() == [0.0, 1.0, 4.0, 5.0]

    def test_depth_two(self, cantor4):
        spec = enumerate_spectrum(cantor4, 2)
        assert spec.elements.ravel().tolist() == [0, 1, 4, 5, 16, 17, 20, 21]

    def test_zero_frequencies_stay_trivial(self):
        s = make_system(4.0, [0.0], [0.0])
        for depth in (0, 1, 3):
            assert enumerate_spectrum(s, depth).elements.ravel().tolist() == [0.0]

    def test_nesting(self, cantor4):
        prev = set()
        for depth in range(4):
            current = set(enumerate_spectrum(cantor4, depth).elements.ravel())
            assert prev <= current
            prev = current

    def test_deduplication(self):
        # l0 + 2 l1 over {0,1,2}^2 collides: 9 words, 7 values
        s = make_system(2.0, [0.0, 1.0, 2.0], [0.0, 1.0, 2.0])
        spec = enumerate_spectrum(s, 1)
        assert spec.elements.ravel().tolist() == [0, 1, 2, 3, 4, 5, 6]

    def test_negative_depth(self, cantor4):
        with pytest.raises(ValidationError):
            enumerate_spectrum(cantor4, -1)

    def test_budget(self, cantor4):
        with pytest.raises(BudgetError):
            enumerate_spectrum(cantor4, 40)

    def test_scaled_base(self, cantor4):
        spec = enumerate_spectrum(scale_system(cantor4, 2), 1)
        assert spec.elements.ravel().tolist() == [0.0, 1.0, 8.0, 9.0]


class TestSeparation:
    def test_cantor4_depth_two(self, cantor4):
        assert separation(enumerate_spectrum(cantor4, 2)) == 1.0

    def test_two_elements(self, cantor4):
        spec = SpectrumEnumeration.from_elements(cantor4, [[0.0], [1.0]])
        assert separation(spec) == 1.0

    def test_scaled_depth_one(self, cantor4):
        assert separation(enumerate_spectrum(scale_system(cantor4, 2), 1)) == 1.0

    def test_nonincreasing_in_depth(self, cantor4):
        values = [
            separation(enumerate_spectrum(cantor4, depth)) for depth in range(4)
        ]
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_needs_two(self, cantor4):
        spec = SpectrumEnumeration.from_elements(cantor4, [[0.0]])
        with pytest.raises(ValidationError):
            separation(spec)


class TestOrthogonality:
    def test_cantor4_depth_two_exact(self, cantor4_measure, cantor4):
        max_off, table = orthogonality_matrix(
            cantor4_measure, enumerate_spectrum(cantor4, 2)
        )
        assert max_off == 0.0
        assert table.shape == (8, 8)
        assert np.all(np.diag(table) == 1.0)

    def test_singleton_vacuous(self, cantor4_measure, cantor4):
        spec = SpectrumEnumeration.from_elements(cantor4, [[0.0]])
        max_off, _ = orthogonality_matrix(cantor4_measure, spec)
        assert max_off == 0.0

    def test_odd_scale_pair_not_orthogonal(self, odd3, odd3_measure):
        spec = SpectrumEnumeration.from_elements(odd3, [[0.0], [1.0], [2.0]])
        max_off, table = orthogonality_matrix(odd3_measure, spec)
        # independent oracle: |mu-hat(2)| = prod |cos(pi 2 / (2 3^k))|
        oracle = np.prod([abs(np.cos(np.pi * 2 / (2 * 3.0**k))) for k in range(40)])
        assert table[0, 2] > 0.05
        assert table[0, 2] == pytest.approx(oracle, abs=1e-9)
        assert max_off > 0.05


class TestQPartial:
    def test_equals_one_on_spectrum(self, cantor4, cantor4_measure):
        spec = enumerate_spectrum(cantor4, 2)
        for lam in spec.elements:
            assert q_partial(cantor4_measure, spec, lam) == 1.0

    def test_trivial_singleton(self, cantor4, cantor4_measure):
        spec = SpectrumEnumeration.from_elements(cantor4, [[0.0]])
        assert q_partial(cantor4_measure, spec, [0.0]) == 1.0

    def test_monotone_in_depth(self, cantor4, cantor4_measure):
        values = [
            q_partial(cantor4_measure, enumerate_spectrum(cantor4, n), [0.5])
            for n in range(6)
        ]
        assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))
        assert values[-1] <= 1.0 + 1e-9

    def test_bessel_bound_on_grid(self, cantor4, cantor4_measure):
        spec = enumerate_spectrum(cantor4, 4)
        values = q_partial_many(cantor4_measure, spec, grid1d(0.0, 1.0, 0.01))
        assert np.all(values <= 1.0 + 1e-9)


class TestCompletenessScan:
    def test_cantor4_complete_evidence(self, cantor4, cantor4_measure):
        report = completeness_scan(
            cantor4_measure,
            enumerate_spectrum(cantor4, 2),
            grid1d(0.0, 1.0, 0.01),
            target=0.99,
        )
        assert report.status == "complete-evidence"
        assert report.converged
        assert report.min_Q >= 0.99
        assert report.max_Q <= 1.0 + 1e-9
        # increments genuinely shrank below the threshold
        assert abs(report.min_trace[-1] - report.min_trace[-2]) < 1e-4

    def test_single_exponential_never_spans(self, cantor4, cantor4_measure):
        spec = SpectrumEnumeration.from_elements(cantor4, [[0.0]])
        report = completeness_scan(
            cantor4_measure, spec, grid1d(0.0, 1.0, 0.01), target=0.99
        )
        assert report.min_Q < 0.99
        assert report.status == "incomplete-evidence"

    def test_grid_containing_only_spectrum_points(self, cantor4, cantor4_measure):
        report = completeness_scan(
            cantor4_measure,
            enumerate_spectrum(cantor4, 0),
            np.array([[0.0]]),
            target=0.99,
        )
        assert report.min_Q == 1.0
        assert report.status == "complete-evidence"

    def test_inconclusive_when_budget_runs_out(self, cantor4, cantor4_measure):
        report = completeness_scan(
            cantor4_measure,
            enumerate_spectrum(cantor4, 2),
            grid1d(0.0, 1.0, 0.05),
            target=1.0 - 1e-12,
            budget=8,  # depth 2 only; cannot deepen, cannot converge
        )
        assert report.status == "inconclusive"
        assert not report.converged

    def test_empty_grid_rejected(self, cantor4, cantor4_measure):
        with pytest.raises(ValidationError):
            completeness_scan(
                cantor4_measure,
                enumerate_spectrum(cantor4, 1),
                np.empty((0, 1)),
                target=0.99,
            )
