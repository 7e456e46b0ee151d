import json
import math

import numpy as np
import pytest

from domains.lattice import LatticeVector, make_box, unit_step
from domains.resonance import (
    CSV_HEADER,
    SHELL_INNER,
    SHELL_OUTER,
    DomainLabel,
    FigureRepository,
    GridSpec,
    ResonanceService,
    band_width,
    classify_many,
    classify_point,
    coordinate_bound,
    coordinate_bound_check,
    default_alpha,
    derive_params,
    gap_matrix,
    mean_value_eta,
    rescale,
    resonance_gap,
    test_set as lattice_test_set,
)
from shared.config import ApplicationConfig
from shared.utils import block_rng, shell_samples
from shared.utils.error_handlers import (
    ConfigError,
    DepthOutOfRange,
    EmptyTestSet,
    GridTooLarge,
    OrderOutOfRange,
    ScaleTooSmall,
)


@pytest.fixture
def figure_params():
    return derive_params(100.0, 2, 0.75, 2, override=0.25)


@pytest.fixture
def service(app_settings):
    return ResonanceService(app_settings)


class TestDeriveParams:
    def test_default_alpha(self):
        assert default_alpha(0.75, 2) == pytest.approx(0.5 / 1188, rel=1e-12)
        assert default_alpha(0.75, 2) == pytest.approx(4.2088e-4, rel=1e-4)

    def test_threshold_at_large_scale(self):
        params = derive_params(1e6, 2, 0.75, 2)
        assert params.threshold == pytest.approx(1.01760, abs=1e-5)
        assert params.threshold == pytest.approx(params.r ** (3 * params.alpha), rel=1e-14)
        assert not params.override_active

    def test_derived_exponents(self):
        params = derive_params(100.0, 5, 0.75, 2, override=0.1)
        assert params.alpha_k == tuple(3 ** k * 0.1 for k in range(1, 6))
        assert params.p1 == 2
        assert params.c == math.floor(1 / 0.2) + 1
        assert params.perturbation_radius == pytest.approx(100.0 ** 0.1)
        assert params.test_radius == pytest.approx(5 * 100.0 ** 0.1)
        assert params.override_active
        assert params.max_depth == 2

    def test_literal_depth_is_empty(self):
        params = derive_params(100.0, 5, 0.75, 2)
        assert params.max_depth < 1

    def test_threshold_override(self):
        params = derive_params(100.0, 2, 0.75, 2, threshold_override=0.5)
        assert params.threshold == 0.5
        assert params.override_active
        assert params.alpha == default_alpha(0.75, 2)

    @pytest.mark.parametrize("ell", [0.5, 1.0, 1.3])
    def test_order_out_of_range(self, ell):
        with pytest.raises(OrderOutOfRange):
            derive_params(100.0, 2, ell, 2)

    def test_classical_flag(self):
        assert derive_params(100.0, 2, 1.0, 2, allow_classical=True).classical

    def test_scale_too_small(self):
        with pytest.raises(ScaleTooSmall):
            derive_params(1.0, 2, 0.75, 2)

    def test_depth_too_small(self):
        with pytest.raises(DepthOutOfRange):
            derive_params(100.0, 0, 0.75, 2)

    def test_rescale_keeps_overrides(self, figure_params):
        moved = rescale(figure_params, r=10.0, ell=0.6)
        assert moved.r == 10.0 and moved.ell == 0.6
        assert moved.exponent_override == 0.25
        assert moved.threshold == pytest.approx(10.0 ** 0.75)


class TestGap:
    def test_bisector_gives_zero(self, generic_box):
        beta = LatticeVector(index=(2, 1), box=generic_box)
        for ell in (0.6, 0.75, 0.9):
            assert resonance_gap(-0.5 * beta.components, beta, ell) == 0.0

    def test_classical_order(self):
        assert resonance_gap([3.0, 0.0], [2.0, 0.0], 1.0) == pytest.approx(16.0)

    def test_fractional_order(self):
        assert resonance_gap([3.0, 0.0], [2.0, 0.0], 0.75) == pytest.approx(5.98419, abs=1e-5)

    def test_relabeling_symmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            x = rng.normal(size=2) * 10
            beta = rng.integers(-4, 5, size=2).astype(float)
            assert resonance_gap(x, beta, 0.7) == pytest.approx(resonance_gap(x + beta, -beta, 0.7), rel=1e-12, abs=1e-12)

    def test_gap_matrix_matches_scalar(self):
        points = np.array([[3.0, 0.0], [1.0, 2.0]])
        components = np.array([[2.0, 0.0], [0.0, 1.0], [-1.0, 1.0]])
        matrix = gap_matrix(points, components, 0.8)
        for i, x in enumerate(points):
            for j, b in enumerate(components):
                assert matrix[i, j] == pytest.approx(resonance_gap(x, b, 0.8), rel=1e-13)


class TestTestSet:
    def test_excludes_origin_and_is_strict(self, square_box):
        params = derive_params(100.0, 2, 0.75, 2, override=0.1)
        vectors = lattice_test_set(params, square_box)
        assert all(not v.is_zero for v in vectors)
        assert all(v.norm < params.test_radius for v in vectors)
        assert [v.index for v in vectors] == sorted(v.index for v in vectors)

    def test_empty_test_set(self):
        box = make_box((1.0, 1.0))
        with pytest.raises(EmptyTestSet):
            lattice_test_set(derive_params(1.5, 1, 0.75, 2), box)


class TestClassification:
    def test_bisector_point_is_resonant(self, generic_box, figure_params):
        beta = LatticeVector(index=(1, 0), box=generic_box)
        label = classify_point(-0.5 * beta.components, figure_params, generic_box)
        assert label.is_resonance
        assert beta in label.witnesses

    def test_far_point_on_diagonal_is_nonresonant(self, generic_box, figure_params):
        label = classify_point([1e6, 1e6], figure_params, generic_box)
        assert label.kind == 'non_resonance'
        assert label.witnesses == ()

    def test_label_invariant(self, generic_box):
        with pytest.raises(ValueError):
            DomainLabel(kind='resonance', witnesses=())
        with pytest.raises(ValueError):
            DomainLabel(kind='non_resonance', witnesses=(unit_step(1, generic_box),))

    def test_monotone_in_threshold(self, generic_box, figure_params):
        rng = np.random.default_rng(17)
        points = shell_samples(rng, 300, 2, 50.0, 200.0)
        components = np.stack([b.components for b in lattice_test_set(figure_params, generic_box)])
        low = derive_params(100.0, 2, 0.75, 2, override=0.25, threshold_override=5.0)
        high = derive_params(100.0, 2, 0.75, 2, override=0.25, threshold_override=50.0)
        _, _, _, res_low = classify_many(points, low, components)
        _, _, _, res_high = classify_many(points, high, components)
        assert np.all(res_high[res_low])

    def test_classify_many_agrees_with_point(self, generic_box, figure_params):
        betas = lattice_test_set(figure_params, generic_box)
        components = np.stack([b.components for b in betas])
        points = shell_samples(np.random.default_rng(2), 40, 2, 50.0, 200.0)
        _, gap_min, witness_count, in_resonance = classify_many(points, figure_params, components)
        for i, x in enumerate(points):
            label = classify_point(x, figure_params, generic_box, betas)
            assert label.is_resonance == bool(in_resonance[i])
            assert len(label.witnesses) == witness_count[i]
        assert np.all(gap_min >= 0)


class TestCoordinateBound:
    def test_zero_vector_fails(self, figure_params):
        assert not coordinate_bound_check([0.0, 0.0], figure_params)

    def test_twice_the_bound_passes(self, figure_params):
        b = coordinate_bound(figure_params)
        assert coordinate_bound_check([2 * b, -2 * b], figure_params)

    @pytest.mark.parametrize("ell", [0.6, 0.75])
    def test_nonresonant_points_satisfy_bound(self, square_box, ell):
        params = derive_params(100.0, 2, ell, 2)
        components = np.stack([b.components for b in lattice_test_set(params, square_box)])
        points = shell_samples(block_rng(9, 0), 4000, 2, SHELL_INNER * 100.0, SHELL_OUTER * 100.0)
        _, _, _, in_resonance = classify_many(points, params, components)
        free = points[~in_resonance]
        assert free.shape[0] > 0
        for x in free:
            assert coordinate_bound_check(x, params)


class TestMeanValue:
    def test_eta_lies_between_norms(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            x = rng.normal(size=2) * 50
            beta = rng.integers(-5, 6, size=2).astype(float)
            eta = mean_value_eta(x, beta, 0.75)
            a, b = np.linalg.norm(x), np.linalg.norm(x + beta)
            if eta is None:
                continue
            assert min(a, b) * (1 - 1e-7) <= eta <= max(a, b) * (1 + 1e-7)

    def test_symmetric_case(self):
        assert mean_value_eta([-1.0, 0.0], [2.0, 0.0], 0.75) is None

    def test_classical_case(self):
        assert mean_value_eta([3.0, 0.0], [1.0, 0.0], 1.0) is None


class TestMeasure:
    def test_zero_width_shells(self, service, generic_box):
        params = derive_params(100.0, 2, 0.75, 2, override=0.25, threshold_override=0.0)
        result = service.nonresonance_fraction(params, generic_box, 2000, seed=1)
        assert result.fraction == 1.0
        assert result.stderr == 0.0
        assert result.override_active

    @pytest.mark.parametrize("n_samples", [5, 999])
    def test_too_few_samples(self, service, generic_box, n_samples):
        params = derive_params(100.0, 2, 0.75, 2)
        with pytest.raises(ConfigError) as excinfo:
            service.nonresonance_fraction(params, generic_box, n_samples, seed=1)
        assert excinfo.value.details == {'n_samples': n_samples, 'min_samples': 1000}
        assert excinfo.value.exit_code == 2

    def test_fraction_grows_with_scale(self, service, generic_box):
        base = derive_params(10.0, 2, 0.75, 2)
        small, large = service.measure_sweep(base, generic_box, [10.0, 100.0], 20000, seed=4)
        assert large.fraction >= small.fraction - 3 * math.hypot(small.stderr, large.stderr)
        assert large.r == 100.0

    def test_saturation_with_large_override(self, service, generic_box):
        params = derive_params(100.0, 2, 0.75, 2, override=0.25)
        assert service.nonresonance_fraction(params, generic_box, 2000, seed=4).fraction == 0.0

    def test_independent_of_thread_count(self, generic_box):
        params = derive_params(100.0, 2, 0.75, 2)
        serial = ResonanceService(ApplicationConfig(max_workers=1, sample_block_size=512))
        threaded = ResonanceService(ApplicationConfig(max_workers=4, sample_block_size=512))
        a = serial.nonresonance_fraction(params, generic_box, 5000, seed=99)
        b = threaded.nonresonance_fraction(params, generic_box, 5000, seed=99)
        assert a.fraction == b.fraction
        assert a.nonresonant_count == b.nonresonant_count

    def test_inclusions_hold(self, service, generic_box):
        for ell in (0.6, 0.75, 0.9):
            report = service.inclusion_violations(derive_params(100.0, 2, ell, 2), generic_box, 5000, seed=3)
            assert report.passed, report
            assert report.kappa > 0


class TestScan:
    def test_bisector_band_is_resonant(self, service, square_box):
        params = derive_params(100.0, 2, 0.75, 2, threshold_override=0.5)
        grid = GridSpec(origin=(-0.6, 3.0), spacing=(0.1, 0.1), counts=(3, 1))
        scan = service.scan_slice(params, grid, square_box, [unit_step(1, square_box)])
        assert bool(scan.in_resonance[1])
        assert scan.gap_min[1] == pytest.approx(0.0, abs=1e-12)

    def test_crossing_bisectors_have_two_witnesses(self, service, square_box):
        params = derive_params(100.0, 2, 0.75, 2, threshold_override=0.5)
        grid = GridSpec(origin=(-0.55, -0.55), spacing=(0.05, 0.05), counts=(3, 3))
        betas = [unit_step(1, square_box), unit_step(2, square_box)]
        scan = service.scan_slice(params, grid, square_box, betas)
        assert int(np.max(scan.witness_count)) == 2
        assert scan.gaps.shape == (9, 2)

    def test_band_narrows_with_order(self, service, square_box):
        params = derive_params(1e6, 2, 0.6, 2, threshold_override=0.5)
        grid = GridSpec(origin=(-8.0, 20.0), spacing=(0.05, 0.05), counts=(300, 1))
        scans = service.scan_ell_sweep(params, grid, square_box, [0.6, 0.75, 0.9], [unit_step(1, square_box)])
        widths = [band_width(scan) for scan in scans]
        assert widths[0] > widths[1] > widths[2] > 0
        assert [s.ell for s in scans] == [0.6, 0.75, 0.9]

    def test_band_widens_with_scale(self, service, square_box):
        params = derive_params(10.0, 2, 0.75, 2, override=0.05)
        grid = GridSpec(origin=(-20.0, 20.0), spacing=(0.1, 0.1), counts=(400, 1))
        scans = service.scan_r_sweep(params, grid, square_box, [10.0, 100.0, 1000.0], [unit_step(1, square_box)])
        widths = [band_width(scan) for scan in scans]
        assert 0 < widths[0] < widths[1] < widths[2] < 40.0
        assert [s.r for s in scans] == [10.0, 100.0, 1000.0]
        assert [s.threshold for s in scans] == pytest.approx([10.0 ** 0.15, 100.0 ** 0.15, 1000.0 ** 0.15])

    def test_grid_too_large(self, service, square_box):
        params = derive_params(100.0, 2, 0.75, 2, threshold_override=0.5)
        grid = GridSpec(origin=(0.0, 0.0), spacing=(1.0, 1.0), counts=(400, 400))
        with pytest.raises(GridTooLarge):
            service.scan_slice(params, grid, square_box, [unit_step(1, square_box)])

    def test_grid_row_order(self):
        grid = GridSpec(origin=(1.0, 10.0), spacing=(0.5, 2.0), counts=(2, 2))
        u, v = grid.plane_coordinates()
        assert list(u) == [1.0, 1.5, 1.0, 1.5]
        assert list(v) == [10.0, 10.0, 12.0, 12.0]
        assert grid.points(3).shape == (4, 3)


def test_figure_csv_and_sidecar(tmp_path, service, square_box):
    params = derive_params(100.0, 2, 0.75, 2, threshold_override=0.5)
    grid = GridSpec(origin=(-0.6, 3.0), spacing=(0.1, 0.1), counts=(3, 1))
    scan = service.scan_slice(params, grid, square_box, [unit_step(1, square_box)])
    repository = FigureRepository(root=tmp_path)
    path = repository.write_scan(scan, 'scan.csv', {'config': {'seed': 1}})
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 4
    assert lines[2].startswith("-0.5,3,")
    assert lines[2].endswith(",1,1")
    sidecar = json.loads((tmp_path / 'scan.meta.json').read_text(encoding='utf-8'))
    assert sidecar['metadata'] == {'config': {'seed': 1}}
    assert sidecar['resonance_cells'] == scan.resonance_cells
