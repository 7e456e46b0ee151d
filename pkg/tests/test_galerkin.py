import json

import numpy as np
import pytest

from domains.galerkin import (
    GalerkinService,
    SpectrumRepository,
    count_free_eigenvalues,
    expand_index_product,
    kato_pairing,
    product_expand,
    second_order_coefficient,
)
from domains.galerkin.repositories import CSV_HEADER
from domains.galerkin.schemas import Index
from domains.lattice import LatticeVector, basis_norm_sq, make_box
from domains.perturbation import PerturbationService
from domains.potential import evaluate_many, full_support, make_potential, mass, scale
from shared.utils import gauss_legendre_grid
from shared.utils.error_handlers import (
    BasisTooLarge,
    DomainMismatch,
    GalerkinError,
    NoEigenvalueInWindow,
    NoMatchedEigenpair,
)

BETA = (2, 1)


@pytest.fixture
def service(app_settings):
    return GalerkinService(app_settings)


@pytest.fixture
def matched(service, generic_box, unit_potential, series_params):
    """Спектр для ε = 0.05 на базисе cutoff = 15 с сопоставленной модой (2, 1)"""
    q = scale(unit_potential, 0.05)
    solution = service.spectrum(service.build_basis(generic_box, 15.0), q, 0.75)
    return q, service.match_all(solution, [BETA], series_params)


class TestProductExpansion:
    def test_mixed_axes(self):
        assert expand_index_product((1, 0), (2, 1)) == [((1, 1), 0.5), ((3, 1), 0.5)]

    def test_collects_equal_modes(self):
        assert expand_index_product((1, 1), (1, 1)) == [
            ((0, 0), 0.25), ((0, 2), 0.25), ((2, 0), 0.25), ((2, 2), 0.25)
        ]

    def test_signs_are_ignored(self):
        assert expand_index_product((-1, 0), (2, -1)) == expand_index_product((1, 0), (2, 1))

    def test_product_identity_pointwise(self, generic_box):
        q = make_potential([((1, 0), 0.5), ((1, 1), 0.25), ((0, 2), -0.3)], 2, generic_box)
        rng = np.random.default_rng(3)
        points = rng.uniform(0.0, 1.0, size=(100, 2)) * np.asarray(generic_box.sides)
        steps = np.asarray(generic_box.steps)

        def cosine(index):
            return np.prod(np.cos(points * (np.asarray(index) * steps)), axis=1)

        lhs = evaluate_many(q, points) * cosine(BETA)
        rhs = sum(c * cosine(tuple(b + d for b, d in zip(BETA, delta))) for delta, c in full_support(q))
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)

    def test_box_mismatch(self, generic_box, square_box):
        with pytest.raises(DomainMismatch):
            product_expand(LatticeVector(index=(1, 0), box=generic_box), LatticeVector(index=(1, 0), box=square_box))


class TestAssembly:
    def test_free_operator_is_exact(self, service, square_box):
        basis = service.build_basis(square_box, 5.0)
        solution = service.spectrum(basis, make_potential([], 0, square_box), 0.75)
        expected = np.sort([(n1 * n1 + n2 * n2) ** 0.75 for n1, n2 in basis.modes])
        np.testing.assert_allclose(solution.eigenvalues, expected, rtol=1e-12, atol=1e-12)
        assert solution.kato_gap <= 1e-12

    def test_symmetric(self, service, generic_box, unit_potential):
        matrix = service.assemble(service.build_basis(generic_box, 6.0), unit_potential, 0.75)
        np.testing.assert_array_equal(matrix, matrix.T)

    def test_matches_quadrature(self, service, square_box):
        q = make_potential([((1, 0), 0.5), ((1, 1), 0.25)], 2, square_box)
        basis = service.build_basis(square_box, 3.0)
        matrix = service.assemble(basis, q, 0.75)
        points, weights = gauss_legendre_grid(square_box.sides, 64)
        values = evaluate_many(q, points)
        steps = np.asarray(square_box.steps)
        modes = [np.prod(np.cos(points * (row * steps)[None, :]), axis=1) for row in basis.modes]
        for g, row_g in enumerate(basis.modes):
            for b, row_b in enumerate(basis.modes):
                oracle = np.sum(weights * values * modes[g] * modes[b]) / np.sqrt(
                    basis_norm_sq(tuple(row_g), square_box) * basis_norm_sq(tuple(row_b), square_box)
                )
                if g == b:
                    oracle += float(row_g @ row_g) ** 0.75
                assert matrix[g, b] == pytest.approx(oracle, abs=1e-10)

    def test_box_mismatch(self, service, square_box, unit_potential):
        with pytest.raises(DomainMismatch):
            service.assemble(service.build_basis(square_box, 3.0), unit_potential, 0.75)

    def test_basis_too_large(self, service, square_box):
        with pytest.raises(BasisTooLarge) as excinfo:
            service.build_basis(square_box, 100.0)
        assert excinfo.value.exit_code == 3

    def test_basis_order_and_positions(self, service, generic_box):
        basis = service.build_basis(generic_box, 4.0)
        rows = [tuple(int(n) for n in row) for row in basis.modes]
        assert rows == sorted(rows)
        assert basis.position((-2, 1)) == basis.position((2, 1)) == rows.index((2, 1))
        assert basis.position((9, 9)) is None


class TestSpectrum:
    def test_kato_gap_within_mass(self, matched):
        q, solution = matched
        assert solution.kato_gap <= mass(q)
        assert solution.max_residual < 1e-9

    def test_spectrum_continuous_in_coupling(self, service, generic_box, unit_potential):
        basis = service.build_basis(generic_box, 8.0)
        epsilon = 0.1
        strong = service.spectrum(basis, scale(unit_potential, epsilon), 0.75)
        weak = service.spectrum(basis, scale(unit_potential, epsilon / 2), 0.75)
        gap = kato_pairing(strong.eigenvalues, weak.eigenvalues)
        assert gap <= 2 * epsilon * mass(unit_potential)
        assert gap <= epsilon / 2 * mass(unit_potential) + 1e-12

    def test_match_dominates(self, matched, generic_box):
        _, solution = matched
        match = solution.match_for((-2, 1))
        assert match.beta == BETA
        assert match.dominance >= 0.5
        assert abs(match.xi - match.free_value) < match.window_half_width
        assert not match.tail
        assert match.h_unnormalized == pytest.approx(match.h * np.sqrt(basis_norm_sq(BETA, generic_box)))

    def test_binding_formula(self, matched, service):
        q, solution = matched
        report = service.verify_binding(solution, q, BETA)
        assert report.residual <= 1e-8
        assert not report.tail
        assert report.missing_targets == 0

    def test_parseval_mass(self, matched, service, series_params):
        _, solution = matched
        report = service.parseval_check(solution, BETA, series_params)
        assert report.inside_mass >= 0.99
        assert report.inside_mass + report.outside_mass == pytest.approx(1.0, abs=1e-12)

    def test_empty_window(self, matched, service, series_params):
        _, solution = matched
        with pytest.raises(NoEigenvalueInWindow):
            service.match_eigenvalue(BETA, solution, series_params, half_width=1e-9)

    def test_mode_outside_basis(self, matched, service, series_params):
        q, solution = matched
        with pytest.raises(NoMatchedEigenpair):
            service.match_eigenvalue((40, 0), solution, series_params)
        with pytest.raises(NoMatchedEigenpair):
            service.verify_binding(solution, q, (3, 3))

    def test_boundary_mode_is_tail(self, service, generic_box, unit_potential, series_params):
        solution = service.spectrum(service.build_basis(generic_box, 3.0), scale(unit_potential, 0.05), 0.75)
        assert service.match_eigenvalue((3, 0), solution, series_params).tail


class TestHelpers:
    def test_kato_pairing(self):
        assert kato_pairing([3.0, 1.0], [0.5, 2.0]) == 1.0
        with pytest.raises(GalerkinError):
            kato_pairing([1.0], [1.0, 2.0])

    def test_count_free_eigenvalues(self, square_box):
        assert count_free_eigenvalues(square_box, 1.0, 5.0) == 4

    def test_second_order_matches_series(self, service, app_settings, generic_box, unit_potential, series_params):
        basis = service.build_basis(generic_box, 6.0)
        matrix = service.assemble(basis, unit_potential, 0.75)
        coefficient = second_order_coefficient(basis, matrix, BETA, 0.75)
        series = PerturbationService(app_settings).F_sequence(1, BETA, unit_potential, series_params)
        assert coefficient == pytest.approx(series.F[1], rel=1e-10)


def test_spectrum_csv(tmp_path, service, square_box):
    q = make_potential([((1, 0), 0.05)], 2, square_box)
    solution = service.spectrum(service.build_basis(square_box, 2.0), q, 0.75)
    repository = SpectrumRepository(root=tmp_path)
    path = repository.write_csv(solution, 'spectrum.csv', {'seed': 7})
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == solution.size + 1
    assert lines[1].split(',')[0] == '0'
    sidecar = json.loads((tmp_path / 'spectrum.meta.json').read_text(encoding='utf-8'))
    assert sidecar == {'metadata': {'seed': 7}, 'size': solution.size}


def test_schema_exports_index():
    from domains.galerkin import schemas

    assert 'Index' in schemas.__all__
    assert Index == schemas.galerkin_schema.Index
