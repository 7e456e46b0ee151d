import json

import pytest

from cli import build_context, main, parse_args
from cli import commands
from domains.galerkin import GalerkinService
from shared.infrastructure.services.verification_service import VerificationService
from shared.utils.error_handlers import ConfigError, NoEigenvalueInWindow


def run(command, config_path, *extra):
    return main([command, '--config', str(config_path), *extra])


def read_json(path):
    return json.loads(path.read_text(encoding='utf-8'))


def stderr_payload(capsys):
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith('{')]
    return json.loads(lines[-1])


class TestParser:
    def test_beta_flag(self):
        args = parse_args(['series', '--beta', '20,15', '--seed', '3'])
        assert args.beta == [20, 15]
        assert args.seed == 3
        assert args.config == 'configs/default_run.json'

    @pytest.mark.parametrize("argv", [
        ['series', '--beta', 'x,1'],
        ['measure', '--seed', '-1'],
        ['plot'],
        [],
    ])
    def test_invalid_arguments(self, argv):
        with pytest.raises(SystemExit) as excinfo:
            parse_args(argv)
        assert excinfo.value.code == 2


class TestContext:
    def test_flags_override_file(self, write_run_config, tmp_path):
        context = build_context(str(write_run_config()), out=str(tmp_path / 'elsewhere'), seed=9, override_alpha=0.2)
        assert context.config.seed == 9
        assert context.params.alpha == 0.2
        assert context.out_dir == tmp_path / 'elsewhere'
        assert context.metadata['override_active']
        assert context.potential.box == context.box

    def test_invalid_potential_is_config_error(self, write_run_config):
        with pytest.raises(ConfigError) as excinfo:
            build_context(str(write_run_config(potential_text="m=2\n0 0 1.0\n")))
        assert excinfo.value.exit_code == 2

    def test_missing_beta(self, write_run_config):
        with pytest.raises(ConfigError):
            build_context(str(write_run_config())).beta()


class TestSpectrum:
    def test_writes_eigenvalues(self, write_run_config, tmp_path):
        assert run('spectrum', write_run_config()) == 0
        payload = read_json(tmp_path / 'out' / 'spectrum.json')
        assert payload['basis_size'] == len(payload['eigenvalues']) == len(payload['free_values'])
        assert payload['kato_gap'] <= 0.1
        assert payload['metadata']['config']['seed'] == 11
        assert payload['box'] == pytest.approx([3.141592653589793, 3.141592653589793 / 2 ** 0.5])
        assert payload['matches'] == []
        assert 'match' not in payload

    def test_match_and_csv(self, write_run_config, tmp_path):
        assert run('spectrum', write_run_config(beta=[2, 1]), '--csv') == 0
        payload = read_json(tmp_path / 'out' / 'spectrum.json')
        assert len(payload['matches']) == 1
        entry = payload['matches'][0]
        assert set(entry) == {'beta', 'N', 'xi', 'h'}
        assert entry['beta'] == [2, 1]
        assert entry['xi'] == payload['eigenvalues'][entry['N']]
        assert payload['match']['beta'] == [2, 1]
        assert payload['binding']['residual'] <= 1e-8
        assert (tmp_path / 'out' / 'spectrum.csv').exists()
        assert (tmp_path / 'out' / 'spectrum.meta.json').exists()

    def test_unmatched_mode_still_writes_spectrum(self, write_run_config, tmp_path, monkeypatch, capsys):
        def empty_window(self, solution, betas, params):
            raise NoEigenvalueInWindow("пустое окно", {'beta': [2, 1]})

        monkeypatch.setattr(GalerkinService, 'match_all', empty_window)
        assert run('spectrum', write_run_config(beta=[2, 1])) == 3
        payload = read_json(tmp_path / 'out' / 'spectrum.json')
        assert payload['matches'] == []
        assert payload['match_error']['error'] == 'NoEigenvalueInWindow'
        assert len(payload['eigenvalues']) == payload['basis_size']
        assert stderr_payload(capsys)['error'] == 'NoEigenvalueInWindow'

    def test_missing_potential_file(self, write_run_config, capsys):
        assert run('spectrum', write_run_config(potential_file='absent.txt')) == 2
        assert stderr_payload(capsys)['error'] == 'PotentialFileError'

    def test_basis_over_cap(self, write_run_config, capsys):
        assert run('spectrum', write_run_config(cutoff=200.0)) == 3
        payload = stderr_payload(capsys)
        assert payload['error'] == 'BasisTooLarge'
        assert payload['exit_code'] == 3


class TestSeries:
    def test_resonant_mode_rejected(self, write_run_config, capsys):
        assert run('series', write_run_config(), '--beta', '2,1') == 4
        payload = stderr_payload(capsys)
        assert payload['error'] == 'ResonantMode'
        assert [-4, 0] in payload['details']['witnesses']

    def test_zero_potential(self, write_run_config, tmp_path):
        assert run('series', write_run_config(potential_file=None, beta=[20, 15])) == 0
        payload = read_json(tmp_path / 'out' / 'series.json')
        assert payload['F'] == [0.0, 0.0, 0.0]
        assert payload['predicted'] == payload['free_value']
        assert payload['override_active']

    def test_with_potential(self, write_run_config, tmp_path):
        assert run('series', write_run_config(beta=[20, 15])) == 0
        payload = read_json(tmp_path / 'out' / 'series.json')
        assert len(payload['F']) == 3
        assert payload['predicted'] == payload['free_value'] + payload['F'][1]
        assert payload['closure'] == 'orbit'

    def test_kmax_preflight(self, write_run_config, capsys):
        assert run('series', write_run_config(beta=[20, 15], kmax=3)) == 2
        assert stderr_payload(capsys)['details']['kmax'] == 3


class TestMeasureAndClassify:
    def test_measure_is_reproducible(self, write_run_config, tmp_path):
        path = write_run_config()
        target = tmp_path / 'out' / 'measure.json'
        assert run('measure', path) == 0
        first = target.read_bytes()
        assert run('measure', path) == 0
        assert target.read_bytes() == first
        payload = json.loads(first)
        assert 0.0 <= payload['fraction'] <= 1.0
        assert payload['results'][0]['n_samples'] == 2000

    def test_measure_radii(self, write_run_config, tmp_path):
        assert run('measure', write_run_config(measure_radii=[10.0, 100.0])) == 0
        payload = read_json(tmp_path / 'out' / 'measure.json')
        assert [m['r'] for m in payload['results']] == [10.0, 100.0]
        assert 'fraction' not in payload

    def test_classify_per_order(self, write_run_config, tmp_path):
        path = write_run_config(grid_counts=[50, 1], scan_betas=[[1, 0]], scan_ells=[0.6, 0.9])
        assert run('classify', path) == 0
        summary = read_json(tmp_path / 'out' / 'classify.json')['scans']
        assert [s['file'] for s in summary] == ['classify_ell_0.6.csv', 'classify_ell_0.9.csv']
        for s in summary:
            lines = (tmp_path / 'out' / s['file']).read_text(encoding='utf-8').splitlines()
            assert len(lines) == 51

    def test_classify_per_scale(self, write_run_config, tmp_path):
        path = write_run_config(
            grid_origin=[-20.0, 20.0], grid_spacing=[0.1, 0.1], grid_counts=[400, 1], scan_betas=[[1, 0]],
            scan_radii=[10.0, 1000.0], threshold_override=None,
        )
        assert run('classify', path) == 0
        summary = read_json(tmp_path / 'out' / 'classify.json')['scans']
        assert [s['file'] for s in summary] == ['classify_r_10.csv', 'classify_r_1000.csv']
        assert [s['r'] for s in summary] == [10.0, 1000.0]
        assert summary[0]['band_width'] < summary[1]['band_width']
        assert (tmp_path / 'out' / 'classify_r_1000.meta.json').exists()

    def test_classify_needs_plane(self, write_run_config):
        path = write_run_config(box_sides=[3.0, 3.0, 3.0], potential_file=None)
        assert run('classify', path) == 2


class TestVerify:
    @pytest.fixture
    def cheap_criteria(self, mocker):
        return mocker.patch.object(
            VerificationService, 'criteria',
            lambda self: [self.free_operator_exactness, self.assembly_quadrature],
        )

    def test_passes_and_reruns_identically(self, cheap_criteria, write_run_config, tmp_path):
        path = write_run_config()
        target = tmp_path / 'out' / 'verify.json'
        assert run('verify', path) == 0
        first = target.read_bytes()
        assert run('verify', path) == 0
        assert target.read_bytes() == first
        assert json.loads(first)['summary'] == {'passed': 2, 'failed': 0, 'skipped': 0, 'ok': True}

    def test_zero_tolerance_fails(self, cheap_criteria, write_run_config, tmp_path):
        assert run('verify', write_run_config(tolerance=0.0)) == 1
        payload = read_json(tmp_path / 'out' / 'verify.json')
        assert payload['summary']['failed'] == 2
        assert all('duration' not in c for c in payload['criteria'])


def test_interrupt_exit_code(write_run_config, monkeypatch):
    def interrupted(context, args):
        raise KeyboardInterrupt

    monkeypatch.setitem(commands.COMMAND_HANDLERS, 'measure', interrupted)
    assert run('measure', write_run_config()) == 130


def test_unexpected_error_reported(write_run_config, monkeypatch, capsys):
    def broken(context, args):
        raise RuntimeError("сломано")

    monkeypatch.setitem(commands.COMMAND_HANDLERS, 'measure', broken)
    assert run('measure', write_run_config()) == 3
    assert stderr_payload(capsys) == {'error': 'RuntimeError', 'message': 'сломано', 'exit_code': 3, 'details': {}}
