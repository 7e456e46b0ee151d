import json

import pytest

from shared.config import ApplicationConfig, ConfigManager, RunConfig, get_config, load_run_config, set_config
from shared.utils.error_handlers import ConfigError


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig(box_sides=[1.0, 2.0])
        assert config.ell == 0.75
        assert config.closure == 'orbit'
        assert config.dimension == 2
        assert not config.override_active

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            RunConfig(box_sides=[1.0, 2.0], colour='red')

    @pytest.mark.parametrize("fields", [
        {'box_sides': [1.0]},
        {'box_sides': [1.0, -2.0]},
        {'box_sides': [1.0, 1.0], 'ell': 0.5},
        {'box_sides': [1.0, 1.0], 'ell': 1.0},
        {'box_sides': [1.0, 1.0], 'r': 1.0},
        {'box_sides': [1.0, 1.0], 'n_samples': 10},
        {'box_sides': [1.0, 1.0], 'beta': [1, 2, 3]},
        {'box_sides': [1.0, 1.0], 'beta': [-1, 2]},
        {'box_sides': [1.0, 1.0], 'grid_counts': [0, 1]},
        {'box_sides': [1.0, 1.0], 'grid_spacing': [0.1, 0.0]},
        {'box_sides': [1.0, 1.0], 'scan_ells': [0.7, 1.2]},
        {'box_sides': [1.0, 1.0], 'measure_radii': [0.5]},
        {'box_sides': [1.0, 1.0], 'scan_radii': [10.0, 1.0]},
        {'box_sides': [1.0, 1.0], 'closure': 'ring'},
        {'box_sides': [1.0, 1.0], 'seed': -1},
    ])
    def test_invalid_values(self, fields):
        with pytest.raises(ValueError):
            RunConfig(**fields)

    def test_classical_allowed_with_flag(self):
        assert RunConfig(box_sides=[1.0, 1.0], ell=1.0, allow_classical=True).ell == 1.0

    def test_override_flag(self):
        assert RunConfig(box_sides=[1.0, 1.0], threshold_override=0.0).override_active


class TestLoadRunConfig:
    def test_overrides_applied(self, write_run_config, tmp_path):
        path = write_run_config()
        config = load_run_config(path, seed=5, output_dir=None, exponent_override=0.2)
        assert config.seed == 5
        assert config.exponent_override == 0.2
        assert config.output_dir == str(tmp_path / 'out')

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as excinfo:
            load_run_config(tmp_path / 'absent.json')
        assert excinfo.value.exit_code == 2

    def test_malformed_json(self, tmp_path):
        path = tmp_path / 'run.json'
        path.write_text('{"box_sides": [1.0,', encoding='utf-8')
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_not_an_object(self, tmp_path):
        path = tmp_path / 'run.json'
        path.write_text('[1, 2]', encoding='utf-8')
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_validation_errors_listed(self, write_run_config):
        path = write_run_config(ell=0.3, colour='red')
        with pytest.raises(ConfigError) as excinfo:
            load_run_config(path)
        fields = {e['field'] for e in excinfo.value.details['errors']}
        assert 'colour' in fields

    def test_metadata_dump_is_json(self, write_run_config):
        config = load_run_config(write_run_config())
        dumped = config.model_dump(mode='json')
        assert json.loads(json.dumps(dumped)) == dumped


class TestConfigManager:
    def test_yaml_loading(self, tmp_path):
        path = tmp_path / 'config.yaml'
        path.write_text("application:\n  max_workers: 3\n  max_modes: 128\n", encoding='utf-8')
        manager = ConfigManager().load_from_file(path)
        assert manager.application.max_workers == 3
        assert manager.application.max_modes == 128
        assert manager.validate()
        assert str(path) in str(manager)

    def test_missing_file_keeps_defaults(self, tmp_path):
        manager = ConfigManager().load_from_file(tmp_path / 'none.yaml')
        assert manager.application.max_cells == ApplicationConfig().max_cells

    def test_unsupported_format(self, tmp_path):
        path = tmp_path / 'config.ini'
        path.write_text("[application]\n", encoding='utf-8')
        with pytest.raises(ValueError):
            ConfigManager().load_from_file(path)

    def test_global_instance(self, app_settings):
        assert get_config().application is app_settings
        replacement = ConfigManager()
        set_config(replacement)
        assert get_config() is replacement
