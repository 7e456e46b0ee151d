import json
import math
from pathlib import Path

import pytest

from domains.lattice import make_box
from domains.potential import make_potential
from domains.resonance import derive_params
from shared.config import ApplicationConfig, ConfigManager, set_config

GENERIC_SIDES = (math.pi, math.pi / math.sqrt(2.0))
SQUARE_SIDES = (math.pi, math.pi)

UNIT_POTENTIAL_TEXT = "m=2\n1 0 0.5\n0 1 0.5\n"


@pytest.fixture(autouse=True)
def app_settings():
    """Настройки приложения без чтения config.yaml"""
    manager = ConfigManager()
    manager.application = ApplicationConfig(
        log_level='INFO', log_file='', max_workers=2, sample_block_size=1024, max_modes=4096, max_cells=100_000
    )
    set_config(manager)
    yield manager.application
    set_config(None)


@pytest.fixture
def square_box():
    return make_box(SQUARE_SIDES)


@pytest.fixture
def generic_box():
    return make_box(GENERIC_SIDES)


@pytest.fixture
def unit_potential(generic_box):
    """cos x₁ + cos(√2 x₂) на боксе (π, π/√2)"""
    return make_potential([((1, 0), 0.5), ((0, 1), 0.5)], 2, generic_box)


@pytest.fixture
def zero_potential(generic_box):
    return make_potential([], 0, generic_box)


@pytest.fixture
def series_params():
    """Визуализационный режим: p₁ = 2, r^α ≈ 1.585, окно ±½"""
    return derive_params(100.0, 5, 0.75, 2, override=0.1, threshold_override=1.0)


@pytest.fixture
def write_run_config(tmp_path):
    """Фабрика: записывает потенциал и JSON запуска во временный каталог"""

    def factory(potential_text: str = UNIT_POTENTIAL_TEXT, **fields) -> Path:
        (tmp_path / 'potential.txt').write_text(potential_text, encoding='utf-8')
        data = {
            'box_sides': list(GENERIC_SIDES),
            'ell': 0.75,
            'r': 100.0,
            'p': 5,
            'kmax': 2,
            'potential_file': 'potential.txt',
            'potential_scale': 0.05,
            'cutoff': 12.0,
            'exponent_override': 0.1,
            'threshold_override': 0.5,
            'seed': 11,
            'n_samples': 2000,
            'output_dir': str(tmp_path / 'out'),
        }
        data.update(fields)
        path = tmp_path / 'run.json'
        path.write_text(json.dumps(data), encoding='utf-8')
        return path

    return factory
