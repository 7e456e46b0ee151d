import os
import json
import logging
from typing import List, Literal, Optional, Union
from pathlib import Path
from pydantic import BaseModel, ConfigDict, ValidationError, Field, field_validator, model_validator
import yaml
from dotenv import load_dotenv

from shared.utils.error_handlers import ConfigError

load_dotenv()

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64


class ApplicationConfig(BaseModel):
    """Конфигурация на уровне приложения"""
    log_level: str = Field(default_factory=lambda: os.getenv('SPECTRAL_LOG_LEVEL', 'INFO'))
    log_file: str = Field(default="")
    max_workers: int = Field(default_factory=lambda: int(os.getenv('SPECTRAL_MAX_WORKERS', '4')), ge=1)
    sample_block_size: int = Field(default=4096, ge=1)
    max_modes: int = Field(default=4096, ge=1)
    max_cells: int = Field(default=1_000_000, ge=1)


class RunConfig(BaseModel):
    """
    Параметры одного запуска. Плоский JSON-объект; неизвестные ключи запрещены.

    Копия модели целиком попадает в блок metadata каждого выходного файла.
    """
    model_config = ConfigDict(extra='forbid', frozen=True)

    box_sides: List[float]
    ell: float = 0.75
    allow_classical: bool = False
    r: float = 1.0e6
    p: int = Field(default=2, ge=1)
    kmax: int = Field(default=1, ge=1)
    potential_file: Optional[str] = None
    potential_scale: float = 1.0
    cutoff: float = Field(default=15.0, gt=0)
    exponent_override: Optional[float] = Field(default=None, gt=0)
    threshold_override: Optional[float] = Field(default=None, ge=0)
    closure: Literal['orbit', 'zero_sum'] = 'orbit'
    seed: int = Field(default=0, ge=0, lt=SEED_LIMIT)
    n_samples: int = Field(default=100_000, ge=1000)
    output_dir: str = "output"
    beta: Optional[List[int]] = None
    grid_origin: List[float] = Field(default_factory=lambda: [-8.0, 20.0])
    grid_spacing: List[float] = Field(default_factory=lambda: [0.05, 0.05])
    grid_counts: List[int] = Field(default_factory=lambda: [300, 1])
    scan_betas: Optional[List[List[int]]] = None
    scan_ells: Optional[List[float]] = None
    scan_radii: Optional[List[float]] = None
    measure_radii: Optional[List[float]] = None
    tolerance: float = Field(default=1e-10, ge=0)
    emit_csv: bool = False

    @field_validator('box_sides')
    @classmethod
    def _check_sides(cls, value: List[float]) -> List[float]:
        if len(value) < 2:
            raise ValueError("box_sides: нужно не меньше двух сторон")
        if any(a <= 0 for a in value):
            raise ValueError("box_sides: все стороны должны быть положительны")
        return value

    @field_validator('grid_origin', 'grid_spacing')
    @classmethod
    def _check_pair(cls, value: List[float]) -> List[float]:
        if len(value) != 2:
            raise ValueError("ожидается ровно два числа")
        return value

    @field_validator('grid_counts')
    @classmethod
    def _check_counts(cls, value: List[int]) -> List[int]:
        if len(value) != 2 or any(n < 1 for n in value):
            raise ValueError("grid_counts: два положительных целых")
        return value

    @model_validator(mode='after')
    def _check_consistency(self) -> 'RunConfig':
        upper_ok = self.ell <= 1.0 if self.allow_classical else self.ell < 1.0
        if not (self.ell > 0.5 and upper_ok):
            raise ValueError(f"ell={self.ell} вне допустимого интервала")
        if self.r <= 1.0:
            raise ValueError(f"r={self.r} должно быть больше 1")
        if any(h <= 0 for h in self.grid_spacing):
            raise ValueError("grid_spacing: шаги должны быть положительны")
        d = len(self.box_sides)
        if self.beta is not None:
            if len(self.beta) != d or any(n < 0 for n in self.beta):
                raise ValueError(f"beta: нужно {d} неотрицательных индексов")
        if self.scan_betas is not None and any(len(b) != d for b in self.scan_betas):
            raise ValueError(f"scan_betas: каждый вектор должен иметь длину {d}")
        if self.measure_radii is not None and any(v <= 1.0 for v in self.measure_radii):
            raise ValueError("measure_radii: все значения должны быть больше 1")
        if self.scan_radii is not None and any(v <= 1.0 for v in self.scan_radii):
            raise ValueError("scan_radii: все значения должны быть больше 1")
        if self.scan_ells is not None:
            for ell in self.scan_ells:
                upper = ell <= 1.0 if self.allow_classical else ell < 1.0
                if not (ell > 0.5 and upper):
                    raise ValueError(f"scan_ells: {ell} вне допустимого интервала")
        return self

    @property
    def dimension(self) -> int:
        return len(self.box_sides)

    @property
    def override_active(self) -> bool:
        return self.exponent_override is not None or self.threshold_override is not None


class ConfigManager:
    """
    Централизованный менеджер конфигурации.

    Настройки приложения загружаются из config.yaml (или JSON), параметры
    запуска читаются из отдельного JSON-файла через load_run_config.
    """

    def __init__(self):
        self.application: ApplicationConfig = ApplicationConfig()
        self._loaded_from: str = "defaults"

    def load_from_file(self, config_path: Union[str, Path]) -> 'ConfigManager':
        """Загрузка настроек приложения из файла YAML или JSON"""
        try:
            config_path = Path(config_path)

            if not config_path.exists():
                logger.warning(f"Файл конфигурации не найден: {config_path}. Используются значения по умолчанию.")
                return self

            config_data = _read_mapping(config_path)

            if 'application' in config_data:
                self.application = ApplicationConfig(**config_data['application'])

            self._loaded_from = str(config_path)
            logger.info(f"Конфигурация приложения загружена из файла: {config_path}")
            return self

        except Exception as e:
            logger.error(f"Ошибка загрузки конфигурации из файла: {e}")
            raise

    def validate(self) -> bool:
        """Валидация текущей конфигурации"""
        try:
            self.application.model_validate(self.application.model_dump())
            return True
        except ValidationError as e:
            logger.error(f"Ошибка валидации конфигурации: {e}")
            return False

    def __str__(self) -> str:
        return f"ConfigManager(loaded_from='{self._loaded_from}', workers={self.application.max_workers})"

    def __repr__(self) -> str:
        return self.__str__()


def _read_mapping(path: Path) -> dict:
    suffix = path.suffix.lower()
    with open(path, 'r', encoding='utf-8') as f:
        if suffix in ['.yaml', '.yml']:
            data = yaml.safe_load(f)
        elif suffix == '.json':
            data = json.load(f)
        else:
            raise ValueError(f"Неподдерживаемый формат файла конфигурации: {path.suffix}")
    return data or {}


def load_run_config(path: Union[str, Path], **overrides) -> RunConfig:
    """
    Читает параметры запуска из JSON. Переопределения (флаги CLI) с
    значением None игнорируются; итоговая модель валидируется заново.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Файл параметров запуска не найден: {path}", {'path': str(path)})
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Некорректный JSON в {path}: {e}", {'path': str(path)})
    if not isinstance(data, dict):
        raise ConfigError("Параметры запуска должны быть JSON-объектом", {'path': str(path)})

    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        config = RunConfig(**data)
    except ValidationError as e:
        errors = [
            {'field': '.'.join(str(p) for p in err['loc']), 'message': err['msg']}
            for err in e.errors()
        ]
        raise ConfigError(f"Ошибка валидации параметров запуска: {len(errors)} ошибок", {'errors': errors})
    logger.info(f"Параметры запуска загружены из файла: {path}")
    return config


_config_instance: Optional[ConfigManager] = None


def get_config() -> ConfigManager:
    """Получить глобальный экземпляр конфигурации (путь берётся из CONFIG_PATH)"""
    global _config_instance
    if _config_instance is None:
        _config_instance = ConfigManager()
        config_path = os.getenv('CONFIG_PATH', './config.yaml')
        _config_instance.load_from_file(config_path)
    return _config_instance


def set_config(config: Optional[ConfigManager]) -> None:
    """Установить глобальный экземпляр конфигурации"""
    global _config_instance
    _config_instance = config
