import logging
from pathlib import Path
from typing import Any, Dict, Optional

from domains.galerkin import COEFFICIENT_CONVENTION, GalerkinService
from domains.lattice import BoxDomain, LatticeVector, make_box
from domains.perturbation import PerturbationService
from domains.potential import PotentialRepository, PotentialSpec, make_potential, scale
from domains.resonance import ResonanceParams, ResonanceService, derive_params
from shared.config import RunConfig, get_config, load_run_config
from shared.infrastructure import BaseRepository
from shared.infrastructure.services.verification_service import VerificationService
from shared.utils.error_handlers import ConfigError, SpectralError

logger = logging.getLogger(__name__)


class RunContext:
    """Проверенные объекты одного запуска: бокс, параметры, потенциал и метаданные вывода"""

    def __init__(self, config: RunConfig, config_path: Path, box: BoxDomain, params: ResonanceParams,
                 unit_potential: PotentialSpec):
        self.config = config
        self.config_path = config_path
        self.box = box
        self.params = params
        self.unit_potential = unit_potential
        self.potential = scale(unit_potential, config.potential_scale)
        self.out_dir = Path(config.output_dir)

    @property
    def metadata(self) -> Dict[str, Any]:
        return {
            'config': self.config.model_dump(mode='json'),
            'override_active': self.params.override_active,
            'coefficient_convention': COEFFICIENT_CONVENTION,
        }

    def beta(self, override: Optional[list] = None) -> LatticeVector:
        index = override if override is not None else self.config.beta
        if index is None:
            raise ConfigError("Не задана мода β (поле beta или флаг --beta)")
        if len(index) != self.box.dimension or any(n < 0 for n in index):
            raise ConfigError(
                f"β должна состоять из {self.box.dimension} неотрицательных индексов", {'beta': list(index)}
            )
        return LatticeVector(index=tuple(int(n) for n in index), box=self.box)

    def __repr__(self) -> str:
        return f"RunContext(config='{self.config_path}', d={self.box.dimension}, ell={self.config.ell})"


def load_potential(config: RunConfig, config_path: Path, box: BoxDomain) -> PotentialSpec:
    """Потенциал из файла; путь берётся относительно каталога конфигурации"""
    if config.potential_file is None:
        return make_potential([], 0, box)
    return PotentialRepository(root=config_path.parent).load(config.potential_file, box)


def build_context(config_path: str, out: Optional[str] = None, seed: Optional[int] = None,
                  override_alpha: Optional[float] = None) -> RunContext:
    """
    Предварительная проверка запуска. Любая ошибка на этом этапе
    сообщается как ошибка конфигурации (код 2).
    """
    path = Path(config_path)
    config = load_run_config(path, output_dir=out, seed=seed, exponent_override=override_alpha)
    try:
        box = make_box(config.box_sides)
        params = derive_params(
            config.r, config.p, config.ell, box.dimension,
            override=config.exponent_override,
            threshold_override=config.threshold_override,
            allow_classical=config.allow_classical,
        )
        unit_potential = load_potential(config, path, box)
    except ConfigError:
        raise
    except SpectralError as e:
        raise ConfigError(e.message, {'cause': type(e).__name__, **e.details})
    context = RunContext(config, path, box, params, unit_potential)
    logger.info(f"Контекст запуска готов: {context}")
    return context


def get_galerkin_service() -> GalerkinService:
    return GalerkinService(get_config().application)


def get_perturbation_service(context: RunContext) -> PerturbationService:
    return PerturbationService(get_config().application, closure=context.config.closure)


def get_resonance_service() -> ResonanceService:
    return ResonanceService(get_config().application)


def get_verification_service(context: RunContext) -> VerificationService:
    return VerificationService(context.config, context.unit_potential, get_config().application)


def get_output_repository(context: RunContext) -> BaseRepository:
    return BaseRepository(root=context.out_dir)
