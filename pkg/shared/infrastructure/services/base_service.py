import logging
from typing import Optional

from shared.config import ApplicationConfig, get_config

logger = logging.getLogger(__name__)


class BaseService:
    """Базовый сервис: настройки приложения (потоки, лимиты)"""

    def __init__(self, settings: Optional[ApplicationConfig] = None):
        """Инициализация базового сервиса"""
        self.settings = settings or get_config().application
        logger.info(f"Инициализирован {self.__class__.__name__} (потоков: {self.settings.max_workers})")

    @property
    def max_workers(self) -> int:
        return self.settings.max_workers

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(max_workers={self.max_workers})"
