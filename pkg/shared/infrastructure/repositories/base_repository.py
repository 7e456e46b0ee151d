import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def dump_json(payload: Dict[str, Any]) -> str:
    """Детерминированная сериализация: одинаковые данные дают одинаковые байты"""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class BaseRepository:
    """Базовый файловый репозиторий: текстовые файлы UTF-8 внутри корневого каталога"""

    def __init__(self, root: Optional[PathLike] = None):
        """Инициализация репозитория с корневым каталогом"""
        self.root = Path(root) if root is not None else None
        logger.debug(f"Инициализирован {self.__class__.__name__} (корень: {self.root or 'не задан'})")

    def _resolve(self, path: PathLike) -> Path:
        path = Path(path)
        if self.root is not None and not path.is_absolute():
            return self.root / path
        return path

    def _write_text(self, path: PathLike, text: str) -> Path:
        """Запись через временный файл, чтобы не оставлять обрезанных результатов"""
        target = self._resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(target.name + '.tmp')
        with open(tmp, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(tmp, target)
        logger.debug(f"Записан файл {target}")
        return target

    def _read_text(self, path: PathLike) -> str:
        target = self._resolve(path)
        with open(target, 'r', encoding='utf-8') as f:
            return f.read()

    def write_json(self, path: PathLike, payload: Dict[str, Any]) -> Path:
        return self._write_text(path, dump_json(payload))

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(root='{self.root}')"
