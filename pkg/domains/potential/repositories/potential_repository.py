import logging
import math
from pathlib import Path
from typing import List, Tuple

from domains.lattice import BoxDomain
from domains.potential.schemas import PotentialSpec
from domains.potential.services import make_potential
from shared.infrastructure import BaseRepository
from shared.infrastructure.repositories.base_repository import PathLike
from shared.utils.error_handlers import PotentialError, PotentialFileError

logger = logging.getLogger(__name__)

HEADER_PREFIX = "m="


class PotentialRepository(BaseRepository):
    """
    Файлы потенциала: строка-заголовок `m=<int>`, затем строки
    `n_1 … n_d coefficient`. Коэффициенты пишутся через repr, что даёт
    точное восстановление при чтении. Пустые строки и строки с `#` пропускаются.
    """

    def load(self, path: PathLike, box: BoxDomain) -> PotentialSpec:
        """Чтение потенциала из файла"""
        target = self._resolve(path)
        try:
            text = self._read_text(target)
        except FileNotFoundError:
            raise PotentialFileError(f"Файл потенциала не найден: {target}", {'path': str(target)})
        except (OSError, UnicodeDecodeError) as e:
            raise PotentialFileError(f"Не удалось прочитать файл потенциала {target}: {e}", {'path': str(target)})
        spec = self.parse(text, box, source=str(target))
        logger.info(f"Потенциал загружен из {target}: {len(spec.coeffs)} орбит, m={spec.smoothness_order}")
        return spec

    def parse(self, text: str, box: BoxDomain, source: str = "<text>") -> PotentialSpec:
        m = None
        entries: List[Tuple[Tuple[int, ...], float]] = []
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            if m is None:
                if not line.startswith(HEADER_PREFIX):
                    raise PotentialFileError(
                        f"{source}:{line_no}: ожидался заголовок 'm=<int>'", {'path': source, 'line': line_no}
                    )
                try:
                    m = int(line[len(HEADER_PREFIX):])
                except ValueError:
                    raise PotentialFileError(
                        f"{source}:{line_no}: некорректный порядок гладкости", {'path': source, 'line': line_no}
                    )
                continue
            fields = line.split()
            if len(fields) != box.dimension + 1:
                raise PotentialFileError(
                    f"{source}:{line_no}: ожидалось {box.dimension + 1} полей, получено {len(fields)}",
                    {'path': source, 'line': line_no},
                )
            try:
                index = tuple(int(f) for f in fields[:-1])
                value = float(fields[-1])
            except ValueError:
                raise PotentialFileError(
                    f"{source}:{line_no}: не удалось разобрать запись '{line}'", {'path': source, 'line': line_no}
                )
            if not math.isfinite(value):
                raise PotentialFileError(
                    f"{source}:{line_no}: коэффициент должен быть конечным, получено '{fields[-1]}'",
                    {'path': source, 'line': line_no},
                )
            entries.append((index, value))

        if m is None:
            raise PotentialFileError(f"{source}: отсутствует заголовок 'm=<int>'", {'path': source})
        try:
            return make_potential(entries, m, box)
        except PotentialError as e:
            raise PotentialFileError(f"{source}: {e.message}", {'path': source, **e.details})

    def render(self, q: PotentialSpec) -> str:
        lines = [f"{HEADER_PREFIX}{q.smoothness_order}"]
        for index in q.representatives:
            lines.append(" ".join(str(n) for n in index) + f" {q.coeffs[index]!r}")
        return "\n".join(lines) + "\n"

    def save(self, q: PotentialSpec, path: PathLike) -> Path:
        """Запись потенциала в файл"""
        target = self._write_text(path, self.render(q))
        logger.info(f"Потенциал сохранён в {target}")
        return target
