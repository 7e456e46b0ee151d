import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np

from domains.galerkin.schemas import EigenSolution
from shared.infrastructure import BaseRepository
from shared.infrastructure.repositories.base_repository import PathLike, dump_json

logger = logging.getLogger(__name__)

CSV_HEADER = "N,eigenvalue,dominant_mode,dominant_weight"


class SpectrumRepository(BaseRepository):
    """CSV собственных значений: по строке на N и мода с наибольшим весом"""

    def render_csv(self, solution: EigenSolution) -> str:
        lines = [CSV_HEADER]
        weights = solution.vectors ** 2
        for N, value in enumerate(solution.eigenvalues):
            j = int(np.argmax(weights[:, N]))
            mode = " ".join(str(int(n)) for n in solution.basis.modes[j])
            lines.append(f"{N},{format(float(value), '.15g')},{mode},{format(float(weights[j, N]), '.12g')}")
        return "\n".join(lines) + "\n"

    def write_csv(self, solution: EigenSolution, path: PathLike, metadata: Dict[str, Any]) -> Path:
        target = self._write_text(path, self.render_csv(solution))
        self._write_text(target.with_suffix('.meta.json'), dump_json({'metadata': metadata, 'size': solution.size}))
        logger.info(f"Спектр записан в {target} ({solution.size} значений)")
        return target
