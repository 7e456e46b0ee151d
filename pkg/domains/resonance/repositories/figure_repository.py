import logging
from pathlib import Path
from typing import Any, Dict

from domains.resonance.schemas import ScanResult
from shared.infrastructure import BaseRepository
from shared.infrastructure.repositories.base_repository import PathLike, dump_json

logger = logging.getLogger(__name__)

CSV_HEADER = "x1,x2,gap_min,witness_count,in_resonance"


def _fmt(value: float) -> str:
    return format(float(value), '.12g')


class FigureRepository(BaseRepository):
    """Данные для рисунков: CSV по ячейкам и файл метаданных рядом с ним"""

    def render_scan(self, scan: ScanResult) -> str:
        lines = [CSV_HEADER]
        for u, v, g, w, res in zip(scan.u, scan.v, scan.gap_min, scan.witness_count, scan.in_resonance):
            lines.append(f"{_fmt(u)},{_fmt(v)},{_fmt(g)},{int(w)},{int(bool(res))}")
        return "\n".join(lines) + "\n"

    def write_scan(self, scan: ScanResult, path: PathLike, metadata: Dict[str, Any]) -> Path:
        """CSV среза и `<имя>.meta.json` с конфигурацией запуска"""
        target = self._write_text(path, self.render_scan(scan))
        sidecar = {
            'metadata': metadata,
            'ell': scan.ell,
            'r': scan.r,
            'threshold': scan.threshold,
            'betas': [list(b) for b in scan.betas],
            'grid': {
                'origin': list(scan.grid.origin),
                'spacing': list(scan.grid.spacing),
                'counts': list(scan.grid.counts),
            },
            'resonance_cells': scan.resonance_cells,
        }
        self._write_text(target.with_suffix('.meta.json'), dump_json(sidecar))
        logger.info(f"Данные среза записаны в {target} ({scan.grid.cell_count} ячеек)")
        return target
