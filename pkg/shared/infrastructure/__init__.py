"""
Infrastructure package for shared components.
"""

from .repositories.base_repository import BaseRepository, dump_json
from .schemas.base_schema import BaseSchema, ReportSchema

__all__ = [
    'BaseRepository',
    'dump_json',
    'BaseSchema',
    'ReportSchema',
]
