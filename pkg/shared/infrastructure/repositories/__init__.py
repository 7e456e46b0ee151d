from shared.infrastructure.repositories.base_repository import BaseRepository, dump_json

__all__ = ['BaseRepository', 'dump_json']
