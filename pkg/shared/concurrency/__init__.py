from .worker_pool import WorkerPool, WorkerPoolConfig, SERIAL_POOL_CONFIG

__all__ = ['WorkerPool', 'WorkerPoolConfig', 'SERIAL_POOL_CONFIG']
