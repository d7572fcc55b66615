from .app import create_app
from .cache import AdmissionGate, EntryTooLarge, GridCache, GridCacheEntry, grid_nbytes

__all__ = [
    "create_app",
    "GridCache",
    "GridCacheEntry",
    "AdmissionGate",
    "EntryTooLarge",
    "grid_nbytes",
]
