import hashlib
import json
import logging
import threading
from typing import Any, Dict, Optional

from abc_lab_shared.domain.entities import MapExpr
from abc_lab_shared.mappers import MapExprMapper

logger = logging.getLogger(__name__)


class ProfileCacheService:
    """Cache em memória dos perfis de separação, chaveado por (impressão digital do mapa, grade, suporte)."""

    def __init__(self, max_entries: int = 64):
        self._cache: Dict[str, Any] = {}
        self.max_entries = max_entries
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def fingerprint(expr: MapExpr) -> str:
        return hashlib.sha256(MapExprMapper.to_json(expr).encode()).hexdigest()

    def _generate_key(self, prefix: str, **kwargs: Any) -> str:
        sorted_params = sorted(kwargs.items())
        params_str = json.dumps(sorted_params, sort_keys=True, default=str)
        hash_suffix = hashlib.sha256(params_str.encode()).hexdigest()[:16]
        return f"{prefix}:{hash_suffix}"

    def get(self, prefix: str, **kwargs: Any) -> Optional[Any]:
        key = self._generate_key(prefix, **kwargs)
        with self._lock:
            value = self._cache.get(key)
            if value is None:
                self.misses += 1
                logger.debug(f"Cache não encontrado: {key}")
                return None
            self.hits += 1
            logger.debug(f"Cache encontrado: {key}")
            return value

    def set(self, prefix: str, value: Any, **kwargs: Any) -> None:
        key = self._generate_key(prefix, **kwargs)
        with self._lock:
            if key not in self._cache and len(self._cache) >= self.max_entries:
                oldest = next(iter(self._cache))
                del self._cache[oldest]
                logger.debug(f"Cache cheio, removida a entrada mais antiga: {oldest}")
            self._cache[key] = value
            logger.debug(f"Cache definido: {key}")
