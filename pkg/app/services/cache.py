"""
인메모리 캐시
경계적분 연산자 LU 분해를 (형상, 파수, 노드 수) 단위로 재사용하는 LRU 캐시
"""
import hashlib
import json
import threading
from collections import OrderedDict
from typing import Any, Callable, Dict, Optional, TypeVar

from app.config import get_settings

T = TypeVar("T")


class InMemoryCache:
    """스레드 안전 LRU 캐시"""

    def __init__(self, capacity: Optional[int] = None) -> None:
        self._entries: "OrderedDict[str, Any]" = OrderedDict()
        self._lock = threading.Lock()
        self._capacity = get_settings().solver_cache_size if capacity is None else capacity
        self.hits = 0
        self.misses = 0

    @staticmethod
    def _make_key(prefix: str, params: Dict[str, Any]) -> str:
        """캐시 키 생성"""
        # 파라미터를 정렬하여 일관된 키 생성
        sorted_params = json.dumps(params, sort_keys=True, ensure_ascii=False)
        hash_val = hashlib.md5(sorted_params.encode()).hexdigest()[:12]
        return f"{prefix}:{hash_val}"

    def get(self, key: str) -> Optional[Any]:
        """캐시 조회"""
        with self._lock:
            if key not in self._entries:
                self.misses += 1
                return None
            self._entries.move_to_end(key)
            self.hits += 1
            return self._entries[key]

    def set(self, key: str, value: Any) -> None:
        """캐시 저장 (용량 초과 시 가장 오래된 항목 제거)"""
        if self._capacity <= 0:
            return
        with self._lock:
            self._entries[key] = value
            self._entries.move_to_end(key)
            while len(self._entries) > self._capacity:
                self._entries.popitem(last=False)

    def clear(self) -> int:
        """전체 캐시 삭제"""
        with self._lock:
            count = len(self._entries)
            self._entries.clear()
            return count

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def get_or_set(self, key: str, factory: Callable[[], T]) -> T:
        """캐시 조회 또는 생성"""
        value = self.get(key)
        if value is not None:
            return value  # type: ignore[no-any-return]

        # 팩토리 함수 실행 (잠금 밖에서 분해 수행)
        value = factory()
        self.set(key, value)
        return value

    def make_solver_key(self, shape_fingerprint: str, kappa: float, n_bdy: int) -> str:
        """솔버 캐시 키 생성"""
        return self._make_key(
            "solver", {"shape": shape_fingerprint, "kappa": repr(float(kappa)), "n_bdy": n_bdy}
        )


# 싱글톤 인스턴스
_cache: Optional[InMemoryCache] = None


def get_cache() -> InMemoryCache:
    """캐시 싱글톤 반환"""
    global _cache
    if _cache is None:
        _cache = InMemoryCache()
    return _cache
