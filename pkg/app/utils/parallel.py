"""
병렬 실행 유틸리티
독립 작업(원천점별 풀이, 표본 블록)을 스레드 풀에 나누어 순서 보존으로 모은다.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from app.config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# CLI --threads 로 설정되는 프로세스 단위 덮어쓰기
_worker_override: Optional[int] = None


def set_worker_count(threads: Optional[int]) -> None:
    """작업 스레드 수 지정 (0 또는 None이면 Settings 값 사용)"""
    global _worker_override
    _worker_override = threads if threads else None


def worker_count() -> int:
    if _worker_override is not None:
        return _worker_override
    return get_settings().worker_count


def chunk_ranges(total: int, n_chunks: int) -> List[range]:
    """0..total-1 을 연속 구간 n_chunks 개로 분할 (빈 구간 제외)"""
    n_chunks = max(1, min(n_chunks, total))
    bounds = [total * k // n_chunks for k in range(n_chunks + 1)]
    return [range(bounds[k], bounds[k + 1]) for k in range(n_chunks) if bounds[k] < bounds[k + 1]]


def parallel_map(func: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """
    items 순서를 유지하는 병렬 map

    결과는 작업 배정과 무관하게 입력 순서대로 반환되므로 스레드 수가 결과를 바꾸지 않는다.
    """
    n_workers = workers or worker_count()
    if n_workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=n_workers) as executor:
        return list(executor.map(func, items))
