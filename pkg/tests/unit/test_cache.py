"""
솔버 캐시 유닛 테스트
"""
from app.services.cache import InMemoryCache


class TestInMemoryCache:
    """LRU 캐시 테스트"""

    def test_get_and_set(self):
        cache = InMemoryCache(capacity=4)
        cache.set("a", 1)
        assert cache.get("a") == 1
        assert cache.get("missing") is None
        assert cache.hits == 1
        assert cache.misses == 1

    def test_least_recently_used_evicted(self):
        cache = InMemoryCache(capacity=2)
        cache.set("a", 1)
        cache.set("b", 2)
        cache.get("a")
        cache.set("c", 3)
        assert cache.get("b") is None
        assert cache.get("a") == 1
        assert cache.get("c") == 3
        assert len(cache) == 2

    def test_zero_capacity_disables_storage(self):
        cache = InMemoryCache(capacity=0)
        cache.set("a", 1)
        assert len(cache) == 0

    def test_get_or_set_calls_factory_once(self):
        cache = InMemoryCache(capacity=2)
        calls = []

        def factory() -> str:
            calls.append(1)
            return "value"

        assert cache.get_or_set("k", factory) == "value"
        assert cache.get_or_set("k", factory) == "value"
        assert len(calls) == 1

    def test_clear_returns_count(self):
        cache = InMemoryCache(capacity=3)
        cache.set("a", 1)
        cache.set("b", 2)
        assert cache.clear() == 2
        assert len(cache) == 0

    def test_solver_key_depends_on_all_parts(self):
        cache = InMemoryCache(capacity=1)
        base = cache.make_solver_key("abc", 2.0, 64)
        assert base == cache.make_solver_key("abc", 2.0, 64)
        assert base != cache.make_solver_key("abd", 2.0, 64)
        assert base != cache.make_solver_key("abc", 2.0000001, 64)
        assert base != cache.make_solver_key("abc", 2.0, 128)
        assert base.startswith("solver:")
