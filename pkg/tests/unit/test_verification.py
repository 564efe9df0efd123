"""
검증 스위트 유닛 테스트
"""
import math

from app.utils.verification import CheckResult, run_suite


def _passing() -> CheckResult:
    return CheckResult("passing", 1e-12, 1e-8, True)


def _raising() -> CheckResult:
    raise RuntimeError("LU 분해 실패")


class TestRunSuite:
    """검증 항목 실행 테스트"""

    def test_raising_check_becomes_fail_line(self):
        report = run_suite(checks=[("passing", _passing), ("broken", _raising)])
        assert not report.passed
        assert [check.name for check in report.checks] == ["passing", "broken"]
        broken = report.checks[1]
        assert not broken.passed
        assert math.isnan(broken.measured)
        assert "RuntimeError: LU 분해 실패" in broken.detail
        assert report.lines()[1].startswith("[FAIL] broken")

    def test_later_checks_still_run(self):
        report = run_suite(checks=[("broken", _raising), ("passing", _passing)])
        assert report.checks[1].passed

    def test_all_passing(self):
        report = run_suite(checks=[("passing", _passing)])
        assert report.passed
        assert report.checks[0].elapsed >= 0.0
