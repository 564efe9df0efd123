"""
verify 명령
검증 스위트를 실행해 항목별 측정 오차와 허용치를 출력한다.
"""
import logging

from app.utils.verification import run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 4


def cmd_verify(quick: bool = False) -> int:
    """검증 스위트 실행, 종료 코드 반환 (모두 통과 0, 실패 4)"""
    report = run_suite(quick=quick)

    print("=" * 60)
    print(f"  Verification ({'quick' if quick else 'full'})")
    print("=" * 60)
    for line in report.lines():
        print(line)
    print("-" * 60)

    failed = [check.name for check in report.checks if not check.passed]
    if failed:
        print(f"❌ 실패 {len(failed)}건: {', '.join(failed)}")
        return EXIT_VERIFICATION_FAILED
    print(f"✅ 전체 {len(report.checks)}건 통과")
    return EXIT_OK
