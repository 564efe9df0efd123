"""
CLI 메인 진입점
수동 장애물 영상화: 합성 데이터 생성(simulate), 역산(invert), 검증(verify)

사용법:
    python -m app.main simulate --config configs/source_reconstruction.json --out runs/source
    python -m app.main invert --mode source --config configs/source_reconstruction.json --data runs/source
    python -m app.main verify --quick
"""
import argparse
import logging
import sys
from typing import List, Optional

from app import __version__
from app.config import get_settings
from app.core.errors import (
    ConfigError,
    DataFormatError,
    GeometryError,
    NumericalError,
    PassiveImagingError,
)
from app.utils.parallel import set_worker_count

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passive-imaging",
        description="상관 데이터 기반 2D 수동 장애물 영상화",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
예시:
    python -m app.main simulate --config configs/disk_recovery.json --out runs/disk   # 합성 데이터
    python -m app.main invert --mode shape --config configs/disk_recovery.json --data runs/disk
    python -m app.main verify --quick                                     # 1분 이내 검증
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="작업 스레드 수 (기본값: 설정값, 0이면 모든 코어)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="합성 표본과 경험 공분산 생성")
    simulate.add_argument("--config", required=True, help="실험 설정 JSON")
    simulate.add_argument("--out", default=None, help="출력 디렉터리")

    invert = sub.add_parser("invert", help="관측 공분산에서 역산")
    invert.add_argument(
        "--mode",
        choices=["source", "shape", "joint", "newton-cg"],
        default=None,
        help="역산 방식 (기본값: 설정의 inversion.mode)",
    )
    invert.add_argument("--config", required=True, help="실험 설정 JSON")
    invert.add_argument("--data", required=True, help="simulate 출력 디렉터리 또는 cobs.phlm")
    invert.add_argument("--out", default=None, help="출력 디렉터리")

    verify = sub.add_parser("verify", help="검증 스위트 실행")
    verify.add_argument("--quick", action="store_true", help="1분 이내 부분집합만 실행")
    return parser


def run(args: argparse.Namespace) -> int:
    """하위 명령 실행 후 종료 코드 반환"""
    if args.command == "simulate":
        from app.commands.simulate import cmd_simulate

        for name, path in cmd_simulate(args.config, args.out).items():
            print(f"  {name:<16} {path}")
        return EXIT_OK

    if args.command == "invert":
        from app.commands.invert import cmd_invert

        for name, path in cmd_invert(args.mode, args.config, args.data, args.out).items():
            print(f"  {name:<16} {path}")
        return EXIT_OK

    from app.commands.verify import cmd_verify

    return cmd_verify(quick=args.quick)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s - %(message)s",
    )
    set_worker_count(settings.threads if args.threads is None else args.threads)

    try:
        return run(args)
    except (ConfigError, DataFormatError, GeometryError) as e:
        field = getattr(e, "field", None)
        suffix = f" (필드: {field})" if field else ""
        logger.error(f"[CLI] 설정/데이터 오류{suffix}: {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"[CLI] 수치 계산 실패: {e}")
        return EXIT_NUMERICAL
    except PassiveImagingError as e:
        logger.error(f"[CLI] 입력 오류: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"[CLI] 파일 입출력 실패: {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
