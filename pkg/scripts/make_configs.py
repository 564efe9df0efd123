#!/usr/bin/env python3
"""
프리셋 실험 설정 생성 스크립트

사용법:
    python scripts/make_configs.py [옵션]

옵션:
    --output, -o    출력 디렉토리 [기본값: configs/]
    --name, -n      특정 프리셋만 생성 (여러 번 지정 가능)
    --print, -p     콘솔에 출력

예시:
    python scripts/make_configs.py
    python scripts/make_configs.py -n disk_recovery -p
    python scripts/make_configs.py -o ./experiments
"""
import argparse
import sys
from pathlib import Path

# 프로젝트 루트를 path에 추가
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))


def main() -> int:
    from app.utils.presets import PRESETS, get_preset

    parser = argparse.ArgumentParser(
        description="프리셋 실험 설정 JSON 생성",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
예시:
    python scripts/make_configs.py                       # 모든 프리셋을 configs/에 저장
    python scripts/make_configs.py -n disk_recovery -p   # 한 프리셋을 저장하고 출력
        """,
    )
    parser.add_argument(
        "-o",
        "--output",
        type=str,
        default=None,
        help="출력 디렉토리 (기본값: configs/)",
    )
    parser.add_argument(
        "-n",
        "--name",
        action="append",
        choices=sorted(PRESETS),
        help="생성할 프리셋 이름 (기본값: 전체)",
    )
    parser.add_argument(
        "-p",
        "--print",
        action="store_true",
        help="콘솔에 출력",
    )
    args = parser.parse_args()

    print("=" * 60)
    print("  Experiment Config Generator")
    print("=" * 60)
    print()

    output_dir = Path(args.output) if args.output else project_root / "configs"
    output_dir.mkdir(parents=True, exist_ok=True)

    for name in args.name or list(PRESETS):
        config = get_preset(name)
        text = config.model_dump_json(by_alias=True, indent=2)
        path = output_dir / f"{name}.json"
        path.write_text(text + "\n", encoding="utf-8")
        print(f"✅ {name:<24} → {path}")
        if args.print:
            print(text)
            print()

    print()
    print("=" * 60)
    print("  완료!")
    print("=" * 60)
    return 0


if __name__ == "__main__":
    sys.exit(main())
