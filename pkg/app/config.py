"""
환경변수 설정 모듈
Pydantic Settings를 사용하여 수치 계산 기본값을 관리합니다.
"""

import os
from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """애플리케이션 설정"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # 로깅 설정
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    # 병렬 처리 설정 (0이면 모든 코어 사용)
    threads: int = Field(default=0, ge=0)

    # 형상 공간 설정
    max_degree: int = Field(default=32, ge=1, description="StarShape 최대 삼각 차수")
    sobolev_s: float = Field(default=1.6, gt=0.0, description="H^s 지수")

    # 경계적분방정식 설정
    n_bdy: int = Field(default=64, ge=16, description="역산용 경계 노드 수")
    simulation_factor: float = Field(default=1.5, ge=1.0, description="합성 데이터용 해상도 배율")
    solver_cache_size: int = Field(default=8, ge=0)

    # 디버그 모드 (CG 자기수반성 검사)
    debug: bool = False

    # 출력 설정
    output_dir: str = "runs"

    @property
    def worker_count(self) -> int:
        """실제 사용할 스레드 수"""
        return self.threads or (os.cpu_count() or 1)


@lru_cache()
def get_settings() -> Settings:
    """캐싱된 설정 인스턴스 반환"""
    return Settings()
