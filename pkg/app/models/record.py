"""
실행 기록 모델 정의
역산 반복별 진단과 최종 추정치, 실행 메타데이터
"""
from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class IterationRecord(BaseModel):
    """역산 반복 1회 기록"""

    iteration: int = Field(..., ge=0)
    alpha: Optional[float] = Field(None, description="정규화 매개변수 (Newton-CG는 없음)")
    residual: float = Field(..., description="갱신 전 가중 잔차 노름 ‖W^{-1/2}X‖")
    relative_residual: float = Field(..., description="‖W^{-1/2}X‖ / ‖W^{-1/2}C^obs‖")
    regularization: float = Field(default=0.0, description="정규화 항 값")
    shape_update_norm: float = Field(default=0.0, description="‖∂ρ‖_{H^s}")
    source_update_norm: float = Field(default=0.0, description="‖∂q‖_Ω")
    cg_iterations: int = Field(default=0, ge=0)
    cg_converged: bool = True
    step: float = Field(default=1.0, description="반감 후 실제 스텝")
    halvings: int = Field(default=0, ge=0)
    residual_increased: bool = Field(default=False, description="이전 반복 대비 잔차 증가")
    wall_time: float = Field(default=0.0, description="반복 소요 시간 (초)")


class RunRecord(BaseModel):
    """역산 실행 기록 (runrecord.json)"""

    mode: str = Field(..., description="역산 방식")
    config: Dict[str, Any] = Field(default_factory=dict, description="InversionConfig 전체")
    seeds: Dict[str, int] = Field(default_factory=dict)
    iterations: List[IterationRecord] = Field(default_factory=list)

    # 최종 추정치
    final_shape: Optional[Dict[str, Any]] = Field(None, description="StarShape JSON")
    final_q: Optional[List[float]] = Field(None)
    final_residual: Optional[float] = Field(None)

    stop_reason: str = Field(default="", description="종료 사유")
    flags: List[str] = Field(default_factory=list, description="경고 플래그")
    solver: Dict[str, Any] = Field(default_factory=dict, description="마지막 BIE 솔버 메타데이터")
    started_at: datetime = Field(default_factory=datetime.utcnow)
    wall_time: float = 0.0

    def residuals(self) -> List[float]:
        return [it.residual for it in self.iterations]

    def flag(self, message: str) -> None:
        if message not in self.flags:
            self.flags.append(message)
