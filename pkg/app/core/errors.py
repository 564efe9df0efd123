"""
예외 정의
모든 수치 모듈이 공유하는 예외 계층
"""
from typing import Any, Optional


class PassiveImagingError(Exception):
    """패키지 공통 기본 예외"""

    pass


class ConfigError(PassiveImagingError):
    """실험 설정 오류"""

    pass


class DataFormatError(PassiveImagingError):
    """데이터 파일 형식 오류 (문제가 된 헤더 필드 포함)"""

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        super().__init__(message if field is None else f"{message} (field: {field})")
        self.field = field


class DomainError(PassiveImagingError, ValueError):
    """함수 정의역을 벗어난 인자"""

    pass


class DimensionError(PassiveImagingError, ValueError):
    """배열 차원 불일치"""

    pass


class GeometryError(PassiveImagingError, ValueError):
    """형상 유효성 또는 기하 포함관계 위반"""

    pass


class NumericalError(PassiveImagingError):
    """수치 계산 실패"""

    pass


class BIESolverError(NumericalError):
    """경계적분방정식 풀이 실패"""

    pass


class WeightOperatorError(NumericalError):
    """가중 연산자 고유분해 실패"""

    pass


class CGError(NumericalError):
    """공액기울기법 실패"""

    pass


class InversionError(NumericalError):
    """역산 드라이버 실패 (부분 RunRecord 포함)"""

    def __init__(self, message: str, record: Any = None) -> None:
        super().__init__(message)
        self.record = record
