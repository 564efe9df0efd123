"""
파일 저장소
PHLM1 이진 행렬 형식, CSV 내보내기, 형상/메타데이터 JSON 입출력

PHLM1 레이아웃 (리틀엔디언):
  magic "PHLM1" (5바이트) | rows uint32 | cols uint32 | kind uint8
  이후 rows × cols 개의 (re, im) float64 쌍을 행 우선 순서로 저장
"""
import json
import logging
import struct
from enum import IntEnum
from pathlib import Path
from typing import Any, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.errors import DataFormatError
from app.core.geometry import discretize
from app.models.shape import StarShape

logger = logging.getLogger(__name__)

MAGIC = b"PHLM1"
HEADER = struct.Struct("<5sIIB")
ITEM = np.dtype("<c16")

PathLike = Union[str, Path]


class MatrixKind(IntEnum):
    """PHLM1 kind 코드"""

    NEARFIELD = 1
    COVARIANCE = 2
    SAMPLES = 3


def write_matrix(path: PathLike, matrix: ArrayLike, kind: MatrixKind) -> Path:
    """복소 행렬을 PHLM1 형식으로 저장"""
    data = np.asarray(matrix, dtype=complex)
    if data.ndim != 2:
        raise DataFormatError(f"2차원 행렬만 저장할 수 있습니다: ndim={data.ndim}", field="rows")
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("wb") as fh:
        fh.write(HEADER.pack(MAGIC, data.shape[0], data.shape[1], int(kind)))
        fh.write(np.ascontiguousarray(data, dtype=ITEM).tobytes(order="C"))
    logger.debug(f"[Storage] PHLM1 저장 - {target} ({data.shape[0]}×{data.shape[1]}, {kind.name})")
    return target


def read_matrix(
    path: PathLike, expected_kind: Optional[MatrixKind] = None
) -> Tuple[NDArray[np.complex128], MatrixKind]:
    """
    PHLM1 파일 읽기

    Raises:
        DataFormatError: 헤더 또는 본문이 형식과 맞지 않을 때 (문제 필드 포함)
    """
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise DataFormatError(f"헤더가 잘렸습니다: {len(raw)}바이트", field="magic")

    magic, rows, cols, kind_code = HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise DataFormatError(f"잘못된 매직 값 {magic!r}", field="magic")
    try:
        kind = MatrixKind(kind_code)
    except ValueError as e:
        raise DataFormatError(f"알 수 없는 kind 코드 {kind_code}", field="kind") from e
    if expected_kind is not None and kind != expected_kind:
        raise DataFormatError(f"kind {kind.name} != 기대값 {expected_kind.name}", field="kind")

    payload = raw[HEADER.size :]
    expected = rows * cols * ITEM.itemsize
    if len(payload) != expected:
        field = "rows" if len(payload) % ITEM.itemsize == 0 else "payload"
        raise DataFormatError(
            f"본문 길이 {len(payload)} != rows×cols×16 = {expected}", field=field
        )
    data = np.frombuffer(payload, dtype=ITEM).reshape(rows, cols).astype(complex)
    if not np.all(np.isfinite(data)):
        raise DataFormatError("본문에 유한하지 않은 값이 있습니다", field="payload")
    return data, kind


def write_strength_csv(
    path: PathLike, points: ArrayLike, measures: ArrayLike, q: ArrayLike
) -> Path:
    """셀별 원천 세기 CSV (x,y,measure,q)"""
    pts = np.asarray(points, dtype=float)
    table = np.column_stack([pts, np.asarray(measures, dtype=float), np.asarray(q, dtype=float)])
    target = Path(path)
    np.savetxt(target, table, delimiter=",", header="x,y,measure,q", comments="", fmt="%.17g")
    return target


def read_strength_csv(path: PathLike, n_src: Optional[int] = None) -> NDArray[np.float64]:
    """셀별 원천 세기 CSV의 q 열 읽기"""
    try:
        table = np.genfromtxt(Path(path), delimiter=",", names=True)
    except (OSError, ValueError) as e:
        raise DataFormatError(f"q CSV를 읽을 수 없습니다: {e}", field="q") from e
    if table.dtype.names is None or "q" not in table.dtype.names:
        raise DataFormatError("q 열이 없습니다", field="q")
    values = np.atleast_1d(table["q"]).astype(float)
    if n_src is not None and values.size != n_src:
        raise DataFormatError(f"q 개수 {values.size} != N_src {n_src}", field="q")
    if np.any(~np.isfinite(values)) or np.any(values < 0.0):
        raise DataFormatError("q 값은 유한한 0 이상의 수여야 합니다", field="q")
    return values


def write_boundary_csv(path: PathLike, shape: StarShape, n_points: int = 256) -> Path:
    """경계 곡선 CSV (theta,x,y,nx,ny)"""
    mesh = discretize(shape, n_points)
    table = np.column_stack([mesh.thetas, mesh.points, mesh.normals])
    target = Path(path)
    np.savetxt(target, table, delimiter=",", header="theta,x,y,nx,ny", comments="", fmt="%.17g")
    return target


def write_shape_json(path: PathLike, shape: StarShape) -> Path:
    target = Path(path)
    target.write_text(shape.model_dump_json(by_alias=True, indent=2), encoding="utf-8")
    return target


def read_shape_json(path: PathLike) -> StarShape:
    return StarShape.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_json(path: PathLike, payload: Any) -> Path:
    """메타데이터/기록 JSON 저장 (키 정렬)"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, default=str),
        encoding="utf-8",
    )
    return target
