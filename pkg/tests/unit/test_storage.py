"""
파일 저장소 유닛 테스트
PHLM1 이진 형식, CSV, 형상 JSON
"""
import struct

import numpy as np
import pytest

from app.core.errors import DataFormatError
from app.services.storage import (
    HEADER,
    MAGIC,
    MatrixKind,
    read_matrix,
    read_shape_json,
    read_strength_csv,
    write_boundary_csv,
    write_matrix,
    write_shape_json,
    write_strength_csv,
)


@pytest.fixture
def matrix(rng):
    return rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))


class TestPhlmFormat:
    """PHLM1 이진 행렬 형식 테스트"""

    def test_round_trip_is_exact(self, tmp_path, matrix):
        path = write_matrix(tmp_path / "m.phlm", matrix, MatrixKind.NEARFIELD)
        data, kind = read_matrix(path)
        assert kind == MatrixKind.NEARFIELD
        assert np.array_equal(data, matrix)

    def test_header_layout(self, tmp_path, matrix):
        path = write_matrix(tmp_path / "m.phlm", matrix, MatrixKind.COVARIANCE)
        raw = path.read_bytes()
        assert raw[:5] == b"PHLM1"
        assert struct.unpack_from("<II", raw, 5) == (3, 5)
        assert raw[13] == 2
        assert len(raw) == 14 + 3 * 5 * 16
        # 첫 원소 실수부/허수부 (리틀엔디언 float64, 행 우선)
        assert struct.unpack_from("<dd", raw, 14) == (matrix[0, 0].real, matrix[0, 0].imag)
        assert struct.unpack_from("<dd", raw, 14 + 16) == (matrix[0, 1].real, matrix[0, 1].imag)

    def test_creates_parent_directories(self, tmp_path, matrix):
        path = write_matrix(tmp_path / "a" / "b" / "m.phlm", matrix, MatrixKind.SAMPLES)
        assert path.exists()

    def test_bad_magic(self, tmp_path, matrix):
        path = write_matrix(tmp_path / "m.phlm", matrix, MatrixKind.COVARIANCE)
        raw = bytearray(path.read_bytes())
        raw[:5] = b"XXXX1"
        path.write_bytes(bytes(raw))
        with pytest.raises(DataFormatError) as exc_info:
            read_matrix(path)
        assert exc_info.value.field == "magic"

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "short.phlm"
        path.write_bytes(MAGIC + b"\x00")
        with pytest.raises(DataFormatError) as exc_info:
            read_matrix(path)
        assert exc_info.value.field == "magic"

    def test_unknown_kind(self, tmp_path):
        path = tmp_path / "k.phlm"
        path.write_bytes(HEADER.pack(MAGIC, 1, 1, 9) + np.zeros(1, dtype="<c16").tobytes())
        with pytest.raises(DataFormatError) as exc_info:
            read_matrix(path)
        assert exc_info.value.field == "kind"

    def test_unexpected_kind(self, tmp_path, matrix):
        path = write_matrix(tmp_path / "m.phlm", matrix, MatrixKind.SAMPLES)
        with pytest.raises(DataFormatError) as exc_info:
            read_matrix(path, expected_kind=MatrixKind.COVARIANCE)
        assert exc_info.value.field == "kind"

    def test_row_count_mismatch(self, tmp_path, matrix):
        path = tmp_path / "rows.phlm"
        path.write_bytes(HEADER.pack(MAGIC, 4, 5, 2) + np.ascontiguousarray(matrix, dtype="<c16").tobytes())
        with pytest.raises(DataFormatError) as exc_info:
            read_matrix(path)
        assert exc_info.value.field == "rows"

    def test_partial_payload(self, tmp_path, matrix):
        path = write_matrix(tmp_path / "m.phlm", matrix, MatrixKind.COVARIANCE)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(DataFormatError) as exc_info:
            read_matrix(path)
        assert exc_info.value.field == "payload"

    def test_non_finite_payload(self, tmp_path):
        bad = np.array([[1.0, np.nan]], dtype=complex)
        path = write_matrix(tmp_path / "nan.phlm", bad, MatrixKind.COVARIANCE)
        with pytest.raises(DataFormatError):
            read_matrix(path)

    def test_vector_rejected_on_write(self, tmp_path):
        with pytest.raises(DataFormatError):
            write_matrix(tmp_path / "v.phlm", np.ones(3), MatrixKind.COVARIANCE)


class TestCsvExport:
    """CSV 내보내기 테스트"""

    def test_strength_round_trip(self, tmp_path, small_grid, rng):
        q = rng.uniform(0.0, 2.0, small_grid.n_src)
        path = write_strength_csv(tmp_path / "q.csv", small_grid.points, small_grid.measures, q)
        np.testing.assert_array_equal(read_strength_csv(path, n_src=small_grid.n_src), q)

    def test_strength_count_mismatch(self, tmp_path, small_grid):
        path = write_strength_csv(
            tmp_path / "q.csv", small_grid.points, small_grid.measures, np.ones(small_grid.n_src)
        )
        with pytest.raises(DataFormatError) as exc_info:
            read_strength_csv(path, n_src=small_grid.n_src + 1)
        assert exc_info.value.field == "q"

    def test_negative_strength_rejected(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("x,y,measure,q\n2.0,0.0,0.1,-1.0\n2.5,0.0,0.1,1.0\n")
        with pytest.raises(DataFormatError):
            read_strength_csv(path)

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("x,y\n1.0,2.0\n")
        with pytest.raises(DataFormatError):
            read_strength_csv(path)

    def test_boundary_csv(self, tmp_path, unit_circle):
        path = write_boundary_csv(tmp_path / "b.csv", unit_circle, n_points=32)
        table = np.loadtxt(path, delimiter=",", skiprows=1)
        assert table.shape == (32, 5)
        np.testing.assert_allclose(np.hypot(table[:, 1], table[:, 2]), 1.0)


class TestShapeJson:
    def test_round_trip(self, tmp_path, star_shape):
        path = write_shape_json(tmp_path / "shape.json", star_shape)
        assert read_shape_json(path) == star_shape
