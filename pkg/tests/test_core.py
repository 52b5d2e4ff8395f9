import numpy as np
import pytest
from hypothesis import given, strategies as st

from wavedge.core import ScaleSchedule, as_image, as_signal, extract_row, load_raster, quantize, write_raster


def _pgm(path, w, h, maxval, pixels):
    dtype = ">u2" if maxval > 255 else np.uint8
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode())
        fh.write(np.asarray(pixels, dtype=dtype).tobytes())


def test_load_2x2_endpoints(tmp_path):
    p = tmp_path / "a.pgm"
    _pgm(p, 2, 2, 255, [0, 255, 255, 0])
    img = load_raster(p)
    assert img.shape == (2, 2)
    np.testing.assert_array_equal(img, [[0, 1], [1, 0]])


def test_load_16bit(tmp_path):
    p = tmp_path / "b.pgm"
    _pgm(p, 3, 1, 65535, [0, 65535, 32768])
    np.testing.assert_allclose(load_raster(p), [[0, 1, 32768 / 65535]])


def test_load_errors(tmp_path):
    with pytest.raises((OSError, ValueError)):
        load_raster(tmp_path / "missing.pgm")
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"hello world")
    with pytest.raises(ValueError):
        load_raster(bad)
    empty = tmp_path / "empty.pgm"
    _pgm(empty, 0, 0, 255, [])
    with pytest.raises(ValueError):
        load_raster(empty)


def test_write_quantization(tmp_path):
    p = tmp_path / "q.pgm"
    write_raster(np.array([[0.0, 1.0], [0.5, 2.0]]), p)
    data = p.read_bytes()
    assert data.endswith(bytes([0, 255, 128, 255]))
    assert quantize(np.zeros((2, 2))).tobytes() == bytes(4)


def test_roundtrip_random(tmp_path, rng):
    img = rng.integers(0, 256, size=(17, 23)) / 255.0
    p = tmp_path / "r.pgm"
    write_raster(img, p)
    once = load_raster(p)
    write_raster(once, p)
    np.testing.assert_array_equal(load_raster(p), once)
    np.testing.assert_allclose(once, img, atol=1e-12)


def test_png_read(tmp_path):
    Image = pytest.importorskip("PIL.Image")
    p = tmp_path / "a.png"
    Image.fromarray(np.array([[0, 255], [51, 0]], dtype=np.uint8)).save(p)
    np.testing.assert_allclose(load_raster(p), [[0, 1], [0.2, 0]])


def test_extract_row():
    img = np.arange(12, dtype=float).reshape(3, 4)
    np.testing.assert_array_equal(extract_row(img, 1), [4, 5, 6, 7])
    with pytest.raises(IndexError):
        extract_row(img, 3)
    flat = np.tile(np.arange(5.0), (4, 1))
    np.testing.assert_array_equal(extract_row(flat, 0), extract_row(flat, 3))


@given(st.integers(4, 9), st.integers(4, 9), st.data())
def test_extract_row_matches_pixels(rows, cols, data):
    img = np.arange(rows * cols, dtype=float).reshape(rows, cols)
    r = data.draw(st.integers(0, rows - 1))
    c = data.draw(st.integers(0, cols - 1))
    assert extract_row(img, r)[c] == img[r, c]


def test_containers_validate():
    with pytest.raises(ValueError):
        as_signal([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        as_signal([1.0, np.nan, 0.0, 0.0])
    with pytest.raises(ValueError):
        as_image(np.zeros((3, 8)))
    sig = as_signal(np.zeros(8))
    assert not sig.flags.writeable


def test_schedules():
    d = ScaleSchedule.dyadic(4, 4)
    assert d.scales == (32.0, 16.0, 8.0, 4.0)
    assert d.finest == 4 and d.coarsest == 32
    assert d.pairs()[0] == (32.0, 16.0)
    assert ScaleSchedule.parse("4,8,16,32").kind == "dyadic"
    assert ScaleSchedule.parse([30, 10]).kind == "custom"
    sa = ScaleSchedule.sigma_adjusted(4, 3, 3.0)
    eff = [np.hypot(s, 3.0) for s in sa.scales]
    np.testing.assert_allclose([eff[0] / eff[1], eff[1] / eff[2]], 2.0)
    with pytest.raises(ValueError):
        ScaleSchedule((4.0, 8.0))
    with pytest.raises(ValueError):
        ScaleSchedule((16.0, 4.0), kind="dyadic")
    with pytest.raises(ValueError):
        ScaleSchedule((8.0, 4.0), kind="sigma-adjusted", sigma=1.0)
