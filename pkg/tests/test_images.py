"""Image container, vectorization convention, and file I/O."""

import numpy as np
import pytest

from tgvkl.images import (
    Image,
    ImageIOError,
    MalformedHeaderError,
    TruncatedPayloadError,
    UnsupportedBitDepthError,
    pixel_index,
    read_csv,
    read_image,
    write_csv,
    write_image,
)


def test_pixel_index_row_major_hand_enumeration():
    # 2x3 grid enumerated by hand
    expected = {(0, 0): 0, (0, 1): 1, (0, 2): 2, (1, 0): 3, (1, 1): 4, (1, 2): 5}
    for (i, j), k in expected.items():
        assert pixel_index(i, j, 3) == k


def test_image_roundtrips_array_row_major():
    arr = np.arange(6, dtype=np.float64).reshape(2, 3)
    img = Image.from_array(arr)
    assert img.n == 6
    assert img.pixels[pixel_index(1, 2, 3)] == arr[1, 2]
    np.testing.assert_array_equal(img.as_array(), arr)


def test_image_rejects_bad_dims():
    with pytest.raises(ValueError):
        Image(0, 3, np.zeros(0))
    with pytest.raises(ValueError):
        Image(2, 3, np.zeros(5))


def test_image_pixels_immutable():
    img = Image.from_array(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        img.pixels[0] = 1.0


def test_read_pgm_ascii_hand_case(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_text("P2\n2 2\n255\n0 255 128 64\n")
    img = read_image(p)
    np.testing.assert_array_equal(img.pixels, [0, 255, 128, 64])
    assert (img.n1, img.n2) == (2, 2)


def test_pgm_roundtrip_integer_exact(tmp_path):
    rng = np.random.default_rng(0)
    arr = rng.integers(0, 256, size=(5, 7)).astype(np.float64)
    for fmt in ("pgm-ascii", "pgm-binary"):
        p = tmp_path / f"t_{fmt}.pgm"
        write_image(Image.from_array(arr), p, fmt=fmt)
        back = read_image(p).as_array()
        # write maps [lo, hi] affinely onto [0, 255]; undo it
        lo, hi = arr.min(), arr.max()
        restored = back / 255.0 * (hi - lo) + lo
        np.testing.assert_allclose(restored, arr, atol=0.5 / 255 * (hi - lo) + 1e-9)


def test_pgm_16bit_roundtrip(tmp_path):
    arr = np.array([[0.0, 65535.0], [1.0, 2.0]])
    p = tmp_path / "t16.pgm"
    write_image(Image.from_array(arr), p, maxval=65535)
    back = read_image(p).as_array()
    np.testing.assert_allclose(back, arr, atol=0.5)


def test_png_roundtrip(tmp_path):
    arr = np.array([[0.0, 255.0], [10.0, 200.0]])
    p = tmp_path / "t.png"
    write_image(Image.from_array(arr), p, fmt="png")
    back = read_image(p).as_array()
    np.testing.assert_allclose(back, arr, atol=0.5)


def test_constant_image_written_as_repeated_value(tmp_path):
    p = tmp_path / "c.pgm"
    write_image(Image.from_array(np.full((3, 3), 7.0)), p, fmt="pgm-ascii")
    body = p.read_text().splitlines()[3:]
    values = " ".join(body).split()
    assert len(set(values)) == 1


def test_csv_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(1)
    arr = rng.standard_normal((3, 3))
    p = tmp_path / "t.csv"
    write_csv(Image.from_array(arr), p)
    assert len(p.read_text().splitlines()) == 3
    np.testing.assert_array_equal(read_csv(p).as_array(), arr)


def test_malformed_header_reported(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P5\n2")
    with pytest.raises(MalformedHeaderError):
        read_image(p)


def test_unsupported_bit_depth_reported(tmp_path):
    p = tmp_path / "deep.pgm"
    p.write_text("P2\n1 1\n70000\n0\n")
    with pytest.raises(UnsupportedBitDepthError):
        read_image(p)


def test_truncated_payload_reported(tmp_path):
    p = tmp_path / "short.pgm"
    p.write_text("P2\n2 2\n255\n1 2 3\n")
    with pytest.raises(TruncatedPayloadError):
        read_image(p)


def test_missing_file_reported(tmp_path):
    with pytest.raises(ImageIOError):
        read_image(tmp_path / "nope.pgm")


def test_write_rejects_non_finite(tmp_path):
    img = Image.from_array(np.array([[1.0, np.inf]]))
    with pytest.raises(ValueError):
        write_image(img, tmp_path / "x.pgm")
