from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vtpsim.imaging import (
    BinaryFrame,
    GrayFrame,
    Kernel,
    PixelFrame,
    binarize,
    channel_conv,
    erode,
    marker_kernel_for,
    read_netpbm,
    write_pgm,
    write_ppm,
)

from oracles import disk_offsets, erode_bruteforce, square_offsets


def one_pixel(rgb):
    return PixelFrame(np.array([[rgb]], dtype=np.uint8))


@pytest.mark.parametrize("rgb, expected", [
    ((255, 0, 0), 255.0),
    ((255, 255, 255), 0.0),
    ((0, 255, 0), -127.5),
])
def test_channel_conv_examples(rgb, expected):
    assert channel_conv(one_pixel(rgb), 2, 2).values[0, 0] == expected


def test_channel_conv_rejects_small_gains():
    with pytest.raises(ValueError):
        channel_conv(one_pixel((1, 2, 3)), 0.5, 2)


def test_binarize_boundary_is_inclusive():
    g = GrayFrame(np.array([[150.0, 149.5]]))
    assert binarize(g, 150).bits.tolist() == [[True, False]]


def test_binarize_all_zero():
    assert not binarize(GrayFrame(np.zeros((4, 6))), 150).any()


def test_frame_validation():
    with pytest.raises(ValueError):
        PixelFrame(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        PixelFrame(np.full((2, 2, 3), 300))
    with pytest.raises(ValueError):
        BinaryFrame(np.array([[0, 2]]))
    with pytest.raises(ValueError):
        Kernel.square(2)
    with pytest.raises(ValueError):
        Kernel.disk(0)


def test_erode_single_pixel_vanishes():
    bits = np.zeros((7, 7), dtype=bool)
    bits[3, 3] = True
    assert not erode(BinaryFrame(bits), Kernel.square(3)).any()


def test_erode_block_to_centre():
    bits = np.zeros((9, 9), dtype=bool)
    bits[2:7, 2:7] = True
    expected = erode_bruteforce(bits.astype(int).tolist(), square_offsets(3))
    out = erode(BinaryFrame(bits), Kernel.square(3)).bits
    assert out.astype(int).tolist() == expected
    assert out.sum() == 9 and out[3:6, 3:6].all()


def test_erode_all_ones_loses_border():
    out = erode(BinaryFrame(np.ones((5, 6), dtype=bool)), Kernel.square(3)).bits
    assert out[1:-1, 1:-1].all()
    assert not out[0].any() and not out[-1].any() and not out[:, 0].any() and not out[:, -1].any()


def test_marker_kernel_for_default_width():
    assert marker_kernel_for(5) == Kernel.disk(4)


binary_arrays = st.integers(1, 20).flatmap(
    lambda h: st.integers(1, 20).flatmap(
        lambda w: arrays(bool, (h, w))))
kernels = st.one_of(st.sampled_from([1, 3, 5]).map(Kernel.square),
                    st.integers(1, 4).map(Kernel.disk))


@settings(max_examples=60, deadline=None)
@given(binary_arrays, kernels)
def test_erode_matches_bruteforce(bits, kernel):
    offsets = square_offsets(kernel.size) if kernel.shape == "square" else disk_offsets(kernel.size)
    expected = erode_bruteforce(bits.astype(int).tolist(), offsets)
    assert erode(BinaryFrame(bits), kernel).bits.astype(int).tolist() == expected


@settings(max_examples=60, deadline=None)
@given(binary_arrays, kernels)
def test_erode_anti_extensive(bits, kernel):
    out = erode(BinaryFrame(bits), kernel).bits
    assert not (out & ~bits).any()


@settings(max_examples=60, deadline=None)
@given(binary_arrays, kernels, st.data())
def test_erode_monotone(bits, kernel, data):
    extra = data.draw(arrays(bool, bits.shape))
    bigger = bits | extra
    small = erode(BinaryFrame(bits), kernel).bits
    large = erode(BinaryFrame(bigger), kernel).bits
    assert not (small & ~large).any()


@given(binary_arrays)
def test_erode_square1_identity(bits):
    assert (erode(BinaryFrame(bits), Kernel.square(1)).bits == bits).all()


@given(arrays(np.uint8, (4, 5, 3)), st.permutations(range(20)))
def test_channel_conv_pixelwise(px, perm):
    frame = PixelFrame(px)
    flat = px.reshape(20, 3)[list(perm)].reshape(4, 5, 3)
    a = channel_conv(frame, 2, 3).values.reshape(20)[list(perm)]
    b = channel_conv(PixelFrame(flat), 2, 3).values.reshape(20)
    assert (a == b).all()


@given(binary_arrays, st.floats(min_value=1e-6, max_value=255))
def test_rebinarize_idempotent(bits, k_t):
    once = BinaryFrame(bits)
    again = binarize(GrayFrame(once.bits.astype(float) * 255), k_t)
    assert (again.bits == once.bits).all()


def test_ppm_pgm_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    px = rng.integers(0, 256, (6, 9, 3), dtype=np.uint8)
    write_ppm(tmp_path / "a.ppm", PixelFrame(px))
    raw = (tmp_path / "a.ppm").read_bytes()
    assert raw.startswith(b"P6\n9 6\n255\n")
    assert (read_netpbm(tmp_path / "a.ppm") == px).all()

    bits = rng.integers(0, 2, (6, 9)).astype(bool)
    write_pgm(tmp_path / "b.pgm", BinaryFrame(bits))
    assert (tmp_path / "b.pgm").read_bytes().startswith(b"P5\n9 6\n255\n")
    assert (read_netpbm(tmp_path / "b.pgm") == bits * 255).all()

    write_pgm(tmp_path / "c.pgm", GrayFrame(np.array([[-10.0, 100.4, 300.0]])))
    assert read_netpbm(tmp_path / "c.pgm").tolist() == [[0, 100, 255]]
