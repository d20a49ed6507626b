import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vidmark.errors import FormatError, TruncationError, UnsupportedError
from vidmark.media_io import (
    C420,
    C444,
    Frame,
    Plane,
    RGBImage,
    VideoSequence,
    WatermarkImage,
    chroma_shape,
    frames_from_luma,
    parse_y4m,
    read_pnm,
    rgb_to_ycbcr,
    write_pnm,
    write_y4m,
    ycbcr_to_rgb,
)

HEADER = b"YUV4MPEG2 W4 H4 F25:1 Ip A1:1 C444\n"


def test_parse_single_444_frame():
    seq = parse_y4m(HEADER + b"FRAME\n" + bytes(range(48)))
    assert len(seq) == 1
    assert (seq.width, seq.height, seq.subsampling) == (4, 4, C444)
    assert seq.frames[0].cr.samples[-1, -1] == 47
    assert seq.extra == ("Ip", "A1:1")


def test_bad_magic():
    with pytest.raises(FormatError, match="magic"):
        parse_y4m(b"YUV4MPEG3 W4 H4 C444\n")


def test_truncated_payload_reports_frame():
    with pytest.raises(TruncationError) as err:
        parse_y4m(HEADER + b"FRAME\n" + bytes(47))
    assert err.value.frame_index == 0


def test_truncated_second_frame():
    data = HEADER + b"FRAME\n" + bytes(48) + b"FRAME\n" + bytes(10)
    with pytest.raises(TruncationError) as err:
        parse_y4m(data)
    assert err.value.frame_index == 1


def test_unknown_colorspace():
    with pytest.raises(UnsupportedError):
        parse_y4m(b"YUV4MPEG2 W4 H4 C422\n")


def test_frame_params_are_accepted():
    seq = parse_y4m(HEADER + b"FRAME Ixyz\n" + bytes(48))
    assert len(seq) == 1


def test_empty_sequence_is_header_only():
    seq = VideoSequence(4, 4, subsampling=C420)
    out = write_y4m(seq)
    assert b"FRAME" not in out
    assert parse_y4m(out) == seq


def test_420_body_length():
    seq = frames_from_luma([np.zeros((4, 4), np.uint8)] * 2, C420)
    out = write_y4m(seq)
    header = out.split(b"\n", 1)[0] + b"\n"
    assert len(out) - len(header) == 2 * (6 + 4 * 4 * 3 // 2)


def test_write_to_sink():
    seq = frames_from_luma([np.full((2, 2), 9, np.uint8)], C444)
    buf = io.BytesIO()
    assert write_y4m(seq, buf) is None
    assert buf.getvalue() == write_y4m(seq)


def test_parsed_planes_are_read_only():
    seq = parse_y4m(HEADER + b"FRAME\n" + bytes(48))
    with pytest.raises(ValueError):
        seq.frames[0].y.samples[0, 0] = 1


def test_frame_rejects_wrong_chroma():
    y = Plane(np.zeros((4, 4), np.uint8))
    with pytest.raises(FormatError):
        Frame(y, y, y, C420)


@st.composite
def sequences(draw):
    sub = draw(st.sampled_from([C420, C444]))
    w = draw(st.integers(1, 6)) * (2 if sub == C420 else 1)
    h = draw(st.integers(1, 6)) * (2 if sub == C420 else 1)
    n = draw(st.integers(0, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    ch = chroma_shape(w, h, sub)
    frames = [
        Frame(Plane(rng.integers(0, 256, (h, w))), Plane(rng.integers(0, 256, ch)),
              Plane(rng.integers(0, 256, ch)), sub)
        for _ in range(n)
    ]
    num = draw(st.integers(1, 60))
    return VideoSequence(w, h, num, draw(st.integers(1, 1001)), sub, frames,
                         draw(st.sampled_from([(), ("Ip",), ("It", "A1:1", "XYSCSS=420JPEG")])))


@settings(max_examples=60, deadline=None)
@given(sequences())
def test_y4m_round_trip(seq):
    data = write_y4m(seq)
    again = parse_y4m(data)
    assert again == seq
    assert write_y4m(again) == data


# ------------------------------------------------------------------- PNM


def test_p1_bits():
    img = read_pnm(b"P1\n2 2\n1 0\n0 1\n")
    assert isinstance(img, WatermarkImage)
    assert img.bits.ravel().tolist() == [1, 0, 0, 1]


def test_p1_without_separators_and_comments():
    img = read_pnm(b"P1\n# c\n3 1\n101\n")
    assert img.bits.tolist() == [[1, 0, 1]]


def test_p5_plane():
    img = read_pnm(b"P5\n2 1\n255\n" + bytes([0, 255]))
    assert isinstance(img, Plane)
    assert img.samples.tolist() == [[0, 255]]


def test_p2_maxval_rejected():
    with pytest.raises(UnsupportedError):
        read_pnm(b"P2\n1 1\n65535\n7\n")


def test_p4_row_padding():
    out = write_pnm(WatermarkImage(np.zeros((2, 2), np.uint8)), "P4")
    assert out == b"P4\n2 2\n" + bytes(2)


def test_binary_variants_are_default():
    assert write_pnm(WatermarkImage(np.ones((1, 1), np.uint8)))[:2] == b"P4"
    assert write_pnm(Plane(np.ones((1, 1), np.uint8)))[:2] == b"P5"


def test_p5_255_preserved():
    p = Plane(np.full((3, 5), 255, np.uint8))
    assert read_pnm(write_pnm(p, "P5")) == p


def test_pnm_payload_mismatch():
    with pytest.raises(FormatError):
        read_pnm(b"P5\n4 4\n255\n" + bytes(3))
    with pytest.raises(FormatError):
        read_pnm(b"P7\n1 1\n")


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 20), st.integers(1, 20), st.integers(0, 2**32 - 1),
       st.sampled_from(["P1", "P4", "P2", "P5", "P3", "P6"]))
def test_pnm_round_trip(w, h, seed, variant):
    rng = np.random.default_rng(seed)
    if variant in ("P1", "P4"):
        img = WatermarkImage(rng.integers(0, 2, (h, w)))
    elif variant in ("P2", "P5"):
        img = Plane(rng.integers(0, 256, (h, w)))
    else:
        img = RGBImage(*(Plane(rng.integers(0, 256, (h, w))) for _ in range(3)))
    back = read_pnm(write_pnm(img, variant))
    if isinstance(img, RGBImage):
        assert (back.r, back.g, back.b) == (img.r, img.g, img.b)
    else:
        assert back == img


# ----------------------------------------------------------------- colour


@pytest.mark.parametrize("rgb, ycc", [
    ((0, 0, 0), (0, 128, 128)),
    ((255, 255, 255), (255, 128, 128)),
    ((255, 0, 0), (76, 85, 255)),
])
def test_ycbcr_examples(rgb, ycc):
    assert tuple(int(v) for v in rgb_to_ycbcr(*rgb)) == ycc


def test_ycbcr_round_trip_within_two():
    rng = np.random.default_rng(0)
    r, g, b = rng.integers(0, 256, (3, 200_000))
    back = ycbcr_to_rgb(*rgb_to_ycbcr(r, g, b))
    for orig, got in zip((r, g, b), back):
        assert np.max(np.abs(orig.astype(int) - np.asarray(got, dtype=int))) <= 2
