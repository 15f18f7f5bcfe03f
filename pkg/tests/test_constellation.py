import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swiptlab import (
    Constellation,
    make_apsk,
    make_square_qam,
    normalize,
    parse_complex_array,
    render_complex_array,
    rotate_to_symmetric_span,
    stats,
)
from swiptlab.errors import (
    DegenerateConstellationError,
    InvalidOrderError,
    InvalidParameterError,
    ParseError,
)


class TestStats:
    def test_square_qam16_frozen_values(self):
        st16 = stats(make_square_qam(16))
        assert st16.avg_energy == pytest.approx(1.0, abs=1e-12)
        assert st16.fourth_moment == pytest.approx(1.32, abs=1e-12)
        assert st16.papr == pytest.approx(1.8, abs=1e-12)
        # widest angular spread of the normalized grid: pi - atan(1/3)
        assert st16.phase_span == pytest.approx(2.819842099193151, abs=1e-12)
        assert st16.d_min == pytest.approx(2.0 / math.sqrt(10.0), abs=1e-12)

    def test_unit_modulus_arc(self):
        c = make_apsk(math.pi / 2, 8)
        s = stats(c)
        assert s.avg_energy == pytest.approx(1.0)
        assert s.fourth_moment == pytest.approx(1.0)
        assert s.papr == pytest.approx(1.0)
        assert s.phase_span == pytest.approx(math.pi / 2)

    def test_all_zero_papr_is_zero(self):
        s = stats(Constellation(np.zeros(4, dtype=np.complex128)))
        assert s.avg_energy == 0.0
        assert s.papr == 0.0

    def test_single_point(self):
        # span is the angular radius max|angle|, so one point keeps its own
        s = stats(Constellation(np.array([3.0 + 4.0j])))
        assert s.phase_span == pytest.approx(math.atan2(4.0, 3.0))
        assert s.d_min == 0.0

    def test_full_span_becomes_uniform_psk(self):
        c = make_apsk(math.pi, 8)
        gaps = np.diff(np.sort(np.angle(c.points)))
        np.testing.assert_allclose(gaps, 2 * math.pi / 8, rtol=1e-12)
        assert stats(c).d_min > 0.5


class TestCanonicalization:
    def test_normalize_unit_energy(self):
        c = Constellation(np.array([2.0 + 0j, 0.0 + 2.0j, -2.0 + 0j, 0.0 - 2.0j]))
        n = normalize(c)
        assert stats(n).avg_energy == pytest.approx(1.0, abs=1e-15)

    def test_normalize_rejects_zero_energy(self):
        with pytest.raises(DegenerateConstellationError):
            normalize(Constellation(np.zeros(2, dtype=np.complex128)))

    def test_rotation_centers_the_span(self):
        pts = np.exp(1j * np.array([0.1, 0.5, 1.3]))
        r = rotate_to_symmetric_span(Constellation(pts))
        ang = np.angle(r.points)
        assert np.max(ang) == pytest.approx(-np.min(ang), abs=1e-12)

    def test_rotation_preserves_magnitudes(self):
        pts = np.array([1.0 + 1.0j, 2.0 - 0.5j, -0.3 + 0.1j])
        r = rotate_to_symmetric_span(Constellation(pts))
        np.testing.assert_allclose(np.abs(r.points), np.abs(pts), rtol=1e-12)


class TestMakers:
    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_square_qam_normalized(self, order):
        s = stats(make_square_qam(order))
        assert s.avg_energy == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("order", [2, 3, 8, 32])
    def test_square_qam_rejects_bad_orders(self, order):
        with pytest.raises(InvalidOrderError):
            make_square_qam(order)

    def test_apsk_span_and_energy(self):
        c = make_apsk(1.0, 8)
        s = stats(c)
        assert s.avg_energy == pytest.approx(1.0)
        assert s.phase_span == pytest.approx(1.0, abs=1e-12)

    def test_apsk_rejects_out_of_range_span(self):
        with pytest.raises(InvalidParameterError):
            make_apsk(3.5, 8)
        with pytest.raises(InvalidParameterError):
            make_apsk(-0.1, 8)

    def test_apsk_needs_two_points(self):
        with pytest.raises(InvalidOrderError):
            make_apsk(1.0, 1)


class TestIdentity:
    def test_eq_and_hash_by_value(self):
        a = Constellation(np.array([1.0 + 2.0j, 3.0 - 1.0j]))
        b = Constellation(np.array([1.0 + 2.0j, 3.0 - 1.0j]))
        assert a == b
        assert hash(a) == hash(b)

    def test_points_are_read_only(self):
        c = make_square_qam(4)
        with pytest.raises((ValueError, RuntimeError)):
            c.points[0] = 0.0


class TestRenderParse:
    def test_render_shape(self):
        text = render_complex_array(np.array([1.0 + 2.0j, -0.5 - 0.25j]))
        assert text == "[1.0+2.0j, -0.5-0.25j]"

    def test_negative_zero_imag_keeps_sign(self):
        text = render_complex_array(np.array([complex(1.0, -0.0)]))
        assert text == "[1.0-0.0j]"

    @pytest.mark.parametrize(
        "text,expected",
        [
            ("[1+2j]", [1 + 2j]),
            ("[j]", [1j]),
            ("[-j]", [-1j]),
            ("[j2]", [2j]),
            ("[i5-3]", [-3 + 5j]),
            ("[2j+1]", [1 + 2j]),
            ("[1e2-2.5e-1j]", [100 - 0.25j]),
            ("[1, 2,]", [1 + 0j, 2 + 0j]),
            ("[1 2]", [1 + 0j, 2 + 0j]),
            ("  [ 0.5 ]  ", [0.5 + 0j]),
        ],
    )
    def test_accepted_forms(self, text, expected):
        np.testing.assert_array_equal(
            parse_complex_array(text).points, np.array(expected, dtype=np.complex128)
        )

    @pytest.mark.parametrize(
        "text,offset",
        [
            ("[1+2q]", 4),
            ("[]", 1),
            ("no brackets", 0),
            ("[1, 2", 5),
            ("[1] junk", 4),
            ("[1,,2]", 3),
            ("[1+1+2j]", 2),
            ("[2j+3j]", 3),
        ],
    )
    def test_rejections_carry_offsets(self, text, offset):
        with pytest.raises(ParseError) as err:
            parse_complex_array(text)
        assert err.value.offset == offset

    @given(
        st.lists(
            st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e100),
            min_size=1,
            max_size=32,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_round_trip_is_exact(self, values):
        pts = np.array(values, dtype=np.complex128)
        back = parse_complex_array(render_complex_array(pts)).points
        np.testing.assert_array_equal(back, pts)
