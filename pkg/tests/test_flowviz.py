import numpy as np

from shotloc.flow import FlowField
from shotloc.flowviz import (N_WHEEL, WHEEL_SEGMENTS, flow_to_color, hue_bin,
                             make_colorwheel)


def field_of(pairs):
    u = np.array([[p[0] for p in pairs]], dtype=np.float32)
    v = np.array([[p[1] for p in pairs]], dtype=np.float32)
    return FlowField.from_uv(u, v)


def test_wheel_has_55_hues_with_the_documented_segments():
    assert WHEEL_SEGMENTS == (15, 6, 4, 11, 13, 6)
    wheel = make_colorwheel()
    assert wheel.shape == (55, 3)
    assert tuple(wheel[0]) == (255.0, 0.0, 0.0)  # pure red starts the wheel


def test_zero_flow_renders_white():
    frame = flow_to_color(field_of([(0.0, 0.0), (1.0, 0.0)]), max_mag=1.0)
    assert tuple(frame.rgb[0, 0]) == (255, 255, 255)


def test_full_magnitude_positive_u_is_saturated_first_segment_red():
    frame = flow_to_color(field_of([(2.0, 0.0)]), max_mag=2.0)
    assert tuple(frame.rgb[0, 0]) == (255, 0, 0)


def test_huge_vectors_render_black():
    frame = flow_to_color(field_of([(2e9, 0.0), (1.0, 1.0)]), max_mag=1.0)
    assert tuple(frame.rgb[0, 0]) == (0, 0, 0)


def test_invalid_pixels_render_black():
    field = FlowField(u=np.ones((1, 2), dtype=np.float32),
                      v=np.zeros((1, 2), dtype=np.float32),
                      valid=np.array([[False, True]]))
    frame = flow_to_color(field, max_mag=1.0)
    assert tuple(frame.rgb[0, 0]) == (0, 0, 0)
    assert tuple(frame.rgb[0, 1]) != (0, 0, 0)


def saturated_vector_at_bin_center(j, mag=2.9999995):
    # fk = j + 0.5  =>  angle = ((j + 0.5) * 2 / 55 - 1) * pi
    # mag sits a hair under max_mag so rounding never tips rad past 1
    theta = ((j + 0.5) * 2.0 / N_WHEEL - 1.0) * np.pi
    return (-mag * np.cos(theta), -mag * np.sin(theta))


def test_rotating_by_one_55th_turn_advances_the_hue_bin_by_one():
    step = 2.0 * np.pi / N_WHEEL
    for j in range(N_WHEEL):
        u, v = saturated_vector_at_bin_center(j)
        assert hue_bin(u, v) == j
        cos_s, sin_s = np.cos(step), np.sin(step)
        ru = u * cos_s - v * sin_s
        rv = u * sin_s + v * cos_s
        assert hue_bin(ru, rv) == (j + 1) % N_WHEEL


def test_rotated_saturated_colors_walk_the_wheel():
    wheel = make_colorwheel()
    for j in range(N_WHEEL):
        u, v = saturated_vector_at_bin_center(j)
        frame = flow_to_color(field_of([(u, v)]), max_mag=3.0)
        rendered = frame.rgb[0, 0].astype(float)
        lo = wheel[j]
        hi = wheel[(j + 1) % N_WHEEL]
        # bin-center color interpolates halfway to the next hue
        expected = np.floor(0.5 * lo + 0.5 * hi)
        assert np.max(np.abs(rendered - expected)) <= 1.0


def test_auto_max_mag_uses_a_high_percentile():
    rng = np.random.default_rng(0)
    u = rng.uniform(0.0, 1.0, (32, 32)).astype(np.float32)
    u[0, 0] = 1000.0  # outlier must not wash out the rest
    field = FlowField.from_uv(u, np.zeros_like(u))
    frame = flow_to_color(field)
    interior = frame.rgb[1:, 1:]
    assert interior.min() < 250  # colors are not all near-white
