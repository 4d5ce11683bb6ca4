"""Geometry primitives: quantization, rects, panel fit, label layout."""
import math
import random

from hypothesis import given
from hypothesis import strategies as st

from collabmap.geometry import (
    LABEL_SPACING,
    PANEL_MARGIN,
    Rect,
    Vec2,
    label_layout,
    label_offsets,
    note_rect,
    panel_fit,
    pin_anchor,
    quantize,
)


def test_quantize_rounds_half_up_to_four_places():
    assert quantize(1.00005) == 1.0001
    assert quantize(1.00004) == 1.0
    assert quantize(-2.5) == -2.5
    assert quantize(0.1) == 0.1


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_quantize_idempotent(x):
    assert quantize(quantize(x)) == quantize(x)


def test_vec_validation_rejects_non_finite():
    assert not Vec2(float("nan"), 0.0).is_valid()
    assert not Vec2(0.0, float("inf")).is_valid()
    assert Vec2(1.5, -2.5).is_valid()


def test_rect_requires_ordered_corners():
    assert Rect.of(0, 0, 10, 10).is_valid()
    assert not Rect.of(10, 0, 0, 10).is_valid()


def test_note_rect_and_pin_anchor():
    r = note_rect(Vec2(0.0, 0.0))
    assert (r.min.x, r.min.y, r.max.x, r.max.y) == (-60.0, -60.0, 60.0, 60.0)
    pin = pin_anchor(Vec2(100.0, 100.0))
    assert (pin.x, pin.y) == (100.0, 40.0)


def test_panel_fit_single_note():
    got = panel_fit([Rect.of(0, 0, 10, 10)], margin=5)
    assert got == Rect.of(-5, -5, 15, 15)


def test_panel_fit_two_notes():
    got = panel_fit([Rect.of(0, 0, 10, 10), Rect.of(20, 0, 30, 10)], margin=5)
    assert got == Rect.of(-5, -5, 35, 15)


def test_panel_fit_uses_default_margin():
    got = panel_fit([Rect.of(0, 0, 10, 10)])
    assert got == Rect.of(-PANEL_MARGIN, -PANEL_MARGIN, 10 + PANEL_MARGIN, 10 + PANEL_MARGIN)


def test_panel_fit_contains_every_input_rect():
    # Brute-force containment scan over randomized rectangles.
    rng = random.Random(1234)
    rects = []
    for _ in range(50):
        x = rng.uniform(-2000, 2000)
        y = rng.uniform(-2000, 2000)
        rects.append(note_rect(Vec2.of(x, y)))
    box = panel_fit(rects)
    for r in rects:
        assert box.min.x <= r.min.x and box.min.y <= r.min.y
        assert box.max.x >= r.max.x and box.max.y >= r.max.y


def test_panel_fit_rejects_empty_input():
    try:
        panel_fit([])
        assert False, "expected ValueError"
    except ValueError:
        pass


def test_label_offsets_symmetric():
    assert label_offsets(1) == [0.0]
    assert label_offsets(3, spacing=12) == [-12.0, 0.0, 12.0]
    assert label_offsets(2, spacing=24) == [-12.0, 12.0]


def test_label_layout_single_label_sits_on_midpoint():
    got = label_layout(Vec2(0, 0), Vec2(10, 20), ["a"])
    assert got == [("a", Vec2(5.0, 10.0))]


def test_label_layout_three_labels_stack_in_order():
    got = label_layout(Vec2(0, 0), Vec2(0, 0), ["a", "b", "c"], spacing=12)
    assert [gid for gid, _ in got] == ["a", "b", "c"]
    assert [p.y for _, p in got] == [-12.0, 0.0, 12.0]
    assert all(p.x == 0.0 for _, p in got)


def test_label_layout_default_spacing():
    got = label_layout(Vec2(0, 0), Vec2(0, 0), ["a", "b"])
    assert [p.y for _, p in got] == [-LABEL_SPACING / 2, LABEL_SPACING / 2]


@given(
    st.floats(min_value=-1e5, max_value=1e5),
    st.floats(min_value=-1e5, max_value=1e5),
    st.floats(min_value=-1e5, max_value=1e5),
    st.floats(min_value=-1e5, max_value=1e5),
)
def test_label_layout_midpoint_formula(ax, ay, bx, by):
    [(_, pos)] = label_layout(Vec2.of(ax, ay), Vec2.of(bx, by), ["only"])
    assert math.isclose(pos.x, (quantize(ax) + quantize(bx)) / 2, abs_tol=1e-4)
    assert math.isclose(pos.y, (quantize(ay) + quantize(by)) / 2, abs_tol=1e-4)
