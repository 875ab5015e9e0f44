import re

import numpy as np
import pytest

from hamred.core import Space, ValidationError
from hamred.svg import Panel, emit_svg, render
from hamred.trajectory import Trajectory
from hamred.transforms import CanonicalMap, map_trajectory, zhukovski_ellipse


def _circle(n=100):
    th = np.linspace(0, 2 * np.pi, n)
    return Trajectory(th, np.column_stack([np.exp(1j * th), np.zeros(n)]), Space.FLAT_C, "circle")


def _points(svg):
    m = re.search(r'points="([^"]+)"', svg)
    return [tuple(map(float, p.split(","))) for p in m.group(1).split()]


def test_circle_is_closed_polyline():
    svg = emit_svg(_circle())
    pts = _points(svg)
    assert svg.startswith("<?xml") and svg.rstrip().endswith("</svg>")
    assert pts[0] == pytest.approx(pts[-1], abs=0.01)
    assert svg.count("<polyline") == 1


def test_deterministic_bytes():
    assert emit_svg(_circle()) == emit_svg(_circle())


def test_side_by_side_with_focus_marker():
    e = zhukovski_ellipse(2.0, 200)
    img = map_trajectory(CanonicalMap(), e)
    svg = emit_svg([e, img], markers=[(0j, "focus")])
    assert svg.count("<polyline") == 2
    assert svg.count(">focus</text>") == 2
    assert 'width="840"' in svg


def test_empty_input_rejected():
    empty = Trajectory(np.zeros(0), np.zeros((0, 2), dtype=complex), Space.FLAT_C)
    with pytest.raises(ValidationError):
        emit_svg(empty)
    with pytest.raises(ValidationError):
        emit_svg([])
    with pytest.raises(ValidationError):
        render([])


def test_r3_projection():
    t = np.linspace(0, 1, 10)
    x = np.column_stack([np.cos(t), np.sin(t), t, 0 * t, 0 * t, 0 * t])
    svg = emit_svg(Trajectory(t, x, Space.R3_MONOPOLE, "r3"))
    assert len(_points(svg)) == 10


def test_render_custom_panel():
    svg = render([Panel("a", (np.array([0, 1 + 1j, 2]),))])
    assert ">a</text>" in svg
