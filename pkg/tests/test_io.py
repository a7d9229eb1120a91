import json
import warnings

import numpy as np
import pytest

from hardball import BoxDomain, classify
from hardball.io import InputFormatError, dumps, load_configuration, load_domain, render_svg


def test_load_roundtrip(tmp_path):
    (tmp_path / "box.json").write_text('{"lengths": [1.0, 2.0]}')
    (tmp_path / "cfg.json").write_text('{"points": [[0.25, 1.0], [0.75, 1.0]], "radius": 0.25}')
    assert load_domain(tmp_path / "box.json") == BoxDomain((1.0, 2.0))
    cfg = load_configuration(tmp_path / "cfg.json")
    assert cfg.radius == 0.25 and cfg.points.tolist() == [[0.25, 1.0], [0.75, 1.0]]


@pytest.mark.parametrize("text", ["{", '{"length": [1]}', '{"lengths": [1, -1]}', "[]"])
def test_malformed_domain(tmp_path, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    with pytest.raises(InputFormatError):
        load_domain(p)


def test_missing_file(tmp_path):
    with pytest.raises(InputFormatError):
        load_configuration(tmp_path / "nope.json")


def test_dumps_roundtrips_doubles():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=200).tolist() + [5e-324, 1.7976931348623157e308, 0.1, -0.0]
    assert json.loads(dumps(vals)) == vals
    with pytest.raises(ValueError):
        dumps([float("nan")])


def test_svg_with_stress_graph():
    box = BoxDomain((1.0, 2.0))
    pts = np.array([[0.25, 1.0], [0.75, 1.0]])
    svg = render_svg(box, pts, 0.25, classify(box, pts).graph)
    assert svg.startswith("<svg") and svg.count("<line") == 3 and svg.count("r=\"2.5\"") == 2


def test_svg_projects_higher_dimensions():
    box = BoxDomain((1.0, 1.0, 2.0))
    with pytest.warns(UserWarning):
        render_svg(box, np.array([[0.5, 0.5, 1.0]]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        render_svg(BoxDomain((1.0, 1.0)), np.array([[0.5, 0.5]]))
