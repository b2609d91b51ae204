import json

import numpy as np
import pytest

from qchkit import catalog
from qchkit.chart import chart_from_dict, load_chart, validate_chart
from qchkit.errors import ChartError

FLAT = {"name": "flat", "metric": ["1", "0", "0", "0", "1", "0", "0", "1", "0", "1"]}


def test_flat_has_no_diagnostics():
    spec = chart_from_dict(FLAT)
    assert validate_chart(spec, np.random.default_rng(0).random((5, 4))) == []


def test_calabi_domain_violation():
    spec = catalog.get("calabi").spec
    diags = validate_chart(spec, [(0.0, 0.0, -0.5, 0.0), (0.0, 0.0, 0.0, 0.0), (0.1, 0.2, 1.0, 0.0)])
    assert [d.kind for d in diags] == ["domain", "domain"]
    assert "z > 0" in diags[0].message


def test_nested_metric_must_be_symmetric():
    rows = [["1", "0", "0", "0"], ["x1", "1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]
    with pytest.raises(ChartError, match=r"\(1,2\)"):
        chart_from_dict({"metric": rows})


def test_nested_metric_symmetric_accepted():
    rows = [["1", "x1", "0", "0"], ["x1", "1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]
    spec = chart_from_dict({"metric": rows})
    np.testing.assert_array_equal(spec.metric_value((0.5, 0, 0, 0))[0, 1], 0.5)


def test_not_positive_definite_is_reported():
    spec = chart_from_dict({"metric": ["1", "2", "0", "0", "1", "0", "0", "1", "0", "1"]})
    (d,) = validate_chart(spec, [(0, 0, 0, 0)])
    assert d.kind == "not_positive_definite"


def test_packed_omega_is_antisymmetric():
    spec = chart_from_dict({**FLAT, "omega": ["1", "0", "0", "0", "0", "1"]})
    w = spec.omega_jet((0, 0, 0, 0)).v
    np.testing.assert_array_equal(w, -w.T)
    assert w[0, 1] == 1 and w[2, 3] == 1


def test_parameter_overrides():
    data = {**FLAT, "params": {"s": 2.0}, "metric": ["s", "0", "0", "0", "s", "0", "0", "1", "0", "1"]}
    assert chart_from_dict(data, {"s": 3.0}).metric_value((0, 0, 0, 0))[0, 0] == 3.0
    with pytest.raises(ChartError, match="unknown parameter"):
        chart_from_dict(data, {"q": 1.0})


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"metric": ["1"] * 9}, "entries"),
        ({"metric": ["1", "0", "0", "0", "1", "0", "0", "1", "0", "sin("]}, "sin"),
        ({"theta": ["0", "0"]}, "theta"),
        ({"coords": ["a", "b"]}, "four"),
        ({"box": [[0, 1]] * 3}, "box"),
    ],
)
def test_bad_chart_fields(patch, message):
    with pytest.raises(ChartError, match=message):
        chart_from_dict({**FLAT, **patch})


def test_missing_metric():
    with pytest.raises(ChartError):
        chart_from_dict({"name": "x"})


def test_load_chart_roundtrip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({**FLAT, "domain": ["x1 > -2"]}))
    spec = load_chart(path)
    assert spec.contains((-3, 0, 0, 0))[0].text == "x1 > -2"
    assert spec.contains((0, 0, 0, 0)) == []


def test_load_chart_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ChartError, match="invalid JSON"):
        load_chart(path)


def test_metric_scale():
    spec = catalog.get("calabi").spec.with_metric_scale(4.0)
    base = catalog.get("calabi").spec
    p = (0.1, 0.2, 1.3, 0.4)
    np.testing.assert_allclose(spec.metric_value(p), 4 * base.metric_value(p))
