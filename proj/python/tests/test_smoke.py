import json
import math

import pytest

import divlab


def test_gamma_bounds():
    b1, b2 = divlab.gamma_bounds(4)
    assert b1 == pytest.approx(2 / (math.pi + 3**0.75), rel=1e-12)
    assert b2 == pytest.approx(2 ** (-8 / 3), rel=1e-12)
    assert divlab.auto_gamma(4) == b2


def test_field_evaluation():
    eta = divlab.make_field("counterexample:n=4:gamma=auto")
    assert eta.dim == 4
    assert eta([0, 0, 0, 1])[3] == pytest.approx(divlab.auto_gamma(4) * math.pi / 4, abs=1e-12)
    assert eta([0.3, 0.1, 0.2, -1.0]) == [0.0] * 4
    t = divlab.make_field("capillary:R=1")
    assert t.divergence([0.2, 0.1]) == pytest.approx(2.0)
    assert not t.in_domain([1.0, 0.0])
    with pytest.raises(ValueError):
        divlab.make_field("no-such-field")


def test_certify():
    ok = divlab.certify(4)
    assert ok["verdict"] == "CERTIFIED_SAMPLED"
    bad = divlab.certify(4, gamma=1.0, rho_points=60, z_points=60)
    assert bad["verdict"] == "VIOLATED"
    assert bad["witness"]["margin"] < 0


def test_flow_tube_and_strip():
    tube = divlab.flow_tube("zero:n=3", 0.5, [0, 0], [1, 1], 1.0, seeds=8)
    assert tube["residual"] == 0.0
    strip = divlab.strip_identity()
    assert strip["verdict"] == "PASS"


def test_capillary_trace():
    probe = divlab.ball_average("capillary:R=1", [1.0, 0.0])
    assert probe["extrapolated"] == pytest.approx(1.0, abs=1e-2)


def test_separable_and_quadratic():
    rep = divlab.separable(1.0, 1.0, 1.0)
    assert rep["details"]["blowup_radius"] == pytest.approx(math.e, rel=1e-2)
    assert divlab.quadratic_margin([0.0, 0.0]) == 0.5
    assert divlab.quadratic_margin([0.0, -1.0]) == 0.0


def test_run_operation_and_cli():
    report, csv = divlab.run_operation("density", {"set": "quadrant", "samples": "4000"})
    assert report["verdict"] == "PASS"
    assert next(iter(csv.values())).startswith("radius,ratio,stderr")

    code, out, _ = divlab.run_cli(["run", "separable-e"])
    assert code == 0
    assert json.loads(out)["verdict"] == "PASS"
    assert divlab.run_cli(["bogus"])[0] == 2

    names = {r["name"] for r in divlab.recipes()}
    assert "counterexample-certify" in names
