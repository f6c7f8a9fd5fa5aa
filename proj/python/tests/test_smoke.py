import math
from pathlib import Path

import pytest

import wickbench as wb

CONFIGS = Path(__file__).resolve().parents[2] / "configs"

SMALL_FPS = """
experiment = "fps-law"
seed = 3
parts = ["mean"]
mean_across = 17
mean_samples = 40
[criteria]
mean_se = 50.0
"""


def test_names():
    assert "identities" in wb.experiment_names()
    assert "combi" in wb.identity_tags()


def test_identity_and_coefficients():
    r = wb.verify_identity("change_var", 8)
    assert r["pass"] and r["first_failure"] is None
    # Q_2(x, u) = x^2 - u
    assert wb.hermite_q(2) == {"0,1": "-1", "2,0": "1"}
    with pytest.raises(Exception):
        wb.verify_identity("no_such_identity", 3)


def test_special_functions():
    assert wb.series_p_hit(1.0, 2.0, 30) == pytest.approx(math.erf(0.5), abs=1e-12)
    assert wb.bessel_potential(1.5, 0.0) == pytest.approx(1 / (2 * math.pi), abs=1e-12)
    assert wb.hitting_cdf(1.0, 1.0) == pytest.approx(math.erfc(1 / math.sqrt(2)), abs=1e-12)
    assert wb.mass_change_check(0.3, 1.0, 1.7, 3) <= 1e-12


def test_run_identities_file():
    res = wb.run_file(CONFIGS / "identities.toml")
    assert res["experiment"] == "identities"
    assert all(c["pass"] for c in res["criteria"])


def test_small_run_is_deterministic():
    a = wb.run_config(SMALL_FPS, workers=1)
    b = wb.run_config(SMALL_FPS, workers=2)
    assert a == b
    assert a["tables"] == ["mean_measure.csv"]


def test_config_errors():
    with pytest.raises(wb.ConfigError):
        wb.run_config('experiment = "gmc"\nbogus = 1\n')
    with pytest.raises(ValueError):
        wb.run_config('experiment = "nope"\n')


def test_selfcheck():
    res = wb.selfcheck()
    assert res["experiment"] == "selfcheck"
    assert all(c["pass"] for c in res["criteria"])


def test_results_match_schema():
    jsonschema = pytest.importorskip("jsonschema")
    import json

    schema = json.loads((CONFIGS.parent / "schema" / "results.schema.json").read_text())
    jsonschema.validate(wb.run_config(SMALL_FPS), schema)
    jsonschema.validate(wb.run_file(CONFIGS / "identities.toml"), schema)
    jsonschema.validate(wb.selfcheck(), schema)
