import json
import math

import numpy as np
import pytest

from isores.cli import main, parse_forcing, parse_potential
from isores.errors import ConfigError


def test_parse_forcing_shorthand():
    f = parse_forcing("sin")
    assert f.sin_coeffs == (1.0,) and f.a0 == 0.0
    f = parse_forcing("cos2t")
    assert f.cos_coeffs == (0.0, 1.0)
    f = parse_forcing("0.1+1*cos+0.5*sin2t")
    assert f.a0 == pytest.approx(0.1)
    assert f.cos_coeffs == (1.0, 0.0)
    assert f.sin_coeffs == (0.0, 0.5)
    f = parse_forcing("1-0.5*sin")
    assert f.a0 == 1.0 and f.sin_coeffs == (-0.5,)
    f = parse_forcing('{"kind":"trig","a0":0.2,"a":[1],"b":[]}')
    assert f.a0 == pytest.approx(0.2)
    with pytest.raises(ConfigError):
        parse_forcing("tan t")
    with pytest.raises(ConfigError):
        parse_forcing("{bad json")


def test_parse_potential():
    assert parse_potential("pinney").kind == "pinney"
    assert parse_potential("harmonic:3").params == (3,)
    pot = parse_potential("asymmetric:4:0.4444444444444444")
    assert pot.kind == "asymmetric"
    assert parse_potential('{"kind":"harmonic","n":2}').params == (2,)
    with pytest.raises(ConfigError):
        parse_potential("cubic")


def test_phi_scan_exit_codes(tmp_path):
    rc = main(["phi-scan", "--potential", "pinney", "--forcing", "sin",
               "--theta-points", "32", "--r-points", "8",
               "--out", str(tmp_path / "a")])
    assert rc == 0
    verdict = json.loads((tmp_path / "a" / "verdict.json").read_text())
    assert verdict["certified_resonant"] is True
    assert verdict["min_modulus"] > 0.03
    rc = main(["phi-scan", "--potential", "harmonic:1", "--forcing", "cos2t",
               "--theta-points", "16", "--r-points", "4"])
    assert rc == 2
    rc = main(["phi-scan", "--potential", "pinney", "--forcing", "{oops"])
    assert rc == 1


def test_resonance_run_exit_codes(tmp_path):
    rc = main(["resonance-run", "--potential", "harmonic:1", "--forcing", "sin",
               "--eps", "0.05", "--periods", "40",
               "--out", str(tmp_path / "run")])
    assert rc == 0
    rows = (tmp_path / "run" / "diagnostics.csv").read_text().splitlines()
    assert rows[0] == "window_index,window_sup,sqrtE,envelope"
    assert len(rows) == 41
    rc = main(["resonance-run", "--potential", "harmonic:1", "--forcing",
               "cos2t", "--eps", "0.05", "--periods", "40"])
    assert rc == 2


def test_acw_command(tmp_path):
    rc = main(["acw", "--c", "4", "--x0", "1", "--y0", "0", "--steps", "10",
               "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "acw_orbit.csv").read_text().splitlines()
    assert lines[-1].split(",")[1] == "1024"


def test_period_audit_command(tmp_path, capsys):
    rc = main(["period-audit", "--potential", "pinney", "--r", "100",
               "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["periods"][0]["period"] == pytest.approx(2 * math.pi, abs=1e-6)


def test_periodic_find_command(capsys):
    rc = main(["periodic-find", "--potential", "harmonic:1", "--forcing",
               "cos2t", "--eps", "0.09", "--x0", "0", "--v0", "0"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["converged"] is True
    rc = main(["periodic-find", "--potential", "harmonic:1", "--forcing",
               "sin", "--eps", "0.05", "--x0", "0.3", "--v0", "0.1"])
    assert rc == 2


def test_limits_audit_command(tmp_path, capsys):
    rc = main(["limits-audit", "--potential", "pinney", "--I", "100",
               "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["limits"][0]["I"] == 100.0
    assert "appendix" in payload
    assert (tmp_path / "bouncing.csv").exists()
    assert (tmp_path / "appendix.csv").exists()


def test_fourier_constants_command(capsys):
    rc = main(["fourier-constants", "--r", "0", "--r", "inf"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["constants"][0]["d_plus"] == pytest.approx(0.5, abs=1e-9)
    assert payload["constants"][1]["c0"] == pytest.approx(2 / math.pi, abs=1e-9)


def test_config_file_defaults(tmp_path):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({
        "potential": "pinney", "forcing": "sin", "theta_points": 16,
        "r_points": 4, "out": str(tmp_path / "out")}))
    rc = main(["phi-scan", "--config", str(cfgfile)])
    assert rc == 0
    assert (tmp_path / "out" / "phi_field.csv").exists()
    # explicit flags override the config file
    rc = main(["phi-scan", "--config", str(cfgfile), "--forcing", "cos2t",
               "--potential", "harmonic:1"])
    assert rc == 2


def test_byte_identical_reruns(tmp_path):
    args = ["phi-scan", "--potential", "pinney", "--forcing", "sin",
            "--theta-points", "16", "--r-points", "6", "--seedless"]
    assert main(args + ["--out", str(tmp_path / "one")]) == 0
    assert main(args + ["--out", str(tmp_path / "two")]) == 0
    for name in ("phi_field.csv", "verdict.json"):
        b1 = (tmp_path / "one" / name).read_bytes()
        b2 = (tmp_path / "two" / name).read_bytes()
        assert b1 == b2
    # determinism of a second command family as well
    a2 = ["acw", "--c", "0.25", "--x0", "1", "--y0", "1", "--steps", "50"]
    assert main(a2 + ["--out", str(tmp_path / "three")]) == 0
    assert main(a2 + ["--out", str(tmp_path / "four")]) == 0
    assert (tmp_path / "three" / "acw_orbit.csv").read_bytes() == \
        (tmp_path / "four" / "acw_orbit.csv").read_bytes()


def test_format_json_tables(tmp_path):
    rc = main(["fourier-constants", "--r", "0", "--format", "json",
               "--out", str(tmp_path)])
    assert rc == 0
    rows = json.loads((tmp_path / "fourier_constants.json").read_text())
    assert rows[0]["d_plus"] == pytest.approx(0.5, abs=1e-9)
    rc = main(["period-audit", "--potential", "harmonic:2", "--r", "1.5",
               "--format", "json", "--out", str(tmp_path)])
    assert rc == 0
    rows = json.loads((tmp_path / "periods.json").read_text())
    assert rows[0]["period"] == pytest.approx(math.pi, abs=1e-9)


def test_missing_required_parameter():
    assert main(["resonance-run", "--potential", "harmonic:1",
                 "--forcing", "sin"]) == 1
