import io
import json

import pytest

from graphfunc.cli import EXIT_DIVERGENT, EXIT_OK, EXIT_REFUSED, EXIT_USAGE, parse_complex, run
from graphfunc.dilog import g4_value
from graphfunc.io import fixture_text, parse_graph, schema

jsonschema = pytest.importorskip("jsonschema")


@pytest.fixture
def files(tmp_path):
    out = {}
    for name in ("G4", "H4", "G7", "H7", "chain"):
        p = tmp_path / f"{name}.graph"
        p.write_text(fixture_text(name))
        out[name] = str(p)
    return out


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), out=buf)
    text = buf.getvalue()
    data = json.loads(text) if text.strip() else None
    if data is not None:
        jsonschema.validate(data, schema("envelope"))
        name = "error" if "error" in data["payload"] else data["command"]
        jsonschema.validate(data["payload"], schema(name))
    return code, data


def test_parse_complex():
    assert parse_complex("i") == 1j
    assert parse_complex("0.5+0.75i") == 0.5 + 0.75j
    assert parse_complex("-2 - 1j") == -2 - 1j


def test_check_g4(files):
    code, data = call("check", files["G4"])
    assert code == EXIT_OK
    p = data["payload"]
    assert (p["verdict"], p["n_uv"], p["n_ir"], p["M"]) == ("convergent", 3, 1, "1")
    assert data["command"] == "check" and data["input_digest"].startswith("sha256:")


def test_check_divergent(tmp_path, files):
    text = fixture_text("G4").replace("edge e1 0 x weight 1", "edge e1 0 x weight 2")
    f = tmp_path / "heavy.graph"
    f.write_text(text)
    code, data = call("check", str(f))
    assert code == EXIT_DIVERGENT
    failing = [c for c in data["payload"]["conditions"] if not c["pass"]]
    assert [c["edges"] for c in failing] == [["e1"]]


def test_parse_error_exit_code(tmp_path, capsys):
    f = tmp_path / "bad.graph"
    f.write_text("dim 4\nvertex 0 sideways\n")
    code, data = call("check", str(f))
    assert code == EXIT_USAGE and data is None
    assert "line 2" in capsys.readouterr().err


def test_missing_file():
    assert call("check", "/nonexistent/file.graph")[0] == EXIT_USAGE


def test_poly_table(files):
    code, data = call("poly", files["G4"], "--partition", "01,z", "--partition", "1z,0", "--phi")
    assert code == EXIT_OK
    polys = data["payload"]["polynomials"]
    assert polys["psi~[01,z]"] == "a1*a2"
    assert polys["psi~[1z,0]"] == "a2*a3"
    assert polys["phi~"] == "s01*a1*a2+s0z*a1*a3+s1z*a2*a3"


def test_poly_cremona(files):
    code, data = call("poly", files["G4"], "--partition", "0,1,z", "--cremona")
    assert data["payload"]["polynomials"]["psi[0,1,z]"] == "a1*a2+a1*a3+a2*a3"


def test_poly_unknown_label(files):
    assert call("poly", files["G4"], "--partition", "0q,z")[0] == EXIT_USAGE


def test_eval_g4(files):
    code, data = call("eval", files["G4"], "--z", "i", "--samples", "200000", "--seed", "1")
    assert code == EXIT_OK
    est = data["payload"]["estimate"]
    assert abs(est["value"] - g4_value(1j)) <= 3 * est["stderr"]
    assert data["payload"]["chart"] == "e1"


def test_eval_chart_and_n(files):
    _, a = call("eval", files["G4"], "--z", "i", "--samples", "200000", "--chart", "e2")
    _, b = call("eval", files["G4"], "--z", "i", "--samples", "200000", "--n", "e1=1", "--seed", "5")
    _, c = call("eval", files["G4"], "--z", "i", "--samples", "200000", "--representation", "direct")
    ests = [d["payload"]["estimate"] for d in (a, b, c)]
    for x in ests:
        for y in ests:
            assert abs(x["value"] - y["value"]) <= 3 * (x["stderr"] ** 2 + y["stderr"] ** 2) ** 0.5
    assert b["payload"]["n"] == [1, 0, 0]


def test_eval_with_s(files):
    code, data = call("eval", files["G4"], "--s", "01=1,0z=1,1z=2", "--samples", "100000")
    assert code == EXIT_OK and "z" not in data["payload"]


def test_eval_usage_errors(files, capsys):
    assert call("eval", files["G4"], "--z", "1")[0] == EXIT_USAGE
    assert "z must avoid {0,1}" in capsys.readouterr().err
    assert call("eval", files["G4"])[0] == EXIT_USAGE
    assert call("eval", files["G4"], "--z", "i", "--chart", "e9")[0] == EXIT_USAGE
    assert call("eval", files["G4"], "--z", "i", "--representation", "direct", "--n", "e1=1")[0] == EXIT_USAGE


def test_eval_divergent_echoes_check(tmp_path):
    f = tmp_path / "heavy.graph"
    f.write_text(fixture_text("G4").replace("weight 1\nedge e2", "weight 2\nedge e2"))
    code, data = call("eval", str(f), "--z", "i", "--samples", "1000")
    assert code == EXIT_DIVERGENT
    assert data["payload"]["check"]["verdict"] == "uv-divergent"


def test_dual_h7(files, tmp_path):
    out = tmp_path / "H7star.graph"
    code, data = call("dual", files["H7"], "--output", str(out))
    assert code == EXIT_OK
    D = parse_graph(out.read_text())
    assert all(e.weight == 1 for e in D.edges)
    assert "e1 -> e1*" in data["payload"]["graph_file"]
    assert data["payload"]["bijection"]["e10"] == "e10*"


def test_dual_missing_rotation(tmp_path):
    text = "\n".join(l for l in fixture_text("G4").splitlines() if not l.startswith("rotation"))
    f = tmp_path / "norot.graph"
    f.write_text(text)
    code, data = call("dual", str(f))
    assert code == EXIT_REFUSED and "rotation" in data["payload"]["error"]


def test_verify_dual(files):
    code, data = call("verify-dual", files["H4"])
    assert code == EXIT_OK
    assert data["payload"]["ok"] and data["payload"]["involution"]
    code, data = call("verify-dual", files["G4"])
    assert code == EXIT_REFUSED
    assert data["payload"]["hint"] == "add edge 0-1 with weight 1"


def test_verify_dual_numeric(files):
    code, data = call("verify-dual", files["H4"], "--z", "0.2+0.9i", "--samples", "100000")
    assert code == EXIT_OK and data["payload"]["numeric"]["agree"]


def test_payloads_are_deterministic(files):
    _, a = call("check", files["H7"])
    _, b = call("check", files["H7"])
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == EXIT_OK
    assert run(["frobnicate"]) == EXIT_USAGE
