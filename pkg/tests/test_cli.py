import json

import numpy as np
import pytest

from mwlab.cli import main
from mwlab.grid import (
    DyadicDomain,
    VectorField,
    lift_vector_field,
    load_weight,
    save_set_function,
    save_vector_field,
    sign_flip_field,
)


@pytest.fixture
def workdir(tmp_path):
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def test_gen_and_ap_identity(workdir):
    w = workdir / "w.json"
    out = workdir / "r.json"
    assert run("gen-weight", "--kind", "identity", "--level", 2, "--origin", 0, "--size", 1, "--out", w) == 0
    assert run("ap-constant", "--weight", w, "--p", 2, "--variant", "reducing", "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["constant"] == pytest.approx(1.0, abs=1e-9)
    assert doc["config"]["variant"] == "reducing"


def test_maximal_svg_hexagon(workdir):
    dom = DyadicDomain(n=1, origin=(-1.0,), size=2.0, level=3)
    f = lift_vector_field(sign_flip_field(dom))
    fp = workdir / "f.json"
    save_set_function(f, fp)
    out = workdir / "m.json"
    svg = workdir / "m.svg"
    assert run("maximal", "--setfn", fp, "--out", out, "--svg", svg) == 0
    doc = json.loads(out.read_text())
    right = doc["cells"][4]
    assert right["type"] == "polygon"
    assert len(right["verts"]) == 6  # the hexagon
    assert svg.read_text().startswith("<svg")


def test_factorize_bundle(workdir):
    w = workdir / "w.json"
    run(
        "gen-weight", "--kind", "rotating", "--a", 0.5, "--b", -0.5, "--omega", 6.28,
        "--level", 3, "--origin", 0, "--size", 1, "--out", w,
    )
    outdir = workdir / "fact"
    assert run("factorize", "--weight", w, "--p", 2, "--out", outdir) == 0
    rep = json.loads((outdir / "report.json").read_text())
    assert rep["product_residual"] <= 1e-12
    assert (outdir / "w0.json").exists()
    assert (outdir / "w1.json").exists()
    assert (outdir / "rbar.json").exists()


def test_reverse_round_trip(workdir):
    w = workdir / "w.json"
    run(
        "gen-weight", "--kind", "rotating", "--a", 0.4, "--b", -0.3, "--omega", 6.28,
        "--level", 3, "--origin", 0, "--size", 1, "--out", w,
    )
    outdir = workdir / "fact"
    run("factorize", "--weight", w, "--p", 2, "--out", outdir)
    rec = workdir / "rec.json"
    assert (
        run(
            "reverse-factorize", "--w0", outdir / "w0.json", "--w1", outdir / "w1.json",
            "--q0", 1, "--q1", "inf", "--t", 0.5, "--out", rec,
        )
        == 0
    )
    orig = load_weight(w)
    back = load_weight(rec)
    assert np.abs(orig.cells - back.cells).max() <= 1e-10 * np.abs(orig.cells).max()


def test_john_subcommand(workdir):
    body = workdir / "b.json"
    body.write_text(json.dumps({"type": "polygon", "verts": [[1, 1], [-1, 1], [-1, -1], [1, -1]], "d": 2}))
    out = workdir / "j.json"
    assert run("john", "--body", body, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert np.allclose(np.array(doc["m"]).reshape(2, 2), np.eye(2), atol=1e-9)
    assert doc["inner_ok"] and doc["outer_ok"]


def test_extrapolate_subcommand(workdir, rng):
    w = workdir / "w.json"
    run(
        "gen-weight", "--kind", "rotating", "--a", 0.3, "--b", -0.2, "--omega", 6.28,
        "--level", 3, "--origin", 0, "--size", 1, "--out", w,
    )
    dom = load_weight(w).domain
    fv = workdir / "f.json"
    gv = workdir / "g.json"
    save_vector_field(VectorField(dom, rng.normal(size=(8, 2))), fv)
    save_vector_field(VectorField(dom, rng.normal(size=(8, 2))), gv)
    out = workdir / "ex.json"
    assert run("extrapolate", "--weight", w, "--p", 2, "--p0", 4, "--f", fv, "--g", gv, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["case"] == "I"
    for entry in doc["chain"].values():
        assert entry["slack"] <= 2.0**-26 * max(entry["rhs"], 1.0)


def test_demo_subcommand(workdir):
    w1, w2 = workdir / "w1.json", workdir / "w2.json"
    run("gen-weight", "--kind", "identity", "--level", 3, "--origin", 0, "--size", 1, "--out", w1)
    run("gen-weight", "--kind", "power", "--alpha", 0.3, "--level", 3, "--origin", 0, "--size", 1, "--out", w2)
    out = workdir / "demo.csv"
    assert run("demo", "--op-id", "dyadic-average", "--p", 2, "--p0", 4, "--weights", w1, w2, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0].split(",")[0] == "weight_id"
    assert len(lines) == 3


def test_determinism(workdir):
    w = workdir / "w.json"
    run("gen-weight", "--kind", "power", "--alpha", 0.4, "--level", 3, "--origin", 0, "--size", 1, "--out", w)
    a, b = workdir / "a.json", workdir / "b.json"
    run("ap-constant", "--weight", w, "--p", 2, "--variant", "roudenko", "--out", a)
    run("ap-constant", "--weight", w, "--p", 2, "--variant", "roudenko", "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_svg_byte_identical(workdir):
    dom = DyadicDomain(n=1, origin=(-1.0,), size=2.0, level=2)
    f = lift_vector_field(sign_flip_field(dom))
    fp = workdir / "f.json"
    save_set_function(f, fp)
    outs = []
    for name in ("m1", "m2"):
        out, svg = workdir / f"{name}.json", workdir / f"{name}.svg"
        assert run("maximal", "--setfn", fp, "--out", out, "--svg", svg) == 0
        outs.append(svg.read_bytes())
    assert outs[0] == outs[1]


def test_config_file_with_flag_override(workdir):
    w = workdir / "w.json"
    run("gen-weight", "--kind", "identity", "--level", 2, "--origin", 0, "--size", 1, "--out", w)
    cfgf = workdir / "cfg.json"
    cfgf.write_text(json.dumps({"p": 3.0, "variant": "roudenko"}))
    out = workdir / "r.json"
    assert run("ap-constant", "--config", cfgf, "--weight", w, "--p", 2, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["p"] == 2.0  # the flag overrides the config file


def test_validation_exit_codes(workdir):
    missing = workdir / "missing.json"
    out = workdir / "o.json"
    assert run("ap-constant", "--weight", missing, "--p", 2, "--out", out) == 2
    assert main(["not-a-command"]) == 64
    bad = workdir / "bad.json"
    bad.write_text("{broken")
    assert run("ap-constant", "--weight", bad, "--p", 2, "--out", out) == 2
