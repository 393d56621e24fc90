import json
import subprocess
import sys

import numpy as np
import pytest

from numprimdec.cli import fmt_complex, main, parse_complex, parse_point, report
from numprimdec.npd import NPDResult

from conftest import FIXTURES


def fx(name):
    return str(FIXTURES / name)


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


@pytest.fixture(scope="module")
def npd_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("npd") / "out.json"
    assert main(["npd", "--order-max", "1", fx("xsq_xyz.sys"), "-o", str(path)]) == 0
    return path


def test_npd_json(npd_file):
    obj = json.loads(npd_file.read_text())
    assert len(obj["components"]) == 3
    assert sorted((c["dim_downstairs"], c["degree"]) for c in obj["components"]) == [(1, 1), (1, 1), (2, 1)]
    assert obj["config"]["seed"] == 0 and obj["config"]["d_max"] == 1
    assert obj["d_max"] == 1 and "system" in obj


def test_npd_pretty(capsys):
    code, out, _ = run(capsys, "npd", "--pretty", fx("xsq_xyz.sys"))
    assert code == 0
    assert out.count("component #") == 3 and "possibly pseudo" in out


def test_member(capsys, npd_file):
    code, out, _ = run(capsys, "member", "--npd", str(npd_file), "--poly", "x1", fx("xsq_xyz.sys"))
    assert code == 0 and json.loads(out)["verdict"] is False
    code, out, _ = run(capsys, "member", "--npd", str(npd_file), "--poly", "x1^2*x2", "--pretty")
    assert code == 0 and out.strip() == "true"


def test_sample(capsys, npd_file):
    code, out, _ = run(capsys, "sample", "--npd", str(npd_file), "--component", "1", "--count", "3")
    assert code == 0
    pts = np.array([[complex(*v) for v in p] for p in json.loads(out)["points"]])
    assert pts.shape == (3, 3) and np.all(np.abs(pts[:, 0]) < 1e-6)


def test_witness_move(capsys, npd_file):
    code, out, _ = run(capsys, "witness-move", "--npd", str(npd_file), "--component", "2")
    assert code == 0 and json.loads(out)["degree"] == 1


def test_mult(capsys):
    code, out, _ = run(capsys, "mult", "--point", "0,0", fx("x2_xy_y2.sys"), "--pretty")
    assert code == 0 and out.strip() == "3"


def test_mult_not_stabilized(capsys):
    code, _, err = run(capsys, "mult", "--point", "0,0,0", fx("xsq_xyz.sys"), "--d-cap", "3")
    assert code == 2 and "numerical failure" in err


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", fx("cubic_line.sys"))
    assert code == 0
    xs = sorted(round(p[0][0], 8) for p in json.loads(out)["points"])
    assert xs == [1, 2, 3]


def test_dualspace_and_deflate(capsys):
    code, out, _ = run(capsys, "dualspace", "--point", "0,0", "--order", "2", fx("x2_xy_y2.sys"))
    assert code == 0 and json.loads(out)["dim"] == 3
    code, out, _ = run(capsys, "deflate", "--order", "1", fx("xsq_xyz.sys"))
    obj = json.loads(out)
    assert code == 0 and obj["ambient_dim"] == 7 and len(obj["generators"]) == 4


def test_nid(capsys):
    code, out, _ = run(capsys, "nid", fx("plane_line.sys"))
    assert code == 0 and len(json.loads(out)["components"]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["mult", "--point", "0,zz", "SYS"],
        ["mult", "--point", "0,0,0", "SYS"],
        ["mult", "--point", "0,0", "/nonexistent.sys"],
        ["npd", "--order-max", "-1", "SYS"],
        ["solve", "SYS"],
        ["sample", "--npd", "/nonexistent.json", "--component", "1"],
    ],
)
def test_input_errors(capsys, argv):
    argv = [fx("x2_xy_y2.sys") if a == "SYS" else a for a in argv]
    if argv[0] == "solve":
        argv[-1] = fx("xsq_xyz.sys")
    code, _, err = run(capsys, *argv)
    assert code == 1 and err.startswith(("error:", "syntax error:"))


def test_syntax_error(capsys, tmp_path):
    bad = tmp_path / "bad.sys"
    bad.write_text("vars: x y\nx^2 + * y\n")
    code, _, err = run(capsys, "nid", str(bad))
    assert code == 1 and "line 2" in err


def test_component_out_of_range(capsys, npd_file):
    code, _, err = run(capsys, "sample", "--npd", str(npd_file), "--component", "9")
    assert code == 1 and "out of range" in err


def test_byte_identical_reruns(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["npd", "--seed", "4", fx("x3sq_parabola.sys"), "-o", str(tmp_path / "out.json")]) == 0
        p.write_bytes((tmp_path / "out.json").read_bytes())
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "numprimdec", "mult", "--point", "0,0", fx("x2_xy_y2.sys"), "--pretty"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "3"


def test_parse_helpers():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("3-4*i") == 3 - 4j
    assert parse_complex("-1.5") == -1.5
    assert np.array_equal(parse_point("1, 2j,-3"), [1, 2j, -3])
    assert fmt_complex(1 / 3) == "0.33333"


def test_report_empty():
    assert report(NPDResult([], 1, 0)) == "no components\n"
