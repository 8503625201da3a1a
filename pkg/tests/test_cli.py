import json
from pathlib import Path

import pytest

from certmesh.cli import JobSpec, main, run
from certmesh.errors import DimensionMismatch
from corpus import SURFACES

GOLDEN = Path(__file__).parent / "golden"
NODE = ["curve-mesh", "-f", "y^2-x^2-x^3", "--box", "[-2,2]x[-2,2]", "--eps", "1/16"]


def test_sphere_topology_example(tmp_path):
    out = tmp_path / "sphere.json"
    rc = main(["surface-topology", "-f", "x^2+y^2+z^2-1", "--box", "[-2,2]x[-2,2]x[-2,2]",
               "--format", "json", "-o", str(out), "--quiet"])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["euler_characteristic"] == 2


def test_obj_written(tmp_path):
    out = tmp_path / "sphere.obj"
    assert main(["surface-topology", "-f", "x^2+y^2+z^2-1", "--box", "[-2,2]x[-2,2]x[-2,2]",
                 "-o", str(out), "--quiet"]) == 0
    assert any(line.startswith("f ") for line in out.read_text().splitlines())


def test_exit_codes(tmp_path):
    f, B = SURFACES["S4"]
    out = str(tmp_path / "x")
    assert main(["surface-topology", "-f", f, "--box", B, "-o", out, "--quiet"]) == 11
    assert main(["curve-topology", "-f", "x^^2", "--box", "[-1,1]x[-1,1]",
                 "-o", out, "--quiet"]) == 2
    assert main(["curve-topology", "-f", "x+y", "--box", "[-1,1]",
                 "-o", out, "--quiet"]) == 3
    assert main(["curve-topology", "-f", "(x-y)^2", "--box", "[-1,1]x[-1,1]",
                 "-o", out, "--quiet"]) == 10


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as e:
        main(["no-such-mode"])
    assert e.value.code == 2


def test_jobspec_validation():
    with pytest.raises(DimensionMismatch):
        JobSpec("x+y", "[-1,1]", "curve-topology")
    with pytest.raises(ValueError):
        JobSpec("x+y", "[-1,1]x[-1,1]", "curve-mesh")


def test_deterministic_output():
    spec = JobSpec("y^2 - x^3", "[-2,2]x[-2,2]", "curve-mesh", eps="1/8", fmt="json")
    assert run(spec)[0] == run(spec)[0]


def test_strip_square(tmp_path):
    out = tmp_path / "t.json"
    assert main(["curve-topology", "-f", "(x-y)^2*(x+y)", "--box", "[-1,1]x[-1,1]",
                 "--strip-square", "--format", "json", "-o", str(out), "--quiet"]) == 0
    plain = tmp_path / "p.json"
    assert main(["curve-topology", "-f", "(x-y)*(x+y)", "--box", "[-1,1]x[-1,1]",
                 "--format", "json", "-o", str(plain), "--quiet"]) == 0
    a, b = json.loads(out.read_text()), json.loads(plain.read_text())
    assert len(a["points"]) == len(b["points"]) and len(a["edges"]) == len(b["edges"])


def test_explicit_factors(tmp_path):
    out = str(tmp_path / "m.obj")
    args = ["surface-topology", "-f", "(z-x)*(x^2+y^2+z^2-1)", "--box", "[-2,2]x[-2,2]x[-2,2]",
            "-o", out, "--quiet"]
    assert main(args + ["--factors", "z-x; x^2+y^2+z^2-1"]) == 0
    assert main(args + ["--factors", "z-x; x^2+y^2+z^2-2"]) == 2


@pytest.mark.parametrize("fmt, name", [("json", "node_mesh.json"), ("svg", "node_mesh.svg")])
def test_golden_node_mesh(tmp_path, fmt, name):
    out = tmp_path / name
    assert main(NODE + ["--format", fmt, "-o", str(out), "--quiet"]) == 0
    assert out.read_text() == (GOLDEN / name).read_text()
