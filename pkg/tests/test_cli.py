import json
import subprocess
import sys

import numpy as np
import pytest

from hardball import Configuration, Trajectory
from hardball.cli import (DEFAULT_SEED, EXIT_AMBIGUOUS, EXIT_BALANCED, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_OK,
                          EXIT_STALLED, EXIT_USAGE, main)
from hardball.taut import ActiveSet


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)
    return write


@pytest.fixture
def chain(files):
    return files("box.json", {"lengths": [1.0, 2.0]}), files("chain.json", {"points": [[0.25, 1.0], [0.75, 1.0]]})


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_exit_codes_are_stable():
    assert (EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_BALANCED, EXIT_AMBIGUOUS, EXIT_STALLED) == \
        (0, 2, 3, 4, 10, 11, 12)
    assert DEFAULT_SEED == 2011


def test_tau_chain(capsys, chain):
    code, out, _ = run(capsys, "tau", "--domain", chain[0], "--config", chain[1])
    assert code == 0
    data = json.loads(out)
    assert data["tau"] == 0.25 and len(data["constraints"]) == 3
    again = ActiveSet.from_dict(data)
    assert json.loads(json.dumps(again.to_dict())) == data


def test_tau_text(capsys, chain):
    code, out, _ = run(capsys, "tau", "--domain", chain[0], "--config", chain[1], "--format", "text")
    assert code == 0 and out.splitlines()[0] == "tau = 0.25"


def test_eps_act_widens(capsys, files):
    cfg = files("c.json", {"points": [[0.3, 0.5], [0.7, 0.52]]})
    sizes = []
    for eps in ("1e-9", "1e-3", "0.1", "0.3"):
        _, out, _ = run(capsys, "tau", "--lengths", 1, 1, "--config", cfg, "--eps-act", eps)
        sizes.append({json.dumps(c, sort_keys=True) for c in json.loads(out)["constraints"]})
    assert all(a <= b for a, b in zip(sizes, sizes[1:]))
    assert len(sizes[-1]) > len(sizes[0])


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "tau", "--config", tmp_path / "nope.json")
    assert code == EXIT_USAGE and "nope.json" in err


def test_malformed_json(capsys, files):
    code, _, _ = run(capsys, "tau", "--config", files("bad.json", "{points: 1}"))
    assert code == EXIT_USAGE


def test_domain_violation(capsys, files):
    code, _, _ = run(capsys, "classify", "--lengths", 1, 1, "--config", files("o.json", {"points": [[1.5, 0.5]]}))
    assert code == EXIT_DOMAIN


def test_classify_balanced(capsys, chain):
    code, out, _ = run(capsys, "classify", "--domain", chain[0], "--config", chain[1])
    assert code == EXIT_BALANCED
    data = json.loads(out)
    assert data["kind"] == "balanced"
    assert data["weights"] == pytest.approx([0.25, 0.5, 0.25], abs=1e-12)


def test_classify_regular(capsys, files):
    code, out, _ = run(capsys, "classify", "--lengths", 1, 1, "--config", files("c.json", {"points": [[0.3, 0.5]]}))
    assert code == EXIT_OK
    assert json.loads(out)["direction"] == [1.0, 0.0]


def test_classify_ambiguous(capsys, files):
    cfg = files("c.json", {"points": [[0.3, 0.5]]})
    code, out, _ = run(capsys, "classify", "--lengths", 1, 1, "--config", cfg, "--margin-tol", 10)
    assert code == EXIT_AMBIGUOUS and json.loads(out)["kind"] == "ambiguous"


@pytest.mark.parametrize("argv", [
    ["classify", "--lengths", 1, 1, "--config", "x.json", "--margin-tol", 0],
    ["classify", "--lengths", 1, 1, "--config", "x.json", "--balance-tol", -1],
    ["connect", "--seed", -1],
    ["connect", "--seed", 2 ** 64],
    ["frobnicate"],
    [],
    ["--threads", 0, "betti", "--n", 2, "--d", 2, "--k", 1],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as info:
        main([str(a) for a in argv])
    assert info.value.code == EXIT_USAGE


def test_parameter_error_is_usage(capsys):
    code, _, _ = run(capsys, "sphere", "--n", 2, "--epsilon", 0.3)
    assert code == EXIT_USAGE


def test_numeric_failure(capsys):
    # both solutions leave the box, so sampling gives up
    code, _, err = run(capsys, "sphere", "--n", 2, "--epsilon", 0.124)
    assert code == EXIT_NUMERIC and "sample" in err


def test_ascend_and_jsonl(capsys, files, tmp_path):
    cfg = files("c.json", {"points": [[0.1, 0.5]]})
    out_path = tmp_path / "t.jsonl"
    code, out, _ = run(capsys, "ascend", "--lengths", 1, 1, "--config", cfg, "--target", 0.3, "--jsonl", out_path)
    assert code == 0 and json.loads(out)["final_tau"] == pytest.approx(0.3, abs=1e-12)
    tr = Trajectory.from_jsonl(out_path.read_text(), d=2)
    assert tr.final == pytest.approx(np.array([[0.3, 0.5]]), abs=1e-6)


def test_ascend_stalls(capsys, chain):
    code, out, _ = run(capsys, "ascend", "--domain", chain[0], "--config", chain[1], "--target", 0.3)
    assert code == EXIT_STALLED and json.loads(out)["stall_kind"] == "balanced"


def test_retract(capsys, files, chain):
    code, out, _ = run(capsys, "retract", "--a", 0.05, "--b", 0.2, "--samples", 10)
    assert code == 0 and json.loads(out)["complete"]
    configs = files("many.json", [{"points": [[0.25, 1.0], [0.75, 1.0]]}, [[0.1, 0.3], [0.8, 1.5]]])
    code, out, _ = run(capsys, "retract", "--a", 0.1, "--b", 0.26, "--configs", configs)
    assert code == EXIT_STALLED and 0 in json.loads(out)["stalled"]


def test_retract_malformed_configs(capsys, files):
    code, _, _ = run(capsys, "retract", "--a", 0.1, "--b", 0.2, "--configs", files("m.json", '[{"pts": 1}]'))
    assert code == EXIT_USAGE


def test_betti(capsys):
    code, out, _ = run(capsys, "betti", "--n", 2, "--d", 2, "--k", 1)
    assert code == 0 and json.loads(out)["above"][0] == 2


def test_betti_from_box(capsys):
    code, out, _ = run(capsys, "betti", "--n", 3, "--lengths", 1, 2)
    data = json.loads(out)
    assert data["r_star"] == 1 / 6 and data["above"] == [1, 7, 0]


def test_chain(capsys):
    code, out, _ = run(capsys, "chain", "--n", 3)
    data = json.loads(out)
    assert code == 0 and data["r_star"] == 1 / 6 and data["classification"] == "balanced"
    assert data["certificate"]["residual"] <= 1e-9


def test_chain_permutation(capsys):
    _, out, _ = run(capsys, "chain", "--n", 3, "--perm", 3, 1, 2)
    pts = json.loads(out)["points"]
    assert pts[2][0] == pytest.approx(1 / 6) and pts[0][0] == pytest.approx(0.5)


def test_connect(capsys, tmp_path):
    code, out, _ = run(capsys, "connect", "--n", 2, "--r", 0.26, "--samples", 500, "--seed", 7, "--adjacency")
    data = json.loads(out)
    assert code == 0 and data["components"] == 2
    assert len(data["labels"]) == data["nodes"] and len(data["adjacency"]) == data["edges"]


def test_connect_sweep_csv(capsys, tmp_path):
    csv = tmp_path / "s.csv"
    code, out, _ = run(capsys, "connect", "--sweep", 0.1, 0.26, "--samples", 300, "--seed", 7, "--csv", csv)
    assert code == 0
    assert csv.read_text().splitlines() == ["r,components", "0.1,1", "0.26,2"]


def test_sphere_and_sigma(capsys, files):
    code, out, _ = run(capsys, "sphere", "--n", 2, "--epsilon", 0.01, "--count", 4)
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(rows) == 4
    for row in rows:
        assert row["points"][2] == pytest.approx(0.74) and abs(row["points"][3] - 1.0) == pytest.approx(0.2)
    cfg = files("s.json", {"points": [[0.26, 1.0], [0.74, 1.2]], "radius": 0.24})
    code, out, _ = run(capsys, "sigma", "--lengths", 1, 2, "--config", cfg)
    assert code == 0 and json.loads(out)["member"] is True


def test_sphere_retract_path(capsys):
    code, out, _ = run(capsys, "sphere", "--n", 3, "--epsilon", 0.01, "--retract", "--steps", 8)
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(rows) == 17
    assert min(r["tau"] for r in rows) >= 1 / 6 - 0.01 - 1e-9
    assert Trajectory.from_jsonl(out, d=2).final.shape == (3, 2)


def test_intersect(capsys):
    code, out, _ = run(capsys, "intersect", "--n", 2, "--epsilon", 0.01)
    data = json.loads(out)
    assert code == 0 and data["rank"] == 4
    assert np.asarray(data["points"]) == pytest.approx(np.array([[0.26, 1.0], [0.74, 1.2]]), abs=1e-8)


def test_render(capsys, chain, tmp_path):
    svg = tmp_path / "c.svg"
    code, _, _ = run(capsys, "render", "--domain", chain[0], "--config", chain[1], "--stress", "--out", svg)
    assert code == 0 and svg.read_text().count("<line") == 3


def test_verbose_goes_to_stderr(capsys, chain):
    code, out, err = run(capsys, "--verbose", "classify", "--domain", chain[0], "--config", chain[1])
    assert code == EXIT_BALANCED
    json.loads(out)
    assert err.startswith("balanced")


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("HARDBALL_THREADS", "3")
    code, out, _ = run(capsys, "connect", "--r", 0.1, "--samples", 50)
    assert code == 0 and json.loads(out)["components"] >= 1


def test_json_roundtrip_is_bit_identical(capsys, files):
    rng = np.random.default_rng(4)
    pts = rng.uniform(0.05, 0.95, size=(3, 2)) * [1, 2]
    cfg = files("r.json", {"points": pts.tolist()})
    _, out, _ = run(capsys, "ascend", "--lengths", 1, 2, "--config", cfg, "--target", 0.1)
    back = Configuration.from_dict(json.loads(out))
    assert back.points.tobytes() == np.asarray(json.loads(out)["points"]).tobytes()
    _, out, _ = run(capsys, "tau", "--lengths", 1, 2, "--config", cfg)
    data = json.loads(out)
    assert ActiveSet.from_dict(data).to_dict() == data


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hardball", "betti", "--n", "3", "--d", "2", "--k", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["above"] == [1, 7, 0]
