import json
import subprocess
import sys
from fractions import Fraction

import pytest

from posetsat.cli import dispatch
from posetsat.errors import InvalidSpecError
from posetsat.reports import RunManifest, jsonable, serialize, to_json


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_poset_info_levels(capsys):
    code, out, _ = run(capsys, "poset-info", "--family", "rpower", "--n", "2", "--r", "2", "--width")
    rep = json.loads(out)
    assert code == 0 and rep["level_sizes"] == [1, 2, 3, 2, 1] and rep["width"] == 3
    assert rep["manifest"]["generator"] and "wall_time_seconds_approx" not in rep["manifest"]


def test_chain_verify(capsys):
    code, out, _ = run(capsys, "chain-verify", "--n", "5")
    assert code == 0 and json.loads(out)["violations"] == []
    code, out, _ = run(capsys, "chain-verify", "--n", "2", "--format", "csv")
    assert code == 0 and "1,0,1/3,1/6" in out.splitlines()


def test_count_antichains(capsys):
    code, out, _ = run(capsys, "count-antichains", "--family", "boolean", "--n", "4", "--exact")
    assert code == 0 and json.loads(out)["exact"] == 168


def test_count_with_stages(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text('{"stages":[{"d":2,"m":11},{"d":1,"m":8}],"certified":false}')
    code, out, _ = run(capsys, "count-antichains", "--family", "boolean", "--n", "4", "--exact", "--stages", str(cfg))
    rep = json.loads(out)
    assert code == 0 and rep["bound"]["upper"] >= 168
    cfg.write_text('{"stages":[{"d":1,"m":7}],"certified":false}')
    code, _, err = run(capsys, "count-antichains", "--family", "boolean", "--n", "4", "--stages", str(cfg))
    assert code == 2 and err


def test_containers_build_dump(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text('{"stages":[{"d":1,"m":3}],"certified":false}')
    dump = tmp_path / "fam.txt"
    code, out, _ = run(capsys, "containers-build", "--family", "boolean", "--n", "2", "--stages", str(cfg), "--dump", str(dump))
    rep = json.loads(out)
    assert code == 0 and rep["antichains_run"] == 6
    assert len(dump.read_text().splitlines()) == rep["distinct_containers"]


def test_supersat_commands(capsys):
    code, out, _ = run(capsys, "supersat-brute", "--family", "rpower", "--n", "2", "--r", "2", "--m", "4")
    rep = json.loads(out)
    assert code == 0 and rep["rows"][0]["brute_min"] == 2
    code, out, _ = run(capsys, "supersat-bound", "--family", "boolean", "--n", "4", "--m", "8", "--format", "csv")
    assert code == 0 and out.splitlines()[1] == "8,6,3/1,6/1"
    code, out, _ = run(capsys, "conjecture-explore", "--n", "2", "--r", "2")
    assert code == 0


def test_random_antichain(capsys):
    argv = ["random-antichain", "--family", "boolean", "--n", "4", "--p", "1/2", "--trials", "5", "--seed", "3"]
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert code == 0 and first == second
    rep = json.loads(first)
    assert rep["spec"]["p"] == "1/2" and len(rep["per_trial"]) == 5


def test_exit_codes(capsys):
    assert run(capsys, "poset-info", "--family", "subspace", "--n", "3", "--q", "6")[0] == 2
    assert run(capsys, "poset-info", "--family", "boolean")[0] == 2
    assert run(capsys, "no-such-command")[0] == 2
    assert run(capsys, "random-antichain", "--family", "boolean", "--n", "4", "--trials", "2")[0] == 2
    assert run(capsys, "supersat-brute", "--family", "boolean", "--n", "6", "--m", "10")[0] == 3
    assert run(capsys, "poset-info", "--family", "boolean", "--n", "30", "--width", "--limit-elements", "1000")[0] == 3
    assert run(capsys, "poset-info", "--family", "boolean", "--n", "3", "--format", "csv")[0] == 0


def test_byte_identical_files(tmp_path):
    outs = []
    path = tmp_path / "o.json"
    for _ in range(2):
        assert dispatch(["supersat-brute", "--family", "boolean", "--n", "3", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_serialization_contract():
    assert jsonable(Fraction(1, 3)) == "1/3"
    assert jsonable(2**60) == str(2**60) and jsonable(5) == 5
    assert to_json({"b": 1, "a": Fraction(2, 4)}) == '{\n  "a": "1/2",\n  "b": 1\n}\n'
    with pytest.raises(InvalidSpecError):
        serialize({}, "xml")
    with pytest.raises(InvalidSpecError):
        serialize({}, "csv")
    m = RunManifest(["x"], 1, {"elements": 5}).to_dict()
    assert m["command"] == ["x"] and m["master_seed"] == 1


def test_console_script_entry():
    res = subprocess.run(
        [sys.executable, "-m", "posetsat.cli", "poset-info", "--family", "boolean", "--n", "2", "--format", "csv"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and res.stdout == "i,size\n0,1\n1,2\n2,1\n"
