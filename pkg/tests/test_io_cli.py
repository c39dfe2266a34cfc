import json
import math

import numpy as np
import pytest

from schurlab import data_path
from schurlab.cli import main
from schurlab.gaps import Subspace
from schurlab.io import (ParseError, matrix_from_json, matrix_to_json, parse_matrix_file,
                         subspace_from_json, subspace_to_json)


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_parse_row_major(tmp_path):
    p = _write(tmp_path, "a.json", {"rows": 2, "cols": 2,
                                    "data": [[0, 0], [1, 0], [0, 0], [0, 0]]})
    np.testing.assert_array_equal(parse_matrix_file(p), [[0, 1], [0, 0]])


def test_parse_scalar(tmp_path):
    p = _write(tmp_path, "a.json", {"rows": 1, "cols": 1, "data": [[5, 0]]})
    np.testing.assert_array_equal(parse_matrix_file(p), [[5]])


@pytest.mark.parametrize("text, fragment", [
    ('{"rows": 2, "cols": 2, "data": [[0, 0]]}', r"expected rows\*cols"),
    ('{"rows": 1, "cols": 1, "data": [[NaN, 0]]}', "non-finite"),
    ('{"rows": 1, "cols": 1, "data": [[1e999, 0]]}', "not finite"),
    ('{"rows": 1, "cols": 1,\n "data": [[1, 0]', ":2:"),
    ('{"rows": 1, "data": []}', "cols"),
    ('{"rows": 1, "cols": 1, "data": [[1, 0, 2]]}', "entry 0"),
])
def test_parse_errors(tmp_path, text, fragment):
    p = _write(tmp_path, "bad.json", text)
    with pytest.raises(ParseError, match=fragment):
        parse_matrix_file(p)


def test_matrix_json_round_trip(rng):
    m = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    np.testing.assert_array_equal(matrix_from_json(json.loads(json.dumps(matrix_to_json(m)))), m)


def test_subspace_json_round_trip():
    s = Subspace.span(np.array([[1, 0], [0, 1], [0, 0]], dtype=complex))
    back = subspace_from_json(subspace_to_json(s))
    np.testing.assert_array_equal(back.basis, s.basis)


def test_corpus_files_load():
    a0 = parse_matrix_file(data_path("nilpotent_2.json"))
    a = parse_matrix_file(data_path("nilpotent_2_split_1e-4.json"))
    np.testing.assert_array_equal(a0, [[0, 0], [1, 0]])
    np.testing.assert_array_equal(a - a0, [[0, 1e-4], [0, 0]])
    assert parse_matrix_file(data_path("jordan_4_3_2.json")).shape == (9, 9)


def _run(capsys, *args):
    code = main(list(args))
    return code, capsys.readouterr().out


def test_cli_gk_nine(capsys):
    code, out = _run(capsys, "gk", "--input", str(data_path("jordan_4_3_2.json")))
    assert code == 0
    got = json.loads(out)
    assert got["m"] == [4, 3, 2, 0, 0, 0, 0, 0, 0]
    assert got["k"] == [3, 3, 2, 1, 0, 0, 0, 0, 0]


def test_cli_schur_triangular(tmp_path, capsys):
    a = np.triu(np.arange(1, 10).reshape(3, 3)).astype(complex)
    p = _write(tmp_path, "a.json", matrix_to_json(a))
    code, out = _run(capsys, "schur", "--input", str(p))
    assert code == 0
    got = json.loads(out)
    np.testing.assert_array_equal(matrix_from_json(got["u"]), np.eye(3))
    assert got["residual"] <= 1e-12


def test_cli_backward_is_deterministic(tmp_path, capsys):
    args = ["backward", "--input", str(data_path("jordan_2_1.json")),
            "--decades", "1e-3,1e-5", "--trials", "10", "--seed", "7"]
    code1, out1 = _run(capsys, *args)
    code2, out2 = _run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    lines = out1.splitlines()
    assert lines[0] == "matrix_id,seed,epsilon,norm_diff,u_dist,t_dist,ratio"
    assert len(lines) == 21


def test_cli_backward_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["backward", "--input", str(data_path("diag_1_2_3.json")), "--decades", "1e-4",
                 "--trials", "2", "--format", "json", "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert len(rep["records"]) == 2 and rep["metadata"]["n"] == 3


def test_cli_eig_holder(capsys):
    code, out = _run(capsys, "eig-holder", "--input", str(data_path("nilpotent_2.json")),
                     "--input2", str(data_path("nilpotent_2_split_1e-4.json")))
    assert code == 0
    got = json.loads(out)
    assert got["matched_dist"] == pytest.approx(1e-2, rel=1e-10)
    assert got["ratio_1n"] == pytest.approx(1, rel=1e-10)


def test_cli_forward_demo_csv(capsys):
    code, out = _run(capsys, "forward-demo", "--input", str(data_path("jordan_2_1.json")),
                     "--decades", "1e-2,1e-6", "--format", "csv")
    assert code == 0
    rows = out.splitlines()[1:]
    assert len(rows) == 2
    for r in rows:
        assert float(r.split(",")[2]) == pytest.approx(math.sqrt(2), abs=1e-8)


def test_cli_gap(tmp_path, capsys):
    m = _write(tmp_path, "m.json", matrix_to_json(np.eye(3)[:, :1]))
    n = _write(tmp_path, "n.json", matrix_to_json(np.eye(3)[:, :2]))
    code, out = _run(capsys, "gap", "--input", str(m), "--input2", str(n))
    assert code == 0
    got = json.loads(out)
    assert got["gap"] == 1.0 and got["semigap_mn"] == 0.0 and got["semigap_nm"] == 1.0


@pytest.mark.parametrize("args", [
    ["schur"],
    ["gk", "--input", "missing.json"],
    ["backward", "--input", "x.json", "--decades", "1e-5,1e-3"],
    ["bogus"],
    ["gk", "--input", "x.json", "--format", "csv"],
])
def test_cli_input_errors_exit_1(args, capsys):
    try:
        code = main(args)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    assert code == 1


def test_cli_invariant_violation_exit_2(monkeypatch, capsys):
    import schurlab.cli as cli
    monkeypatch.setattr(cli, "SCHUR_TOL", -1.0)
    code, _ = _run(capsys, "schur", "--input", str(data_path("diag_1_2_3.json")))
    assert code == 2
