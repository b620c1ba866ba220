import io
import json
import subprocess
import sys

import pytest

from grl.cli import CORPUS_COLUMNS, corpus_run, dispatch
from grl.exactalg import F2
from grl.fds import ConcreteFds
from grl.groups import Presentation
from grl.handles import HomotopyLedger
from grl.verdict import DISCLAIMER, Verdict, replay


def run(*argv):
    return dispatch([str(a) for a in argv])


def write(path, obj):
    path.write_text(json.dumps(obj))
    return path


# --- documented examples -----------------------------------------------------------


def test_gamma_of_polynomial_profile():
    assert run("fds", "gamma", "--profile", "poly:3") == (0, "3")


def test_verdict_np_icosahedral(corpus_dir):
    code, text = run("verdict", "np", corpus_dir / "05_icosahedral.json", "--n", 8)
    assert code == 1 and text.startswith("Infinite")


def test_freeprod_of_three_copies(corpus_dir, tmp_path):
    src = corpus_dir / "05_icosahedral.json"
    out = tmp_path / "p3.json"
    code, _ = run("group", "freeprod", src, src, src, "--out", out)
    p3 = Presentation.load(out)
    k = Presentation.load(src).generators
    assert code == 0 and p3.generators == 3 * k == 6


# --- grammar and input errors ----------------------------------------------------------


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["group", "frobnicate", "x.json"],
    ["fds", "filtration"],
    ["group", "h1", "/no/such/file.json"],
    ["group", "conjcount", "lamplighter:2"],
    ["handle", "framing"],
])
def test_input_errors_exit_3_with_error_object(argv):
    code, text = dispatch(argv)
    err = json.loads(text)
    assert code == 3 and err["exit_code"] == 3 and set(err) == {"error", "message", "exit_code"}


def test_malformed_presentation_is_input_error(tmp_path):
    bad = write(tmp_path / "bad.json", {"generators": 1, "relators": [[5]]})
    assert run("group", "h1", bad)[0] == 3
    (tmp_path / "broken.json").write_text("{not json")
    assert run("verdict", "np", tmp_path / "broken.json")[0] == 3


def test_h1_nonzero_presentation_rejected_by_model(tmp_path):
    f = write(tmp_path / "z2.json", Presentation.parse(1, ["aa"]).to_json())
    assert run("handle", "model", f)[0] == 3


def test_stdin_dash(monkeypatch, corpus_dir):
    monkeypatch.setattr(sys, "stdin", io.StringIO((corpus_dir / "02_a.json").read_text()))
    assert run("group", "h1", "-") == (0, "0")


# --- verbs --------------------------------------------------------------------------


def test_group_verbs(corpus_dir):
    ico = corpus_dir / "05_icosahedral.json"
    assert run("group", "tc", ico) == (0, "order 120")
    assert run("group", "quotient", ico)[0] == 1
    assert run("group", "trivial", ico)[0] == 1
    assert run("group", "trivial", corpus_dir / "02_a.json")[0] == 0
    assert run("group", "conjcount", "free:2", "--x-max", 3) == (0, "1 5 13 25")
    assert run("group", "conjrate", "freeabelian:2") == (0, "2")


def test_group_budget_exhaustion_exits_2(corpus_dir):
    assert run("group", "tc", corpus_dir / "05_icosahedral.json", "--max-cosets", 10)[0] == 2


def test_fds_bigger_verb(tmp_path):
    big = write(tmp_path / "v.json", ConcreteFds.constant(F2, [1, 2, 3], 5).to_json())
    small = write(tmp_path / "w.json", ConcreteFds.constant(F2, [1, 2, 3], 1).to_json())
    zero = write(tmp_path / "z.json", ConcreteFds.constant(F2, [1, 2, 3], 0).to_json())
    assert run("fds", "bigger", big, small)[0] == 0
    assert run("fds", "bigger", zero, small)[0] == 1


def test_fds_randomized_verbs_are_seeded():
    a = run("fds", "les", "--trials", 5, "--seed", 4, "--json")
    assert a == run("fds", "les", "--trials", 5, "--seed", 4, "--json")
    assert a[0] == 0 and json.loads(a[1])["result"]["failures"] == []
    code, text = run("fds", "splitbound", "--trials", 20, "--shape", "b", "--json")
    assert code == 0 and json.loads(text)["result"]["violations"] == []


def test_fds_sum_and_tensor_profiles():
    assert run("fds", "tensor", "poly:2", "poly:3") == (0, "5")
    assert run("fds", "sum", "poly:2", "poly:3") == (0, "3")


def test_handle_pipeline_files(corpus_dir, tmp_path):
    ico = corpus_dir / "05_icosahedral.json"
    code, _ = run("handle", "np", ico, "--out", tmp_path / "np.json")
    assert code == 0
    ledger = HomotopyLedger.load(tmp_path / "np.json")
    assert ledger.is_acyclic() and ledger.pi1.generators == 6
    assert run("handle", "verify", tmp_path / "np.json") == (0, "Certified")
    assert run("handle", "n2", ico, "--out", tmp_path / "n2.json") == (0, "half_dim 6; H_0 = Z, H_6 = Z")
    assert HomotopyLedger.load(tmp_path / "n2.json").sphere_degree() == 6
    assert run("handle", "n4", ico)[1] == "half_dim 8; H_0 = Z"
    code, text = run("handle", "sum", tmp_path / "n2.json", tmp_path / "n2.json")
    assert (code, text) == (0, "half_dim 6; H_0 = Z, H_6 = Z^2")
    assert run("handle", "framing", "--sphere-dim", 1, "--rank", 4) == (0, "Z/2")
    assert run("handle", "framing", "--sphere-dim", 1, "--rank", 2) == (0, "Unsupported")


def test_verdict_verbs(corpus_dir, tmp_path):
    empty, ico = corpus_dir / "01_empty.json", corpus_dir / "05_icosahedral.json"
    code, text = run("verdict", "distinguish", empty, ico)
    assert code == 0 and text.startswith("Distinguished")
    assert run("verdict", "distinguish", empty, corpus_dir / "02_a.json")[0] == 1
    assert run("verdict", "cn", ico) == (0, "NotStandardCn")
    code, text = run("verdict", "np", ico, "--json")
    v = Verdict.from_json(json.loads(text)["result"])
    assert replay(v)
    vf = write(tmp_path / "v.json", v.to_json())
    assert run("verdict", "cn", vf) == (0, "NotStandardCn")


def test_unknown_verdict_exits_2(corpus_dir):
    code, text = run("verdict", "np", corpus_dir / "04_bs_pair.json", "--max-cosets", 2, "--max-degree", 4)
    assert code == 2 and text.startswith("Unknown")


# --- reports ------------------------------------------------------------------------


def test_json_report_shape(corpus_dir):
    code, text = run("verdict", "np", corpus_dir / "01_empty.json", "--json")
    report = json.loads(text)
    assert code == report["exit_code"] == 0
    assert report["disclaimer"] == DISCLAIMER
    assert report["provenance"]["budgets"] == {"max_cosets": 100000, "max_degree": 5, "x_max": 40}
    assert report["provenance"]["rule_status"] == "ConditionalOnPaper"
    assert "timing_seconds" not in report
    assert "timing_seconds" in json.loads(run("verdict", "np", corpus_dir / "01_empty.json", "--json", "--timing")[1])


@pytest.mark.parametrize("argv", [
    ["corpus", "{corpus}"],
    ["verdict", "np", "{corpus}/05_icosahedral.json"],
    ["fds", "splitbound", "--trials", "10", "--seed", "9"],
    ["group", "conjcount", "freeproduct:cyclic:2,cyclic:3", "--x-max", "8"],
])
def test_reports_are_byte_identical(argv, corpus_dir):
    argv = [a.format(corpus=corpus_dir) for a in argv] + ["--json"]
    assert dispatch(argv) == dispatch(argv)


def test_json_values_reread_equal(corpus_dir, tmp_path):
    code, text = run("handle", "np", corpus_dir / "05_icosahedral.json", "--json")
    ledger_json = json.loads(text)["result"]["ledger"]
    ledger = HomotopyLedger.from_json(ledger_json)
    assert ledger.to_json() == ledger_json
    code, text = run("group", "freeprod", corpus_dir / "02_a.json", corpus_dir / "03_ab.json", "--json")
    p = json.loads(text)["result"]
    assert Presentation.from_json(p).to_json() == p


def test_field_flag_and_environment(monkeypatch):
    monkeypatch.setenv("GRL_FIELD", "q")
    assert json.loads(run("fds", "gamma", "--profile", "zero", "--json")[1])["provenance"]["field"] == "q"
    assert json.loads(run("fds", "gamma", "--profile", "zero", "--json", "--field", "f2")[1])["provenance"]["field"] == "f2"


# --- corpus --------------------------------------------------------------------------


def test_corpus_rows(corpus_dir):
    rows = corpus_run(corpus_dir)
    assert [r["file"] for r in rows] == sorted(r["file"] for r in rows)
    assert [r["conclusion"] for r in rows] == ["Finite"] * 4 + ["Infinite"]
    assert all(r["replay"] is True and r["cn"] == "NotStandardCn" for r in rows)
    assert all(list(r) == list(CORPUS_COLUMNS) for r in rows)


def test_corpus_two_trivial_files(tmp_path, corpus_dir):
    for name in ("01_empty.json", "02_a.json"):
        (tmp_path / name).write_text((corpus_dir / name).read_text())
    assert [r["conclusion"] for r in corpus_run(tmp_path)] == ["Finite", "Finite"]


def test_empty_corpus(tmp_path):
    code, text = run("corpus", tmp_path)
    assert code == 0 and text.splitlines() == ["\t".join(CORPUS_COLUMNS)]
    assert json.loads(run("corpus", tmp_path, "--json")[1])["result"]["rows"] == []


def test_corpus_skips_malformed_files(tmp_path, corpus_dir):
    (tmp_path / "00_broken.json").write_text("[1, 2")
    write(tmp_path / "01_z2.json", Presentation.parse(1, ["aa"]).to_json())
    (tmp_path / "02_a.json").write_text((corpus_dir / "02_a.json").read_text())
    rows = corpus_run(tmp_path)
    assert [bool(r["error"]) for r in rows] == [True, True, False]
    assert rows[2]["conclusion"] == "Finite"
    assert run("corpus", tmp_path)[0] == 0


def test_corpus_parallel_matches_serial(corpus_dir):
    assert corpus_run(corpus_dir, jobs=2) == corpus_run(corpus_dir)


def test_console_entry_point(corpus_dir):
    out = subprocess.run([sys.executable, "-m", "grl", "fds", "gamma", "--profile", "exp:2"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "inf"
