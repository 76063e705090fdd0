import json
from fractions import Fraction

import pytest

from pidstar import InputError, generate_fixture
from pidstar.cli import EXIT_INPUT, EXIT_OK, EXIT_RESOURCE, decompose_command, main
from pidstar.io import channel_to_document, dumps, joint_to_document, load, load_channel, parse_document


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else dumps(doc))
    return path


def fixture_file(tmp_path, name):
    return write(tmp_path, f"{name}.json", joint_to_document(generate_fixture(name)))


def bsc_doc(eps, out="B"):
    e = Fraction(eps)
    rows = [
        {"outcomes": [i, o], "p": str(1 - e if i == o else e)} for i in ("0", "1") for o in ("0", "1")
    ]
    return {"kind": "channel", "variables": {"Z": ["0", "1"], out: ["0", "1"]}, "pmf": rows}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def measure(report, name):
    return next(m for m in report["measures"] if m["name"] == name)


class TestLoad:
    def test_and_fixture(self, tmp_path):
        j = load(fixture_file(tmp_path, "and"))
        assert tuple(j.names) == ("Y", "X1", "X2") and len(list(j.support())) == 4

    def test_thirds(self, tmp_path):
        doc = {
            "variables": {"Y": ["a", "b", "c"], "X1": ["0"]},
            "pmf": [{"outcomes": [y, "0"], "p": "1/3"} for y in "abc"],
        }
        j = load(write(tmp_path, "t.json", doc))
        assert sum(j.pmf.flat) == 1 and j.pmf[0, 0] == Fraction(1, 3)

    def test_deficit(self, tmp_path):
        doc = {"variables": {"Y": ["0", "1"], "X1": ["0"]}, "pmf": [{"outcomes": ["0", "0"], "p": "0.9999"}]}
        with pytest.raises(InputError, match="deficit 1/10000"):
            load(write(tmp_path, "d.json", doc))

    def test_duplicate_tuple(self):
        doc = {
            "variables": {"Y": ["0"], "X1": ["0"]},
            "pmf": [{"outcomes": ["0", "0"], "p": "1/2"}, {"outcomes": ["0", "0"], "p": "1/2"}],
        }
        with pytest.raises(InputError, match="duplicate"):
            parse_document(doc)

    def test_parse_error_reports_position(self, tmp_path):
        with pytest.raises(InputError, match="line 2"):
            load(write(tmp_path, "bad.json", '{\n  "variables": ,\n}'))

    def test_field_errors_name_the_field(self):
        doc = {"variables": {"Y": ["0"], "X1": ["0"]}, "pmf": [{"outcomes": ["0", "0"], "p": "x"}]}
        with pytest.raises(InputError, match=r"pmf\[0\]\.p"):
            parse_document(doc)
        doc["pmf"][0] = {"outcomes": ["0", "9"], "p": "1"}
        with pytest.raises(InputError, match="outcomes"):
            parse_document(doc)

    def test_pruning_is_reported(self, tmp_path):
        doc = {
            "variables": {"Y": ["0", "1", "2"], "X1": ["0", "1"]},
            "pmf": [{"outcomes": ["0", "0"], "p": "1/2"}, {"outcomes": ["1", "1"], "p": "1/2"}],
        }
        j, pruned = load(write(tmp_path, "p.json", doc), return_pruned=True)
        assert pruned == {"Y": ["2"]} and j.target.labels == ("0", "1")

    def test_channel_roundtrip(self, tmp_path):
        ch = load_channel(write(tmp_path, "c.json", bsc_doc("1/10")))
        assert ch.matrix[1, 0] == Fraction(1, 10)
        assert channel_to_document(ch) == bsc_doc("1/10")


class TestFixtures:
    def test_and_rows(self):
        doc = joint_to_document(generate_fixture("and"))
        assert [r["p"] for r in doc["pmf"]] == ["1/4"] * 4
        assert all(r["outcomes"][0] == str(int(r["outcomes"][1] == r["outcomes"][2] == "1")) for r in doc["pmf"])

    def test_overlap_rows(self):
        doc = joint_to_document(generate_fixture("overlap"))
        assert len(doc["pmf"]) == 16 and {r["p"] for r in doc["pmf"]} == {"1/16"}

    def test_unq_rows(self):
        doc = joint_to_document(generate_fixture("unq(0.1)"))
        rows = {tuple(r["outcomes"]): r["p"] for r in doc["pmf"]}
        assert rows == {
            ("0", "0", "0"): "9/20",
            ("0", "0", "1"): "1/20",
            ("1", "1", "0"): "1/20",
            ("1", "1", "1"): "9/20",
        }

    def test_unknown_name(self):
        with pytest.raises(InputError):
            generate_fixture("nand")

    def test_byte_identical(self, tmp_path, capsys):
        outs = []
        for k in range(2):
            path = tmp_path / f"f{k}.json"
            assert run(capsys, "fixture", "lemma1", "-o", path)[0] == EXIT_OK
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]
        assert run(capsys, "fixture", "lemma1")[1].encode() == outs[0]

    def test_epsilon_flag(self, capsys):
        _, out = run(capsys, "fixture", "unq", "--epsilon", "1/4")
        assert "3/8" in out


class TestDecompose:
    def test_and_report(self, tmp_path, capsys):
        code, out = run(capsys, "decompose", fixture_file(tmp_path, "and"))
        assert code == EXIT_OK
        rep = json.loads(out)
        assert measure(rep, "redundancy")["value_bits"] == pytest.approx(0.311, abs=1e-3)
        assert measure(rep, "synergy")["value_bits"] == pytest.approx(0.5, abs=1e-3)
        assert all(abs(v) < 1e-3 for v in measure(rep, "unique")["value_bits"].values())
        assert [m["name"] for m in rep["measures"]] == sorted(m["name"] for m in rep["measures"])
        assert rep["config"]["q_card_used"] == 3

    def test_xor_report(self, tmp_path):
        rep, code = decompose_command(fixture_file(tmp_path, "xor"))
        assert code == EXIT_OK
        assert measure(rep, "redundancy")["value_bits"] == pytest.approx(0.0, abs=1e-9)
        assert measure(rep, "union")["value_bits"] == pytest.approx(0.0, abs=1e-6)
        assert measure(rep, "synergy")["value_bits"] == pytest.approx(1.0, abs=1e-6)

    def test_overlap_redundancy_only(self, tmp_path, capsys):
        code, out = run(capsys, "decompose", fixture_file(tmp_path, "overlap"), "--measures", "redundancy")
        rep = json.loads(out)
        assert code == EXIT_OK and [m["name"] for m in rep["measures"]] == ["redundancy"]
        assert rep["measures"][0]["value_bits"] == pytest.approx(1.0, abs=1e-9)

    def test_multisource_errors_are_inline(self, tmp_path):
        rep, code = decompose_command(fixture_file(tmp_path, "and3"), measures="redundancy,broja")
        assert code == EXIT_INPUT
        assert measure(rep, "broja")["error"]["type"] == "InputError"
        assert measure(rep, "redundancy")["value_bits"] == pytest.approx(0.138, abs=1e-3)

    def test_gh_flag_echo(self, tmp_path):
        path = fixture_file(tmp_path, "and")
        rep, _ = decompose_command(path, measures="gh")
        assert rep["config"]["gh_cardinality_heuristic"] is True
        rep, _ = decompose_command(path, measures="gh", q_card=2)
        assert rep["config"]["gh_cardinality_heuristic"] is False
        assert measure(rep, "gh")["value_bits"] == pytest.approx(0.123, abs=1e-3)

    def test_vertex_cap_exit_code(self, tmp_path, capsys):
        code, out = run(capsys, "decompose", fixture_file(tmp_path, "and"), "--vertex-cap", 1, "--measures", "redundancy")
        assert code == EXIT_RESOURCE
        err = json.loads(out)["measures"][0]["error"]
        assert err["type"] == "ResourceError"

    def test_env_cap(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PID_VERTEX_CAP", "1")
        rep, code = decompose_command(fixture_file(tmp_path, "and"), measures="redundancy")
        assert code == EXIT_RESOURCE and rep["config"]["vertex_cap"] == 1
        # the flag wins over the environment
        rep, code = decompose_command(fixture_file(tmp_path, "and"), measures="redundancy", vertex_cap=100)
        assert code == EXIT_OK

    def test_non_convergence_exit_code(self, tmp_path, capsys, monkeypatch):
        import pidstar.cli as cli
        from pidstar import union_star

        monkeypatch.setattr(cli, "union_star", lambda j, t, m: union_star(j, t, 0, warm_start=False))
        code, _ = run(capsys, "decompose", fixture_file(tmp_path, "and"), "--measures", "union")
        assert code == 3

    def test_missing_file(self, tmp_path, capsys):
        code, _ = run(capsys, "decompose", tmp_path / "nope.json")
        assert code == EXIT_INPUT

    def test_table_format(self, tmp_path, capsys):
        code, out = run(capsys, "decompose", fixture_file(tmp_path, "sum"), "--format", "table")
        lines = out.splitlines()
        assert code == EXIT_OK and lines[0].startswith("input:")
        assert lines[1].split() == ["measure", "bits", "notes"]
        red = next(l for l in lines if l.startswith("redundancy"))
        assert "0.500000" in red

    def test_report_roundtrip(self, tmp_path):
        rep, _ = decompose_command(fixture_file(tmp_path, "and"))
        text = dumps(rep)
        assert dumps(json.loads(text)) == text


class TestBlackwellCommand:
    def test_bsc_witness(self, tmp_path, capsys):
        a = write(tmp_path, "a.json", bsc_doc("1/4", "A"))
        b = write(tmp_path, "b.json", bsc_doc("1/10"))
        code, out = run(capsys, "blackwell", a, b)
        rep = json.loads(out)
        assert code == EXIT_OK and rep["a_is_garbling_of_b"] is True
        ps = {tuple(r["outcomes"]): r["p"] for r in rep["witness"]["pmf"]}
        assert ps[("0", "1")] == "3/16" and ps[("1", "0")] == "3/16"

    def test_converse_and_table(self, tmp_path, capsys):
        a = write(tmp_path, "a.json", bsc_doc("1/4", "A"))
        b = write(tmp_path, "b.json", bsc_doc("1/10"))
        code, out = run(capsys, "blackwell", b, a, "--format", "table")
        assert code == EXIT_OK and out.rstrip().endswith("no")

    def test_equal_channels(self, tmp_path, capsys):
        a = write(tmp_path, "a.json", bsc_doc("1/3"))
        code, out = run(capsys, "blackwell", a, a)
        assert json.loads(out)["a_is_garbling_of_b"] is True

    def test_alphabet_mismatch(self, tmp_path, capsys):
        doc = bsc_doc("1/4")
        doc["variables"] = {"W": ["0", "1"], "B": ["0", "1"]}
        other = {"kind": "channel", "variables": {"W": ["0", "1", "2"], "A": ["0"]},
                 "pmf": [{"outcomes": [w, "0"], "p": "1"} for w in "012"]}
        code, _ = run(capsys, "blackwell", write(tmp_path, "o.json", other), write(tmp_path, "b.json", doc))
        assert code == EXIT_INPUT
