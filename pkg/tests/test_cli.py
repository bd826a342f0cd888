"""Batch CLI: exit codes, reports, transforms, rank, dot, fuzz."""

import json

import pytest

from vebflow import cli
from vebflow import command as cm
from vebflow import flowchart as fl
from vebflow import transducer as tr
from vebflow.space import ClopenSet, Space, parse_clopen
from vebflow.term import parse_term

SP2 = Space(2)


def cs(text):
    return parse_clopen(SP2, text)


TERM = parse_term('q"q0" ~> join(q"q1", q"q2")')
FC = fl.Flowchart(TERM, SP2, {(): cs("{1}"), (1,): (cs("{10}"), cs("{11}"))})
SIMPLE = cm.Command(TERM, SP2, {
    (): cm.ArrowSite(cs("{1}"), tr.identity_map(SP2)),
    (1,): cm.JoinSite(((cs("{10}"), tr.identity_map(SP2)),
                       (cs("{11}"), tr.identity_map(SP2)))),
})


def write_doc(tmp_path, name, doc):
    path = tmp_path / name
    text = doc if isinstance(doc, str) else json.dumps(doc, indent=2)
    path.write_text(text, encoding="utf-8")
    return str(path)


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def fc_path(tmp_path):
    return write_doc(tmp_path, "f.fc", fl.encode_flowchart(FC))


@pytest.fixture
def cmd_path(tmp_path):
    return write_doc(tmp_path, "c.cmd", cm.encode_command(SIMPLE))


@pytest.fixture
def drop_path(tmp_path):
    return write_doc(tmp_path, "d.tr", tr.encode_transducer(tr.drop_first(SP2)))


# -- check -------------------------------------------------------------------

def test_check_term_all_pass(capsys, tmp_path):
    path = write_doc(tmp_path, "t.term", 'q"a" ~> join(q"b")')
    code, out, _ = run(capsys, ["check", path])
    assert code == 0
    assert out == "well_formed: pass\nnormal: pass\nclosed: pass\n"


def test_check_term_veblen_on_join(capsys, tmp_path):
    path = write_doc(tmp_path, "t.term", 'veb[0](join(q"a", q"b"))')
    code, out, _ = run(capsys, ["check", path])
    assert code == 1
    assert "well_formed: fail" in out


def test_check_term_open(capsys, tmp_path):
    path = write_doc(tmp_path, "t.term", 'x"v"')
    code, out, _ = run(capsys, ["check", path])
    assert code == 1
    assert "closed: fail" in out
    assert "well_formed: pass" in out


def test_check_flowchart_all_pass(capsys, fc_path):
    code, out, _ = run(capsys, ["check", fc_path])
    assert code == 0
    assert out.splitlines() == [
        "well_formed: pass",
        "normal: pass",
        "levels: pass",
        "monotone: pass",
        "total: pass",
        "deterministic: pass",
    ]


def test_check_flowchart_totality_witness(capsys, tmp_path):
    f = fl.Flowchart(TERM, SP2, {(): cs("{1}"),
                                 (1,): (cs("{10}"), ClopenSet(SP2, ()))})
    path = write_doc(tmp_path, "f.fc", fl.encode_flowchart(f))
    code, out, _ = run(capsys, ["check", path])
    assert code == 1
    assert "total: fail witness " in out


def test_check_flowchart_determinism_witness(capsys, tmp_path):
    f = fl.Flowchart(TERM, SP2, {(): cs("{1}"),
                                 (1,): (cs("{1}"), cs("{11}"))})
    path = write_doc(tmp_path, "f.fc", fl.encode_flowchart(f))
    code, out, _ = run(capsys, ["check", path])
    assert code == 1
    assert "deterministic: fail witness " in out


def test_check_transducer(capsys, drop_path):
    code, out, _ = run(capsys, ["check", drop_path])
    assert code == 0
    assert out == "productive: pass (2 states)\n"


def test_check_command_not_strongly_total(capsys, cmd_path):
    code, out, _ = run(capsys, ["check", cmd_path])
    assert code == 1
    assert "strongly_total: fail" in out
    assert "total: pass" in out


def test_check_command_all_pass(capsys, tmp_path):
    st = cm.make_strongly_total(SIMPLE)
    path = write_doc(tmp_path, "st.cmd", cm.encode_command(st))
    code, out, _ = run(capsys, ["check", path])
    assert code == 0
    assert "strongly_total: pass" in out
    assert "simple: pass" in out


# -- eval --------------------------------------------------------------------

def test_eval_flowchart_values(capsys, fc_path):
    code, out, _ = run(capsys, ["eval", fc_path, "11(0)"])
    assert (code, out) == (0, "q2\n")
    code, out, _ = run(capsys, ["eval", fc_path, "(0)"])
    assert (code, out) == (0, "q0\n")
    code, out, _ = run(capsys, ["eval", fc_path, "10(01)"])
    assert (code, out) == (0, "q1\n")


def test_eval_command(capsys, cmd_path):
    code, out, _ = run(capsys, ["eval", cmd_path, "11(0)"])
    assert (code, out) == (0, "q2\n")


def test_eval_no_true_path(capsys, tmp_path):
    f = fl.Flowchart(TERM, SP2, {(): cs("{1}"),
                                 (1,): (cs("{10}"), ClopenSet(SP2, ()))})
    path = write_doc(tmp_path, "f.fc", fl.encode_flowchart(f))
    code, out, _ = run(capsys, ["eval", path, "11(0)"])
    assert (code, out) == (1, "no-true-path\n")


def test_eval_ambiguous(capsys, tmp_path):
    f = fl.Flowchart(TERM, SP2, {(): cs("{1}"),
                                 (1,): (cs("{1}"), cs("{1}"))})
    path = write_doc(tmp_path, "f.fc", fl.encode_flowchart(f))
    code, out, _ = run(capsys, ["eval", path, "1(0)"])
    assert (code, out) == (1, "ambiguous: q1, q2\n")


def test_eval_bad_point_literal(capsys, fc_path):
    code, _, err = run(capsys, ["eval", fc_path, "banana"])
    assert code == 2
    assert err.startswith("error:")


def test_eval_needs_runnable_document(capsys, tmp_path):
    path = write_doc(tmp_path, "t.term", 'q"a"')
    code, _, err = run(capsys, ["eval", path, "(0)"])
    assert code == 2
    assert "flowchart or command" in err


# -- transform ---------------------------------------------------------------

def test_transform_monotone_verify(capsys, tmp_path):
    f = fl.Flowchart(TERM, SP2, {(): cs("{1}"),
                                 (1,): (cs("{0}"), cs("{11}"))})
    path = write_doc(tmp_path, "f.fc", fl.encode_flowchart(f))
    code, out, err = run(capsys, ["transform", "monotone", path, "--verify"])
    assert code == 0
    assert "eval agreement: 64/64 points" in err
    result = fl.decode_flowchart(json.loads(out))
    assert fl.is_monotone(result)


def test_transform_out_file(capsys, tmp_path, fc_path):
    target = tmp_path / "out.fc"
    code, out, _ = run(capsys, ["transform", "reduce", fc_path,
                                "--out", str(target)])
    assert code == 0
    assert out == ""
    fl.decode_flowchart(json.loads(target.read_text(encoding="utf-8")))


def test_transform_reduce_verify(capsys, fc_path):
    code, _, err = run(capsys, ["transform", "reduce", fc_path, "--verify"])
    assert code == 0
    assert "eval agreement: 64/64 points" in err


def test_transform_pullback_verify(capsys, tmp_path, fc_path):
    extra = write_doc(tmp_path, "m.tr",
                      tr.encode_transducer(tr.letter_double(SP2)))
    code, out, err = run(capsys, ["transform", "pullback", fc_path, extra,
                                  "--verify"])
    assert code == 0
    assert "eval agreement: 64/64 points" in err
    fl.decode_flowchart(json.loads(out))


def test_transform_pullback_missing_extra(capsys, fc_path):
    code, _, err = run(capsys, ["transform", "pullback", fc_path])
    assert code == 2
    assert "transducer" in err


def test_transform_vaught_verify(capsys, tmp_path, drop_path):
    # fiber-constant input: value depends only on the dropped-letter tail
    f = fl.to_monotone(fl.pullback(FC, tr.drop_first(SP2)))
    path = write_doc(tmp_path, "fiber.fc", fl.encode_flowchart(f))
    code, out, err = run(capsys, ["transform", "vaught", path, drop_path,
                                  "--verify"])
    assert code == 0
    assert "eval agreement: 64/64 points" in err
    fl.decode_flowchart(json.loads(out))


def test_transform_vaught_not_monotone(capsys, tmp_path, drop_path):
    f = fl.Flowchart(TERM, SP2, {(): cs("{1}"),
                                 (1,): (cs("{0}"), cs("{11}"))})
    path = write_doc(tmp_path, "f.fc", fl.encode_flowchart(f))
    code, _, err = run(capsys, ["transform", "vaught", path, drop_path])
    assert code == 3
    assert err.startswith("unsupported:")


def test_transform_vaught_non_surjective(capsys, tmp_path, fc_path):
    # every output starts with 1, so the image misses half the space
    delta = tr.Transducer.build(
        SP2, SP2, 0,
        {(0, 0): (1, (1, 0)), (0, 1): (1, (1, 1)),
         (1, 0): (1, (0,)), (1, 1): (1, (1,))},
    )
    extra = write_doc(tmp_path, "m.tr", tr.encode_transducer(delta))
    code, _, err = run(capsys, ["transform", "vaught", fc_path, extra])
    assert code == 3
    assert "surjective" in err


def test_transform_strongly_total_verify(capsys, tmp_path, cmd_path):
    target = tmp_path / "st.cmd"
    code, _, err = run(capsys, ["transform", "strongly-total", cmd_path,
                                "--verify", "--out", str(target)])
    assert code == 0
    assert "eval agreement: 64/64 points" in err
    result = cm.decode_command(json.loads(target.read_text(encoding="utf-8")))
    assert cm.is_strongly_total(result)


def test_transform_strongly_total_rejects_veblen(capsys, tmp_path):
    c = cm.Command(parse_term('veb[0](q"a")'), SP2,
                   {(): cm.VeblenSite(tr.identity_map(SP2))})
    path = write_doc(tmp_path, "v.cmd", cm.encode_command(c))
    code, _, err = run(capsys, ["transform", "strongly-total", path])
    assert code == 3
    assert err.startswith("unsupported:")


def test_transform_translation_both_ways(capsys, tmp_path, fc_path, cmd_path):
    code, out, err = run(capsys, ["transform", "to-command", fc_path,
                                  "--verify"])
    assert code == 0
    assert "eval agreement: 64/64 points" in err
    cm.decode_command(json.loads(out))
    code, out, err = run(capsys, ["transform", "to-flowchart", cmd_path,
                                  "--verify"])
    assert code == 0
    assert "eval agreement: 64/64 points" in err
    fl.decode_flowchart(json.loads(out))


def test_transform_wrong_document_kind(capsys, fc_path, cmd_path):
    code, _, err = run(capsys, ["transform", "monotone", cmd_path])
    assert code == 2
    assert "flowchart" in err
    code, _, err = run(capsys, ["transform", "strongly-total", fc_path])
    assert code == 2
    assert "command" in err


def test_transform_monotone_rejects_non_normal(capsys, tmp_path):
    f = fl.Flowchart(parse_term('q"a" ~> q"b"'), SP2, {(): cs("{1}")})
    path = write_doc(tmp_path, "f.fc", fl.encode_flowchart(f))
    code, _, err = run(capsys, ["transform", "monotone", path])
    assert code == 3
    assert err.startswith("unsupported:")


def test_transform_verify_catches_mismatch(capsys, fc_path, monkeypatch):
    def broken(f):
        assign = dict(f.assign)
        assign[()] = f.at(()).complement()
        return fl.Flowchart(f.term, f.space, assign)

    monkeypatch.setattr(fl, "to_monotone", broken)
    code, _, err = run(capsys, ["transform", "monotone", fc_path, "--verify"])
    assert code == 1
    assert "first mismatch:" in err


# -- rank --------------------------------------------------------------------

def test_rank_single_constant(capsys, tmp_path):
    path = write_doc(tmp_path, "t.term", 'q"a"')
    code, out, _ = run(capsys, ["rank", path])
    assert (code, out) == (0, "e\t1\n")


def test_rank_nested_veblen(capsys, tmp_path):
    path = write_doc(tmp_path, "t.term", 'veb[1](veb[0](join(q"a")))')
    code, out, _ = run(capsys, ["rank", path])
    assert code == 0
    assert out == "e\t1\n0\tw\n0.0\tw + 1\n0.0.0\tw + 1\n"


def test_rank_veblen_omega_index(capsys, tmp_path):
    path = write_doc(tmp_path, "t.term", 'veb[w](q"a")')
    code, out, _ = run(capsys, ["rank", path])
    assert (code, out) == (0, "e\t1\n0\tw^(w)\n")


def test_rank_flowchart(capsys, fc_path):
    code, out, _ = run(capsys, ["rank", fc_path])
    assert code == 0
    assert out == "e\t1\n0\t1\n1\t1\n1.0\t1\n1.1\t1\n"


# -- dot ---------------------------------------------------------------------

def test_dot_is_deterministic(capsys, fc_path):
    code, first, _ = run(capsys, ["dot", fc_path])
    assert code == 0
    code, second, _ = run(capsys, ["dot", fc_path])
    assert first == second
    assert first.startswith("digraph term {")
    assert '"e" -> "1" [label="1"];' in first
    assert "S = {1}" in first


def test_dot_marks_empty_sets(capsys, tmp_path):
    f = fl.Flowchart(TERM, SP2, {(): cs("{1}"),
                                 (1,): (cs("{10}"), ClopenSet(SP2, ()))})
    path = write_doc(tmp_path, "f.fc", fl.encode_flowchart(f))
    code, out, _ = run(capsys, ["dot", path])
    assert code == 0
    assert "∅" in out


def test_dot_plain_term(capsys, tmp_path):
    path = write_doc(tmp_path, "t.term", 'q"a" ~> join(q"b")')
    code, out, _ = run(capsys, ["dot", path])
    assert code == 0
    assert "digraph term {" in out
    assert "rank 1" in out
    assert "S =" not in out  # no annotations without an assignment


# -- fuzz --------------------------------------------------------------------

def test_fuzz_clean_run(capsys):
    code, first, _ = run(capsys, ["--seed", "3", "fuzz", "--iters", "2"])
    assert code == 0
    lines = first.splitlines()
    assert len(lines) == 6
    assert all(line.endswith(": 2 cases, ok") for line in lines)
    code, second, _ = run(capsys, ["--seed", "3", "fuzz", "--iters", "2"])
    assert (code, second) == (0, first)


def test_fuzz_zero_iterations(capsys):
    code, out, _ = run(capsys, ["fuzz", "--iters", "0"])
    assert (code, out) == (0, "")


def test_fuzz_catches_broken_transform(capsys, monkeypatch):
    monkeypatch.setattr(fl, "to_monotone", lambda f: f)
    code, out, _ = run(capsys, ["--seed", "1", "fuzz", "--iters", "25"])
    assert code == 1
    assert "monotone: FAIL seed=" in out


# -- plumbing ----------------------------------------------------------------

def test_unknown_extension(capsys, tmp_path):
    path = write_doc(tmp_path, "x.json", "{}")
    code, _, err = run(capsys, ["check", path])
    assert code == 2
    assert "unknown document extension" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, ["check", str(tmp_path / "nope.term")])
    assert code == 2
    assert err.startswith("error:")


def test_invalid_json_document(capsys, tmp_path):
    path = write_doc(tmp_path, "x.fc", "not json at all")
    code, _, err = run(capsys, ["check", path])
    assert code == 2
    assert "not valid JSON" in err


def test_bad_grid_parameters(capsys, tmp_path):
    path = write_doc(tmp_path, "t.term", 'q"a"')
    code, _, err = run(capsys, ["--grid-prefix", "0", "check", path])
    assert code == 2
    assert "positive" in err


def test_usage_error_from_argparse(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["check"])  # missing path
    assert exc.value.code == 2
