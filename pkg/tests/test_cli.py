import json
import logging
import shutil
import subprocess
import sys

import pytest

from argconcept.cli import main
from argconcept.pipeline import read_header, read_lexicon

from .conftest import GOLDEN, TOY_CORPUS, TOY_OVERRIDES, TOY_POSITIVES, TOY_TAXONOMY

TAX = ["--taxonomy", str(TOY_TAXONOMY)]


def extract(tmp_path, *corpus):
    args = ["extract", *TAX, "-o", str(tmp_path)]
    for c in corpus:
        args += ["--corpus", str(c)]
    return main(args)


def test_extract_matches_golden(tmp_path):
    assert extract(tmp_path, TOY_CORPUS) == 0
    assert (tmp_path / "records.tsv").read_bytes() == (GOLDEN / "records.tsv").read_bytes()


def test_extract_empty_directory(tmp_path, caplog):
    empty = tmp_path / "corpus"
    empty.mkdir()
    with caplog.at_level(logging.WARNING):
        assert extract(tmp_path, empty) == 0
    assert "empty" in caplog.text
    lines = (tmp_path / "records.tsv").read_text().splitlines()
    assert all(l.startswith("#") for l in lines)


def test_extract_mixed_valid_and_corrupt(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    shutil.copy(TOY_CORPUS, corpus / "a.conllu")
    (corpus / "b.conllu").write_bytes(b"\xff\xfe\x00garbage")
    (corpus / "c.conllu").write_text("1\tbroken\n\n", encoding="utf-8")
    out = tmp_path / "out"
    assert extract(out, corpus) == 0
    assert "1 unreadable, 1 malformed" in capsys.readouterr().out
    body = [l for l in (out / "records.tsv").read_text().splitlines() if not l.startswith("#")]
    golden = [l for l in (GOLDEN / "records.tsv").read_text().splitlines() if not l.startswith("#")]
    assert body == golden


def test_extract_all_files_fail(tmp_path):
    bad = tmp_path / "bad.conllu"
    bad.write_bytes(b"\xff\xfe\xfa")
    assert extract(tmp_path / "out", bad) == 1


def test_weigh_matches_golden(tmp_path):
    assert main(["weigh", str(GOLDEN / "records.tsv"), "-o", str(tmp_path)]) == 0
    assert (tmp_path / "quality.tsv").read_bytes() == (GOLDEN / "quality.tsv").read_bytes()


def test_weigh_empty_and_single_verb(tmp_path):
    empty = tmp_path / "empty.tsv"
    empty.write_text("")
    assert main(["weigh", str(empty), "-o", str(tmp_path / "e")]) == 0
    rows = [l for l in (tmp_path / "e" / "quality.tsv").read_text().splitlines()
            if not l.startswith("#")]
    assert rows == []
    one = tmp_path / "one.tsv"
    one.write_text("".join(l for l in (GOLDEN / "records.tsv").open() if l.startswith("eat\t")))
    assert main(["weigh", str(one), "-o", str(tmp_path / "o")]) == 0
    rows = [l for l in (tmp_path / "o" / "quality.tsv").read_text().splitlines()
            if not l.startswith("#")]
    assert rows and all(r.startswith("eat\t") for r in rows)


def conceptualize(out, *extra):
    return main(["conceptualize", *TAX, str(GOLDEN / "quality.tsv"),
                 "--records", str(GOLDEN / "records.tsv"), "-o", str(out), *extra])


def test_conceptualize_matches_golden_and_is_repeatable(tmp_path):
    for mode in ("ac", "bl"):
        assert conceptualize(tmp_path, "-k", "2", "--mode", mode) == 0
        name = f"lexicon_{mode}_k2.jsonl"
        first = (tmp_path / name).read_bytes()
        assert first == (GOLDEN / name).read_bytes()
        assert conceptualize(tmp_path, "-k", "2", "--mode", mode, "--workers", "4") == 0
        assert (tmp_path / name).read_bytes() == first


def test_conceptualize_k_too_large_records_no_solution(tmp_path):
    assert conceptualize(tmp_path, "-k", "9") == 0
    _, lex, entries = read_lexicon(tmp_path / "lexicon_ac_k9.jsonl")
    assert entries and all(not e["solution"] for e in entries)
    assert all(e["concepts"] == [] and e["score"] is None for e in entries)


def test_conceptualize_relax_k(tmp_path):
    assert conceptualize(tmp_path, "-k", "2", "--relax-k") == 0
    _, lex, entries = read_lexicon(tmp_path / "lexicon_ac_k2.jsonl")
    assert all(e["solution"] for e in entries)
    relaxed = [e for e in entries if "k_used" in e]
    assert relaxed and all(e["k_used"] == len(e["concepts"]) == 1 for e in relaxed)


def test_conceptualize_per_verb_k(tmp_path):
    overrides = tmp_path / "k.tsv"
    overrides.write_text("eat\t1\n")
    assert conceptualize(tmp_path, "-k", "2", "--k-overrides", str(overrides)) == 0
    _, lex, entries = read_lexicon(tmp_path / "lexicon_ac_k2.jsonl")
    eat = [e for e in entries if e["verb"] == "eat"]
    assert all(e["k"] == 1 and len(e["concepts"]) == 1 for e in eat)
    assert all(e["k"] == 2 for e in entries if e["verb"] != "eat")


def test_conceptualize_bl_needs_records(tmp_path):
    code = main(["conceptualize", *TAX, str(GOLDEN / "quality.tsv"), "--mode", "bl",
                 "-o", str(tmp_path)])
    assert code == 2


def test_lexicon_header_provenance():
    header = read_header(GOLDEN / "lexicon_ac_k2.jsonl")
    assert header["config"]["tau"] == "1/5"
    assert header["config"]["k"] == 2
    assert len(header["config_hash"]) == 16
    rec_header = read_header(GOLDEN / "records.tsv")
    assert rec_header["step"] == "extract" and "config_hash" in rec_header


def write_pairs(path, rows):
    path.write_text("".join("\t".join(r) + "\n" for r in rows))
    return path


def test_identify_worked_swap(tmp_path):
    pairs = write_pairs(tmp_path / "pairs.tsv", [
        ("wear", "object", "piano", "negative", "p1"),
        ("play", "object", "clothing", "negative", "p2"),
        ("eat", "object", "corn", "positive", "p3"),
    ])
    assert main(["identify", *TAX, str(GOLDEN / "lexicon_ac_k2.jsonl"), str(pairs),
                 "-o", str(tmp_path)]) == 0
    rows = [l.split("\t") for l in (tmp_path / "predictions.tsv").read_text().splitlines()]
    assert [r[3] for r in rows] == ["negative", "negative", "positive"]
    assert rows[2][4] == "food"


def test_eval_perfect_lexicon(tmp_path):
    lex = tmp_path / "lex.jsonl"
    header = json.loads((GOLDEN / "lexicon_ac_k2.jsonl").read_text().splitlines()[0])
    entry = {"verb": "eat", "role": "object", "k": 1, "concepts": [{"concept": "food"}]}
    lex.write_text(json.dumps(header) + "\n" + json.dumps(entry) + "\n")
    pairs = write_pairs(tmp_path / "pairs.tsv", [("eat", "object", t, "positive", "")
                                                 for t in ("corn", "rice", "apple")])
    assert main(["eval", *TAX, str(lex), "--pairs", str(pairs), "-o", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "eval_report.json").read_text())
    assert report["ac_k2"]["accuracy"] == 1.0


def test_eval_swap_is_seed_deterministic(tmp_path):
    args = ["eval", *TAX, str(GOLDEN / "lexicon_ac_k2.jsonl"), "--positives", str(TOY_POSITIVES),
            "--overrides", str(TOY_OVERRIDES), "--seed", "1"]
    assert main(args + ["-o", str(tmp_path / "a")]) == 0
    assert main(args + ["-o", str(tmp_path / "b")]) == 0
    for name in ("eval_pairs.tsv", "eval_report.json", "eval_errors.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_eval_rejects_lexicon_from_other_taxonomy(tmp_path, caplog):
    other = tmp_path / "tax.tsv"
    other.write_text(TOY_TAXONOMY.read_text() + "tofu\tfood\n")
    pairs = write_pairs(tmp_path / "pairs.tsv", [("eat", "object", "corn", "positive", "")])
    code = main(["eval", "--taxonomy", str(other), str(GOLDEN / "lexicon_ac_k2.jsonl"),
                 "--pairs", str(pairs), "-o", str(tmp_path)])
    assert code == 2
    assert "taxonomy" in caplog.text


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"taxonomy_path": str(TOY_TAXONOMY), "k": [2], "tau": "0.2",
                               "output_dir": str(tmp_path / "x")}))
    assert main(["conceptualize", "--config", str(cfg), str(GOLDEN / "quality.tsv"),
                 "-o", str(tmp_path / "y")]) == 0
    assert (tmp_path / "y" / "lexicon_ac_k2.jsonl").read_bytes() == \
        (GOLDEN / "lexicon_ac_k2.jsonl").read_bytes()


@pytest.mark.parametrize("bad", [["--tau", "0"], ["--tau", "3/2"], ["-k", "0"]])
def test_config_errors_abort(tmp_path, bad):
    assert conceptualize(tmp_path, *bad) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"taxonomy_path": str(TOY_TAXONOMY), "bogus": 1}))
    assert main(["conceptualize", "--config", str(cfg), str(GOLDEN / "quality.tsv")]) == 2


def test_oracle_check_command(capsys):
    assert main(["oracle-check", "--instances", "200", "--seed", "3"]) == 0
    assert "200/200 instances agree" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "argconcept", "oracle-check", "--instances", "20"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert "20/20" in proc.stdout
