import random
from collections import Counter

import pytest

from argconcept.extraction import (
    ROLE_OF_DEPREL,
    ArgumentRecord,
    DepToken,
    ExtractionConfig,
    ExtractionStats,
    PatternKey,
    expand_phrase,
    extract_instances,
    format_record,
    merge_records,
    parse_record,
    read_arcs,
    read_conllu,
    subtree,
)

from .conftest import TOY_CORPUS, make_taxonomy

TAX = make_taxonomy([("corn", "food"), ("dog", "animal"), ("star wars", "film"),
                     ("ice cream", "food"), ("wars", "conflict")])


def sent(*rows):
    return [DepToken(i, *row) for i, row in enumerate(rows, 1)]


DOGS_EAT_CORN = sent(
    ("dogs", "dog", "NNS", 2, "nsubj"),
    ("eat", "eat", "VBP", 0, "root"),
    ("corn", "corn", "NN", 2, "dobj"),
)


def by_key(records):
    return {r.key: r for r in records}


def test_dogs_eat_corn():
    recs = by_key(extract_instances([DOGS_EAT_CORN], TAX))
    assert set(recs) == {("eat", "subject", "dog"), ("eat", "object", "corn")}
    corn = recs["eat", "object", "corn"]
    assert corn.count == 1
    # hand trace: corn has no children; its only sibling is "dogs"
    assert corn.patterns == Counter({PatternKey("sibling", "NN", "dobj", "NNS", "nsubj"): 1})
    dog = recs["eat", "subject", "dog"]
    assert dog.patterns == Counter({PatternKey("sibling", "NNS", "nsubj", "NN", "dobj"): 1})


def test_no_children_no_siblings():
    s = sent(("eat", "eat", "VB", 0, "root"), ("corn", "corn", "NN", 1, "dobj"))
    (rec,) = extract_instances([s], TAX)
    assert rec.key == ("eat", "object", "corn")
    assert rec.patterns == Counter()


def test_passive_subject_is_object():
    s = sent(("corn", "corn", "NN", 3, "nsubjpass"),
             ("is", "be", "VBZ", 3, "auxpass"),
             ("eaten", "eat", "VBN", 0, "root"))
    (rec,) = extract_instances([s], TAX)
    assert rec.key == ("eat", "object", "corn")


def test_agent_is_subject_and_child_patterns():
    s = sent(("corn", "corn", "NN", 3, "nsubjpass"),
             ("is", "be", "VBZ", 3, "auxpass"),
             ("eaten", "eat", "VBN", 0, "root"),
             ("by", "by", "IN", 5, "case"),
             ("dogs", "dog", "NNS", 3, "agent"))
    recs = by_key(extract_instances([s], TAX))
    dog = recs["eat", "subject", "dog"]
    assert PatternKey("child", "NNS", "agent", "IN", "case") in dog.patterns
    assert sum(dog.patterns.values()) == 3  # one child, two siblings


def test_non_verbal_head_ignored():
    s = sent(("dogs", "dog", "NNS", 2, "nsubj"), ("food", "food", "NN", 0, "root"))
    assert extract_instances([s], TAX) == []


def test_ud_labels_via_aliases():
    s = sent(("dogs", "dog", "NOUN", 2, "nsubj"),
             ("eat", "eat", "VERB", 0, "root"),
             ("corn", "corn", "NOUN", 2, "obj"))
    recs = by_key(extract_instances([s], TAX))
    assert ("eat", "object", "corn") in recs
    pats = recs["eat", "object", "corn"].patterns
    assert PatternKey("sibling", "NOUN", "dobj", "NOUN", "nsubj") in pats


def test_role_matches_trigger_deprel():
    sentences = list(read_conllu(TOY_CORPUS.read_text(encoding="utf-8").splitlines()))
    for s in sentences:
        for rec in extract_instances([s], TAX):
            deps = {k.dep_arg for k in rec.patterns}
            assert all(ROLE_OF_DEPREL[d] == rec.role for d in deps)


def test_no_pattern_references_argument_itself():
    s = DOGS_EAT_CORN
    for rec in extract_instances([s], TAX):
        for key in rec.patterns:
            assert key.kind in ("child", "sibling")
            assert all(key)


def test_malformed_sentences_are_skipped_and_counted():
    bad_head = sent(("eat", "eat", "VB", 0, "root"), ("corn", "corn", "NN", 7, "dobj"))
    self_head = sent(("eat", "eat", "VB", 1, "root"))
    stats = ExtractionStats()
    recs = extract_instances([bad_head, DOGS_EAT_CORN, self_head, []], TAX, stats=stats)
    assert stats.malformed == 3
    assert stats.sentences == 4
    assert len(recs) == 2


def test_order_independence():
    sentences = list(read_conllu(TOY_CORPUS.read_text(encoding="utf-8").splitlines()))
    base = extract_instances(sentences, TAX)
    for seed in range(3):
        shuffled = sentences[:]
        random.Random(seed).shuffle(shuffled)
        assert extract_instances(shuffled, TAX) == base


def test_merge_is_commutative():
    sentences = list(read_conllu(TOY_CORPUS.read_text(encoding="utf-8").splitlines()))
    a = extract_instances(sentences[:90], TAX)
    b = extract_instances(sentences[90:], TAX)
    whole = extract_instances(sentences, TAX)
    assert merge_records(a, b) == merge_records(b, a) == whole


class TestExpandPhrase:
    WATCH = sent(("watch", "watch", "VB", 0, "root"),
                 ("star", "star", "NNP", 3, "compound"),
                 ("wars", "war", "NNPS", 1, "dobj"))

    def test_multiword_term(self):
        assert expand_phrase(self.WATCH, 3, TAX, 4) == "star wars"

    def test_window_one_falls_back_to_lemma(self):
        assert expand_phrase(self.WATCH, 3, TAX, 1) == "war"

    def test_single_word_term_gives_lemma(self):
        s = sent(("eat", "eat", "VB", 0, "root"), ("dogs", "dog", "NNS", 1, "dobj"))
        assert expand_phrase(s, 2, TAX, 4) == "dog"

    def test_nothing_matches(self):
        s = sent(("eat", "eat", "VB", 0, "root"), ("the", "the", "DT", 3, "det"),
                 ("stones", "stone", "NNS", 1, "dobj"))
        assert expand_phrase(s, 3, TAX, 4) == "stone"

    def test_lemma_variant(self):
        s = sent(("eat", "eat", "VB", 0, "root"), ("ice", "ice", "NN", 3, "compound"),
                 ("creams", "cream", "NNS", 1, "dobj"))
        assert expand_phrase(s, 3, TAX, 4) == "ice cream"

    def test_span_outside_subtree_rejected(self):
        # "star" is a sibling, not a child, of "wars": span leaves the subtree
        s = sent(("star", "star", "NN", 3, "nsubj"),
                 ("wars", "war", "NNS", 3, "dobj"),
                 ("watch", "watch", "VB", 0, "root"))
        assert expand_phrase(s, 2, TAX, 4) == "war"

    def test_output_is_term_or_lemma(self):
        sentences = list(read_conllu(TOY_CORPUS.read_text(encoding="utf-8").splitlines()))
        for s in sentences:
            for tok in s:
                out = expand_phrase(s, tok.index, TAX, 4)
                assert out in TAX or out == tok.lemma
                if out != tok.lemma:
                    inside = subtree(s, tok.index)
                    forms = [t.form.lower() for t in s if t.index in inside]
                    assert all(w in forms or w == tok.lemma for w in out.split())


def test_read_conllu_skips_ranges_comments_and_bad_blocks():
    text = (
        "# sent_id = 1\n"
        "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tdo\tdo\tAUX\tVBP\t_\t0\troot\t_\t_\n"
        "2\tn't\tnot\tPART\tRB\t_\t1\tneg\t_\t_\n"
        "\n"
        "1\tbroken line\n"
        "\n"
        "1\tx\t_\tNOUN\t_\t_\t0\troot\t_\t_\n"
    )
    stats = ExtractionStats()
    sents = list(read_conllu(text.splitlines(), stats))
    assert [len(s) for s in sents] == [2, 1]
    assert stats.malformed == 1
    # missing lemma falls back to lowercased form, missing XPOS to UPOS
    assert sents[1][0].lemma == "x" and sents[1][0].pos == "NOUN"


def test_read_arcs():
    lines = [
        "eat/VB\tcorn/NN/dobj,dogs/NNS/nsubj,./././punct\t5",
        "eat/VB\tcorn/NN/dobj\t2",
        "eaten/VBN\tcorn/NN/nsubj:pass\t1",
        "table/NN\tcorn/NN/dobj\t9",
        "garbage line",
    ]
    stats = ExtractionStats()
    recs = by_key(read_arcs(lines, stats=stats))
    assert stats.malformed == 1
    corn = recs["eat", "object", "corn"]
    assert corn.count == 7
    assert corn.patterns == Counter({
        PatternKey("sibling", "NN", "dobj", "NNS", "nsubj"): 5,
        PatternKey("sibling", "NN", "dobj", ".", "punct"): 5,
    })
    assert recs["eaten", "object", "corn"].count == 1
    assert ("table", "object", "corn") not in recs


def test_record_line_roundtrip():
    rec = ArgumentRecord("eat", "object", "star wars", 3, Counter({
        PatternKey("sibling", "NN", "dobj", ":", "punct"): 2,
        PatternKey("child", "NN", "dobj", "DT", "det"): 1,
    }))
    line = format_record(rec)
    assert line == "eat\tobject\tstar wars\t3\tchild|NN|dobj|DT|det:1;sibling|NN|dobj|:|punct:2"
    assert parse_record(line) == rec
    empty = ArgumentRecord("eat", "object", "corn", 1)
    assert parse_record(format_record(empty)) == empty


def test_parse_record_rejects_bad_role():
    with pytest.raises(ValueError):
        parse_record("eat\tindirect\tcorn\t1\t")


def test_config_verb_tags():
    cfg = ExtractionConfig(verb_prefixes=(), verb_tags=("V",))
    assert cfg.is_verb("V") and not cfg.is_verb("VBZ")
