"""Subject/object extraction from dependency trees.

Two corpus shapes are supported: CoNLL-U treebanks and pre-aggregated
syntactic-n-gram style arc lines. Both end up as aggregated
:class:`ArgumentRecord` objects keyed by ``(verb, role, arg)``.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

from .taxonomy import normalize

logger = logging.getLogger(__name__)

SUBJECT = "subject"
OBJECT = "object"
ROLES = (SUBJECT, OBJECT)

ROLE_OF_DEPREL = {
    "nsubj": SUBJECT,
    "agent": SUBJECT,
    "dobj": OBJECT,
    "nsubjpass": OBJECT,
}

DEFAULT_ALIASES = {
    "obj": "dobj",
    "nsubj:pass": "nsubjpass",
    "obl:agent": "agent",
}


class DepToken(NamedTuple):
    index: int
    form: str
    lemma: str
    pos: str
    head: int
    deprel: str


class PatternKey(NamedTuple):
    kind: str  # "child" or "sibling"
    pos_arg: str
    dep_arg: str
    pos_other: str
    dep_other: str

    def __str__(self):
        return "|".join(self)

    @classmethod
    def parse(cls, text):
        parts = text.split("|")
        if len(parts) != 5 or parts[0] not in ("child", "sibling"):
            raise ValueError(f"bad pattern key {text!r}")
        return cls(*parts)


@dataclass
class ArgumentRecord:
    verb: str
    role: str
    arg: str
    count: int = 0
    patterns: Counter = field(default_factory=Counter)

    @property
    def key(self):
        return (self.verb, self.role, self.arg)


@dataclass
class ExtractionConfig:
    aliases: dict = field(default_factory=lambda: dict(DEFAULT_ALIASES))
    # head POS counts as verbal if it starts with one of these prefixes
    # or equals one of ``verb_tags``
    verb_prefixes: tuple = ("VB",)
    verb_tags: tuple = ("VERB",)
    max_window: int = 4

    def canonical(self, deprel):
        return self.aliases.get(deprel, deprel)

    def is_verb(self, pos):
        return pos in self.verb_tags or pos.startswith(self.verb_prefixes)


@dataclass
class ExtractionStats:
    sentences: int = 0
    malformed: int = 0
    instances: int = 0
    warnings: list = field(default_factory=list)

    def warn(self, msg):
        self.malformed += 1
        self.warnings.append(msg)
        logger.warning(msg)


class MalformedSentence(ValueError):
    pass


def check_sentence(tokens):
    """Raise :class:`MalformedSentence` if ``tokens`` is not a usable tree."""
    n = len(tokens)
    if n == 0:
        raise MalformedSentence("empty sentence")
    for pos, tok in enumerate(tokens, 1):
        if tok.index != pos:
            raise MalformedSentence(f"token index {tok.index} at position {pos}")
        if not 0 <= tok.head <= n or tok.head == tok.index:
            raise MalformedSentence(f"bad head {tok.head} for token {tok.index}")
    roots = sum(1 for t in tokens if t.head == 0)
    if roots != 1:
        logger.debug("sentence has %d roots", roots)


def read_conllu(lines, stats=None, source="<input>"):
    """Yield sentences (lists of :class:`DepToken`) from CoNLL-U lines.

    Multiword-token ranges and empty nodes are dropped. Sentences with an
    unparsable token line are skipped and counted in ``stats``.
    """
    tokens = []
    bad = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if tokens or bad:
                if bad:
                    if stats is not None:
                        stats.warn(bad)
                else:
                    yield tokens
            tokens, bad = [], None
            continue
        if line.startswith("#") or bad:
            continue
        cols = line.split("\t")
        if len(cols) < 8:
            bad = f"{source}:{lineno}: expected 10 columns, got {len(cols)}"
            continue
        if "-" in cols[0] or "." in cols[0]:
            continue
        try:
            idx, head = int(cols[0]), int(cols[6])
        except ValueError:
            bad = f"{source}:{lineno}: non-integer id/head"
            continue
        form = cols[1]
        lemma = cols[2] if cols[2] not in ("", "_") else form
        pos = cols[4] if cols[4] != "_" else cols[3]
        tokens.append(DepToken(idx, form, lemma.lower(), pos, head, cols[7]))
    if bad:
        if stats is not None:
            stats.warn(bad)
    elif tokens:
        yield tokens


def _children(tokens):
    kids = {t.index: [] for t in tokens}
    kids[0] = []
    for t in tokens:
        kids[t.head].append(t.index)
    return kids


def subtree(tokens, root):
    """Indices of the subtree rooted at ``root`` (cycle-safe)."""
    kids = _children(tokens)
    seen = {root}
    stack = [root]
    while stack:
        for k in kids[stack.pop()]:
            if k not in seen:
                seen.add(k)
                stack.append(k)
    return seen


def expand_phrase(tokens, arg_index, taxonomy, max_window=4):
    """Expand an argument word to the longest taxonomy term around it.

    Only contiguous multi-token spans inside the argument's subtree are
    considered; the argument lemma is returned when none of them is a
    taxonomy term. Each span is tried with surface forms and then with
    the argument word lemmatized ("ice creams" -> "ice cream").
    """
    arg = tokens[arg_index - 1]
    inside = subtree(tokens, arg_index)
    n = len(tokens)
    for length in range(min(max_window, n), 1, -1):
        for start in range(max(1, arg_index - length + 1),
                           min(arg_index, n - length + 1) + 1):
            span = range(start, start + length)
            if not all(i in inside for i in span):
                continue
            forms = [tokens[i - 1].form for i in span]
            phrase = normalize(" ".join(forms))
            if phrase in taxonomy:
                return phrase
            forms[arg_index - start] = arg.lemma
            phrase = normalize(" ".join(forms))
            if phrase in taxonomy:
                return phrase
    return normalize(arg.lemma)


def sentence_instances(tokens, taxonomy, config):
    """Yield ``(verb, role, arg, patterns)`` for one well-formed sentence."""
    by_index = {t.index: t for t in tokens}
    kids = _children(tokens)
    for tok in tokens:
        dep = config.canonical(tok.deprel)
        role = ROLE_OF_DEPREL.get(dep)
        if role is None or tok.head == 0:
            continue
        head = by_index[tok.head]
        if not config.is_verb(head.pos):
            continue
        patterns = []
        for c in kids[tok.index]:
            other = by_index[c]
            patterns.append(PatternKey("child", tok.pos, dep, other.pos,
                                       config.canonical(other.deprel)))
        for s in kids[tok.head]:
            if s == tok.index:
                continue
            other = by_index[s]
            patterns.append(PatternKey("sibling", tok.pos, dep, other.pos,
                                       config.canonical(other.deprel)))
        arg = expand_phrase(tokens, tok.index, taxonomy, config.max_window)
        yield normalize(head.lemma), role, arg, patterns


def aggregate(instances):
    """Merge ``(verb, role, arg, patterns, count)`` tuples into records."""
    records = {}
    for verb, role, arg, patterns, count in instances:
        key = (verb, role, arg)
        rec = records.get(key)
        if rec is None:
            rec = records[key] = ArgumentRecord(verb, role, arg)
        rec.count += count
        for p in patterns:
            rec.patterns[p] += count
    return sorted(records.values(), key=lambda r: r.key)


def merge_records(*groups):
    """Commutative merge of record lists; result sorted by key."""
    out = {}
    for g in groups:
        for r in g:
            acc = out.get(r.key)
            if acc is None:
                acc = out[r.key] = ArgumentRecord(r.verb, r.role, r.arg)
            acc.count += r.count
            acc.patterns.update(r.patterns)
    return sorted(out.values(), key=lambda r: r.key)


def extract_instances(sentences, taxonomy, config=None, stats=None):
    """Extract and aggregate argument records from parsed sentences.

    Malformed sentences are skipped and counted in ``stats``.
    """
    config = config or ExtractionConfig()
    stats = stats if stats is not None else ExtractionStats()

    def gen():
        for tokens in sentences:
            stats.sentences += 1
            try:
                check_sentence(tokens)
            except MalformedSentence as exc:
                stats.warn(f"sentence {stats.sentences}: {exc}")
                continue
            for verb, role, arg, patterns in sentence_instances(tokens, taxonomy, config):
                stats.instances += 1
                yield verb, role, arg, patterns, 1

    return aggregate(gen())


def _split_word(item, nparts):
    parts = item.rsplit("/", nparts - 1)
    if len(parts) != nparts or not all(parts):
        raise ValueError(f"bad arc item {item!r}")
    return parts


def read_arcs(lines, config=None, stats=None, source="<input>"):
    """Aggregate records from ``verb/pos<TAB>arg/pos/dep[,sib/pos/dep...]<TAB>count`` lines.

    Arc lines carry no children of the argument, so only sibling
    patterns are emitted; each pattern is weighted by the line count.
    """
    config = config or ExtractionConfig()
    stats = stats if stats is not None else ExtractionStats()

    def gen():
        for lineno, raw in enumerate(lines, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            stats.sentences += 1
            try:
                head_col, arg_col, count_col = line.split("\t")
                head_word, head_pos = _split_word(head_col, 2)
                items = [_split_word(x, 3) for x in arg_col.split(",")]
                count = int(count_col)
                if count < 1:
                    raise ValueError("count must be positive")
            except ValueError as exc:
                stats.warn(f"{source}:{lineno}: {exc}")
                continue
            arg_word, arg_pos, arg_dep = items[0]
            dep = config.canonical(arg_dep)
            role = ROLE_OF_DEPREL.get(dep)
            if role is None or not config.is_verb(head_pos):
                continue
            patterns = [
                PatternKey("sibling", arg_pos, dep, pos, config.canonical(d))
                for _, pos, d in items[1:]
            ]
            stats.instances += count
            yield normalize(head_word), role, normalize(arg_word), patterns, count

    return aggregate(gen())


def format_record(rec):
    pats = ";".join(f"{p}:{n}" for p, n in sorted(rec.patterns.items()))
    return f"{rec.verb}\t{rec.role}\t{rec.arg}\t{rec.count}\t{pats}"


def parse_record(line):
    verb, role, arg, count, pats = line.rstrip("\r\n").split("\t")
    if role not in ROLES:
        raise ValueError(f"bad role {role!r}")
    rec = ArgumentRecord(verb, role, arg, int(count))
    if pats:
        for item in pats.split(";"):
            key, n = item.rsplit(":", 1)
            rec.patterns[PatternKey.parse(key)] += int(n)
    return rec


def write_records(fh, records, header=()):
    for h in header:
        fh.write(f"# {h}\n")
    for rec in sorted(records, key=lambda r: r.key):
        fh.write(format_record(rec) + "\n")


def read_records(lines):
    return [parse_record(l) for l in lines if l.strip() and not l.startswith("#")]
