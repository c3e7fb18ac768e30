"""Argument identification: swap negatives, isA judging, accuracy."""

import random
from collections import defaultdict
from dataclasses import dataclass, replace

from .extraction import ROLES
from .taxonomy import normalize

POSITIVE = "positive"
NEGATIVE = "negative"
LABELS = (POSITIVE, NEGATIVE)


@dataclass(frozen=True)
class EvalPair:
    verb: str
    role: str
    term: str
    label: str = POSITIVE
    source_id: str = ""


@dataclass(frozen=True)
class Prediction:
    label: str
    concept: str = None
    reason: str = ""


def generate_swaps(pairs, seed, fraction=0.5):
    """Turn a share of positive pairs into negatives by exchanging terms.

    ``floor(fraction * n)`` pairs are drawn with a seeded RNG and matched
    two by two within each role; each matched couple must differ in verb
    and in term, and exchanges its terms. Selected pairs left without a
    partner stay positive.
    """
    pairs = [p if isinstance(p, EvalPair) else EvalPair(*p) for p in pairs]
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    if len({p.verb for p in pairs}) < 2:
        raise ValueError("cannot swap within a single verb")
    rng = random.Random(seed)
    n_swap = int(fraction * len(pairs))
    selected = sorted(rng.sample(range(len(pairs)), n_swap))
    by_role = defaultdict(list)
    for i in selected:
        by_role[pairs[i].role].append(i)
    out = [replace(p, label=POSITIVE) for p in pairs]
    for role in sorted(by_role):
        pool = by_role[role]
        rng.shuffle(pool)
        while pool:
            a = pool.pop(0)
            for pos, b in enumerate(pool):
                if pairs[a].verb != pairs[b].verb and pairs[a].term != pairs[b].term:
                    pool.pop(pos)
                    out[a] = replace(pairs[a], term=pairs[b].term, label=NEGATIVE)
                    out[b] = replace(pairs[b], term=pairs[a].term, label=NEGATIVE)
                    break
    return out


def apply_overrides(pairs, overrides):
    """Relabel pairs from ``{(verb, role, term): label}``."""
    return [replace(p, label=overrides.get((p.verb, p.role, p.term), p.label)) for p in pairs]


def identify(lexicon, taxonomy, pair):
    """Positive iff the term isA one of the verb's concepts for that role.

    ``lexicon`` maps ``(verb, role)`` to concept surfaces in weight order.
    """
    concepts = lexicon.get((pair.verb, pair.role))
    if not concepts:
        return Prediction(NEGATIVE, None, "verb not in lexicon")
    term = normalize(pair.term)
    if term not in taxonomy:
        return Prediction(NEGATIVE, None, "term not in taxonomy")
    for c in concepts:
        if taxonomy.isa(term, c):
            return Prediction(POSITIVE, c, f"isA {c}")
    return Prediction(NEGATIVE, None, "no matching concept")


def score(predictions, gold, mode=None):
    """Accuracy overall and per role.

    ``predictions`` are labels or :class:`Prediction` objects aligned with
    ``gold`` (a list of :class:`EvalPair`).
    """
    if len(predictions) != len(gold):
        raise ValueError(f"length mismatch: {len(predictions)} predictions, {len(gold)} gold")
    if not gold:
        raise ValueError("nothing to score")
    total = defaultdict(int)
    correct = defaultdict(int)
    errors = []
    for pred, g in zip(predictions, gold):
        label = getattr(pred, "label", pred)
        ok = label == g.label
        for key in ("all", g.role):
            total[key] += 1
            correct[key] += ok
        if not ok:
            errors.append({"verb": g.verb, "role": g.role, "term": g.term,
                           "gold": g.label, "predicted": label,
                           "source_id": g.source_id})
    report = {
        "mode": mode,
        "total": total["all"],
        "correct": correct["all"],
        "accuracy": correct["all"] / total["all"],
        "by_role": {
            r: {"total": total[r], "correct": correct[r],
                "accuracy": correct[r] / total[r]}
            for r in ROLES if total[r]
        },
        "errors": errors,
    }
    return report


def read_pairs(lines):
    out = []
    for line in lines:
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.rstrip("\r\n").split("\t")
        if len(cols) == 3:
            cols += [POSITIVE, ""]
        elif len(cols) == 4:
            cols.append("")
        verb, role, term, label, source_id = cols
        if role not in ROLES or label not in LABELS:
            raise ValueError(f"bad eval pair line: {line!r}")
        out.append(EvalPair(normalize(verb), role, normalize(term), label, source_id))
    return out


def write_pairs(fh, pairs):
    for p in pairs:
        fh.write(f"{p.verb}\t{p.role}\t{p.term}\t{p.label}\t{p.source_id}\n")


def read_overrides(lines):
    out = {}
    for line in lines:
        if not line.strip() or line.startswith("#"):
            continue
        verb, role, term, label = line.rstrip("\r\n").split("\t")
        if label not in LABELS:
            raise ValueError(f"bad override label {label!r}")
        out[normalize(verb), role, normalize(term)] = label
    return out
