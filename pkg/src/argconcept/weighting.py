"""Argument quality (pattern entropy x binary MI) and concept weights."""

import math
from collections import Counter, defaultdict
from dataclasses import dataclass

MARGINAL_SCOPES = ("role", "corpus")
WEIGHT_MODES = ("ac", "bl")


def pattern_entropy(patterns):
    """Shannon entropy in bits of a pattern multiset.

    ``patterns`` is a mapping pattern -> count or an object with a
    ``patterns`` attribute (an :class:`ArgumentRecord`).
    """
    patterns = getattr(patterns, "patterns", patterns)
    counts = [n for n in patterns.values() if n > 0]
    total = sum(counts)
    if len(counts) <= 1:
        return 0.0
    h = -math.fsum(n / total * math.log2(n / total) for n in counts)
    return h if h > 0 else 0.0


@dataclass
class CorpusStats:
    pair_count: dict
    verb_marginal: dict
    arg_marginal: dict
    grand_total: dict
    scope: str = "role"

    @classmethod
    def from_records(cls, records, scope="role"):
        if scope not in MARGINAL_SCOPES:
            raise ValueError(f"unknown marginal scope {scope!r}")
        pair = Counter()
        verb = Counter()
        arg = Counter()
        total = Counter()
        for r in records:
            if r.count <= 0:
                continue
            pair[r.verb, r.role, r.arg] += r.count
            verb[r.verb, r.role] += r.count
            arg[r.role, r.arg] += r.count
            total[r.role] += r.count
        return cls(dict(pair), dict(verb), dict(arg), dict(total), scope)

    def marginals(self, verb, role, arg):
        """Return integer counts ``(n_ve, n_v, n_e, n)`` for the MI test."""
        n_ve = self.pair_count[verb, role, arg]
        if self.scope == "role":
            return (n_ve, self.verb_marginal[verb, role],
                    self.arg_marginal[role, arg], self.grand_total[role])
        n_v = sum(self.verb_marginal.get((verb, r), 0) for r in self.grand_total)
        n_e = sum(self.arg_marginal.get((r, arg), 0) for r in self.grand_total)
        return n_ve, n_v, n_e, sum(self.grand_total.values())


def binary_mi(stats, verb, role, arg):
    """+1 if the verb and argument co-occur more than chance, else -1.

    ``p(v,e) > p(v) p(e)`` is decided on integer counts, so exact
    independence gives -1.
    """
    try:
        n_ve, n_v, n_e, n = stats.marginals(verb, role, arg)
    except KeyError:
        raise KeyError(f"pair not in corpus: {(verb, role, arg)!r}") from None
    return 1 if n_ve * n > n_v * n_e else -1


def quality(entropy, mi):
    if entropy < 0:
        raise ValueError("entropy must be non-negative")
    return entropy * mi + 0.0


@dataclass(frozen=True)
class QualityEntry:
    entropy: float
    mi: int
    quality: float
    count: int = 0


class QualityTable(dict):
    """Map ``(verb, role, arg)`` -> :class:`QualityEntry`."""

    def args_for(self, verb, role):
        return sorted(a for (v, r, a) in self if v == verb and r == role)

    def verb_roles(self):
        return sorted({(v, r) for (v, r, _) in self})

    def by_verb_role(self):
        out = defaultdict(dict)
        for (v, r, a), entry in self.items():
            out[v, r][a] = entry
        return out


def compute_quality(records, min_count=2, scope="role"):
    """Score every record with ``count >= min_count``.

    Corpus statistics are built from the retained records only.
    """
    kept = [r for r in records if r.count >= min_count]
    stats = CorpusStats.from_records(kept, scope)
    table = QualityTable()
    for r in kept:
        h = pattern_entropy(r.patterns)
        mi = binary_mi(stats, r.verb, r.role, r.arg)
        table[r.key] = QualityEntry(h, mi, quality(h, mi), r.count)
    return table


def _arg_value(entry, mode, bl_types):
    if mode == "ac":
        return entry.quality
    return 1 if bl_types else entry.count


def concept_weight(taxonomy, table, verb, role, concept, mode="ac", bl_types=False):
    """Sum of argument values over scored arguments covered by ``concept``.

    ``ac`` sums qualities; ``bl`` sums occurrence counts (or distinct
    arguments with ``bl_types``).
    """
    if mode not in WEIGHT_MODES:
        raise ValueError(f"unknown weight mode {mode!r}")
    cid = concept if isinstance(concept, int) else taxonomy.resolve(concept)
    return math.fsum(
        _arg_value(e, mode, bl_types)
        for (v, r, a), e in table.items()
        if v == verb and r == role and taxonomy.isa(a, cid)
    )


def concept_weights(taxonomy, entries, mode="ac", bl_types=False):
    """Weights of every concept covering at least one argument.

    ``entries`` maps argument string -> :class:`QualityEntry` for a single
    (verb, role). Returns ``{concept_id: (weight, n_covered_args)}``.
    """
    if mode not in WEIGHT_MODES:
        raise ValueError(f"unknown weight mode {mode!r}")
    values = defaultdict(list)
    for arg in sorted(entries):
        for c in taxonomy.concepts_of(arg):
            values[c].append(_arg_value(entries[arg], mode, bl_types))
    return {c: (math.fsum(vs), len(vs)) for c, vs in values.items()}


def format_quality_table(table):
    rows = sorted(table.items(), key=lambda kv: (kv[0][0], kv[0][1], -kv[1].quality, kv[0][2]))
    for (v, r, a), e in rows:
        yield f"{v}\t{r}\t{a}\t{e.entropy:.6f}\t{e.mi:+d}\t{e.quality:.6f}"


def write_quality_table(fh, table, header=()):
    for h in header:
        fh.write(f"# {h}\n")
    for line in format_quality_table(table):
        fh.write(line + "\n")


def read_quality_table(lines, counts=None):
    """Parse a dumped table; ``counts`` optionally supplies record counts."""
    table = QualityTable()
    for line in lines:
        if not line.strip() or line.startswith("#"):
            continue
        v, r, a, h, mi, q = line.rstrip("\r\n").split("\t")
        key = (v, r, a)
        table[key] = QualityEntry(float(h), int(mi), float(q),
                                  (counts or {}).get(key, 0))
    return table
