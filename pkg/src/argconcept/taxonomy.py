"""isA taxonomy loading, coverage sets and concept overlap."""

import hashlib
import logging
import os
import pickle
from collections import defaultdict
from fractions import Fraction

import networkx as nx

logger = logging.getLogger(__name__)

COVERAGE_MODES = ("direct", "transitive")
CACHE_FORMAT_VERSION = 1


class TaxonomyError(ValueError):
    pass


class UnknownTermError(KeyError):
    pass


def normalize(text):
    """Lowercase, trim and collapse internal whitespace."""
    return " ".join(text.lower().split())


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Taxonomy:
    """Immutable isA graph with interned terms.

    Edges are ``(entity, concept)`` id pairs. ``coverage_mode`` decides
    whether a concept covers only its direct isA children or every term
    that reaches it through a chain of isA edges.
    """

    def __init__(self, surfaces, edges, counts=None, coverage_mode="direct",
                 source_hash=None):
        if coverage_mode not in COVERAGE_MODES:
            raise ValueError(f"unknown coverage mode {coverage_mode!r}")
        self._surfaces = list(surfaces)
        self._ids = {s: i for i, s in enumerate(self._surfaces)}
        if len(self._ids) != len(self._surfaces):
            raise TaxonomyError("duplicate surface forms")
        n = len(self._surfaces)
        for e, c in edges:
            if not (0 <= e < n and 0 <= c < n):
                raise TaxonomyError(f"edge ({e}, {c}) references unknown term")
            if e == c:
                raise TaxonomyError(f"self-loop on {self._surfaces[e]!r}")
        self.edges = frozenset(edges)
        self.counts = dict(counts or {})
        self.coverage_mode = coverage_mode
        self.source_hash = source_hash
        self.cycles = []
        if coverage_mode == "direct":
            cov = defaultdict(set)
            for e, c in self.edges:
                cov[c].add(e)
        else:
            cov = self._transitive_coverage()
        self._coverage = {c: frozenset(es) for c, es in cov.items() if es}
        parents = defaultdict(set)
        for c, es in self._coverage.items():
            for e in es:
                parents[e].add(c)
        self._concepts_of = {e: frozenset(cs) for e, cs in parents.items()}

    def _transitive_coverage(self):
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self._surfaces)))
        g.add_edges_from(self.edges)
        dag = nx.condensation(g)
        members = nx.get_node_attributes(dag, "members")
        self.cycles = sorted(
            sorted(self._surfaces[t] for t in m)
            for m in members.values() if len(m) > 1
        )
        if self.cycles:
            logger.warning("isA cycles found (%d components): %s",
                           len(self.cycles), self.cycles)
        # reach[s] = every term with a path into component s
        reach = {}
        for s in nx.topological_sort(dag):
            acc = set(members[s]) if len(members[s]) > 1 else set()
            for p in dag.predecessors(s):
                acc |= reach[p]
                acc |= members[p]
            reach[s] = acc
        mapping = dag.graph["mapping"]
        return {t: reach[mapping[t]] - {t} for t in range(len(self._surfaces))}

    def __len__(self):
        return len(self._surfaces)

    def __contains__(self, surface):
        return normalize(surface) in self._ids

    @property
    def terms(self):
        return range(len(self._surfaces))

    @property
    def concepts(self):
        """Ids of terms with nonempty coverage, ascending."""
        return sorted(self._coverage)

    def id_of(self, surface):
        """Return the id of ``surface`` or None when it is not a term."""
        return self._ids.get(normalize(surface))

    def surface(self, tid):
        return self._surfaces[tid]

    def resolve(self, term):
        if isinstance(term, str):
            tid = self.id_of(term)
            if tid is None:
                raise UnknownTermError(term)
            return tid
        if not 0 <= term < len(self._surfaces):
            raise UnknownTermError(term)
        return term

    def covered_entities(self, concept):
        return self._coverage.get(self.resolve(concept), frozenset())

    def concepts_of(self, entity):
        """Concepts whose coverage contains ``entity``; empty when unknown."""
        tid = self.id_of(entity) if isinstance(entity, str) else entity
        if tid is None:
            return frozenset()
        return self._concepts_of.get(tid, frozenset())

    def overlap_ratio(self, c1, c2):
        """Return ``(|E1 & E2|, min(|E1|, |E2|))`` as integers."""
        e1 = self.covered_entities(c1)
        e2 = self.covered_entities(c2)
        if len(e1) > len(e2):
            e1, e2 = e2, e1
        return len(e1 & e2), len(e1)

    def overlap(self, c1, c2):
        num, den = self.overlap_ratio(c1, c2)
        if den == 0:
            return Fraction(0)
        return Fraction(num, den)

    def overlap_below(self, c1, c2, tau):
        """Exact test of ``overlap(c1, c2) < tau``."""
        tau = Fraction(tau)
        num, den = self.overlap_ratio(c1, c2)
        if den == 0:
            return 0 < tau
        return num * tau.denominator < tau.numerator * den

    def isa(self, entity, concept):
        e = self.id_of(entity) if isinstance(entity, str) else entity
        c = self.id_of(concept) if isinstance(concept, str) else concept
        if e is None or c is None:
            return False
        return e in self._coverage.get(c, ())

    def __getstate__(self):
        return {
            "surfaces": self._surfaces,
            "edges": sorted(self.edges),
            "counts": self.counts,
            "coverage_mode": self.coverage_mode,
            "source_hash": self.source_hash,
        }

    def __setstate__(self, state):
        self.__init__(state["surfaces"], state["edges"], state["counts"],
                      state["coverage_mode"], state["source_hash"])


def parse_taxonomy_lines(lines, strict=False, source="<input>"):
    """Parse ``entity<TAB>concept[<TAB>count]`` lines.

    Returns ``(surfaces, edges, counts)`` with ids assigned in order of
    first appearance.
    """
    surfaces = []
    ids = {}
    edges = set()
    counts = {}

    def intern(s):
        tid = ids.get(s)
        if tid is None:
            tid = ids[s] = len(surfaces)
            surfaces.append(s)
        return tid

    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) not in (2, 3):
            raise TaxonomyError(
                f"{source}:{lineno}: expected 2 or 3 tab-separated columns, "
                f"got {len(cols)}")
        entity, concept = normalize(cols[0]), normalize(cols[1])
        if not entity or not concept:
            raise TaxonomyError(f"{source}:{lineno}: empty term")
        count = None
        if len(cols) == 3:
            try:
                count = int(cols[2])
            except ValueError:
                count = -1
            if count < 0:
                raise TaxonomyError(
                    f"{source}:{lineno}: count must be a non-negative integer")
        if entity == concept:
            if strict:
                raise TaxonomyError(f"{source}:{lineno}: self-loop {entity!r}")
            logger.warning("%s:%d: skipping self-loop %r", source, lineno, entity)
            continue
        edge = (intern(entity), intern(concept))
        edges.add(edge)
        if count is not None:
            counts[edge] = counts.get(edge, 0) + count
    if not edges:
        raise TaxonomyError("empty taxonomy")
    return surfaces, edges, counts


def load_taxonomy(path, coverage_mode="direct", strict=False, cache_path=None):
    """Load a taxonomy TSV file.

    When ``cache_path`` is given, a pickled index is reused if its format
    version, source hash and coverage mode match, and rewritten otherwise.
    """
    digest = file_sha256(path)
    key = (CACHE_FORMAT_VERSION, digest, coverage_mode)
    if cache_path and os.path.exists(cache_path):
        try:
            with open(cache_path, "rb") as fh:
                header = pickle.load(fh)
                if header == key:
                    return pickle.load(fh)
            logger.info("taxonomy cache %s is stale, rebuilding", cache_path)
        except (pickle.UnpicklingError, EOFError, AttributeError):
            logger.warning("unreadable taxonomy cache %s, rebuilding", cache_path)
    with open(path, encoding="utf-8") as fh:
        surfaces, edges, counts = parse_taxonomy_lines(fh, strict=strict,
                                                       source=str(path))
    tax = Taxonomy(surfaces, edges, counts, coverage_mode, source_hash=digest)
    if cache_path:
        tmp = f"{cache_path}.tmp"
        with open(tmp, "wb") as fh:
            pickle.dump(key, fh)
            pickle.dump(tax, fh)
        os.replace(tmp, cache_path)
    return tax
