"""Concept graphs and maximum-weight k-clique search.

Vertices are kept sorted by descending weight (ties by ascending term id)
and adjacency is stored as one integer bitmask per vertex.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .weighting import concept_weights

BRUTEFORCE_MAX = 25
DEFAULT_TAU = Fraction(1, 5)


@dataclass(frozen=True)
class ConceptGraph:
    verb: str
    role: str
    concepts: tuple  # term ids, in vertex order
    weights: tuple
    adjacency: tuple  # bitmask per vertex
    tau: Fraction = DEFAULT_TAU
    covered: tuple = ()  # number of scored arguments under each concept

    def __len__(self):
        return len(self.concepts)

    def adjacent(self, i, j):
        return i != j and bool(self.adjacency[i] >> j & 1)

    def edges(self):
        n = len(self.concepts)
        return [(i, j) for i in range(n) for j in range(i + 1, n) if self.adjacent(i, j)]

    def is_clique(self, indices):
        return all(self.adjacent(i, j) for i, j in itertools.combinations(indices, 2))

    @classmethod
    def from_weights(cls, weights, edges, ids=None, verb="", role="",
                     tau=DEFAULT_TAU, covered=None):
        """Build a graph from unsorted vertices.

        ``edges`` are pairs of positions in ``weights``; ``ids`` default to
        ``range(len(weights))``.
        """
        n = len(weights)
        ids = list(range(n)) if ids is None else list(ids)
        covered = [0] * n if covered is None else list(covered)
        order = sorted(range(n), key=lambda p: (-weights[p], ids[p]))
        where = {p: i for i, p in enumerate(order)}
        adj = [0] * n
        for a, b in edges:
            if a == b:
                continue
            i, j = where[a], where[b]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls(verb, role, tuple(ids[p] for p in order),
                   tuple(weights[p] for p in order), tuple(adj), Fraction(tau),
                   tuple(covered[p] for p in order))


@dataclass
class Solution:
    chosen: tuple  # term ids, in vertex order
    indices: tuple
    score: float
    explored_nodes: int
    optimal: bool = True
    weights: tuple = field(default=(), repr=False)


def build_concept_graph(taxonomy, entries, verb, role, tau=DEFAULT_TAU, mode="ac",
                        candidate_cap=500, bl_types=False):
    """Concept graph for one (verb, role).

    ``entries`` maps argument -> QualityEntry for that verb and role.
    Candidates are the concepts covering at least one scored argument,
    optionally truncated to the ``candidate_cap`` heaviest. Two concepts
    are adjacent iff their overlap is strictly below ``tau``.
    """
    tau = Fraction(tau)
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    weights = concept_weights(taxonomy, entries, mode, bl_types)
    ranked = sorted(weights, key=lambda c: (-weights[c][0], c))
    if candidate_cap is not None:
        ranked = ranked[:candidate_cap]
    n = len(ranked)
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if taxonomy.overlap_below(ranked[i], ranked[j], tau):
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return ConceptGraph(verb, role, tuple(ranked),
                        tuple(weights[c][0] for c in ranked), tuple(adj), tau,
                        tuple(weights[c][1] for c in ranked))


def _score(weights, indices):
    s = 0.0 if not weights or isinstance(weights[0], float) else 0
    for i in indices:
        s = s + weights[i]
    return s


def _solution(graph, indices, explored, optimal=True):
    return Solution(tuple(graph.concepts[i] for i in indices), tuple(indices),
                    _score(graph.weights, indices), explored, optimal,
                    tuple(graph.weights[i] for i in indices))


class _BudgetExceeded(Exception):
    pass


def solve_bb(graph, k, node_budget=None, trace=None):
    """Maximum-weight k-clique by depth-first branch and bound.

    The binary include/exclude decision tree is walked with the exclusion
    chain flattened into a loop, so recursion depth is at most ``k``.
    At vertex ``j`` with ``ck`` concepts chosen and partial score ``pi``,
    the bound is ``pi`` plus the next ``k - ck`` weights in sorted order;
    the vertex is tried only if it is adjacent to every chosen vertex and
    the bound beats the incumbent. Because weights only decrease along the
    order, a failed bound also ends the loop. Subtrees with fewer than
    ``k - ck`` vertices left are skipped as infeasible.

    Among equal-score optima the lexicographically smallest index set
    wins (it is the first one reached). ``explored_nodes`` counts partial
    cliques expanded. Returns None when no k-clique exists.

    ``trace(chosen, j, bound)`` is called at every bound evaluation.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(graph.concepts)
    if k > n:
        return None
    w = graph.weights
    adj = graph.adjacency
    best_score = None
    best = None
    explored = 0
    chosen = []

    def bound(pi, j, need):
        b = pi
        for t in range(j, min(j + need, n)):
            b = b + w[t]
        return b

    def bb(i, mask, pi):
        nonlocal best_score, best, explored
        explored += 1
        if node_budget is not None and explored > node_budget:
            raise _BudgetExceeded
        if len(chosen) == k:
            if best_score is None or pi > best_score:
                best_score, best = pi, tuple(chosen)
            return
        need = k - len(chosen)
        for j in range(i, n - need + 1):
            b = bound(pi, j, need)
            if trace is not None:
                trace(tuple(chosen), j, b)
            if best_score is not None and not b > best_score:
                break
            if mask & ~adj[j]:
                continue
            chosen.append(j)
            bb(j + 1, mask | 1 << j, pi + w[j])
            chosen.pop()

    zero = 0.0 if n and isinstance(w[0], float) else 0
    optimal = True
    try:
        bb(0, 0, zero)
    except _BudgetExceeded:
        optimal = False
        explored = node_budget
    if best is None:
        return None
    return _solution(graph, best, explored, optimal)


def solve_bruteforce(graph, k):
    """Enumerate every k-subset; same tie rule as :func:`solve_bb`."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(graph.concepts)
    if n > BRUTEFORCE_MAX:
        raise ValueError(f"brute force refused: {n} concepts > {BRUTEFORCE_MAX}")
    best_score = None
    best = None
    explored = 0
    for combo in itertools.combinations(range(n), k):
        explored += 1
        if not graph.is_clique(combo):
            continue
        s = _score(graph.weights, combo)
        if best_score is None or s > best_score:
            best_score, best = s, combo
    if best is None:
        return None
    return _solution(graph, best, explored)


def unpruned_nodes(n, k):
    """Size of the unpruned search: all subsets of size <= k."""
    return sum(math.comb(n, i) for i in range(k + 1))


def random_graph(rng, n, density, weight_low=-5, weight_high=10, integer=True):
    """Random concept graph for oracle checks.

    Integer weights give plenty of exact ties.
    """
    if integer:
        weights = [rng.randint(weight_low, weight_high) for _ in range(n)]
    else:
        weights = [rng.uniform(weight_low, weight_high) for _ in range(n)]
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < density]
    return ConceptGraph.from_weights(weights, edges)


def oracle_check(rng, instances, max_n=15, densities=None):
    """Compare :func:`solve_bb` with :func:`solve_bruteforce` on random graphs.

    Returns a list of mismatch descriptions (empty when all agree).
    """
    densities = densities or [d / 10 for d in range(1, 11)]
    mismatches = []
    for t in range(instances):
        n = rng.randint(1, max_n)
        density = rng.choice(densities)
        g = random_graph(rng, n, density, integer=rng.random() < 0.7)
        k = rng.randint(1, n)
        a = solve_bb(g, k)
        b = solve_bruteforce(g, k)
        ka = None if a is None else (a.score, a.indices)
        kb = None if b is None else (b.score, b.indices)
        if ka != kb:
            mismatches.append(f"instance {t}: n={n} k={k} density={density} bb={ka} brute={kb}")
    return mismatches
