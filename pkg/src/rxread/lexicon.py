"""Prediction optimiser: fuzzy lookup, basket mining and candidate re-ranking.

A raw recognizer string is matched against the medicine database by edit
distance (through a BK-tree), and candidates are then re-ranked with
association rules mined from historical prescriptions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .corpus import MedicineDb, fold
from .errors import EmptyTransactionDb, NoCandidate

__all__ = [
    "levenshtein",
    "name_distance",
    "BKTree",
    "Candidate",
    "AssociationRule",
    "OptimizerConfig",
    "build_index",
    "fuzzy_search",
    "apriori",
    "mine_rules",
    "most_common",
    "optimize_prediction",
    "write_rules",
    "read_rules",
]


def levenshtein(a, b):
    """Codepoint edit distance (insert, delete, substitute; all cost 1).

    Uses the bit-parallel formulation of Myers and Hyyro, with one bit per
    codepoint of the longer string.
    """
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    m = len(a)
    if not b:
        return m
    peq = {}
    for i, ch in enumerate(a):
        peq[ch] = peq.get(ch, 0) | (1 << i)
    full = (1 << m) - 1
    top = 1 << (m - 1)
    pv, mv, score = full, 0, m
    for ch in b:
        eq = peq.get(ch, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | ~(xh | pv)
        mh = pv & xh
        if ph & top:
            score += 1
        elif mh & top:
            score -= 1
        ph = (ph << 1) | 1
        mh <<= 1
        pv = (mh | ~(xv | ph)) & full
        mv = ph & xv & full
    return score


def name_distance(a, b):
    """Edit distance between NFC, case-folded forms."""
    return levenshtein(fold(a), fold(b))


class BKTree:
    """Burkhard-Keller tree for exact radius queries under edit distance.

    Items sharing a key share a node.  ``key`` maps an item to the string the
    metric sees.
    """

    def __init__(self, items=(), key=fold):
        self._key = key
        self._root = None
        self._size = 0
        for item in items:
            self.add(item)

    def __len__(self):
        return self._size

    def add(self, item):
        k = self._key(item)
        self._size += 1
        if self._root is None:
            self._root = (k, [item], {})
            return
        node = self._root
        while True:
            d = levenshtein(k, node[0])
            if d == 0:
                node[1].append(item)
                return
            child = node[2].get(d)
            if child is None:
                node[2][d] = (k, [item], {})
                return
            node = child

    def query(self, text, radius):
        """All ``(distance, item)`` with ``distance <= radius``, unordered."""
        if self._root is None:
            return []
        out = []
        stack = [self._root]
        while stack:
            key, items, children = stack.pop()
            d = levenshtein(text, key)
            if d <= radius:
                out.extend((d, it) for it in items)
            lo, hi = d - radius, d + radius
            stack.extend(child for dist, child in children.items() if lo <= dist <= hi)
        return out

    def depth(self):
        def walk(node):
            return 1 + max((walk(c) for c in node[2].values()), default=0)
        return 0 if self._root is None else walk(self._root)


@dataclass(frozen=True)
class Candidate:
    entry: object
    distance: int
    score: float


@dataclass(frozen=True)
class AssociationRule:
    antecedent: frozenset
    consequent: str
    support: float
    confidence: float
    lift: float


@dataclass(frozen=True)
class OptimizerConfig:
    max_dist: int = 2
    min_support: float = 0.2
    min_confidence: float = 0.5
    assoc_weight: float = 1.0

    def __post_init__(self):
        if self.max_dist < 0:
            raise ValueError("max_dist must be >= 0")
        if not 0 <= self.min_support <= 1 or not 0 <= self.min_confidence <= 1:
            raise ValueError("support and confidence thresholds must lie in [0, 1]")
        if self.assoc_weight < 0:
            raise ValueError("assoc_weight must be >= 0")


def build_index(db):
    """BK-tree over the folded names of every medicine entry."""
    if len(db) == 0:
        raise ValueError("cannot index an empty medicine database")
    return BKTree(db, key=lambda e: fold(e.name))


def _rank_key(c):
    return (c.distance, c.entry.name, c.entry.id)


def fuzzy_search(query, index, max_dist):
    """Entries within ``max_dist`` edits of ``query``, nearest first, then by name."""
    if max_dist < 0:
        raise ValueError("max_dist must be >= 0")
    hits = index.query(fold(query), max_dist)
    cands = [Candidate(entry, d, float(max_dist - d)) for d, entry in hits]
    return sorted(cands, key=_rank_key)


def apriori(transactions, min_support):
    """Frequent itemsets by level-wise candidate generation.

    Returns a dict mapping each frozenset with
    ``count / len(transactions) >= min_support`` to that support.
    """
    txs = [frozenset(t) for t in transactions]
    if not txs:
        raise EmptyTransactionDb("no transactions to mine")
    if not 0 < min_support <= 1:
        raise ValueError("min_support must lie in (0, 1]")
    n = len(txs)
    counts = {}
    for t in txs:
        for item in t:
            key = frozenset((item,))
            counts[key] = counts.get(key, 0) + 1
    level = {s: c / n for s, c in counts.items() if c / n >= min_support}
    frequent = dict(level)
    k = 2
    while level:
        prev = sorted(tuple(sorted(s)) for s in level)
        candidates = []
        for i, a in enumerate(prev):
            for b in prev[i + 1:]:
                if a[:k - 2] != b[:k - 2]:
                    break
                cand = a + (b[-1],)
                # downward closure: every (k-1)-subset must already be frequent
                if all(frozenset(sub) in level for sub in itertools.combinations(cand, k - 1)):
                    candidates.append(frozenset(cand))
        counts = dict.fromkeys(candidates, 0)
        for t in txs:
            for cand in candidates:
                if cand <= t:
                    counts[cand] += 1
        level = {s: c / n for s, c in counts.items() if c / n >= min_support}
        frequent.update(level)
        k += 1
    return frequent


def mine_rules(itemsets, min_confidence):
    """Single-consequent rules ``S - {c} -> c`` from frequent itemsets."""
    rules = []
    for itemset, support in itemsets.items():
        if len(itemset) < 2:
            continue
        for c in sorted(itemset):
            antecedent = itemset - {c}
            confidence = support / itemsets[antecedent]
            if confidence >= min_confidence:
                lift = confidence / itemsets[frozenset((c,))]
                rules.append(AssociationRule(antecedent, c, support, confidence, lift))
    rules.sort(key=lambda r: (len(r.antecedent), sorted(r.antecedent), r.consequent))
    return rules


def most_common(itemsets):
    """Single items ordered by support, most frequent first."""
    singles = [(next(iter(s)), sup) for s, sup in itemsets.items() if len(s) == 1]
    return sorted(singles, key=lambda p: (-p[1], p[0]))


def optimize_prediction(raw, context_meds, index, rules, cfg=OptimizerConfig()):
    """Rank database entries for a raw (post-UAM) string.

    score = (max_dist - distance) + assoc_weight * best confidence among rules
    whose antecedent lies in ``context_meds`` and whose consequent is the
    candidate.  Raises :class:`NoCandidate` when nothing is within range.
    """
    if not raw:
        raise ValueError("raw string is empty")
    if isinstance(index, MedicineDb):
        index = build_index(index)
    context = frozenset(context_meds)
    best = {}
    for r in rules:
        if r.antecedent <= context and r.confidence > best.get(r.consequent, 0.0):
            best[r.consequent] = r.confidence
    cands = []
    for c in fuzzy_search(raw, index, cfg.max_dist):
        score = (cfg.max_dist - c.distance) + cfg.assoc_weight * best.get(c.entry.id, 0.0)
        cands.append(Candidate(c.entry, c.distance, score))
    if not cands:
        raise NoCandidate(raw)
    return sorted(cands, key=lambda c: (-c.score,) + _rank_key(c))


def write_rules(path, rules):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in rules:
            ante = ",".join(sorted(r.antecedent))
            fh.write(f"{ante}\t{r.consequent}\t{r.support!r}\t{r.confidence!r}\t{r.lift!r}\n")


def read_rules(path):
    rules = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            ante, cons, sup, conf, lift = line.split("\t")
            rules.append(AssociationRule(frozenset(ante.split(",")), cons,
                                         float(sup), float(conf), float(lift)))
    return rules
