"""Frequent itemset mining with an FP-tree.

The classic divide-and-conquer construction: transactions are inserted into
a prefix tree ordered by item support, then conditional pattern bases are
mined recursively, so no candidate generation is needed.  Output order is
canonical (itemset size, then lexicographic items) and supports are exact.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class FrequentItemset:
    items: frozenset
    support: int

    def sorted_items(self) -> tuple:
        return tuple(sorted(self.items))


class _Node:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children = {}


class _FPTree:
    def __init__(self):
        self.root = _Node(None, None)
        self.node_links = {}  # item -> list of nodes holding it

    def insert(self, items, count):
        node = self.root
        for item in items:
            child = node.children.get(item)
            if child is None:
                child = _Node(item, node)
                node.children[item] = child
                self.node_links.setdefault(item, []).append(child)
            child.count += count
            node = child

    def prefix_paths(self, item):
        """Conditional pattern base: (path items, count) per node of item."""
        paths = []
        for node in self.node_links.get(item, ()):
            path = []
            parent = node.parent
            while parent is not None and parent.item is not None:
                path.append(parent.item)
                parent = parent.parent
            path.reverse()
            paths.append((path, node.count))
        return paths


def _build_tree(weighted_transactions, min_support):
    support = Counter()
    for items, count in weighted_transactions:
        for item in set(items):
            support[item] += count
    frequent = {item: c for item, c in support.items() if c >= min_support}
    # Descending support, ties by lexicographic item: the canonical order.
    order = {item: i for i, item in enumerate(
        sorted(frequent, key=lambda it: (-frequent[it], it)))}

    tree = _FPTree()
    for items, count in weighted_transactions:
        kept = sorted((it for it in set(items) if it in frequent),
                      key=order.__getitem__)
        if kept:
            tree.insert(kept, count)
    return tree, frequent


def _mine(tree, frequent, min_support, suffix, out):
    # Least-frequent first so each conditional tree stays small.
    for item in sorted(frequent, key=lambda it: (frequent[it], it), reverse=False):
        items = suffix | {item}
        out[frozenset(items)] = frequent[item]
        base = tree.prefix_paths(item)
        cond_tree, cond_frequent = _build_tree(base, min_support)
        if cond_frequent:
            _mine(cond_tree, cond_frequent, min_support, frozenset(items), out)


def mine_frequent_itemsets(transactions, min_support: int) -> list:
    """All itemsets with support >= ``min_support``, with exact supports.

    ``transactions`` is an iterable of item collections; duplicate items
    within a transaction count once.  Results are ordered by itemset size,
    then lexicographically.
    """
    if min_support < 1:
        raise ConfigError(f"min_support must be >= 1, got {min_support}")
    weighted = [(list(t), 1) for t in transactions]
    tree, frequent = _build_tree(weighted, min_support)
    found = {}
    _mine(tree, frequent, min_support, frozenset(), found)
    results = [FrequentItemset(items=k, support=v) for k, v in found.items()]
    results.sort(key=lambda fi: (len(fi.items), fi.sorted_items()))
    return results
