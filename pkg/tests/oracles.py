"""Independent oracles used across the suite.

These deliberately avoid the library's own machinery: partitions are
computed by naive inference to a fixpoint, canonical forms by direct
structural reads, and counts by the arithmetic recurrence.
"""

from __future__ import annotations

from qitbench.terms import Node, Signature, Tab, Term, Var


def bag_multiset(t: Term) -> tuple[str, ...]:
    """Sorted labels along a cons spine; the nil spine end is implicit."""
    labels: list[str] = []
    while isinstance(t, Node) and t.op.name == "cons":
        labels.append(t.op.params[0])
        t = t.children.entries[0]
    assert isinstance(t, Node) and t.op.name == "nil", f"not a spine: {t!r}"
    return tuple(sorted(labels))


def vec_labels(t: Term) -> tuple[str, ...]:
    """Labels along an indexed cons spine, unsorted."""
    labels: list[str] = []
    while isinstance(t, Node) and t.op.name == "cons":
        labels.append(t.op.params[0])
        t = t.children.entries[0]
    assert isinstance(t, Node) and t.op.name == "nil"
    return tuple(labels)


def count_terms(arities: list[int], nvars: int, depth: int) -> int:
    """count(d) = nvars + sum over ops of count(d-1)^arity, nullary ops
    counting once from depth 1 up."""
    if depth <= 0:
        return 0
    below = count_terms(arities, nvars, depth - 1)
    total = nvars
    for a in arities:
        if a == 0:
            total += 1
        elif depth >= 2:
            total += below**a
    return total


def naive_congruence(terms: list[Term], pairs: list[tuple[Term, Term]]) -> list[set[int]]:
    """Least congruence on the finite universe containing the pairs,
    computed by repeated full scans over a relation matrix."""
    n = len(terms)
    index = {t: i for i, t in enumerate(terms)}
    rel = [[i == j for j in range(n)] for i in range(n)]
    for a, b in pairs:
        rel[index[a]][index[b]] = rel[index[b]][index[a]] = True
    changed = True
    while changed:
        changed = False
        # symmetry + transitivity
        for i in range(n):
            for j in range(n):
                if not rel[i][j]:
                    continue
                if not rel[j][i]:
                    rel[j][i] = True
                    changed = True
                for k in range(n):
                    if rel[j][k] and not rel[i][k]:
                        rel[i][k] = True
                        changed = True
        # congruence: same operator, related children pointwise
        for i in range(n):
            ti = terms[i]
            if not isinstance(ti, Node):
                continue
            for j in range(n):
                if rel[i][j]:
                    continue
                tj = terms[j]
                if not isinstance(tj, Node) or ti.op != tj.op:
                    continue
                ci, cj = ti.children.entries, tj.children.entries
                if all(rel[index[a]][index[b]] for a, b in zip(ci, cj)):
                    rel[i][j] = True
                    changed = True
    classes: list[set[int]] = []
    seen: set[int] = set()
    for i in range(n):
        if i in seen:
            continue
        cls = {j for j in range(n) if rel[i][j]}
        seen |= cls
        classes.append(cls)
    return classes


def size_height(t) -> int:
    """Height of a size tree; leaf height 0."""
    return 1 + max((size_height(c) for c in t.children), default=-1)


def naive_components(nodes: list, pairs: list[tuple]) -> list[set[int]]:
    """Connected components of the gluing graph by breadth-first scans."""
    index = {node: i for i, node in enumerate(nodes)}
    adjacency: dict[int, set[int]] = {i: set() for i in range(len(nodes))}
    for a, b in pairs:
        adjacency[index[a]].add(index[b])
        adjacency[index[b]].add(index[a])
    seen: set[int] = set()
    components: list[set[int]] = []
    for start in range(len(nodes)):
        if start in seen:
            continue
        frontier, comp = [start], set()
        while frontier:
            cur = frontier.pop()
            if cur in comp:
                continue
            comp.add(cur)
            frontier.extend(adjacency[cur] - comp)
        seen |= comp
        components.append(comp)
    return components
