"""Regions, counting numbers, region graphs and the shadow/blanket queries."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

from .codes import TannerGraph


@dataclass(frozen=True)
class Region:
    id: int
    checks: frozenset
    qubits: tuple
    counting_number: int

    @property
    def constituents(self) -> frozenset:
        return frozenset(("c", c) for c in self.checks) | frozenset(("q", q) for q in self.qubits)


class RegionGraph:
    """Directed acyclic graph of regions over a Tanner graph.

    Edges point from parent to child; a child's constituents are a strict
    subset of its parent's.  Construction validates closure, the subset rule
    and acyclicity; counting numbers are checked separately by
    :func:`validate_counting` so that broken graphs can be diagnosed.
    """

    def __init__(self, tanner: TannerGraph, regions, edges):
        self.tanner = tanner
        self.regions: dict[int, Region] = {}
        for r in regions:
            if r.id in self.regions:
                raise ValueError(f"duplicate region id {r.id}")
            for c in r.checks:
                if not set(tanner.check_qubits[c]) <= set(r.qubits):
                    raise ValueError(f"region {r.id} contains check {c} but not all its qubits")
            self.regions[r.id] = Region(r.id, frozenset(r.checks), tuple(sorted(r.qubits)), int(r.counting_number))
        self.edges: list[tuple[int, int]] = []
        self._parents: dict[int, list[int]] = {i: [] for i in self.regions}
        self._children: dict[int, list[int]] = {i: [] for i in self.regions}
        for p, c in edges:
            if p not in self.regions or c not in self.regions:
                raise KeyError(f"edge ({p}, {c}) references an unknown region")
            if not self.regions[c].constituents < self.regions[p].constituents:
                raise ValueError(f"edge {p}->{c}: child is not a strict subset of parent")
            self.edges.append((p, c))
            self._parents[c].append(p)
            self._children[p].append(c)
        for d in (self._parents, self._children):
            for v in d.values():
                v.sort()
        self._topological_order()

    def __contains__(self, r) -> bool:
        return r in self.regions

    def __len__(self) -> int:
        return len(self.regions)

    def _get(self, r) -> Region:
        try:
            return self.regions[r]
        except KeyError:
            raise KeyError(f"unknown region id {r}") from None

    def _topological_order(self) -> list[int]:
        indeg = {r: len(self._parents[r]) for r in self.regions}
        order = [r for r in sorted(self.regions) if indeg[r] == 0]
        i = 0
        while i < len(order):
            for c in self._children[order[i]]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    order.append(c)
            i += 1
        if len(order) != len(self.regions):
            raise ValueError("region graph has a cycle")
        return order

    def parents(self, r) -> set:
        return set(self._parents[self._get(r).id])

    def children(self, r) -> set:
        return set(self._children[self._get(r).id])

    def _closure(self, r, step) -> set:
        seen, stack = set(), list(step[self._get(r).id])
        while stack:
            x = stack.pop()
            if x not in seen:
                seen.add(x)
                stack.extend(step[x])
        return seen

    def ancestors(self, r) -> set:
        return self._closure(r, self._parents)

    def descendants(self, r) -> set:
        return self._closure(r, self._children)

    def shadow(self, r) -> set:
        """``S(r) = D(r) | {r}``."""
        return self.descendants(r) | {self._get(r).id}

    def blanket(self, r) -> set:
        """``B(r) = P(S(r)) \\ S(r)``."""
        s = self.shadow(r)
        return set().union(*(self._parents[x] for x in s)) - s

    @cached_property
    def is_bethe(self) -> bool:
        """True when the graph has exactly the layout built by :func:`bethe_regions`."""
        t = self.tanner
        nc = t.n_checks
        n_small = sum(len(cs) != 1 for cs in t.qubit_checks)
        if len(self.regions) != nc + n_small:
            return False
        for r in self.regions.values():
            if r.id < nc:
                if r.checks != {r.id} or r.qubits != tuple(t.check_qubits[r.id]) or r.counting_number != 1:
                    return False
                if self._parents[r.id]:
                    return False
            else:
                q = r.id - nc
                if q >= t.n_qubits or r.checks or r.qubits != (q,) or self._children[r.id]:
                    return False
                if set(self._parents[r.id]) != set(t.qubit_checks[q]) or len(t.qubit_checks[q]) == 1:
                    return False
                if r.counting_number != 1 - len(t.qubit_checks[q]):
                    return False
        return True

    def top_regions(self) -> list[int]:
        """Regions with counting number 1 (the highest level in two-level graphs)."""
        return sorted(r.id for r in self.regions.values() if r.counting_number == 1)

    def to_json(self) -> dict:
        return {
            "regions": [
                {"id": r.id, "checks": sorted(r.checks), "qubits": list(r.qubits), "counting_number": r.counting_number}
                for r in sorted(self.regions.values(), key=lambda r: r.id)
            ],
            "edges": [list(e) for e in self.edges],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    def to_edgelist(self) -> str:
        """Graphviz-compatible ``digraph`` text."""
        lines = ["digraph regions {"]
        for r in sorted(self.regions.values(), key=lambda r: r.id):
            label = f"C{sorted(r.checks)} Q{list(r.qubits)} c={r.counting_number}"
            lines.append(f'  {r.id} [label="{label}"];')
        lines += [f"  {p} -> {c};" for p, c in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"


def bethe_regions(tanner: TannerGraph) -> RegionGraph:
    """One large region per check (c=1); one small region per qubit whose parent
    count differs from one, with c = 1 - |P(q)|.

    Large region ids are check indices; small region ids are ``n_checks + q``.
    """
    nc = tanner.n_checks
    regions = [Region(c, frozenset([c]), tuple(qs), 1) for c, qs in enumerate(tanner.check_qubits)]
    edges = []
    for q, checks in enumerate(tanner.qubit_checks):
        if len(checks) == 1:
            continue
        regions.append(Region(nc + q, frozenset(), (q,), 1 - len(checks)))
        edges += [(c, nc + q) for c in checks]
    return RegionGraph(tanner, regions, edges)


def cvm_regions(tanner: TannerGraph, check_groups) -> RegionGraph:
    """Cluster-variational region graph from given groups of checks.

    Large regions hold each group's checks and qubits; all intersections of
    qubit sets are closed under intersection and become smaller regions.  Each
    region's counting number is ``1 - sum`` over its ancestors.
    """
    large = []
    for g in check_groups:
        qs = set()
        for c in g:
            qs |= set(tanner.check_qubits[c])
        large.append((frozenset(g), frozenset(qs)))
    layer = {qs for _, qs in large}
    small: set = set()
    frontier = list(layer)
    while frontier:
        new = set()
        for a, b in combinations(frontier + list(small | layer), 2):
            inter = a & b
            if inter and inter not in layer and inter not in small:
                new.add(inter)
        small |= new
        frontier = list(new)
    nodes = [(g, qs) for g, qs in large] + [(frozenset(), qs) for qs in sorted(small, key=lambda s: (-len(s), sorted(s)))]

    def cons(node):
        return frozenset(("c", c) for c in node[0]) | frozenset(("q", q) for q in node[1])

    edges = []
    for i, a in enumerate(nodes):
        subs = [j for j, b in enumerate(nodes) if cons(b) < cons(a)]
        for j in subs:
            # only direct children: no intermediate region between a and b
            if not any(cons(nodes[j]) < cons(nodes[k]) for k in subs if k != j):
                edges.append((i, j))
    ancestors = {i: set() for i in range(len(nodes))}
    for i in range(len(nodes)):
        for j, b in enumerate(nodes):
            if cons(nodes[i]) < cons(b):
                ancestors[i].add(j)
    counting: dict[int, int] = {}
    for i in sorted(range(len(nodes)), key=lambda i: len(ancestors[i])):
        counting[i] = 1 - sum(counting[a] for a in ancestors[i])
    regions = [Region(i, g, tuple(sorted(qs)), counting[i]) for i, (g, qs) in enumerate(nodes)]
    return RegionGraph(tanner, regions, edges)


@dataclass(frozen=True)
class CountingViolation:
    kind: str  # "check" or "qubit"
    index: int
    total: int


def validate_counting(rg: RegionGraph) -> list[CountingViolation]:
    """Every check and qubit must be counted exactly once; returns the violations."""
    t = rg.tanner
    check_tot = [0] * t.n_checks
    qubit_tot = [0] * t.n_qubits
    for r in rg.regions.values():
        for c in r.checks:
            check_tot[c] += r.counting_number
        for q in r.qubits:
            qubit_tot[q] += r.counting_number
    out = [CountingViolation("check", c, v) for c, v in enumerate(check_tot) if v != 1]
    out += [CountingViolation("qubit", q, v) for q, v in enumerate(qubit_tot) if v != 1]
    return out
