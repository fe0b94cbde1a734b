"""Finite posets given by cover edges, stored as a full order matrix."""

from __future__ import annotations

import functools
import heapq
import itertools
from functools import cached_property

import numpy as np

from .errors import FormatError


class CycleError(FormatError):
    def __init__(self, cycle):
        self.cycle = cycle
        super().__init__("order has a cycle: " + " < ".join(cycle + cycle[:1]))


class FinitePoset:
    """Nodes ``0..n-1`` with string names; ``leq[i, j]`` iff node i <= node j."""

    def __init__(self, names, leq):
        self.names = tuple(names)
        leq = np.array(leq, dtype=bool)
        leq.setflags(write=False)
        self.leq = leq
        self._index = {name: i for i, name in enumerate(self.names)}

    @property
    def size(self):
        return len(self.names)

    def index(self, node):
        if isinstance(node, (int, np.integer)):
            if not 0 <= node < self.size:
                raise FormatError(f"node index {node} out of range")
            return int(node)
        try:
            return self._index[node]
        except KeyError:
            raise FormatError(f"unknown node {node!r}") from None

    def lt(self, i, j):
        return bool(self.leq[i, j]) and i != j

    @cached_property
    def strict_above(self):
        """For each node, the tuple of nodes strictly above it."""
        return tuple(
            tuple(int(j) for j in np.flatnonzero(self.leq[i]) if j != i) for i in range(self.size)
        )

    def up(self, i):
        return {int(j) for j in np.flatnonzero(self.leq[i])}

    def down(self, i):
        return {int(j) for j in np.flatnonzero(self.leq[:, i])}

    @cached_property
    def covers(self):
        """Cover pairs (i, j): i < j with nothing strictly between."""
        lt = self.leq & ~np.eye(self.size, dtype=bool)
        between = (lt.astype(np.int64) @ lt.astype(np.int64)) > 0
        cov = lt & ~between
        return tuple((int(i), int(j)) for i, j in zip(*np.nonzero(cov)))

    @cached_property
    def linear_extension(self):
        """Topological order, smallest available index first."""
        indeg = [0] * self.size
        for _, j in self.covers:
            indeg[j] += 1
        heap = [i for i in range(self.size) if indeg[i] == 0]
        heapq.heapify(heap)
        out = []
        succ = {i: [j for (a, j) in self.covers if a == i] for i in range(self.size)}
        while heap:
            i = heapq.heappop(heap)
            out.append(i)
            for j in succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(heap, j)
        return tuple(out)

    def to_dict(self):
        return {
            "elements": list(self.names),
            "order": [[self.names[i], self.names[j]] for i, j in self.covers],
        }

    def same_as(self, other):
        return self.names == other.names and np.array_equal(self.leq, other.leq)

    def __repr__(self):
        edges = ", ".join(f"{self.names[i]}<{self.names[j]}" for i, j in self.covers)
        return f"FinitePoset({list(self.names)}; {edges})"


def validate_poset(nodes, edges) -> FinitePoset:
    """Reflexive-transitive closure of *edges* (pairs a < b) over *nodes*.

    Raises :class:`CycleError` naming a cycle if the closure is not
    antisymmetric.
    """
    nodes = [str(n) for n in nodes]
    if len(set(nodes)) != len(nodes):
        raise FormatError("duplicate node names")
    pos = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    adj = [[] for _ in range(n)]
    rel = np.eye(n, dtype=bool)
    for e in edges:
        if len(e) != 2:
            raise FormatError(f"edge {e!r} is not a pair")
        a, b = (str(v) for v in e)
        if a not in pos or b not in pos:
            raise FormatError(f"edge {a}<{b} mentions an unknown node")
        rel[pos[a], pos[b]] = True
        adj[pos[a]].append(pos[b])
    # cycle detection by DFS so that the reported cycle is concrete
    color = [0] * n
    parent = [-1] * n

    def dfs(u):
        color[u] = 1
        for v in adj[u]:
            if color[v] == 1:
                cyc = [v]
                w = u
                while w != v:
                    cyc.append(w)
                    w = parent[w]
                cyc.reverse()
                cyc = [cyc[-1]] + cyc[:-1]
                raise CycleError([nodes[i] for i in cyc])
            if color[v] == 0:
                parent[v] = u
                dfs(v)
        color[u] = 2

    for u in range(n):
        if color[u] == 0:
            dfs(u)
    for k in range(n):
        rel |= rel[:, k:k + 1] & rel[k:k + 1, :]
    return FinitePoset(nodes, rel)


def poset_from_dict(data) -> FinitePoset:
    if not isinstance(data, dict) or "elements" not in data:
        raise FormatError('poset JSON needs "elements" (and optionally "order")')
    return validate_poset(data["elements"], data.get("order", []))


def chain(n, prefix="c"):
    names = [f"{prefix}{i}" for i in range(n)]
    return validate_poset(names, list(zip(names, names[1:])))


def antichain(n, prefix="a"):
    return validate_poset([f"{prefix}{i}" for i in range(n)], [])


def dual_poset(P) -> FinitePoset:
    return FinitePoset(P.names, P.leq.T)


# ---------------------------------------------------------------- predicates

def _resolve(P, S):
    return {P.index(s) for s in S}


def poset_predicate(P, which, S=()):
    """``(holds, witness)`` for chain, root_system, antichain, upset, downset.

    Witnesses use node names: an incomparable pair, or for root systems the
    base node plus the incomparable pair above it.
    """
    n = P.size
    L = P.leq
    if which == "chain":
        for i, j in itertools.combinations(range(n), 2):
            if not (L[i, j] or L[j, i]):
                return False, (P.names[i], P.names[j])
        return True, None
    if which == "root_system":
        for x in range(n):
            above = sorted(P.up(x))
            for i, j in itertools.combinations(above, 2):
                if not (L[i, j] or L[j, i]):
                    return False, (P.names[x], P.names[i], P.names[j])
        return True, None
    S = _resolve(P, S)
    if which == "antichain":
        for i, j in itertools.combinations(sorted(S), 2):
            if L[i, j] or L[j, i]:
                return False, (P.names[i], P.names[j])
        return True, None
    if which in ("upset", "downset"):
        for i in sorted(S):
            reach = P.up(i) if which == "upset" else P.down(i)
            for j in sorted(reach - S):
                return False, (P.names[i], P.names[j])
        return True, None
    raise FormatError(f"unknown poset predicate {which!r}")


def is_upset(P, S):
    return poset_predicate(P, "upset", S)[0]


def is_root_system(P):
    return poset_predicate(P, "root_system")[0]


def is_chain(P):
    return poset_predicate(P, "chain")[0]


# ---------------------------------------------------------------- enumeration

def _closure_ok(rel, n):
    for i in range(n):
        for j in range(n):
            if i != j and rel[i][j] and rel[j][i]:
                return False
            if rel[i][j]:
                for k in range(n):
                    if rel[j][k] and not rel[i][k]:
                        return False
    return True


def _hasse_mask(rel, n, perm):
    """Bitmask of cover edges after relabelling node i as perm[i]."""
    mask = 0
    for i in range(n):
        for j in range(n):
            if i != j and rel[i][j]:
                if not any(rel[i][k] and rel[k][j] for k in range(n) if k not in (i, j)):
                    mask |= 1 << (perm[i] * n + perm[j])
    return mask


def enumerate_posets(n):
    """All posets on n nodes up to isomorphism, by canonical Hasse bitmask.

    The canonical form is the least cover-edge bitmask over relabellings
    in which every edge runs from a lower to a higher index.  Posets come
    out sorted by it, labelled so that their cover edges are exactly that
    bitmask, with nodes named ``p0..p{n-1}``.
    """
    return list(_posets(n))


@functools.lru_cache(maxsize=None)
def _posets(n):
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    seen = {}
    perms = list(itertools.permutations(range(n)))
    for bits in range(1 << len(pairs)):
        rel = [[i == j for j in range(n)] for i in range(n)]
        for b, (i, j) in enumerate(pairs):
            if bits >> b & 1:
                rel[i][j] = True
        if not _closure_ok(rel, n):
            continue
        canon = min(
            _hasse_mask(rel, n, p)
            for p in perms
            if all(p[i] < p[j] for i in range(n) for j in range(n) if i != j and rel[i][j])
        )
        if canon not in seen:
            seen[canon] = True
    names = [f"p{i}" for i in range(n)]
    out = []
    for canon in sorted(seen):
        edges = [(names[k // n], names[k % n]) for k in range(n * n) if canon >> k & 1]
        out.append(validate_poset(names, edges))
    return tuple(out)


def automorphisms(P):
    """All order automorphisms as index tuples."""
    n = P.size
    out = []
    for perm in itertools.permutations(range(n)):
        if all(P.leq[i, j] == P.leq[perm[i], perm[j]] for i in range(n) for j in range(n)):
            out.append(perm)
    return out
