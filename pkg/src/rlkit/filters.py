"""Deductive filters, quotients, values and subdirect irreducibility.

Filters are int bitsets over the carrier (bit i set iff element i is in).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import TABLES, FiniteResiduatedLattice
from .errors import ConsistencyError, SizeError, carrier_cap
from .posets import FinitePoset


def to_mask(elements):
    m = 0
    for e in elements:
        m |= 1 << int(e)
    return m


def members_of(mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class DeductiveFilter:
    base: FiniteResiduatedLattice = field(compare=False, repr=False)
    members: int

    @property
    def elements(self):
        return tuple(members_of(self.members))

    def __contains__(self, x):
        return bool(self.members >> int(x) & 1)

    def __len__(self):
        return bin(self.members).count("1")

    def __le__(self, other):
        return self.members & ~other.members == 0

    def __lt__(self, other):
        return self <= other and self.members != other.members

    def __repr__(self):
        return f"Filter{list(self.elements)}"


def _up_masks(A):
    return [to_mask(np.flatnonzero(A.order[x])) for x in range(A.size)]


def is_deductive_filter(A, S):
    """``(ok, violation)`` where violation names the failing condition."""
    S = sorted({int(s) for s in S})
    if not S:
        return False, {"condition": "nonempty"}
    members = set(S)
    for x in S:
        for y in np.flatnonzero(A.order[x]):
            if int(y) not in members:
                return False, {"condition": "upset", "x": x, "y": int(y)}
    for x in S:
        for y in S:
            z = int(A.prod[x, y])
            if z not in members:
                return False, {"condition": "product", "x": x, "y": y, "product": z}
    return True, None


def generated_filter(A, S) -> DeductiveFilter:
    """Least deductive filter containing S (and top)."""
    prods = {A.top, *(int(s) for s in S)}
    frontier = list(prods)
    while frontier:
        new = []
        for a in frontier:
            for b in list(prods):
                c = int(A.prod[a, b])
                if c not in prods:
                    prods.add(c)
                    new.append(c)
        frontier = new
    ups = _up_masks(A)
    mask = 0
    for p in prods:
        mask |= ups[p]
    return DeductiveFilter(A, mask)


def _sort_key(F):
    return (len(F), F.elements)


def enumerate_filters(A, cap=None):
    """All deductive filters, smallest first.

    In a finite integral residuated lattice a filter contains the product of
    all its members, which lies below every member; so every filter is
    generated by one element and principal closures suffice.
    """
    if A.size > carrier_cap(cap):
        raise SizeError(f"{A.size} elements exceed cap {carrier_cap(cap)}")
    seen = {}
    for a in range(A.size):
        F = generated_filter(A, [a])
        seen.setdefault(F.members, F)
    return sorted(seen.values(), key=_sort_key)


def quotient(A, F):
    """``(A/F, projection)`` for the congruence of the filter F."""
    if not isinstance(F, DeductiveFilter):
        F = DeductiveFilter(A, to_mask(F))
    n = A.size
    infilter = np.array([x in F for x in range(n)], dtype=bool)
    biimp = A.meet[A.impl, A.impl.T]
    theta = infilter[biimp]
    cls = np.full(n, -1, dtype=np.int64)
    reps = []
    for x in range(n):
        if cls[x] < 0:
            members = np.flatnonzero(theta[x])
            cls[members] = len(reps)
            reps.append(x)
    reps = np.array(reps, dtype=np.int64)
    tables = {}
    for op in TABLES:
        t = A.table(op)
        q = cls[t[reps[:, None], reps[None, :]]]
        if not np.array_equal(cls[t], q[cls[:, None], cls[None, :]]):
            raise ConsistencyError(f"{op} is not compatible with the congruence of {F}")
        tables[op] = q
    Q = FiniteResiduatedLattice(len(reps), tables["meet"], tables["join"], tables["prod"], tables["impl"],
                                int(cls[A.bottom]), int(cls[A.top]))
    return Q, [int(c) for c in cls]


def values(A, cap=None):
    """Filters maximal among those omitting some element, smallest first."""
    filters = enumerate_filters(A, cap)
    out = []
    for F in filters:
        for x in range(A.size):
            if x in F:
                continue
            if not any(F < G and x not in G for G in filters):
                out.append(F)
                break
    return out


def value_poset(vals, prefix="v") -> FinitePoset:
    """The values ordered by inclusion, nodes named v0, v1, ..."""
    n = len(vals)
    leq = [[vals[i] <= vals[j] for j in range(n)] for i in range(n)]
    return FinitePoset([f"{prefix}{i}" for i in range(n)], leq)


def is_prime(A, F):
    for x in range(A.size):
        for y in range(A.size):
            if int(A.join[x, y]) in F and x not in F and y not in F:
                return False
    return True


@dataclass
class SIAnalysis:
    is_si: bool
    min_nontrivial_filter: DeductiveFilter | None
    coatom: int | None

    def as_dict(self):
        return {
            "is_si": self.is_si,
            "min_nontrivial_filter": list(self.min_nontrivial_filter.elements)
            if self.min_nontrivial_filter is not None else None,
            "coatom": self.coatom,
        }


def coatom(A):
    """Greatest element strictly below top, if there is one."""
    below = [x for x in range(A.size) if x != A.top]
    for c in below:
        if all(A.order[x, c] for x in below):
            return c
    return None


def si_analysis(A, cap=None) -> SIAnalysis:
    nontrivial = [F for F in enumerate_filters(A, cap) if F.members != 1 << A.top]
    least = None
    for F in nontrivial:
        if all(F <= G for G in nontrivial):
            least = F
            break
    c = coatom(A)
    if (least is None) != (c is None):
        raise ConsistencyError(f"least nontrivial filter {least} and coatom {c} disagree")
    return SIAnalysis(least is not None, least, c)
