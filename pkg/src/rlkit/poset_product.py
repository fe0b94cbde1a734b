"""Frames, the box conucleus, ac-labelings and poset products.

A choice function over a frame is a tuple with one element index per poset
node (in the poset's node order).  Each node's algebra keeps its own
bottom and top indices; "f(x) = 0" and "f(x) = 1" always mean that
node's designated bottom and top.

Labelings are enumerated in mixed-radix order over the nodes listed by the
poset's linear extension, first node most significant.  The direct product
of the factors taken in that same order therefore indexes choice functions
identically, which is what lets the poset product be compared
element-for-element with the conuclear image of the direct product.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import (
    TABLES,
    FiniteResiduatedLattice,
    builtin,
    conuclear_image,
    direct_product,
    radix_weights,
    resolve_algebra,
    validate_algebra,
)
from .errors import ConsistencyError, FormatError, SizeError, carrier_cap
from .posets import FinitePoset, dual_poset, poset_from_dict


class Frame:
    """A finite poset with one finite residuated lattice per node."""

    def __init__(self, poset: FinitePoset, algebras, validate=True):
        if isinstance(algebras, dict):
            algebras = [algebras[name] for name in poset.names]
        algebras = tuple(algebras)
        if len(algebras) != poset.size:
            raise FormatError(f"frame has {poset.size} nodes but {len(algebras)} algebras")
        for name, A in zip(poset.names, algebras):
            if A.size < 2:
                raise FormatError(f"algebra at node {name} is trivial; frame factors need bottom != top")
        if validate:
            for name, A in zip(poset.names, algebras):
                rep = validate_algebra(A)
                if not rep.ok:
                    raise FormatError(f"algebra at node {name}: {rep.axiom} fails at {rep.witness}")
        self.poset = poset
        self.algebras = algebras

    @property
    def size(self):
        return self.poset.size

    @cached_property
    def order(self):
        return self.poset.linear_extension

    @cached_property
    def radices(self):
        return tuple(self.algebras[x].size for x in self.order)

    @cached_property
    def carrier(self):
        return int(np.prod(self.radices))

    @cached_property
    def bottoms(self):
        return np.array([A.bottom for A in self.algebras], dtype=np.int64)

    @cached_property
    def tops(self):
        return np.array([A.top for A in self.algebras], dtype=np.int64)

    def encode(self, F):
        """Mixed-radix codes of choice functions (last axis = nodes)."""
        F = np.asarray(F, dtype=np.int64)
        code = np.zeros(F.shape[:-1], dtype=np.int64)
        for x, w in zip(self.order, radix_weights(self.radices)):
            code += F[..., x] * w
        return code

    def decode(self, codes):
        codes = np.asarray(codes, dtype=np.int64)
        out = np.empty(codes.shape + (self.size,), dtype=np.int64)
        for x, w, r in zip(self.order, radix_weights(self.radices), self.radices):
            out[..., x] = (codes // w) % r
        return out

    def factor_names(self):
        return [A.name or "?" for A in self.algebras]

    def to_dict(self):
        algs = {}
        for name, A in zip(self.poset.names, self.algebras):
            b = builtin(A.name)
            algs[name] = A.name if b is not None and b.same_tables(A) else A.to_dict()
        return {"poset": self.poset.to_dict(), "algebras": algs}

    def describe(self):
        edges = ",".join(f"{self.poset.names[i]}<{self.poset.names[j]}" for i, j in self.poset.covers)
        vals = ",".join(f"{n}:{a}" for n, a in zip(self.poset.names, self.factor_names()))
        return f"[{edges}] {{{vals}}}"

    def __repr__(self):
        return f"Frame({self.describe()})"


def frame_from_dict(data, base_dir=None) -> Frame:
    if not isinstance(data, dict) or "poset" not in data or "algebras" not in data:
        raise FormatError('frame JSON needs "poset" and "algebras"')
    P = poset_from_dict(data["poset"])
    algs = data["algebras"]
    if not isinstance(algs, dict):
        raise FormatError('"algebras" must map node names to algebras')
    missing = [n for n in P.names if n not in algs]
    if missing:
        raise FormatError(f"no algebra for node(s) {', '.join(missing)}")
    out = []
    for name in P.names:
        spec = algs[name]
        if isinstance(spec, str) and base_dir is not None and builtin(spec) is None:
            spec = os.path.join(base_dir, spec)
        out.append(resolve_algebra(spec))
    return Frame(P, out, validate=False)


def load_frame(path) -> Frame:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise FormatError(f"no frame file {path!r}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return frame_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def _check_range(frame, F):
    F = np.asarray(F, dtype=np.int64)
    if F.shape[-1] != frame.size:
        raise FormatError(f"choice function needs {frame.size} entries")
    for x, A in enumerate(frame.algebras):
        col = F[..., x]
        if (col < 0).any() or (col >= A.size).any():
            raise FormatError(f"value at node {frame.poset.names[x]} out of range")
    return F


# ---------------------------------------------------------------- box

def box_array(frame, F):
    """Box applied along the last axis of an integer array."""
    F = np.asarray(F, dtype=np.int64)
    out = F.copy()
    for x in range(frame.size):
        above = frame.poset.strict_above[x]
        if not above:
            continue
        ok = np.ones(F.shape[:-1], dtype=bool)
        for y in above:
            ok &= F[..., y] == frame.tops[y]
        out[..., x] = np.where(ok, F[..., x], frame.bottoms[x])
    return out


def box(frame, f):
    """f(x) if f is top strictly above x, else bottom at x."""
    f = _check_range(frame, f)
    return tuple(int(v) for v in box_array(frame, f))


def _pairwise_condition(frame, f):
    """Above any node not at bottom, every node is at top."""
    for x in range(frame.size):
        for y in frame.poset.strict_above[x]:
            if f[x] != frame.bottoms[x] and f[y] != frame.tops[y]:
                return False
    return True


def _partition_condition(frame, f):
    """Bottom-set a down-set, top-set an up-set, the rest an antichain."""
    P = frame.poset
    S = [x for x in range(frame.size) if f[x] not in (frame.bottoms[x], frame.tops[x])]
    L = {x for x in range(frame.size) if f[x] == frame.bottoms[x]}
    U = {x for x in range(frame.size) if f[x] == frame.tops[x]}
    antichain = all(not P.leq[a, b] for a in S for b in S if a != b)
    downset = all(P.down(x) <= L for x in L)
    upset = all(P.up(x) <= U for x in U)
    return antichain and downset and upset


def ac_criteria(frame, f):
    """The three equivalent descriptions, evaluated independently."""
    f = tuple(int(v) for v in _check_range(frame, f))
    fixed = box(frame, f) == f
    return fixed, _pairwise_condition(frame, f), _partition_condition(frame, f)


def is_ac_labeling(frame, f):
    fixed, pairwise, partition = ac_criteria(frame, f)
    if not fixed == pairwise == partition:
        raise ConsistencyError(f"ac-labeling criteria disagree on {f}: box {fixed}, pairwise {pairwise}, partition {partition}")
    return fixed


def enumerate_ac_labelings(frame, cap=None):
    """All box fixpoints, in the frame's mixed-radix order."""
    if frame.carrier > carrier_cap(cap):
        raise SizeError(f"{frame.carrier} choice functions exceed cap {carrier_cap(cap)}")
    F = frame.decode(np.arange(frame.carrier))
    fixed = (box_array(frame, F) == F).all(axis=1)
    return [tuple(int(v) for v in row) for row in F[fixed]]


def labeling_parts(frame, f):
    """(L_f, S_f, U_f) as sets of node indices."""
    L = {x for x in range(frame.size) if f[x] == frame.bottoms[x]}
    U = {x for x in range(frame.size) if f[x] == frame.tops[x]}
    S = set(range(frame.size)) - L - U
    return L, S, U


def labeling_leq(frame, f, g):
    """L_g within L_f, U_f within U_g, and f <= g on S_f & S_g."""
    Lf, Sf, Uf = labeling_parts(frame, f)
    Lg, Sg, Ug = labeling_parts(frame, g)
    if not (Lg <= Lf and Uf <= Ug):
        return False
    return all(frame.algebras[x].order[f[x], g[x]] for x in Sf & Sg)


def pointwise_leq(frame, f, g):
    return all(frame.algebras[x].order[f[x], g[x]] for x in range(frame.size))


# ---------------------------------------------------------------- the product algebra

@dataclass
class PosetProduct:
    frame: Frame
    labelings: list
    algebra: FiniteResiduatedLattice

    @cached_property
    def _index(self):
        return {f: i for i, f in enumerate(self.labelings)}

    def index_of(self, f):
        try:
            return self._index[tuple(int(v) for v in f)]
        except KeyError:
            raise FormatError(f"{tuple(f)} is not an ac-labeling of this frame") from None

    def labeling(self, i):
        return self.labelings[i]

    @property
    def size(self):
        return len(self.labelings)


def box_conucleus(frame, cap=None):
    """(direct product in frame order, box as a map on its indices)."""
    D = direct_product([frame.algebras[x] for x in frame.order], cap)
    F = frame.decode(np.arange(D.size))
    return D, frame.encode(box_array(frame, F))


def pointwise_tables(frame, labs):
    """meet, join, prod, impl tables over the labeling array *labs*."""
    m = len(labs)
    pos = np.full(frame.carrier, -1, dtype=np.int64)
    pos[frame.encode(labs)] = np.arange(m)
    tables = {}
    for op in TABLES:
        out = np.empty((m, m, frame.size), dtype=np.int64)
        for x, A in enumerate(frame.algebras):
            col = labs[:, x]
            out[:, :, x] = A.table(op)[col[:, None], col[None, :]]
        if op == "impl":
            # pointwise implication first, then box
            out = box_array(frame, out)
        idx = pos[frame.encode(out)]
        if (idx < 0).any():
            raise ConsistencyError(f"pointwise {op} leaves the set of ac-labelings")
        tables[op] = idx
    return tables


def build_poset_product(frame, cap=None, check=True) -> PosetProduct:
    """The poset product as a concrete finite residuated lattice.

    With *check*, the result is validated and compared table-for-table with
    the conuclear image of the direct product under box.
    """
    labelings = enumerate_ac_labelings(frame, cap)
    labs = np.array(labelings, dtype=np.int64).reshape(len(labelings), frame.size)
    tables = pointwise_tables(frame, labs)
    bottom = labelings.index(tuple(int(v) for v in frame.bottoms))
    top = labelings.index(tuple(int(v) for v in frame.tops))
    name = "P(" + ",".join(frame.factor_names()) + ")"
    A = FiniteResiduatedLattice(len(labelings), tables["meet"], tables["join"], tables["prod"],
                                tables["impl"], bottom, top, name=name)
    if check:
        rep = validate_algebra(A)
        if not rep.ok:
            raise ConsistencyError(f"poset product fails {rep.axiom} at {rep.witness}")
        D, sigma = box_conucleus(frame, cap)
        image = conuclear_image(D, sigma)
        if not image.same_tables(A):
            raise ConsistencyError("poset product differs from the conuclear image of the direct product")
    return PosetProduct(frame, labelings, A)


def dual_frame(frame) -> Frame:
    return Frame(dual_poset(frame.poset), frame.algebras, validate=False)


def dual_poset_product(frame, cap=None, check=True) -> PosetProduct:
    return build_poset_product(dual_frame(frame), cap, check)
