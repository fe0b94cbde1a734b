"""Relational models over frames: forcing, validity, countermodels.

Also the two classical special cases: intuitionistic Kripke forcing on
two-valued frames, and temporal flows over Lukasiewicz chains.

Notation used in formulas: ``~a`` is ``a -> 0`` and ``a <-> b`` is
``(a -> b) & (b -> a)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import check_equation, classify, lukasiewicz_coordinates
from .errors import ConsistencyError, FormatError, PreconditionError, SizeError, UnsupportedError, eval_cap
from .poset_product import Frame, build_poset_product, enumerate_ac_labelings, is_ac_labeling, box_array
from .posets import automorphisms, enumerate_posets, is_chain as poset_is_chain, is_root_system, is_upset
from .syntax import (
    ONE,
    Binary,
    Const,
    Equation,
    Var,
    connectives,
    decode_assignment,
    evaluate_term,
    parse,
    parse_equation,
    power,
    render,
    variables,
)

SAMPLE_SIZE = 20000


# ---------------------------------------------------------------- evaluation

def _extend(frame, arrays, t, shape):
    """Value of t as a choice function, vectorized over leading *shape*."""
    memo = {}
    k = frame.size

    def ev(s):
        if s in memo:
            return memo[s]
        if isinstance(s, Var):
            try:
                v = arrays[s.name]
            except KeyError:
                raise FormatError(f"unassigned variable {s.name!r}") from None
        elif isinstance(s, Const):
            v = np.broadcast_to(frame.tops if s.value == 1 else frame.bottoms, shape + (k,))
        else:
            a, b = ev(s.left), ev(s.right)
            v = np.empty(shape + (k,), dtype=np.int64)
            for x, A in enumerate(frame.algebras):
                v[..., x] = A.table(s.op)[a[..., x], b[..., x]]
            if s.op == "impl":
                v = box_array(frame, v)
        memo[s] = v
        return v

    return ev(t)


@dataclass
class RelationalModel:
    frame: Frame
    valuation: dict

    def __post_init__(self):
        clean = {}
        for name, f in self.valuation.items():
            f = tuple(int(v) for v in f)
            if not is_ac_labeling(self.frame, f):
                raise FormatError(f"valuation of {name} is not an ac-labeling: {f}")
            clean[name] = f
        self.valuation = clean


def extension(model, phi):
    """h-hat(phi) as a labeling tuple."""
    if isinstance(phi, str):
        phi = parse(phi)
    arrays = {n: np.array(f, dtype=np.int64) for n, f in model.valuation.items()}
    return tuple(int(v) for v in _extend(model.frame, arrays, phi, ()))


def forces(model, x, phi):
    """Whether h-hat(phi) takes the top value at node x."""
    i = model.frame.poset.index(x)
    return extension(model, phi)[i] == model.frame.tops[i]


# ---------------------------------------------------------------- frame validity

@dataclass
class FrameValidity:
    formula: str
    frame: Frame
    valid: bool
    exhaustive: bool
    checked: int
    valuation: dict | None = None
    node: str | None = None
    labels: tuple | None = None
    seed: int | None = None

    def as_dict(self):
        P = self.frame.poset
        out = {
            "formula": self.formula,
            "frame": self.frame.to_dict(),
            "verdict": "valid" if self.valid else "refuted",
            "witness_valuation": None,
            "witness_node": self.node,
            "labels": None,
            "search": "exhaustive" if self.exhaustive else f"sampled (seed {self.seed})",
            "valuations_checked": self.checked,
        }
        if self.valuation is not None:
            out["witness_valuation"] = {
                v: dict(zip(P.names, f)) for v, f in self.valuation.items()
            }
            out["labels"] = dict(zip(P.names, self.labels))
        return out


def frame_valid(frame, phi, cap=None, seed=0, sample=False, product=None) -> FrameValidity:
    """Is phi forced at every node under every valuation?

    Exhaustive whenever the valuation count fits the evaluation cap, and
    then cross-checked against validity of ``phi = 1`` in P(F): the two
    verdicts and the first refuting valuation must coincide.  Beyond the
    cap, ``sample=True`` draws seeded random valuations instead.
    """
    if isinstance(phi, str):
        phi = parse(phi)
    P = product or build_poset_product(frame)
    labs = np.array(P.labelings, dtype=np.int64)
    m = len(labs)
    names = variables(phi)
    total = m ** len(names)
    tops = frame.tops
    exhaustive = total <= eval_cap(cap)
    if not exhaustive and not sample:
        raise SizeError(f"{total} valuations exceed the evaluation cap {eval_cap(cap)}")
    if exhaustive:
        batches = _index_batches(total)
    else:
        rng = np.random.default_rng(seed)
        batches = [np.sort(rng.integers(0, total, size=SAMPLE_SIZE, dtype=np.int64))]
    checked = 0
    witness = None
    for idx in batches:
        arrays = {}
        rem = idx
        for pos in range(len(names) - 1, -1, -1):
            arrays[names[pos]] = labs[rem % m]
            rem = rem // m
        val = _extend(frame, arrays, phi, idx.shape)
        bad = (val != tops).any(axis=-1)
        checked += len(idx)
        hit = np.flatnonzero(bad)
        if hit.size:
            witness = int(idx[hit[0]])
            break
        if not exhaustive:
            # algebraic route on the same sample
            assignment = {n: a for n, a in zip(names, _digits(idx, m, len(names)))}
            alg = np.broadcast_to(evaluate_term(P.algebra, assignment, phi), idx.shape)
            if (alg != P.algebra.top).any():
                raise ConsistencyError("forcing and P(F) disagree on a sampled valuation")
    result = FrameValidity(render(phi), frame, witness is None, exhaustive, checked, seed=None if exhaustive else seed)
    if witness is not None:
        assignment = decode_assignment(m, names, witness)
        valuation = {n: P.labelings[i] for n, i in assignment.items()}
        labels = extension(RelationalModel(frame, valuation), phi)
        node = next(x for x in range(frame.size) if labels[x] != tops[x])
        result.valuation = valuation
        result.labels = labels
        result.node = frame.poset.names[node]
        if int(evaluate_term(P.algebra, assignment, phi)) == P.algebra.top:
            raise ConsistencyError("forcing refutes a valuation that P(F) validates")
    if exhaustive:
        alg = check_equation(P.algebra, Equation(phi, ONE), cap)
        if alg.valid != result.valid:
            raise ConsistencyError(f"frame validity {result.valid} but P(F) validity {alg.valid}")
        if not alg.valid and decode_assignment(m, names, witness) != alg.counter:
            raise ConsistencyError("first refuting valuation differs from the first algebraic counterexample")
    return result


def _digits(idx, m, v):
    out = []
    rem = idx
    for _ in range(v):
        out.append(rem % m)
        rem = rem // m
    return out[::-1]


def _index_batches(total, chunk=1 << 16):
    for start in range(0, total, chunk):
        yield np.arange(start, min(total, start + chunk), dtype=np.int64)


# ---------------------------------------------------------------- frame generation

def frame_family(max_nodes, algebras, min_nodes=1):
    """Frames over all posets with min..max nodes, factors from *algebras*.

    Order: node count, then canonical poset order, then factor assignments
    in lexicographic order of positions in *algebras*.  Assignments related
    by a poset automorphism are generated once (the lexicographically least).
    """
    algebras = list(algebras)
    for n in range(min_nodes, max_nodes + 1):
        for P in enumerate_posets(n):
            autos = automorphisms(P)
            for choice in itertools.product(range(len(algebras)), repeat=n):
                if any(tuple(choice[p[i]] for i in range(n)) < choice for p in autos):
                    continue
                yield Frame(P, [algebras[c] for c in choice], validate=False)


@dataclass
class SearchResult:
    formula: str
    found: bool
    frames_checked: int
    validity: FrameValidity | None = None
    sampled: bool = False

    def as_dict(self):
        out = {
            "formula": self.formula,
            "verdict": "refuted" if self.found else "exhausted",
            "frames_checked": self.frames_checked,
            "search": "sampled" if self.sampled else "exhaustive",
        }
        if self.validity is not None:
            out.update({k: v for k, v in self.validity.as_dict().items() if k not in ("formula", "verdict")})
        return out


def countermodel_search(phi, max_nodes, algebras, cap=None, seed=0) -> SearchResult:
    """First frame/valuation/node refuting phi, or an exhaustion report."""
    if isinstance(phi, str):
        phi = parse(phi)
    count = 0
    sampled = False
    for frame in frame_family(max_nodes, algebras):
        count += 1
        res = frame_valid(frame, phi, cap=cap, seed=seed, sample=True)
        sampled |= not res.exhaustive
        if not res.valid:
            model = RelationalModel(frame, res.valuation)
            if forces(model, res.node, phi):
                raise ConsistencyError("reported countermodel forces the formula")
            return SearchResult(render(phi), True, count, res, sampled)
    return SearchResult(render(phi), False, count, None, sampled)


# ---------------------------------------------------------------- Kripke frames

def _require_two_valued(frame):
    for name, A in zip(frame.poset.names, frame.algebras):
        if A.size != 2:
            raise PreconditionError(f"node {name} is not two-valued")


def kripke_bridge(frame, upsets):
    """Valuation sending each variable to the indicator of its up-set."""
    _require_two_valued(frame)
    P = frame.poset
    out = {}
    for name, S in upsets.items():
        S = {P.index(s) for s in S}
        if not is_upset(P, S):
            raise FormatError(f"the set for {name} is not an up-set")
        out[name] = tuple(
            int(frame.tops[x] if x in S else frame.bottoms[x]) for x in range(frame.size)
        )
    return out


def kripke_upsets(frame, valuation):
    """Inverse of :func:`kripke_bridge`: the top-set of each labeling."""
    _require_two_valued(frame)
    P = frame.poset
    return {
        name: frozenset(P.names[x] for x in range(frame.size) if f[x] == frame.tops[x])
        for name, f in valuation.items()
    }


def kripke_forces(P, upsets, x, phi):
    """Intuitionistic forcing with persistent atoms; * is read as &."""
    if isinstance(phi, str):
        phi = parse(phi)
    sets = {n: {P.index(s) for s in S} for n, S in upsets.items()}

    def truth(s):
        """Set of nodes forcing s."""
        if isinstance(s, Var):
            return sets[s.name]
        if isinstance(s, Const):
            return set(range(P.size)) if s.value == 1 else set()
        a, b = truth(s.left), truth(s.right)
        if s.op in ("meet", "prod"):
            return a & b
        if s.op == "join":
            return a | b
        return {w for w in range(P.size) if all(u not in a or u in b for u in P.up(w))}

    return P.index(x) in truth(phi)


def all_upsets(P):
    out = []
    for bits in range(1 << P.size):
        S = {i for i in range(P.size) if bits >> i & 1}
        if is_upset(P, S):
            out.append(frozenset(P.names[i] for i in sorted(S)))
    return out


# ---------------------------------------------------------------- temporal flows

@dataclass
class TemporalFlow:
    poset: object
    labels: tuple

    def __post_init__(self):
        self.labels = tuple(int(v) for v in self.labels)
        if len(self.labels) != self.poset.size:
            raise FormatError("one label per node is required")
        if any(v < 2 for v in self.labels):
            raise UnsupportedError("labels must be at least 2")


def flow_of(frame):
    """The temporal flow of a frame valued in Lukasiewicz chains."""
    labels = []
    for A in frame.algebras:
        lukasiewicz_coordinates(A)
        labels.append(A.size)
    return TemporalFlow(frame.poset, labels)


def check_temporal_assignment(flow, v):
    """Raise FormatError unless v (keys (var, node index)) is a temporal assignment."""
    P = flow.poset
    names = sorted({p for p, _ in v})
    for p in names:
        vals = []
        for t in range(P.size):
            if (p, t) not in v:
                raise FormatError(f"no value for {p} at {P.names[t]}")
            a = Fraction(v[(p, t)])
            k = flow.labels[t]
            if not (0 <= a <= 1 and (a * (k - 1)).denominator == 1):
                raise FormatError(f"{p} at {P.names[t]}: {a} is not in L{k}")
            vals.append(a)
        for t in range(P.size):
            for u in P.strict_above[t]:
                if vals[t] > vals[u]:
                    raise FormatError(f"{p} decreases from {P.names[t]} to {P.names[u]}")
                if 0 < vals[t] < 1 and 0 < vals[u] < 1:
                    raise FormatError(f"{p} is strictly between 0 and 1 at comparable {P.names[t]}, {P.names[u]}")


TEMPORAL_OPS = {"prod", "impl"}


def temporal_values(flow, v, phi):
    """v(phi, t) at every node t, by the piecewise clauses."""
    if isinstance(phi, str):
        phi = parse(phi)
    bad = connectives(phi) - TEMPORAL_OPS
    if bad or any(s == ONE for s in _atoms(phi)):
        raise UnsupportedError("temporal evaluation covers only *, -> and 0")
    P = flow.poset
    n = P.size

    def ev(s):
        if isinstance(s, Var):
            try:
                return [Fraction(v[(s.name, t)]) for t in range(n)]
            except KeyError:
                raise FormatError(f"unassigned variable {s.name!r}") from None
        if isinstance(s, Const):
            return [Fraction(0)] * n
        a, b = ev(s.left), ev(s.right)
        if s.op == "prod":
            return [max(Fraction(0), a[t] + b[t] - 1) for t in range(n)]
        out = []
        for t in range(n):
            if all(a[u] <= b[u] for u in P.up(t)):
                out.append(Fraction(1))
            elif b[t] < a[t] < 1 and all(b[u] == 1 for u in P.strict_above[t]):
                out.append(min(Fraction(1), 1 - a[t] + b[t]))
            else:
                out.append(b[t])
        return out

    return ev(phi)


def _atoms(t):
    if isinstance(t, Binary):
        return _atoms(t.left) + _atoms(t.right)
    return [t]


def temporal_eval(flow, v, t, phi):
    return temporal_values(flow, v, phi)[flow.poset.index(t)]


def _coordinates(frame):
    return flow_of(frame), [lukasiewicz_coordinates(A) for A in frame.algebras]


def _crosscheck(frame, flow, coords, valuation, phi):
    v = {(p, x): coords[x][f[x]] for p, f in valuation.items() for x in range(frame.size)}
    check_temporal_assignment(flow, v)
    temporal = temporal_values(flow, v, phi)
    arrays = {n: np.array(f, dtype=np.int64) for n, f in valuation.items()}
    ext = _extend(frame, arrays, phi, ())
    relational = [coords[x][int(ext[x])] for x in range(frame.size)]
    if temporal != relational:
        raise ConsistencyError(f"temporal {temporal} and relational {relational} values differ for {render(phi)}")
    return relational


def temporal_crosscheck(frame, valuation, phi):
    """Compare the temporal value with the forcing value at every node."""
    if isinstance(phi, str):
        phi = parse(phi)
    flow, coords = _coordinates(frame)
    model = RelationalModel(frame, valuation)
    relational = _crosscheck(frame, flow, coords, model.valuation, phi)
    return {
        "formula": render(phi),
        "agree": True,
        "values": {frame.poset.names[x]: str(relational[x]) for x in range(frame.size)},
    }


def all_valuations(frame, names, labelings=None):
    labelings = labelings if labelings is not None else enumerate_ac_labelings(frame)
    for combo in itertools.product(labelings, repeat=len(names)):
        yield dict(zip(names, combo))


def temporal_crosscheck_all(frame, phi, cap=None):
    """Cross-check every valuation of phi's variables; returns the count."""
    if isinstance(phi, str):
        phi = parse(phi)
    names = variables(phi)
    labelings = enumerate_ac_labelings(frame)
    total = len(labelings) ** len(names)
    if total > eval_cap(cap):
        raise SizeError(f"{total} valuations exceed the evaluation cap")
    flow, coords = _coordinates(frame)
    count = 0
    for val in all_valuations(frame, names, labelings):
        _crosscheck(frame, flow, coords, val, phi)
        count += 1
    return count


# ---------------------------------------------------------------- soundness instances

def _memo_classify(cache, A):
    key = id(A)
    if key not in cache:
        c = classify(A)
        cache[key] = (A, c.is_mv and c.is_chain)
    return cache[key][1]


@dataclass
class Axiom:
    name: str
    equation: Equation
    hypothesis: str
    applies: object = field(repr=False)

    @property
    def formula(self):
        return self.equation.as_formula()


def standard_axioms(potencies=(1, 2, 3)):
    cache = {}

    def mv_chains(F):
        return all(_memo_classify(cache, A) for A in F.algebras)

    def two_valued(F):
        return all(A.size == 2 for A in F.algebras)

    out = [
        Axiom("divisibility", parse_equation("x * (x -> y) = x & y"), "MV-chain-valued", mv_chains),
        Axiom("prelinearity", parse_equation("(x -> y) | (y -> x) = 1"), "root system, MV-chain-valued",
              lambda F: is_root_system(F.poset) and mv_chains(F)),
        Axiom("idempotence", parse_equation("x * x = x"), "two-valued", two_valued),
        Axiom("godel", parse_equation("(x * x <-> x) & ((x -> y) | (y -> x)) = 1"), "root system, two-valued",
              lambda F: is_root_system(F.poset) and two_valued(F)),
    ]
    for k in potencies:
        eq = Equation(_power(k + 1), _power(k))
        out.append(Axiom(f"potency{k}", eq, f"valued in L_m with m <= {k + 1}",
                         lambda F, k=k: mv_chains(F) and all(A.size <= k + 1 for A in F.algebras)))
    return out


def _power(k):
    return power(Var("x"), k)


def soundness_instance_suite(frames, axioms=None, cap=None):
    """Frame validity of each axiom on each frame in its hypothesis class.

    A failure inside the class raises :class:`ConsistencyError`; frames
    outside the class are reported as skipped.
    """
    axioms = axioms if axioms is not None else standard_axioms()
    rows = []
    for F in frames:
        P = None
        for ax in axioms:
            if not ax.applies(F):
                rows.append({"frame": F.describe(), "axiom": ax.name, "status": "skipped"})
                continue
            P = P or build_poset_product(F)
            res = frame_valid(F, ax.formula, cap=cap, product=P)
            if not res.valid:
                raise ConsistencyError(
                    f"{ax.name} fails on {F.describe()} at node {res.node} ({ax.hypothesis})"
                )
            rows.append({"frame": F.describe(), "axiom": ax.name, "status": "valid"})
    summary = {
        "valid": sum(r["status"] == "valid" for r in rows),
        "skipped": sum(r["status"] == "skipped" for r in rows),
        "violations": 0,
    }
    return {"summary": summary, "rows": rows}


def frame_kind(frame):
    """Short classification of a frame's base poset."""
    if poset_is_chain(frame.poset):
        return "chain"
    if is_root_system(frame.poset):
        return "root system"
    return "poset"
