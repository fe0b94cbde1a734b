"""Finite bounded commutative integral residuated lattices as operation tables.

Elements are dense indices ``0..n-1``.  The order is never stored: ``x <= y``
iff ``meet[x, y] == x``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import ConsistencyError, FormatError, PreconditionError, SizeError, UnsupportedError, carrier_cap, eval_cap
from .syntax import assignment_chunks, decode_assignment, evaluate_term, parse_equation

TABLES = ("meet", "join", "prod", "impl")


class FiniteResiduatedLattice:
    """Operation tables plus designated bottom and top.

    The constructor only checks shapes and index ranges; use
    :func:`validate_algebra` for the axioms.
    """

    def __init__(self, size, meet, join, prod, impl, bottom, top, name=None):
        try:
            size = int(size)
        except (TypeError, ValueError):
            raise FormatError(f"size must be an integer, got {size!r}") from None
        if size < 1:
            raise FormatError("size must be positive")
        self.size = size
        for label, raw in zip(TABLES, (meet, join, prod, impl)):
            try:
                arr = np.array(raw, dtype=np.int64)
            except (TypeError, ValueError):
                raise FormatError(f"{label} table is not a rectangular integer array") from None
            if arr.shape != (size, size):
                raise FormatError(f"{label} table has shape {arr.shape}, expected {(size, size)}")
            if arr.size and (arr.min() < 0 or arr.max() >= size):
                raise FormatError(f"{label} table has entries outside 0..{size - 1}")
            arr.setflags(write=False)
            setattr(self, label, arr)
        for label, v in (("bottom", bottom), ("top", top)):
            if not isinstance(v, (int, np.integer)) or not 0 <= v < size:
                raise FormatError(f"{label} must be an element index in 0..{size - 1}")
        self.bottom = int(bottom)
        self.top = int(top)
        self.name = name

    def table(self, op):
        return getattr(self, op)

    @cached_property
    def order(self):
        """Boolean matrix, ``order[x, y]`` iff ``x <= y``."""
        o = self.meet == np.arange(self.size)[:, None]
        o.setflags(write=False)
        return o

    def leq(self, x, y):
        return leq(self, x, y)

    def same_tables(self, other):
        return (
            self.size == other.size
            and self.bottom == other.bottom
            and self.top == other.top
            and all(np.array_equal(self.table(t), other.table(t)) for t in TABLES)
        )

    def to_dict(self):
        return {
            "size": self.size,
            **{t: self.table(t).tolist() for t in TABLES},
            "bottom": self.bottom,
            "top": self.top,
        }

    def __repr__(self):
        label = self.name or "algebra"
        return f"<{label}: {self.size} elements>"


def leq(A, x, y):
    for v in (x, y):
        if not 0 <= v < A.size:
            raise IndexError(f"element {v} out of range 0..{A.size - 1}")
    return bool(A.meet[x, y] == x)


def from_dict(data, name=None):
    """Build from the JSON algebra schema (no axiom check)."""
    if not isinstance(data, dict):
        raise FormatError("algebra JSON must be an object")
    missing = [k for k in ("size", *TABLES, "bottom", "top") if k not in data]
    if missing:
        raise FormatError(f"algebra JSON is missing {', '.join(missing)}")
    return FiniteResiduatedLattice(
        data["size"], data["meet"], data["join"], data["prod"], data["impl"],
        data["bottom"], data["top"], name=name,
    )


# ---------------------------------------------------------------- validation

@dataclass
class ValidationReport:
    ok: bool
    axiom: str | None = None
    witness: dict | None = None
    residuation_forall: bool | None = None
    residuation_equations: bool | None = None
    equation_failure: dict | None = field(default=None, repr=False)

    def as_dict(self):
        return {
            "ok": self.ok,
            "axiom": self.axiom,
            "witness": self.witness,
            "residuation_forall": self.residuation_forall,
            "residuation_equations": self.residuation_equations,
        }


def _first(mask):
    """Lowest multi-index where *mask* holds, or None."""
    flat = np.flatnonzero(mask)
    if flat.size == 0:
        return None
    return tuple(int(i) for i in np.unravel_index(flat[0], mask.shape))


def _pairs_fail(lhs, rhs, names=("x", "y")):
    w = _first(lhs != rhs)
    return None if w is None else dict(zip(names, w))


def _lattice_and_monoid(A):
    """First failing (axiom, witness) among the lattice and monoid laws."""
    n = A.size
    m, j, p = A.meet, A.join, A.prod
    idx = np.arange(n)
    checks = [
        ("meet commutative", lambda: _pairs_fail(m, m.T)),
        ("join commutative", lambda: _pairs_fail(j, j.T)),
        ("meet idempotent", lambda: _pairs_fail(m[idx, idx], idx, ("x",))),
        ("join idempotent", lambda: _pairs_fail(j[idx, idx], idx, ("x",))),
        ("absorption x&(x|y)=x", lambda: _pairs_fail(m[idx[:, None], j], np.broadcast_to(idx[:, None], (n, n)))),
        ("absorption x|(x&y)=x", lambda: _pairs_fail(j[idx[:, None], m], np.broadcast_to(idx[:, None], (n, n)))),
        ("bottom is least", lambda: _pairs_fail(m[A.bottom], np.full(n, A.bottom), ("x",))),
        ("top is greatest", lambda: _pairs_fail(j[A.top], np.full(n, A.top), ("x",))),
        ("prod commutative", lambda: _pairs_fail(p, p.T)),
        ("top is the unit of prod", lambda: _pairs_fail(p[A.top], idx, ("x",))),
    ]
    for name, check in checks:
        w = check()
        if w is not None:
            return name, w
    for name, tab in (("meet associative", m), ("join associative", j), ("prod associative", p)):
        for x in range(n):
            # (x.y).z vs x.(y.z) over all y,z
            w = _first(tab[tab[x][:, None], idx[None, :]] != tab[x][tab])
            if w is not None:
                return name, {"x": x, "y": w[0], "z": w[1]}
    return None


def residuation_forall(A):
    """First (x, y, z) with ``prod(x,y) <= z`` differing from ``x <= impl(y,z)``."""
    o = A.order
    for x in range(A.size):
        lhs = o[A.prod[x]]  # [y, z]
        rhs = o[x][A.impl]  # [y, z]
        w = _first(lhs != rhs)
        if w is not None:
            return {"x": x, "y": w[0], "z": w[1]}
    return None


RESIDUATION_EQUATIONS = (
    "x * (y | z) = x * y | x * z",
    "x -> y & z = (x -> y) & (x -> z)",
    "x * (x -> y) | y = y",
    "(x -> x * y) & y = y",
)


def residuation_equations(A, cap=None):
    """First failing equation of the equational residuation basis, or None.

    The default cap admits every triple, matching the cost of the biconditional.
    """
    cap = cap if cap is not None else max(eval_cap(), A.size ** 3)
    for text in RESIDUATION_EQUATIONS:
        res = check_equation(A, parse_equation(text), cap)
        if not res.valid:
            return {"equation": text, "assignment": res.counter}
    return None


def validate_algebra(A) -> ValidationReport:
    """Check the bounded-lattice, monoid and residuation axioms.

    Residuation is checked twice, by the biconditional over all triples and
    by the four-equation basis; if the lattice and monoid laws hold the two
    must agree, otherwise :class:`ConsistencyError`.
    """
    if isinstance(A, dict):
        A = from_dict(A)
    bad = _lattice_and_monoid(A)
    if bad is not None:
        return ValidationReport(False, bad[0], bad[1])
    forall = residuation_forall(A)
    eqs = residuation_equations(A)
    if (forall is None) != (eqs is None):
        raise ConsistencyError(
            f"residuation checks disagree: biconditional {forall}, equations {eqs}"
        )
    if forall is not None:
        return ValidationReport(False, "residuation", forall, False, False, eqs)
    return ValidationReport(True, residuation_forall=True, residuation_equations=True)


def require_valid(A):
    rep = validate_algebra(A)
    if not rep.ok:
        raise FormatError(f"not a residuated lattice: {rep.axiom} fails at {rep.witness}")
    return A


# ---------------------------------------------------------------- constructions

def lukasiewicz_chain(k) -> FiniteResiduatedLattice:
    """The k-element Lukasiewicz chain, element i standing for i/(k-1)."""
    if k < 2:
        raise UnsupportedError("Lukasiewicz chains are built for k >= 2 only")
    top = k - 1
    i = np.arange(k)[:, None]
    j = np.arange(k)[None, :]
    return FiniteResiduatedLattice(
        k,
        np.minimum(i, j),
        np.maximum(i, j),
        np.maximum(0, i + j - top),
        np.minimum(top, top - i + j),
        0,
        top,
        name=f"L{k}",
    )


def lukasiewicz_value(k, i):
    return Fraction(i, k - 1)


def heyting_chain(n) -> FiniteResiduatedLattice:
    """The n-element Goedel (Heyting) chain 0 < 1 < ... < n-1."""
    top = n - 1
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    m = np.minimum(i, j)
    return FiniteResiduatedLattice(
        n, m, np.maximum(i, j), m, np.where(i <= j, top, np.broadcast_to(j, (n, n))), 0, top, name=f"G{n}"
    )


def direct_product(As, cap=None) -> FiniteResiduatedLattice:
    """Componentwise product.

    Element codes are mixed radix with the first factor most significant:
    the tuple ``(a_0, ..., a_{k-1})`` has index ``sum a_i * w_i`` with
    ``w_{k-1} = 1`` and ``w_i = w_{i+1} * |A_{i+1}|``.
    """
    As = list(As)
    if not As:
        raise PreconditionError("direct product of an empty list")
    sizes = [A.size for A in As]
    total = int(np.prod(sizes))
    if total > carrier_cap(cap):
        raise SizeError(f"product has {total} elements, cap is {carrier_cap(cap)}")
    digits = product_digits(sizes)
    weights = radix_weights(sizes)
    tables = {}
    for op in TABLES:
        code = np.zeros((total, total), dtype=np.int64)
        for i, A in enumerate(As):
            d = digits[:, i]
            code += A.table(op)[d[:, None], d[None, :]] * weights[i]
        tables[op] = code
    bottom = int(sum(A.bottom * w for A, w in zip(As, weights)))
    top = int(sum(A.top * w for A, w in zip(As, weights)))
    name = "x".join(A.name or "?" for A in As)
    return FiniteResiduatedLattice(total, tables["meet"], tables["join"], tables["prod"], tables["impl"],
                                   bottom, top, name=name)


def radix_weights(sizes):
    w = [1] * len(sizes)
    for i in range(len(sizes) - 2, -1, -1):
        w[i] = w[i + 1] * sizes[i + 1]
    return w


def product_digits(sizes):
    """All tuples in mixed-radix order, as an (N, k) array."""
    total = int(np.prod(sizes))
    idx = np.arange(total, dtype=np.int64)
    out = np.empty((total, len(sizes)), dtype=np.int64)
    for i, w in enumerate(radix_weights(sizes)):
        out[:, i] = (idx // w) % sizes[i]
    return out


def induced_algebra(A, elements, top=None, bottom=None, name=None, wrap=None):
    """Restrict A's tables to *elements* (sorted), re-indexed.

    *wrap*, if given, is a map applied to meet and impl results before
    re-indexing (used for conuclear images).
    """
    elements = sorted(int(e) for e in elements)
    pos = np.full(A.size, -1, dtype=np.int64)
    pos[elements] = np.arange(len(elements))
    sub = np.array(elements, dtype=np.int64)
    tables = {}
    for op in TABLES:
        t = A.table(op)[sub[:, None], sub[None, :]]
        if wrap is not None and op in ("meet", "impl"):
            t = wrap[t]
        r = pos[t]
        if (r < 0).any():
            raise ConsistencyError(f"{op} leaves the subset")
        tables[op] = r
    bottom = A.bottom if bottom is None else bottom
    top = A.top if top is None else top
    if pos[bottom] < 0 or pos[top] < 0:
        raise ConsistencyError("bottom or top not in the subset")
    return FiniteResiduatedLattice(len(elements), tables["meet"], tables["join"], tables["prod"],
                                   tables["impl"], int(pos[bottom]), int(pos[top]), name=name)


def generated_subalgebra(A, seed):
    """Least subuniverse containing *seed*, bottom and top.

    Returns ``(elements, algebra)`` with *elements* sorted.
    """
    members = {A.bottom, A.top, *(int(s) for s in seed)}
    frontier = list(members)
    while frontier:
        new = []
        cur = list(members)
        for a in frontier:
            for b in cur:
                for op in TABLES:
                    tab = A.table(op)
                    for c in (int(tab[a, b]), int(tab[b, a])):
                        if c not in members:
                            members.add(c)
                            new.append(c)
        frontier = new
    elements = sorted(members)
    return elements, induced_algebra(A, elements)


# ---------------------------------------------------------------- equations

@dataclass
class EquationResult:
    valid: bool
    counter: dict | None = None
    checked: int = 0

    def __bool__(self):
        return self.valid


def check_equation(A, eq, cap=None) -> EquationResult:
    """Exhaustive validity of *eq* (an :class:`Equation` or its text).

    On failure *counter* is the assignment with the lowest mixed-radix
    index (variables sorted, first most significant).
    """
    if isinstance(eq, str):
        eq = parse_equation(eq)
    names = eq.variables()
    checked = 0
    for start, digits in assignment_chunks(A.size, names, cap):
        lhs = evaluate_term(A, digits, eq.lhs)
        rhs = evaluate_term(A, digits, eq.rhs)
        count = len(next(iter(digits.values()))) if digits else 1
        lhs = np.broadcast_to(lhs, (count,))
        rhs = np.broadcast_to(rhs, (count,))
        if eq.kind == "leq":
            bad = ~A.order[lhs, rhs]
        else:
            bad = lhs != rhs
        checked += count
        hit = np.flatnonzero(bad)
        if hit.size:
            return EquationResult(False, decode_assignment(A.size, names, start + int(hit[0])), checked)
    return EquationResult(True, None, checked)


# ---------------------------------------------------------------- classification

DIVISIBILITY = parse_equation("x * (x -> y) = x & y")
PRELINEARITY = parse_equation("(x -> y) | (y -> x) = 1")
INVOLUTION = parse_equation("x = (x -> 0) -> 0")
IDEMPOTENCE = parse_equation("x * x = x")


@dataclass(frozen=True)
class Classification:
    is_gbl: bool
    is_bl: bool
    is_mv: bool
    is_heyting: bool
    is_godel: bool
    is_boolean: bool
    is_chain: bool
    potency: int | None

    def as_dict(self):
        return dict(self.__dict__)


def is_chain(A):
    o = A.order
    return bool((o | o.T).all())


def is_distributive(A):
    """x & (y | z) = (x & y) | (x & z) over all triples."""
    m, j = A.meet, A.join
    for x in range(A.size):
        if not np.array_equal(m[x][j], j[m[x][:, None], m[x][None, :]]):
            return False
    return True


def potency(A):
    """Least k >= 1 with x^(k+1) = x^k for every x, searched up to |A|."""
    idx = np.arange(A.size)
    cur = idx.copy()  # x^k
    for k in range(1, A.size + 1):
        nxt = A.prod[cur, idx]
        if np.array_equal(nxt, cur):
            return k
        cur = nxt
    return None


def classify(A) -> Classification:
    gbl = check_equation(A, DIVISIBILITY).valid
    prelin = check_equation(A, PRELINEARITY).valid
    invol = check_equation(A, INVOLUTION).valid
    idem = check_equation(A, IDEMPOTENCE).valid
    bl = gbl and prelin
    heyting = gbl and idem
    return Classification(
        is_gbl=gbl,
        is_bl=bl,
        is_mv=bl and invol,
        is_heyting=heyting,
        is_godel=heyting and prelin,
        is_boolean=heyting and invol,
        is_chain=is_chain(A),
        potency=potency(A),
    )


# ---------------------------------------------------------------- morphisms

def ranks(A):
    """Length of the longest chain from bottom to each element."""
    o = A.order
    lt = o & ~np.eye(A.size, dtype=bool)
    r = np.zeros(A.size, dtype=np.int64)
    # elements sorted by number of elements below is a linear extension
    for x in np.argsort(o.sum(axis=0), kind="stable"):
        below = np.flatnonzero(lt[:, x])
        if below.size:
            r[x] = r[below].max() + 1
    return r


def is_homomorphism(A, B, f):
    f = np.asarray(f, dtype=np.int64)
    if f.shape != (A.size,) or f.min() < 0 or f.max() >= B.size:
        return False
    if f[A.bottom] != B.bottom or f[A.top] != B.top:
        return False
    for op in TABLES:
        if not np.array_equal(f[A.table(op)], B.table(op)[f[:, None], f[None, :]]):
            return False
    return True


MODES = ("hom", "embedding", "isomorphism")


def morphism_search(A, B, mode="hom", cap=None, candidate=None):
    """First map A -> B preserving all operations and constants, or None.

    Elements of A are assigned in index order; each choice is propagated
    through the tables so that only generators are ever branched on.
    """
    if mode not in MODES:
        raise PreconditionError(f"mode must be one of {MODES}")
    if A.size > carrier_cap(cap):
        raise SizeError(f"morphism search domain has {A.size} elements, cap is {carrier_cap(cap)}")
    injective = mode != "hom"
    if mode == "embedding" and A.size > B.size:
        return None
    if mode == "isomorphism" and A.size != B.size:
        return None

    def acceptable(f):
        if not is_homomorphism(A, B, f):
            return False
        return not injective or len(set(f)) == len(f) and (mode != "isomorphism" or len(f) == B.size)

    if candidate is not None and acceptable(candidate):
        return [int(v) for v in candidate]

    ra, rb = ranks(A), ranks(B)
    idem_a = A.prod[np.arange(A.size), np.arange(A.size)] == np.arange(A.size)
    idem_b = B.prod[np.arange(B.size), np.arange(B.size)] == np.arange(B.size)
    tabs = [(A.table(op), B.table(op)) for op in TABLES]

    def candidates(a):
        out = []
        for b in range(B.size):
            if idem_a[a] and not idem_b[b]:
                continue
            if mode == "isomorphism" and (ra[a] != rb[b] or idem_a[a] != idem_b[b]):
                continue
            if mode == "embedding" and rb[b] < ra[a]:
                continue
            out.append(b)
        return out

    def assign(f, used, done, a, b):
        """Set f[a]=b and propagate; returns False on conflict."""
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            if f[x] >= 0:
                if f[x] != y:
                    return False
                continue
            if injective and y in used:
                return False
            f[x] = y
            used.add(y)
            done.append(x)
            for z in done:
                for ta, tb in tabs:
                    for u, v in ((x, z), (z, x)):
                        c = ta[u, v]
                        want = int(tb[f[u], f[v]])
                        if f[c] < 0:
                            stack.append((int(c), want))
                        elif f[c] != want:
                            return False
        return True

    f0, used0, done0 = [-1] * A.size, set(), []
    if not assign(f0, used0, done0, A.bottom, B.bottom) or not assign(f0, used0, done0, A.top, B.top):
        return None

    def search(f, used, done):
        try:
            a = f.index(-1)
        except ValueError:
            return f if acceptable(f) else None
        for b in candidates(a):
            g, u, d = list(f), set(used), list(done)
            if assign(g, u, d, a, b):
                out = search(g, u, d)
                if out is not None:
                    return out
        return None

    return search(f0, used0, done0)


# ---------------------------------------------------------------- conuclei

@dataclass
class Conucleus:
    base: FiniteResiduatedLattice
    map: tuple


CONUCLEUS_CONDITIONS = (
    "deflationary",
    "idempotent",
    "monotone",
    "submultiplicative",
    "unit",
)


def is_conucleus(A, sigma):
    """``(ok, condition, witness)`` for the five conucleus conditions."""
    s = np.asarray(sigma, dtype=np.int64)
    if s.shape != (A.size,) or s.min() < 0 or s.max() >= A.size:
        raise FormatError("conucleus map must be a total map on the carrier")
    idx = np.arange(A.size)
    o = A.order
    w = _first(~o[s, idx])
    if w is not None:
        return False, "deflationary", {"x": w[0]}
    w = _first(s[s] != s)
    if w is not None:
        return False, "idempotent", {"x": w[0]}
    w = _first(o & ~o[s[:, None], s[None, :]])
    if w is not None:
        return False, "monotone", {"x": w[0], "y": w[1]}
    w = _first(~o[A.prod[s[:, None], s[None, :]], s[A.prod]])
    if w is not None:
        return False, "submultiplicative", {"x": w[0], "y": w[1]}
    w = _first(A.prod[s[A.top], s] != s)
    if w is not None:
        return False, "unit", {"x": w[0]}
    return True, None, None


def conuclear_image(A, sigma, name=None) -> FiniteResiduatedLattice:
    """Fixpoints of sigma with meet and impl followed by sigma; top is sigma(top)."""
    if isinstance(sigma, Conucleus):
        sigma = sigma.map
    s = np.asarray(sigma, dtype=np.int64)
    ok, cond, wit = is_conucleus(A, s)
    if not ok:
        raise PreconditionError(f"not a conucleus: {cond} fails at {wit}")
    fixed = np.flatnonzero(s == np.arange(A.size))
    return induced_algebra(A, fixed, top=int(s[A.top]), bottom=A.bottom, wrap=s, name=name)


# ---------------------------------------------------------------- loading

BUILTIN_MAX = 64


def _builtin_chain(name):
    if len(name) > 1 and name[0] in "LG" and name[1:].isdigit():
        k = int(name[1:])
        if 2 <= k <= BUILTIN_MAX:
            return lukasiewicz_chain(k) if name[0] == "L" else heyting_chain(k)
    return None


def builtin(name):
    """``Lk`` / ``Gk`` chains (2 <= k <= 64) and products like ``L2xL3``; else None."""
    if not isinstance(name, str):
        return None
    parts = [_builtin_chain(p) for p in name.split("x")]
    if not parts or any(p is None for p in parts):
        return None
    if len(parts) == 1:
        return parts[0]
    A = direct_product(parts)
    A.name = name
    return A


def resolve_algebra(spec, validate=True):
    """A builtin name, a path to a JSON file, or an inline dict."""
    if isinstance(spec, FiniteResiduatedLattice):
        return spec
    if isinstance(spec, dict):
        A = from_dict(spec)
    else:
        A = builtin(spec)
        if A is not None:
            return A
        try:
            with open(spec, encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise FormatError(f"no builtin algebra or file named {spec!r}") from None
        except json.JSONDecodeError as exc:
            raise FormatError(f"{spec}: invalid JSON ({exc})") from None
        A = from_dict(data, name=str(spec))
    if validate:
        require_valid(A)
    return A


def lukasiewicz_coordinates(A):
    """Map each element of A to its value in [0,1] if A is a Lukasiewicz chain."""
    iso = morphism_search(A, lukasiewicz_chain(A.size), "isomorphism") if A.size >= 2 else None
    if iso is None:
        raise PreconditionError(f"{A!r} is not a Lukasiewicz chain")
    return [Fraction(v, A.size - 1) for v in iso]

