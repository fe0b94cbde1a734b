"""Terms over {&, |, *, ->, 0, 1}: parsing, printing, evaluation, polarity classes.

Grammar, loosest binding first::

    formula := equiv
    equiv   := impl ( '<->' impl )?            sugar for (a->b)&(b->a)
    impl    := join ( '->' impl )?             right associative
    join    := meet ( '|' meet )*              left associative
    meet    := prod ( '&' prod )*              left associative
    prod    := unary ( '*' unary )*            left associative
    unary   := '~' unary | atom                ~a is sugar for a->0
    atom    := '0' | '1' | ident | '(' formula ')'

Unicode input aliases: ∧ ∨ · → ↔ ¬ ⊢ ≤.  Output is always ASCII.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConsistencyError, FormatError, SizeError, eval_cap

OPS = ("meet", "join", "prod", "impl")
SYMBOL = {"meet": "&", "join": "|", "prod": "*", "impl": "->"}
# larger binds tighter
PRECEDENCE = {"impl": 1, "join": 2, "meet": 3, "prod": 4}


class Term:
    """Base class of the immutable term AST.

    Python operators build terms: ``&`` meet, ``|`` join, ``*`` product,
    ``>>`` implication.
    """

    __slots__ = ()

    def __and__(self, other):
        return Binary("meet", self, other)

    def __or__(self, other):
        return Binary("join", self, other)

    def __mul__(self, other):
        return Binary("prod", self, other)

    def __rshift__(self, other):
        return Binary("impl", self, other)

    def __str__(self):
        return render(self)


@dataclass(frozen=True, slots=True)
class Var(Term):
    name: str


@dataclass(frozen=True, slots=True)
class Const(Term):
    value: int  # 0 or 1


@dataclass(frozen=True, slots=True)
class Binary(Term):
    op: str
    left: Term
    right: Term


ZERO = Const(0)
ONE = Const(1)


def neg(t):
    return Binary("impl", t, ZERO)


def equiv(t, u):
    return Binary("meet", Binary("impl", t, u), Binary("impl", u, t))


def power(t, k):
    """``t*t*...*t`` (k factors); the empty product is 1."""
    if k == 0:
        return ONE
    out = t
    for _ in range(k - 1):
        out = Binary("prod", out, t)
    return out


def variables(t):
    """Variable names of *t*, sorted."""
    seen = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            seen.add(s.name)
        elif isinstance(s, Binary):
            stack.append(s.left)
            stack.append(s.right)
    return sorted(seen)


def subterms(t) -> Iterator[Term]:
    """Post-order traversal."""
    if isinstance(t, Binary):
        yield from subterms(t.left)
        yield from subterms(t.right)
    yield t


def connectives(t):
    return {s.op for s in subterms(t) if isinstance(s, Binary)}


def depth(t):
    if isinstance(t, Binary):
        return 1 + max(depth(t.left), depth(t.right))
    return 0


# ---------------------------------------------------------------- parsing

_ALIASES = [
    ("∧", "&"), ("∨", "|"), ("·", "*"), ("⋅", "*"), ("→", "->"),
    ("↔", "<->"), ("¬", "~"), ("⊢", "|-"), ("≤", "<="), ("≡", "="),
]

_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|\|-|<=|[&|*~()=,])|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<const>[01](?![0-9])))"
)


def _normalize(text):
    for a, b in _ALIASES:
        text = text.replace(a, b)
    return text


def tokenize(text):
    """Return a list of ``(kind, value, position)`` tokens."""
    text = _normalize(text)
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormatError(f"unexpected character {text[col]!r} at position {col}")
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None):
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            raise FormatError(f"expected {value!r} at position {tok[2]}, got {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def at(self, value):
        tok = self.tokens[self.i]
        return tok[0] == "op" and tok[1] == value

    def formula(self):
        left = self.impl()
        if self.at("<->"):
            self.take()
            return equiv(left, self.impl())
        return left

    def impl(self):
        left = self.join()
        if self.at("->"):
            self.take()
            return Binary("impl", left, self.impl())
        return left

    def _left_assoc(self, sym, op, sub):
        t = sub()
        while self.at(sym):
            self.take()
            t = Binary(op, t, sub())
        return t

    def join(self):
        return self._left_assoc("|", "join", self.meet)

    def meet(self):
        return self._left_assoc("&", "meet", self.prod)

    def prod(self):
        return self._left_assoc("*", "prod", self.unary)

    def unary(self):
        if self.at("~"):
            self.take()
            return neg(self.unary())
        return self.atom()

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "const":
            self.take()
            return ONE if value == "1" else ZERO
        if kind == "ident":
            self.take()
            return Var(value)
        if kind == "op" and value == "(":
            self.take()
            t = self.formula()
            self.take(")")
            return t
        raise FormatError(f"expected a term at position {pos}, got {value or 'end of input'!r}")

    def done(self):
        kind, value, pos = self.peek()
        if kind != "end":
            raise FormatError(f"unexpected {value!r} at position {pos}")


def parse(text) -> Term:
    """Parse one formula.  Raises :class:`FormatError` with a position."""
    p = _Parser(text)
    t = p.formula()
    p.done()
    return t


def render(t) -> str:
    """Canonical ASCII rendering with minimal parentheses."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return str(t.value)
    prec = PRECEDENCE[t.op]
    left, right = render(t.left), render(t.right)
    if isinstance(t.left, Binary):
        lp = PRECEDENCE[t.left.op]
        # -> is right associative, the others left associative
        if lp < prec or (lp == prec and t.op == "impl"):
            left = f"({left})"
    if isinstance(t.right, Binary):
        rp = PRECEDENCE[t.right.op]
        if rp < prec or (rp == prec and t.op != "impl"):
            right = f"({right})"
    return f"{left} {SYMBOL[t.op]} {right}"


# ---------------------------------------------------------------- equations, sequents

@dataclass(frozen=True)
class Equation:
    """``lhs = rhs`` or, with ``kind == "leq"``, ``lhs <= rhs``."""

    lhs: Term
    rhs: Term
    kind: str = "eq"

    def __str__(self):
        sym = "<=" if self.kind == "leq" else "="
        return f"{render(self.lhs)} {sym} {render(self.rhs)}"

    def as_identity(self):
        """The equivalent plain equation (``s <= t`` becomes ``s & t = s``)."""
        if self.kind == "leq":
            return Equation(Binary("meet", self.lhs, self.rhs), self.lhs)
        return self

    def as_formula(self):
        """A term valid (equal to 1 everywhere) exactly when the equation holds."""
        if self.kind == "leq":
            return Binary("impl", self.lhs, self.rhs)
        if self.rhs == ONE:
            return self.lhs
        if self.lhs == ONE:
            return self.rhs
        return equiv(self.lhs, self.rhs)

    def variables(self):
        return sorted(set(variables(self.lhs)) | set(variables(self.rhs)))


@dataclass(frozen=True)
class Sequent:
    premises: tuple
    conclusion: Term

    def __str__(self):
        return f"{', '.join(render(p) for p in self.premises)} |- {render(self.conclusion)}".lstrip()

    def variables(self):
        names = set(variables(self.conclusion))
        for p in self.premises:
            names.update(variables(p))
        return sorted(names)


def _split_top(text, sep):
    """Split on *sep* outside parentheses."""
    parts, depth_, start, i = [], 0, 0, 0
    while i < len(text):
        c = text[i]
        if c == "(":
            depth_ += 1
        elif c == ")":
            depth_ -= 1
        elif depth_ == 0 and text.startswith(sep, i):
            parts.append(text[start:i])
            start = i + len(sep)
            i += len(sep)
            continue
        i += 1
    parts.append(text[start:])
    return parts


def parse_equation(text) -> Equation:
    """``s = t``, ``s <= t``; a bare formula ``s`` means ``s = 1``."""
    text = _normalize(text)
    # <= must not be confused with the <-> token
    masked = text.replace("<->", "\0\0\0")
    if "<=" in masked:
        i = masked.index("<=")
        return Equation(parse(text[:i]), parse(text[i + 2:]), "leq")
    if "=" in masked:
        i = masked.index("=")
        return Equation(parse(text[:i]), parse(text[i + 1:]))
    return Equation(parse(text), ONE)


def parse_sequent(text) -> Sequent:
    """``p, q |- r``; the premise list may be empty."""
    text = _normalize(text)
    if "|-" not in text:
        raise FormatError("a sequent needs '|-'")
    i = text.index("|-")
    head, tail = text[:i], text[i + 2:]
    premises = tuple(parse(p) for p in _split_top(head, ",") if p.strip())
    return Sequent(premises, parse(tail))


def parse_line(text):
    """A formula-file line: sequent if it has ``|-``, otherwise an equation."""
    if "|-" in _normalize(text):
        return parse_sequent(text)
    return parse_equation(text)


def read_formula_file(path):
    """Non-empty, non-comment lines of a UTF-8 formula file, parsed."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                out.append(parse_line(line))
            except FormatError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return out


# ---------------------------------------------------------------- evaluation

def evaluate_term(A, assignment, t):
    """Value of *t* in algebra *A* under *assignment* (name -> element).

    Assignment values may be ints or integer numpy arrays of a common
    shape; the latter evaluates many assignments at once.
    """
    memo = {}

    def ev(s):
        if s in memo:
            return memo[s]
        if isinstance(s, Var):
            try:
                v = assignment[s.name]
            except KeyError:
                raise FormatError(f"unassigned variable {s.name!r}") from None
        elif isinstance(s, Const):
            v = A.top if s.value == 1 else A.bottom
        else:
            v = A.table(s.op)[ev(s.left), ev(s.right)]
        memo[s] = v
        return v

    out = ev(t)
    if isinstance(out, np.integer):
        return int(out)
    return out


def assignment_chunks(n, names, cap=None, chunk=1 << 18):
    """Yield ``(offset, {name: digits})`` over all ``n**len(names)`` assignments.

    Assignment index order is mixed radix, first name most significant.
    """
    total = n ** len(names)
    if total > eval_cap(cap):
        raise SizeError(f"{total} assignments exceed the evaluation cap {eval_cap(cap)}")
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = {}
        rem = idx
        for pos in range(len(names) - 1, -1, -1):
            digits[names[pos]] = rem % n
            rem = rem // n
        yield start, digits


def decode_assignment(n, names, index):
    out = {}
    for pos in range(len(names) - 1, -1, -1):
        out[names[pos]] = index % n
        index //= n
    return {k: out[k] for k in names}


def _to_array(x, like):
    if np.isscalar(x) or np.ndim(x) == 0:
        return np.full(like.shape, x, dtype=np.int64)
    return x


def sequent_consequence(A, s: Sequent, k_max=4, cap=None):
    """Check a sequent in one finite algebra.

    Returns ``{"direct": bool, "local_deduction_k": int | None}``: *direct*
    means every assignment sending all premises to top sends the conclusion
    to top; *local_deduction_k* is the least ``k <= k_max`` for which
    ``p1^k * ... * pn^k -> c = 1`` is valid.
    """
    names = s.variables()
    direct = True
    for _, digits in assignment_chunks(A.size, names, cap):
        like = next(iter(digits.values())) if digits else np.zeros(1, dtype=np.int64)
        ok = np.ones(like.shape, dtype=bool)
        for p in s.premises:
            ok &= _to_array(evaluate_term(A, digits, p), like) == A.top
        concl = _to_array(evaluate_term(A, digits, s.conclusion), like) == A.top
        if np.any(ok & ~concl):
            direct = False
            break
    found = None
    for k in range(k_max + 1):
        body = ONE
        for i, p in enumerate(s.premises):
            body = power(p, k) if i == 0 else Binary("prod", body, power(p, k))
        formula = Binary("impl", body, s.conclusion)
        valid = True
        for _, digits in assignment_chunks(A.size, names, cap):
            like = next(iter(digits.values())) if digits else np.zeros(1, dtype=np.int64)
            if np.any(_to_array(evaluate_term(A, digits, formula), like) != A.top):
                valid = False
                break
        if valid:
            found = k
            break
    if found is not None and not direct:
        raise ConsistencyError(f"local deduction with k={found} holds but direct consequence fails")
    return {"direct": direct, "local_deduction_k": found}


# ---------------------------------------------------------------- polarity hierarchy

LEVEL_CAP = 8


@dataclass(frozen=True)
class HierarchyClass:
    """Least levels n with the term in P_n / N_n (None when above the cap)."""

    p_level: int | None
    n_level: int | None
    in_p2_star: bool
    in_n2_star: bool
    cap: int = LEVEL_CAP

    def in_p(self, n):
        return self.p_level is not None and self.p_level <= n

    def in_n(self, n):
        return self.n_level is not None and self.n_level <= n

    def as_dict(self):
        return {
            "p_level": self.p_level if self.p_level is not None else f">{self.cap}",
            "n_level": self.n_level if self.n_level is not None else f">{self.cap}",
            "in_p2_star": self.in_p2_star,
            "in_n2_star": self.in_n2_star,
        }


def _levels(t, memo):
    """Uncapped (p, n) least levels.

    Positive side closes under |, * ; negative side under & and ->.
    A term of the wrong shape enters the other side one level later.
    """
    if t in memo:
        return memo[t]
    if isinstance(t, Var):
        out = (0, 0)
    elif isinstance(t, Const):
        out = (1, 2) if t.value == 1 else (2, 1)
    else:
        lp, ln = _levels(t.left, memo)
        rp, rn = _levels(t.right, memo)
        if t.op in ("join", "prod"):
            p = max(lp, rp, 1)
            out = (p, p + 1)
        elif t.op == "meet":
            n = max(ln, rn, 1)
            out = (n + 1, n)
        else:
            n = max(lp, rn, 1)
            out = (n + 1, n)
    memo[t] = out
    return out


def _star(t, memo, pmemo):
    """(in P2*, in N2*)."""
    if t in memo:
        return memo[t]
    p, n = _levels(t, pmemo)
    if isinstance(t, Binary):
        lps, lns = _star(t.left, memo, pmemo)
        rps, rns = _star(t.right, memo, pmemo)
    if p <= 2:
        in_p = True
    elif isinstance(t, Binary) and t.op in ("meet", "join", "prod"):
        in_p = lps and rps
    elif isinstance(t, Binary):
        in_p = _levels(t.left, pmemo)[0] <= 1 and rps
    else:
        in_p = False
    if isinstance(t, Const) and t.value == 0 or p <= 1:
        in_n = True
    elif isinstance(t, Binary) and t.op == "meet":
        in_n = lns and rns
    elif isinstance(t, Binary) and t.op == "impl":
        in_n = lps and rns
    else:
        in_n = False
    memo[t] = (in_p, in_n)
    return memo[t]


def classify_hierarchy(t, cap=LEVEL_CAP) -> HierarchyClass:
    pmemo = {}
    p, n = _levels(t, pmemo)
    in_p, in_n = _star(t, {}, pmemo)
    return HierarchyClass(
        p if p <= cap else None,
        n if n <= cap else None,
        in_p,
        in_n,
        cap,
    )


def is_conuclear_equation(eq: Equation):
    """``(ok, trace)``: ok iff *eq* reads ``t -> u = 1``, t in P2*, u in N2*."""
    lhs, rhs = eq.lhs, eq.rhs
    if eq.kind != "eq":
        return False, {"reason": "not an equation of the form t -> u = 1"}
    if rhs != ONE and lhs == ONE:
        lhs, rhs = rhs, lhs
    if rhs != ONE or not (isinstance(lhs, Binary) and lhs.op == "impl"):
        return False, {"reason": "not an equation of the form t -> u = 1"}
    tc = classify_hierarchy(lhs.left)
    uc = classify_hierarchy(lhs.right)
    ok = tc.in_p2_star and uc.in_n2_star
    trace = {
        "antecedent": render(lhs.left),
        "antecedent_class": tc.as_dict(),
        "consequent": render(lhs.right),
        "consequent_class": uc.as_dict(),
    }
    if not ok:
        trace["reason"] = "antecedent not in P2*" if not tc.in_p2_star else "consequent not in N2*"
    return ok, trace


def random_term(rng, max_depth, names=("x", "y", "z")):
    """A random term of depth at most *max_depth* (``rng``: ``random.Random``)."""
    if max_depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.1:
            return ZERO
        if r < 0.2:
            return ONE
        return Var(rng.choice(names))
    op = rng.choice(OPS)
    return Binary(op, random_term(rng, max_depth - 1, names), random_term(rng, max_depth - 1, names))


def all_assignments(n, names):
    """Plain iterator over assignment dicts (for small oracles)."""
    for values in itertools.product(range(n), repeat=len(names)):
        yield dict(zip(names, values))
