"""Slow, independent reference computations (pure Python, no numpy)."""

from fractions import Fraction
from itertools import permutations, product

from rlkit.syntax import Const, Var


def luk_value(k, i):
    return Fraction(i, k - 1)


def luk_ops(a, b):
    """meet, join, prod, impl on [0, 1] rationals."""
    return {
        "meet": min(a, b),
        "join": max(a, b),
        "prod": max(Fraction(0), a + b - 1),
        "impl": min(Fraction(1), 1 - a + b),
    }


def luk_eval(t, env):
    """Term value in the standard MV-algebra with Fraction inputs."""
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return Fraction(t.value)
    return luk_ops(luk_eval(t.left, env), luk_eval(t.right, env))[t.op]


def godel_eval(t, env, top):
    """Term value in the Goedel chain 0..top."""
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return top if t.value == 1 else 0
    a, b = godel_eval(t.left, env, top), godel_eval(t.right, env, top)
    if t.op in ("meet", "prod"):
        return min(a, b)
    if t.op == "join":
        return max(a, b)
    return top if a <= b else b


def tables(A):
    return {op: [[int(v) for v in row] for row in A.table(op)] for op in ("meet", "join", "prod", "impl")}


def leq_table(T, x, y):
    return T["meet"][x][y] == x


def residuation_failure(A):
    """First (x, y, z) breaking x*y <= z  iff  x <= y->z, scanning loops."""
    T = tables(A)
    n = A.size
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if leq_table(T, T["prod"][x][y], z) != leq_table(T, x, T["impl"][y][z]):
                    return (x, y, z)
    return None


def all_filters(A):
    """Every subset that is a deductive filter, by brute force."""
    T = tables(A)
    n = A.size
    out = []
    for bits in range(1, 1 << n):
        S = {i for i in range(n) if bits >> i & 1}
        up = all(y in S for x in S for y in range(n) if leq_table(T, x, y))
        closed = all(T["prod"][x][y] in S for x in S for y in S)
        if up and closed:
            out.append(frozenset(S))
    return out


def values_bruteforce(A):
    fs = all_filters(A)
    out = set()
    for F in fs:
        for x in range(A.size):
            if x not in F and not any(F < G and x not in G for G in fs):
                out.add(F)
    return out


def partial_orders(n):
    """All partial orders on range(n) as frozensets of strict pairs."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    out = []
    for bits in range(1 << len(pairs)):
        rel = {pairs[k] for k in range(len(pairs)) if bits >> k & 1}
        if any((j, i) in rel for i, j in rel):
            continue
        if all((i, l) in rel for i, j in rel for k, l in rel if j == k):
            out.append(frozenset(rel))
    return out


def count_posets_up_to_iso(n):
    seen = set()
    for rel in partial_orders(n):
        seen.add(min(tuple(sorted((p[i], p[j]) for i, j in rel)) for p in permutations(range(n))))
    return len(seen)


def strict_above(P, x):
    return [y for y in range(P.size) if y != x and P.leq[x][y]]


def box_oracle(frame, f):
    out = []
    for x in range(frame.size):
        if all(f[y] == frame.algebras[y].top for y in strict_above(frame.poset, x)):
            out.append(f[x])
        else:
            out.append(frame.algebras[x].bottom)
    return tuple(out)


def ac_labelings_oracle(frame):
    ranges = [range(A.size) for A in frame.algebras]
    return {f for f in product(*ranges) if box_oracle(frame, f) == f}


def kripke_oracle(P, upsets, x, t):
    """Intuitionistic forcing by recursion on the node (no sets)."""
    if isinstance(t, Var):
        return x in upsets[t.name]
    if isinstance(t, Const):
        return t.value == 1
    if t.op in ("meet", "prod"):
        return kripke_oracle(P, upsets, x, t.left) and kripke_oracle(P, upsets, x, t.right)
    if t.op == "join":
        return kripke_oracle(P, upsets, x, t.left) or kripke_oracle(P, upsets, x, t.right)
    return all(
        not kripke_oracle(P, upsets, y, t.left) or kripke_oracle(P, upsets, y, t.right)
        for y in range(P.size) if P.leq[x][y]
    )


def is_isomorphic_bruteforce(A, B):
    if A.size != B.size:
        return False
    TA, TB = tables(A), tables(B)
    for p in permutations(range(B.size)):
        if all(p[TA[op][x][y]] == TB[op][p[x]][p[y]] for op in TA for x in range(A.size) for y in range(A.size)):
            return True
    return False
