"""End-to-end acceptance checks, one test per criterion.

Every check is exact.  Each test prints a single PASS/FAIL line.
"""

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np

from rlkit.algebra import (
    FiniteResiduatedLattice,
    check_equation,
    classify,
    conuclear_image,
    direct_product,
    generated_subalgebra,
    heyting_chain,
    is_conucleus,
    is_homomorphism,
    potency,
    residuation_equations,
    residuation_forall,
    validate_algebra,
)
from rlkit.corpus import algebra_corpus, chains, corpus_frames
from rlkit.errors import ConsistencyError
from rlkit.poset_product import (
    Frame,
    ac_criteria,
    box_conucleus,
    build_poset_product,
    enumerate_ac_labelings,
    labeling_leq,
    pointwise_leq,
)
from rlkit.posets import antichain, chain, is_chain, is_root_system, validate_poset
from rlkit.semantics import (
    RelationalModel,
    all_upsets,
    flow_of,
    forces,
    frame_valid,
    kripke_bridge,
    kripke_forces,
    standard_axioms,
    temporal_crosscheck_all,
    temporal_values,
)
from rlkit.structure import conuclear_preservation_check, epsilon_embedding, represent_finite_gbl
from rlkit.syntax import (
    Binary,
    Equation,
    classify_hierarchy,
    is_conuclear_equation,
    parse,
    parse_equation,
    subterms,
    variables,
)

import oracles
from test_syntax import HIERARCHY_TABLE

L2, L3, L4, L5 = chains(2, 3, 4, 5)
G3 = heyting_chain(3)
FORK = validate_poset(["b", "t1", "t2"], [("b", "t1"), ("b", "t2")])


def report(capsys, n, title, failures, detail=""):
    status = "PASS" if not failures else "FAIL"
    with capsys.disabled():
        print(f"\n[{status}] criterion {n:>2}: {title} {detail}".rstrip())
    assert not failures, failures[:5]


@lru_cache(maxsize=None)
def frames():
    return tuple(corpus_frames(4))


@lru_cache(maxsize=None)
def products():
    return tuple(build_poset_product(F, check=False) for F in frames())


@lru_cache(maxsize=None)
def algebras():
    return tuple(algebra_corpus())


def named(A, name):
    A.name = name
    return A


# ---------------------------------------------------------------- 1

def corrupt_impl(A, y, z, value):
    impl = np.array(A.impl)
    impl[y, z] = value
    return FiniteResiduatedLattice(A.size, A.meet, A.join, A.prod, impl, A.bottom, A.top)


def test_01_axiom_equivalence(capsys):
    valid = list(algebras())
    for A in (L5, direct_product([L3, L5]), G3):
        for a in range(A.size):
            valid.append(generated_subalgebra(A, [a])[1])
    rng = np.random.default_rng(20240601)
    corrupted = []
    while len(corrupted) < 20:
        A = valid[int(rng.integers(len(valid)))]
        y, z = (int(v) for v in rng.integers(A.size, size=2))
        value = int((A.impl[y, z] + rng.integers(1, A.size)) % A.size)
        corrupted.append(corrupt_impl(A, y, z, value))
    failures = []
    for A in valid:
        f, e = residuation_forall(A), residuation_equations(A)
        if f is not None or e is not None or not validate_algebra(A).ok:
            failures.append(("valid algebra rejected", A.name, f, e))
    for A in corrupted:
        f, e = residuation_forall(A), residuation_equations(A)
        if f is None or e is None:
            failures.append(("routes disagree or corruption accepted", f, e))
        elif (f["x"], f["y"], f["z"]) != oracles.residuation_failure(A):
            failures.append(("biconditional witness differs from scan", f))
        try:
            if validate_algebra(A).ok:
                failures.append(("corruption accepted",))
        except ConsistencyError as exc:
            failures.append(("ConsistencyError", str(exc)))
    report(capsys, 1, "axiom equivalence", failures, f"({len(valid)} algebras, {len(corrupted)} corruptions)")


# ---------------------------------------------------------------- 2

def test_02_box_is_conucleus(capsys):
    failures = []
    for F, P in zip(frames(), products()):
        D, sigma = box_conucleus(F)
        ok, cond, wit = is_conucleus(D, sigma)
        if not ok:
            failures.append((F.describe(), cond, wit))
            continue
        if not conuclear_image(D, sigma).same_tables(P.algebra):
            failures.append((F.describe(), "image differs"))
    report(capsys, 2, "box is a conucleus, P(F) = conuclear image", failures, f"({len(frames())} frames)")


# ---------------------------------------------------------------- 3

def larger_frames():
    V = validate_poset(list("abcde"), [("a", "c"), ("b", "c"), ("c", "d"), ("c", "e")])
    return [Frame(chain(6), [L4] * 6), Frame(antichain(6), [L4] * 6), Frame(V, [L4, L3, L4, L4, L4])]


def test_03_ac_criteria_agree(capsys):
    failures = []
    checked = 0
    family = [F for F in itertools.chain(frames(), larger_frames()) if F.carrier <= 4096]
    for F in family:
        found = set()
        for code in range(F.carrier):
            f = tuple(int(v) for v in F.decode(code))
            crit = ac_criteria(F, f)
            checked += 1
            if len(set(crit)) != 1:
                failures.append((F.describe(), f, crit))
            if crit[0]:
                found.add(f)
        if found != set(enumerate_ac_labelings(F)):
            failures.append((F.describe(), "enumeration differs"))
    for F in family[::25]:
        if set(enumerate_ac_labelings(F)) != oracles.ac_labelings_oracle(F):
            failures.append((F.describe(), "oracle differs"))
    count = len(enumerate_ac_labelings(Frame(chain(2), [L2, L2])))
    if count != 3:
        failures.append(("2-chain of L2", count))
    report(capsys, 3, "ac-labeling criteria agree", failures,
           f"({len(family)} frames, {checked} choice functions, 2-chain count {count})")


# ---------------------------------------------------------------- 4

def test_04_comparability(capsys):
    failures = []
    pairs = 0
    for F, P in zip(frames(), products()):
        labs = np.array(P.labelings)
        # pointwise order, vectorized per node
        pw = np.ones((P.size, P.size), dtype=bool)
        for x, A in enumerate(F.algebras):
            pw &= A.order[labs[:, x][:, None], labs[:, x][None, :]]
        for i, f in enumerate(P.labelings):
            for j, g in enumerate(P.labelings):
                if labeling_leq(F, f, g) != pw[i, j]:
                    failures.append((F.describe(), f, g))
        pairs += P.size ** 2
        if not np.array_equal(pw, P.algebra.order):
            failures.append((F.describe(), "algebra order differs"))
    for F, P in list(zip(frames(), products()))[::50]:
        for f in P.labelings:
            for g in P.labelings:
                if pointwise_leq(F, f, g) != labeling_leq(F, f, g):
                    failures.append((F.describe(), f, g, "scalar"))
    report(capsys, 4, "labeling_leq is the pointwise order", failures, f"({pairs} pairs)")


# ---------------------------------------------------------------- 5

@lru_cache(maxsize=None)
def gbl_frames():
    """Frames with GBL factors that are not MV chains."""
    L2xL2 = named(direct_product([L2, L2]), "L2xL2")
    out = []
    for F in corpus_frames(3, [G3, L3, L2xL2]):
        out.append((F, build_poset_product(F, check=False)))
    return out


def closure_items(F, B):
    """(item, applies, holds) for the nine closure statements."""
    cs = [classify(A) for A in F.algebras]
    c = classify(B)
    two = all(A.size == 2 for A in F.algebras)
    mv_chains = all(x.is_mv and x.is_chain for x in cs)
    root = is_root_system(F.poset)
    lin = is_chain(F.poset)
    k = max(potency(A) for A in F.algebras)
    return [
        (1, all(x.is_gbl for x in cs), c.is_gbl),
        (2, all(x.is_mv for x in cs), c.is_gbl),
        (3, True, potency(B) <= k),
        (4, two, c.is_heyting),
        (5, root and mv_chains, c.is_bl),
        (6, root and two, c.is_godel),
        (7, lin and all(x.is_chain for x in cs), c.is_chain),
        (8, lin and mv_chains, c.is_bl and c.is_chain),
        (9, lin and two, c.is_godel and c.is_chain),
    ]


def test_05_closure_lemma(capsys):
    failures = []
    hits = [0] * 10
    pairs = list(zip(frames(), (P.algebra for P in products())))
    pairs += [(F, P.algebra) for F, P in gbl_frames()]
    for F, B in pairs:
        if not validate_algebra(B).ok:
            failures.append((F.describe(), "not a residuated lattice"))
        for item, applies, holds in closure_items(F, B):
            if applies:
                hits[item] += 1
                if not holds:
                    failures.append((F.describe(), item))
    if min(hits[1:]) == 0:
        failures.append(("an item never applied", hits))
    report(capsys, 5, "closure lemma, all nine items", failures,
           f"({len(pairs)} frames; instances per item {hits[1:]})")


# ---------------------------------------------------------------- 6

def test_06_epsilon_embedding(capsys):
    failures = []
    tested = 0
    for A in algebras():
        c = classify(A)
        if not (c.is_gbl and c.potency is not None and A.size <= 64):
            continue
        tested += 1
        try:
            emb = epsilon_embedding(A)
        except ConsistencyError as exc:
            failures.append((A.name, str(exc)))
            continue
        F = emb.value_frame.frame
        if len(set(emb.map)) != A.size or not is_homomorphism(A, emb.product.algebra, emb.map):
            failures.append((A.name, "not an injective homomorphism"))
        if F.carrier <= 4096:
            ac = oracles.ac_labelings_oracle(F)
            if not all(f in ac for f in emb.labelings):
                failures.append((A.name, "eps_a not an ac-labeling"))
    report(capsys, 6, "epsilon embedding", failures, f"({tested} k-potent GBL algebras)")


# ---------------------------------------------------------------- 7

def test_07_representation(capsys):
    extra = [G3, named(direct_product([L2, L2]), "L2xL2"), named(direct_product([L2, L3]), "L2xL3"), L2, L3, L4, L5]
    family = [A for A in algebras() if classify(A).is_gbl] + extra
    failures = []
    for A in family:
        try:
            rep = represent_finite_gbl(A)
        except ConsistencyError as exc:
            failures.append((A.name, str(exc)))
            continue
        B = rep.product.algebra
        if B.size != A.size or len(set(rep.witness)) != A.size or not is_homomorphism(A, B, rep.witness):
            failures.append((A.name, "witness is not an isomorphism"))
        if A.size <= 8 and not oracles.is_isomorphic_bruteforce(A, B):
            failures.append((A.name, "brute force finds no isomorphism"))
    report(capsys, 7, "finite GBL representation", failures, f"({len(family)} algebras)")


# ---------------------------------------------------------------- 8

BRIDGE_AXIOMS = {
    "divisibility": "x * (x -> y) <-> x & y",
    "prelinearity": "(x -> y) | (y -> x)",
    "involution": "x <-> ((x -> 0) -> 0)",
    "idempotence": "x * x <-> x",
}


def test_08_forcing_algebra_bridge(capsys):
    failures = []
    tally = {name: [0, 0] for name in BRIDGE_AXIOMS}
    for F, P in zip(frames(), products()):
        for name, text in BRIDGE_AXIOMS.items():
            phi = parse(text)
            fv = frame_valid(F, phi, product=P)
            alg = check_equation(P.algebra, Equation(phi, parse("1")))
            tally[name][0 if fv.valid else 1] += 1
            if fv.valid != alg.valid:
                failures.append((F.describe(), name))
            elif not fv.valid:
                model = RelationalModel(F, fv.valuation)
                if forces(model, fv.node, phi):
                    failures.append((F.describe(), name, "witness node is forced"))
    detail = ", ".join(f"{k} {v[0]}/{v[1]}" for k, v in tally.items())
    report(capsys, 8, "frame validity equals validity in P(F)", failures, f"(valid/refuted: {detail})")


# ---------------------------------------------------------------- 9

def test_09_kripke_bridge(capsys):
    failures = []
    checked = 0
    formulas = [ax.formula for ax in standard_axioms()]
    formulas += [parse(t) for t in ("~~x -> x", "x | ~x", "(x -> y) -> (~y -> ~x)", "~(x & y) -> ~x | ~y")]
    for F in corpus_frames(4, [L2]):
        P = F.poset
        ups = all_upsets(P)
        for phi in formulas:
            names = variables(phi)
            for combo in itertools.product(ups, repeat=len(names)):
                upsets = dict(zip(names, combo))
                model = RelationalModel(F, kripke_bridge(F, upsets))
                idx = {n: {P.index(s) for s in S} for n, S in upsets.items()}
                for x in range(P.size):
                    a = forces(model, x, phi)
                    b = oracles.kripke_oracle(P, idx, x, phi)
                    c = kripke_forces(P, upsets, x, phi)
                    checked += 1
                    if not a == b == c:
                        failures.append((F.describe(), str(phi), upsets, x))
    report(capsys, 9, "forcing equals Kripke forcing on L2 frames", failures, f"({checked} node checks)")


# ---------------------------------------------------------------- 10

TEMPORAL_FORMULAS = [
    "x -> y",
    "x * y",
    "x -> 0",
    "(x -> y) -> y",
    "x * (x -> y)",
    "(x -> y) -> (x * y)",
    "((x -> 0) -> 0) -> x",
    "(x * y -> 0) -> (x -> (y -> 0))",
    "(x -> y) * (y -> x)",
    "((x -> y) -> x) -> x",
]


def clause(a, b, up, above, t):
    if all(a[u] <= b[u] for u in up):
        return 1
    if b[t] < a[t] < 1 and all(b[u] == 1 for u in above):
        return 2
    return 3


def clauses_hit(flow, v, phi):
    out = set()
    P = flow.poset
    for s in subterms(phi):
        if isinstance(s, Binary) and s.op == "impl":
            a, b = temporal_values(flow, v, s.left), temporal_values(flow, v, s.right)
            out |= {clause(a, b, P.up(t), P.strict_above[t], t) for t in range(P.size)}
    return out


def test_10_temporal_crosscheck(capsys):
    failures = []
    checked = 0
    fam = list(corpus_frames(3, chains(2, 3, 4)))
    for text in TEMPORAL_FORMULAS:
        phi = parse(text)
        assert len(variables(phi)) <= 2
        for F in fam:
            try:
                checked += temporal_crosscheck_all(F, phi)
            except ConsistencyError as exc:
                failures.append(str(exc))
    # every clause fires somewhere
    hit = set()
    F = Frame(chain(2), [L3, L3])
    flow = flow_of(F)
    third = [Fraction(i, 2) for i in range(3)]
    labs = enumerate_ac_labelings(F)
    for text in TEMPORAL_FORMULAS:
        phi = parse(text)
        for f, g in itertools.product(labs, repeat=2):
            v = {}
            for p, lab in (("x", f), ("y", g)):
                for t in range(2):
                    v[(p, t)] = third[lab[t]]
            hit |= clauses_hit(flow, v, phi)
    if hit != {1, 2, 3}:
        failures.append(("clauses exercised", sorted(hit)))
    report(capsys, 10, "temporal and relational values agree", failures,
           f"({len(fam)} frames, {checked} valuations, clauses {sorted(hit)})")


# ---------------------------------------------------------------- 11

def test_11_zoo_instances(capsys):
    failures = []
    prelin = parse(BRIDGE_AXIOMS["prelinearity"])
    div = parse(BRIDGE_AXIOMS["divisibility"])
    idem = parse(BRIDGE_AXIOMS["idempotence"])
    roots = 0
    for F, P in zip(frames(), products()):
        if not all(classify(A).is_mv and classify(A).is_chain for A in F.algebras):
            failures.append((F.describe(), "corpus factor not an MV chain"))
        if is_root_system(F.poset):
            roots += 1
            if not frame_valid(F, prelin, product=P).valid:
                failures.append((F.describe(), "prelinearity refuted"))
        if not frame_valid(F, div, product=P).valid:
            failures.append((F.describe(), "divisibility refuted"))
    fork = frame_valid(Frame(FORK, [L2] * 3), prelin)
    if fork.valid or fork.node != "b":
        failures.append(("L2 fork", fork.valid, fork.node))
    twos = list(corpus_frames(4, [L2]))
    for F in twos:
        if not frame_valid(F, idem).valid:
            failures.append((F.describe(), "idempotence refuted"))
    one = frame_valid(Frame(chain(1), [L3]), idem)
    if one.valid:
        failures.append(("one-point L3", "idempotence valid"))
    report(capsys, 11, "zoo instances", failures,
           f"({roots} root-system frames, {len(frames())} MV-chain frames, {len(twos)} L2 frames)")


# ---------------------------------------------------------------- 12

CONUCLEAR_INEQUALITIES = [
    "x * (x -> y) <= x & y",
    "x * y <= x & y",
    "x & (x -> y) <= y",
    "x * (x -> y) <= y",
    "x <= (x -> 0) -> 0",
    "x * x <= x * x * x",
    "(x -> y) * (y -> z) <= x -> z",
    "x * (y | z) <= x * y | x * z",
]


def test_12_hierarchy_and_preservation(capsys):
    failures = []
    for text, p, n, p2s, n2s in HIERARCHY_TABLE:
        h = classify_hierarchy(parse(text))
        if (h.p_level, h.n_level, h.in_p2_star, h.in_n2_star) != (p, n, p2s, n2s):
            failures.append((text, h.as_dict()))
    ok, trace = is_conuclear_equation(parse_equation("x * (x -> y) -> x & y = 1"))
    if not ok:
        failures.append(("divisibility implication", trace))
    for text in CONUCLEAR_INEQUALITIES:
        eq = parse_equation(text)
        if not is_conuclear_equation(Equation(Binary("impl", eq.lhs, eq.rhs), parse("1")))[0]:
            failures.append((text, "not conuclear"))
    triples = []
    for A in algebras():
        triples.append((A.name, A, list(range(A.size))))
    for F in corpus_frames(3):
        D, sigma = box_conucleus(F)
        triples.append((F.describe(), D, sigma))
    violations = 0
    preserved_nontrivially = 0
    for label, A, sigma in triples:
        for text in CONUCLEAR_INEQUALITIES:
            try:
                res = conuclear_preservation_check(A, sigma, text)
            except ConsistencyError as exc:
                violations += 1
                failures.append((label, text, str(exc)))
                continue
            if not res["preserved"]:
                violations += 1
                failures.append((label, text))
            elif res["valid_in_algebra"]:
                preserved_nontrivially += 1
    report(capsys, 12, "hierarchy table and conuclear preservation", failures,
           f"({len(triples) * len(CONUCLEAR_INEQUALITIES)} triples, {preserved_nontrivially} valid before and after, "
           f"{violations} violations)")
