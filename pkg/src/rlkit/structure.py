"""Value frames, the epsilon embedding and the finite GBL representation."""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import (
    check_equation,
    classify,
    conuclear_image,
    induced_algebra,
    is_conucleus,
    is_homomorphism,
    lukasiewicz_chain,
    morphism_search,
    potency,
)
from .errors import ConsistencyError, PreconditionError, SizeError
from .filters import quotient, si_analysis, value_poset, values
from .poset_product import Frame, build_poset_product, is_ac_labeling
from .syntax import Binary, Equation, classify_hierarchy, parse_equation

STRUCTURE_CAP = 256


@dataclass
class ValueFrame:
    """F(A): the values of A under inclusion, each carrying A_x.

    ``quotients[i]`` is ``(A/x, projection)``, ``minimal[i]`` the least
    nontrivial filter of A/x and ``factors[i]`` the induced algebra on it.
    """

    base: object
    values: list
    quotients: list
    minimal: list
    factors: list
    frame: Frame

    @property
    def factor_names(self):
        return [A.name for A in self.factors]

    def members(self, i):
        return self.minimal[i].elements


def value_frame(A, cap=STRUCTURE_CAP) -> ValueFrame:
    if A.size > cap:
        raise SizeError(f"{A.size} elements exceed the structure cap {cap}")
    if not classify(A).is_gbl:
        raise PreconditionError("value frames are built for GBL-algebras only")
    k = potency(A)
    vals = values(A)
    quotients, minimal, factors = [], [], []
    for F in vals:
        Q, proj = quotient(A, F)
        si = si_analysis(Q)
        if not si.is_si:
            raise ConsistencyError(f"quotient by the value {F} is not subdirectly irreducible")
        M = si.min_nontrivial_filter
        elems = M.elements
        least = [e for e in elems if all(Q.order[e, o] for o in elems)]
        if len(least) != 1:
            raise ConsistencyError(f"minimal filter {M} has no least element")
        Ax = induced_algebra(Q, elems, top=Q.top, bottom=least[0])
        m = Ax.size
        if not 2 <= m <= k + 1:
            raise ConsistencyError(f"factor of size {m} outside 2..{k + 1}")
        if morphism_search(Ax, lukasiewicz_chain(m), "isomorphism") is None:
            raise ConsistencyError(f"factor over {F} is not a Lukasiewicz chain")
        Ax.name = f"L{m}"
        quotients.append((Q, proj))
        minimal.append(M)
        factors.append(Ax)
    frame = Frame(value_poset(vals), factors)
    return ValueFrame(A, vals, quotients, minimal, factors, frame)


def epsilon_labeling(vf, a):
    """eps_a: the class of a in A/x where it lies in A_x, bottom elsewhere."""
    out = []
    for (Q, proj), M, Ax in zip(vf.quotients, vf.minimal, vf.factors):
        cls = proj[a]
        elems = M.elements
        out.append(elems.index(cls) if cls in M else Ax.bottom)
    return tuple(out)


@dataclass
class EmbeddingReport:
    value_frame: ValueFrame
    product: object
    labelings: list
    map: list

    def as_dict(self):
        return {
            "delta_size": len(self.value_frame.values),
            "factors": self.value_frame.factor_names,
            "epsilon": [list(f) for f in self.labelings],
            "map": self.map,
            "embedding_ok": True,
        }


def epsilon_embedding(A, vf=None) -> EmbeddingReport:
    """Verify that a -> eps_a is an injective homomorphism into P(F(A))."""
    vf = vf or value_frame(A)
    P = build_poset_product(vf.frame)
    labs = [epsilon_labeling(vf, a) for a in range(A.size)]
    for a, f in enumerate(labs):
        if not is_ac_labeling(vf.frame, f):
            raise ConsistencyError(f"eps_{a} = {f} is not an ac-labeling")
    f = [P.index_of(lab) for lab in labs]
    if len(set(f)) != len(f):
        raise ConsistencyError("epsilon is not injective")
    if not is_homomorphism(A, P.algebra, f):
        raise ConsistencyError("epsilon is not a homomorphism")
    return EmbeddingReport(vf, P, labs, f)


@dataclass
class Representation:
    value_frame: ValueFrame
    product: object
    witness: list
    epsilon_is_iso: bool

    def as_dict(self, name=None):
        return {
            "algebra": name,
            "delta_size": len(self.value_frame.values),
            "factors": self.value_frame.factor_names,
            "embedding_ok": True,
            "iso_ok": True,
            "epsilon_is_iso": self.epsilon_is_iso,
            "witness": self.witness,
        }


def represent_finite_gbl(A) -> Representation:
    """An isomorphism A -> P(F(A)); epsilon is tried first."""
    emb = epsilon_embedding(A)
    P = emb.product
    witness = morphism_search(A, P.algebra, "isomorphism", candidate=emb.map)
    if witness is None:
        raise ConsistencyError(f"{A!r} is not isomorphic to the poset product over its values")
    return Representation(emb.value_frame, P, witness, witness == emb.map)


def _as_inequality(ineq):
    if isinstance(ineq, str):
        ineq = parse_equation(ineq)
    if ineq.kind == "leq":
        return ineq
    lhs, rhs = ineq.lhs, ineq.rhs
    if isinstance(lhs, Binary) and lhs.op == "impl" and rhs == parse_equation("1").lhs:
        return Equation(lhs.left, lhs.right, "leq")
    raise PreconditionError("expected an inequality t <= u or an equation t -> u = 1")


def conuclear_preservation_check(A, sigma, ineq):
    """Check that a valid P2*/N2* inequality survives passing to A_sigma."""
    ineq = _as_inequality(ineq)
    tc, uc = classify_hierarchy(ineq.lhs), classify_hierarchy(ineq.rhs)
    if not tc.in_p2_star:
        raise PreconditionError("left side is not in P2*")
    if not uc.in_n2_star:
        raise PreconditionError("right side is not in N2*")
    ok, cond, wit = is_conucleus(A, sigma)
    if not ok:
        raise PreconditionError(f"not a conucleus: {cond} fails at {wit}")
    before = check_equation(A, ineq)
    image = conuclear_image(A, sigma)
    after = check_equation(image, ineq)
    if before.valid and not after.valid:
        raise ConsistencyError(f"{ineq} holds in the algebra but fails in its conuclear image at {after.counter}")
    return {
        "inequality": str(ineq),
        "valid_in_algebra": before.valid,
        "valid_in_image": after.valid,
        "image_size": image.size,
        "preserved": (not before.valid) or after.valid,
    }
