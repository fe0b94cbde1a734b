"""Deterministic test corpora: frames and small algebras."""

from __future__ import annotations

import itertools

from .algebra import direct_product, generated_subalgebra, lukasiewicz_chain, morphism_search
from .poset_product import build_poset_product
from .semantics import frame_family

CORPUS_MAX = 64


def chains(*ks):
    return [lukasiewicz_chain(k) for k in ks]


def corpus_frames(max_nodes=4, algebras=None, max_carrier=None):
    """Frames up to *max_nodes* valued in *algebras* (default L2..L4)."""
    algebras = algebras if algebras is not None else chains(2, 3, 4)
    for F in frame_family(max_nodes, algebras):
        if max_carrier is None or F.carrier <= max_carrier:
            yield F


def _add_unique(out, A, limit):
    if A.size > limit or A.size < 2:
        return
    for B in out:
        if B.size == A.size and morphism_search(A, B, "isomorphism") is not None:
            return
    out.append(A)


def algebra_corpus(limit=CORPUS_MAX, subalgebras=True):
    """L2..L5, pairwise products, small poset products, 1-generated subalgebras.

    Deduplicated up to isomorphism, at most *limit* elements each.
    """
    base = chains(2, 3, 4, 5)
    out = []
    for A in base:
        _add_unique(out, A, limit)
    for A, B in itertools.combinations_with_replacement(base, 2):
        if A.size * B.size <= limit:
            P = direct_product([A, B])
            P.name = f"{A.name}x{B.name}"
            _add_unique(out, P, limit)
    for F in frame_family(3, chains(2, 3)):
        if F.carrier > 4 * limit:
            continue
        P = build_poset_product(F).algebra
        P.name = f"P{F.describe()}"
        _add_unique(out, P, limit)
    if subalgebras:
        for A in list(out):
            for a in range(A.size):
                elems, S = generated_subalgebra(A, [a])
                S.name = f"{A.name}<{a}>"
                _add_unique(out, S, limit)
    return out
