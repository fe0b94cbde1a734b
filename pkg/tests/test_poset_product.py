import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlkit.algebra import (
    FiniteResiduatedLattice,
    check_equation,
    classify,
    conuclear_image,
    direct_product,
    heyting_chain,
    is_conucleus,
    is_homomorphism,
    lukasiewicz_chain,
    morphism_search,
)
from rlkit.errors import FormatError, SizeError
from rlkit.poset_product import (
    Frame,
    ac_criteria,
    box,
    box_conucleus,
    build_poset_product,
    dual_poset_product,
    enumerate_ac_labelings,
    frame_from_dict,
    is_ac_labeling,
    labeling_leq,
    load_frame,
    pointwise_leq,
)
from rlkit.posets import antichain, chain, validate_poset

import oracles

L2, L3, L4 = (lukasiewicz_chain(k) for k in (2, 3, 4))
FORK = validate_poset(["b", "t1", "t2"], [("b", "t1"), ("b", "t2")])


def frames_small():
    """A fixed spread of small frames."""
    out = []
    for P in (chain(1), chain(2), antichain(2), chain(3), FORK, validate_poset(list("abc"), [("a", "c"), ("b", "c")])):
        for algs in itertools.product((L2, L3), repeat=P.size):
            out.append(Frame(P, algs))
    return out


FRAMES = frames_small()


class TestBox:
    def test_examples(self):
        F = Frame(chain(2), [L3, L3])
        assert box(F, (1, 1)) == (0, 1)
        assert box(F, (2, 2)) == (2, 2)
        G = Frame(chain(1), [L3])
        assert all(box(G, (v,)) == (v,) for v in range(3))

    def test_out_of_range(self):
        with pytest.raises(FormatError):
            box(Frame(chain(2), [L2, L2]), (0, 2))

    def test_trivial_factor_rejected(self):
        T = FiniteResiduatedLattice(1, [[0]], [[0]], [[0]], [[0]], 0, 0)
        with pytest.raises(FormatError):
            Frame(chain(1), [T])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, len(FRAMES) - 1), st.data())
    def test_matches_oracle_and_is_interior(self, k, data):
        F = FRAMES[k]
        f = tuple(data.draw(st.integers(0, A.size - 1)) for A in F.algebras)
        b = box(F, f)
        assert b == oracles.box_oracle(F, f)
        assert box(F, b) == b
        assert pointwise_leq(F, b, f)


class TestLabelings:
    def test_examples(self):
        assert enumerate_ac_labelings(Frame(chain(2), [L2, L2])) == [(0, 0), (0, 1), (1, 1)]
        assert len(enumerate_ac_labelings(Frame(antichain(2), [L2, L2]))) == 4
        assert len(enumerate_ac_labelings(Frame(chain(2), [L3, L3]))) == 5

    def test_criteria_examples(self):
        F = Frame(chain(2), [L2, L2])
        assert ac_criteria(F, (1, 0)) == (False, False, False)
        assert is_ac_labeling(F, (0, 1))
        G = Frame(FORK, [L3, L3, L3])
        assert is_ac_labeling(G, (0, 1, 1))

    @pytest.mark.parametrize("idx", range(len(FRAMES)))
    def test_enumeration_matches_oracle(self, idx):
        F = FRAMES[idx]
        assert set(enumerate_ac_labelings(F)) == oracles.ac_labelings_oracle(F)

    def test_order_is_mixed_radix_over_linear_extension(self):
        P = validate_poset(["hi", "lo"], [("lo", "hi")])
        F = Frame(P, [L2, L3])
        assert F.order == (1, 0)
        labs = enumerate_ac_labelings(F)
        assert labs == sorted(labs, key=lambda f: (f[1], f[0]))

    def test_cap(self):
        with pytest.raises(SizeError):
            enumerate_ac_labelings(Frame(antichain(3), [L4] * 3), cap=10)

    def test_comparability_examples(self):
        F = Frame(chain(2), [L2, L2])
        assert labeling_leq(F, (0, 0), (0, 1))
        assert labeling_leq(F, (0, 1), (1, 1))
        assert not labeling_leq(F, (1, 1), (0, 1))


class TestProduct:
    def test_two_chain_of_l2_is_heyting_chain(self):
        P = build_poset_product(Frame(chain(2), [L2, L2]))
        assert P.algebra.same_tables(heyting_chain(3))

    def test_antichain_is_direct_product(self):
        P = build_poset_product(Frame(antichain(2), [L2, L2]))
        assert morphism_search(P.algebra, direct_product([L2, L2]), "isomorphism") is not None

    def test_one_point(self):
        assert build_poset_product(Frame(chain(1), [L3])).algebra.same_tables(L3)

    def test_box_on_two_chain_direct_product(self):
        D, sigma = box_conucleus(Frame(chain(2), [L2, L2]))
        assert is_conucleus(D, sigma)[0]
        assert conuclear_image(D, sigma).same_tables(heyting_chain(3))

    def test_duals(self):
        F = Frame(FORK, [L2, L2, L2])
        P, Q = build_poset_product(F), dual_poset_product(F)
        assert not classify(P.algebra).is_bl
        c = classify(Q.algebra)
        assert c.is_bl and c.is_godel
        A = Frame(antichain(2), [L2, L3])
        assert build_poset_product(A).algebra.same_tables(dual_poset_product(A).algebra)
        C = dual_poset_product(Frame(chain(2), [L2, L2])).algebra
        assert classify(C).is_chain and C.size == 3

    @pytest.mark.parametrize("idx", range(len(FRAMES)))
    def test_pointwise_operations_and_order(self, idx):
        F = FRAMES[idx]
        P = build_poset_product(F)
        A = P.algebra
        for i, f in enumerate(P.labelings):
            for j, g in enumerate(P.labelings):
                for op in ("meet", "join", "prod"):
                    expect = tuple(int(F.algebras[x].table(op)[f[x], g[x]]) for x in range(F.size))
                    assert P.labelings[A.table(op)[i, j]] == expect
                impl = tuple(int(F.algebras[x].impl[f[x], g[x]]) for x in range(F.size))
                assert P.labelings[A.impl[i, j]] == oracles.box_oracle(F, impl)
                assert bool(A.order[i, j]) == pointwise_leq(F, f, g) == labeling_leq(F, f, g)

    def test_factorwise_subalgebra_embeds(self):
        for P in (chain(2), FORK, antichain(2)):
            small = build_poset_product(Frame(P, [L2] * P.size))
            big = build_poset_product(Frame(P, [L3] * P.size))
            # L2 sits in L3 as {0, 2}
            f = [big.index_of(tuple(2 * v for v in lab)) for lab in small.labelings]
            assert is_homomorphism(small.algebra, big.algebra, f)
            assert len(set(f)) == len(f)

    def test_lattice_monoid_equations_transfer(self):
        eqs = [
            "x & y = y & x", "x | (y & z) = (x | y) & (x | z)", "x * (y | z) = x * y | x * z",
            "x * y <= x & y", "x * 0 = 0", "x | 1 = 1", "(x * y) * z = x * (y * z)",
            "x * x * x = x * x", "x & (x | y) = x", "x * (y & z) <= x * y & x * z",
        ]
        for F in FRAMES[::5]:
            D = direct_product([F.algebras[x] for x in F.order])
            P = build_poset_product(F).algebra
            for e in eqs:
                if check_equation(D, e):
                    assert check_equation(P, e)


class TestFrameFiles:
    def test_roundtrip(self, tmp_path):
        F = Frame(FORK, [L2, L3, L3])
        path = tmp_path / "fork.frame"
        path.write_text(json.dumps(F.to_dict()), encoding="utf-8")
        G = load_frame(path)
        assert G.poset.same_as(F.poset)
        assert all(a.same_tables(b) for a, b in zip(F.algebras, G.algebras))

    def test_inline_algebra_and_errors(self, tmp_path):
        data = {"poset": {"elements": ["a"]}, "algebras": {"a": L3.to_dict()}}
        assert frame_from_dict(data).algebras[0].same_tables(L3)
        with pytest.raises(FormatError):
            frame_from_dict({"poset": {"elements": ["a", "b"]}, "algebras": {"a": "L2"}})
        with pytest.raises(FormatError):
            load_frame(tmp_path / "missing.frame")
        bad = tmp_path / "bad.frame"
        bad.write_text("{", encoding="utf-8")
        with pytest.raises(FormatError):
            load_frame(bad)


def test_decode_encode_roundtrip():
    F = Frame(FORK, [L2, L3, L4])
    codes = np.arange(F.carrier)
    assert np.array_equal(F.encode(F.decode(codes)), codes)
